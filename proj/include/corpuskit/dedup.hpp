#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "corpuskit/document.hpp"

namespace corpuskit {

struct ShingleSet {
    std::string id;
    std::vector<uint64_t> hashes;  // sorted, unique
};

struct BandGeometry {
    size_t bands = 14;
    size_t rows = 8;
    size_t signature_size() const { return bands * rows; }
};

struct MinHashSignature {
    std::string id;
    std::vector<uint64_t> values;  // bands * rows entries, band-major
};

// Word n-gram digests after lowercasing and whitespace normalization.
// Texts with fewer than n words yield an empty set.
ShingleSet shingle(std::string_view id, std::string_view text, size_t n = 5);

// values[i] = min over the shingle set of xxh64(shingle bytes, seeds[i]).
// Throws std::runtime_error("too_short_for_dedup") on an empty shingle set;
// such documents bypass dedup and are kept.
MinHashSignature minhash(const ShingleSet& shingles, const std::vector<uint64_t>& seeds);

// |A intersect B| / |A union B| over the raw shingle sets.
double exact_jaccard(const ShingleSet& a, const ShingleSet& b);

// Fraction of signature positions that agree; unbiased Jaccard estimator.
double signature_match_fraction(const MinHashSignature& a, const MinHashSignature& b);

// Closed form 1 - (1 - s^rows)^bands for candidate probability at Jaccard s.
double lsh_candidate_probability(const BandGeometry& geometry, double jaccard);

// All pairs sharing at least one exactly-equal band, as sorted unique
// (smaller id, larger id) pairs.
std::vector<std::pair<std::string, std::string>> lsh_candidates(
    const std::vector<MinHashSignature>& signatures, const BandGeometry& geometry);

class UnionFind {
public:
    explicit UnionFind(size_t n);
    size_t find(size_t x);
    void unite(size_t a, size_t b);
    bool connected(size_t a, size_t b) { return find(a) == find(b); }

private:
    std::vector<size_t> parent_;
    std::vector<size_t> rank_;
};

struct DuplicateClusters {
    // Each cluster sorted ascending; the first member is the survivor.
    // Singleton documents appear as singleton clusters.
    std::vector<std::vector<std::string>> clusters;

    const std::string& survivor_of(const std::string& id) const;
    bool is_survivor(const std::string& id) const { return survivor_of(id) == id; }
    size_t total_members() const;

    std::map<std::string, size_t> cluster_index;  // id -> position in clusters
};

DuplicateClusters cluster_and_dedupe(
    const std::vector<std::pair<std::string, std::string>>& candidates,
    const std::vector<std::string>& all_ids);

struct DedupOptions {
    size_t shingle_words = 5;
    BandGeometry geometry;
    uint64_t run_seed = 0;
    // When set, a candidate pair is only united if its exact shingle
    // Jaccard reaches this threshold.
    std::optional<double> verify_jaccard;
    enum class Scope { global, per_source } scope = Scope::global;
    size_t threads = 1;
};

struct DedupReport {
    size_t documents = 0;
    size_t bypassed = 0;  // too short to shingle; kept unconditionally
    size_t candidate_pairs = 0;
    size_t clusters_with_duplicates = 0;
    size_t dropped = 0;
};

// Full pass over a corpus: signatures, banding, clustering, and one
// stage=dedup verdict appended to every participating document (drop with
// reason "near_duplicate" for cluster non-survivors).
DedupReport dedupe_documents(std::vector<DocumentRecord>& docs, const DedupOptions& opts);

struct SignatureCache {
    BandGeometry geometry;
    uint64_t run_seed = 0;
    // Keyed by xxh64 of the document id.
    std::vector<std::pair<uint64_t, std::vector<uint64_t>>> records;
};

// Binary cache layout (all integers little-endian):
//   bytes 0-3   magic "CKSG"
//   u32         version (1)
//   u32         bands
//   u32         rows
//   u64         run seed
//   u64         record count
//   per record: u64 xxh64(doc id), bands*rows u64 signature values
void write_signature_cache(const std::string& path, const SignatureCache& cache);
SignatureCache read_signature_cache(const std::string& path);

}  // namespace corpuskit
