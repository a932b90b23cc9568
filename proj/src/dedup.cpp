#include "corpuskit/dedup.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "corpuskit/hash.hpp"
#include "corpuskit/parallel.hpp"
#include "corpuskit/textutil.hpp"

namespace corpuskit {

namespace {

void le64_bytes(uint64_t v, unsigned char out[8]) {
    for (int i = 0; i < 8; ++i) out[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
}

void write_u32(std::ofstream& out, uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
    out.write(reinterpret_cast<const char*>(b), 4);
}

void write_u64(std::ofstream& out, uint64_t v) {
    unsigned char b[8];
    le64_bytes(v, b);
    out.write(reinterpret_cast<const char*>(b), 8);
}

uint32_t read_u32(std::ifstream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

uint64_t read_u64(std::ifstream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

}  // namespace

ShingleSet shingle(std::string_view id, std::string_view text, size_t n) {
    ShingleSet set;
    set.id = std::string(id);
    if (n == 0) return set;
    std::string normalized = normalize_for_shingling(text);
    auto words = split_words(normalized);
    if (words.size() < n) return set;
    set.hashes.reserve(words.size() - n + 1);
    std::string window;
    for (size_t i = 0; i + n <= words.size(); ++i) {
        window.clear();
        for (size_t k = 0; k < n; ++k) {
            if (k > 0) window.push_back(' ');
            window.append(words[i + k]);
        }
        set.hashes.push_back(xxh64(window));
    }
    std::sort(set.hashes.begin(), set.hashes.end());
    set.hashes.erase(std::unique(set.hashes.begin(), set.hashes.end()), set.hashes.end());
    return set;
}

MinHashSignature minhash(const ShingleSet& shingles, const std::vector<uint64_t>& seeds) {
    if (shingles.hashes.empty()) {
        throw std::runtime_error("too_short_for_dedup: " + shingles.id);
    }
    MinHashSignature sig;
    sig.id = shingles.id;
    sig.values.resize(seeds.size());
    for (size_t i = 0; i < seeds.size(); ++i) {
        uint64_t best = std::numeric_limits<uint64_t>::max();
        for (uint64_t h : shingles.hashes) {
            unsigned char bytes[8];
            le64_bytes(h, bytes);
            best = std::min(best, xxh64_bytes(bytes, 8, seeds[i]));
        }
        sig.values[i] = best;
    }
    return sig;
}

double exact_jaccard(const ShingleSet& a, const ShingleSet& b) {
    if (a.hashes.empty() && b.hashes.empty()) return 0.0;
    size_t inter = 0;
    size_t i = 0, j = 0;
    while (i < a.hashes.size() && j < b.hashes.size()) {
        if (a.hashes[i] == b.hashes[j]) {
            ++inter;
            ++i;
            ++j;
        } else if (a.hashes[i] < b.hashes[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    size_t uni = a.hashes.size() + b.hashes.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double signature_match_fraction(const MinHashSignature& a, const MinHashSignature& b) {
    if (a.values.size() != b.values.size() || a.values.empty()) {
        throw std::invalid_argument("signatures must share a non-zero length");
    }
    size_t matches = 0;
    for (size_t i = 0; i < a.values.size(); ++i) {
        if (a.values[i] == b.values[i]) ++matches;
    }
    return static_cast<double>(matches) / static_cast<double>(a.values.size());
}

double lsh_candidate_probability(const BandGeometry& geometry, double jaccard) {
    double row_match = std::pow(jaccard, static_cast<double>(geometry.rows));
    return 1.0 - std::pow(1.0 - row_match, static_cast<double>(geometry.bands));
}

std::vector<std::pair<std::string, std::string>> lsh_candidates(
    const std::vector<MinHashSignature>& signatures, const BandGeometry& geometry) {
    for (const auto& sig : signatures) {
        if (sig.values.size() != geometry.signature_size()) {
            throw std::invalid_argument("signature for '" + sig.id +
                                        "' does not match band geometry");
        }
    }
    std::vector<std::pair<std::string, std::string>> pairs;
    for (size_t band = 0; band < geometry.bands; ++band) {
        size_t offset = band * geometry.rows;
        // Bucket by a hash of the band, then confirm exact equality inside
        // the bucket so hash collisions cannot fabricate candidates.
        std::unordered_map<uint64_t, std::vector<size_t>> buckets;
        for (size_t s = 0; s < signatures.size(); ++s) {
            uint64_t key = xxh64_bytes(signatures[s].values.data() + offset,
                                       geometry.rows * sizeof(uint64_t), band);
            buckets[key].push_back(s);
        }
        for (const auto& [key, members] : buckets) {
            if (members.size() < 2) continue;
            for (size_t i = 0; i < members.size(); ++i) {
                for (size_t j = i + 1; j < members.size(); ++j) {
                    const auto& a = signatures[members[i]];
                    const auto& b = signatures[members[j]];
                    if (!std::equal(a.values.begin() + offset,
                                    a.values.begin() + offset + geometry.rows,
                                    b.values.begin() + offset)) {
                        continue;
                    }
                    if (a.id < b.id) {
                        pairs.emplace_back(a.id, b.id);
                    } else if (b.id < a.id) {
                        pairs.emplace_back(b.id, a.id);
                    }
                }
            }
        }
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    return pairs;
}

UnionFind::UnionFind(size_t n) : parent_(n), rank_(n, 0) {
    for (size_t i = 0; i < n; ++i) parent_[i] = i;
}

size_t UnionFind::find(size_t x) {
    while (parent_[x] != x) {
        parent_[x] = parent_[parent_[x]];
        x = parent_[x];
    }
    return x;
}

void UnionFind::unite(size_t a, size_t b) {
    size_t ra = find(a);
    size_t rb = find(b);
    if (ra == rb) return;
    if (rank_[ra] < rank_[rb]) std::swap(ra, rb);
    parent_[rb] = ra;
    if (rank_[ra] == rank_[rb]) ++rank_[ra];
}

const std::string& DuplicateClusters::survivor_of(const std::string& id) const {
    auto it = cluster_index.find(id);
    if (it == cluster_index.end()) throw std::out_of_range("unknown id '" + id + "'");
    return clusters[it->second].front();
}

size_t DuplicateClusters::total_members() const {
    size_t n = 0;
    for (const auto& c : clusters) n += c.size();
    return n;
}

DuplicateClusters cluster_and_dedupe(
    const std::vector<std::pair<std::string, std::string>>& candidates,
    const std::vector<std::string>& all_ids) {
    std::vector<std::string> ids = all_ids;
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    std::unordered_map<std::string, size_t> index;
    index.reserve(ids.size());
    for (size_t i = 0; i < ids.size(); ++i) index[ids[i]] = i;

    UnionFind uf(ids.size());
    for (const auto& [a, b] : candidates) {
        auto ia = index.find(a);
        auto ib = index.find(b);
        if (ia == index.end() || ib == index.end()) {
            throw std::invalid_argument("candidate pair references unknown id");
        }
        uf.unite(ia->second, ib->second);
    }

    // ids are sorted, so the first member seen per root is the smallest id
    // in its cluster and becomes the survivor.
    std::unordered_map<size_t, size_t> root_to_cluster;
    DuplicateClusters out;
    for (size_t i = 0; i < ids.size(); ++i) {
        size_t root = uf.find(i);
        auto it = root_to_cluster.find(root);
        if (it == root_to_cluster.end()) {
            root_to_cluster.emplace(root, out.clusters.size());
            out.clusters.push_back({ids[i]});
        } else {
            out.clusters[it->second].push_back(ids[i]);
        }
    }
    for (size_t c = 0; c < out.clusters.size(); ++c) {
        for (const auto& id : out.clusters[c]) out.cluster_index[id] = c;
    }
    return out;
}

namespace {

DedupReport dedupe_partition(std::vector<DocumentRecord*>& docs, const DedupOptions& opts,
                             const std::vector<uint64_t>& seeds) {
    DedupReport report;
    report.documents = docs.size();

    std::vector<ShingleSet> shingle_sets(docs.size());
    {
        std::vector<size_t> indices(docs.size());
        for (size_t i = 0; i < indices.size(); ++i) indices[i] = i;
        parallel_for_each(
            indices,
            [&](size_t i) {
                shingle_sets[i] = shingle(docs[i]->id, docs[i]->text, opts.shingle_words);
            },
            opts.threads);
    }

    std::vector<MinHashSignature> signatures;
    std::unordered_map<std::string, const ShingleSet*> shingles_by_id;
    {
        std::vector<size_t> active;
        for (size_t i = 0; i < docs.size(); ++i) {
            if (shingle_sets[i].hashes.empty()) {
                ++report.bypassed;
            } else {
                active.push_back(i);
                shingles_by_id[shingle_sets[i].id] = &shingle_sets[i];
            }
        }
        auto sigs = parallel_map(
            active, [&](size_t i) { return minhash(shingle_sets[i], seeds); }, opts.threads);
        signatures = std::move(sigs);
    }

    auto pairs = lsh_candidates(signatures, opts.geometry);
    report.candidate_pairs = pairs.size();

    if (opts.verify_jaccard) {
        std::vector<std::pair<std::string, std::string>> verified;
        verified.reserve(pairs.size());
        for (const auto& [a, b] : pairs) {
            double j = exact_jaccard(*shingles_by_id.at(a), *shingles_by_id.at(b));
            if (j >= *opts.verify_jaccard) verified.push_back({a, b});
        }
        pairs = std::move(verified);
    }

    std::vector<std::string> participating_ids;
    participating_ids.reserve(signatures.size());
    for (const auto& sig : signatures) participating_ids.push_back(sig.id);
    auto clusters = cluster_and_dedupe(pairs, participating_ids);

    for (auto* doc : docs) {
        auto it = clusters.cluster_index.find(doc->id);
        if (it == clusters.cluster_index.end()) continue;  // bypassed
        if (clusters.is_survivor(doc->id)) {
            doc->verdicts.push_back(FilterVerdict::keep(Stage::dedup));
        } else {
            doc->verdicts.push_back(FilterVerdict::drop(Stage::dedup, "near_duplicate"));
            ++report.dropped;
        }
    }
    for (const auto& c : clusters.clusters) {
        if (c.size() > 1) ++report.clusters_with_duplicates;
    }
    return report;
}

}  // namespace

DedupReport dedupe_documents(std::vector<DocumentRecord>& docs, const DedupOptions& opts) {
    auto seeds = derive_seeds(opts.run_seed, opts.geometry.signature_size());

    std::vector<std::vector<DocumentRecord*>> partitions;
    if (opts.scope == DedupOptions::Scope::per_source) {
        std::map<std::string, std::vector<DocumentRecord*>> by_source;
        for (auto& doc : docs) by_source[doc.source].push_back(&doc);
        for (auto& [source, members] : by_source) partitions.push_back(std::move(members));
    } else {
        std::vector<DocumentRecord*> all;
        all.reserve(docs.size());
        for (auto& doc : docs) all.push_back(&doc);
        partitions.push_back(std::move(all));
    }

    DedupReport total;
    for (auto& partition : partitions) {
        auto part = dedupe_partition(partition, opts, seeds);
        total.documents += part.documents;
        total.bypassed += part.bypassed;
        total.candidate_pairs += part.candidate_pairs;
        total.clusters_with_duplicates += part.clusters_with_duplicates;
        total.dropped += part.dropped;
    }
    return total;
}

void write_signature_cache(const std::string& path, const SignatureCache& cache) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.write("CKSG", 4);
    write_u32(out, 1);
    write_u32(out, static_cast<uint32_t>(cache.geometry.bands));
    write_u32(out, static_cast<uint32_t>(cache.geometry.rows));
    write_u64(out, cache.run_seed);
    write_u64(out, cache.records.size());
    for (const auto& [id_hash, values] : cache.records) {
        if (values.size() != cache.geometry.signature_size()) {
            throw std::invalid_argument("signature length does not match geometry");
        }
        write_u64(out, id_hash);
        for (uint64_t v : values) write_u64(out, v);
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

SignatureCache read_signature_cache(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "CKSG", 4) != 0) {
        throw std::runtime_error(path + " is not a signature cache");
    }
    uint32_t version = read_u32(in);
    if (version != 1) {
        throw std::runtime_error("unsupported signature cache version " +
                                 std::to_string(version));
    }
    SignatureCache cache;
    cache.geometry.bands = read_u32(in);
    cache.geometry.rows = read_u32(in);
    cache.run_seed = read_u64(in);
    uint64_t count = read_u64(in);
    cache.records.reserve(count);
    for (uint64_t r = 0; r < count; ++r) {
        uint64_t id_hash = read_u64(in);
        std::vector<uint64_t> values(cache.geometry.signature_size());
        for (auto& v : values) v = read_u64(in);
        if (!in) throw std::runtime_error(path + " truncated");
        cache.records.emplace_back(id_hash, std::move(values));
    }
    return cache;
}

}  // namespace corpuskit
