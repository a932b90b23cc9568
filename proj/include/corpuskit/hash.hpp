#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace corpuskit {

// 64-bit xxHash (XXH64). Stable across platforms; used for shingle digests,
// MinHash permutations, config hashes, and seed derivation.
//
// The byte-span form carries its own name: a (char*, integer) call would
// otherwise prefer it over the string_view overload and silently treat the
// integer as a length.
uint64_t xxh64_bytes(const void* data, size_t len, uint64_t seed = 0);

inline uint64_t xxh64(std::string_view s, uint64_t seed = 0) {
    return xxh64_bytes(s.data(), s.size(), seed);
}

// Per-purpose seeds derived from one run-level seed via a counter
// construction: seeds[i] = xxh64(le64(i), run_seed).
std::vector<uint64_t> derive_seeds(uint64_t run_seed, size_t count);

// Labeled stream split for RNG purposes ("judge_sample", "fixture", ...).
uint64_t derive_stream_seed(uint64_t run_seed, std::string_view label);

}  // namespace corpuskit
