#include "corpuskit/hash.hpp"

#include <cstring>

namespace corpuskit {

namespace {

constexpr uint64_t kPrime1 = 0x9E3779B185EBCA87ULL;
constexpr uint64_t kPrime2 = 0xC2B2AE3D27D4EB4FULL;
constexpr uint64_t kPrime3 = 0x165667B19E3779F9ULL;
constexpr uint64_t kPrime4 = 0x85EBCA77C2B2AE63ULL;
constexpr uint64_t kPrime5 = 0x27D4EB2F165667C5ULL;

inline uint64_t rotl64(uint64_t v, int r) {
    return (v << r) | (v >> (64 - r));
}

inline uint64_t read_u64(const unsigned char* p) {
    uint64_t v;
    std::memcpy(&v, p, 8);
    return v;  // little-endian hosts only; asserted in tests via fixed vectors
}

inline uint32_t read_u32(const unsigned char* p) {
    uint32_t v;
    std::memcpy(&v, p, 4);
    return v;
}

inline uint64_t round_step(uint64_t acc, uint64_t lane) {
    acc += lane * kPrime2;
    acc = rotl64(acc, 31);
    return acc * kPrime1;
}

inline uint64_t merge_round(uint64_t acc, uint64_t lane_acc) {
    acc ^= round_step(0, lane_acc);
    return acc * kPrime1 + kPrime4;
}

}  // namespace

uint64_t xxh64_bytes(const void* data, size_t len, uint64_t seed) {
    const auto* p = static_cast<const unsigned char*>(data);
    const unsigned char* end = p + len;
    uint64_t acc;

    if (len >= 32) {
        uint64_t v1 = seed + kPrime1 + kPrime2;
        uint64_t v2 = seed + kPrime2;
        uint64_t v3 = seed;
        uint64_t v4 = seed - kPrime1;
        const unsigned char* limit = end - 32;
        do {
            v1 = round_step(v1, read_u64(p));
            v2 = round_step(v2, read_u64(p + 8));
            v3 = round_step(v3, read_u64(p + 16));
            v4 = round_step(v4, read_u64(p + 24));
            p += 32;
        } while (p <= limit);
        acc = rotl64(v1, 1) + rotl64(v2, 7) + rotl64(v3, 12) + rotl64(v4, 18);
        acc = merge_round(acc, v1);
        acc = merge_round(acc, v2);
        acc = merge_round(acc, v3);
        acc = merge_round(acc, v4);
    } else {
        acc = seed + kPrime5;
    }

    acc += static_cast<uint64_t>(len);

    while (p + 8 <= end) {
        acc ^= round_step(0, read_u64(p));
        acc = rotl64(acc, 27) * kPrime1 + kPrime4;
        p += 8;
    }
    if (p + 4 <= end) {
        acc ^= static_cast<uint64_t>(read_u32(p)) * kPrime1;
        acc = rotl64(acc, 23) * kPrime2 + kPrime3;
        p += 4;
    }
    while (p < end) {
        acc ^= static_cast<uint64_t>(*p) * kPrime5;
        acc = rotl64(acc, 11) * kPrime1;
        ++p;
    }

    acc ^= acc >> 33;
    acc *= kPrime2;
    acc ^= acc >> 29;
    acc *= kPrime3;
    acc ^= acc >> 32;
    return acc;
}

std::vector<uint64_t> derive_seeds(uint64_t run_seed, size_t count) {
    std::vector<uint64_t> seeds;
    seeds.reserve(count);
    for (size_t i = 0; i < count; ++i) {
        unsigned char counter[8];
        uint64_t c = static_cast<uint64_t>(i);
        for (int b = 0; b < 8; ++b) {
            counter[b] = static_cast<unsigned char>((c >> (8 * b)) & 0xFF);
        }
        seeds.push_back(xxh64_bytes(counter, sizeof(counter), run_seed));
    }
    return seeds;
}

uint64_t derive_stream_seed(uint64_t run_seed, std::string_view label) {
    return xxh64_bytes(label.data(), label.size(), run_seed);
}

}  // namespace corpuskit
