#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

// Deterministic random helpers. Everything seeded here produces the same
// stream on every platform: std::mt19937_64 output is standardized and the
// value mappings below avoid the implementation-defined std distributions.
namespace svcnn::rng {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t mix(uint64_t a, uint64_t b) {
    return splitmix64(a ^ splitmix64(b));
}

inline uint64_t fnv1a(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

using Engine = std::mt19937_64;

inline Engine engine(uint64_t seed) { return Engine(seed); }

// Uniform double in [0, 1).
inline double uniform01(Engine& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Engine& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

// Uniform integer in [0, n). n must be > 0.
inline uint64_t below(Engine& rng, uint64_t n) {
    return rng() % n;
}

template <typename T>
void shuffle(std::vector<T>& v, Engine& rng) {
    for (size_t i = v.size(); i > 1; --i) {
        size_t j = static_cast<size_t>(below(rng, i));
        std::swap(v[i - 1], v[j]);
    }
}

// Identity permutation of size n, then shuffled.
inline std::vector<size_t> permutation(size_t n, Engine& rng) {
    std::vector<size_t> p(n);
    for (size_t i = 0; i < n; ++i) p[i] = i;
    shuffle(p, rng);
    return p;
}

}  // namespace svcnn::rng
