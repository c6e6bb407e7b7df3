#pragma once

#include <cstdint>
#include <initializer_list>

namespace fairspread {

// SplitMix64 finalizer. Bijective on 64-bit words; used both as the
// generator step and to derive independent stream keys.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Splittable 64-bit random stream (SplitMix64).
///
/// Every consumer of randomness in this library receives either a stream
/// or a 64-bit stream key. Keys are derived by folding a path of integer
/// ids onto a master seed with `derive_key`, so e.g. Monte Carlo
/// simulation i of an estimate keyed by `key` always draws from
/// `RngStream(derive_key(key, i))` regardless of execution order or
/// thread assignment.
class RngStream {
public:
    RngStream() = default;
    explicit RngStream(std::uint64_t key) : state_(key) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return next_double() < p; }

    /// Uniform integer in [0, n). Unbiased via rejection sampling.
    std::uint64_t next_below(std::uint64_t n) {
        const std::uint64_t limit = ~0ULL - (~0ULL % n);
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

private:
    std::uint64_t state_ = 0;
};

/// Fold one id onto a key.
inline std::uint64_t derive_key(std::uint64_t key, std::uint64_t id) {
    return mix64(key ^ mix64(id));
}

template <typename... Ids>
std::uint64_t derive_key(std::uint64_t key, std::uint64_t id, Ids... rest) {
    return derive_key(derive_key(key, id), rest...);
}

/// Stable key for a named sub-stream (FNV-1a over the name).
inline std::uint64_t name_key(const char* name) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char* c = name; *c; ++c) {
        h ^= static_cast<unsigned char>(*c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace fairspread
