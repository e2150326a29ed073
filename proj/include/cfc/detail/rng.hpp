// Deterministic random primitives. The standard distributions are
// implementation-defined, so everything that must reproduce bit-for-bit
// across platforms goes through these helpers instead.

#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string_view>
#include <vector>

namespace cfc::detail {

/// FNV-1a 64-bit hash; used for seed derivation, file digests, and the
/// model checksum.
inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// splitmix64: tiny, well-mixed generator, also used to derive independent
/// stream seeds from a base seed plus salts.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform integer in [0, bound) via rejection sampling; bound >= 1.
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t limit = bound * (UINT64_MAX / bound);
        std::uint64_t x;
        do {
            x = next();
        } while (x >= limit);
        return x % bound;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

inline std::uint64_t derive_seed(std::uint64_t base, std::string_view salt) {
    return SplitMix64(base ^ fnv1a64(salt)).next();
}

inline std::uint64_t derive_seed(std::uint64_t base, std::string_view salt, std::uint64_t n) {
    return SplitMix64(derive_seed(base, salt) ^ (0x9e3779b97f4a7c15ULL * (n + 1))).next();
}

/// In-place Fisher-Yates shuffle.
template <typename T>
void shuffle(std::vector<T>& v, SplitMix64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.next_below(i));
        std::swap(v[i - 1], v[j]);
    }
}

/// First `count` entries of a seeded permutation of {0, ..., n-1},
/// returned in ascending order.
inline std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count,
                                                           SplitMix64& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < count && i + 1 < n; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.next_below(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(count);
    std::sort(idx.begin(), idx.end());
    return idx;
}

} // namespace cfc::detail
