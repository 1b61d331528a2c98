// Shared error types, seed derivation and small numeric helpers.

#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qas {

/// Invalid configuration supplied by the user (bad sizes, ranges, files).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string &msg) : std::runtime_error(msg) {}
};

/// API misuse: indices out of bounds, dimension mismatches.
struct UsageError : std::invalid_argument {
    explicit UsageError(const std::string &msg) : std::invalid_argument(msg) {}
};

/// A numerical routine failed to converge or produced non-finite values.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string &msg) : std::runtime_error(msg) {}
};

/// Training produced a non-finite loss or gradient.
struct TrainingError : std::runtime_error {
    explicit TrainingError(const std::string &msg) : std::runtime_error(msg) {}
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives an independent seed stream from a master seed, a component tag and
/// up to two indices. All randomness in the project flows through this split
/// so that a single master seed reproduces a whole run.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t h = 1469598103934665603ULL; // FNV-1a offset basis
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    std::uint64_t s = splitmix64(master ^ h);
    s = splitmix64(s ^ (a + 0x51ed2701a2b9e273ULL));
    s = splitmix64(s ^ (b + 0x1d8e4e27c47d124fULL));
    return s;
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t master, std::string_view tag,
                    std::uint64_t a = 0, std::uint64_t b = 0) {
    return Rng(derive_seed(master, tag, a, b));
}

inline double uniform_real(Rng &rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Uniform integer in [0, n).
inline std::size_t uniform_index(Rng &rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

} // namespace qas
