#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace latefusion {

/// Seeded generator with platform-independent sampling.
///
/// The std:: distributions are implementation-defined, so every draw used for
/// data generation or training goes through these helpers instead. The raw
/// engine (mt19937_64) is fully specified by the standard.
class Rng
{
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform();
    double uniform(double lo, double hi);

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n);
    /// Uniform integer in [lo, hi].
    std::int64_t between(std::int64_t lo, std::int64_t hi);

    bool bernoulli(double p) { return uniform() < p; }
    double normal();
    std::uint64_t poisson(double mean);

    /// Index drawn from non-negative weights (need not be normalized).
    std::size_t categorical(std::span<const double> weights);

    template <typename T>
    void shuffle(std::vector<T> &items)
    {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Mixes a master seed with stream identifiers into an independent child seed
/// (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0);

} // namespace latefusion
