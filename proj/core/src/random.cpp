#include "latefusion/random.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace latefusion {

double Rng::uniform()
{
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi)
{
    return lo + (hi - lo) * uniform();
}

std::uint64_t Rng::below(std::uint64_t n)
{
    if (n == 0)
        throw std::invalid_argument("Rng::below requires n > 0");
    // Rejection sampling keeps the draw unbiased.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % n;
}

std::int64_t Rng::between(std::int64_t lo, std::int64_t hi)
{
    if (hi < lo)
        throw std::invalid_argument("Rng::between requires lo <= hi");
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
}

double Rng::normal()
{
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // Marsaglia polar method.
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
}

std::uint64_t Rng::poisson(double mean)
{
    if (mean <= 0.0)
        return 0;
    if (mean > 500.0) {
        const double x = std::round(mean + std::sqrt(mean) * normal());
        return x < 0.0 ? 0 : static_cast<std::uint64_t>(x);
    }
    // Knuth's multiplication method, split so exp(-mean) stays representable.
    std::uint64_t k = 0;
    double remaining = mean;
    double p = 1.0;
    constexpr double step = 30.0;
    while (true) {
        p *= uniform();
        while (p < 1.0 && remaining > 0.0) {
            const double chunk = std::min(remaining, step);
            p *= std::exp(chunk);
            remaining -= chunk;
        }
        if (p <= 1.0 && remaining <= 0.0)
            return k;
        ++k;
    }
}

std::size_t Rng::categorical(std::span<const double> weights)
{
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (weights.empty() || !(total > 0.0))
        throw std::invalid_argument("categorical weights must have a positive sum");
    const double target = uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (target < acc)
            return i;
    }
    // Round-off landed past the last bucket: return the last non-zero one.
    for (std::size_t i = weights.size(); i-- > 0;)
        if (weights[i] > 0.0)
            return i;
    return weights.size() - 1;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b)
{
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(mix(master) ^ a) ^ (b * 0x632be59bd9b4e019ULL));
}

} // namespace latefusion
