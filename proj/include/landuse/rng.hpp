#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace landuse {

/// splitmix64 step; used to derive independent per-tree / per-cell seeds
/// from (master_seed, index) pairs.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// mt19937_64 with hand-rolled variate helpers. The standard specifies the
/// engine's output sequence exactly; the std:: distributions do not, so the
/// mappings below are implemented here to keep streams identical across
/// platforms and standard libraries.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform integer in [0, n), unbiased via rejection.
    std::uint64_t uniform_index(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Poisson(mean) via Knuth's product method on <=30-mean chunks
    /// (Poisson means add across independent draws).
    std::uint64_t poisson(double mean) {
        std::uint64_t total = 0;
        while (mean > 30.0) {
            total += poisson_knuth(30.0);
            mean -= 30.0;
        }
        return total + poisson_knuth(mean);
    }

    /// Gamma(shape, scale) by Marsaglia-Tsang.
    double gamma(double shape, double scale) {
        if (shape < 1.0) {
            double u = uniform();
            while (u <= 0.0) u = uniform();
            return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            double u = uniform();
            while (u <= 0.0) u = uniform();
            if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v * scale;
        }
    }

    /// Standard normal, Marsaglia polar method.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        have_spare_ = true;
        return u * m;
    }

    /// First k entries of a seeded partial Fisher-Yates shuffle of 0..n-1.
    /// Used for sampling feature subsets without replacement.
    void sample_without_replacement(int n, int k, std::vector<int>& out) {
        scratch_.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) scratch_[static_cast<std::size_t>(i)] = i;
        out.resize(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) {
            std::size_t j = static_cast<std::size_t>(i) +
                            static_cast<std::size_t>(uniform_index(static_cast<std::uint64_t>(n - i)));
            std::swap(scratch_[static_cast<std::size_t>(i)], scratch_[j]);
            out[static_cast<std::size_t>(i)] = scratch_[static_cast<std::size_t>(i)];
        }
    }

  private:
    std::uint64_t poisson_knuth(double mean) {
        const double limit = std::exp(-mean);
        double prod = uniform();
        std::uint64_t n = 0;
        while (prod > limit) {
            ++n;
            prod *= uniform();
        }
        return n;
    }

    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
    std::vector<int> scratch_;
};

}  // namespace landuse
