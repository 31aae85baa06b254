#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace msbl {

// splitmix64 finalizer. Used both as a seed scrambler and to derive
// independent per-trial streams from a master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Declared seed-derivation rule: stream i of master seed s is
// splitmix64(s ^ splitmix64(i)). Trials seeded this way are independent of
// execution order, which keeps parallel Monte Carlo runs reproducible.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(master ^ splitmix64(index));
}

// Deterministic RNG wrapper. mt19937_64's output sequence is fixed by the
// standard; uniforms and Gaussians are built from raw 64-bit draws so the
// stream is bit-identical across platforms (std::normal_distribution is not).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1) with 53 bits of precision.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Marsaglia's polar method (fixed per build so that
    // seeded instances are byte-reproducible golden data).
    double gaussian() {
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
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    // Uniform integer in [0, n), rejection-sampled to avoid modulo bias.
    std::uint64_t uniform_index(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace msbl
