#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace gtms {

// Deterministic stream seeded from (seed, stream): the pair fully determines the
// sequence, so independent chains can be replayed and merged in a fixed order.
// Distribution sampling is hand-rolled on top of the raw 64-bit output to keep
// results identical across standard-library implementations.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
        : gen_(mix(seed, stream)) {}

    std::uint64_t next_u64() { return gen_(); }

    // uniform in [0, 1) with 53 bits of mantissa
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n) via rejection
    int uniform_int(int n) {
        const std::uint64_t span = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return static_cast<int>(x % span);
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = uniform(-1.0, 1.0);
            v = uniform(-1.0, 1.0);
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    std::complex<double> complex_normal() {
        const double re = normal();
        const double im = normal();
        return {re, im};
    }

    // real and imaginary parts independently uniform
    std::complex<double> complex_uniform(double re_half_width, double im_half_width) {
        const double re = uniform(-re_half_width, re_half_width);
        const double im = uniform(-im_half_width, im_half_width);
        return {re, im};
    }

  private:
    static std::uint64_t splitmix(std::uint64_t& s) {
        s += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = s;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static std::mt19937_64 mix(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t s = seed ^ (0x6a09e667f3bcc909ULL + stream * 0x9e3779b97f4a7c15ULL);
        std::seed_seq seq{splitmix(s), splitmix(s), splitmix(s), splitmix(s)};
        return std::mt19937_64(seq);
    }

    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace gtms
