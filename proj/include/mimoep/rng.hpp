#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace mimoep {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
}  // namespace detail

// Seeded random stream. Streams derived via derive() are statistically
// independent and depend only on the parent seed and the tag list, so a
// (master seed, channel, codeword) triple always yields the same draws.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(detail::splitmix64(seed)) {}

    Rng derive(std::initializer_list<std::uint64_t> tags) const {
        std::uint64_t s = seed_;
        for (std::uint64_t t : tags) s = detail::splitmix64(s ^ detail::splitmix64(t));
        return Rng(s);
    }

    std::uint64_t seed() const { return seed_; }

    std::uint64_t uniform_u64() { return engine_(); }

    int bit() { return static_cast<int>(engine_() >> 63); }

    // uniform in [0, n)
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

    // uniform in (0, 1]
    double uniform_open() {
        return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1p-53;
    }

    // standard normal via Box-Muller; hand-rolled so draws do not depend on
    // the standard library's unspecified normal_distribution algorithm
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform_open();
        double u2 = uniform_open();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // circularly-symmetric complex normal with E|z|^2 = var
    std::complex<double> cnormal(double var) {
        double s = std::sqrt(var * 0.5);
        double re = normal();
        double im = normal();
        return {s * re, s * im};
    }

  private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace mimoep
