#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace spotcd {

// splitmix64 finalizer; also used as the mixing function for derived streams
// and the counter-based draws so results are identical on every platform.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_two(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a + 0x9e3779b97f4a7c15ULL * (b + 1));
}

inline double u64_to_unit(std::uint64_t v) {
    return static_cast<double>(v >> 11) * 0x1.0p-53;
}

// xoshiro256++ seeded through splitmix64.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& w : s_) {
            x += 0x9e3779b97f4a7c15ULL;
            w = splitmix64(x);
        }
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    double uniform() { return u64_to_unit(next()); }  // [0, 1)

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller, one deviate per call (the spare is discarded so that streams
    // stay stateless with respect to call sites).
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log1p(-u1));
        return r * std::cos(2.0 * M_PI * u2);
    }

    std::uint64_t below(std::uint64_t n) {
        if (n == 0) return 0;
        std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            std::uint64_t v = next();
            if (v >= threshold) return v % n;
        }
    }

    int uniform_int(int lo, int hi) {  // inclusive range
        return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    bool coin() { return (next() & 1ULL) != 0; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::array<std::uint64_t, 4> s_;
};

// Independent stream derived from (seed, stream_id); used to give every
// parallel task its own generator so results do not depend on scheduling.
inline Rng derive_rng(std::uint64_t seed, std::uint64_t stream) {
    return Rng(mix_two(seed, stream));
}

// Stateless counter-based uniform in [0, 1) keyed by coordinates; evaluation
// order cannot change the draw a coordinate sees.
inline double counter_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                              std::uint64_t c, std::uint64_t d, std::uint64_t channel) {
    std::uint64_t h = splitmix64(seed);
    h = mix_two(h, a);
    h = mix_two(h, b);
    h = mix_two(h, c);
    h = mix_two(h, d);
    h = mix_two(h, channel);
    return u64_to_unit(h);
}

}  // namespace spotcd
