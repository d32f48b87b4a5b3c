#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace icq {

// Counter-based 64-bit generator (splitmix64). Every stochastic operation in
// the library takes an explicit seed and owns a private instance, so results
// are reproducible bit-for-bit across platforms.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    /// Uniform integer in [0, n).
    int uniform_int(int n) {
        if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
        return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
    }

    /// Standard normal via Box-Muller (one fresh pair per call, spare discarded).
    double normal() {
        double u1 = next_double();
        double u2 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    /// Sample index from a probability vector by inverse CDF.
    int categorical(std::span<const double> probs) {
        double u = next_double();
        double acc = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) return static_cast<int>(i);
        }
        // guard against accumulated rounding when u is close to 1
        for (std::size_t i = probs.size(); i-- > 0;) {
            if (probs[i] > 0.0) return static_cast<int>(i);
        }
        throw std::invalid_argument("categorical: probability vector has no mass");
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = next_u64() % i;
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    std::uint64_t state_;
};

/// Derive an independent stream seed from a base seed and a stream index.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    SplitMix64 mix(seed ^ (0xA24BAED4963EE407ull + stream * 0x9FB21C651E98DF25ull));
    return mix.next_u64();
}

}  // namespace icq
