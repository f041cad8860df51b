#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

namespace moss {

/// Seeded random stream with explicitly implemented distributions.
///
/// The standard distribution adaptors are implementation-defined, so uniform
/// and normal draws are generated here from raw engine output. A run's whole
/// random state is this one object; it serializes into checkpoints so resumed
/// runs replay the exact stream.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller. Stateless: the paired draw is
    /// discarded so serialization never has to carry a cached spare.
    double normal() {
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Unbiased integer in [0, n) via rejection.
    std::uint64_t uniform_index(std::uint64_t n);

    std::string serialize() const;
    void deserialize(const std::string& text);

    bool operator==(const Rng& other) const { return engine_ == other.engine_; }

  private:
    std::mt19937_64 engine_;
};

}  // namespace moss
