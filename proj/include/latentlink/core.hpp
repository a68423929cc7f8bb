#pragma once

#include <Eigen/Core>

#include <bit>
#include <cstdint>
#include <string>
#include <string_view>

namespace latentlink {

// All numerics are 64-bit; reproducibility beats speed at this scale.
using Scalar = double;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

static_assert(std::endian::native == std::endian::little,
              "file formats assume a little-endian host");

/// FNV-1a 64-bit hash, used for sub-stream derivation and artifact hashing.
inline std::uint64_t fnv1a64(const void* data, std::size_t size,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a64(std::string_view s) {
    return fnv1a64(s.data(), s.size());
}

/// Counter-based deterministic random stream: the i-th draw is a pure
/// function of (seed, i), so identical seeds give identical streams and
/// named sub-streams can be split off without touching the parent.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return mix(seed_ + kGolden * ++counter_); }

    /// Uniform in [0, 1).
    Scalar uniform() {
        return static_cast<Scalar>(next_u64() >> 11) * 0x1.0p-53;
    }

    Scalar uniform(Scalar lo, Scalar hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (two uniforms per draw).
    Scalar gaussian() {
        const Scalar u1 = uniform();
        const Scalar u2 = uniform();
        return std::sqrt(-2.0 * std::log1p(-u1)) *
               std::cos(2.0 * kPi * u2);
    }

    Vec uniform_vec(Eigen::Index n) {
        Vec v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = uniform();
        return v;
    }

    Vec gaussian_vec(Eigen::Index n) {
        Vec v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = gaussian();
        return v;
    }

    /// Independent named sub-stream derived from the base seed only, so the
    /// split does not depend on how many draws the parent has made.
    Rng fork(std::string_view name) const {
        return Rng(mix(seed_ ^ fnv1a64(name)));
    }

  private:
    static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
    static constexpr Scalar kPi = 3.14159265358979323846;

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

}  // namespace latentlink
