#pragma once

#include <cstdint>
#include <random>

namespace hfke {

// Pinned PRNG: mt19937_64 (output sequence fixed by the C++ standard).
// Substream seeds are derived from the master seed with splitmix64 so each
// component (path noise, observation noise, particle propagation, resampling
// offset, initial draws) owns an independent stream. Normal variates use an
// explicit Box-Muller transform rather than std::normal_distribution, whose
// algorithm is implementation-defined.

constexpr std::uint64_t kStreamPathInit = 0;
constexpr std::uint64_t kStreamPathState = 1;
constexpr std::uint64_t kStreamPathObs = 2;
constexpr std::uint64_t kStreamPfInit = 3;
constexpr std::uint64_t kStreamPfPropagation = 4;
constexpr std::uint64_t kStreamPfResample = 5;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_stream(std::uint64_t master, std::uint64_t stream_id) {
  return splitmix64(master ^ splitmix64(stream_id));
}

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; pairs are cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace hfke
