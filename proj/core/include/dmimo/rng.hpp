#pragma once

#include <complex>
#include <cstdint>
#include <random>

#include <boost/random/normal_distribution.hpp>

namespace dmimo {

using Rng = std::mt19937_64;

// Independent stream for (seed, tag, index); lets draws run in any order.
Rng substream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index = 0);

// CN(0,1): real and imaginary parts each N(0, 1/2).
class ComplexNormal {
 public:
  std::complex<double> operator()(Rng& rng) {
    return {dist_(rng) * kScale, dist_(rng) * kScale};
  }

 private:
  static constexpr double kScale = 0.70710678118654752440;
  boost::random::normal_distribution<double> dist_{0.0, 1.0};
};

// Stream tags so different consumers of one seed never overlap.
namespace stream {
inline constexpr std::uint64_t kLayout = 1;
inline constexpr std::uint64_t kTraffic = 2;
inline constexpr std::uint64_t kFronthaul = 3;
inline constexpr std::uint64_t kWarmup = 4;
inline constexpr std::uint64_t kAccess = 5;
inline constexpr std::uint64_t kKs = 6;
inline constexpr std::uint64_t kWishart = 7;
inline constexpr std::uint64_t kSigma = 8;
inline constexpr std::uint64_t kTest = 9;
}  // namespace stream

}  // namespace dmimo
