#pragma once

#include <cstdint>
#include <random>

#include "wsmatch/design.hpp"

namespace wsmatch {

// splitmix64 output function (Steele/Lea/Flood); used as the seed mixer so
// replication substreams are decorrelated from the master seed and from one
// another.
std::uint64_t splitmix64(std::uint64_t x);

// Fold a salt into a seed.  Order-sensitive by construction.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

// Substream seed for one Monte Carlo replication of one (design, rho, n) cell.
// rho enters through its IEEE-754 bit pattern, so rho = 0.25 and 0.250...01
// are distinct streams.
std::uint64_t derive_substream(std::uint64_t master_seed, Design design, double rho,
                               std::size_t n, std::size_t rep);

// Deterministic source of uniforms and normals.  Normals come from the
// inverse-CDF transform of one 53-bit uniform each, so a stream's draw
// sequence is reproducible bit-for-bit from the seed alone, independent of
// any library's normal_distribution implementation.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  // Strictly inside (0,1): ((bits >> 11) + 0.5) * 2^-53.
  double uniform_open01() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace wsmatch
