#include "wsmatch/rng.hpp"

#include <bit>

#include "wsmatch/normal.hpp"

namespace wsmatch {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  return splitmix64(seed ^ (salt + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2)));
}

std::uint64_t derive_substream(std::uint64_t master_seed, Design design, double rho,
                               std::size_t n, std::size_t rep) {
  std::uint64_t s = splitmix64(master_seed);
  s = mix_seed(s, static_cast<std::uint64_t>(design));
  s = mix_seed(s, std::bit_cast<std::uint64_t>(rho));
  s = mix_seed(s, static_cast<std::uint64_t>(n));
  s = mix_seed(s, static_cast<std::uint64_t>(rep));
  return s;
}

double RngStream::normal() { return inverse_normal_cdf(uniform_open01()); }

}  // namespace wsmatch
