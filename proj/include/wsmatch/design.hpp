#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace wsmatch {

// Simulation designs.  d1-d3 and rc have a scalar continuous (or squared)
// outcome; multinomial and roy exercise the discrete / two-sector event
// families.
enum class Design { d1, d2, d3, rc, multinomial, roy };

const char* to_string(Design design);
std::optional<Design> parse_design(std::string_view text);

inline bool is_scalar_outcome(Design d) {
  return d == Design::d1 || d == Design::d2 || d == Design::d3 || d == Design::rc;
}

struct DesignSpec {
  Design design = Design::d1;
  double rho = 0.0;        // corr(outcome error, selection error)
  std::size_t n = 0;
  std::uint64_t seed = 0;

  // Throws std::invalid_argument on |rho| >= 1, n == 0, or non-finite rho.
  void validate() const;
};

}  // namespace wsmatch
