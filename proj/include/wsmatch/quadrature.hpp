#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace wsmatch {

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& msg, double achieved)
      : std::runtime_error(msg), achieved_tolerance(achieved) {}
  double achieved_tolerance;
};

// Adaptive Gauss-Legendre integration of f over [a, b]: a 15-point rule per
// panel, panels bisected until the whole-vs-halves discrepancy meets the
// tolerance budget allotted to the panel.  Throws QuadratureError (reporting
// the achieved tolerance) if max_depth levels of bisection do not suffice.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-10, int max_depth = 20);

}  // namespace wsmatch
