#pragma once

#include <cmath>

namespace wsmatch {

// Golden-section minimization of f over [a, b].  The interval is narrowed
// until its width is at most tol; the midpoint of the final bracket is
// returned.  On plateaus (including exact ties of the two interior probes)
// the left subinterval is kept, so flat minima resolve toward the smallest
// argument.
template <class F>
double golden_section_min(F&& f, double a, double b, double tol) {
  constexpr double kInvPhi = 0.6180339887498948482;   // 1/phi
  constexpr double kInvPhi2 = 0.3819660112501051518;  // 1/phi^2
  if (b < a) {
    const double t = a;
    a = b;
    b = t;
  }
  double h = b - a;
  if (h <= tol) return 0.5 * (a + b);
  double c = a + kInvPhi2 * h;
  double d = a + kInvPhi * h;
  double fc = f(c);
  double fd = f(d);
  while (h > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      h = b - a;
      c = a + kInvPhi2 * h;
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      h = b - a;
      d = a + kInvPhi * h;
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace wsmatch
