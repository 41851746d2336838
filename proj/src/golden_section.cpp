#include "cvqkd/golden_section.hpp"

#include <algorithm>
#include <cmath>
#include <vector>
#include <sstream>

#include "cvqkd/errors.hpp"

namespace cvqkd {

ScalarMinimum golden_section_minimize(const std::function<double(double)>& f, double lo, double hi,
                                      double tol, std::size_t max_iterations) {
  if (!(tol > 0.0)) throw DomainError("golden-section tolerance must be positive");
  if (hi < lo) std::swap(lo, hi);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;

  ScalarMinimum out;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  out.evaluations = 2;

  std::size_t it = 0;
  while (b - a > tol) {
    if (++it > max_iterations) {
      std::ostringstream os;
      os << "golden-section search did not converge after " << max_iterations << " iterations; bracket ["
         << a << ", " << b << "], width " << (b - a) << " > tol " << tol;
      throw ConvergenceError(os.str());
    }
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
    ++out.evaluations;
  }

  out.bracket_lo = a;
  out.bracket_hi = b;
  out.x = 0.5 * (a + b);
  out.value = f(out.x);
  ++out.evaluations;
  // A flat or monotone objective can leave the midpoint worse than an interior probe.
  if (fc < out.value) out.x = c, out.value = fc;
  if (fd < out.value) out.x = d, out.value = fd;
  return out;
}

ScalarMinimum scan_then_golden(const std::function<double(double)>& f, double lo, double hi, double tol,
                               std::size_t grid_points) {
  if (hi < lo) std::swap(lo, hi);
  if (hi - lo <= tol) {
    const double x = 0.5 * (lo + hi);
    return {x, f(x), 1, lo, hi};
  }
  if (grid_points < 3) return golden_section_minimize(f, lo, hi, tol);

  std::vector<double> xs(grid_points), fs(grid_points);
  std::size_t best = 0;
  for (std::size_t i = 0; i < grid_points; ++i) {
    xs[i] = i + 1 == grid_points ? hi : lo + (hi - lo) * static_cast<double>(i) / (grid_points - 1);
    fs[i] = f(xs[i]);
    if (fs[i] < fs[best]) best = i;
  }
  const double a = xs[best == 0 ? 0 : best - 1];
  const double b = xs[std::min(best + 1, grid_points - 1)];
  ScalarMinimum refined = golden_section_minimize(f, a, b, tol);
  refined.evaluations += grid_points;
  if (fs[best] < refined.value) {
    refined.x = xs[best];
    refined.value = fs[best];
  }
  return refined;
}

}  // namespace cvqkd
