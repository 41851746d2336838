#pragma once

#include <cstddef>
#include <functional>

namespace cvqkd {

struct ScalarMinimum {
  double x = 0.0;
  double value = 0.0;
  std::size_t evaluations = 0;
  double bracket_lo = 0.0;  // final bracket
  double bracket_hi = 0.0;
};

/// Golden-section search for a minimum of f on [lo, hi], stopping once the
/// bracket is narrower than tol. Throws ConvergenceError (carrying the
/// bracket) if max_iterations is reached first.
ScalarMinimum golden_section_minimize(const std::function<double(double)>& f, double lo, double hi,
                                      double tol, std::size_t max_iterations = 500);

/// Evaluates f on `grid_points` equally spaced nodes of [lo, hi], then refines
/// by golden section between the neighbours of the best node. Guards against
/// local minima of non-unimodal objectives.
ScalarMinimum scan_then_golden(const std::function<double(double)>& f, double lo, double hi, double tol,
                               std::size_t grid_points = 64);

}  // namespace cvqkd
