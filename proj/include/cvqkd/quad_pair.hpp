#pragma once

#include <cmath>
#include <string>

namespace cvqkd {

enum class Quadrature { plus, minus };

inline const char* to_string(Quadrature q) { return q == Quadrature::plus ? "+" : "-"; }

/// A value indexed by quadrature: amplitude (plus) and phase (minus).
/// All variances are in shot-noise units, so the vacuum is {1, 1}.
struct QuadPair {
  double plus = 0.0;
  double minus = 0.0;

  constexpr QuadPair() = default;
  constexpr QuadPair(double p, double m) : plus(p), minus(m) {}
  static constexpr QuadPair both(double v) { return {v, v}; }

  [[nodiscard]] constexpr double operator[](Quadrature q) const {
    return q == Quadrature::plus ? plus : minus;
  }
  [[nodiscard]] constexpr double& operator[](Quadrature q) {
    return q == Quadrature::plus ? plus : minus;
  }

  [[nodiscard]] constexpr double product() const { return plus * minus; }
  [[nodiscard]] constexpr bool symmetric() const { return plus == minus; }
  [[nodiscard]] bool finite() const { return std::isfinite(plus) && std::isfinite(minus); }
  [[nodiscard]] bool positive() const { return finite() && plus > 0.0 && minus > 0.0; }
  [[nodiscard]] bool nonnegative() const { return finite() && plus >= 0.0 && minus >= 0.0; }

  /// Plus and minus exchanged.
  [[nodiscard]] constexpr QuadPair swapped() const { return {minus, plus}; }

  friend constexpr bool operator==(const QuadPair&, const QuadPair&) = default;
};

inline constexpr QuadPair kVacuum{1.0, 1.0};
inline constexpr Quadrature kQuadratures[] = {Quadrature::plus, Quadrature::minus};

template <class F>
QuadPair map(const QuadPair& a, F&& f) {
  return {f(a.plus), f(a.minus)};
}

template <class F>
QuadPair zip(const QuadPair& a, const QuadPair& b, F&& f) {
  return {f(a.plus, b.plus), f(a.minus, b.minus)};
}

}  // namespace cvqkd
