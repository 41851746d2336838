#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cvqkd/quad_pair.hpp"

namespace cvqkd {

/// `steps` equally spaced values from start to stop inclusive; a single step
/// yields just `start`.
struct Range {
  double start = 0.0;
  double stop = 0.0;
  std::size_t steps = 1;

  [[nodiscard]] std::vector<double> values() const;
};

struct SweepSpec {
  Range eta{0.005, 1.0, 200};
  std::vector<double> vn{1.0};  // outer loop, symmetric channel noise
  double va = 100.0;
  QuadPair vsqz = kVacuum;
  bool heterodyne = true;
  bool homodyne = true;
  bool feedforward = false;
  double attack_tol = 1e-8;
  std::size_t threads = 1;

  void validate() const;
};

struct SweepRow {
  double eta = 0.0;
  double vn_plus = 0.0;
  double vn_minus = 0.0;
  double va = 0.0;
  std::optional<double> delta_i_het;
  std::optional<double> delta_i_hom;
  std::optional<double> delta_i_ff;
  std::optional<double> epsilon_star;
  std::optional<double> window_min;
  std::optional<double> window_max;
};

inline constexpr const char* kSweepHeader =
    "eta,vn_plus,vn_minus,va,delta_i_het,delta_i_hom,delta_i_ff,epsilon_star,window_min,window_max";

/// Rows ordered vn-major, eta-minor, independent of the thread count.
std::vector<SweepRow> run_sweep(const SweepSpec& spec);

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

/// 12 significant digits, "%.12g".
std::string format_number(double v);

}  // namespace cvqkd
