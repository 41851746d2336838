#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cvqkd/attack_ff.hpp"
#include "cvqkd/gaussian_core.hpp"
#include "cvqkd/params.hpp"

namespace cvqkd {

enum class Scenario { honest, feedforward };

const char* to_string(Scenario s);

/// Observable taps of a protocol run.
enum class Tap { S, XA, XE, XB };

const char* to_string(Tap t);

struct TapScalar {
  Tap tap;
  Quadrature q;
};

struct RunSpec {
  Scenario scenario = Scenario::honest;
  SourceParams src;
  ChannelParams ch;
  std::optional<AttackConfig> attack;  // present iff scenario == feedforward
  std::size_t n = 1'000'000;
  std::uint64_t seed = 42;
  std::size_t shards = 1;  // worker threads; does not change the result

  void validate() const;
};

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

/// Sample means and covariances of the taps of one run, with standard errors
/// from Gaussian fourth-moment identities.
class EmpiricalMoments {
 public:
  EmpiricalMoments() = default;
  EmpiricalMoments(std::vector<Tap> taps, std::size_t n, std::vector<double> mean, std::vector<double> cov);

  [[nodiscard]] const std::vector<Tap>& taps() const { return taps_; }
  [[nodiscard]] std::size_t count() const { return n_; }
  [[nodiscard]] std::size_t dim() const { return mean_.size(); }
  [[nodiscard]] bool has(Tap t) const;

  /// SE of the mean is sqrt(V / n).
  [[nodiscard]] Estimate mean(TapScalar a) const;
  /// SE is V sqrt(2 / (n - 1)).
  [[nodiscard]] Estimate variance(TapScalar a) const;
  /// SE is sqrt((Va Vb + C²) / (n - 1)).
  [[nodiscard]] Estimate covariance(TapScalar a, TapScalar b) const;

  /// Row-major covariance over all tap scalars (2 per tap, plus then minus).
  [[nodiscard]] const std::vector<double>& covariance_matrix() const { return cov_; }

  friend bool operator==(const EmpiricalMoments&, const EmpiricalMoments&) = default;

 private:
  [[nodiscard]] std::size_t index(TapScalar a) const;
  [[nodiscard]] double raw_cov(std::size_t i, std::size_t j) const { return cov_[i * dim() + j]; }

  std::vector<Tap> taps_;
  std::size_t n_ = 0;
  std::vector<double> mean_;
  std::vector<double> cov_;
};

/// Honest lossy channel: records "S", "XA", "XB".
LinearNetwork honest_network(const SourceParams& src, const ChannelParams& ch);

LinearNetwork scenario_network(const RunSpec& spec);

EmpiricalMoments run(const RunSpec& spec);

/// V_t - C²/V_e on sample moments with delta-method standard error.
/// Throws DegenerateEstimatorError when the estimator variance is below 1e-12.
Estimate empirical_conditional_variance(const EmpiricalMoments& m, TapScalar target, TapScalar estimator);

/// Delta-method variance (times n - 1) of the conditional-variance estimator
/// for Gaussian data with the given population moments.
double conditional_variance_estimator_variance(double v_target, double v_estimator, double cov);

struct ConcordanceRow {
  std::string name;
  double analytic = 0.0;
  double empirical = 0.0;
  double se = 0.0;
  double z = 0.0;
  bool pass = false;
};

struct ConcordanceReport {
  RunSpec spec;
  std::vector<ConcordanceRow> rows;

  [[nodiscard]] bool all_pass() const;
};

struct ConcordanceOptions {
  double z_threshold = 5.0;
  /// Added to every analytic value; test fixture for the harness itself.
  double analytic_offset = 0.0;
};

/// Runs the spec and compares every empirical moment with its closed form.
ConcordanceReport concordance_report(const RunSpec& spec, const ConcordanceOptions& opts = {});

void print_concordance(std::ostream& os, const ConcordanceReport& report);

/// One whitespace-separated row per shot: s_plus s_minus xb_plus xb_minus
/// [xe_plus xe_minus], preceded by a header line.
void write_raw_samples(std::ostream& os, const RunSpec& spec);

}  // namespace cvqkd
