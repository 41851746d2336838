#pragma once

#include <optional>

#include "cvqkd/params.hpp"
#include "cvqkd/quad_pair.hpp"

namespace cvqkd {

enum class Protocol { heterodyne, homodyne, feedforward };

const char* to_string(Protocol p);

/// Optimal linear estimate of a target from an estimator: residual variance
/// and the gain that achieves it.
struct InferenceGain {
  double gain = 0.0;
};

struct ConditionalVariance {
  double value = 0.0;
  InferenceGain gain;
};

/// Rates in bits per symbol for one protocol at one parameter point.
///
/// For the simultaneous-quadrature protocol delta_i = sum over quadratures of
/// (i_ba - i_be). For the single-quadrature protocol the per-quadrature fields
/// describe a homodyne measurement of that quadrature, and delta_i is the mean
/// over the two bases (one quadrature used per symbol).
struct RateReport {
  Protocol protocol = Protocol::heterodyne;
  QuadPair v_b;
  QuadPair v_ab;
  QuadPair v_eb;
  QuadPair i_ba;
  QuadPair i_be;
  double delta_i = 0.0;
  std::optional<double> bandwidth;
  std::optional<double> delta_i_abs;
};

/// Bob's heterodyne variance, ½(η V_A + (1-η) V_N + 1).
QuadPair bob_variance(const SourceParams& src, const ChannelParams& ch);

/// V_target - cov²/V_estimator with gain cov/V_estimator. Throws
/// DomainError for a nonpositive estimator variance and
/// InconsistentMomentsError when cov² exceeds V_target V_estimator.
ConditionalVariance conditional_variance(double v_target, double v_estimator, double cov);

/// Alice's conditional variance of Bob's results, conditioning on the
/// transmitted modulation S: ½(η V_sqz + (1-η) V_N + 1).
QuadPair alice_conditional_variance(const SourceParams& src, const ChannelParams& ch);

/// Heisenberg-limited lower bound on Eve's conditional variance of Bob's
/// heterodyne results. Quadrature q of the result is bounded through Alice's
/// best pre-detection inference of the conjugate quadrature, so for
/// asymmetric inputs the V_A and V_N entering V_EB^+ are the minus ones.
QuadPair eve_min_conditional_variance(const SourceParams& src, const ChannelParams& ch);

/// ½ log2(V_EB+ V_EB- / (V_AB+ V_AB-)).
double key_rate_from_conditional_variances(const QuadPair& v_eb, const QuadPair& v_ab);

/// Closed-form lower bound for symmetric quadratures and coherent states:
/// log2(((η/V_A + (1-η)V_N)^-1 + 1) / (η + (1-η)V_N + 1)).
double symmetric_key_rate_bound(double eta, double vn, double va);

RateReport secret_key_rate_heterodyne(const SourceParams& src, const ChannelParams& ch);

/// Reverse-reconciliation rate of the switching protocol that homodynes one
/// quadrature per symbol.
RateReport secret_key_rate_homodyne(const SourceParams& src, const ChannelParams& ch);

/// ½ log2(1 + signal/noise) bits per symbol.
double shannon_rate(double signal, double noise);

/// bandwidth × delta_i in bits per second.
double absolute_rate(const RateReport& report, double bandwidth);

/// Copy of the report with bandwidth and delta_i_abs filled in.
RateReport with_bandwidth(RateReport report, double bandwidth);

}  // namespace cvqkd
