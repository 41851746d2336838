#pragma once

#include <cstddef>

#include "cvqkd/gaussian_core.hpp"
#include "cvqkd/keyrate.hpp"
#include "cvqkd/params.hpp"

namespace cvqkd {

/// Feed-forward attack: Eve keeps a fraction 1-ε of the beam, heterodynes it,
/// writes the photocurrents back onto the transmitted part with gain g_E and
/// adds Gaussian noise of variance v_extra to look like the expected channel.
struct AttackConfig {
  double epsilon = 1.0;
  QuadPair g_e{0.0, 0.0};
  QuadPair v_extra{0.0, 0.0};

  void validate() const;
};

struct FeasibleWindow {
  double epsilon_min = 1.0;
  double epsilon_max = 0.0;
  bool empty = true;

  [[nodiscard]] bool contains(double eps) const { return !empty && eps >= epsilon_min && eps <= epsilon_max; }
  [[nodiscard]] double width() const { return empty ? 0.0 : epsilon_max - epsilon_min; }
};

struct AttackReport {
  double epsilon_star = 0.0;
  AttackConfig config;
  QuadPair v_e;
  QuadPair v_b;
  QuadPair v_eb_ff;
  QuadPair v_ab;
  double delta_i_ff = 0.0;
  double delta_i_bound = 0.0;  // Heisenberg-limited bound at the same point
  FeasibleWindow window;
  std::size_t evaluations = 0;

  [[nodiscard]] double gap() const { return delta_i_ff - delta_i_bound; }
};

/// Eve's heterodyne variance ½((1-ε) V_A + ε + 1).
QuadPair eve_variance(const SourceParams& src, double epsilon);

/// Gain keeping Bob's signal amplitude at √η: √2(√η-√ε)/√(1-ε).
/// ε = 1 is singular unless η = 1, where the gain is 0.
QuadPair required_gain(double eta, double epsilon);

/// Bob's heterodyne variance with Eve in the line:
///   ½((√ε + g√((1-ε)/2))² V_A + 1 + V_extra + g²/2 + (√(1-ε) - g√(ε/2))²).
QuadPair bob_variance_under_attack(const SourceParams& src, double eta, const AttackConfig& cfg);

/// Non-signal part of bob_variance_under_attack with V_extra = 0.
QuadPair intrinsic_attack_noise(double eta, double epsilon);

/// Non-signal part of the honest-channel Bob variance, ½((1-η)V_N + 1).
QuadPair expected_channel_noise(const ChannelParams& ch);

/// Camouflage variance that makes Bob's statistics match the channel. Negative
/// entries mean the transmission ε cannot be hidden.
QuadPair camouflage_variance(const ChannelParams& ch, double epsilon);

/// Range of ε for which the camouflage variance is nonnegative in both
/// quadratures.
FeasibleWindow feasibility_window(const SourceParams& src, const ChannelParams& ch);

/// Undetectable attack configuration at ε; throws NoAttackPossibleError if ε
/// is outside the window.
AttackConfig make_attack_config(const ChannelParams& ch, double epsilon);

/// Tap, heterodyne and feed-forward network: records "S", "XA", "XE", "XB".
LinearNetwork attack_network(const SourceParams& src, const AttackConfig& cfg);

/// Eve's conditional variance of Bob's results from her own heterodyne
/// records, by covariance propagation through attack_network.
QuadPair eve_conditional_variance_ff(const SourceParams& src, const AttackConfig& cfg);

inline constexpr double kDefaultAttackTolerance = 1e-8;

/// Minimizes V_EB+ · V_EB- over the feasible window. Throws
/// NoAttackPossibleError for an empty window.
AttackReport optimize_attack(const SourceParams& src, const ChannelParams& ch,
                             double tol = kDefaultAttackTolerance);

}  // namespace cvqkd
