#include "cvqkd/attack_ff.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cvqkd/errors.hpp"
#include "cvqkd/golden_section.hpp"

namespace cvqkd {

namespace {

// Camouflage variances this far below zero are rounding at a window endpoint.
constexpr double kCamouflageSlack = 1e-12;

void check_epsilon(double eps) {
  if (!(eps >= 0.0 && eps <= 1.0)) {
    std::ostringstream os;
    os << "tap transmission epsilon=" << eps << " outside [0, 1]";
    throw DomainError(os.str());
  }
}

void check_eta(double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) {
    std::ostringstream os;
    os << "channel transmission eta=" << eta << " outside (0, 1]";
    throw DomainError(os.str());
  }
}

}  // namespace

void AttackConfig::validate() const {
  check_epsilon(epsilon);
  if (!g_e.finite()) throw DomainError("feed-forward gain must be finite");
  if (!v_extra.nonnegative()) throw DomainError("camouflage noise variance must be >= 0");
}

QuadPair eve_variance(const SourceParams& src, double epsilon) {
  check_epsilon(epsilon);
  src.validate();
  return map(src.va(), [&](double va) { return 0.5 * ((1.0 - epsilon) * va + epsilon + 1.0); });
}

QuadPair required_gain(double eta, double epsilon) {
  check_eta(eta);
  check_epsilon(epsilon);
  if (epsilon == eta) return {0.0, 0.0};
  if (epsilon == 1.0) throw DomainError("feed-forward gain is singular at epsilon = 1");
  return QuadPair::both(std::sqrt(2.0) * (std::sqrt(eta) - std::sqrt(epsilon)) / std::sqrt(1.0 - epsilon));
}

QuadPair bob_variance_under_attack(const SourceParams& src, double eta, const AttackConfig& cfg) {
  check_eta(eta);
  cfg.validate();
  src.validate();
  const double e = cfg.epsilon;
  const QuadPair va = src.va();
  QuadPair out;
  for (auto q : kQuadratures) {
    const double g = cfg.g_e[q];
    const double signal = std::pow(std::sqrt(e) + g * std::sqrt((1.0 - e) / 2.0), 2);
    const double tap_vacuum = std::pow(std::sqrt(1.0 - e) - g * std::sqrt(e / 2.0), 2);
    out[q] = 0.5 * (signal * va[q] + 1.0 + cfg.v_extra[q] + g * g / 2.0 + tap_vacuum);
  }
  return out;
}

QuadPair intrinsic_attack_noise(double eta, double epsilon) {
  const AttackConfig cfg{epsilon, required_gain(eta, epsilon), {0.0, 0.0}};
  // The signal term is exactly η V_A by construction of the gain; use a zero-modulation vacuum source.
  const SourceParams vacuum_src{{0.0, 0.0}, kVacuum};
  const QuadPair total = bob_variance_under_attack(vacuum_src, eta, cfg);
  const double signal = std::pow(std::sqrt(epsilon) + cfg.g_e.plus * std::sqrt((1.0 - epsilon) / 2.0), 2);
  return map(total, [&](double v) { return v - 0.5 * signal; });
}

QuadPair expected_channel_noise(const ChannelParams& ch) {
  ch.validate();
  return map(ch.vn, [&](double vn) { return 0.5 * ((1.0 - ch.eta) * vn + 1.0); });
}

QuadPair camouflage_variance(const ChannelParams& ch, double epsilon) {
  const QuadPair expected = expected_channel_noise(ch);
  const QuadPair intrinsic = intrinsic_attack_noise(ch.eta, epsilon);
  return zip(expected, intrinsic, [](double ex, double in) { return 2.0 * (ex - in); });
}

FeasibleWindow feasibility_window(const SourceParams& src, const ChannelParams& ch) {
  src.validate();
  ch.validate();
  // The attack adds exactly (1-η) + g² of noise before Bob's detector, so ε is
  // hideable iff g(ε)² = 2(√η-√ε)²/(1-ε) <= budget = (1-η)(V_N - 1).
  const double vn = std::min(ch.vn.plus, ch.vn.minus);
  double budget = (1.0 - ch.eta) * (vn - 1.0);
  FeasibleWindow w;
  if (budget < -kCamouflageSlack) return w;
  budget = std::max(0.0, budget);

  const double r = std::sqrt(ch.eta);
  if (ch.eta == 1.0) return {1.0, 1.0, false};
  // (1 + b/2) s² - 2 r s + r² - b/2 = 0 in s = √ε.
  const double half = budget / 2.0;
  const double disc = std::sqrt(half * (1.0 - r * r + half));
  const double s_lo = std::max(0.0, (r - disc) / (1.0 + half));
  const double s_hi = (r + disc) / (1.0 + half);
  w.epsilon_min = std::min(s_lo * s_lo, ch.eta);
  w.epsilon_max = std::max(std::min(s_hi * s_hi, 1.0), ch.eta);
  w.empty = false;
  return w;
}

AttackConfig make_attack_config(const ChannelParams& ch, double epsilon) {
  ch.validate();
  check_epsilon(epsilon);
  QuadPair extra = camouflage_variance(ch, epsilon);
  for (auto q : kQuadratures) {
    if (extra[q] < -kCamouflageSlack) {
      std::ostringstream os;
      os << "epsilon=" << epsilon << " cannot be hidden: required camouflage variance " << extra[q] << " < 0";
      throw NoAttackPossibleError(os.str());
    }
    extra[q] = std::max(0.0, extra[q]);
  }
  return {epsilon, required_gain(ch.eta, epsilon), extra};
}

LinearNetwork attack_network(const SourceParams& src, const AttackConfig& cfg) {
  src.validate();
  cfg.validate();
  LinearNetwork net;
  const auto signal = net.add_input("signal", src.vs);
  const auto alice = net.add_input("alice", src.vsqz);
  const auto eve_vac1 = net.add_input("eve_vac1", kVacuum);
  const auto eve_vac2 = net.add_input("eve_vac2", kVacuum);
  const auto bob_vac = net.add_input("bob_vac", kVacuum);

  const auto s = net.measure("S", signal);
  net.feed_forward(s, alice, {1.0, 1.0});
  net.measure("XA", alice);
  // Eve's share (1-ε) lands on eve_vac1's slot; the transmitted √ε stays on alice.
  net.beam_splitter(eve_vac1, alice, cfg.epsilon);
  const auto xe = net.heterodyne("XE", eve_vac1, eve_vac2);
  net.feed_forward(xe, alice, cfg.g_e);
  net.inject_noise(alice, cfg.v_extra);
  net.heterodyne("XB", alice, bob_vac);
  return net;
}

QuadPair eve_conditional_variance_ff(const SourceParams& src, const AttackConfig& cfg) {
  const LinearNetwork net = attack_network(src, cfg);
  const TapCovariance m = propagate(net);
  const auto xe = net.record_index("XE");
  const auto xb = net.record_index("XB");
  QuadPair out;
  for (auto q : kQuadratures)
    out[q] = conditional_variance(m.variance(xb, q), m.variance(xe, q), m.covariance(xb, xe, q)).value;
  return out;
}

AttackReport optimize_attack(const SourceParams& src, const ChannelParams& ch, double tol) {
  if (!(tol > 0.0)) throw DomainError("attack tolerance must be positive");
  AttackReport rep;
  rep.window = feasibility_window(src, ch);
  if (rep.window.empty) {
    std::ostringstream os;
    os << "no undetectable feed-forward attack exists at eta=" << ch.eta << ", V_N=(" << ch.vn.plus << ", "
       << ch.vn.minus << ")";
    throw NoAttackPossibleError(os.str());
  }

  auto objective = [&](double eps) {
    const QuadPair v = eve_conditional_variance_ff(src, make_attack_config(ch, eps));
    return v.product();
  };
  const ScalarMinimum best = scan_then_golden(objective, rep.window.epsilon_min, rep.window.epsilon_max, tol);

  rep.epsilon_star = std::clamp(best.x, rep.window.epsilon_min, rep.window.epsilon_max);
  rep.evaluations = best.evaluations;
  rep.config = make_attack_config(ch, rep.epsilon_star);
  rep.v_e = eve_variance(src, rep.epsilon_star);
  rep.v_b = bob_variance_under_attack(src, ch.eta, rep.config);
  rep.v_eb_ff = eve_conditional_variance_ff(src, rep.config);
  rep.v_ab = alice_conditional_variance(src, ch);
  rep.delta_i_ff = key_rate_from_conditional_variances(rep.v_eb_ff, rep.v_ab);
  rep.delta_i_bound = secret_key_rate_heterodyne(src, ch).delta_i;
  return rep;
}

}  // namespace cvqkd
