#include "cvqkd/keyrate.hpp"

#include <cmath>
#include <sstream>

#include "cvqkd/errors.hpp"

namespace cvqkd {

const char* to_string(Protocol p) {
  switch (p) {
    case Protocol::heterodyne: return "heterodyne";
    case Protocol::homodyne: return "homodyne";
    case Protocol::feedforward: return "feedforward";
  }
  return "?";
}

namespace {

void validate(const SourceParams& src, const ChannelParams& ch) {
  src.validate();
  ch.validate();
}

// Alice's best achievable pre-detection inference of Bob's mode.
QuadPair alice_min_pre_detection(const SourceParams& src, const ChannelParams& ch) {
  const QuadPair va = src.va();
  return zip(va, ch.vn, [&](double a, double n) { return ch.eta / a + (1.0 - ch.eta) * n; });
}

double half_log2_ratio(double num, double den) { return 0.5 * std::log2(num / den); }

}  // namespace

QuadPair bob_variance(const SourceParams& src, const ChannelParams& ch) {
  validate(src, ch);
  return zip(src.va(), ch.vn,
             [&](double va, double vn) { return 0.5 * (ch.eta * va + (1.0 - ch.eta) * vn + 1.0); });
}

ConditionalVariance conditional_variance(double v_target, double v_estimator, double cov) {
  if (!(v_estimator > 0.0)) throw DomainError("estimator variance must be positive");
  const double explained = cov * cov / v_estimator;
  // Relative slack: v_target - explained may round to -1e-16 for perfect correlation.
  if (explained > v_target * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "inconsistent moments: cov^2=" << cov * cov << " exceeds V_target*V_estimator="
       << v_target * v_estimator;
    throw InconsistentMomentsError(os.str());
  }
  return {std::max(0.0, v_target - explained), {cov / v_estimator}};
}

QuadPair alice_conditional_variance(const SourceParams& src, const ChannelParams& ch) {
  validate(src, ch);
  return zip(src.vsqz, ch.vn,
             [&](double sq, double vn) { return 0.5 * (ch.eta * sq + (1.0 - ch.eta) * vn + 1.0); });
}

QuadPair eve_min_conditional_variance(const SourceParams& src, const ChannelParams& ch) {
  validate(src, ch);
  const QuadPair conj = alice_min_pre_detection(src, ch).swapped();
  return map(conj, [](double a) { return 0.5 * (1.0 / a + 1.0); });
}

double key_rate_from_conditional_variances(const QuadPair& v_eb, const QuadPair& v_ab) {
  return 0.5 * std::log2(v_eb.product() / v_ab.product());
}

double symmetric_key_rate_bound(double eta, double vn, double va) {
  ChannelParams::make(eta, vn);
  SourceParams::coherent(va);
  const double alice_min = eta / va + (1.0 - eta) * vn;
  return std::log2((1.0 / alice_min + 1.0) / (eta + (1.0 - eta) * vn + 1.0));
}

RateReport secret_key_rate_heterodyne(const SourceParams& src, const ChannelParams& ch) {
  RateReport r;
  r.protocol = Protocol::heterodyne;
  r.v_b = bob_variance(src, ch);
  r.v_ab = alice_conditional_variance(src, ch);
  r.v_eb = eve_min_conditional_variance(src, ch);
  r.i_ba = zip(r.v_b, r.v_ab, half_log2_ratio);
  r.i_be = zip(r.v_b, r.v_eb, half_log2_ratio);
  r.delta_i = key_rate_from_conditional_variances(r.v_eb, r.v_ab);
  return r;
}

RateReport secret_key_rate_homodyne(const SourceParams& src, const ChannelParams& ch) {
  validate(src, ch);
  RateReport r;
  r.protocol = Protocol::homodyne;
  const double eta = ch.eta;
  r.v_b = zip(src.va(), ch.vn, [&](double va, double vn) { return eta * va + (1.0 - eta) * vn; });
  r.v_ab = zip(src.vsqz, ch.vn, [&](double sq, double vn) { return eta * sq + (1.0 - eta) * vn; });
  r.v_eb = map(alice_min_pre_detection(src, ch).swapped(), [](double a) { return 1.0 / a; });
  r.i_ba = zip(r.v_b, r.v_ab, half_log2_ratio);
  r.i_be = zip(r.v_b, r.v_eb, half_log2_ratio);
  const QuadPair per_basis = zip(r.v_eb, r.v_ab, half_log2_ratio);
  r.delta_i = 0.5 * (per_basis.plus + per_basis.minus);
  return r;
}

double shannon_rate(double signal, double noise) {
  if (!(noise > 0.0)) throw DomainError("noise variance must be positive");
  if (!(signal >= 0.0)) throw DomainError("signal variance must be >= 0");
  return 0.5 * std::log2(1.0 + signal / noise);
}

double absolute_rate(const RateReport& report, double bandwidth) {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) throw DomainError("bandwidth must be positive");
  return bandwidth * report.delta_i;
}

RateReport with_bandwidth(RateReport report, double bandwidth) {
  report.delta_i_abs = absolute_rate(report, bandwidth);
  report.bandwidth = bandwidth;
  return report;
}

}  // namespace cvqkd
