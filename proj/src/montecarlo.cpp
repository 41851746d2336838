#include "cvqkd/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <limits>
#include <sstream>
#include <thread>

#include "cvqkd/errors.hpp"
#include "cvqkd/keyrate.hpp"
#include "cvqkd/moment_accumulator.hpp"

namespace cvqkd {

const char* to_string(Scenario s) { return s == Scenario::honest ? "honest" : "feedforward"; }

const char* to_string(Tap t) {
  switch (t) {
    case Tap::S: return "S";
    case Tap::XA: return "X_A";
    case Tap::XE: return "X_E";
    case Tap::XB: return "X_B";
  }
  return "?";
}

namespace {

Tap tap_from_record(const std::string& name) {
  if (name == "S") return Tap::S;
  if (name == "XA") return Tap::XA;
  if (name == "XE") return Tap::XE;
  if (name == "XB") return Tap::XB;
  throw StructuralError("record '" + name + "' is not a protocol tap");
}

constexpr double kDegenerateVariance = 1e-12;

}  // namespace

void RunSpec::validate() const {
  src.validate();
  ch.validate();
  if (n < 2) throw StructuralError("a run needs at least 2 samples");
  if (shards < 1) throw StructuralError("shard count must be >= 1");
  if ((scenario == Scenario::feedforward) != attack.has_value())
    throw StructuralError("an attack configuration is required for, and only for, the feedforward scenario");
  if (attack) attack->validate();
}

// ---------------------------------------------------------------------------

EmpiricalMoments::EmpiricalMoments(std::vector<Tap> taps, std::size_t n, std::vector<double> mean,
                                   std::vector<double> cov)
    : taps_(std::move(taps)), n_(n), mean_(std::move(mean)), cov_(std::move(cov)) {
  if (mean_.size() != 2 * taps_.size() || cov_.size() != mean_.size() * mean_.size())
    throw StructuralError("moment dimensions do not match the tap list");
}

bool EmpiricalMoments::has(Tap t) const { return std::find(taps_.begin(), taps_.end(), t) != taps_.end(); }

std::size_t EmpiricalMoments::index(TapScalar a) const {
  const auto it = std::find(taps_.begin(), taps_.end(), a.tap);
  if (it == taps_.end()) throw StructuralError(std::string("tap ") + to_string(a.tap) + " was not recorded");
  return 2 * static_cast<std::size_t>(it - taps_.begin()) + (a.q == Quadrature::minus ? 1 : 0);
}

Estimate EmpiricalMoments::mean(TapScalar a) const {
  const auto i = index(a);
  return {mean_[i], std::sqrt(raw_cov(i, i) / static_cast<double>(n_))};
}

Estimate EmpiricalMoments::variance(TapScalar a) const {
  const auto i = index(a);
  const double v = raw_cov(i, i);
  return {v, v * std::sqrt(2.0 / static_cast<double>(n_ - 1))};
}

Estimate EmpiricalMoments::covariance(TapScalar a, TapScalar b) const {
  const auto i = index(a), j = index(b);
  const double c = raw_cov(i, j);
  return {c, std::sqrt((raw_cov(i, i) * raw_cov(j, j) + c * c) / static_cast<double>(n_ - 1))};
}

// ---------------------------------------------------------------------------

LinearNetwork honest_network(const SourceParams& src, const ChannelParams& ch) {
  src.validate();
  ch.validate();
  LinearNetwork net;
  const auto signal = net.add_input("signal", src.vs);
  const auto alice = net.add_input("alice", src.vsqz);
  const auto noise = net.add_input("channel_noise", ch.vn);
  const auto bob_vac = net.add_input("bob_vac", kVacuum);

  const auto s = net.measure("S", signal);
  net.feed_forward(s, alice, {1.0, 1.0});
  net.measure("XA", alice);
  net.beam_splitter(alice, noise, ch.eta);
  net.heterodyne("XB", alice, bob_vac);
  return net;
}

LinearNetwork scenario_network(const RunSpec& spec) {
  spec.validate();
  return spec.scenario == Scenario::honest ? honest_network(spec.src, spec.ch)
                                           : attack_network(spec.src, *spec.attack);
}

EmpiricalMoments run(const RunSpec& spec) {
  const NetworkSampler sampler(scenario_network(spec));
  const std::size_t blocks = block_count(spec.n);
  const std::size_t width = sampler.width();

  std::vector<MomentAccumulator> parts(blocks, MomentAccumulator(width));
  auto work = [&](std::size_t shard) {
    std::vector<double> rows;
    for (std::size_t b = shard; b < blocks; b += spec.shards) {
      sampler.run_block(spec.seed, b, spec.n, rows);
      for (std::size_t r = 0; r * width < rows.size(); ++r)
        parts[b].push(std::span<const double>(rows.data() + r * width, width));
    }
  };
  const std::size_t workers = std::min(spec.shards, blocks);
  if (workers <= 1) {
    work(0);
  } else {
    // Each block is written by exactly one worker; shard w owns blocks w, w + shards, ...
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < spec.shards; ++w) pool.emplace_back(work, w);
  }
  const MomentAccumulator total = tree_reduce(std::move(parts));

  std::vector<Tap> taps;
  for (const auto& name : sampler.network().record_names()) taps.push_back(tap_from_record(name));
  std::vector<double> mean(width), cov(width * width);
  for (std::size_t i = 0; i < width; ++i) {
    mean[i] = total.mean(i);
    for (std::size_t j = 0; j < width; ++j) cov[i * width + j] = total.covariance(i, j);
  }
  return {std::move(taps), total.count(), std::move(mean), std::move(cov)};
}

double conditional_variance_estimator_variance(double vt, double ve, double c) {
  // Gradient of f(Vt, C, Ve) = Vt - C²/Ve and the Gaussian covariance of the
  // sample moments (Isserlis), both scaled by n - 1.
  const double g[3] = {1.0, -2.0 * c / ve, c * c / (ve * ve)};
  const double s[3][3] = {
      {2.0 * vt * vt, 2.0 * vt * c, 2.0 * c * c},
      {2.0 * vt * c, vt * ve + c * c, 2.0 * c * ve},
      {2.0 * c * c, 2.0 * c * ve, 2.0 * ve * ve},
  };
  double var = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) var += g[i] * s[i][j] * g[j];
  return std::max(0.0, var);
}

Estimate empirical_conditional_variance(const EmpiricalMoments& m, TapScalar target, TapScalar estimator) {
  const double vt = m.variance(target).value;
  const double ve = m.variance(estimator).value;
  const double c = m.covariance(target, estimator).value;
  if (!(ve >= kDegenerateVariance)) {
    std::ostringstream os;
    os << "estimator " << to_string(estimator.tap) << to_string(estimator.q) << " has variance " << ve
       << " below " << kDegenerateVariance;
    throw DegenerateEstimatorError(os.str());
  }
  const double value = vt - c * c / ve;
  const double se = std::sqrt(conditional_variance_estimator_variance(vt, ve, c) /
                              static_cast<double>(m.count() - 1));
  return {value, se};
}

// ---------------------------------------------------------------------------

bool ConcordanceReport::all_pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const ConcordanceRow& r) { return r.pass; });
}

ConcordanceReport concordance_report(const RunSpec& spec, const ConcordanceOptions& opts) {
  ConcordanceReport rep;
  rep.spec = spec;
  const EmpiricalMoments m = run(spec);
  const SourceParams& src = spec.src;
  const double eta = spec.ch.eta;

  auto add = [&](std::string name, double analytic, Estimate e) {
    ConcordanceRow row;
    row.name = std::move(name);
    row.analytic = analytic + opts.analytic_offset;
    row.empirical = e.value;
    row.se = e.se;
    const double diff = row.empirical - row.analytic;
    if (row.se > 0.0)
      row.z = diff / row.se;
    else
      row.z = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
    row.pass = std::abs(row.z) <= opts.z_threshold;
    rep.rows.push_back(std::move(row));
  };
  auto label = [](const char* base, Quadrature q) { return std::string(base) + to_string(q); };

  const QuadPair va = src.va();
  const QuadPair vb_channel = bob_variance(src, spec.ch);
  const QuadPair vab_channel = alice_conditional_variance(src, spec.ch);

  QuadPair vb = vb_channel;
  QuadPair signal_gain = QuadPair::both(std::sqrt(eta / 2.0));  // cov(S, X_B) / V_S
  if (spec.scenario == Scenario::feedforward) {
    const AttackConfig& cfg = *spec.attack;
    vb = bob_variance_under_attack(src, eta, cfg);
    for (auto q : kQuadratures)
      signal_gain[q] = (std::sqrt(cfg.epsilon) + cfg.g_e[q] * std::sqrt((1.0 - cfg.epsilon) / 2.0)) / std::sqrt(2.0);
  }

  for (auto q : kQuadratures) {
    add(label("V_S", q), src.vs[q], m.variance({Tap::S, q}));
    add(label("V_A", q), va[q], m.variance({Tap::XA, q}));
    add(label("V_B", q), vb[q], m.variance({Tap::XB, q}));
    add(label("cov(S,X_B)", q), signal_gain[q] * src.vs[q], m.covariance({Tap::S, q}, {Tap::XB, q}));
    if (src.vs[q] >= kDegenerateVariance) {
      const double vab = vb[q] - signal_gain[q] * signal_gain[q] * src.vs[q];
      add(label("V_A|B", q), vab, empirical_conditional_variance(m, {Tap::XB, q}, {Tap::S, q}));
    }
  }

  if (spec.scenario == Scenario::feedforward) {
    const AttackConfig& cfg = *spec.attack;
    const QuadPair ve = eve_variance(src, cfg.epsilon);
    const LinearNetwork net = attack_network(src, cfg);
    const TapCovariance prop = propagate(net);
    const auto xe = net.record_index("XE"), xb = net.record_index("XB");
    const QuadPair veb = eve_conditional_variance_ff(src, cfg);
    for (auto q : kQuadratures) {
      add(label("V_E", q), ve[q], m.variance({Tap::XE, q}));
      add(label("cov(X_E,X_B)", q), prop.covariance(xe, xb, q), m.covariance({Tap::XE, q}, {Tap::XB, q}));
      add(label("V_E|B", q), veb[q], empirical_conditional_variance(m, {Tap::XB, q}, {Tap::XE, q}));
      // Undetectability: Bob and Alice see the statistics of the honest channel.
      if (std::abs(vb[q] - vb_channel[q]) <= 1e-9 * vb_channel[q]) {
        add(label("V_B(channel)", q), vb_channel[q], m.variance({Tap::XB, q}));
        if (src.vs[q] >= kDegenerateVariance)
          add(label("V_A|B(channel)", q), vab_channel[q],
              empirical_conditional_variance(m, {Tap::XB, q}, {Tap::S, q}));
      }
    }
  }
  return rep;
}

void print_concordance(std::ostream& os, const ConcordanceReport& report) {
  const auto& s = report.spec;
  os << "scenario " << to_string(s.scenario) << "  eta=" << s.ch.eta << "  V_N=(" << s.ch.vn.plus << ", "
     << s.ch.vn.minus << ")  V_A=(" << s.src.va().plus << ", " << s.src.va().minus << ")";
  if (s.attack) os << "  epsilon=" << s.attack->epsilon;
  os << "  n=" << s.n << "  seed=" << s.seed << '\n';
  char line[256];
  std::snprintf(line, sizeof line, "%-18s %16s %16s %12s %9s  %s\n", "quantity", "analytic", "empirical", "se", "z",
                "result");
  os << line;
  for (const auto& r : report.rows) {
    std::snprintf(line, sizeof line, "%-18s %16.9g %16.9g %12.4g %9.3f  %s\n", r.name.c_str(), r.analytic,
                  r.empirical, r.se, r.z, r.pass ? "pass" : "FAIL");
    os << line;
  }
  os << (report.all_pass() ? "all rows pass" : "concordance FAILED") << '\n';
}

void write_raw_samples(std::ostream& os, const RunSpec& spec) {
  const NetworkSampler sampler(scenario_network(spec));
  const auto& net = sampler.network();
  const std::size_t s = 2 * net.record_index("S");
  const std::size_t xb = 2 * net.record_index("XB");
  const bool with_eve = spec.scenario == Scenario::feedforward;
  const std::size_t xe = with_eve ? 2 * net.record_index("XE") : 0;
  const std::size_t width = sampler.width();

  os << "s_plus s_minus xb_plus xb_minus";
  if (with_eve) os << " xe_plus xe_minus";
  os << '\n';
  char buf[64];
  auto put = [&](double v, char sep) {
    std::snprintf(buf, sizeof buf, "%.17g%c", v, sep);
    os << buf;
  };
  std::vector<double> rows;
  for (std::size_t b = 0; b < block_count(spec.n); ++b) {
    sampler.run_block(spec.seed, b, spec.n, rows);
    for (std::size_t r = 0; r * width < rows.size(); ++r) {
      const double* row = rows.data() + r * width;
      put(row[s], ' ');
      put(row[s + 1], ' ');
      put(row[xb], ' ');
      put(row[xb + 1], with_eve ? ' ' : '\n');
      if (with_eve) {
        put(row[xe], ' ');
        put(row[xe + 1], '\n');
      }
    }
  }
  if (!os) throw IoError("failed writing raw samples");
}

}  // namespace cvqkd
