#include "cvqkd/sweep.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include "cvqkd/attack_ff.hpp"
#include "cvqkd/errors.hpp"
#include "cvqkd/keyrate.hpp"
#include "cvqkd/params.hpp"

namespace cvqkd {

std::vector<double> Range::values() const {
  if (steps < 1) throw StructuralError("range needs at least one step");
  if (steps == 1) return {start};
  std::vector<double> out(steps);
  for (std::size_t i = 0; i < steps; ++i)
    out[i] = i + 1 == steps ? stop : start + (stop - start) * static_cast<double>(i) / (steps - 1);
  return out;
}

void SweepSpec::validate() const {
  if (eta.steps < 1) throw StructuralError("eta range needs at least one step");
  if (vn.empty()) throw StructuralError("no channel-noise values to sweep");
  // Validation of every node also exercises the parameter domains.
  for (double e : eta.values())
    for (double v : vn) ChannelParams::make(e, v);
  SourceParams::from_va(QuadPair::both(va), vsqz);
  if (!(heterodyne || homodyne || feedforward)) throw StructuralError("no protocol selected");
  if (!(attack_tol > 0.0)) throw DomainError("attack tolerance must be positive");
}

namespace {

SweepRow compute_cell(const SweepSpec& spec, const SourceParams& src, double eta, double vn) {
  const ChannelParams ch = ChannelParams::make(eta, vn);
  SweepRow row;
  row.eta = eta;
  row.vn_plus = row.vn_minus = vn;
  row.va = spec.va;
  if (spec.heterodyne) row.delta_i_het = secret_key_rate_heterodyne(src, ch).delta_i;
  if (spec.homodyne) row.delta_i_hom = secret_key_rate_homodyne(src, ch).delta_i;
  if (spec.feedforward && !feasibility_window(src, ch).empty) {
    const AttackReport rep = optimize_attack(src, ch, spec.attack_tol);
    row.delta_i_ff = rep.delta_i_ff;
    row.epsilon_star = rep.epsilon_star;
    row.window_min = rep.window.epsilon_min;
    row.window_max = rep.window.epsilon_max;
  }
  return row;
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  spec.validate();
  const SourceParams src = SourceParams::from_va(QuadPair::both(spec.va), spec.vsqz);
  const std::vector<double> etas = spec.eta.values();
  const std::size_t cells = etas.size() * spec.vn.size();
  std::vector<SweepRow> rows(cells);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells; i = next++)
      rows[i] = compute_cell(spec, src, etas[i % etas.size()], spec.vn[i / etas.size()]);
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(spec.threads, cells));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return rows;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  os << kSweepHeader << '\n';
  for (const auto& r : rows) {
    os << format_number(r.eta) << ',' << format_number(r.vn_plus) << ',' << format_number(r.vn_minus) << ','
       << format_number(r.va) << ',' << opt(r.delta_i_het) << ',' << opt(r.delta_i_hom) << ','
       << opt(r.delta_i_ff) << ',' << opt(r.epsilon_star) << ',' << opt(r.window_min) << ','
       << opt(r.window_max) << '\n';
  }
}

}  // namespace cvqkd
