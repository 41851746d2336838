#include "cvqkd/gaussian_core.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "cvqkd/errors.hpp"

namespace cvqkd {

namespace {

void check_transmission(double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    std::ostringstream os;
    os << "beamsplitter transmission " << t << " outside [0, 1]";
    throw DomainError(os.str());
  }
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

std::pair<ModeStat, ModeStat> beamsplitter_mix(const ModeStat& a, const ModeStat& b, double t) {
  check_transmission(t);
  const double st = std::sqrt(t);
  const double sr = std::sqrt(1.0 - t);
  ModeStat out1, out2;
  for (auto q : kQuadratures) {
    out1.mean[q] = st * a.mean[q] + sr * b.mean[q];
    out2.mean[q] = -sr * a.mean[q] + st * b.mean[q];
    out1.variance[q] = t * a.variance[q] + (1.0 - t) * b.variance[q];
    out2.variance[q] = (1.0 - t) * a.variance[q] + t * b.variance[q];
  }
  return {out1, out2};
}

ModeStat lossy_channel(const ModeStat& in, const ChannelParams& ch) {
  ch.validate();
  return beamsplitter_mix(in, ModeStat{{0.0, 0.0}, ch.vn}, ch.eta).first;
}

ModeStat heterodyne_detect(const ModeStat& in) {
  if (!in.variance.nonnegative()) throw DomainError("heterodyne input variance must be >= 0");
  // Vacuum enters the first port so the signal keeps a positive sign on both outputs.
  auto [plus_port, minus_port] = beamsplitter_mix(ModeStat::vacuum(), in, 0.5);
  return {{plus_port.mean.plus, minus_port.mean.minus}, {plus_port.variance.plus, minus_port.variance.minus}};
}

// ---------------------------------------------------------------------------

std::size_t LinearNetwork::add_input(std::string name, QuadPair variance, QuadPair mean) {
  inputs_.push_back({std::move(name), {mean, variance}});
  return inputs_.size() - 1;
}

LinearNetwork& LinearNetwork::beam_splitter(std::size_t first, std::size_t second, double transmission) {
  elements_.emplace_back(element::BeamSplitter{first, second, transmission});
  return *this;
}

LinearNetwork& LinearNetwork::displace(std::size_t mode, QuadPair amount) {
  elements_.emplace_back(element::Displacement{mode, amount});
  return *this;
}

LinearNetwork& LinearNetwork::feed_forward(std::size_t record, std::size_t target, QuadPair gain) {
  elements_.emplace_back(element::ClassicalFeedForward{record, target, gain});
  return *this;
}

LinearNetwork& LinearNetwork::inject_noise(std::size_t mode, QuadPair variance) {
  elements_.emplace_back(element::NoiseInjection{mode, variance});
  return *this;
}

std::size_t LinearNetwork::measure(std::string name, std::size_t plus_mode, std::size_t minus_mode) {
  const auto index = record_names().size();
  elements_.emplace_back(element::Measurement{std::move(name), plus_mode, minus_mode});
  return index;
}

std::size_t LinearNetwork::heterodyne(std::string name, std::size_t mode, std::size_t vacuum) {
  beam_splitter(vacuum, mode, 0.5);
  return measure(std::move(name), vacuum, mode);
}

std::vector<std::string> LinearNetwork::record_names() const {
  std::vector<std::string> names;
  for (const auto& e : elements_)
    if (const auto* m = std::get_if<element::Measurement>(&e)) names.push_back(m->name);
  return names;
}

std::size_t LinearNetwork::record_index(const std::string& name) const {
  const auto names = record_names();
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return i;
  throw StructuralError("no record named '" + name + "'");
}

void LinearNetwork::validate() const {
  const std::size_t modes = inputs_.size();
  for (const auto& in : inputs_) {
    if (!in.stat.variance.nonnegative() || !in.stat.mean.finite())
      throw StructuralError("input mode '" + in.name + "' has invalid moments");
  }
  auto check_mode = [&](std::size_t m, const char* what) {
    if (m >= modes) {
      std::ostringstream os;
      os << what << " references undeclared mode " << m << " (" << modes << " declared)";
      throw StructuralError(os.str());
    }
  };
  std::size_t records = 0;
  for (const auto& e : elements_) {
    std::visit(overloaded{
                   [&](const element::BeamSplitter& bs) {
                     check_mode(bs.first, "beamsplitter");
                     check_mode(bs.second, "beamsplitter");
                     if (bs.first == bs.second) throw StructuralError("beamsplitter mixes a mode with itself");
                     if (!(bs.transmission >= 0.0 && bs.transmission <= 1.0))
                       throw StructuralError("beamsplitter transmission outside [0, 1]");
                   },
                   [&](const element::Displacement& d) {
                     check_mode(d.mode, "displacement");
                     if (!d.amount.finite()) throw StructuralError("non-finite displacement");
                   },
                   [&](const element::ClassicalFeedForward& ff) {
                     check_mode(ff.target, "feed-forward");
                     if (ff.record >= records)
                       throw StructuralError("feed-forward uses a record that is not yet measured");
                     if (!ff.gain.finite()) throw StructuralError("non-finite feed-forward gain");
                   },
                   [&](const element::NoiseInjection& ni) {
                     check_mode(ni.mode, "noise injection");
                     if (!ni.variance.nonnegative()) throw StructuralError("noise variance must be >= 0");
                   },
                   [&](const element::Measurement& m) {
                     check_mode(m.plus_mode, "measurement");
                     check_mode(m.minus_mode, "measurement");
                     ++records;
                   },
               },
               e);
  }
}

// ---------------------------------------------------------------------------
// Covariance propagation

namespace {

// One quadrature of one mode as constant + sum_k coeff[k] * source_k.
struct LinearForm {
  double constant = 0.0;
  std::vector<double> coeff;
};

}  // namespace

TapCovariance propagate(const LinearNetwork& net) {
  net.validate();

  // Sources: both quadratures of every input, then every noise injection.
  std::vector<double> source_var;
  for (const auto& in : net.inputs()) {
    source_var.push_back(in.stat.variance.plus);
    source_var.push_back(in.stat.variance.minus);
  }
  for (const auto& e : net.elements())
    if (const auto* ni = std::get_if<element::NoiseInjection>(&e)) {
      source_var.push_back(ni->variance.plus);
      source_var.push_back(ni->variance.minus);
    }
  const std::size_t n_src = source_var.size();

  // modes[2m + q]
  std::vector<LinearForm> modes(2 * net.inputs().size(), LinearForm{0.0, std::vector<double>(n_src, 0.0)});
  for (std::size_t m = 0; m < net.inputs().size(); ++m) {
    modes[2 * m].constant = net.inputs()[m].stat.mean.plus;
    modes[2 * m].coeff[2 * m] = 1.0;
    modes[2 * m + 1].constant = net.inputs()[m].stat.mean.minus;
    modes[2 * m + 1].coeff[2 * m + 1] = 1.0;
  }
  std::vector<LinearForm> records;
  std::size_t next_noise = 2 * net.inputs().size();

  for (const auto& e : net.elements()) {
    std::visit(overloaded{
                   [&](const element::BeamSplitter& bs) {
                     const double st = std::sqrt(bs.transmission);
                     const double sr = std::sqrt(1.0 - bs.transmission);
                     for (std::size_t q = 0; q < 2; ++q) {
                       LinearForm& a = modes[2 * bs.first + q];
                       LinearForm& b = modes[2 * bs.second + q];
                       const double ca = a.constant, cb = b.constant;
                       a.constant = st * ca + sr * cb;
                       b.constant = -sr * ca + st * cb;
                       for (std::size_t k = 0; k < n_src; ++k) {
                         const double xa = a.coeff[k], xb = b.coeff[k];
                         a.coeff[k] = st * xa + sr * xb;
                         b.coeff[k] = -sr * xa + st * xb;
                       }
                     }
                   },
                   [&](const element::Displacement& d) {
                     modes[2 * d.mode].constant += d.amount.plus;
                     modes[2 * d.mode + 1].constant += d.amount.minus;
                   },
                   [&](const element::ClassicalFeedForward& ff) {
                     for (std::size_t q = 0; q < 2; ++q) {
                       const double g = q == 0 ? ff.gain.plus : ff.gain.minus;
                       const LinearForm& r = records[2 * ff.record + q];
                       LinearForm& t = modes[2 * ff.target + q];
                       t.constant += g * r.constant;
                       for (std::size_t k = 0; k < n_src; ++k) t.coeff[k] += g * r.coeff[k];
                     }
                   },
                   [&](const element::NoiseInjection& ni) {
                     modes[2 * ni.mode].coeff[next_noise] += 1.0;
                     modes[2 * ni.mode + 1].coeff[next_noise + 1] += 1.0;
                     next_noise += 2;
                   },
                   [&](const element::Measurement& m) {
                     records.push_back(modes[2 * m.plus_mode]);
                     records.push_back(modes[2 * m.minus_mode + 1]);
                   },
               },
               e);
  }

  TapCovariance out;
  out.records = net.record_names();
  const std::size_t dim = records.size();
  out.mean.resize(dim);
  out.cov.assign(dim * dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) {
    out.mean[i] = records[i].constant;
    for (std::size_t j = 0; j <= i; ++j) {
      double c = 0.0;
      for (std::size_t k = 0; k < n_src; ++k) c += records[i].coeff[k] * records[j].coeff[k] * source_var[k];
      out.cov[i * dim + j] = c;
      out.cov[j * dim + i] = c;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sampling

std::string scalar_label(const std::string& record, Quadrature q) { return record + to_string(q); }

NetworkSampler::NetworkSampler(LinearNetwork net) : net_(std::move(net)) {
  net_.validate();
  record_count_ = net_.record_names().size();
}

void NetworkSampler::run_block(std::uint64_t seed, std::size_t block, std::size_t n,
                               std::vector<double>& rows) const {
  const std::size_t begin = block * kSampleBlockSize;
  const std::size_t end = std::min(n, begin + kSampleBlockSize);
  const std::size_t shots = end > begin ? end - begin : 0;
  const std::size_t w = width();
  rows.resize(shots * w);
  if (shots == 0) return;

  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32)};
  std::mt19937_64 gen(seq);
  std::normal_distribution<double> normal(0.0, 1.0);

  const auto& inputs = net_.inputs();
  std::vector<QuadPair> sd(inputs.size());
  for (std::size_t m = 0; m < inputs.size(); ++m)
    sd[m] = map(inputs[m].stat.variance, [](double v) { return std::sqrt(v); });

  std::vector<double> mode(2 * inputs.size());
  for (std::size_t shot = 0; shot < shots; ++shot) {
    double* rec = rows.data() + shot * w;
    std::size_t r = 0;
    for (std::size_t m = 0; m < inputs.size(); ++m) {
      mode[2 * m] = inputs[m].stat.mean.plus + sd[m].plus * normal(gen);
      mode[2 * m + 1] = inputs[m].stat.mean.minus + sd[m].minus * normal(gen);
    }
    for (const auto& e : net_.elements()) {
      std::visit(overloaded{
                     [&](const element::BeamSplitter& bs) {
                       const double st = std::sqrt(bs.transmission);
                       const double sr = std::sqrt(1.0 - bs.transmission);
                       for (std::size_t q = 0; q < 2; ++q) {
                         const double a = mode[2 * bs.first + q], b = mode[2 * bs.second + q];
                         mode[2 * bs.first + q] = st * a + sr * b;
                         mode[2 * bs.second + q] = -sr * a + st * b;
                       }
                     },
                     [&](const element::Displacement& d) {
                       mode[2 * d.mode] += d.amount.plus;
                       mode[2 * d.mode + 1] += d.amount.minus;
                     },
                     [&](const element::ClassicalFeedForward& ff) {
                       mode[2 * ff.target] += ff.gain.plus * rec[2 * ff.record];
                       mode[2 * ff.target + 1] += ff.gain.minus * rec[2 * ff.record + 1];
                     },
                     [&](const element::NoiseInjection& ni) {
                       mode[2 * ni.mode] += std::sqrt(ni.variance.plus) * normal(gen);
                       mode[2 * ni.mode + 1] += std::sqrt(ni.variance.minus) * normal(gen);
                     },
                     [&](const element::Measurement& m) {
                       rec[2 * r] = mode[2 * m.plus_mode];
                       rec[2 * r + 1] = mode[2 * m.minus_mode + 1];
                       ++r;
                     },
                 },
                 e);
    }
  }
}

SampleTable sample_network(const LinearNetwork& net, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw StructuralError("sample count must be >= 1");
  NetworkSampler sampler(net);
  SampleTable table;
  for (const auto& name : net.record_names())
    for (auto q : kQuadratures) table.columns.push_back(scalar_label(name, q));
  table.rows = n;
  table.data.reserve(n * sampler.width());
  std::vector<double> rows;
  for (std::size_t b = 0; b < block_count(n); ++b) {
    sampler.run_block(seed, b, n, rows);
    table.data.insert(table.data.end(), rows.begin(), rows.end());
  }
  return table;
}

}  // namespace cvqkd
