#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cvqkd/params.hpp"
#include "cvqkd/quad_pair.hpp"

namespace cvqkd {

/// First and second moments of a single mode. No cross-quadrature
/// correlations are ever created by the networks in this library.
struct ModeStat {
  QuadPair mean{0.0, 0.0};
  QuadPair variance = kVacuum;

  static constexpr ModeStat vacuum() { return {}; }
};

/// Beamsplitter of transmission t acting on independent modes a, b:
///   out1 =  sqrt(t) a + sqrt(1-t) b
///   out2 = -sqrt(1-t) a + sqrt(t) b
std::pair<ModeStat, ModeStat> beamsplitter_mix(const ModeStat& a, const ModeStat& b, double t);

/// Channel of transmission eta mixing in an independent noise mode of
/// variance vn.
ModeStat lossy_channel(const ModeStat& in, const ChannelParams& ch);

/// Simultaneous measurement of both quadratures: 50/50 split with a vacuum,
/// plus read from one port, minus from the other.
ModeStat heterodyne_detect(const ModeStat& in);

// ---------------------------------------------------------------------------
// Linear networks of Gaussian modes

namespace element {

struct BeamSplitter {
  std::size_t first;   // replaced by the transmitted port
  std::size_t second;  // replaced by the reflected port
  double transmission;
};

struct Displacement {
  std::size_t mode;
  QuadPair amount;
};

/// target^q += gain^q * record^q for a previously taken measurement record.
struct ClassicalFeedForward {
  std::size_t record;
  std::size_t target;
  QuadPair gain;
};

/// Adds fresh independent zero-mean Gaussian noise to a mode.
struct NoiseInjection {
  std::size_t mode;
  QuadPair variance;
};

/// Records the plus quadrature of one mode and the minus quadrature of
/// another (the same mode for a direct tap). Non-destructive.
struct Measurement {
  std::string name;
  std::size_t plus_mode;
  std::size_t minus_mode;
};

}  // namespace element

using NetworkElement = std::variant<element::BeamSplitter, element::Displacement,
                                    element::ClassicalFeedForward, element::NoiseInjection,
                                    element::Measurement>;

struct InputMode {
  std::string name;
  ModeStat stat;
};

class LinearNetwork {
 public:
  std::size_t add_input(std::string name, QuadPair variance, QuadPair mean = {0.0, 0.0});

  LinearNetwork& beam_splitter(std::size_t first, std::size_t second, double transmission);
  LinearNetwork& displace(std::size_t mode, QuadPair amount);
  LinearNetwork& feed_forward(std::size_t record, std::size_t target, QuadPair gain);
  LinearNetwork& inject_noise(std::size_t mode, QuadPair variance);
  /// Returns the record index.
  std::size_t measure(std::string name, std::size_t plus_mode, std::size_t minus_mode);
  std::size_t measure(std::string name, std::size_t mode) { return measure(std::move(name), mode, mode); }

  /// Heterodyne of `mode` against the vacuum input `vacuum`; returns the record index.
  std::size_t heterodyne(std::string name, std::size_t mode, std::size_t vacuum);

  /// Appends a raw element without checks (validate() reports problems).
  void push(NetworkElement e) { elements_.push_back(std::move(e)); }

  [[nodiscard]] const std::vector<InputMode>& inputs() const { return inputs_; }
  [[nodiscard]] const std::vector<NetworkElement>& elements() const { return elements_; }
  [[nodiscard]] std::vector<std::string> record_names() const;
  [[nodiscard]] std::size_t record_index(const std::string& name) const;

  /// Throws StructuralError on undeclared modes, records used before they
  /// are taken, transmissions outside [0,1] or negative variances.
  void validate() const;

 private:
  std::vector<InputMode> inputs_;
  std::vector<NetworkElement> elements_;
};

/// Means and covariance of every measured scalar. Scalar index of record r,
/// quadrature q is 2r + (q == minus).
struct TapCovariance {
  std::vector<std::string> records;
  std::vector<double> mean;
  std::vector<double> cov;  // row-major, dim x dim

  [[nodiscard]] std::size_t dim() const { return mean.size(); }
  [[nodiscard]] static std::size_t scalar(std::size_t record, Quadrature q) {
    return 2 * record + (q == Quadrature::minus ? 1 : 0);
  }
  [[nodiscard]] double at(std::size_t i, std::size_t j) const { return cov[i * dim() + j]; }
  [[nodiscard]] double variance(std::size_t record, Quadrature q) const {
    auto i = scalar(record, q);
    return at(i, i);
  }
  [[nodiscard]] double covariance(std::size_t ra, std::size_t rb, Quadrature q) const {
    return at(scalar(ra, q), scalar(rb, q));
  }
  [[nodiscard]] QuadPair variance(std::size_t record) const {
    return {variance(record, Quadrature::plus), variance(record, Quadrature::minus)};
  }
  [[nodiscard]] QuadPair covariance(std::size_t ra, std::size_t rb) const {
    return {covariance(ra, rb, Quadrature::plus), covariance(ra, rb, Quadrature::minus)};
  }
};

/// Exact second moments of all records, obtained by tracking every mode as a
/// linear form over the independent Gaussian sources.
TapCovariance propagate(const LinearNetwork& net);

// ---------------------------------------------------------------------------
// Sampling

/// Number of shots drawn from one generator stream. Shot k always belongs to
/// block k / kSampleBlockSize, whatever the sharding.
inline constexpr std::size_t kSampleBlockSize = 1u << 14;

/// Materialized samples: one row per shot, columns are record scalars in
/// TapCovariance order.
struct SampleTable {
  std::vector<std::string> columns;
  std::size_t rows = 0;
  std::vector<double> data;  // row-major

  [[nodiscard]] double at(std::size_t row, std::size_t col) const { return data[row * columns.size() + col]; }
  friend bool operator==(const SampleTable&, const SampleTable&) = default;
};

/// Column label of a record scalar, e.g. "XB+".
std::string scalar_label(const std::string& record, Quadrature q);

SampleTable sample_network(const LinearNetwork& net, std::size_t n, std::uint64_t seed);

/// Number of blocks needed for n shots.
inline std::size_t block_count(std::size_t n) { return (n + kSampleBlockSize - 1) / kSampleBlockSize; }

/// Network with validated, pre-flattened elements for repeated sampling.
/// Each block is drawn from its own generator seeded by (seed, block), so the
/// output does not depend on how blocks are distributed over workers.
class NetworkSampler {
 public:
  explicit NetworkSampler(LinearNetwork net);

  [[nodiscard]] std::size_t width() const { return 2 * record_count_; }
  [[nodiscard]] const LinearNetwork& network() const { return net_; }

  /// Fills `rows` (resized) with the shots of `block` among n total shots,
  /// row-major with width() columns.
  void run_block(std::uint64_t seed, std::size_t block, std::size_t n, std::vector<double>& rows) const;

 private:
  LinearNetwork net_;
  std::size_t record_count_ = 0;
};

}  // namespace cvqkd
