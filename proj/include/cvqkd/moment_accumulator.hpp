#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cvqkd {

/// Streaming mean and co-moment matrix of a fixed-width vector stream.
/// merge() is the exact pairwise combination of two disjoint streams, so
/// blocks can be accumulated independently and reduced afterwards.
class MomentAccumulator {
 public:
  MomentAccumulator() = default;
  explicit MomentAccumulator(std::size_t dim) : mean_(dim, 0.0), comoment_(dim * dim, 0.0) {}

  void push(std::span<const double> x);
  void merge(const MomentAccumulator& other);

  [[nodiscard]] std::size_t dim() const { return mean_.size(); }
  [[nodiscard]] std::size_t count() const { return n_; }
  [[nodiscard]] double mean(std::size_t i) const { return mean_[i]; }
  /// Unbiased (n - 1) sample covariance.
  [[nodiscard]] double covariance(std::size_t i, std::size_t j) const;

  friend bool operator==(const MomentAccumulator&, const MomentAccumulator&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> mean_;
  std::vector<double> comoment_;  // sum (x_i - mean_i)(x_j - mean_j), row-major
};

/// Merges adjacent pairs level by level: ((0,1),(2,3)),... The result depends
/// only on the order of `parts`, never on how they were produced.
MomentAccumulator tree_reduce(std::vector<MomentAccumulator> parts);

}  // namespace cvqkd
