#include "cvqkd/moment_accumulator.hpp"

#include <limits>
#include <stdexcept>

namespace cvqkd {

void MomentAccumulator::push(std::span<const double> x) {
  const std::size_t d = dim();
  if (x.size() != d) throw std::invalid_argument("MomentAccumulator::push: width mismatch");
  ++n_;
  const double inv_n = 1.0 / static_cast<double>(n_);
  // delta before the mean update, x - new mean after it
  thread_local std::vector<double> delta;
  delta.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    delta[i] = x[i] - mean_[i];
    mean_[i] += delta[i] * inv_n;
  }
  for (std::size_t i = 0; i < d; ++i) {
    const double post = x[i] - mean_[i];
    double* row = comoment_.data() + i * d;
    for (std::size_t j = 0; j < d; ++j) row[j] += post * delta[j];
  }
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const std::size_t d = dim();
  if (other.dim() != d) throw std::invalid_argument("MomentAccumulator::merge: width mismatch");
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(other.n_);
  const double n = na + nb;
  std::vector<double> delta(d);
  for (std::size_t i = 0; i < d; ++i) delta[i] = other.mean_[i] - mean_[i];
  const double w = na * nb / n;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      comoment_[i * d + j] += other.comoment_[i * d + j] + delta[i] * delta[j] * w;
  for (std::size_t i = 0; i < d; ++i) mean_[i] += delta[i] * nb / n;
  n_ += other.n_;
}

double MomentAccumulator::covariance(std::size_t i, std::size_t j) const {
  if (n_ < 2) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t d = dim();
  return 0.5 * (comoment_[i * d + j] + comoment_[j * d + i]) / static_cast<double>(n_ - 1);
}

MomentAccumulator tree_reduce(std::vector<MomentAccumulator> parts) {
  if (parts.empty()) return {};
  while (parts.size() > 1) {
    std::vector<MomentAccumulator> next;
    next.reserve((parts.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < parts.size(); i += 2) {
      parts[i].merge(parts[i + 1]);
      next.push_back(std::move(parts[i]));
    }
    if (parts.size() % 2 == 1) next.push_back(std::move(parts.back()));
    parts = std::move(next);
  }
  return std::move(parts.front());
}

}  // namespace cvqkd
