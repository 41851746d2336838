#pragma once

#include "cvqkd/quad_pair.hpp"

namespace cvqkd {

// Products like 0.3 * (1/0.3) must not be rejected for rounding.
inline constexpr double kUncertaintySlack = 1e-12;

/// Lossy, noisy channel: transmission eta in (0, 1] coupling in a noise mode
/// of variance vn.
struct ChannelParams {
  double eta = 1.0;
  QuadPair vn = kVacuum;

  static ChannelParams make(double eta, QuadPair vn);
  static ChannelParams make(double eta, double vn) { return make(eta, QuadPair::both(vn)); }

  /// Throws DomainError for eta outside (0,1], UnphysicalNoiseError when
  /// vn.plus * vn.minus < 1.
  void validate() const;
};

/// Alice's ensemble: Gaussian modulation of variance vs on top of a state with
/// quadrature noise vsqz (1 for coherent states).
struct SourceParams {
  QuadPair vs{99.0, 99.0};
  QuadPair vsqz = kVacuum;

  /// Coherent-state source with total variance va (va >= 1).
  static SourceParams coherent(double va) { return from_va(QuadPair::both(va), kVacuum); }
  static SourceParams from_va(QuadPair va, QuadPair vsqz);

  [[nodiscard]] QuadPair va() const { return {vs.plus + vsqz.plus, vs.minus + vsqz.minus}; }
  [[nodiscard]] bool coherent_state() const { return vsqz == kVacuum; }

  void validate() const;
};

}  // namespace cvqkd
