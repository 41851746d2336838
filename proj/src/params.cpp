#include "cvqkd/params.hpp"

#include <cmath>
#include <sstream>

#include "cvqkd/errors.hpp"

namespace cvqkd {

ChannelParams ChannelParams::make(double eta, QuadPair vn) {
  ChannelParams ch{eta, vn};
  ch.validate();
  return ch;
}

void ChannelParams::validate() const {
  if (!std::isfinite(eta) || eta <= 0.0 || eta > 1.0) {
    std::ostringstream os;
    os << "channel transmission eta=" << eta << " outside (0, 1]";
    throw DomainError(os.str());
  }
  if (!vn.positive()) throw UnphysicalNoiseError("channel noise variances must be positive and finite");
  if (vn.product() < 1.0 - kUncertaintySlack) {
    std::ostringstream os;
    os << "channel noise violates V_N+ * V_N- >= 1 (V_N+=" << vn.plus << ", V_N-=" << vn.minus << ")";
    throw UnphysicalNoiseError(os.str());
  }
}

SourceParams SourceParams::from_va(QuadPair va, QuadPair vsqz) {
  SourceParams src{{va.plus - vsqz.plus, va.minus - vsqz.minus}, vsqz};
  src.validate();
  return src;
}

void SourceParams::validate() const {
  if (!vsqz.positive()) throw DomainError("squeezed-state variances must be positive and finite");
  if (vsqz.product() < 1.0 - kUncertaintySlack) {
    std::ostringstream os;
    os << "source state violates V_sqz+ * V_sqz- >= 1 (V_sqz+=" << vsqz.plus << ", V_sqz-=" << vsqz.minus
       << ")";
    throw UnphysicalNoiseError(os.str());
  }
  if (!vs.nonnegative()) {
    std::ostringstream os;
    os << "modulation variance must be >= 0 (V_A must be at least V_sqz; V_S+=" << vs.plus
       << ", V_S-=" << vs.minus << ")";
    throw DomainError(os.str());
  }
}

}  // namespace cvqkd
