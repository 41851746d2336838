#pragma once

#include <stdexcept>
#include <string>

namespace cvqkd {

// Parameter outside its mathematical domain (transmission, gain, bandwidth, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Variances that violate V+ * V- >= 1 for a mode presented as physical.
class UnphysicalNoiseError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Malformed linear network or run specification.
class StructuralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Second moments that cannot come from any joint distribution (cov^2 > Vx Vy).
class InconsistentMomentsError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class DegenerateEstimatorError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// No eavesdropper transmission satisfies the undetectability constraint.
class NoAttackPossibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cvqkd
