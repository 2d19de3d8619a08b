#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace diamond {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public Error {
 public:
  using Error::Error;
};

class OutsideDiamond : public Error {
 public:
  using Error::Error;
};

class DetectorOverlapTooLarge : public Error {
 public:
  DetectorOverlapTooLarge(const std::string& what, double overlap)
      : Error(what), overlap_(overlap) {}
  double overlap() const { return overlap_; }

 private:
  double overlap_;
};

class NonPhysical : public Error {
 public:
  NonPhysical(const std::string& what, double min_eigenvalue)
      : Error(what), min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

class OptimizationFailed : public Error {
 public:
  using Error::Error;
};

// Best estimate is kept per component; scalar integrals have one entry.
class ToleranceNotMet : public Error {
 public:
  ToleranceNotMet(const std::string& what, std::vector<std::complex<double>> estimate,
                  double error_bound)
      : Error(what), estimate_(std::move(estimate)), error_bound_(error_bound) {}
  const std::vector<std::complex<double>>& estimate() const { return estimate_; }
  double error_bound() const { return error_bound_; }

 private:
  std::vector<std::complex<double>> estimate_;
  double error_bound_;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidParameter(what);
}

}  // namespace diamond
