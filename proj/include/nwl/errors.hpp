#pragma once

#include <stdexcept>
#include <string>

namespace nwl {

/// Base of every error the toolkit throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on the mathematical domain was violated (k = 0 on a
/// homogeneous symbol, nonzero mean under a homogeneous operator, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The request is outside what the implementation can deliver meaningfully
/// (difference order above the cap, missing real-argument extension, ...).
class CapabilityError : public Error {
 public:
  using Error::Error;
};

/// Numerical resolution is insufficient for a trustworthy verdict.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// Two quantities that must agree by construction do not.
class InconsistencyError : public Error {
 public:
  using Error::Error;
};

/// An iterative method ran out of iterations or diverged.
class IterationFailure : public Error {
 public:
  IterationFailure(const std::string& what, int iterations, double last_update)
      : Error(what), iterations_(iterations), last_update_(last_update) {}
  int iterations() const noexcept { return iterations_; }
  double last_update() const noexcept { return last_update_; }

 private:
  int iterations_;
  double last_update_;
};

/// The smoothing iteration hit a nonpositive radicand: the profile reached
/// (or overshot) the highest-wave bound phi = c/2 somewhere.
class HighestWaveApproach : public Error {
 public:
  HighestWaveApproach(const std::string& what, double x, double radicand)
      : Error(what), x_(x), radicand_(radicand) {}
  double x() const noexcept { return x_; }
  double radicand() const noexcept { return radicand_; }

 private:
  double x_;
  double radicand_;
};

/// Newton hit a (numerically) singular Jacobian.
class FoldDetected : public Error {
 public:
  FoldDetected(const std::string& what, double rcond) : Error(what), rcond_(rcond) {}
  double rcond() const noexcept { return rcond_; }

 private:
  double rcond_;
};

/// Time integration blew up.
class InstabilityError : public Error {
 public:
  InstabilityError(const std::string& what, double time) : Error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace nwl
