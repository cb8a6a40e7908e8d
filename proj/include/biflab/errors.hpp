#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace biflab {

using cdouble = std::complex<double>;

/// Base of the failure taxonomy. `taxonomy()` is the stable name printed by
/// the CLI on exit code 3 and matched by tests.
class Error : public std::runtime_error {
public:
  Error(std::string taxonomy, const std::string& what)
      : std::runtime_error(taxonomy + ": " + what), taxonomy_(std::move(taxonomy)) {}

  const std::string& taxonomy() const noexcept { return taxonomy_; }

private:
  std::string taxonomy_;
};

/// Root iteration hit its sweep cap before reaching the residual target.
/// Carries the best iterates found so far.
class NonConvergence : public Error {
public:
  NonConvergence(const std::string& what, std::vector<cdouble> best)
      : Error("NonConvergence", what), best_iterates(std::move(best)) {}

  std::vector<cdouble> best_iterates;
};

class DegenerateInput : public Error {
public:
  explicit DegenerateInput(const std::string& what) : Error("DegenerateInput", what) {}
};

/// Coefficient growth left the representable range (or the symbolic
/// composition cap); callers should switch to point-wise iteration.
class Overflow : public Error {
public:
  explicit Overflow(const std::string& what) : Error("Overflow", what) {}
};

class PeriodTooLarge : public Error {
public:
  explicit PeriodTooLarge(const std::string& what) : Error("PeriodTooLarge", what) {}
};

class RootFindingFailed : public Error {
public:
  explicit RootFindingFailed(const std::string& what) : Error("RootFindingFailed", what) {}
};

/// A periodic point sits too close to both an exact-n and a lower-period
/// root cluster (parabolic degeneracy). Carries the offending points.
class AmbiguousPeriod : public Error {
public:
  AmbiguousPeriod(const std::string& what, std::vector<cdouble> points)
      : Error("AmbiguousPeriod", what), offending_points(std::move(points)) {}

  std::vector<cdouble> offending_points;
};

class IndeterminatePoint : public Error {
public:
  explicit IndeterminatePoint(const std::string& what) : Error("IndeterminatePoint", what) {}
};

class SingularMatrix : public Error {
public:
  explicit SingularMatrix(const std::string& what) : Error("SingularMatrix", what) {}
};

class CriticalPullback : public Error {
public:
  explicit CriticalPullback(const std::string& what) : Error("CriticalPullback", what) {}
};

/// All three pairings of fixed-point multipliers have product 1; no
/// normal form with fixed points 0 and infinity exists. Carries the triple.
class DegenerateModuli : public Error {
public:
  DegenerateModuli(const std::string& what, std::vector<cdouble> multipliers)
      : Error("DegenerateModuli", what), multiplier_triple(std::move(multipliers)) {}

  std::vector<cdouble> multiplier_triple;
};

class NotInComponent : public Error {
public:
  NotInComponent(const std::string& what, int roots_n, int roots_m)
      : Error("NotInComponent", what), disc_roots_n(roots_n), disc_roots_m(roots_m) {}

  int disc_roots_n;
  int disc_roots_m;
};

class CountMismatch : public Error {
public:
  CountMismatch(const std::string& what, std::vector<double> residuals)
      : Error("CountMismatch", what), residuals(std::move(residuals)) {}

  std::vector<double> residuals;
};

class DeflationMismatch : public Error {
public:
  explicit DeflationMismatch(const std::string& what) : Error("DeflationMismatch", what) {}
};

class TooManyMasked : public Error {
public:
  explicit TooManyMasked(const std::string& what) : Error("TooManyMasked", what) {}
};

class AtomCollision : public Error {
public:
  explicit AtomCollision(const std::string& what) : Error("AtomCollision", what) {}
};

class SingularJacobian : public Error {
public:
  explicit SingularJacobian(const std::string& what) : Error("SingularJacobian", what) {}
};

class StepCollapse : public Error {
public:
  explicit StepCollapse(const std::string& what) : Error("StepCollapse", what) {}
};

class LeftGuideRegion : public Error {
public:
  explicit LeftGuideRegion(const std::string& what) : Error("LeftGuideRegion", what) {}
};

}  // namespace biflab
