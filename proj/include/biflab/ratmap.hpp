#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "biflab/polyroot.hpp"

namespace biflab {

/// Point on the Riemann sphere as a normalized C^2 representative with a
/// canonical phase (largest component real positive), so equal points have
/// equal coordinates up to rounding.
class SpherePoint {
public:
  SpherePoint() : v_(1.0, 0.0) {}  // infinity
  static SpherePoint from_affine(cdouble z);
  static SpherePoint infinity() { return SpherePoint(); }
  static SpherePoint from_homogeneous(cdouble z, cdouble w);

  bool is_infinity(double tol = 1e-12) const { return std::abs(v_[1]) <= tol; }
  cdouble affine() const { return v_[0] / v_[1]; }
  const Eigen::Vector2cd& homogeneous() const { return v_; }

  /// Chordal distance, |z1 w2 - z2 w1| for unit representatives; lies in [0,1].
  double chordal(const SpherePoint& other) const;

private:
  Eigen::Vector2cd v_;
};

/// Degree-d rational map in an affine chart together with its homogeneous
/// lift F = (P(z,w), Q(z,w)). Immutable after construction. The lift keeps
/// the scaling induced by the given numerator/denominator; no silent
/// renormalization (the Green function depends on it).
class RationalMap {
public:
  RationalMap(CPoly numerator, CPoly denominator);

  static RationalMap power_map(int d);                     // z^d
  static RationalMap quadratic_polynomial(cdouble c);      // z^2 + c

  int degree() const { return degree_; }
  const CPoly& numerator() const { return num_; }
  const CPoly& denominator() const { return den_; }
  bool is_polynomial() const { return den_.degree() == 0; }

  cdouble eval_affine(cdouble z) const;
  SpherePoint eval(const SpherePoint& p) const;
  /// Derivative of the affine chart expression at z.
  cdouble derivative_affine(cdouble z) const;

  /// Homogeneous lift applied to an arbitrary (not necessarily unit) pair.
  Eigen::Vector2cd lift(const Eigen::Vector2cd& v) const;

  /// Finite critical points (roots of the Wronskian) and their images.
  std::vector<SpherePoint> critical_points() const;

private:
  CPoly num_, den_;
  int degree_;
  CPoly wronskian_;  // num' den - num den'
};

struct PeriodicPoint {
  SpherePoint point;
  cdouble multiplier;   // of f^n at the point
  int multiplicity;     // root-cluster estimate
};

enum class CycleType { attracting, neutral, repelling };

struct Cycle {
  std::vector<SpherePoint> points;  // ordered orbit, f maps each to the next
  cdouble multiplier;               // chain-rule product over one turn
  CycleType type;
};

/// Exact-period-n cycles of a map. total point count over cycles equals
/// exact_period_count(d, n) for non-exceptional maps.
struct CycleSpectrum {
  int period = 1;
  std::vector<Cycle> cycles;

  int point_count() const { return static_cast<int>(cycles.size()) * period; }
};

/// All d^n + 1 fixed points of f^n counted with multiplicity, as roots of the
/// numerator of f^n(z) - z plus the point at infinity when the degree drops.
/// Multipliers are chain-rule products along the orbit, never derivatives of
/// the composed polynomial.
///
/// Throws PeriodTooLarge (d^n > 4096) and RootFindingFailed.
std::vector<PeriodicPoint> periodic_points(const RationalMap& f, int n, double tol = 1e-12);

/// Points of exact period n grouped into cycles, with lower-period points
/// removed by chordal membership against periodic_points(f, k) for proper
/// divisors k. Throws AmbiguousPeriod on parabolic-degenerate configurations.
CycleSpectrum exact_cycles(const RationalMap& f, int n, double tol = 1e-12);

/// Multiplier of the cycle through the given orbit points, computed in a
/// chart rotated so no orbit point is near infinity.
cdouble cycle_multiplier(const RationalMap& f, const std::vector<SpherePoint>& orbit);

struct GreenValue {
  double value = 0.0;
  double step_bound = 0.0;  // |value(iters) - value(iters-1)| <= step_bound * d^-iters
};

/// d^-iters * ln ||F^iters(point)|| with per-step renormalization (the logs
/// are tracked exactly, no overflow). Throws IndeterminatePoint when the
/// orbit enters a 1e-14 neighborhood of (0,0).
GreenValue green(const RationalMap& f, const Eigen::Vector2cd& point, int iters);

/// Moebius conjugate M o f o M^-1; same degree. Throws SingularMatrix.
RationalMap conjugate(const RationalMap& f, const Eigen::Matrix2cd& moebius);

/// The d preimages of y counted with multiplicity (roots of the pulled-back
/// binary form, plus infinity for the degree drop).
std::vector<SpherePoint> preimages(const RationalMap& f, const SpherePoint& y, double tol = 1e-12);

/// log of the spherical derivative of f at p, via the Jacobian of the lift:
/// ln ||f'||_sph = ln|J_F(p)| - ln d - 2 ln||F(p)|| for a unit representative.
double log_spherical_derivative(const RationalMap& f, const SpherePoint& p);

}  // namespace biflab
