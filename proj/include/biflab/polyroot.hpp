#pragma once

#include <Eigen/Core>
#include <complex>
#include <functional>
#include <initializer_list>
#include <utility>
#include <vector>

#include "biflab/errors.hpp"

namespace biflab {

/// Univariate polynomial over C, coefficients in ascending degree order.
/// The leading coefficient of a non-empty polynomial is nonzero (exact
/// trailing zeros are trimmed on construction).
class CPoly {
public:
  CPoly() : coeffs_(Eigen::VectorXcd::Zero(1)) {}
  explicit CPoly(Eigen::VectorXcd coeffs);
  CPoly(std::initializer_list<cdouble> coeffs);
  static CPoly constant(cdouble c) { return CPoly{c}; }
  static CPoly identity() { return CPoly{cdouble(0.0), cdouble(1.0)}; }

  /// Monic polynomial with the given roots, expanded with a balanced
  /// product tree.
  static CPoly from_roots(const std::vector<cdouble>& roots);

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const Eigen::VectorXcd& coeffs() const { return coeffs_; }
  cdouble coeff(int k) const { return k <= degree() ? coeffs_[k] : cdouble(0.0); }
  cdouble leading() const { return coeffs_[degree()]; }
  bool is_zero() const { return degree() == 0 && coeffs_[0] == cdouble(0.0); }
  double max_coeff_abs() const;
  bool finite() const;

  cdouble eval(cdouble z) const;                // Horner
  std::pair<cdouble, cdouble> eval_with_derivative(cdouble z) const;
  CPoly derivative() const;
  CPoly conj_coeffs() const;

  CPoly operator+(const CPoly& o) const;
  CPoly operator-(const CPoly& o) const;
  CPoly operator*(const CPoly& o) const;
  CPoly operator*(cdouble s) const;

private:
  Eigen::VectorXcd coeffs_;
};

/// Root with an estimated multiplicity. Multiplicities are a reported
/// estimate from residual-aware clustering; callers decide what to merge.
struct RootCluster {
  cdouble root;
  int multiplicity = 1;
};

/// All roots of p, clustered. The returned multiplicities sum to degree(p).
/// Aberth-Ehrlich simultaneous iteration started on scaled circles, then
/// per-root Newton polish. Each reported root r satisfies
/// |p(r)| <= tol * max-coefficient-scale.
///
/// Throws DegenerateInput (degree 0 or non-finite coefficients) and
/// NonConvergence (sweep cap hit; carries best iterates).
std::vector<RootCluster> roots(const CPoly& p, double tol = 1e-12);

/// Expand clusters to a flat list (each root repeated by multiplicity).
std::vector<cdouble> expand_roots(const std::vector<RootCluster>& clusters);

/// Evaluation callback for polynomials given implicitly: returns the Newton
/// ratio p(z)/p'(z). Used where expanded coefficients are unrepresentable or
/// ill-conditioned (iterated maps, dynatomic products).
using NewtonRatioFn = std::function<cdouble(cdouble)>;

/// Aberth-Ehrlich iteration driven by a Newton-ratio callback. `guesses`
/// must contain exactly the number of roots sought. `resid` reports the
/// final Newton-correction magnitude per root. Clustering is applied with
/// the same policy as roots().
std::vector<RootCluster> roots_by_ratio(const NewtonRatioFn& ratio,
                                        std::vector<cdouble> guesses,
                                        double tol = 1e-12,
                                        int max_sweeps = 400);

/// Multiplicity clustering of externally computed root approximations.
/// `stability` is a per-point resolution estimate (recent iterate motion);
/// pairs merge only when the motion, a flatness probe, and the local
/// multiplicity probe agree that they are unresolved.
std::vector<RootCluster> cluster_points(const std::vector<cdouble>& points, double tol,
                                        const NewtonRatioFn& ratio,
                                        const std::vector<double>& stability);

/// Numerator/denominator pair of the n-th iterate of the rational map
/// p_num/p_den, consistent as a homogeneous pair of degree d^n (the affine
/// denominator degree may be lower). Coefficients are jointly rescaled each
/// composition step.
///
/// Throws Overflow when d^n exceeds the symbolic cap 4096 or coefficients
/// leave the representable range; callers then switch to point evaluation.
std::pair<CPoly, CPoly> compose_iterate(const CPoly& p_num, const CPoly& p_den, int n);

/// Resultant of two polynomials via the Sylvester determinant.
cdouble resultant(const CPoly& p, const CPoly& q);

}  // namespace biflab
