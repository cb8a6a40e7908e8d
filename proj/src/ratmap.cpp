#include "biflab/ratmap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "biflab/arith.hpp"

namespace biflab {

namespace {

constexpr double kPointIdentityTol = 1e-8;  // chordal identity threshold
constexpr int kSymbolicDegreeCap = 4096;

double pow_int(double base, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

}  // namespace

SpherePoint SpherePoint::from_affine(cdouble z) { return from_homogeneous(z, 1.0); }

SpherePoint SpherePoint::from_homogeneous(cdouble z, cdouble w) {
  SpherePoint p;
  double norm = std::sqrt(std::norm(z) + std::norm(w));
  if (norm == 0.0 || !std::isfinite(norm)) {
    // treat non-finite affine input as the point at infinity
    p.v_ = Eigen::Vector2cd(1.0, 0.0);
    return p;
  }
  Eigen::Vector2cd v(z / norm, w / norm);
  // canonical phase: largest component real positive
  cdouble anchor = (std::abs(v[0]) >= std::abs(v[1])) ? v[0] : v[1];
  v *= std::conj(anchor) / std::abs(anchor);
  p.v_ = v;
  return p;
}

double SpherePoint::chordal(const SpherePoint& o) const {
  return std::abs(v_[0] * o.v_[1] - v_[1] * o.v_[0]);
}

namespace {

// Resultant of the homogeneous degree-d pair, Sylvester determinant over the
// padded coefficient arrays (leading zeros kept).
cdouble homogeneous_resultant(const CPoly& num, const CPoly& den, int d) {
  Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(2 * d, 2 * d);
  for (int r = 0; r < d; ++r) {
    for (int k = 0; k <= d; ++k) {
      S(r, r + k) = num.coeff(d - k);
      S(d + r, r + k) = den.coeff(d - k);
    }
  }
  return S.determinant();
}

}  // namespace

RationalMap::RationalMap(CPoly numerator, CPoly denominator)
    : num_(std::move(numerator)), den_(std::move(denominator)) {
  if (!num_.finite() || !den_.finite()) throw DegenerateInput("non-finite map coefficient");
  if (den_.is_zero()) throw DegenerateInput("denominator identically zero");
  degree_ = std::max(num_.degree(), den_.degree());
  if (degree_ < 2) throw DegenerateInput("rational map must have degree >= 2");
  double scale = std::max(num_.max_coeff_abs(), den_.max_coeff_abs());
  CPoly ns = num_ * cdouble(1.0 / scale);
  CPoly ds = den_ * cdouble(1.0 / scale);
  if (std::abs(homogeneous_resultant(ns, ds, degree_)) <= 1e-12) {
    throw DegenerateInput("degenerate map: homogeneous resultant vanishes");
  }
  wronskian_ = num_.derivative() * den_ - num_ * den_.derivative();
}

RationalMap RationalMap::power_map(int d) {
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(d + 1);
  c[d] = 1.0;
  return RationalMap(CPoly(c), CPoly{1.0});
}

RationalMap RationalMap::quadratic_polynomial(cdouble c) {
  return RationalMap(CPoly{c, 0.0, 1.0}, CPoly{1.0});
}

cdouble RationalMap::eval_affine(cdouble z) const { return num_.eval(z) / den_.eval(z); }

Eigen::Vector2cd RationalMap::lift(const Eigen::Vector2cd& v) const {
  // P(z,w) = sum num_i z^i w^(d-i), Q likewise
  cdouble z = v[0], w = v[1];
  cdouble zp = 1.0;
  std::vector<cdouble> zpow(degree_ + 1), wpow(degree_ + 1);
  for (int i = 0; i <= degree_; ++i) {
    zpow[i] = zp;
    zp *= z;
  }
  cdouble wp = 1.0;
  for (int i = 0; i <= degree_; ++i) {
    wpow[i] = wp;
    wp *= w;
  }
  cdouble P = 0.0, Q = 0.0;
  for (int i = 0; i <= degree_; ++i) {
    cdouble m = zpow[i] * wpow[degree_ - i];
    P += num_.coeff(i) * m;
    Q += den_.coeff(i) * m;
  }
  return {P, Q};
}

SpherePoint RationalMap::eval(const SpherePoint& p) const {
  Eigen::Vector2cd w = lift(p.homogeneous());
  return SpherePoint::from_homogeneous(w[0], w[1]);
}

cdouble RationalMap::derivative_affine(cdouble z) const {
  cdouble d = den_.eval(z);
  return wronskian_.eval(z) / (d * d);
}

std::vector<SpherePoint> RationalMap::critical_points() const {
  std::vector<SpherePoint> out;
  if (wronskian_.degree() >= 1) {
    for (cdouble r : expand_roots(roots(wronskian_, 1e-12))) out.push_back(SpherePoint::from_affine(r));
  }
  for (int k = wronskian_.degree(); k < 2 * degree_ - 2; ++k) out.push_back(SpherePoint::infinity());
  return out;
}

double log_spherical_derivative(const RationalMap& f, const SpherePoint& p) {
  const int d = f.degree();
  cdouble z = p.homogeneous()[0], w = p.homogeneous()[1];
  cdouble Pz = 0.0, Pw = 0.0, Qz = 0.0, Qw = 0.0;
  for (int i = 0; i <= d; ++i) {
    cdouble zi = (i >= 1) ? std::pow(z, i - 1) : cdouble(0.0);
    cdouble zi0 = std::pow(z, i);
    cdouble wj = (d - i >= 1) ? std::pow(w, d - i - 1) : cdouble(0.0);
    cdouble wj0 = std::pow(w, d - i);
    if (i >= 1) {
      Pz += f.numerator().coeff(i) * static_cast<double>(i) * zi * wj0;
      Qz += f.denominator().coeff(i) * static_cast<double>(i) * zi * wj0;
    }
    if (d - i >= 1) {
      Pw += f.numerator().coeff(i) * static_cast<double>(d - i) * zi0 * wj;
      Qw += f.denominator().coeff(i) * static_cast<double>(d - i) * zi0 * wj;
    }
  }
  cdouble J = Pz * Qw - Pw * Qz;
  Eigen::Vector2cd img = f.lift(p.homogeneous());
  double nimg = img.norm();
  if (nimg < 1e-300 || std::abs(J) < 1e-300) throw IndeterminatePoint("spherical derivative at a degenerate point");
  return std::log(std::abs(J)) - std::log(static_cast<double>(d)) - 2.0 * std::log(nimg);
}

GreenValue green(const RationalMap& f, const Eigen::Vector2cd& point, int iters) {
  double n0 = point.norm();
  if (n0 == 0.0) throw IndeterminatePoint("green undefined at (0,0)");
  Eigen::Vector2cd v = point / n0;
  double logn = std::log(n0);
  double cbound = 0.0;
  const double d = f.degree();
  for (int k = 0; k < iters; ++k) {
    Eigen::Vector2cd w = f.lift(v);
    double nw = w.norm();
    if (nw < 1e-14) throw IndeterminatePoint("orbit of the lift entered a 1e-14 ball at (0,0)");
    logn = d * logn + std::log(nw);
    cbound = std::max(cbound, std::abs(std::log(nw)));
    v = w / nw;
  }
  GreenValue g;
  g.value = logn * std::pow(d, -static_cast<double>(iters));
  g.step_bound = cbound;
  return g;
}

RationalMap conjugate(const RationalMap& f, const Eigen::Matrix2cd& moebius) {
  cdouble det = moebius(0, 0) * moebius(1, 1) - moebius(0, 1) * moebius(1, 0);
  if (std::abs(det) <= 1e-12) throw SingularMatrix("moebius matrix has |det| <= 1e-12");

  const int d = f.degree();
  // inner substitution by the adjugate (projectively the inverse)
  cdouble ia = moebius(1, 1), ib = -moebius(0, 1);
  cdouble ic = -moebius(1, 0), id = moebius(0, 0);

  // powers of (ia z + ib w) and (ic z + id w) as coefficient arrays in z
  auto binary_pow = [d](cdouble a, cdouble b) {
    // returns table[k] = coefficients of (a z + b w)^k, length k+1
    std::vector<std::vector<cdouble>> table(d + 1);
    table[0] = {1.0};
    for (int k = 1; k <= d; ++k) {
      table[k].assign(k + 1, 0.0);
      for (int j = 0; j < k; ++j) {
        table[k][j + 1] += table[k - 1][j] * a;
        table[k][j] += table[k - 1][j] * b;
      }
    }
    return table;
  };
  auto A = binary_pow(ia, ib);
  auto B = binary_pow(ic, id);

  std::vector<cdouble> Pc(d + 1, 0.0), Qc(d + 1, 0.0);
  for (int i = 0; i <= d; ++i) {
    // (ia z + ib w)^i (ic z + id w)^(d-i)
    std::vector<cdouble> m(d + 1, 0.0);
    for (int p = 0; p <= i; ++p) {
      for (int q = 0; q <= d - i; ++q) m[p + q] += A[i][p] * B[d - i][q];
    }
    for (int k = 0; k <= d; ++k) {
      Pc[k] += f.numerator().coeff(i) * m[k];
      Qc[k] += f.denominator().coeff(i) * m[k];
    }
  }
  // outer application of M
  Eigen::VectorXcd nn(d + 1), dd(d + 1);
  for (int k = 0; k <= d; ++k) {
    nn[k] = moebius(0, 0) * Pc[k] + moebius(0, 1) * Qc[k];
    dd[k] = moebius(1, 0) * Pc[k] + moebius(1, 1) * Qc[k];
  }
  double scale = std::max(Eigen::VectorXcd(nn).cwiseAbs().maxCoeff(),
                          Eigen::VectorXcd(dd).cwiseAbs().maxCoeff());
  return RationalMap(CPoly((nn / scale).eval()), CPoly((dd / scale).eval()));
}

cdouble cycle_multiplier(const RationalMap& f, const std::vector<SpherePoint>& orbit) {
  // chart where no orbit point is near infinity: rotate a direction v that is
  // chordal-far from the whole orbit out to infinity, conjugate, chain rule
  double best = -1.0;
  SpherePoint vbest;
  std::vector<SpherePoint> candidates = {SpherePoint::infinity(), SpherePoint::from_affine(0.0),
                                         SpherePoint::from_affine(1.0), SpherePoint::from_affine(-1.0),
                                         SpherePoint::from_affine(cdouble(0.0, 1.0))};
  for (int k = 0; k < 24; ++k) {
    double a = 2.0 * M_PI * 0.6180339887498949 * k;
    double r = 0.25 + 0.35 * (k % 5);
    candidates.push_back(SpherePoint::from_affine(std::polar(r, a)));
  }
  for (const auto& cand : candidates) {
    double mind = 2.0;
    for (const auto& p : orbit) mind = std::min(mind, cand.chordal(p));
    if (mind > best) {
      best = mind;
      vbest = cand;
    }
  }

  if (vbest.is_infinity(1e-12)) {
    // plain affine chain rule is valid
    cdouble m = 1.0;
    for (const auto& p : orbit) m *= f.derivative_affine(p.affine());
    return m;
  }
  Eigen::Matrix2cd U;
  cdouble v1 = vbest.homogeneous()[0], v2 = vbest.homogeneous()[1];
  U << std::conj(v1), std::conj(v2), -v2, v1;  // unitary, sends vbest to infinity
  RationalMap g = conjugate(f, U);
  cdouble m = 1.0;
  for (const auto& p : orbit) {
    Eigen::Vector2cd q = U * p.homogeneous();
    m *= g.derivative_affine(q[0] / q[1]);
  }
  return m;
}

namespace {

// multiplier of f^n at one periodic point, robust to orbits through infinity
cdouble multiplier_at(const RationalMap& f, const SpherePoint& start, int n) {
  std::vector<SpherePoint> orbit(n);
  orbit[0] = start;
  for (int k = 1; k < n; ++k) orbit[k] = f.eval(orbit[k - 1]);
  return cycle_multiplier(f, orbit);
}

}  // namespace

// d preimages of y, as roots of y_w P(z,w) - y_z Q(z,w) plus infinity for the
// degree drop
std::vector<SpherePoint> preimages(const RationalMap& f, const SpherePoint& y, double tol) {
  const int d = f.degree();
  cdouble yz = y.homogeneous()[0], yw = y.homogeneous()[1];
  Eigen::VectorXcd c(d + 1);
  for (int i = 0; i <= d; ++i) c[i] = yw * f.numerator().coeff(i) - yz * f.denominator().coeff(i);
  double scale = c.cwiseAbs().maxCoeff();
  if (scale == 0.0) throw DegenerateInput("preimage polynomial vanished");
  CPoly r((c / scale).eval());
  std::vector<SpherePoint> out;
  if (r.degree() >= 1) {
    if (d == 2 && r.degree() == 2) {
      // closed-form quadratic, the hot path of backward sampling
      cdouble a = r.coeff(2), b = r.coeff(1), c0 = r.coeff(0);
      cdouble sq = std::sqrt(b * b - 4.0 * a * c0);
      cdouble q = (std::real(std::conj(b) * sq) >= 0.0) ? -0.5 * (b + sq) : -0.5 * (b - sq);
      cdouble z1 = q / a;
      cdouble z2 = (std::abs(q) > 0.0) ? c0 / q : -b / a - z1;
      out.push_back(SpherePoint::from_affine(z1));
      out.push_back(SpherePoint::from_affine(z2));
    } else {
      for (cdouble z : expand_roots(roots(r, tol))) out.push_back(SpherePoint::from_affine(z));
    }
  }
  for (int k = r.degree(); k < d; ++k) out.push_back(SpherePoint::infinity());
  return out;
}

namespace {

// Orbit-evaluated Newton ratio for g(z) = f^n(z) - z on polynomial maps.
// Composing coefficients is hopeless for interval-like Julia sets (the
// expanded iterate has astronomically cancelling coefficients), while the
// orbit evaluation is backward stable.
cdouble polynomial_iterate_ratio(const RationalMap& f, int n, cdouble z) {
  const double dn = pow_int(f.degree(), n);
  cdouble zk = z;
  cdouble rho = 1.0;
  for (int k = 0; k < n; ++k) {
    if (std::abs(zk) > 1e8 || std::abs(rho) > 1e280) {
      // escaped far outside the filled Julia set; Newton on the dominant
      // monomial pulls the iterate back in
      return z / dn;
    }
    rho *= f.derivative_affine(zk);
    zk = f.eval_affine(zk);
  }
  if (std::abs(zk) > 1e100) return z / dn;
  cdouble gp = rho - 1.0;
  if (std::abs(gp) < 1e-300) return cdouble(1e-3, 1e-3);
  return (zk - z) / gp;
}

// Orbit-evaluated Newton ratio for phi(z) = D_n(z) (f^n(z) - z), the affine
// fixed-point polynomial. With g = f^n(z) - z, A = (ln D_n)'(z) and
// B = (f^n)'(z) - 1 the ratio is g / (A g + B). The expanded phi can be
// arbitrarily ill-conditioned (periodic points cluster at small scales),
// while the orbit route resolves each root to machine precision.
cdouble iterate_newton_ratio(const RationalMap& f, int n, const CPoly& den_deriv,
                             double den_scale, cdouble z) {
  const int d = f.degree();
  const double dn = pow_int(d, n);
  cdouble zk = z;
  cdouble rho = 1.0;   // (f^k)'(z)
  cdouble logD = 0.0;  // (ln D_n)'(z)
  double dpow = pow_int(d, n - 1);
  for (int k = 0; k < n; ++k) {
    if (std::abs(zk) > 1e8 || std::abs(rho) > 1e250) {
      // far outside the periodic-point region; pull in along the dominant
      // monomial direction
      return z / dn;
    }
    cdouble den = f.denominator().eval(zk);
    if (std::abs(den) < 1e-13 * den_scale * std::max(1.0, pow_int(std::abs(zk), d))) {
      return std::polar(1e-4 * (1.0 + std::abs(z)), std::arg(z == cdouble(0.0) ? cdouble(1.0) : z));
    }
    if (f.degree() >= 1 && f.denominator().degree() >= 1) logD += dpow * (den_deriv.eval(zk) / den) * rho;
    rho *= f.derivative_affine(zk);
    zk = f.eval_affine(zk);
    dpow /= d;
  }
  if (std::abs(zk) > 1e8) return z / dn;
  cdouble g = zk - z;
  cdouble denom = logD * g + (rho - 1.0);
  if (std::abs(denom) < 1e-300) return (std::abs(g) < 1e-12) ? cdouble(0.0) : cdouble(1e-3, 1e-3);
  return g / denom;
}

// Seed for the inverse-orbit tree: a repelling affine fixed point when one
// exists, else a generic point.
SpherePoint tree_seed(const RationalMap& f, double tol) {
  CPoly fix = f.numerator() - CPoly::identity() * f.denominator();
  cdouble seed(0.61803398875, 0.31415926);
  if (fix.degree() >= 1) {
    try {
      for (cdouble z : expand_roots(roots(fix, tol))) {
        if (std::abs(f.derivative_affine(z)) > 1.2) return SpherePoint::from_affine(z);
      }
    } catch (const NonConvergence&) {
    }
  }
  return SpherePoint::from_affine(seed);
}

// One shadowing-refinement pass over a cyclic orbit tuple: each entry is
// replaced by the preimage of its successor nearest to its current value.
// The pass contracts with factor 1/|multiplier| around a repelling cycle.
double refine_orbit_tuple(const RationalMap& f, std::vector<SpherePoint>& orbit, double tol) {
  const int n = static_cast<int>(orbit.size());
  std::vector<SpherePoint> next(n);
  double motion = 0.0;
  for (int j = 0; j < n; ++j) {
    const SpherePoint& target = orbit[(j + 1) % n];
    double best = 3.0;
    SpherePoint pick = orbit[j];
    for (const auto& q : preimages(f, target, tol)) {
      double dd = q.chordal(orbit[j]);
      if (dd < best) {
        best = dd;
        pick = q;
      }
    }
    next[j] = pick;
    motion = std::max(motion, best);
  }
  orbit.swap(next);
  return motion;
}

struct FoundPoint {
  SpherePoint point;
  double stability;  // recent iterate motion, chordal
};

// Newton polish in an adaptively chosen affine chart.
FoundPoint polish_point(const RationalMap& f, const RationalMap* f_inverted, int n,
                        const CPoly& den_deriv, double den_scale, const CPoly& inv_den_deriv,
                        double inv_den_scale, const SpherePoint& p, double refine_motion) {
  bool use_inverted = p.is_infinity(1e-3);  // |z| > ~1e3, polish w = 1/z instead
  const RationalMap& g = use_inverted ? *f_inverted : f;
  cdouble z = use_inverted ? (p.homogeneous()[1] / p.homogeneous()[0]) : p.affine();
  double step = 0.0;
  for (int it = 0; it < 8; ++it) {
    cdouble N = iterate_newton_ratio(g, n, use_inverted ? inv_den_deriv : den_deriv,
                                     use_inverted ? inv_den_scale : den_scale, z);
    if (!std::isfinite(std::abs(N))) break;
    step = std::abs(N) / (1.0 + std::norm(z));  // ~chordal
    z -= N;
    if (step < 1e-16) break;
  }
  FoundPoint out;
  out.point = use_inverted ? SpherePoint::from_homogeneous(1.0, z) : SpherePoint::from_affine(z);
  out.stability = std::max(refine_motion, step);
  return out;
}

// Candidate locations of non-repelling cycles: tails of the critical orbits.
std::vector<SpherePoint> critical_orbit_tail(const RationalMap& f, int n) {
  std::vector<SpherePoint> out;
  for (const auto& c : f.critical_points()) {
    SpherePoint z = c;
    int total = 600 + 30 * n;
    for (int k = 0; k < total; ++k) {
      z = f.eval(z);
      if (k >= total - 3 * n) out.push_back(z);
    }
  }
  return out;
}

}  // namespace

std::vector<PeriodicPoint> periodic_points(const RationalMap& f, int n, double tol) {
  if (n < 1) throw DegenerateInput("period must be >= 1");
  const double dn = pow_int(f.degree(), n);
  if (dn > kSymbolicDegreeCap) {
    throw PeriodTooLarge("d^n = " + std::to_string(static_cast<long long>(dn)) +
                         " exceeds the feasibility cap 4096");
  }
  const int d = f.degree();
  const int leaf_count = static_cast<int>(dn);

  // chart data for polishing
  Eigen::Matrix2cd inv_chart;
  inv_chart << 0.0, 1.0, 1.0, 0.0;
  RationalMap f_inverted = conjugate(f, inv_chart);
  CPoly den_deriv = f.denominator().derivative();
  double den_scale = std::max(f.denominator().max_coeff_abs(), f.numerator().max_coeff_abs());
  CPoly inv_den_deriv = f_inverted.denominator().derivative();
  double inv_den_scale =
      std::max(f_inverted.denominator().max_coeff_abs(), f_inverted.numerator().max_coeff_abs());

  // affine fixed-point polynomial: used for the infinity multiplicity and as
  // a seed pool; its degree is exact even where its coefficients are not
  int phi_degree = 0;
  std::vector<cdouble> phi_seed_roots;
  if (f.is_polynomial()) {
    phi_degree = leaf_count;  // infinity is a simple member of the divisor
  } else {
    auto [N, D] = compose_iterate(f.numerator(), f.denominator(), n);
    CPoly phi = N - CPoly::identity() * D;
    double scale = phi.max_coeff_abs();
    if (scale == 0.0) throw DegenerateInput("fixed-point polynomial vanished identically");
    phi = phi * cdouble(1.0 / scale);
    phi_degree = phi.degree();
    try {
      phi_seed_roots = expand_roots(roots(phi, 1e-8));
    } catch (const NonConvergence& e) {
      phi_seed_roots = e.best_iterates;  // seeds only; accuracy restored by orbit Newton
    }
  }
  const int infinity_multiplicity = leaf_count + 1 - phi_degree;

  // 1. inverse-orbit tree: d^n leaves, each with its own branch itinerary
  std::vector<std::vector<SpherePoint>> levels(n + 1);
  levels[0] = {tree_seed(f, tol)};
  for (int depth = 0; depth < n; ++depth) {
    levels[depth + 1].reserve(levels[depth].size() * d);
    for (const auto& p : levels[depth]) {
      auto pre = preimages(f, p, tol);
      if (static_cast<int>(pre.size()) != d) {
        throw RootFindingFailed("preimage count mismatch in the inverse-orbit tree");
      }
      for (const auto& q : pre) levels[depth + 1].push_back(q);
    }
  }

  // 2. shadowing refinement of each leaf's orbit tuple
  std::vector<FoundPoint> found;
  found.reserve(leaf_count);
  for (int leaf = 0; leaf < leaf_count; ++leaf) {
    std::vector<SpherePoint> orbit(n);
    int idx = leaf;
    for (int j = 0; j < n; ++j) {
      orbit[j] = levels[n - j][leaf / static_cast<int>(pow_int(d, j))];
      (void)idx;
    }
    double motion = 1.0;
    for (int pass = 0; pass < 60 && motion > 1e-15; ++pass) {
      double m = refine_orbit_tuple(f, orbit, tol);
      if (pass > 6 && m > 0.9 * motion && m < 1e-3) break;  // non-contracting (non-repelling shadow)
      motion = m;
    }
    found.push_back(polish_point(f, &f_inverted, n, den_deriv, den_scale, inv_den_deriv,
                                 inv_den_scale, orbit[0], motion));
  }

  // 3. chordal dedup of machine-identical copies (two itineraries can code
  // the same point); the freed budget belongs to non-repelling cycles
  std::vector<FoundPoint> distinct;
  for (const auto& fp : found) {
    bool dup = false;
    for (auto& q : distinct) {
      if (fp.point.chordal(q.point) < 1e-12) {
        q.stability = std::min(q.stability, fp.stability);
        dup = true;
        break;
      }
    }
    if (!dup) distinct.push_back(fp);
  }

  int infinity_found = 0;
  std::vector<FoundPoint> affine_found;
  for (const auto& fp : distinct) {
    if (fp.point.is_infinity(1e-9)) {
      ++infinity_found;
    } else {
      affine_found.push_back(fp);
    }
  }

  // 4. deficit roots are non-repelling; seed them from the critical-orbit
  // tails and the coefficient-phi pool, Newton-polish, keep new points
  int deficit = phi_degree - static_cast<int>(affine_found.size()) - infinity_found;
  if (deficit > 0) {
    std::vector<SpherePoint> seeds = critical_orbit_tail(f, n);
    for (cdouble z : phi_seed_roots) seeds.push_back(SpherePoint::from_affine(z));
    for (const auto& s : seeds) {
      if (deficit <= 0) break;
      auto fp = polish_point(f, &f_inverted, n, den_deriv, den_scale, inv_den_deriv,
                             inv_den_scale, s, 0.0);
      // accept only genuine fixed points of f^n
      SpherePoint img = fp.point;
      for (int k = 0; k < n; ++k) img = f.eval(img);
      if (img.chordal(fp.point) > 1e-7) continue;
      bool dup = fp.point.is_infinity(1e-9) && infinity_found > 0;
      for (const auto& q : affine_found) {
        if (fp.point.chordal(q.point) < 1e-9) dup = true;
      }
      if (dup) continue;
      if (fp.point.is_infinity(1e-9)) {
        ++infinity_found;
      } else {
        affine_found.push_back(fp);
      }
      --deficit;
    }
  }

  // 5. deflated Aberth as the last resort for anything still missing
  deficit = phi_degree - static_cast<int>(affine_found.size()) - infinity_found;
  if (deficit > 0) {
    auto base_ratio = [&f, n, &den_deriv, den_scale](cdouble z) {
      return iterate_newton_ratio(f, n, den_deriv, den_scale, z);
    };
    std::vector<cdouble> locked;
    for (const auto& q : affine_found) locked.push_back(q.point.affine());
    auto deflated = [&base_ratio, &locked](cdouble z) {
      cdouble N = base_ratio(z);
      cdouble S = 0.0;
      for (cdouble r : locked) {
        cdouble dd = z - r;
        if (dd == cdouble(0.0)) dd = cdouble(1e-300, 0.0);
        S += 1.0 / dd;
      }
      cdouble denom = 1.0 - N * S;
      return (std::abs(denom) > 1e-300) ? N / denom : N;
    };
    std::vector<cdouble> guesses;
    for (int i = 0; i < deficit; ++i) {
      double r = 0.3 + 2.2 * (i % 3);
      guesses.push_back(std::polar(r, 2.0 * M_PI * 0.6180339887498949 * (i + 1)));
    }
    try {
      for (const auto& cl : roots_by_ratio(deflated, guesses, tol)) {
        for (int c = 0; c < cl.multiplicity; ++c) {
          affine_found.push_back({SpherePoint::from_affine(cl.root), 1e-9});
        }
      }
    } catch (const NonConvergence&) {
    }
  }

  if (static_cast<int>(affine_found.size()) + infinity_found != phi_degree) {
    throw RootFindingFailed("periodic point count " +
                            std::to_string(affine_found.size() + infinity_found) +
                            " does not match the fixed-point divisor degree " +
                            std::to_string(phi_degree));
  }

  // 6. multiplicity clustering of the affine points (parabolic collisions)
  auto ratio = [&f, n, &den_deriv, den_scale](cdouble z) {
    return iterate_newton_ratio(f, n, den_deriv, den_scale, z);
  };
  std::vector<cdouble> pts;
  std::vector<double> stab;
  for (const auto& q : affine_found) {
    pts.push_back(q.point.affine());
    stab.push_back(std::max(q.stability, 1e-16));
  }
  std::vector<RootCluster> clusters;
  if (!pts.empty()) clusters = cluster_points(pts, tol, ratio, stab);

  std::vector<PeriodicPoint> out;
  for (const auto& cl : clusters) {
    PeriodicPoint pp;
    pp.point = SpherePoint::from_affine(cl.root);
    pp.multiplicity = cl.multiplicity;
    pp.multiplier = multiplier_at(f, pp.point, n);
    out.push_back(pp);
  }
  if (infinity_found + infinity_multiplicity > 0) {
    PeriodicPoint pp;
    pp.point = SpherePoint::infinity();
    pp.multiplicity = infinity_found + infinity_multiplicity;
    pp.multiplier = multiplier_at(f, pp.point, n);
    out.push_back(pp);
  }
  return out;
}

CycleSpectrum exact_cycles(const RationalMap& f, int n, double tol) {
  auto pts = periodic_points(f, n, tol);

  // points of all proper divisor periods
  std::vector<SpherePoint> lower;
  for (int k : divisors(n)) {
    if (k == n) continue;
    for (const auto& p : periodic_points(f, k, tol)) lower.push_back(p.point);
  }
  auto near_lower = [&lower](const SpherePoint& p) {
    for (const auto& q : lower) {
      if (p.chordal(q) < kPointIdentityTol) return true;
    }
    return false;
  };

  std::vector<PeriodicPoint> exact;
  for (const auto& p : pts) {
    if (near_lower(p.point)) continue;  // lower-period (possibly with parabolic multiplicity)
    if (p.multiplicity > 1) {
      std::vector<cdouble> offend;
      offend.push_back(p.point.is_infinity() ? cdouble(1e300, 0.0) : p.point.affine());
      throw AmbiguousPeriod(
          "exact-period root cluster has multiplicity " + std::to_string(p.multiplicity) +
              " at period " + std::to_string(n) + " (parabolic degeneracy)",
          offend);
    }
    exact.push_back(p);
  }

  // group into cycles by following the orbit and matching nearest points
  const int count = static_cast<int>(exact.size());
  if (count % n != 0) {
    throw AmbiguousPeriod("exact-period point count " + std::to_string(count) +
                              " is not divisible by the period " + std::to_string(n),
                          {});
  }
  std::vector<bool> used(count, false);
  CycleSpectrum spec;
  spec.period = n;
  for (int i = 0; i < count; ++i) {
    if (used[i]) continue;
    std::vector<int> orbit_idx = {i};
    used[i] = true;
    SpherePoint cur = exact[i].point;
    for (int step = 1; step < n; ++step) {
      SpherePoint img = f.eval(cur);
      int bestj = -1;
      double bestd = 2.0;
      for (int j = 0; j < count; ++j) {
        double dist = img.chordal(exact[j].point);
        if (dist < bestd) {
          bestd = dist;
          bestj = j;
        }
      }
      if (bestj < 0 || bestd > 1e-6 || used[bestj]) {
        throw AmbiguousPeriod("cycle grouping failed at period " + std::to_string(n),
                              {img.is_infinity() ? cdouble(1e300, 0.0) : img.affine()});
      }
      used[bestj] = true;
      orbit_idx.push_back(bestj);
      cur = exact[bestj].point;
    }
    SpherePoint back = f.eval(cur);
    if (back.chordal(exact[i].point) > 1e-6) {
      throw AmbiguousPeriod("orbit did not close up at period " + std::to_string(n), {});
    }

    Cycle cyc;
    for (int j : orbit_idx) cyc.points.push_back(exact[j].point);
    cyc.multiplier = cycle_multiplier(f, cyc.points);
    double m = std::abs(cyc.multiplier);
    cyc.type = (m < 1.0 - 1e-9) ? CycleType::attracting
                                : (m > 1.0 + 1e-9 ? CycleType::repelling : CycleType::neutral);
    spec.cycles.push_back(cyc);
  }
  return spec;
}

}  // namespace biflab
