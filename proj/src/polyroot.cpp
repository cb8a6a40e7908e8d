#include "biflab/polyroot.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

namespace biflab {

namespace {

constexpr int kSymbolicDegreeCap = 4096;

bool finite_c(cdouble z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

Eigen::VectorXcd trim_exact_zeros(Eigen::VectorXcd c) {
  int deg = static_cast<int>(c.size()) - 1;
  while (deg > 0 && c[deg] == cdouble(0.0)) --deg;
  return c.head(deg + 1).eval();
}

}  // namespace

CPoly::CPoly(Eigen::VectorXcd coeffs) : coeffs_(trim_exact_zeros(std::move(coeffs))) {
  if (coeffs_.size() == 0) coeffs_ = Eigen::VectorXcd::Zero(1);
}

CPoly::CPoly(std::initializer_list<cdouble> coeffs) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(coeffs.size() ? coeffs.size() : 1));
  v.setZero();
  Eigen::Index i = 0;
  for (cdouble c : coeffs) v[i++] = c;
  coeffs_ = trim_exact_zeros(std::move(v));
}

CPoly CPoly::from_roots(const std::vector<cdouble>& rts) {
  std::vector<CPoly> factors;
  factors.reserve(rts.size());
  for (cdouble r : rts) factors.push_back(CPoly{-r, cdouble(1.0)});
  if (factors.empty()) return CPoly{cdouble(1.0)};
  // balanced product tree keeps intermediate growth even
  while (factors.size() > 1) {
    std::vector<CPoly> next;
    next.reserve(factors.size() / 2 + 1);
    for (std::size_t i = 0; i + 1 < factors.size(); i += 2) next.push_back(factors[i] * factors[i + 1]);
    if (factors.size() % 2) next.push_back(factors.back());
    factors.swap(next);
  }
  return factors[0];
}

double CPoly::max_coeff_abs() const {
  double m = 0.0;
  for (Eigen::Index i = 0; i < coeffs_.size(); ++i) m = std::max(m, std::abs(coeffs_[i]));
  return m;
}

bool CPoly::finite() const {
  for (Eigen::Index i = 0; i < coeffs_.size(); ++i) {
    if (!finite_c(coeffs_[i])) return false;
  }
  return true;
}

cdouble CPoly::eval(cdouble z) const {
  cdouble acc = coeffs_[degree()];
  for (int k = degree() - 1; k >= 0; --k) acc = acc * z + coeffs_[k];
  return acc;
}

std::pair<cdouble, cdouble> CPoly::eval_with_derivative(cdouble z) const {
  cdouble p = coeffs_[degree()];
  cdouble dp = 0.0;
  for (int k = degree() - 1; k >= 0; --k) {
    dp = dp * z + p;
    p = p * z + coeffs_[k];
  }
  return {p, dp};
}

CPoly CPoly::derivative() const {
  if (degree() == 0) return CPoly{cdouble(0.0)};
  Eigen::VectorXcd d(degree());
  for (int k = 1; k <= degree(); ++k) d[k - 1] = coeffs_[k] * static_cast<double>(k);
  return CPoly(std::move(d));
}

CPoly CPoly::conj_coeffs() const {
  return CPoly(coeffs_.conjugate().eval());
}

CPoly CPoly::operator+(const CPoly& o) const {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(std::max(coeffs_.size(), o.coeffs_.size()));
  out.head(coeffs_.size()) = coeffs_;
  out.head(o.coeffs_.size()) += o.coeffs_;
  return CPoly(std::move(out));
}

CPoly CPoly::operator-(const CPoly& o) const { return *this + o * cdouble(-1.0); }

CPoly CPoly::operator*(const CPoly& o) const {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(coeffs_.size() + o.coeffs_.size() - 1);
  for (Eigen::Index i = 0; i < coeffs_.size(); ++i) {
    if (coeffs_[i] == cdouble(0.0)) continue;
    for (Eigen::Index j = 0; j < o.coeffs_.size(); ++j) out[i + j] += coeffs_[i] * o.coeffs_[j];
  }
  return CPoly(std::move(out));
}

CPoly CPoly::operator*(cdouble s) const { return CPoly((coeffs_ * s).eval()); }

namespace {

// Initial guesses from the Newton polygon (upper convex hull of
// (k, log|a_k|)), Bini's scheme: each hull edge spanning m degrees yields m
// guesses on a circle whose radius estimates the moduli of m roots. Starting
// near the right annuli is what keeps the sweep count flat in the degree.
std::vector<cdouble> newton_polygon_guesses(const CPoly& p) {
  const int n = p.degree();
  std::vector<int> ks;
  std::vector<double> logs;
  for (int k = 0; k <= n; ++k) {
    double a = std::abs(p.coeff(k));
    if (a > 0.0) {
      ks.push_back(k);
      logs.push_back(std::log(a));
    }
  }
  // upper convex hull over (k, log|a_k|)
  std::vector<int> hull;  // indices into ks
  for (std::size_t i = 0; i < ks.size(); ++i) {
    while (hull.size() >= 2) {
      std::size_t a = hull[hull.size() - 2], b = hull[hull.size() - 1];
      double cross = (ks[b] - ks[a]) * (logs[i] - logs[a]) -
                     (ks[i] - ks[a]) * (logs[b] - logs[a]);
      if (cross >= 0.0) hull.pop_back();
      else break;
    }
    hull.push_back(static_cast<int>(i));
  }

  std::vector<cdouble> g;
  g.reserve(n);
  const double golden = 0.6180339887498949;
  int edge = 0;
  for (std::size_t h = 0; h + 1 < hull.size(); ++h, ++edge) {
    int k1 = ks[hull[h]], k2 = ks[hull[h + 1]];
    double r = std::exp((logs[hull[h]] - logs[hull[h + 1]]) / (k2 - k1));
    int m = k2 - k1;
    for (int j = 0; j < m; ++j) {
      double a = 2.0 * M_PI * (static_cast<double>(j) / m + golden * edge) + 0.31;
      g.push_back(std::polar(r, a));
    }
  }
  // zero low-order coefficients mean roots at the origin; aberth needs
  // distinct guesses, so spread them on a tiny circle (callers peel exact
  // zeros beforehand, this is a safety net)
  while (static_cast<int>(g.size()) < n) {
    double a = 2.0 * M_PI * golden * static_cast<double>(g.size());
    g.push_back(std::polar(1e-6, a));
  }
  return g;
}

struct AberthState {
  std::vector<cdouble> z;
  std::vector<double> last_step;  // |Newton-Aberth correction| on last update
  std::vector<int> stagnant;      // sweeps without meaningful step decrease
  std::vector<bool> locked;
};

// Local multiplicity estimate: a cluster of m roots near c pulls the Newton
// correction at c + h to h/m, so m ~ h / |N(c+h)|. Median over three probe
// directions, taken at a scale well above the rounding fuzz.
double probe_multiplicity(const NewtonRatioFn& ratio, cdouble c, double h) {
  std::vector<double> est;
  for (int k = 0; k < 3; ++k) {
    cdouble probe = c + std::polar(h, 2.0 * M_PI * (k + 0.13) / 3.0);
    cdouble N = ratio(probe);
    if (!finite_c(N) || std::abs(N) == 0.0) continue;
    est.push_back(h / std::abs(N));
  }
  if (est.empty()) return 1.0;
  std::sort(est.begin(), est.end());
  return est[est.size() / 2];
}

// Agglomerative clustering with the tol^(1/multiplicity) radius. The probe
// sets the radius for the candidate multiplicity; the decisive test is
// iterate stability: members of a genuine multiple root keep rattling at the
// rounding fuzz of the cluster (recent corrections comparable to the pair
// separation), while simple roots a few 1e-10 apart sit still at ~1e-15.
std::vector<RootCluster> cluster_roots(const std::vector<cdouble>& z, double tol,
                                       const NewtonRatioFn& ratio,
                                       const std::vector<double>& recent_step) {
  const int n = static_cast<int>(z.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int i) { return parent[i] == i ? i : parent[i] = find(parent[i]); };

  bool merged = true;
  std::vector<int> size(n, 1);
  std::vector<cdouble> centroid(z);
  std::vector<double> wobble(recent_step);
  while (merged) {
    merged = false;
    for (int i = 0; i < n && !merged; ++i) {
      for (int j = i + 1; j < n && !merged; ++j) {
        int ri = find(i), rj = find(j);
        if (ri == rj) continue;
        int k = size[ri] + size[rj];
        double dist = std::abs(centroid[ri] - centroid[rj]);
        if (dist > std::pow(tol, 1.0 / (k + 2))) continue;  // quick reject
        double floor = 1e3 * 2.22e-16 * (1.0 + std::abs(centroid[ri]));
        bool accept = false;
        cdouble c = (centroid[ri] * static_cast<double>(size[ri]) +
                     centroid[rj] * static_cast<double>(size[rj])) /
                    static_cast<double>(k);
        if (dist < floor) {
          accept = true;  // indistinguishable at machine resolution
        } else {
          // the pair is unresolved if its members kept moving at the pair
          // scale, or if the evaluation is numerically flat between them
          // (double roots sit in a band where p rounds to exactly zero)
          bool unresolved = std::max(wobble[ri], wobble[rj]) >= 0.05 * dist;
          if (!unresolved) {
            cdouble axis = (centroid[rj] - centroid[ri]) / dist;
            bool flat = true;
            for (double s : {-0.5, -0.25, 0.25, 0.5}) {
              cdouble N = ratio(c + axis * (s * dist));
              if (finite_c(N) && std::abs(N) > 1e-3 * dist) flat = false;
            }
            unresolved = flat;
          }
          if (unresolved) {
            double h = std::max(1e-6 * (1.0 + std::abs(c)), 20.0 * dist);
            double m_est = probe_multiplicity(ratio, c, h);
            int m = std::min(8, std::max(k, static_cast<int>(std::lround(m_est))));
            accept = (m_est >= k - 0.49) && (dist <= std::pow(tol, 1.0 / m));
          }
        }
        if (!accept) continue;
        parent[rj] = ri;
        size[ri] = k;
        centroid[ri] = c;
        wobble[ri] = std::max(wobble[ri], wobble[rj]);
        merged = true;
      }
    }
  }

  std::vector<RootCluster> out;
  for (int i = 0; i < n; ++i) {
    if (find(i) == i) out.push_back({centroid[i], size[i]});
  }
  std::sort(out.begin(), out.end(), [](const RootCluster& a, const RootCluster& b) {
    if (a.root.real() != b.root.real()) return a.root.real() < b.root.real();
    return a.root.imag() < b.root.imag();
  });
  return out;
}

std::vector<RootCluster> aberth_core(const NewtonRatioFn& ratio, std::vector<cdouble> guesses,
                                     double tol, int max_sweeps, double stop_step) {
  const int n = static_cast<int>(guesses.size());
  AberthState st;
  st.z = std::move(guesses);
  st.last_step.assign(n, 1e300);
  st.stagnant.assign(n, 0);
  st.locked.assign(n, false);

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    int active = 0;
    for (int i = 0; i < n; ++i) {
      if (st.locked[i]) continue;
      cdouble N = ratio(st.z[i]);
      if (!finite_c(N)) {
        // landed on a pole of p'/p structure; nudge and retry next sweep
        st.z[i] += cdouble(1e-6, 2e-6) * (1.0 + std::abs(st.z[i]));
        ++active;
        continue;
      }
      cdouble S = 0.0;
      const cdouble zi = st.z[i];
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        cdouble d = zi - st.z[j];
        if (d == cdouble(0.0)) d = cdouble(1e-300, 0.0);
        S += 1.0 / d;
      }
      cdouble denom = 1.0 - N * S;
      cdouble w = (std::abs(denom) > 1e-300) ? N / denom : N;
      st.z[i] -= w;
      const double step = std::abs(w);
      const double local = 1.0 + std::abs(st.z[i]);
      // a root is done when the correction reaches rounding level, or when
      // it rattles at a small amplitude set by the conditioning
      if (step < 1e-8 * local && step >= 0.5 * st.last_step[i]) {
        ++st.stagnant[i];
      } else {
        st.stagnant[i] = 0;
      }
      st.last_step[i] = step;
      if (step <= stop_step * local || st.stagnant[i] >= 6) {
        st.locked[i] = true;
      } else {
        ++active;
      }
    }
    if (active == 0) break;
    if (sweep == max_sweeps - 1) {
      // points rattling next to a root (tight pairs, parabolic clusters) are
      // fine, the polish phase below sorts them out; only genuinely lost
      // iterates are a failure
      int lost = 0;
      for (int i = 0; i < n; ++i) {
        if (st.locked[i]) continue;
        cdouble N = ratio(st.z[i]);
        if (!finite_c(N) || std::abs(N) > 1e-5 * (1.0 + std::abs(st.z[i]))) ++lost;
      }
      if (lost > 0) {
        throw NonConvergence("aberth sweep cap hit with " + std::to_string(lost) +
                                 " unconverged roots",
                             st.z);
      }
      break;
    }
  }

  // Polish. Isolated roots take plain Newton steps. Roots with a close
  // neighbor keep the Aberth repulsion term: a repulsion-free polish would
  // let two iterates slide onto the same member of a tight pair and report a
  // fake multiple root. The motion over the last rounds is recorded per root
  // as its resolution estimate for clustering.
  std::vector<double> nn(n, 1e300);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double d = std::abs(st.z[i] - st.z[j]);
      nn[i] = std::min(nn[i], d);
      nn[j] = std::min(nn[j], d);
    }
  }
  std::vector<double> recent(n, 0.0);
  auto contested = [&](int i) { return n > 1 && nn[i] < 1e-5 * (1.0 + std::abs(st.z[i])); };
  for (int i = 0; i < n; ++i) {
    if (contested(i)) continue;
    cdouble z = st.z[i];
    double step = 0.0;
    for (int it = 0; it < 8; ++it) {
      cdouble N = ratio(z);
      if (!finite_c(N)) break;
      step = std::abs(N);
      z -= N;
      if (step < 1e-17 * (1.0 + std::abs(z))) break;
    }
    st.z[i] = z;
    recent[i] = step;
  }
  // Two iterates that collapsed onto the same root are a stationary state of
  // the iteration (zero Newton ratio, so the repulsion never engages) and one
  // neighboring root goes unclaimed. Restart each collapsed group from a
  // fresh symmetric circle around its centroid; the repulsion rounds then
  // assign one iterate per root.
  {
    std::vector<int> group(n, -1);
    int ngroups = 0;
    for (int i = 0; i < n; ++i) {
      if (!contested(i)) continue;
      for (int j = i + 1; j < n; ++j) {
        if (!contested(j)) continue;
        if (std::abs(st.z[i] - st.z[j]) >= 1e3 * 2.22e-16 * (1.0 + std::abs(st.z[i]))) continue;
        if (group[i] < 0 && group[j] < 0) {
          group[i] = group[j] = ngroups++;
        } else if (group[i] < 0) {
          group[i] = group[j];
        } else {
          group[j] = group[i];
        }
      }
    }
    for (int g = 0; g < ngroups; ++g) {
      std::vector<int> members;
      cdouble c = 0.0;
      for (int i = 0; i < n; ++i) {
        if (group[i] == g) {
          members.push_back(i);
          c += st.z[i];
        }
      }
      if (members.size() < 2) continue;
      c /= static_cast<double>(members.size());
      double r0 = 1e-7 * (1.0 + std::abs(c));
      for (std::size_t k = 0; k < members.size(); ++k) {
        st.z[members[k]] =
            c + std::polar(r0, 2.0 * M_PI * (static_cast<double>(k) / members.size() + 0.177));
      }
    }
  }
  const int polish_rounds = 60;
  for (int round = 0; round < polish_rounds; ++round) {
    bool any = false;
    for (int i = 0; i < n; ++i) {
      if (!contested(i)) continue;
      cdouble N = ratio(st.z[i]);
      if (!finite_c(N)) continue;
      cdouble S = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        cdouble d = st.z[i] - st.z[j];
        if (d == cdouble(0.0)) d = cdouble(1e-300, 0.0);
        S += 1.0 / d;
      }
      cdouble denom = 1.0 - N * S;
      cdouble w = (std::abs(denom) > 1e-300) ? N / denom : N;
      st.z[i] -= w;
      if (round >= polish_rounds - 3) recent[i] = std::max(recent[i], std::abs(w));
      if (std::abs(w) > 1e-16 * (1.0 + std::abs(st.z[i]))) any = true;
    }
    if (!any && round < polish_rounds - 3) continue;  // keep sampling the last rounds
    if (!any && round >= polish_rounds - 3) break;
  }

  return cluster_roots(st.z, tol, ratio, recent);
}

}  // namespace

std::vector<RootCluster> cluster_points(const std::vector<cdouble>& points, double tol,
                                        const NewtonRatioFn& ratio,
                                        const std::vector<double>& stability) {
  return cluster_roots(points, tol, ratio, stability);
}

std::vector<RootCluster> roots_by_ratio(const NewtonRatioFn& ratio, std::vector<cdouble> guesses,
                                        double tol, int max_sweeps) {
  if (guesses.empty()) return {};
  return aberth_core(ratio, std::move(guesses), tol, max_sweeps, 1e-14);
}

std::vector<RootCluster> roots(const CPoly& p, double tol) {
  if (!p.finite()) throw DegenerateInput("non-finite polynomial coefficient");
  if (p.degree() < 1) throw DegenerateInput("root finding needs degree >= 1");
  if (!(tol > 0.0)) throw DegenerateInput("tolerance must be positive");

  const double scale = p.max_coeff_abs();
  if (scale == 0.0) throw DegenerateInput("zero polynomial");

  // strip exact zero roots at origin first; they are common (w^2(w-2)) and
  // cheap to peel off
  int zero_mult = 0;
  Eigen::VectorXcd c = p.coeffs();
  while (zero_mult < p.degree() && c[zero_mult] == cdouble(0.0)) ++zero_mult;
  CPoly q = (zero_mult > 0) ? CPoly(c.tail(c.size() - zero_mult).eval()) : p;

  std::vector<RootCluster> out;
  if (q.degree() >= 1) {
    NewtonRatioFn ratio = [&q](cdouble z) {
      auto [v, dv] = q.eval_with_derivative(z);
      if (v == cdouble(0.0)) return cdouble(0.0);
      if (dv == cdouble(0.0)) return cdouble(1e-3, 1e-3);  // saddle; kick
      return v / dv;
    };
    auto guesses = newton_polygon_guesses(q);
    auto clusters = aberth_core(ratio, std::move(guesses), tol, 400, 1e-14);

    // residual acceptance against the local evaluation magnitude
    // sum_k |a_k| |r|^k; the floor covers Horner noise near the degree cap
    const double rel = std::max(tol, 64.0 * q.degree() * 2.22e-16);
    for (const auto& cl : clusters) {
      double resid = std::abs(q.eval(cl.root));
      double mag = 0.0;
      double rk = 1.0;
      const double ra = std::abs(cl.root);
      for (int k = 0; k <= q.degree(); ++k) {
        mag += std::abs(q.coeff(k)) * rk;
        rk *= ra;
      }
      if (resid > rel * std::max(mag, scale)) {
        throw NonConvergence("root residual above tolerance target", {cl.root});
      }
    }
    out = std::move(clusters);
  }
  if (zero_mult > 0) {
    // merge with a possible near-zero cluster
    bool merged = false;
    for (auto& cl : out) {
      if (std::abs(cl.root) < std::pow(tol, 1.0 / (cl.multiplicity + zero_mult))) {
        cl.root = cl.root * (static_cast<double>(cl.multiplicity) /
                             (cl.multiplicity + zero_mult));
        cl.multiplicity += zero_mult;
        merged = true;
        break;
      }
    }
    if (!merged) out.push_back({cdouble(0.0), zero_mult});
  }
  std::sort(out.begin(), out.end(), [](const RootCluster& a, const RootCluster& b) {
    if (a.root.real() != b.root.real()) return a.root.real() < b.root.real();
    return a.root.imag() < b.root.imag();
  });
  return out;
}

std::vector<cdouble> expand_roots(const std::vector<RootCluster>& clusters) {
  std::vector<cdouble> out;
  for (const auto& c : clusters) {
    for (int i = 0; i < c.multiplicity; ++i) out.push_back(c.root);
  }
  return out;
}

std::pair<CPoly, CPoly> compose_iterate(const CPoly& p_num, const CPoly& p_den, int n) {
  if (p_den.is_zero()) throw DegenerateInput("denominator identically zero");
  if (n < 1) throw DegenerateInput("iterate order must be >= 1");
  const int d = std::max(p_num.degree(), p_den.degree());
  if (d < 1) throw DegenerateInput("map must be non-constant");

  double degn = std::pow(static_cast<double>(d), static_cast<double>(n));
  if (degn > kSymbolicDegreeCap) {
    throw Overflow("iterate degree d^n = " + std::to_string(static_cast<long long>(degn)) +
                   " exceeds symbolic cap 4096");
  }

  // (A, B) <- (sum_i num_i A^i B^(d-i), sum_i den_i A^i B^(d-i)); joint
  // max-coefficient rescaling each level keeps the pair representable.
  CPoly A = CPoly::identity();
  CPoly B = CPoly{cdouble(1.0)};
  for (int step = 0; step < n; ++step) {
    std::vector<CPoly> apow(d + 1), bpow(d + 1);
    apow[0] = CPoly{cdouble(1.0)};
    bpow[0] = CPoly{cdouble(1.0)};
    for (int i = 1; i <= d; ++i) {
      apow[i] = apow[i - 1] * A;
      bpow[i] = bpow[i - 1] * B;
    }
    CPoly num_out;
    CPoly den_out;
    for (int i = 0; i <= d; ++i) {
      CPoly term = apow[i] * bpow[d - i];
      if (i <= p_num.degree() && p_num.coeff(i) != cdouble(0.0))
        num_out = num_out + term * p_num.coeff(i);
      if (i <= p_den.degree() && p_den.coeff(i) != cdouble(0.0))
        den_out = den_out + term * p_den.coeff(i);
    }
    if (!num_out.finite() || !den_out.finite()) {
      throw Overflow("iterate coefficients left the representable range at step " +
                     std::to_string(step + 1));
    }
    double s = std::max(num_out.max_coeff_abs(), den_out.max_coeff_abs());
    if (s == 0.0) throw DegenerateInput("iterate collapsed to zero");
    A = num_out * cdouble(1.0 / s);
    B = den_out * cdouble(1.0 / s);
  }
  return {A, B};
}

cdouble resultant(const CPoly& p, const CPoly& q) {
  const int n = p.degree();
  const int m = q.degree();
  if (n == 0 && m == 0) return cdouble(1.0);
  if (n == 0) return std::pow(p.coeff(0), m);
  if (m == 0) return std::pow(q.coeff(0), n);
  Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(n + m, n + m);
  for (int r = 0; r < m; ++r) {
    for (int k = 0; k <= n; ++k) S(r, r + k) = p.coeff(n - k);
  }
  for (int r = 0; r < n; ++r) {
    for (int k = 0; k <= m; ++k) S(m + r, r + k) = q.coeff(m - k);
  }
  return S.determinant();
}

}  // namespace biflab
