#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include "biflab/polyroot.hpp"

using namespace biflab;

namespace {

// test-only oracle: naive power-sum evaluation
cdouble eval_naive(const CPoly& p, cdouble z) {
  cdouble acc = 0.0;
  cdouble zk = 1.0;
  for (int k = 0; k <= p.degree(); ++k) {
    acc += p.coeff(k) * zk;
    zk *= z;
  }
  return acc;
}

// test-only oracle: companion-matrix eigenvalues
std::vector<cdouble> roots_companion(const CPoly& p) {
  const int n = p.degree();
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 1; i < n; ++i) C(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) C(i, n - 1) = -p.coeff(i) / p.leading();
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C, false);
  std::vector<cdouble> out(n);
  for (int i = 0; i < n; ++i) out[i] = es.eigenvalues()[i];
  return out;
}

double match_multisets(std::vector<cdouble> a, std::vector<cdouble> b) {
  REQUIRE(a.size() == b.size());
  double worst = 0.0;
  for (cdouble x : a) {
    auto it = std::min_element(b.begin(), b.end(), [&](cdouble u, cdouble v) {
      return std::abs(u - x) < std::abs(v - x);
    });
    worst = std::max(worst, std::abs(*it - x));
    b.erase(it);
  }
  return worst;
}

}  // namespace

TEST_CASE("horner agrees with naive power-sum evaluation") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    int deg = 1 + static_cast<int>(rng() % 12);
    Eigen::VectorXcd c(deg + 1);
    for (int k = 0; k <= deg; ++k) c[k] = cdouble(u(rng), u(rng));
    if (c[deg] == cdouble(0.0)) c[deg] = 1.0;
    CPoly p(c);
    for (int pt = 0; pt < 8; ++pt) {
      cdouble z = cdouble(2.0 * u(rng), 2.0 * u(rng));
      cdouble h = p.eval(z);
      cdouble nv = eval_naive(p, z);
      CHECK(std::abs(h - nv) <= 1e-12 * (1.0 + std::abs(nv)));
    }
  }
}

TEST_CASE("factored input w^3 - 2w^2 gives 0 (mult 2) and 2") {
  CPoly p{0.0, 0.0, -2.0, 1.0};
  auto cl = roots(p, 1e-12);
  REQUIRE(cl.size() == 2);
  std::sort(cl.begin(), cl.end(),
            [](const RootCluster& a, const RootCluster& b) { return std::abs(a.root) < std::abs(b.root); });
  CHECK(cl[0].multiplicity == 2);
  CHECK(std::abs(cl[0].root) < 1e-6);
  CHECK(cl[1].multiplicity == 1);
  CHECK(std::abs(cl[1].root - 2.0) < 1e-9);
}

TEST_CASE("cubic c^3+2c^2+c+1 matches the companion-matrix oracle") {
  CPoly p{1.0, 1.0, 2.0, 1.0};
  auto oracle = roots_companion(p);
  auto got = expand_roots(roots(p, 1e-12));
  CHECK(match_multisets(got, oracle) < 1e-9);
  // frozen values refined from the oracle by Newton
  std::sort(got.begin(), got.end(), [](cdouble a, cdouble b) { return a.imag() < b.imag(); });
  CHECK(std::abs(got[1] - cdouble(-1.7548776662466927, 0.0)) < 1e-12);
  CHECK(std::abs(got[0] - std::conj(got[2])) < 1e-12);
  CHECK(std::abs(got[2].real() - (-0.12256116687665362)) < 1e-10);
  CHECK(std::abs(std::abs(got[2].imag()) - 0.7448617666197442) < 1e-10);
}

TEST_CASE("constant polynomial is DegenerateInput") {
  CHECK_THROWS_AS(roots(CPoly{5.0}, 1e-12), DegenerateInput);
  Eigen::VectorXcd bad(2);
  bad << 1.0, std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(roots(CPoly(bad), 1e-12), DegenerateInput);
}

TEST_CASE("multiplicities always sum to the degree") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    int deg = 1 + static_cast<int>(rng() % 10);
    Eigen::VectorXcd c(deg + 1);
    for (int k = 0; k <= deg; ++k) c[k] = cdouble(u(rng), u(rng));
    if (std::abs(c[deg]) < 0.1) c[deg] = 1.0;
    auto cl = roots(CPoly(c), 1e-12);
    int total = 0;
    for (const auto& r : cl) total += r.multiplicity;
    CHECK(total == deg);
  }
}

TEST_CASE("well-separated random roots are recovered to 1e-9") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int deg : {4, 16, 64}) {
    // radius ~1.3 keeps the expanded coefficients well-conditioned; root
    // recovery from coefficients at larger spread is limited by conditioning,
    // not by the iteration
    std::vector<cdouble> target;
    while (static_cast<int>(target.size()) < deg) {
      cdouble cand(1.3 * u(rng), 1.3 * u(rng));
      bool ok = true;
      for (cdouble t : target) {
        if (std::abs(t - cand) < 5e-2) ok = false;
      }
      if (ok) target.push_back(cand);
    }
    auto got = expand_roots(roots(CPoly::from_roots(target), 1e-12));
    CHECK(match_multisets(got, target) < 1e-9);
  }
}

TEST_CASE("degree-4096 recovery on scaled roots of unity") {
  // a product of 4096 random factors overflows double coefficients, so the
  // high-degree check uses w^4096 - c whose roots are exactly known and
  // pairwise separated by ~1.5e-3
  const int deg = 4096;
  cdouble c = std::polar(1.0, 0.7345);
  Eigen::VectorXcd coef = Eigen::VectorXcd::Zero(deg + 1);
  coef[0] = -c;
  coef[deg] = 1.0;
  auto cl = roots(CPoly(coef), 1e-12);
  REQUIRE(static_cast<int>(cl.size()) == deg);
  double worst = 0.0;
  for (const auto& r : cl) {
    CHECK(r.multiplicity == 1);
    // nearest true root
    double angle = std::arg(r.root);
    double base = std::arg(c) / deg;
    double step = 2.0 * M_PI / deg;
    double k = std::round((angle - base) / step);
    cdouble truth = std::polar(1.0, base + k * step);
    worst = std::max(worst, std::abs(truth - r.root));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("conjugation consistency") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    int deg = 3 + static_cast<int>(rng() % 8);
    Eigen::VectorXcd c(deg + 1);
    for (int k = 0; k <= deg; ++k) c[k] = cdouble(u(rng), u(rng));
    if (std::abs(c[deg]) < 0.1) c[deg] = 1.0;
    CPoly p(c);
    auto r1 = expand_roots(roots(p, 1e-12));
    auto r2 = expand_roots(roots(p.conj_coeffs(), 1e-12));
    for (auto& z : r2) z = std::conj(z);
    CHECK(match_multisets(r1, r2) < 1e-9);
  }
}

TEST_CASE("compose_iterate on power and basilica maps") {
  CPoly z2{0.0, 0.0, 1.0};
  CPoly one{1.0};
  auto [n3, d3] = compose_iterate(z2, one, 3);
  REQUIRE(n3.degree() == 8);
  CHECK(std::abs(n3.coeff(8) / n3.max_coeff_abs() - 1.0) < 1e-14);
  for (int k = 0; k < 8; ++k) CHECK(std::abs(n3.coeff(k)) < 1e-14);
  CHECK(d3.degree() == 0);

  CPoly z2m1{-1.0, 0.0, 1.0};
  auto [n2, d2] = compose_iterate(z2m1, one, 2);
  // (z^2-1)^2 - 1 = z^4 - 2 z^2, up to the joint rescale
  REQUIRE(n2.degree() == 4);
  cdouble s = n2.coeff(4);
  CHECK(std::abs(n2.coeff(2) / s - cdouble(-2.0)) < 1e-12);
  CHECK(std::abs(n2.coeff(0) / s) < 1e-12);
  CHECK(std::abs(n2.coeff(1) / s) < 1e-12);
  CHECK(std::abs(n2.coeff(3) / s) < 1e-12);
}

TEST_CASE("compose_iterate overflows past the symbolic cap") {
  CPoly z2m1{-1.0, 0.0, 1.0};
  CPoly one{1.0};
  CHECK_THROWS_AS(compose_iterate(z2m1, one, 20), Overflow);
}

TEST_CASE("roots_by_ratio finds the same cubic roots from orbit-style callbacks") {
  CPoly p{1.0, 1.0, 2.0, 1.0};
  NewtonRatioFn ratio = [&p](cdouble z) {
    auto [v, dv] = p.eval_with_derivative(z);
    return v / dv;
  };
  std::vector<cdouble> guesses = {cdouble(2.0, 0.3), cdouble(-0.4, 1.9), cdouble(-1.1, -1.4)};
  auto got = expand_roots(roots_by_ratio(ratio, guesses, 1e-12));
  CHECK(match_multisets(got, roots_companion(p)) < 1e-9);
}

TEST_CASE("resultant of coprime vs sharing-root pairs") {
  CPoly p{-1.0, 1.0};         // z - 1
  CPoly q{-2.0, 1.0};         // z - 2
  CHECK(std::abs(resultant(p, q) - cdouble(-1.0)) < 1e-12);  // lc(p)*q(1)
  CPoly r{1.0, -2.0, 1.0};    // (z-1)^2
  CHECK(std::abs(resultant(p, r)) < 1e-12);
}
