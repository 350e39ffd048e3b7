#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "phifem/nfunction.hpp"

using namespace phifem;

namespace {

std::vector<double> log_probes(double lo, double hi, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i)
    out[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  return out;
}

// Independent conjugate oracle: dense grid sup of ts - Phi(s) followed by a
// local refinement, using a caller-supplied closed-form Phi.
double conjugate_grid_oracle(const std::function<double(double)>& Phi, double t, double s_max,
                             int n = 1'000'000) {
  double best = 0.0, s_best = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double s = s_max * i / n;
    const double v = t * s - Phi(s);
    if (v > best) {
      best = v;
      s_best = s;
    }
  }
  const double h = s_max / n;
  for (double s = std::max(0.0, s_best - h); s <= s_best + h; s += h / 200) {
    best = std::max(best, t * s - Phi(s));
  }
  return best;
}

}  // namespace

TEST_SUITE("nfunction") {

TEST_CASE("catalog closed forms") {
  const auto p3 = nfunction_from_key("p-laplace(3)", 4);
  CHECK(p3->Phi(2.0) == doctest::Approx(8.0 / 3.0).epsilon(1e-12));
  const auto p2 = nfunction_from_key("p-laplace(2)", 3);
  CHECK(p2->Phi(1.0) == doctest::Approx(0.5).epsilon(1e-12));
  const auto pq = nfunction_from_key("pq-laplace(2,4)", 5);
  CHECK(pq->Phi(1.0) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("Phi is an even convex N-function") {
  const auto pq = nfunction_from_key("pq-laplace(2,4)", 5);
  CHECK(pq->Phi(0.0) == 0.0);
  for (double t : log_probes(1e-4, 1e4, 40)) {
    CHECK(pq->Phi(-t) == pq->Phi(t));
    // strict monotonicity and midpoint convexity on probes
    CHECK(pq->Phi(1.01 * t) > pq->Phi(t));
    CHECK(0.5 * (pq->Phi(0.5 * t) + pq->Phi(1.5 * t)) >= pq->Phi(t) * (1.0 - 1e-12));
  }
}

TEST_CASE("non-monotone weight is rejected at construction") {
  NFunctionSpec bad;
  bad.phi = [](double t) { return 1.0 / (t * t); };  // t*phi = 1/t decreasing
  bad.ell = 2.0;
  bad.em = 2.0;
  bad.dimN = 3;
  CHECK_THROWS_WITH_AS(NFunction(bad), doctest::Contains("monoton"), HypothesisViolation);
}

TEST_CASE("conjugate closed forms and grid oracle") {
  const auto p3 = nfunction_from_key("p-laplace(3)", 4);
  // Legendre transform of t^3/3 is (2/3) t^{3/2}.
  CHECK(p3->conjugate(4.0) == doctest::Approx(16.0 / 3.0).epsilon(1e-10));
  CHECK(p3->conjugate(0.0) == 0.0);

  const auto pq = nfunction_from_key("pq-laplace(2,4)", 5);
  const auto Phi_closed = [](double s) { return s * s / 2 + s * s * s * s / 4; };
  const double oracle = conjugate_grid_oracle(Phi_closed, 1.5, 10.0);
  CHECK(pq->conjugate(1.5) == doctest::Approx(oracle).epsilon(1e-8));
  CHECK(pq->conjugate(1.5) == doctest::Approx(0.78345037471).epsilon(1e-9));
}

TEST_CASE("conjugate of an unbounded-slope weight hits the overflow guard") {
  // phi = t^{-1/2} keeps t*phi = sqrt(t) increasing but bounded growth of
  // Phi ~ t^{3/2}: conjugate itself is fine; instead check the guard using
  // a weight whose t*phi saturates is impossible under (phi2), so probe the
  // error path with an absurdly large argument.
  const auto p2 = nfunction_from_key("p-laplace(2)", 3);
  CHECK_THROWS_AS((void)p2->conjugate_argmax(1e300), std::range_error);
}

TEST_CASE("young equality and double conjugate") {
  for (const char* key : {"p-laplace(2)", "p-laplace(3)", "pq-laplace(2,4)"}) {
    const auto nf = nfunction_from_key(key, 6);
    for (double t : log_probes(1e-3, 1e3, 25)) {
      const double s = nf->conjugate_argmax(t);
      const double lhs = t * s;
      const double rhs = nf->Phi(s) + nf->conjugate(t);
      CHECK(std::abs(lhs - rhs) <= 1e-8 * std::max(1e-300, std::abs(lhs)));
    }
    // Numerically conjugating the conjugate recovers Phi.
    const auto conj_map = [&nf](double s) { return nf->conjugate(s); };
    for (double t : log_probes(1e-2, 1e2, 7)) {
      const double back = conjugate_grid_oracle(conj_map, t, 20.0 * (1.0 + nf->Phi(t)), 200000);
      CHECK(back == doctest::Approx(nf->Phi(t)).epsilon(1e-6));
    }
  }
}

TEST_CASE("young inequality on random pairs") {
  const auto pq = nfunction_from_key("pq-laplace(2,4)", 5);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-3.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    const double s = std::pow(10.0, U(rng)), t = std::pow(10.0, U(rng));
    const double lhs = t * s, rhs = pq->Phi(s) + pq->conjugate(t);
    CHECK(lhs <= rhs * (1.0 + 1e-10) + 1e-10);
  }
}

TEST_CASE("sobolev conjugate: exponent, limit at zero, monotonicity") {
  const auto p2 = nfunction_from_key("p-laplace(2)", 3);
  // Phi = t^2/2, N = 3: Phi_* ~ t^{ell*} with ell* = 6; fit the log-log slope.
  const double t1 = 1.0, t2 = 100.0;
  const double slope =
      std::log(p2->sobolev_conjugate(t2) / p2->sobolev_conjugate(t1)) / std::log(t2 / t1);
  CHECK(slope == doctest::Approx(6.0).epsilon(0.01 / 6.0));
  CHECK(p2->ell_star() == doctest::Approx(6.0));

  CHECK(p2->sobolev_conjugate_inverse(1e-12) < 1e-3);
  double prev = 0.0;
  for (double t : log_probes(1e-6, 1e3, 20)) {
    const double v = p2->sobolev_conjugate_inverse(t);
    CHECK(v > prev);
    // doubling check for the inverse of a convex increasing map
    CHECK(p2->sobolev_conjugate_inverse(2.0 * t) < 2.0 * v);
    prev = v;
  }
}

TEST_CASE("hypothesis report on the probe grid") {
  SUBCASE("pure power weight passes with constant index ratio") {
    const auto nf = nfunction_from_key("p-laplace(2.5)", 4);
    const auto hc = nf->check_hypotheses();
    CHECK(hc.all_pass());
    CHECK(hc.index_band.worst_value == doctest::Approx(1.5).epsilon(1e-6));
    CHECK(hc.ratio_band.worst_value == doctest::Approx(2.5).epsilon(1e-6));
  }
  SUBCASE("exponential weight fails the index band") {
    NFunctionSpec s;
    s.phi = [](double t) { return std::exp(t); };
    s.ell = 2.0;
    s.em = 2.5;
    s.dimN = 3;
    s.name = "exp";
    const NFunction nf(s);
    const auto hc = nf.check_hypotheses();
    CHECK_FALSE(hc.index_band.pass);
    CHECK(hc.monotone.pass);
  }
  SUBCASE("two-power weight: measured index range inside [1, 3]") {
    const auto nf = nfunction_from_key("pq-laplace(2,4)", 5);
    CHECK(nf->check_hypotheses().all_pass());
    // probe-grid min/max oracle for (t phi)'/phi
    double lo = 1e300, hi = -1e300;
    for (double t : log_probes(1e-6, 1e6, 200)) {
      const double h = t * 1e-6;
      const double r =
          ((t + h) * nf->phi(t + h) - (t - h) * nf->phi(t - h)) / (2 * h * nf->phi(t));
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    CHECK(lo >= 1.0 - 1e-9);
    CHECK(hi <= 3.0 + 1e-9);
  }
  SUBCASE("weighted catalog entry passes its own measured band") {
    const auto nf = nfunction_from_key("weighted(3,1)", 5);
    CHECK(nf->check_hypotheses().all_pass());
    CHECK(nf->ell() == doctest::Approx(3.0));
    CHECK(nf->em() < 5.0);
  }
}

TEST_CASE("luxemburg norm") {
  const auto p2 = nfunction_from_key("p-laplace(2)", 3);
  const auto p3 = nfunction_from_key("p-laplace(3)", 4);
  const auto Phi2 = [&](double t) { return p2->Phi(t); };
  const auto Phi3 = [&](double t) { return p3->Phi(t); };

  SUBCASE("zero field") {
    std::vector<double> v{0.0, 0.0}, w{0.5, 0.5};
    CHECK(luxemburg_norm(v, w, Phi2) == 0.0);
  }
  SUBCASE("unit constant, quadratic Phi without the 1/2 factor") {
    // Phi(t) = t^2: modular (1/lam)^2 = 1 at lam = 1.
    std::vector<double> v{1.0}, w{1.0};
    CHECK(luxemburg_norm(v, w, [](double t) { return t * t; }) ==
          doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("unit constant, cubic Phi") {
    // (1/lam)^3 / 3 = 1  =>  lam = 3^{-1/3}.
    std::vector<double> v{1.0}, w{1.0};
    CHECK(luxemburg_norm(v, w, Phi3) == doctest::Approx(0.6933612743506347).epsilon(1e-9));
  }
  SUBCASE("homogeneity and unit modular at the norm") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    std::vector<double> v(50), w(50, 0.02);
    for (auto& x : v) x = U(rng);
    const double n1 = luxemburg_norm(v, w, Phi2);
    double modular = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) modular += w[i] * Phi2(std::abs(v[i]) / n1);
    CHECK(modular == doctest::Approx(1.0).epsilon(1e-8));
    std::vector<double> v3 = v;
    for (auto& x : v3) x *= -3.7;
    CHECK(luxemburg_norm(v3, w, Phi2) == doctest::Approx(3.7 * n1).epsilon(1e-8));
  }
  SUBCASE("negative weights are rejected") {
    std::vector<double> v{1.0}, w{-1.0};
    CHECK_THROWS_AS((void)luxemburg_norm(v, w, Phi2), std::invalid_argument);
  }
}

TEST_CASE("zeta sandwiches") {
  SUBCASE("pure power: sandwich collapses to equality") {
    const auto p3 = nfunction_from_key("p-laplace(3)", 4);
    const ZetaBounds z = p3->zeta_bounds();
    for (double t : {0.2, 1.0, 5.0}) {
      for (double rho : {0.5, 2.0}) {
        CHECK(p3->Phi(rho * t) ==
              doctest::Approx(z.zeta0(t) * p3->Phi(rho)).epsilon(1e-10));
      }
    }
  }
  SUBCASE("random pairs for the two-power weight") {
    const auto pq = nfunction_from_key("pq-laplace(2,4)", 5);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> U(-3.0, 3.0);
    std::vector<std::pair<double, double>> samples;
    for (int i = 0; i < 1000; ++i)
      samples.emplace_back(std::pow(10.0, U(rng)), std::pow(10.0, U(rng)));
    const auto rep = zeta_sandwich_check(*pq, samples, 1e-8);
    CHECK(rep.n_samples == 1000);
    CHECK(rep.violations.empty());
  }
  SUBCASE("t = 1 collapses both envelopes") {
    const auto pq = nfunction_from_key("pq-laplace(2,4)", 5);
    const ZetaBounds z = pq->zeta_bounds();
    CHECK(z.zeta0(1.0) == 1.0);
    CHECK(z.zeta1(1.0) == 1.0);
    std::vector<std::pair<double, double>> s{{0.37, 1.0}, {4.2, 1.0}};
    CHECK(zeta_sandwich_check(*pq, s, 1e-10).violations.empty());
  }
}

TEST_CASE("tabulated weight reproduces its generator") {
  std::vector<double> ts, ph;
  for (double t : log_probes(1e-8, 1e8, 200)) {
    ts.push_back(t);
    ph.push_back(std::pow(t, 0.7));  // p = 2.7 power weight
  }
  const auto nf = nfunction_from_table(ts, ph, 4);
  CHECK(nf->ell() == doctest::Approx(2.7).epsilon(1e-3));
  CHECK(nf->em() == doctest::Approx(2.7).epsilon(1e-3));
  for (double t : {0.01, 0.5, 3.0, 100.0})
    CHECK(nf->Phi(t) == doctest::Approx(std::pow(t, 2.7) / 2.7).epsilon(1e-6));
  CHECK(nf->check_hypotheses().all_pass());
}

TEST_CASE("catalog errors") {
  CHECK_THROWS_WITH_AS((void)nfunction_from_key("pq-laplace(4,2)", 5),
                       doctest::Contains("p < q"), std::invalid_argument);
  CHECK_THROWS_WITH_AS((void)nfunction_from_key("no-such(2)", 5),
                       doctest::Contains("p-laplace"), std::invalid_argument);
  // em must stay below dimN
  CHECK_THROWS_AS((void)nfunction_from_key("p-laplace(3)", 3), HypothesisViolation);
}

}  // TEST_SUITE
