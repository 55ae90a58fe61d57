#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>
#include <numbers>

#include "rgflow/certificates.hpp"
#include "rgflow/error.hpp"
#include "rgflow/rg.hpp"

using namespace rgflow;

namespace {

constexpr double kPi = std::numbers::pi;

ProblemSpec cubic(double p = 1.0) {
  return make_problem({p, PurePower{}}, NonlinearitySeries::monomial(3.0), 1.0, 2.0);
}

ProblemSpec perturbed() {
  return make_problem({1.0, PerturbedPower{1.0, 0.5}}, NonlinearitySeries::monomial(3.0), 1.0, 2.0);
}

template <class F>
double dense_max(F&& f, double hi, int n = 1000000) {
  double best = -1.0;
  for (int i = 0; i <= n; ++i) best = std::max(best, f(hi * i / n));
  return best;
}

}  // namespace

TEST_CASE("C(q) and the embedding constant") {
  CHECK(const_C(2.0) == doctest::Approx(11.0 * kPi).epsilon(1e-14));
  CHECK(const_C(2.0) == doctest::Approx(34.5575).epsilon(1e-5));
  boost::math::quadrature::exp_sinh<double> integrator;
  const double quad = 2.0 * integrator.integrate([](double x) { return 1.0 / (1.0 + std::pow(x, 4.0)); }, 0.0,
                                                 std::numeric_limits<double>::infinity());
  CHECK(const_C(4.0) == doctest::Approx(35.0 * quad).epsilon(1e-12));
  CHECK_THROWS_AS(const_C(1.0), Error);
  CHECK_THROWS_AS(const_C(1.0 + 1e-10), Error);
  CHECK(const_Cq_embed(2.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(const_Cq_embed(3.0) == doctest::Approx(1.0 / (3.0 * std::sin(kPi / 3.0))).epsilon(1e-14));
  CHECK(const_Cq_embed(3.0) == doctest::Approx(0.3849).epsilon(1e-4));
  // sup|f_p*| <= C_q ||f_p*||
  const auto fp = fixed_point_profile(1.0, Grid(40.0, 4096));
  CHECK(fp.sup_abs() <= const_Cq_embed(2.0) * bq_norm(fp, 2.0));
}

TEST_CASE("series sums") {
  const auto s = series_sums(NonlinearitySeries::monomial(3.0), 2.0, 1.0);
  CHECK(s.S1 == doctest::Approx(30.25).epsilon(1e-14));
  CHECK(s.S2 == doctest::Approx(90.75).epsilon(1e-14));
  CHECK(s.S0 == doctest::Approx(30.25).epsilon(1e-14));
  CHECK(series_sums(NonlinearitySeries::monomial(3.0), 2.0, 0.0).S0 == 0.0);

  const auto two = NonlinearitySeries::from_terms({{3.0, 1.0}, {5.0, 0.1}});
  const double z = 0.5, k = 5.5;
  const auto t = series_sums(two, 2.0, z);
  CHECK(t.S0 == doctest::Approx(k * k * z * z * z + 0.1 * std::pow(k, 4) * std::pow(z, 5)).epsilon(1e-14));
  CHECK(t.S1 == doctest::Approx(k * k * z + 0.1 * std::pow(k, 4) * z * z * z).epsilon(1e-14));
  CHECK(t.S2 == doctest::Approx(3.0 * k * k * z + 0.5 * std::pow(k, 4) * z * z * z).epsilon(1e-14));

  const auto finite = NonlinearitySeries::monomial(3.0, 1.0, 1.0);
  CHECK_THROWS_AS(series_sums(finite, 2.0, 1.01 * 2.0 * kPi / const_C(2.0)), RadiusExceeded);
  CHECK_NOTHROW(series_sums(finite, 2.0, 0.9 * 2.0 * kPi / const_C(2.0)));
}

TEST_CASE("local epsilon") {
  const auto spec = cubic();
  const double s = 1.5;
  const double c0 = 8.0 * std::pow(1.0 + std::sqrt(s), 3) * 90.75;
  CHECK(C0(spec, 2.0) == doctest::Approx(c0).epsilon(1e-13));
  const double expect = std::min(1.0 / (2.0 * c0), 1.0 / (2.0 * 0.5 * (std::sqrt(s) + 1.0)));
  CHECK(eps_local(spec, 2.0) == doctest::Approx(expect).epsilon(1e-13));
  CHECK(eps_local(spec, 2.0) == doctest::Approx(6.3e-5).epsilon(0.02));
  double prev = eps_local(spec, 1.5);
  for (double L : {2.0, 4.0, 8.0}) {
    const double e = eps_local(spec, L);
    CHECK(e > 0.0);
    CHECK(e < prev);
    prev = e;
  }
}

TEST_CASE("rescaled epsilons and sigma") {
  const auto spec = cubic();
  const double L = 2.0;
  for (int n = 0; n <= 10; ++n) {
    const double ratio = s_n(spec, L, n) / std::pow(L, 2.0);
    CHECK(ratio >= 1.0 / 12.0);
    CHECK(ratio <= 3.0 / 4.0);
    CHECK(eps_n(spec, L, n) == doctest::Approx(eps_n(spec, L, 0)).epsilon(1e-14));
  }
  const double kpq = K_pq(spec.diffusion, 2.0, L);
  CHECK(sigma(spec, L, kpq) <= eps_n(spec, L, 0));
  CHECK(const_K(spec, L, kpq) >= C_n(spec, L, 0));

  const auto pert = perturbed();
  double min_eps = 1e300;
  for (int n = 0; n <= 20; ++n) {
    const double ratio = s_n(pert, L, n) / std::pow(L, 2.0);
    CHECK(ratio >= 1.0 / 12.0);
    CHECK(ratio <= 3.0 / 4.0);
    min_eps = std::min(min_eps, eps_n(pert, L, n));
  }
  CHECK(sigma(pert, L, K_pq(pert.diffusion, 2.0, L)) <= min_eps);
}

TEST_CASE("contraction constant") {
  const auto cc = contraction_const(1.0, 2.0);
  const double dense = dense_max(
      [](double w) { return (1.0 + w + 1.5 * w * w) * (1.0 + w * w) * std::exp(-w * w / 12.0); },
      20.0 * std::sqrt(2.0));
  CHECK(cc.C == doctest::Approx(dense).epsilon(1e-8));
  CHECK(cc.C >= 1.0);
  CHECK(cc.L0 == 1.0);
  CHECK(cc.L1 == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
  CHECK(contraction_const(2.0, 3.0).L1 == doctest::Approx(std::cbrt(3.0)).epsilon(1e-15));
  CHECK(contraction_const(perturbed().diffusion, 2.0).L0 >= 1.0);
}

TEST_CASE("rate constant and n0") {
  const double M = rate_const_M(1.0, 2.0);
  const double dense = dense_max(
      [](double w) { return (1.0 + w * w) * std::exp(-w * w / 4.0) * (2.0 * w + w * w + w * w * w); },
      20.0 * std::sqrt(2.0));
  CHECK(M > 0.0);
  CHECK(std::isfinite(M));
  CHECK(M == doctest::Approx(dense).epsilon(1e-8));
  CHECK(n0_for(cubic().diffusion, 2.0) == 0);
  const auto d = perturbed().diffusion;
  const int n0 = n0_for(d, 2.0);
  CHECK(n0 < 64);
  for (int m = n0; m <= 64; ++m) CHECK(std::abs(r_ratio(d, m * std::log(2.0))) < 0.25);
  if (n0 > 0) CHECK(std::abs(r_ratio(d, (n0 - 1) * std::log(2.0))) >= 0.25);
}

TEST_CASE("fixed point norms") {
  CHECK(fixed_point_norm(1.0, 2.0) ==
        doctest::Approx(dense_max([](double w) { return (1.0 + w * w) * (1.0 + w) * std::exp(-w * w / 2.0); }, 20.0))
            .epsilon(1e-9));
  CHECK(fixed_point_norm(1.0, 2.0) == doctest::Approx(2.667).epsilon(1e-3));
  const double kpq = K_pq(cubic().diffusion, 2.0, 2.0);
  CHECK(kpq >= fixed_point_norm(1.0, 2.0));
  for (int n = 1; n <= 40; ++n)
    CHECK(gaussian_spectrum_norm(rg_fixed_point_width(perturbed().diffusion, 2.0, n), 2.0) <=
          K_pq(perturbed().diffusion, 2.0, 2.0));
}

TEST_CASE("delta handling") {
  const auto spec = cubic();
  const auto [lo, hi] = delta_interval(spec);
  CHECK(lo == 0.0);
  CHECK(hi == 1.0);
  CHECK(default_delta(spec) == 0.5);
  CHECK_NOTHROW(check_delta(spec, 0.1));
  CHECK_NOTHROW(check_delta(spec, 0.9));
  CHECK_THROWS_AS(check_delta(spec, 1.0), InvalidDelta);
  CHECK_THROWS_AS(check_delta(spec, 0.0), InvalidDelta);
  // p = 1, alpha = 2.5 (exploratory): lo = 5 - 5 = 0; alpha = 2.25 gives lo = 0.5
  const auto tight = make_problem({1.0, PurePower{}}, NonlinearitySeries::monomial(2.25), 1.0, 2.0, 0.0,
                                  Admissibility::Exploratory);
  CHECK(delta_interval(tight).first == doctest::Approx(0.5));
  CHECK(default_delta(tight) == doctest::Approx(0.75));
  CHECK_THROWS_AS(check_delta(tight, 0.4), InvalidDelta);
  const auto critical = make_problem({1.0, PurePower{}}, NonlinearitySeries::monomial(2.0), 1.0, 2.0, 0.0,
                                     Admissibility::Exploratory);
  CHECK_THROWS_AS(default_delta(critical), InvalidDelta);
}

TEST_CASE("certificate bundle for tiny data") {
  const auto spec = cubic();
  const double Ld = L_delta(spec, 0.5);
  CHECK(Ld >= contraction_const(1.0, 2.0).L1);
  const double L = 1.01 * Ld;
  const auto fp = fixed_point_profile(1.0, Grid(40.0, 4096));
  const auto b = basin_check(1e-6 * fp, spec, L);
  CHECK(b.delta == 0.5);
  CHECK(b.C_of_q > 0.0);
  CHECK(b.C0 > 0.0);
  CHECK(b.eps_local > 0.0);
  CHECK(b.sigma > 0.0);
  CHECK(b.K > 0.0);
  CHECK(b.G > 1.0);
  CHECK(b.eps_bar > 0.0);
  CHECK(b.M > 0.0);
  CHECK(b.eps_bar <= b.sigma);
  double min_eps = 1e300;
  for (double e : b.eps_n) min_eps = std::min(min_eps, e);
  CHECK(b.sigma <= min_eps);
  CHECK(b.L == doctest::Approx(L));
  CHECK_FALSE(b.inequalities.empty());
  // basin_ok is exactly the conjunction of its two defining inequalities.
  CHECK(b.basin_ok == (L > b.L_delta && b.f_norm < b.eps_bar));

  const auto big = basin_check(fp, spec, L);
  CHECK_FALSE(big.basin_ok);
  bool reported = false;
  for (const auto& ineq : big.inequalities) reported = reported || !ineq.holds;
  CHECK(reported);

  const auto ok = certify(spec, L, 0.5, 0.5 * b.eps_bar);
  CHECK(ok.basin_ok);
  CHECK(ok.G_max < ok.G);
  for (const auto& ineq : ok.inequalities) CHECK_MESSAGE(ineq.holds, ineq.name);
}

TEST_CASE("G recursion stays below G under the smallness hypothesis") {
  const auto spec = cubic();
  const double L = 1.01 * L_delta(spec, 0.5);
  const double kpq = K_pq(spec.diffusion, 2.0, L);
  const double G = const_G(kpq, L, 0.5);
  const double K = const_K(spec, L, kpq);
  const double f_norm = 0.9 / (2.0 * K * G * G * std::pow(L, 0.25));
  const auto seq = G_sequence(spec, L, 0.5, kpq, f_norm, 64);
  CHECK(seq.size() == 64);
  for (double g : seq) CHECK(g < G);
}
