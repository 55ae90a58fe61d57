#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rgflow/certificates.hpp"
#include "rgflow/error.hpp"
#include "rgflow/rg.hpp"

using namespace rgflow;

namespace {

const Grid kGrid(40.0, 4096);

ProblemSpec cubic(double lambda, double p = 1.0) {
  return make_problem({p, PurePower{}}, NonlinearitySeries::monomial(3.0), lambda, 2.0);
}

double norm_diff(const GridFunction& a, const GridFunction& b) { return bq_norm(a - b, 2.0); }

}  // namespace

TEST_CASE("fixed point profile") {
  const auto fp = fixed_point_profile(1.0, kGrid);
  CHECK(fp.values[2048] == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-15));
  CHECK(fp.mass() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(to_spectrum(fp).zero_frequency().real() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("linear RG fixes f_p* for pure power diffusion") {
  for (double p : {0.5, 1.0, 2.0}) {
    const auto spec = cubic(1.0, p);
    const auto fp = fixed_point_profile(p, kGrid);
    for (double L : {2.0, 4.0}) CHECK(norm_diff(linear_rg_apply(fp, L, 0, spec), fp) <= 1e-8);
  }
}

TEST_CASE("linear RG semigroup") {
  const auto spec = make_problem({1.0, PerturbedPower{1.0, 0.5}}, NonlinearitySeries::monomial(3.0), 1.0, 2.0);
  const auto f = sample(Gaussian{1.0, 1.3, 0.4}, kGrid);
  const double L = 2.0;
  const auto once = linear_rg_spectrum(f, L * L, 0, spec);
  const auto twice = linear_rg_spectrum(linear_rg_apply(f, L, 0, spec), L, 1, spec);
  CHECK(bq_norm(once - twice, 2.0) <= 1e-10);
  // Back in real space the difference sits at the roundoff floor of the norm.
  CHECK(norm_diff(from_spectrum(once), from_spectrum(twice)) <= 1e-9);
}

TEST_CASE("linear RG contracts zero-mass data") {
  const auto spec = cubic(1.0);
  const double L = 4.0;
  const double bound = contraction_const(1.0, 2.0).C * std::pow(L, -1.0);
  for (double sigma : {0.5, 1.0, 2.0}) {
    const auto g = sample(Dipole{1.0, sigma}, kGrid);
    CHECK(bq_norm(linear_rg_apply(g, L, 0, spec), 2.0) <= bound * bq_norm(g, 2.0));
  }
}

TEST_CASE("reference profile matches iterated linear RG") {
  const auto spec = make_problem({1.0, PerturbedPower{1.0, 0.5}}, NonlinearitySeries::monomial(3.0), 1.0, 2.0);
  const double L = 2.0;
  GridFunction f = fixed_point_profile(1.0, kGrid);
  for (int n = 0; n < 4; ++n) f = linear_rg_apply(f, L, n, spec);
  CHECK(norm_diff(f, reference_profile(spec, kGrid, L, 4)) <= 1e-10);
}

TEST_CASE("rg_apply with zero coupling is the linear RG") {
  const auto spec = cubic(0.0);
  const auto f = sample(Gaussian{0.3, 1.5, 0.0}, kGrid);
  CHECK(norm_diff(rg_apply(f, 0, spec, 2.0), linear_rg_apply(f, 2.0, 0, spec)) <= 1e-13);
}

TEST_CASE("mass transport and Duhamel bound") {
  const auto spec = cubic(1.0);
  const double L = 2.0;
  const auto f = 0.01 * fixed_point_profile(1.0, kGrid);
  const auto res = rg_apply_detail(f, 0, spec, L);
  CHECK(to_spectrum(res.f_next).zero_frequency().real() ==
        doctest::Approx(f.mass() + res.nu_zero).epsilon(1e-12));
  // ||nu|| <= C_n L^{n[p+3-alpha(p+1)]/2} ||f||^2 at n = 0.
  const auto nu = res.f_next - linear_rg_apply(f, L, 0, spec);
  CHECK(bq_norm(nu, 2.0) <= C_n(spec, L, 0) * std::pow(bq_norm(f, 2.0), 2));
  CHECK(res.nu_zero > 0.0);
}

TEST_CASE("strict mode rejects inadmissible data") {
  const auto spec = cubic(1.0);
  const auto f = 0.01 * fixed_point_profile(1.0, kGrid);
  CHECK_THROWS_AS(rg_apply(f, 0, spec, 2.0, {}, true), InadmissibleData);
  RGOptions opt;
  opt.strict = true;
  try {
    rg_flow(f, spec, 2.0, 2, {}, opt);
    FAIL("expected InadmissibleData");
  } catch (const InadmissibleData& e) {
    CHECK(std::string(e.what()).find("RG step 0") != std::string::npos);
  }
}

TEST_CASE("decomposition") {
  const auto spec = cubic(1.0);
  const auto fp = fixed_point_profile(1.0, kGrid);
  auto [A, g] = decompose(2.0 * fp, 0, 2.0, spec);
  CHECK(A == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(bq_norm(g, 2.0) < 1e-9);
  const auto dip = sample(Dipole{0.2, 1.0}, kGrid);
  auto [A2, g2] = decompose(fp + dip, 0, 2.0, spec);
  CHECK(A2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(norm_diff(g2, dip) < 1e-9);
  auto [A3, g3] = decompose(sample(Bump{0.4, 2.0, 1.0}, kGrid), 3, 2.0, spec);
  CHECK(A3 > 0.0);
  CHECK(std::abs(to_spectrum(g3).zero_frequency()) <= 1e-12);
}

TEST_CASE("flow at zero coupling stays on the fixed point") {
  const auto spec = cubic(0.0);
  const auto trace = rg_flow(fixed_point_profile(1.0, kGrid), spec, 2.0, 5);
  REQUIRE(trace.steps.size() == 6);
  for (const auto& s : trace.steps) {
    CHECK(s.A_n == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.g_norm <= 1e-8);
  }
}

TEST_CASE("supercritical flow") {
  for (double lambda : {1.0, -1.0}) {
    const auto spec = cubic(lambda);
    const double L = 2.0;
    const auto trace = rg_flow(sample(Gaussian{0.01, 1.5, 0.0}, kGrid), spec, L, 8);
    REQUIRE_FALSE(trace.halted);
    REQUIRE(trace.steps.size() == 9);
    const double e = coupling_exponent(spec);
    for (std::size_t n = 0; n < trace.steps.size(); ++n) {
      const auto& s = trace.steps[n];
      CHECK(s.n == static_cast<int>(n));
      CHECK(s.lambda_n == doctest::Approx(lambda * std::pow(L, n * e)).epsilon(1e-14));
      CHECK(std::abs(s.g_zero) <= 1e-12);
      if (n >= 2) CHECK(s.g_norm < 0.8 * trace.steps[n - 1].g_norm);
      if (n + 1 < trace.steps.size()) {
        CHECK(trace.steps[n + 1].A_n == doctest::Approx(s.A_n + s.nu_zero).epsilon(1e-12));
      }
    }
    double prev = 1e300;
    for (std::size_t n = 1; n + 1 < trace.steps.size(); ++n) {
      const double dA = std::abs(trace.steps[n + 1].A_n - trace.steps[n].A_n);
      CHECK(dA < prev);
      prev = dA;
    }
    CHECK(trace.A_limit_estimate == trace.steps.back().A_n);
  }
}

TEST_CASE("flow halts with a diagnostic on solver failure") {
  SolverConfig cfg;
  cfg.picard_max_iters = 3;
  const auto trace = rg_flow(10.0 * fixed_point_profile(1.0, kGrid), cubic(1.0), 2.0, 4, cfg);
  CHECK(trace.halted);
  CHECK(trace.diagnostic.find("RG step 0") != std::string::npos);
  RGOptions opt;
  opt.halt_on_error = false;
  CHECK_THROWS_AS(rg_flow(10.0 * fixed_point_profile(1.0, kGrid), cubic(1.0), 2.0, 4, cfg, opt), NoContraction);
}

TEST_CASE("argument checks") {
  const auto spec = cubic(1.0);
  const auto fp = fixed_point_profile(1.0, kGrid);
  CHECK_THROWS_AS(linear_rg_apply(fp, 1.0, 0, spec), Error);
  CHECK_THROWS_AS(rg_flow(fp, spec, 2.0, 0), Error);
}
