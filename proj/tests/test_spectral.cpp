#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "rgflow/error.hpp"
#include "rgflow/spectral.hpp"

using namespace rgflow;

namespace {

const Grid kGrid(40.0, 4096);

double max_spectral_error(const SpectralFunction& F, const ProfileDescriptor& profile, double scale = 1.0) {
  double err = 0.0;
  for (std::size_t i = 0; i < F.grid.size(); ++i) {
    const auto [f, df] = *analytic_spectrum(profile, scale * F.grid.frequency(i));
    err = std::max(err, std::abs(F.coeffs[i] - f));
    err = std::max(err, std::abs(F.deriv_coeffs[i] - scale * df));
  }
  return err;
}

// sup_w (1+|w|^q)(|f^| + |f^'|) on a dense uniform grid of [-W, W].
double dense_bq(const ProfileDescriptor& profile, double q, double W, int n) {
  double best = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double w = -W + 2.0 * W * i / n;
    const auto [f, df] = *analytic_spectrum(profile, w);
    best = std::max(best, (1.0 + std::pow(std::abs(w), q)) * (std::abs(f) + std::abs(df)));
  }
  return best;
}

}  // namespace

TEST_CASE("grid layout") {
  CHECK_THROWS_AS(Grid(40.0, 1000), Error);
  CHECK_THROWS_AS(Grid(0.0, 1024), Error);
  CHECK(kGrid.dx() == doctest::Approx(80.0 / 4096));
  CHECK(kGrid.dw() == doctest::Approx(std::numbers::pi / 40.0));
  CHECK(kGrid.x(0) == -40.0);
  CHECK(kGrid.frequency(1) == doctest::Approx(kGrid.dw()));
  CHECK(kGrid.frequency(4095) == doctest::Approx(-kGrid.dw()));
  CHECK(kGrid.wave_index(2048) == -2048);
}

TEST_CASE("forward transform matches closed-form spectra") {
  for (const ProfileDescriptor& p :
       {ProfileDescriptor{Gaussian{1.0, 1.0, 0.0}}, ProfileDescriptor{Gaussian{0.7, 1.3, 2.0}},
        ProfileDescriptor{FixedPointProfile{1.0, 1.0}}, ProfileDescriptor{FixedPointProfile{0.5, 2.0}},
        ProfileDescriptor{Dipole{1.0, 1.0}}}) {
    CHECK(max_spectral_error(to_spectrum(sample(p, kGrid)), p) < 1e-12);
  }
}

TEST_CASE("round trip and mass") {
  const auto f = sample(Bump{1.0, 2.0, 0.5}, kGrid);
  const auto g = from_spectrum(to_spectrum(f));
  double err = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) err = std::max(err, std::abs(f.values[i] - g.values[i]));
  CHECK(err < 1e-14);
  const auto fp = sample(FixedPointProfile{1.0, 1.0}, kGrid);
  CHECK(fp.mass() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(to_spectrum(fp).zero_frequency().real() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sample(Dipole{1.0, 1.0}, kGrid).mass() == doctest::Approx(0.0).epsilon(1e-14).scale(1.0));
}

TEST_CASE("B_q norm against a dense frequency scan") {
  for (double q : {2.0, 3.0}) {
    for (const ProfileDescriptor& p : {ProfileDescriptor{Gaussian{1.0, 1.0, 0.0}},
                                       ProfileDescriptor{FixedPointProfile{1.0, 1.0}}, ProfileDescriptor{Dipole{1.0, 0.8}}}) {
      const double grid_value = bq_norm(sample(p, kGrid), q);
      const double dense = dense_bq(p, q, 40.0, 1000000);
      CHECK(grid_value <= dense * (1.0 + 1e-12));
      CHECK(grid_value >= dense * (1.0 - 2e-3));
    }
  }
}

TEST_CASE("B_q argmax prefers the smallest |w| on ties") {
  SpectralFunction F(Grid(10.0, 64));
  F.coeffs[3] = 1.0;
  F.coeffs[61] = 1.0;
  const auto d = bq_norm_detail(F, 2.0);
  CHECK(d.argmax == doctest::Approx(3.0 * F.grid.dw()));
  SpectralFunction Z(Grid(10.0, 64));
  CHECK(bq_norm_detail(Z, 2.0).argmax == 0.0);
  CHECK(bq_norm(Z, 2.0) == 0.0);
}

TEST_CASE("heat propagation is the Gaussian multiplier") {
  const Gaussian g{1.0, 1.0, 0.0};
  const double ds = 0.75;
  const auto F = heat_propagate(to_spectrum(sample(g, kGrid)), ds);
  // sigma^2 -> sigma^2 + 2 ds with the amplitude keeping the mass fixed.
  const double s2 = 1.0 + 2.0 * ds;
  const Gaussian spread{1.0 / std::sqrt(s2), std::sqrt(s2), 0.0};
  CHECK(max_spectral_error(F, spread) < 1e-12);
  CHECK_THROWS_AS(heat_propagate(F, -1.0), Error);
}

TEST_CASE("dilation evaluates the spectrum off-grid") {
  for (double beta : {0.5, 0.25, 1.0 / std::sqrt(8.0), 1.7}) {
    for (const ProfileDescriptor& p :
         {ProfileDescriptor{Gaussian{1.0, 1.0, 0.0}}, ProfileDescriptor{Gaussian{1.0, 0.9, -1.5}},
          ProfileDescriptor{Dipole{1.0, 1.2}}}) {
      CHECK(max_spectral_error(dilate(sample(p, kGrid), beta), p, beta) < 1e-11);
    }
  }
}

TEST_CASE("dilation of the bump against quadrature") {
  using boost::math::quadrature::gauss_kronrod;
  const Bump b{1.0, 2.0, 0.0};
  const double beta = 0.37;
  const auto F = dilate(sample(b, kGrid), beta);
  for (std::size_t i : {0u, 1u, 7u, 40u, 4090u}) {
    const double w = beta * kGrid.frequency(i);
    const double re = gauss_kronrod<double, 61>::integrate(
        [&](double x) { return evaluate(b, x) * std::cos(w * x); }, -2.0, 2.0, 15, 1e-14);
    const double dre = gauss_kronrod<double, 61>::integrate(
        [&](double x) { return -x * evaluate(b, x) * std::sin(w * x); }, -2.0, 2.0, 15, 1e-14);
    CHECK(std::abs(F.coeffs[i] - Complex{re, 0.0}) < 1e-10);
    CHECK(std::abs(F.deriv_coeffs[i] - beta * Complex{dre, 0.0}) < 1e-10);
  }
}
