#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "rgflow/numerics.hpp"

using namespace rgflow::numerics;

TEST_CASE("maximize finds an interior peak") {
  auto f = [](double x) { return x * std::exp(-x * x); };
  const auto m = maximize(f, 0.0, 10.0);
  CHECK(m.argmax == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-8));
  CHECK(m.value == doctest::Approx(std::exp(-0.5) / std::sqrt(2.0)).epsilon(1e-14));
  const auto edge = maximize([](double x) { return -x; }, 1.0, 2.0);
  CHECK(edge.argmax == doctest::Approx(1.0));
}

TEST_CASE("least squares recovers an exact line") {
  std::vector<double> x, y;
  for (int i = 0; i < 10; ++i) {
    x.push_back(i);
    y.push_back(3.0 - 0.5 * i);
  }
  const auto fit = least_squares(x, y);
  CHECK(fit.slope == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(fit.intercept == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(fit.slope_stderr < 1e-12);
}

TEST_CASE("time nodes") {
  const auto u = time_nodes(1.0, 2.0, 32);
  CHECK(u.size() == 33);
  CHECK(u.front() == 1.0);
  CHECK(u.back() == 2.0);
  CHECK(u[1] - u[0] == doctest::Approx(u[2] - u[1]));
  const auto g = time_nodes(1.0, 64.0, 8);
  CHECK((g.size() - 1) % 2 == 0);
  CHECK(g[2] / g[1] == doctest::Approx(g[1] / g[0]));
  CHECK(g.back() == 64.0);
  const auto small = time_nodes(1.0, 1.01, 8);
  CHECK(small.size() >= 17);
}

TEST_CASE("quadratic weights integrate quadratics exactly") {
  auto q = [](double x) { return 1.0 + 2.0 * x - 3.0 * x * x; };
  auto Q = [](double x) { return x + x * x - x * x * x; };
  const double x0 = 0.3, x1 = 0.7, x2 = 1.6;
  const auto s = simpson_pair_weights(x0, x1, x2);
  CHECK(s[0] * q(x0) + s[1] * q(x1) + s[2] * q(x2) == doctest::Approx(Q(x2) - Q(x0)).epsilon(1e-14));
  const auto l = last_interval_weights(x0, x1, x2);
  CHECK(l[0] * q(x0) + l[1] * q(x1) + l[2] * q(x2) == doctest::Approx(Q(x2) - Q(x1)).epsilon(1e-14));
}
