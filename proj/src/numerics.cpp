#include "rgflow/numerics.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "rgflow/error.hpp"

namespace rgflow::numerics {

Extremum maximize(const std::function<double(double)>& f, double a, double b, int n_scan, double tol) {
  if (!(b > a) || n_scan < 3) throw Error("maximize: bad bracket");
  const double h = (b - a) / (n_scan - 1);
  int best = 0;
  double best_val = f(a);
  for (int i = 1; i < n_scan; ++i) {
    const double v = f(a + i * h);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  double lo = a + std::max(best - 1, 0) * h;
  double hi = a + std::min(best + 1, n_scan - 1) * h;

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  while (hi - lo > tol * std::max(1.0, std::abs(lo))) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    }
  }
  Extremum out{a + best * h, best_val};
  const double mid = 0.5 * (lo + hi);
  const double fm = f(mid);
  if (fm > out.value) out = {mid, fm};
  return out;
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) throw Error("least_squares: need >= 2 paired samples");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw Error("least_squares: x has zero spread");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - (fit.slope * x[i] + fit.intercept);
    sse += e * e;
  }
  fit.residual_rms = std::sqrt(sse / n);
  fit.slope_stderr = n > 2 ? std::sqrt(sse / (n - 2) / sxx) : 0.0;
  return fit;
}

std::vector<double> time_nodes(double t0, double t1, int substeps) {
  if (!(t1 > t0) || !(t0 > 0.0)) throw Error("time_nodes: need 0 < t0 < t1");
  if (substeps < 1) throw Error("time_nodes: substeps must be positive");
  const bool geometric = t1 / t0 > 4.0;
  long m = geometric ? static_cast<long>(substeps) * static_cast<long>(std::ceil(std::log2(t1 / t0)))
                     : static_cast<long>(std::ceil(substeps * (t1 - t0)));
  m = std::max(m, 16L);
  if (m % 2 != 0) ++m;
  std::vector<double> nodes(m + 1);
  for (long i = 0; i <= m; ++i) {
    const double frac = static_cast<double>(i) / static_cast<double>(m);
    nodes[i] = geometric ? t0 * std::pow(t1 / t0, frac) : t0 + (t1 - t0) * frac;
  }
  nodes.front() = t0;
  nodes.back() = t1;
  return nodes;
}

namespace {

// int_a^b of the Lagrange basis polynomials through x0, x1, x2 (two-point Gauss is exact).
std::array<double, 3> lagrange_integrals(double x0, double x1, double x2, double a, double b) {
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  const double g = half / std::sqrt(3.0);
  std::array<double, 3> w{0.0, 0.0, 0.0};
  for (double x : {mid - g, mid + g}) {
    w[0] += half * (x - x1) * (x - x2) / ((x0 - x1) * (x0 - x2));
    w[1] += half * (x - x0) * (x - x2) / ((x1 - x0) * (x1 - x2));
    w[2] += half * (x - x0) * (x - x1) / ((x2 - x0) * (x2 - x1));
  }
  return w;
}

}  // namespace

std::array<double, 3> last_interval_weights(double x0, double x1, double x2) {
  return lagrange_integrals(x0, x1, x2, x1, x2);
}

std::array<double, 3> simpson_pair_weights(double x0, double x1, double x2) {
  const double h0 = x1 - x0, h1 = x2 - x1, s = h0 + h1;
  return {s / 6.0 * (2.0 - h1 / h0), s * s * s / (6.0 * h0 * h1), s / 6.0 * (2.0 - h0 / h1)};
}

}  // namespace rgflow::numerics
