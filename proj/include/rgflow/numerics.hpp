#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

namespace rgflow::numerics {

struct Extremum {
  double argmax = 0.0;
  double value = 0.0;
};

/// Maximizes f on [a, b]: uniform scan with `n_scan` points, then
/// golden-section refinement around the best bracket down to `tol`.
Extremum maximize(const std::function<double(double)>& f, double a, double b, int n_scan = 10000,
                  double tol = 1e-10);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double residual_rms = 0.0;
};

/// Ordinary least squares y = slope x + intercept.
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

/// Time nodes on [t0, t1]: geometric when t1/t0 > 4, uniform otherwise.
/// Always an even number of intervals, at least 16.
std::vector<double> time_nodes(double t0, double t1, int substeps);

/// Weights of int_{x[1]}^{x[2]} of the quadratic through (x[0], x[1], x[2]).
std::array<double, 3> last_interval_weights(double x0, double x1, double x2);

/// Weights of int_{x0}^{x2} of the quadratic through three nodes (Simpson pair).
std::array<double, 3> simpson_pair_weights(double x0, double x1, double x2);

}  // namespace rgflow::numerics
