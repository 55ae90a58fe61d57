#include "rgflow/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rgflow/error.hpp"
#include "rgflow/numerics.hpp"

namespace rgflow {

namespace {

constexpr std::size_t kMinSamples = 8;

void check_series(const TimeSeries& s) {
  if (s.t.size() != s.amplitude.size()) throw DegenerateSeries("time and amplitude columns differ in length");
  for (std::size_t i = 0; i < s.t.size(); ++i) {
    if (!(s.amplitude[i] > 0.0) || !std::isfinite(s.amplitude[i])) {
      throw DegenerateSeries("amplitude must be positive and finite (sample " + std::to_string(i) + ")");
    }
    if (!(s.t[i] > 0.0)) throw DegenerateSeries("times must be positive");
    if (i > 0 && !(s.t[i] > s.t[i - 1])) throw DegenerateSeries("times must increase");
  }
}

std::vector<std::size_t> window_indices(const TimeSeries& s, double lo, double hi) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < s.t.size(); ++i) {
    if (s.t[i] >= lo && s.t[i] <= hi) idx.push_back(i);
  }
  return idx;
}

}  // namespace

DecayFit fit_decay_exponent(const TimeSeries& series, std::optional<double> t_min, std::optional<double> t_max) {
  check_series(series);
  if (series.t.size() < kMinSamples) throw DegenerateSeries("need at least 8 samples");
  const double hi = t_max.value_or(series.t.back());
  std::vector<std::size_t> idx;
  if (t_min) {
    idx = window_indices(series, *t_min, hi);
  } else {
    idx = window_indices(series, hi / 10.0, hi);
    if (idx.size() < kMinSamples) {
      const auto upper = window_indices(series, 0.0, hi);
      if (upper.size() < kMinSamples) throw DegenerateSeries("fewer than 8 samples below t_max");
      idx.assign(upper.end() - kMinSamples, upper.end());
    }
  }
  if (idx.size() < kMinSamples) throw DegenerateSeries("fewer than 8 samples in the fit window");
  const double t0 = series.t[idx.front()], t1 = series.t[idx.back()];
  if (!(t1 >= 2.0 * t0)) throw DegenerateSeries("fit window spans less than a factor of 2 in t");

  std::vector<double> x, y;
  for (std::size_t i : idx) {
    x.push_back(std::log(series.t[i]));
    y.push_back(std::log(series.amplitude[i]));
  }
  const auto fit = numerics::least_squares(x, y);
  DecayFit out;
  out.gamma_est = -2.0 * fit.slope;
  out.std_error = 2.0 * fit.slope_stderr;
  out.t_min = t0;
  out.t_max = t1;
  out.residual_rms = fit.residual_rms;
  out.samples = idx.size();
  return out;
}

LogCorrectionFit log_correction_fit(const TimeSeries& series, double gamma_fixed, std::optional<double> t_min,
                                    std::optional<double> t_max) {
  check_series(series);
  const double lo = std::max(t_min.value_or(std::exp(1.0)), std::nextafter(1.0, 2.0));
  const auto idx = window_indices(series, lo, t_max.value_or(std::numeric_limits<double>::infinity()));
  if (idx.size() < 4) throw DegenerateSeries("need at least 4 samples with t > 1 for the log fit");
  std::vector<double> x, y;
  for (std::size_t i : idx) {
    const double lt = std::log(series.t[i]);
    x.push_back(std::log(lt));
    y.push_back(std::log(series.amplitude[i]) + 0.5 * gamma_fixed * lt);
  }
  if (!(x.back() > x.front())) throw DegenerateSeries("log-time window is empty");
  const auto fit = numerics::least_squares(x, y);
  return {-fit.slope, fit.slope_stderr, fit.residual_rms};
}

double distance_to_profile(const GridFunction& v, double p, double A, double q) {
  SpectralFunction diff = to_spectrum(v);
  const Grid& g = v.grid;
  const FixedPointProfile ref{p, A};
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto [f, df] = *analytic_spectrum(ref, g.frequency(i));
    diff.coeffs[i] -= f;
    diff.deriv_coeffs[i] -= df;
  }
  return bq_norm(diff, q);
}

double profile_distance(const GridFunction& u_t, double t, double p, double A, double q) {
  if (!(t > 1.0)) throw Error("profile_distance requires t > 1");
  if (!std::isfinite(A)) throw Error("profile_distance requires a finite A");
  const double beta = std::pow(t, -(p + 1.0) / 2.0);
  SpectralFunction diff = dilate(u_t, beta);
  const Grid& g = u_t.grid;
  const FixedPointProfile ref{p, A};
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto [f, df] = *analytic_spectrum(ref, g.frequency(i));
    diff.coeffs[i] -= f;
    diff.deriv_coeffs[i] -= df;
  }
  return bq_norm(diff, q);
}

double extrapolate_limit(std::span<const double> values) {
  if (values.size() < 3) throw DegenerateSeries("extrapolation needs at least 3 values");
  const std::size_t k = values.size() - 1;
  const double x0 = values[k - 2], x1 = values[k - 1], x2 = values[k];
  const double d1 = x1 - x0, d2 = x2 - x1;
  const double roundoff = 64.0 * std::numeric_limits<double>::epsilon() * std::max({std::abs(x0), std::abs(x1), std::abs(x2), 1e-300});
  if (std::abs(d2) <= roundoff) return x2;
  if (std::abs(d2) >= std::abs(d1)) {
    throw NonConvergent("successive differences do not shrink (" + std::to_string(d1) + ", " + std::to_string(d2) +
                        ")");
  }
  return x2 - d2 * d2 / (d2 - d1);
}

double estimate_A(const Trajectory& trajectory) { return extrapolate_limit(trajectory.mass); }

double estimate_A(const RGTrace& trace) {
  std::vector<double> a;
  for (const auto& s : trace.steps) a.push_back(s.A_n);
  return extrapolate_limit(a);
}

TimeSeries amplitude_series(const RGTrace& trace) {
  TimeSeries out;
  const double p1 = trace.spec.p() + 1.0;
  const double logL = std::log(trace.L);
  for (const auto& s : trace.steps) {
    out.t.push_back(std::exp(s.n * logL));
    out.amplitude.push_back(std::exp(-0.5 * s.n * p1 * logL) * s.f_n.sup_abs());
  }
  return out;
}

TimeSeries amplitude_series(const Trajectory& trajectory) { return {trajectory.times, trajectory.sup_abs}; }

}  // namespace rgflow
