#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rgflow/rg.hpp"
#include "rgflow/solver.hpp"
#include "rgflow/spectral.hpp"

namespace rgflow {

struct TimeSeries {
  std::vector<double> t;
  std::vector<double> amplitude;
};

struct DecayFit {
  double gamma_est = 0.0;
  double std_error = 0.0;
  double t_min = 0.0;
  double t_max = 0.0;
  double residual_rms = 0.0;
  std::size_t samples = 0;
};

/// Least-squares slope of log amplitude against log t; gamma = -2 slope.
/// Without an explicit window the last decade of t is used, widened to the
/// last 8 samples when the decade holds fewer.
DecayFit fit_decay_exponent(const TimeSeries& series, std::optional<double> t_min = std::nullopt,
                            std::optional<double> t_max = std::nullopt);

struct LogCorrectionFit {
  double mu = 0.0;
  double std_error = 0.0;
  double residual_rms = 0.0;
};

/// Fits amplitude(t) t^{gamma/2} ~ (log t)^{-mu}; default window t >= e.
LogCorrectionFit log_correction_fit(const TimeSeries& series, double gamma_fixed,
                                    std::optional<double> t_min = std::nullopt,
                                    std::optional<double> t_max = std::nullopt);

/// ||v - A f_p*|| for a slice already in the self-similar frame.
double distance_to_profile(const GridFunction& v, double p, double A, double q);

/// Rescales u(., t) to t^{(p+1)/2} u(t^{(p+1)/2} x, t) in frequency space and
/// returns its B_q distance to A f_p*.
double profile_distance(const GridFunction& u_t, double t, double p, double A, double q);

/// Aitken extrapolation of a sequence assumed to converge geometrically.
double extrapolate_limit(std::span<const double> values);

double estimate_A(const Trajectory& trajectory);
double estimate_A(const RGTrace& trace);

/// (L^n, L^{-n(p+1)/2} sup|f_n|): sup|u(., L^n)| reconstructed from the trace.
TimeSeries amplitude_series(const RGTrace& trace);

/// (t, sup|u|) from a direct solve.
TimeSeries amplitude_series(const Trajectory& trajectory);

}  // namespace rgflow
