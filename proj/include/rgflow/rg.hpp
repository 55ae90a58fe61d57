#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rgflow/problem.hpp"
#include "rgflow/solver.hpp"
#include "rgflow/spectral.hpp"

namespace rgflow {

/// f_p*(x) = sqrt((p+1)/4pi) exp(-(p+1)x^2/4) sampled on `grid`.
GridFunction fixed_point_profile(double p, const Grid& grid);

/// s_n(L) / L^{p+1}, the Gaussian width of the linear RG multiplier.
double linear_rg_width(const ProblemSpec& spec, double L, int n);

/// Spectrum of R0_{L,n} g, without the final inverse transform.
SpectralFunction linear_rg_spectrum(const GridFunction& g, double L, int n, const ProblemSpec& spec);

/// R0_{L,n} g: spectrum g^(L^{-(p+1)/2} w) e^{-w^2 s_n(L)/L^{p+1}}.
GridFunction linear_rg_apply(const GridFunction& g, double L, int n, const ProblemSpec& spec);

/// R0_{L^n} f_p*, built from its closed-form spectrum e^{-kappa_n w^2}.
GridFunction reference_profile(const ProblemSpec& spec, const Grid& grid, double L, int n);

struct RGApplyResult {
  GridFunction f_next;
  /// Zero-frequency coefficient of the Duhamel part nu_n = N_n(u_n)(., L).
  double nu_zero = 0.0;
  int picard_iterations = 0;
};

/// One RG step: solve the n-times rescaled problem on [1, L] and rescale
/// parabolically. With `strict`, throws InadmissibleData when ||f_n|| >= eps_n.
RGApplyResult rg_apply_detail(const GridFunction& f_n, int n, const ProblemSpec& spec, double L,
                              const SolverConfig& cfg = {}, bool strict = false);
GridFunction rg_apply(const GridFunction& f_n, int n, const ProblemSpec& spec, double L,
                      const SolverConfig& cfg = {}, bool strict = false);

/// f_n = A_n R0_{L^n} f_p* + g_n with A_n = f_n^(0).
std::pair<double, GridFunction> decompose(const GridFunction& f_n, int n, double L, const ProblemSpec& spec);

struct RGStep {
  int n = 0;
  GridFunction f_n;
  double A_n = 0.0;
  double g_norm = 0.0;
  /// Zero-frequency coefficient of g_n; zero up to roundoff.
  double g_zero = 0.0;
  double lambda_n = 0.0;
  double f_norm = 0.0;
  double eps_n = 0.0;
  bool admissible = false;
  /// Duhamel mass added by the step leaving f_n (0 for the last step).
  double nu_zero = 0.0;
  int picard_iterations = 0;
};

struct RGOptions {
  bool strict = false;
  /// Stop and record a diagnostic on solver errors instead of throwing.
  bool halt_on_error = true;
};

struct RGTrace {
  ProblemSpec spec;
  double L = 2.0;
  std::vector<RGStep> steps;
  double A_limit_estimate = 0.0;
  bool halted = false;
  std::string diagnostic;
};

RGTrace rg_flow(const GridFunction& f, const ProblemSpec& spec, double L, int n_steps, const SolverConfig& cfg = {},
                const RGOptions& options = {});

}  // namespace rgflow
