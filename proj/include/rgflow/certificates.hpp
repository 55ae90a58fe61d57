#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rgflow/problem.hpp"
#include "rgflow/spectral.hpp"

namespace rgflow {

/// int_R dx / (1 + |x|^q) = 2 pi / (q sin(pi/q)).
double inverse_power_integral(double q);

/// C(q) = (2^{q+1} + 3) int dx/(1+|x|^q).
double const_C(double q);

/// C_q = (1/2pi) int dw/(1+|w|^q), so that sup|h| <= C_q ||h||.
double const_Cq_embed(double q);

struct SeriesSums {
  double S0 = 0.0;
  double S1 = 0.0;
  double S2 = 0.0;
};

/// S0(z) = sum (C/2pi)^{j-1}|a_j| z^j, S1 = sum (C/2pi)^{j-1}|a_j| z^{j-2},
/// S2 = sum (C/2pi)^{j-1} j|a_j| z^{j-2}, with C = C(q).
SeriesSums series_sums(const NonlinearitySeries& nonlinearity, double q, double z);

/// 8 (sqrt(s) + 1)^3 (L - 1) S2(rho0) for a diffusion time s.
double C_of_s(const ProblemSpec& spec, double L, double s);

double C0(const ProblemSpec& spec, double L);
double eps_local(const ProblemSpec& spec, double L);

/// s_n(L): diffusion time over [1, L] of the n-times rescaled problem.
double s_n(const ProblemSpec& spec, double L, int n);
double C_n(const ProblemSpec& spec, double L, int n);
double eps_n(const ProblemSpec& spec, double L, int n);

/// Uniform bound on the C_n.
double const_K(const ProblemSpec& spec, double L, double K_pq);
double sigma(const ProblemSpec& spec, double L, double K_pq);

/// sup_w (1+|w|^q)(1+2|w|/(p+1)) e^{-w^2/(p+1)}: the B_q norm of f_p*.
double fixed_point_norm(double p, double q);

/// B_q norm of the Gaussian spectrum e^{-kappa w^2}.
double gaussian_spectrum_norm(double kappa, double q);

/// kappa with F(R0_{L^n} f_p*)(w) = e^{-kappa w^2}.
double rg_fixed_point_width(const DiffusionDescriptor& diffusion, double L, int n);

/// Smallest T0 >= 1 with |r(T)|/T^{p+1} < 1/(2(p+1)) for all T >= T0 (1 for PurePower).
double L0_for(const DiffusionDescriptor& diffusion);

struct ContractionConstant {
  double C = 0.0;
  double L0 = 1.0;
  double L1 = 1.0;
};

ContractionConstant contraction_const(const DiffusionDescriptor& diffusion, double q);
ContractionConstant contraction_const(double p, double q);

/// max_w (1+|w|^q) e^{-w^2/(2(p+1))} [2|w| + w^2 + 2|w|^3/(p+1)].
double rate_const_M(double p, double q);

/// Smallest n with |r(L^m)| L^{-m(p+1)} < 1/(2(p+1)) for every m in [n, 64].
int n0_for(const DiffusionDescriptor& diffusion, double L);

/// Upper bound on ||R0_{L^n} f_p*|| over n >= 1 for L > L1.
double K_pq(const DiffusionDescriptor& diffusion, double q, double L);

/// Admissible delta interval (lo, hi) = (max(0, p + 4 + 2r - alpha(p+1)), 1).
std::pair<double, double> delta_interval(const ProblemSpec& spec);
double default_delta(const ProblemSpec& spec);
void check_delta(const ProblemSpec& spec, double delta);

double L_delta(const ProblemSpec& spec, double delta);

/// G = 1 + K_pq / (1 - L^{(delta-1)/2}).
double const_G(double K_pq, double L, double delta);

/// G_1 ... G_count from the recursion, for data of norm f_norm.
std::vector<double> G_sequence(const ProblemSpec& spec, double L, double delta, double K_pq, double f_norm,
                               int count);

struct InequalityCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

struct CertificateBundle {
  double q = 2.0, p = 1.0, L = 2.0, delta = 0.5;
  double f_norm = 0.0;
  double C_of_q = 0.0;
  double C_q_embed = 0.0;
  double rho0 = 1.0;
  double S0 = 0.0, S1 = 0.0, S2 = 0.0;
  double C0 = 0.0;
  double eps_local = 0.0;
  std::vector<double> eps_n;
  double sigma = 0.0;
  double K = 0.0;
  double C_pq = 0.0;
  double K_pq = 0.0;
  double contraction_C = 0.0;
  double L0 = 1.0;
  double L1 = 1.0;
  double M = 0.0;
  int n0 = 0;
  double L_delta = 0.0;
  double G = 0.0;
  double G_max = 0.0;
  double eps_bar = 0.0;
  bool basin_ok = false;
  std::vector<InequalityCheck> inequalities;
};

/// Evaluates the full constant chain for data of B_q norm `f_norm`.
CertificateBundle certify(const ProblemSpec& spec, double L, std::optional<double> delta, double f_norm,
                          int n_eps = 33);

CertificateBundle basin_check(const GridFunction& f, const ProblemSpec& spec, double L,
                              std::optional<double> delta = std::nullopt);

}  // namespace rgflow
