#include "rgflow/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "rgflow/error.hpp"
#include "rgflow/numerics.hpp"
#include "rgflow/solver.hpp"

namespace rgflow {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_q(double q) {
  if (!(q > 1.0 + 1e-9) || !std::isfinite(q)) throw Error("constant requires q > 1");
}

void require_L(double L) {
  if (!(L > 1.0) || !std::isfinite(L)) throw Error("constant requires L > 1");
}

double weight(double w, double q) { return 1.0 + std::pow(std::abs(w), q); }

}  // namespace

double inverse_power_integral(double q) {
  require_q(q);
  return kTwoPi / (q * std::sin(std::numbers::pi / q));
}

double const_C(double q) { return (std::pow(2.0, q + 1.0) + 3.0) * inverse_power_integral(q); }

double const_Cq_embed(double q) { return inverse_power_integral(q) / kTwoPi; }

SeriesSums series_sums(const NonlinearitySeries& nonlinearity, double q, double z) {
  if (!(z >= 0.0)) throw Error("series_sums requires z >= 0");
  const double ratio = const_C(q) / kTwoPi;
  if (std::isfinite(nonlinearity.radius) && !(z < nonlinearity.radius / ratio)) {
    throw RadiusExceeded("series_sums: z = " + std::to_string(z) + " is outside the convergence region");
  }
  SeriesSums out;
  for (const auto& term : nonlinearity.terms) {
    const double j = term.degree;
    const double a = std::abs(term.coefficient);
    const double scale = std::pow(ratio, j - 1.0) * a;
    out.S0 += scale * std::pow(z, j);
    out.S1 += scale * std::pow(z, j - 2.0);
    out.S2 += scale * j * std::pow(z, j - 2.0);
  }
  return out;
}

double C_of_s(const ProblemSpec& spec, double L, double s) {
  require_L(L);
  const double S2 = series_sums(spec.nonlinearity, spec.q, working_rho0(spec)).S2;
  const double b = std::sqrt(s) + 1.0;
  return 8.0 * b * b * b * (L - 1.0) * S2;
}

double C0(const ProblemSpec& spec, double L) { return C_of_s(spec, L, s_of(spec.diffusion, L)); }

namespace {

double eps_from_s(const ProblemSpec& spec, double L, double s) {
  const double a = 1.0 / (2.0 * C_of_s(spec, L, s));
  const double b = working_rho0(spec) / (2.0 * const_Cq_embed(spec.q) * (std::sqrt(s) + 1.0));
  return std::min(a, b);
}

}  // namespace

double eps_local(const ProblemSpec& spec, double L) { return eps_from_s(spec, L, s_of(spec.diffusion, L)); }

double s_n(const ProblemSpec& spec, double L, int n) {
  return s_of(rescale_coefficients(spec, n, L).diffusion, L);
}

double C_n(const ProblemSpec& spec, double L, int n) { return C_of_s(spec, L, s_n(spec, L, n)); }

double eps_n(const ProblemSpec& spec, double L, int n) { return eps_from_s(spec, L, s_n(spec, L, n)); }

namespace {

double upper_s_bound(double p, double L) { return 3.0 * std::pow(L, p + 1.0) / (2.0 * (p + 1.0)); }

}  // namespace

double const_K(const ProblemSpec& spec, double L, double K_pq_value) {
  require_L(L);
  const double p = spec.p();
  const double S2 = series_sums(spec.nonlinearity, spec.q, working_rho0(spec)).S2;
  const double b = std::sqrt(upper_s_bound(p, L)) + 1.0;
  return 8.0 * (L - 1.0) * b * b * b * (std::pow(L, (p + 1.0) * spec.q / 2.0) + K_pq_value) * S2;
}

double sigma(const ProblemSpec& spec, double L, double K_pq_value) {
  const double a = 1.0 / (2.0 * const_K(spec, L, K_pq_value));
  const double b = working_rho0(spec) /
                   (2.0 * const_Cq_embed(spec.q) * (1.0 + std::sqrt(upper_s_bound(spec.p(), L))));
  return std::min(a, b);
}

double gaussian_spectrum_norm(double kappa, double q) {
  if (!(kappa > 0.0)) throw Error("gaussian_spectrum_norm requires kappa > 0");
  const double w_max = 12.0 / std::sqrt(kappa) + 10.0;
  auto h = [&](double w) { return weight(w, q) * (1.0 + 2.0 * kappa * w) * std::exp(-kappa * w * w); };
  return numerics::maximize(h, 0.0, w_max).value;
}

double fixed_point_norm(double p, double q) { return gaussian_spectrum_norm(1.0 / (p + 1.0), q); }

double rg_fixed_point_width(const DiffusionDescriptor& diffusion, double L, int n) {
  require_L(L);
  const double log_T = n * std::log(L);
  const double p1 = diffusion.p + 1.0;
  return s_ratio(diffusion, log_T) + std::exp(-p1 * log_T) / p1;
}

double L0_for(const DiffusionDescriptor& diffusion) {
  if (diffusion.is_pure()) return 1.0;
  const double bound = 1.0 / (2.0 * (diffusion.p + 1.0));
  // Scan log T on [0, 200]; the ratio tends to 0 as T grows.
  constexpr int kScan = 20000;
  constexpr double kLogMax = 200.0;
  double last_bad = -1.0;
  for (int i = 0; i <= kScan; ++i) {
    const double lt = kLogMax * i / kScan;
    if (!(std::abs(r_ratio(diffusion, lt)) < bound)) last_bad = lt;
  }
  if (last_bad < 0.0) return 1.0;
  if (last_bad >= kLogMax) throw Error("L0: r-bound never holds");
  return std::exp(last_bad + kLogMax / kScan);
}

ContractionConstant contraction_const(const DiffusionDescriptor& diffusion, double q) {
  require_q(q);
  const double p = diffusion.p;
  if (!(p > 0.0)) throw Error("contraction_const requires p > 0");
  const double p1 = p + 1.0;
  auto h = [&](double w) {
    return (1.0 + w + 3.0 * w * w / p1) * weight(w, q) * std::exp(-w * w / (6.0 * p1));
  };
  ContractionConstant out;
  out.C = numerics::maximize(h, 0.0, 20.0 * std::sqrt(p1)).value;
  out.L0 = L0_for(diffusion);
  out.L1 = std::max(out.L0, std::pow(3.0, 1.0 / p1));
  return out;
}

ContractionConstant contraction_const(double p, double q) {
  return contraction_const(DiffusionDescriptor{p, PurePower{}}, q);
}

double rate_const_M(double p, double q) {
  require_q(q);
  if (!(p > 0.0)) throw Error("rate_const_M requires p > 0");
  const double p1 = p + 1.0;
  auto h = [&](double w) {
    return weight(w, q) * std::exp(-w * w / (2.0 * p1)) * (2.0 * w + w * w + 2.0 * w * w * w / p1);
  };
  return numerics::maximize(h, 0.0, 20.0 * std::sqrt(p1)).value;
}

int n0_for(const DiffusionDescriptor& diffusion, double L) {
  require_L(L);
  if (diffusion.is_pure()) return 0;
  const double bound = 1.0 / (2.0 * (diffusion.p + 1.0));
  int n0 = 0;
  for (int m = 0; m <= 64; ++m) {
    if (!(std::abs(r_ratio(diffusion, m * std::log(L))) < bound)) n0 = m + 1;
  }
  return n0;
}

double K_pq(const DiffusionDescriptor& diffusion, double q, double L) {
  require_L(L);
  double k = 0.0;
  for (int n = 1; n <= 32; ++n) k = std::max(k, gaussian_spectrum_norm(rg_fixed_point_width(diffusion, L, n), q));
  // Envelope over every width allowed by the two-sided bound on s_n(L)/L^{p+1}.
  const double p1 = diffusion.p + 1.0;
  const double lo = 1.0 / (6.0 * p1);
  const double hi = 3.0 / (2.0 * p1) + 1.0 / p1;
  constexpr int kScan = 200;
  for (int i = 0; i <= kScan; ++i) {
    const double kappa = lo + (hi - lo) * i / kScan;
    k = std::max(k, gaussian_spectrum_norm(kappa, q));
  }
  return k;
}

std::pair<double, double> delta_interval(const ProblemSpec& spec) {
  const double p = spec.p();
  const double lo = std::max(0.0, p + 4.0 + 2.0 * spec.reaction_exponent - spec.alpha() * (p + 1.0));
  return {lo, 1.0};
}

void check_delta(const ProblemSpec& spec, double delta) {
  const auto [lo, hi] = delta_interval(spec);
  if (!(delta > lo && delta < hi)) {
    throw InvalidDelta("delta = " + std::to_string(delta) + " must lie in (" + std::to_string(lo) + ", " +
                       std::to_string(hi) + ")");
  }
}

double default_delta(const ProblemSpec& spec) {
  const auto [lo, hi] = delta_interval(spec);
  if (!(lo < hi)) throw InvalidDelta("no admissible delta: the nonlinearity is not irrelevant");
  return lo < 0.5 ? 0.5 : 0.5 * (lo + hi);
}

double L_delta(const ProblemSpec& spec, double delta) {
  check_delta(spec, delta);
  const auto cc = contraction_const(spec.diffusion, spec.q);
  const double cpq = fixed_point_norm(spec.p(), spec.q);
  return std::max(cc.L1, std::pow(2.0 * cc.C * (1.0 + cpq), 2.0 / (spec.p() + delta)));
}

double const_G(double K_pq_value, double L, double delta) {
  require_L(L);
  return 1.0 + K_pq_value / (1.0 - std::pow(L, (delta - 1.0) / 2.0));
}

std::vector<double> G_sequence(const ProblemSpec& spec, double L, double delta, double K_pq_value, double f_norm,
                               int count) {
  require_L(L);
  std::vector<double> g;
  if (count <= 0) return g;
  g.reserve(static_cast<std::size_t>(count));
  const double e = coupling_exponent(spec);
  const double base = K_pq_value * (1.0 + C0(spec, L) * f_norm);
  g.push_back(std::pow(L, (delta - 1.0) / 2.0) + base);
  double tail = 0.0;
  for (int n = 1; n < count; ++n) {
    const double Gn = g.back();
    tail += C_n(spec, L, n) * Gn * Gn * std::pow(L, n * e) * f_norm;
    g.push_back(std::pow(L, (delta - 1.0) * (n + 1) / 2.0) + base + K_pq_value * tail);
  }
  return g;
}

namespace {

InequalityCheck less(std::string name, double lhs, double rhs, bool strict = true) {
  return {std::move(name), lhs, rhs, strict ? lhs < rhs : lhs <= rhs};
}

}  // namespace

CertificateBundle certify(const ProblemSpec& spec, double L, std::optional<double> delta_opt, double f_norm,
                          int n_eps) {
  require_L(L);
  if (!(f_norm >= 0.0) || !std::isfinite(f_norm)) throw Error("certify requires a finite data norm");
  const double delta = delta_opt ? *delta_opt : default_delta(spec);
  check_delta(spec, delta);

  CertificateBundle b;
  b.q = spec.q;
  b.p = spec.p();
  b.L = L;
  b.delta = delta;
  b.f_norm = f_norm;
  b.C_of_q = const_C(spec.q);
  b.C_q_embed = const_Cq_embed(spec.q);
  b.rho0 = working_rho0(spec);
  const SeriesSums sums = series_sums(spec.nonlinearity, spec.q, b.rho0);
  b.S0 = sums.S0;
  b.S1 = sums.S1;
  b.S2 = sums.S2;
  b.C0 = C0(spec, L);
  b.eps_local = eps_local(spec, L);
  double max_Cn = 0.0;
  double min_ratio = std::numeric_limits<double>::infinity(), max_ratio = 0.0;
  for (int n = 0; n < std::max(1, n_eps); ++n) {
    const double sn = s_n(spec, L, n);
    b.eps_n.push_back(eps_from_s(spec, L, sn));
    max_Cn = std::max(max_Cn, C_of_s(spec, L, sn));
    const double ratio = sn / std::pow(L, b.p + 1.0);
    min_ratio = std::min(min_ratio, ratio);
    max_ratio = std::max(max_ratio, ratio);
  }
  b.C_pq = fixed_point_norm(b.p, b.q);
  b.K_pq = K_pq(spec.diffusion, b.q, L);
  b.K = const_K(spec, L, b.K_pq);
  b.sigma = sigma(spec, L, b.K_pq);
  const auto cc = contraction_const(spec.diffusion, b.q);
  b.contraction_C = cc.C;
  b.L0 = cc.L0;
  b.L1 = cc.L1;
  b.M = rate_const_M(b.p, b.q);
  b.n0 = n0_for(spec.diffusion, L);
  b.L_delta = std::max(cc.L1, std::pow(2.0 * cc.C * (1.0 + b.C_pq), 2.0 / (b.p + delta)));
  b.G = const_G(b.K_pq, L, delta);
  b.eps_bar = std::min(b.sigma / b.G, 1.0 / (2.0 * b.K * b.G * b.G * std::pow(L, (1.0 - delta) / 2.0)));
  const auto gs = G_sequence(spec, L, delta, b.K_pq, f_norm, 64);
  b.G_max = *std::max_element(gs.begin(), gs.end());
  b.basin_ok = L > b.L_delta && f_norm < b.eps_bar;

  const double min_eps = *std::min_element(b.eps_n.begin(), b.eps_n.end());
  const double p1 = b.p + 1.0;
  b.inequalities = {
      less("L > L1", b.L1, L),
      less("L > L_delta", b.L_delta, L),
      less("||f|| < eps_bar", f_norm, b.eps_bar),
      less("K G^2 ||f|| < 1/(2 L^((1-delta)/2))", b.K * b.G * b.G * f_norm,
           0.5 / std::pow(L, (1.0 - delta) / 2.0)),
      less("||f|| < sigma / G", f_norm, b.sigma / b.G),
      less("eps_bar <= sigma", b.eps_bar, b.sigma, false),
      less("sigma <= min eps_n", b.sigma, min_eps, false),
      less("max C_n <= K", max_Cn, b.K, false),
      less("1/(6(p+1)) <= min s_n(L)/L^(p+1)", 1.0 / (6.0 * p1), min_ratio, false),
      less("max s_n(L)/L^(p+1) <= 3/(2(p+1))", max_ratio, 1.5 / p1, false),
      less("max G_n < G", b.G_max, b.G),
  };
  return b;
}

CertificateBundle basin_check(const GridFunction& f, const ProblemSpec& spec, double L,
                              std::optional<double> delta) {
  return certify(spec, L, delta, bq_norm(f, spec.q));
}

}  // namespace rgflow
