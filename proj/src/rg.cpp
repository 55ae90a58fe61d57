#include "rgflow/rg.hpp"

#include <cmath>
#include <numbers>

#include "rgflow/certificates.hpp"
#include "rgflow/error.hpp"

namespace rgflow {

GridFunction fixed_point_profile(double p, const Grid& grid) {
  if (!(p >= 0.0)) throw Error("fixed_point_profile requires p >= 0");
  return sample(FixedPointProfile{p, 1.0}, grid);
}

double linear_rg_width(const ProblemSpec& spec, double L, int n) {
  if (!(L > 1.0)) throw Error("linear RG requires L > 1");
  if (n < 0) throw Error("linear RG requires n >= 0");
  return s_ratio(rescale_coefficients(spec, n, L).diffusion, std::log(L));
}

SpectralFunction linear_rg_spectrum(const GridFunction& g, double L, int n, const ProblemSpec& spec) {
  const double kappa = linear_rg_width(spec, L, n);
  const double beta = std::pow(L, -(spec.p() + 1.0) / 2.0);
  return heat_propagate(dilate(g, beta), kappa);
}

GridFunction linear_rg_apply(const GridFunction& g, double L, int n, const ProblemSpec& spec) {
  return from_spectrum(linear_rg_spectrum(g, L, n, spec));
}

GridFunction reference_profile(const ProblemSpec& spec, const Grid& grid, double L, int n) {
  const double kappa = rg_fixed_point_width(spec.diffusion, L, n);
  SpectralFunction F(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double w = grid.frequency(i);
    const double e = std::exp(-kappa * w * w);
    F.coeffs[i] = e;
    F.deriv_coeffs[i] = -2.0 * kappa * w * e;
  }
  return from_spectrum(F);
}

RGApplyResult rg_apply_detail(const GridFunction& f_n, int n, const ProblemSpec& spec, double L,
                              const SolverConfig& cfg, bool strict) {
  if (!(L > 1.0)) throw Error("rg_apply requires L > 1");
  if (strict) {
    const double norm = bq_norm(f_n, spec.q);
    const double eps = eps_n(spec, L, n);
    if (!(norm < eps)) {
      throw InadmissibleData("||f_" + std::to_string(n) + "|| = " + std::to_string(norm) + " >= eps_" +
                             std::to_string(n) + " = " + std::to_string(eps));
    }
  }
  const ProblemSpec spec_n = rescale_coefficients(spec, n, L);
  PicardResult solved = picard_solve(f_n, spec_n, L, cfg);
  const double beta = std::pow(L, -(spec.p() + 1.0) / 2.0);
  RGApplyResult out;
  // Linear part in closed form; only the Duhamel term is resampled.
  out.f_next = linear_rg_apply(f_n, L, n, spec);
  if (spec_n.lambda != 0.0) out.f_next += from_spectrum(dilate(solved.duhamel_final, beta));
  out.nu_zero = solved.duhamel_final.mass();
  out.picard_iterations = solved.iterations;
  return out;
}

GridFunction rg_apply(const GridFunction& f_n, int n, const ProblemSpec& spec, double L, const SolverConfig& cfg,
                      bool strict) {
  return rg_apply_detail(f_n, n, spec, L, cfg, strict).f_next;
}

std::pair<double, GridFunction> decompose(const GridFunction& f_n, int n, double L, const ProblemSpec& spec) {
  const double A = to_spectrum(f_n).zero_frequency().real();
  GridFunction g = f_n;
  g -= A * reference_profile(spec, f_n.grid, L, n);
  return {A, std::move(g)};
}

namespace {

RGStep make_step(const GridFunction& f_n, int n, const ProblemSpec& spec, double L) {
  RGStep step;
  step.n = n;
  step.f_n = f_n;
  auto [A, g] = decompose(f_n, n, L, spec);
  step.A_n = A;
  const SpectralFunction g_hat = to_spectrum(g);
  step.g_norm = bq_norm(g_hat, spec.q);
  step.g_zero = g_hat.zero_frequency().real();
  step.lambda_n = n == 0 ? spec.lambda : rescale_coefficients(spec, n, L).lambda;
  step.f_norm = bq_norm(f_n, spec.q);
  step.eps_n = eps_n(spec, L, n);
  step.admissible = step.f_norm < step.eps_n;
  return step;
}

template <class E>
[[noreturn]] void rethrow_at(const E& e, int n) {
  throw E("RG step " + std::to_string(n) + ": " + e.what());
}

}  // namespace

RGTrace rg_flow(const GridFunction& f, const ProblemSpec& spec, double L, int n_steps, const SolverConfig& cfg,
                const RGOptions& options) {
  if (n_steps < 1) throw Error("rg_flow requires at least one step");
  if (!(L > 1.0)) throw Error("rg_flow requires L > 1");
  RGTrace trace;
  trace.spec = spec;
  trace.L = L;
  trace.steps.push_back(make_step(f, 0, spec, L));
  for (int n = 0; n < n_steps; ++n) {
    RGApplyResult next;
    try {
      next = rg_apply_detail(trace.steps.back().f_n, n, spec, L, cfg, options.strict);
    } catch (const InadmissibleData& e) {
      rethrow_at(e, n);
    } catch (const Error& e) {
      if (!options.halt_on_error) {
        if (auto* nc = dynamic_cast<const NoContraction*>(&e)) rethrow_at(*nc, n);
        if (auto* re = dynamic_cast<const RadiusExceeded*>(&e)) rethrow_at(*re, n);
        rethrow_at(e, n);
      }
      trace.halted = true;
      trace.diagnostic = "RG step " + std::to_string(n) + ": " + e.what();
      break;
    }
    trace.steps.back().nu_zero = next.nu_zero;
    trace.steps.back().picard_iterations = next.picard_iterations;
    trace.steps.push_back(make_step(next.f_next, n + 1, spec, L));
  }
  trace.A_limit_estimate = trace.steps.back().A_n;
  return trace;
}

}  // namespace rgflow
