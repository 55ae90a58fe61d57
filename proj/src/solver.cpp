#include "rgflow/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "rgflow/certificates.hpp"
#include "rgflow/error.hpp"
#include "rgflow/numerics.hpp"

namespace rgflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_radius(const GridFunction& u, double guard, double t) {
  const double sup = u.sup_abs();
  if (!std::isfinite(sup)) throw RadiusExceeded("solution became non-finite at t = " + std::to_string(t));
  if (sup >= guard) {
    throw RadiusExceeded("sup|u| = " + std::to_string(sup) + " reached the working radius " +
                         std::to_string(guard) + " at t = " + std::to_string(t));
  }
}

}  // namespace

void validate(const SolverConfig& cfg) {
  if (cfg.substeps < 8) throw Error("solver.substeps must be >= 8");
  if (!(cfg.picard_tol > 0.0)) throw Error("solver.picard_tol must be > 0");
  if (cfg.picard_max_iters < 1) throw Error("solver.picard_max_iters must be >= 1");
  if (cfg.rho_guard && !(*cfg.rho_guard > 0.0)) throw Error("solver.rho_guard must be > 0");
}

double working_rho0(const ProblemSpec& spec) {
  const double rho = spec.nonlinearity.radius;
  if (!std::isfinite(rho)) return 1.0;
  return std::numbers::pi * rho / const_C(spec.q);
}

double effective_rho_guard(const ProblemSpec& spec, const SolverConfig& cfg) {
  if (cfg.rho_guard) return *cfg.rho_guard;
  if (std::isfinite(spec.nonlinearity.radius)) return 0.5 * working_rho0(spec);
  return kInf;
}

void Trajectory::append(double t, GridFunction slice) {
  const SpectralFunction spectrum = to_spectrum(slice);
  append(t, std::move(slice), spectrum);
}

void Trajectory::append(double t, GridFunction slice, const SpectralFunction& spectrum) {
  if (!times.empty() && !(t > times.back())) throw Error("trajectory times must increase");
  times.push_back(t);
  sup_abs.push_back(slice.sup_abs());
  mass.push_back(spectrum.zero_frequency().real());
  bq.push_back(bq_norm(spectrum, q));
  slices.push_back(std::move(slice));
}

double Trajectory::sup_norm() const {
  double m = 0.0;
  for (double v : bq) m = std::max(m, v);
  return m;
}

GridFunction linear_solve(const GridFunction& f, const ProblemSpec& spec, double t) {
  const double s = s_of(spec.diffusion, t);
  if (s == 0.0) return f;
  return from_spectrum(heat_propagate(to_spectrum(f), s));
}

GridFunction nonlinear_rhs(const GridFunction& u, const ProblemSpec& spec, double t, const SolverConfig& cfg) {
  const double guard = effective_rho_guard(spec, cfg);
  check_radius(u, guard, t);
  GridFunction out(u.grid);
  if (spec.lambda == 0.0) return out;
  const double factor = spec.lambda * spec.d(t);
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    out.values[i] = factor * spec.nonlinearity.evaluate(u.values[i]);
  }
  return out;
}

PicardResult picard_solve(const GridFunction& f, const ProblemSpec& spec, double L, const SolverConfig& cfg) {
  validate(cfg);
  if (!(L > 1.0)) throw Error("picard_solve requires L > 1");
  const std::vector<double> tau = numerics::time_nodes(1.0, L, cfg.substeps);
  const std::size_t m_count = tau.size();
  std::vector<double> s(m_count);
  for (std::size_t m = 0; m < m_count; ++m) s[m] = s_of(spec.diffusion, tau[m]);

  const SpectralFunction f_hat = to_spectrum(f);
  std::vector<SpectralFunction> linear(m_count);
  for (std::size_t m = 0; m < m_count; ++m) linear[m] = heat_propagate(f_hat, s[m]);

  std::vector<SpectralFunction> current = linear;
  std::vector<SpectralFunction> source(m_count), duhamel(m_count);
  PicardResult result;

  while (true) {
    if (result.iterations >= cfg.picard_max_iters) {
      throw NoContraction("Picard iteration did not converge in " + std::to_string(cfg.picard_max_iters) +
                          " iterations (last residual " +
                          (result.residuals.empty() ? std::string("n/a") : std::to_string(result.residuals.back())) +
                          ")");
    }
    for (std::size_t m = 0; m < m_count; ++m) {
      source[m] = to_spectrum(nonlinear_rhs(from_spectrum(current[m]), spec, tau[m], cfg));
    }
    // Composite Simpson over [tau_0, tau_m], advanced recursively: the kernel
    // e^{-(s_m - s(tau)) w^2} factorizes across nodes, so earlier partial
    // integrals are carried forward with heat_propagate.
    duhamel[0] = SpectralFunction(f.grid);
    if (m_count > 1) {
      const double h = tau[1] - tau[0];
      duhamel[1] = heat_propagate(source[0], s[1] - s[0]);
      duhamel[1] *= 0.5 * h;
      duhamel[1].add_scaled(0.5 * h, source[1]);
    }
    for (std::size_t m = 2; m < m_count; ++m) {
      const bool even = m % 2 == 0;
      const auto w = even ? numerics::simpson_pair_weights(tau[m - 2], tau[m - 1], tau[m])
                          : numerics::last_interval_weights(tau[m - 2], tau[m - 1], tau[m]);
      const std::size_t base = even ? m - 2 : m - 1;
      SpectralFunction acc = heat_propagate(duhamel[base], s[m] - s[base]);
      acc.add_scaled(w[0], heat_propagate(source[m - 2], s[m] - s[m - 2]));
      acc.add_scaled(w[1], heat_propagate(source[m - 1], s[m] - s[m - 1]));
      acc.add_scaled(w[2], source[m]);
      duhamel[m] = std::move(acc);
    }

    double residual = 0.0;
    for (std::size_t m = 0; m < m_count; ++m) {
      SpectralFunction next = linear[m] + duhamel[m];
      residual = std::max(residual, bq_norm(next - current[m], spec.q));
      current[m] = std::move(next);
    }
    ++result.iterations;
    result.residuals.push_back(residual);
    if (!std::isfinite(residual)) throw NoContraction("Picard iteration diverged (non-finite residual)");
    if (residual < cfg.picard_tol) break;
  }

  result.trajectory.spec = spec;
  result.trajectory.q = spec.q;
  for (std::size_t m = 0; m < m_count; ++m) {
    result.trajectory.append(tau[m], from_spectrum(current[m]), current[m]);
  }
  result.duhamel_final = from_spectrum(duhamel.back());
  return result;
}

Trajectory etd_evolve(const GridFunction& f, const ProblemSpec& spec, double t0, double t1, const SolverConfig& cfg) {
  validate(cfg);
  if (!(t0 >= 1.0) || !(t1 > t0)) throw Error("etd_evolve requires 1 <= t0 < t1");
  const std::vector<double> nodes = numerics::time_nodes(t0, t1, cfg.substeps);
  const Grid& grid = f.grid;
  const std::size_t n = grid.size();

  Trajectory traj;
  traj.spec = spec;
  traj.q = spec.q;
  traj.append(t0, f);

  SpectralFunction u_hat = to_spectrum(f);
  GridFunction u = f;
  double s_prev = s_of(spec.diffusion, t0);
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
    const double ta = nodes[k], tb = nodes[k + 1];
    const double dt = tb - ta;
    const double s_next = s_of(spec.diffusion, tb);
    const double ds = s_next - s_prev;
    s_prev = s_next;

    const bool nonlinear = spec.lambda != 0.0;
    SpectralFunction f_hat;
    if (nonlinear) f_hat = to_spectrum(nonlinear_rhs(u, spec, ta, cfg));
    for (std::size_t i = 0; i < n; ++i) {
      const double w = grid.frequency(i);
      const double z = ds * w * w;
      u_hat.coeffs[i] *= std::exp(-z);
      if (nonlinear) {
        const double phi = z > 1e-300 ? dt * (-std::expm1(-z)) / z : dt;
        u_hat.coeffs[i] += phi * f_hat.coeffs[i];
      }
    }
    u = from_spectrum(u_hat);
    traj.append(tb, u);
  }
  return traj;
}

namespace {

// Four-point Lagrange interpolation of equispaced periodic-free samples.
double cubic_at(const GridFunction& f, double x) {
  const Grid& g = f.grid;
  const double pos = (x - g.x(0)) / g.dx();
  const long n = static_cast<long>(g.size());
  long i = static_cast<long>(std::floor(pos));
  i = std::clamp(i, 1L, n - 3);
  const double u = pos - static_cast<double>(i);
  auto at = [&](long j) { return (j >= 0 && j < n) ? f.values[j] : 0.0; };
  const double y0 = at(i - 1), y1 = at(i), y2 = at(i + 1), y3 = at(i + 2);
  return y0 * (-u * (u - 1) * (u - 2) / 6.0) + y1 * ((u + 1) * (u - 1) * (u - 2) / 2.0) +
         y2 * (-(u + 1) * u * (u - 2) / 2.0) + y3 * ((u + 1) * u * (u - 1) / 6.0);
}

// Solves the constant-coefficient tridiagonal system (sub = sup = b, diag = a)
// in place via the Thomas algorithm.
void solve_tridiagonal(double a, double b, std::vector<double>& rhs, std::vector<double>& scratch) {
  const std::size_t n = rhs.size();
  scratch.resize(n);
  scratch[0] = b / a;
  rhs[0] /= a;
  for (std::size_t i = 1; i < n; ++i) {
    const double m = a - b * scratch[i - 1];
    scratch[i] = b / m;
    rhs[i] = (rhs[i] - b * rhs[i - 1]) / m;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= scratch[i] * rhs[i + 1];
}

}  // namespace

GridFunction restrict_to(const GridFunction& fine, const Grid& coarse) {
  const Grid& g = fine.grid;
  if (g.half_width() != coarse.half_width() || g.size() % coarse.size() != 0) {
    throw Error("restrict_to: coarse grid is not a sub-lattice of the fine grid");
  }
  const std::size_t stride = g.size() / coarse.size();
  GridFunction out(coarse);
  for (std::size_t i = 0; i < coarse.size(); ++i) out.values[i] = fine.values[i * stride];
  return out;
}

GridFunction oracle_solve(const GridFunction& f, const ProblemSpec& spec, double t1, const Grid& fine_grid,
                          const OracleConfig& cfg) {
  if (!(t1 > 1.0)) throw Error("oracle_solve requires t1 > 1");
  if (cfg.steps_per_unit_time < 1) throw Error("oracle steps must be positive");

  GridFunction u(fine_grid);
  if (f.grid == fine_grid) {
    u = f;
  } else {
    for (std::size_t i = 0; i < fine_grid.size(); ++i) u.values[i] = cubic_at(f, fine_grid.x(i));
  }
  // Node 0 sits on x = -X; it and the implicit node at +X are held at zero.
  u.values[0] = 0.0;

  SolverConfig guard_cfg;
  guard_cfg.rho_guard = cfg.rho_guard;
  const double guard = effective_rho_guard(spec, guard_cfg);

  const std::size_t n = fine_grid.size();
  const std::size_t interior = n - 1;
  const double dx2 = fine_grid.dx() * fine_grid.dx();
  const long steps = std::max(1L, static_cast<long>(std::ceil(cfg.steps_per_unit_time * (t1 - 1.0))));
  const double dt = (t1 - 1.0) / static_cast<double>(steps);

  auto laplacian = [&](const std::vector<double>& v, std::size_t j) {
    const double left = v[j - 1];
    const double right = j + 1 < n ? v[j + 1] : 0.0;
    return (left - 2.0 * v[j] + right) / dx2;
  };
  auto source = [&](const std::vector<double>& v, double t, std::size_t j) {
    return spec.lambda * spec.d(t) * spec.nonlinearity.evaluate(v[j]);
  };

  std::vector<double> half(n, 0.0), rhs(interior), scratch;
  for (long k = 0; k < steps; ++k) {
    const double ta = 1.0 + k * dt;
    const double tb = (k + 1 == steps) ? t1 : ta + dt;
    const double tm = 0.5 * (ta + tb);
    const double ds = s_of(spec.diffusion, tb) - s_of(spec.diffusion, ta);
    const bool nonlinear = spec.lambda != 0.0;

    if (nonlinear) check_radius(u, guard, ta);
    if (nonlinear) {
      const double ca = spec.diffusion.c(ta);
      for (std::size_t j = 1; j < n; ++j) {
        half[j] = u.values[j] + 0.5 * dt * (ca * laplacian(u.values, j) + source(u.values, ta, j));
      }
    }
    for (std::size_t j = 1; j < n; ++j) {
      rhs[j - 1] = u.values[j] + 0.5 * ds * laplacian(u.values, j);
      if (nonlinear) rhs[j - 1] += dt * source(half, tm, j);
    }
    const double r = 0.5 * ds / dx2;
    solve_tridiagonal(1.0 + 2.0 * r, -r, rhs, scratch);
    for (std::size_t j = 1; j < n; ++j) u.values[j] = rhs[j - 1];
  }
  return u;
}

}  // namespace rgflow
