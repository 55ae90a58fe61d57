#pragma once

#include <optional>
#include <vector>

#include "rgflow/problem.hpp"
#include "rgflow/spectral.hpp"

namespace rgflow {

struct SolverConfig {
  /// Time nodes per unit of t on short windows, per doubling of t on long ones.
  int substeps = 32;
  double picard_tol = 1e-10;
  int picard_max_iters = 50;
  /// Bound on sup|u| while evaluating F. Unset: 0.5 * rho0 for a finite
  /// analyticity radius, no bound for entire F.
  std::optional<double> rho_guard;
};

void validate(const SolverConfig& cfg);

/// Working analyticity margin rho0: pi * rho / C(q) for finite rho, 1 for entire F.
double working_rho0(const ProblemSpec& spec);

/// The sup|u| bound actually enforced (infinity when none).
double effective_rho_guard(const ProblemSpec& spec, const SolverConfig& cfg);

/// Time-stamped solution slices with per-slice diagnostics.
struct Trajectory {
  ProblemSpec spec;
  double q = 2.0;
  std::vector<double> times;
  std::vector<GridFunction> slices;
  std::vector<double> sup_abs;
  std::vector<double> mass;
  std::vector<double> bq;

  void append(double t, GridFunction slice);
  void append(double t, GridFunction slice, const SpectralFunction& spectrum);
  std::size_t size() const { return times.size(); }
  const GridFunction& final_slice() const { return slices.back(); }
  /// sup over stored times of the B_q norm, ||u||_L.
  double sup_norm() const;
};

/// u_f(., t): the exact heat evolution of f with diffusion time s(t).
GridFunction linear_solve(const GridFunction& f, const ProblemSpec& spec, double t);

/// lambda d(t) F(u), pointwise.
GridFunction nonlinear_rhs(const GridFunction& u, const ProblemSpec& spec, double t,
                           const SolverConfig& cfg = {});

struct PicardResult {
  Trajectory trajectory;
  /// N(u)(., L), the Duhamel part of the converged solution at the final time.
  GridFunction duhamel_final;
  int iterations = 0;
  /// ||u^{(k+1)} - u^{(k)}||_L for each performed iteration.
  std::vector<double> residuals;
};

/// Fixed point of u = u_f + N(u) on [1, L], seeded with u_f; the Duhamel
/// integral is evaluated in frequency space by composite Simpson over the
/// time nodes.
PicardResult picard_solve(const GridFunction& f, const ProblemSpec& spec, double L, const SolverConfig& cfg = {});

/// First-order exponential time differencing from f = u(., t0) to t1.
Trajectory etd_evolve(const GridFunction& f, const ProblemSpec& spec, double t0, double t1,
                      const SolverConfig& cfg = {});

struct OracleConfig {
  /// Crank-Nicolson steps per unit time.
  int steps_per_unit_time = 512;
  std::optional<double> rho_guard;
};

/// Real-space Crank-Nicolson reference solution on `fine_grid` with homogeneous
/// Dirichlet conditions at +-X and an explicit midpoint step for lambda F.
/// `f` is interpolated (cubic, real space) onto the fine grid when the grids differ.
GridFunction oracle_solve(const GridFunction& f, const ProblemSpec& spec, double t1, const Grid& fine_grid,
                          const OracleConfig& cfg = {});

/// Samples of `fine` at the nodes of `coarse`, which must be a sub-lattice.
GridFunction restrict_to(const GridFunction& fine, const Grid& coarse);

}  // namespace rgflow
