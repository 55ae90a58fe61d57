#pragma once

#include <limits>
#include <string>
#include <variant>
#include <vector>

namespace rgflow {

inline constexpr double kInfiniteRadius = std::numeric_limits<double>::infinity();

/// One term a_j u^j of the nonlinearity.
struct PowerTerm {
  double degree = 3.0;
  double coefficient = 1.0;
};

/// F(u) = sum_j a_j u^j with lowest exponent `min_degree` (alpha) and
/// analyticity radius `radius` (may be kInfiniteRadius).
struct NonlinearitySeries {
  double min_degree = 3.0;
  std::vector<PowerTerm> terms;
  double radius = kInfiniteRadius;

  /// Builds a series whose min_degree is the smallest listed degree.
  static NonlinearitySeries from_terms(std::vector<PowerTerm> terms,
                                       double radius = kInfiniteRadius);
  /// Single monomial a*u^degree.
  static NonlinearitySeries monomial(double degree, double coefficient = 1.0,
                                     double radius = kInfiniteRadius);

  /// sum_j a_j u^j, using sign(u)|u|^j for non-integer degrees.
  double evaluate(double u) const;
};

/// c(t) = t^p
struct PurePower {};

/// c(t) = t^p (1 + amplitude * t^-decay)
struct PerturbedPower {
  double amplitude = 0.0;
  double decay = 1.0;
};

struct DiffusionDescriptor {
  double p = 1.0;
  std::variant<PurePower, PerturbedPower> form = PurePower{};

  bool is_pure() const { return std::holds_alternative<PurePower>(form); }
  double c(double t) const;
};

struct ProblemSpec {
  DiffusionDescriptor diffusion;
  NonlinearitySeries nonlinearity;
  double lambda = 1.0;
  double q = 2.0;
  /// Exponent of the reaction factor d(t) = t^r multiplying F.
  double reaction_exponent = 0.0;

  double p() const { return diffusion.p; }
  double alpha() const { return nonlinearity.min_degree; }
  double d(double t) const;
};

/// Which hypotheses make_problem enforces. `Exploratory` relaxes (H2) to
/// p >= 0 and (H3) to real degrees > 1, for the critical/subcritical probes
/// that lie outside the theorem.
enum class Admissibility { Theorem, Exploratory };

ProblemSpec make_problem(const DiffusionDescriptor& diffusion, const NonlinearitySeries& nonlinearity,
                         double lambda, double q, double reaction_exponent = 0.0,
                         Admissibility mode = Admissibility::Theorem);

/// Re-runs the make_problem checks on an existing spec.
void validate(const ProblemSpec& spec, Admissibility mode = Admissibility::Theorem);

enum class Criticality { Supercritical, Critical, Subcritical };

struct CriticalityClass {
  Criticality tag;
  double alpha_critical;
};

std::string to_string(Criticality c);

CriticalityClass classify_criticality(const ProblemSpec& spec);

/// s(t) = int_1^t c(v) dv, closed form for both built-in families.
double s_of(const DiffusionDescriptor& diffusion, double t);

/// r(t) = s(t) - (t^{p+1} - 1)/(p+1); identically zero for PurePower.
double r_of(const DiffusionDescriptor& diffusion, double t);

/// r(T) / T^{p+1}, evaluated in the log domain so that T = L^n may be huge.
double r_ratio(const DiffusionDescriptor& diffusion, double log_T);

/// s(T) / T^{p+1}, likewise in the log domain.
double s_ratio(const DiffusionDescriptor& diffusion, double log_T);

/// Exponent e with lambda_n = L^{n e} lambda, i.e. [p + 3 + 2r - alpha(p+1)] / 2.
double coupling_exponent(const ProblemSpec& spec);

/// Coefficients of the n-times rescaled IVP on [1, L]:
/// c_n(t) = L^{-np} c(L^n t), lambda_n = L^{n e} lambda,
/// a_j -> L^{n(alpha - j)(p+1)/2} a_j.
ProblemSpec rescale_coefficients(const ProblemSpec& spec, int n, double L);

}  // namespace rgflow
