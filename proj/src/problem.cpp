#include "rgflow/problem.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>

#include "rgflow/error.hpp"

namespace rgflow {

namespace {

// (t^k - 1)/k, continuous through k = 0.
double power_increment(double t, double k) {
  const double lt = std::log(t);
  if (std::abs(k) < 1e-14) return lt;
  return std::expm1(k * lt) / k;
}

struct Rational {
  std::int64_t num;
  std::int64_t den;
};

// Recovers x as n/d with d <= 10^6 when x is that fraction to within a few ulp.
std::optional<Rational> as_rational(double x) {
  if (!std::isfinite(x)) return std::nullopt;
  constexpr std::int64_t kMaxDen = 1000000;
  std::int64_t h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double v = x;
  for (int it = 0; it < 40; ++it) {
    const double a = std::floor(v);
    if (std::abs(a) > 1e12) return std::nullopt;
    const auto ai = static_cast<std::int64_t>(a);
    const std::int64_t h2 = ai * h1 + h0;
    const std::int64_t k2 = ai * k1 + k0;
    if (k2 > kMaxDen) break;
    h0 = h1;
    h1 = h2;
    k0 = k1;
    k1 = k2;
    const double approx = static_cast<double>(h1) / static_cast<double>(k1);
    if (std::abs(approx - x) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x)))
      return Rational{h1, k1};
    const double frac = v - a;
    if (frac == 0.0) break;
    v = 1.0 / frac;
  }
  return std::nullopt;
}

}  // namespace

NonlinearitySeries NonlinearitySeries::from_terms(std::vector<PowerTerm> terms, double radius) {
  NonlinearitySeries s;
  s.terms = std::move(terms);
  s.radius = radius;
  s.min_degree = s.terms.empty() ? 0.0
                                 : std::min_element(s.terms.begin(), s.terms.end(),
                                                    [](const PowerTerm& a, const PowerTerm& b) {
                                                      return a.degree < b.degree;
                                                    })->degree;
  return s;
}

NonlinearitySeries NonlinearitySeries::monomial(double degree, double coefficient, double radius) {
  return from_terms({PowerTerm{degree, coefficient}}, radius);
}

double NonlinearitySeries::evaluate(double u) const {
  double sum = 0.0;
  for (const auto& term : terms) {
    const double j = term.degree;
    if (j == std::floor(j) && std::abs(j) < 64) {
      sum += term.coefficient * std::pow(u, static_cast<int>(j));
    } else {
      sum += term.coefficient * std::copysign(std::pow(std::abs(u), j), u);
    }
  }
  return sum;
}

double DiffusionDescriptor::c(double t) const {
  const double base = std::pow(t, p);
  if (const auto* pp = std::get_if<PerturbedPower>(&form)) {
    return base * (1.0 + pp->amplitude * std::pow(t, -pp->decay));
  }
  return base;
}

double ProblemSpec::d(double t) const {
  return reaction_exponent == 0.0 ? 1.0 : std::pow(t, reaction_exponent);
}

void validate(const ProblemSpec& spec, Admissibility mode) {
  const bool theorem = mode == Admissibility::Theorem;
  const double p = spec.diffusion.p;
  if (!std::isfinite(p) || (theorem ? p <= 0.0 : p < 0.0)) {
    throw InvalidHypothesis("H2", theorem ? "p must be > 0" : "p must be >= 0");
  }
  if (const auto* pp = std::get_if<PerturbedPower>(&spec.diffusion.form)) {
    if (!(pp->decay > 0.0)) throw InvalidHypothesis("H2", "perturbation decay must be > 0");
    if (!(pp->amplitude > -1.0)) throw InvalidHypothesis("H2", "c(t) must stay positive (amplitude > -1)");
  }
  if (!(spec.q > 1.0) || !std::isfinite(spec.q)) throw InvalidHypothesis("H1", "q must be > 1");
  if (!(std::abs(spec.lambda) <= 1.0)) throw InvalidHypothesis("lambda range", "|lambda| must be <= 1");
  if (!std::isfinite(spec.reaction_exponent)) throw InvalidHypothesis("H3", "reaction exponent must be finite");

  const auto& nl = spec.nonlinearity;
  if (nl.terms.empty()) throw InvalidHypothesis("H3", "nonlinearity needs at least one term");
  if (!(nl.radius > 0.0)) throw InvalidHypothesis("H3", "analyticity radius must be > 0");
  if (!(nl.min_degree > 1.0)) throw InvalidHypothesis("H3", "alpha must be > 1");
  for (const auto& term : nl.terms) {
    if (!std::isfinite(term.coefficient)) throw InvalidHypothesis("H3", "coefficients must be finite");
    if (term.degree < nl.min_degree) throw InvalidHypothesis("H3", "degree below alpha");
    if (theorem && (term.degree != std::floor(term.degree) || term.degree < 2.0)) {
      throw InvalidHypothesis("H3", "degrees must be integers >= 2");
    }
  }
}

ProblemSpec make_problem(const DiffusionDescriptor& diffusion, const NonlinearitySeries& nonlinearity,
                         double lambda, double q, double reaction_exponent, Admissibility mode) {
  ProblemSpec spec{diffusion, nonlinearity, lambda, q, reaction_exponent};
  validate(spec, mode);
  return spec;
}

std::string to_string(Criticality c) {
  switch (c) {
    case Criticality::Supercritical: return "supercritical";
    case Criticality::Critical: return "critical";
    case Criticality::Subcritical: return "subcritical";
  }
  return "unknown";
}

CriticalityClass classify_criticality(const ProblemSpec& spec) {
  const double p = spec.diffusion.p;
  const double r = spec.reaction_exponent;
  const double alpha = spec.alpha();
  const double alpha_c = (p + 3.0 + 2.0 * r) / (p + 1.0);

  // alpha (p+1) versus p + 3 + 2r, exactly when all three inputs are small rationals.
  int cmp = 0;
  const auto pr = as_rational(p), rr = as_rational(r), ar = as_rational(alpha);
  if (pr && rr && ar) {
    using i128 = __int128;
    // alpha (p+1) = an (pn + pd) / (ad pd);  p + 3 + 2r = (pn rd + 3 pd rd + 2 rn pd) / (pd rd)
    const i128 lhs = i128(ar->num) * (pr->num + pr->den) * rr->den;
    const i128 rhs = (i128(pr->num) * rr->den + i128(3) * pr->den * rr->den + i128(2) * rr->num * pr->den) * ar->den;
    cmp = lhs > rhs ? 1 : (lhs < rhs ? -1 : 0);
  } else {
    const double diff = alpha - alpha_c;
    cmp = std::abs(diff) <= 1e-12 * std::max(1.0, std::abs(alpha_c)) ? 0 : (diff > 0 ? 1 : -1);
  }
  const Criticality tag = cmp > 0 ? Criticality::Supercritical
                                  : (cmp == 0 ? Criticality::Critical : Criticality::Subcritical);
  return {tag, alpha_c};
}

double s_of(const DiffusionDescriptor& diffusion, double t) {
  if (!(t >= 1.0)) throw Error("s_of requires t >= 1");
  const double p1 = diffusion.p + 1.0;
  const double base = power_increment(t, p1);
  if (const auto* pp = std::get_if<PerturbedPower>(&diffusion.form)) {
    return base + pp->amplitude * power_increment(t, p1 - pp->decay);
  }
  return base;
}

double r_of(const DiffusionDescriptor& diffusion, double t) {
  if (!(t >= 1.0)) throw Error("r_of requires t >= 1");
  if (const auto* pp = std::get_if<PerturbedPower>(&diffusion.form)) {
    return pp->amplitude * power_increment(t, diffusion.p + 1.0 - pp->decay);
  }
  return 0.0;
}

double r_ratio(const DiffusionDescriptor& diffusion, double log_T) {
  if (!(log_T >= 0.0)) throw Error("r_ratio requires T >= 1");
  const auto* pp = std::get_if<PerturbedPower>(&diffusion.form);
  if (pp == nullptr) return 0.0;
  const double p1 = diffusion.p + 1.0;
  const double k = p1 - pp->decay;
  // a (T^k - 1) / (k T^{p+1})
  if (std::abs(k) < 1e-14) return pp->amplitude * log_T * std::exp(-p1 * log_T);
  return pp->amplitude * (std::exp((k - p1) * log_T) - std::exp(-p1 * log_T)) / k;
}

double s_ratio(const DiffusionDescriptor& diffusion, double log_T) {
  const double p1 = diffusion.p + 1.0;
  return -std::expm1(-p1 * log_T) / p1 + r_ratio(diffusion, log_T);
}

double coupling_exponent(const ProblemSpec& spec) {
  const double p = spec.diffusion.p;
  return (p + 3.0 + 2.0 * spec.reaction_exponent - spec.alpha() * (p + 1.0)) / 2.0;
}

ProblemSpec rescale_coefficients(const ProblemSpec& spec, int n, double L) {
  if (n < 0) throw Error("rescale_coefficients requires n >= 0");
  if (!(L > 1.0)) throw Error("rescale_coefficients requires L > 1");
  if (n == 0) return spec;
  ProblemSpec out = spec;
  const double p = spec.diffusion.p;
  if (auto* pp = std::get_if<PerturbedPower>(&out.diffusion.form)) {
    pp->amplitude *= std::pow(L, -n * pp->decay);
  }
  out.lambda = spec.lambda * std::pow(L, n * coupling_exponent(spec));
  for (auto& term : out.nonlinearity.terms) {
    term.coefficient *= std::pow(L, n * (spec.alpha() - term.degree) * (p + 1.0) / 2.0);
  }
  return out;
}

}  // namespace rgflow
