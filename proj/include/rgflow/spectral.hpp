#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

namespace rgflow {

using Complex = std::complex<double>;

/// Uniform periodic grid on [-X, X) with N = 2^k nodes x_i = -X + i dx.
///
/// Frequencies are stored in FFT order: index i < N/2 holds w = i dw, index
/// i >= N/2 holds w = (i - N) dw, with dw = pi / X.
class Grid {
 public:
  Grid() = default;
  Grid(double half_width, std::size_t n_points);

  double half_width() const { return half_width_; }
  std::size_t size() const { return n_points_; }
  double dx() const { return 2.0 * half_width_ / static_cast<double>(n_points_); }
  double dw() const;
  double x(std::size_t i) const { return -half_width_ + static_cast<double>(i) * dx(); }
  /// Signed frequency index k in {-N/2, ..., N/2 - 1} for storage slot i.
  long wave_index(std::size_t i) const;
  double frequency(std::size_t i) const;

  bool operator==(const Grid& other) const = default;

 private:
  double half_width_ = 40.0;
  std::size_t n_points_ = 4096;
};

/// Real-space samples u(x_i).
struct GridFunction {
  Grid grid;
  std::vector<double> values;

  GridFunction() = default;
  GridFunction(Grid g, std::vector<double> v);
  explicit GridFunction(const Grid& g) : grid(g), values(g.size(), 0.0) {}

  /// dx * sum u_i, the discrete integral of u.
  double mass() const;
  double sup_abs() const;

  GridFunction& operator+=(const GridFunction& other);
  GridFunction& operator-=(const GridFunction& other);
  GridFunction& operator*=(double s);
};

GridFunction operator+(GridFunction a, const GridFunction& b);
GridFunction operator-(GridFunction a, const GridFunction& b);
GridFunction operator*(double s, GridFunction a);

/// Frequency-space pair (f^(w_k), f^'(w_k)) with continuum normalization
/// f^(w) ~ int f(x) e^{-iwx} dx, so coeffs at w = 0 is the mass.
struct SpectralFunction {
  Grid grid;
  std::vector<Complex> coeffs;
  std::vector<Complex> deriv_coeffs;

  SpectralFunction() = default;
  explicit SpectralFunction(const Grid& g)
      : grid(g), coeffs(g.size(), Complex{}), deriv_coeffs(g.size(), Complex{}) {}

  Complex zero_frequency() const { return coeffs.front(); }

  SpectralFunction& operator+=(const SpectralFunction& other);
  SpectralFunction& operator-=(const SpectralFunction& other);
  SpectralFunction& operator*=(double s);
  /// this += s * other
  SpectralFunction& add_scaled(double s, const SpectralFunction& other);
};

SpectralFunction operator+(SpectralFunction a, const SpectralFunction& b);
SpectralFunction operator-(SpectralFunction a, const SpectralFunction& b);

// Built-in initial data families.
struct Gaussian {
  double amplitude = 1.0;
  double sigma = 1.0;
  double center = 0.0;
};
/// sqrt((p+1)/4pi) exp(-(p+1) x^2 / 4), times `amplitude`.
struct FixedPointProfile {
  double p = 1.0;
  double amplitude = 1.0;
};
/// amplitude * exp(1 - 1/(1 - y^2)) for y = (x - center)/radius in (-1, 1), else 0.
struct Bump {
  double amplitude = 1.0;
  double radius = 2.0;
  double center = 0.0;
};
/// amplitude * x * exp(-x^2 / (2 sigma^2)); zero mass.
struct Dipole {
  double amplitude = 1.0;
  double sigma = 1.0;
};

using ProfileDescriptor = std::variant<Gaussian, FixedPointProfile, Bump, Dipole>;

double evaluate(const ProfileDescriptor& profile, double x);

/// Closed-form (f^(w), f^'(w)) for the Gaussian family; nullopt for Bump.
std::optional<std::pair<Complex, Complex>> analytic_spectrum(const ProfileDescriptor& profile, double w);

GridFunction sample(const ProfileDescriptor& profile, const Grid& grid);

SpectralFunction to_spectrum(const GridFunction& f);
GridFunction from_spectrum(const SpectralFunction& F);

struct BqNorm {
  double value = 0.0;
  /// Frequency at which the sup is attained; smallest |w| wins ties.
  double argmax = 0.0;
};

BqNorm bq_norm_detail(const SpectralFunction& F, double q);
double bq_norm(const SpectralFunction& F, double q);
double bq_norm(const GridFunction& f, double q);

/// Multiplies by e^{-ds w^2}; the derivative array follows the product rule.
SpectralFunction heat_propagate(const SpectralFunction& F, double ds);

/// Spectrum of the dilated function x -> f(x / beta) / beta, i.e. the pair
/// (f^(beta w_k), beta f^'(beta w_k)), evaluated exactly from the samples of f
/// by the trapezoidal Fourier sum at the off-grid frequencies beta w_k.
SpectralFunction dilate(const GridFunction& f, double beta);

}  // namespace rgflow
