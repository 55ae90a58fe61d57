#include "rgflow/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "rgflow/error.hpp"

namespace rgflow {

namespace {

// The FFTW planner is not thread-safe; execution on new arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class FftPlan {
 public:
  FftPlan(std::size_t n, int sign) {
    std::vector<Complex> scratch(n);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan_ == nullptr) throw Error("fftw planning failed");
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
  ~FftPlan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }

  void execute(std::vector<Complex>& data) const {
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan_, buf, buf);
  }

 private:
  fftw_plan plan_ = nullptr;
};

// Per-thread plan cache, keyed by (size, direction).
const FftPlan& plan_for(std::size_t n, int sign) {
  thread_local std::map<std::pair<std::size_t, int>, std::unique_ptr<FftPlan>> cache;
  auto& slot = cache[{n, sign}];
  if (!slot) slot = std::make_unique<FftPlan>(n, sign);
  return *slot;
}

void require_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) throw Error("grid mismatch");
}

bool is_power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

constexpr double kPi = std::numbers::pi;

}  // namespace

Grid::Grid(double half_width, std::size_t n_points) : half_width_(half_width), n_points_(n_points) {
  if (!(half_width > 0.0) || !std::isfinite(half_width)) throw Error("grid half-width must be > 0");
  if (!is_power_of_two(n_points)) throw Error("grid size must be a power of two");
}

double Grid::dw() const { return kPi / half_width_; }

long Grid::wave_index(std::size_t i) const {
  const auto n = static_cast<long>(n_points_);
  const auto k = static_cast<long>(i);
  return k < n / 2 ? k : k - n;
}

double Grid::frequency(std::size_t i) const { return static_cast<double>(wave_index(i)) * dw(); }

GridFunction::GridFunction(Grid g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.size()) throw Error("sample count does not match grid");
}

double GridFunction::mass() const {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum * grid.dx();
}

double GridFunction::sup_abs() const {
  double m = 0.0;
  for (double v : values) {
    if (std::isnan(v)) return v;
    m = std::max(m, std::abs(v));
  }
  return m;
}

GridFunction& GridFunction::operator+=(const GridFunction& other) {
  require_same_grid(grid, other.grid);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] += other.values[i];
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& other) {
  require_same_grid(grid, other.grid);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] -= other.values[i];
  return *this;
}

GridFunction& GridFunction::operator*=(double s) {
  for (double& v : values) v *= s;
  return *this;
}

GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
GridFunction operator*(double s, GridFunction a) { return a *= s; }

SpectralFunction& SpectralFunction::operator+=(const SpectralFunction& other) { return add_scaled(1.0, other); }
SpectralFunction& SpectralFunction::operator-=(const SpectralFunction& other) { return add_scaled(-1.0, other); }

SpectralFunction& SpectralFunction::operator*=(double s) {
  for (auto& c : coeffs) c *= s;
  for (auto& c : deriv_coeffs) c *= s;
  return *this;
}

SpectralFunction& SpectralFunction::add_scaled(double s, const SpectralFunction& other) {
  require_same_grid(grid, other.grid);
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    coeffs[i] += s * other.coeffs[i];
    deriv_coeffs[i] += s * other.deriv_coeffs[i];
  }
  return *this;
}

SpectralFunction operator+(SpectralFunction a, const SpectralFunction& b) { return a += b; }
SpectralFunction operator-(SpectralFunction a, const SpectralFunction& b) { return a -= b; }

double evaluate(const ProfileDescriptor& profile, double x) {
  return std::visit(
      [x](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          const double y = (x - d.center) / d.sigma;
          return d.amplitude * std::exp(-0.5 * y * y);
        } else if constexpr (std::is_same_v<T, FixedPointProfile>) {
          const double p1 = d.p + 1.0;
          return d.amplitude * std::sqrt(p1 / (4.0 * kPi)) * std::exp(-p1 * x * x / 4.0);
        } else if constexpr (std::is_same_v<T, Bump>) {
          const double y = (x - d.center) / d.radius;
          if (std::abs(y) >= 1.0) return 0.0;
          return d.amplitude * std::exp(1.0 - 1.0 / (1.0 - y * y));
        } else {
          const double y = x / d.sigma;
          return d.amplitude * x * std::exp(-0.5 * y * y);
        }
      },
      profile);
}

std::optional<std::pair<Complex, Complex>> analytic_spectrum(const ProfileDescriptor& profile, double w) {
  const Complex I{0.0, 1.0};
  return std::visit(
      [&](const auto& d) -> std::optional<std::pair<Complex, Complex>> {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          const double s2 = d.sigma * d.sigma;
          const Complex f = d.amplitude * d.sigma * std::sqrt(2.0 * kPi) * std::exp(-0.5 * s2 * w * w) *
                            std::exp(-I * w * d.center);
          return std::pair{f, f * (-s2 * w - I * d.center)};
        } else if constexpr (std::is_same_v<T, FixedPointProfile>) {
          const double p1 = d.p + 1.0;
          const double f = d.amplitude * std::exp(-w * w / p1);
          return std::pair{Complex{f}, Complex{-2.0 * w / p1 * f}};
        } else if constexpr (std::is_same_v<T, Dipole>) {
          const double s2 = d.sigma * d.sigma;
          const double g = d.amplitude * d.sigma * std::sqrt(2.0 * kPi) * std::exp(-0.5 * s2 * w * w);
          return std::pair{-I * s2 * w * g, -I * s2 * g * (1.0 - s2 * w * w)};
        } else {
          return std::nullopt;
        }
      },
      profile);
}

GridFunction sample(const ProfileDescriptor& profile, const Grid& grid) {
  GridFunction f(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) f.values[i] = evaluate(profile, grid.x(i));
  return f;
}

SpectralFunction to_spectrum(const GridFunction& f) {
  const Grid& g = f.grid;
  const std::size_t n = g.size();
  const double dx = g.dx();
  std::vector<Complex> a(n), b(n);
  for (std::size_t j = 0; j < n; ++j) {
    a[j] = f.values[j];
    b[j] = g.x(j) * f.values[j];
  }
  const auto& plan = plan_for(n, FFTW_FORWARD);
  plan.execute(a);
  plan.execute(b);

  // x_j = -X + j dx turns e^{-i w_k x_j} into (-1)^k e^{-2 pi i jk/N}.
  SpectralFunction F(g);
  const Complex minus_i{0.0, -1.0};
  for (std::size_t k = 0; k < n; ++k) {
    const double sign = (k % 2 == 0) ? dx : -dx;
    F.coeffs[k] = sign * a[k];
    F.deriv_coeffs[k] = sign * minus_i * b[k];
  }
  return F;
}

GridFunction from_spectrum(const SpectralFunction& F) {
  const Grid& g = F.grid;
  const std::size_t n = g.size();
  std::vector<Complex> a(n);
  for (std::size_t k = 0; k < n; ++k) a[k] = (k % 2 == 0) ? F.coeffs[k] : -F.coeffs[k];
  plan_for(n, FFTW_BACKWARD).execute(a);
  const double scale = 1.0 / (static_cast<double>(n) * g.dx());
  GridFunction f(g);
  for (std::size_t j = 0; j < n; ++j) f.values[j] = a[j].real() * scale;
  return f;
}

BqNorm bq_norm_detail(const SpectralFunction& F, double q) {
  const Grid& g = F.grid;
  const std::size_t n = g.size();
  auto weight_at = [&](std::size_t i) {
    const double w = std::abs(g.frequency(i));
    return (1.0 + std::pow(w, q)) * (std::abs(F.coeffs[i]) + std::abs(F.deriv_coeffs[i]));
  };
  // Visit slots in order of increasing |w| (0, +1, -1, +2, ...) so that the
  // first strict maximum is the smallest-|w| one.
  BqNorm best{weight_at(0), 0.0};
  auto visit = [&](std::size_t slot) {
    const double v = weight_at(slot);
    if (v > best.value || (std::isnan(v) && !std::isnan(best.value))) best = {v, g.frequency(slot)};
  };
  for (std::size_t k = 1; k < n / 2; ++k) {
    visit(k);
    visit(n - k);
  }
  visit(n / 2);
  return best;
}

double bq_norm(const SpectralFunction& F, double q) { return bq_norm_detail(F, q).value; }

double bq_norm(const GridFunction& f, double q) { return bq_norm(to_spectrum(f), q); }

SpectralFunction heat_propagate(const SpectralFunction& F, double ds) {
  if (!(ds >= 0.0)) throw Error("heat_propagate requires ds >= 0");
  SpectralFunction out = F;
  if (ds == 0.0) return out;
  const Grid& g = F.grid;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double w = g.frequency(i);
    const double e = std::exp(-ds * w * w);
    out.deriv_coeffs[i] = e * (F.deriv_coeffs[i] - 2.0 * w * ds * F.coeffs[i]);
    out.coeffs[i] = e * F.coeffs[i];
  }
  return out;
}

SpectralFunction dilate(const GridFunction& f, double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw Error("dilation factor must be > 0");
  const Grid& g = f.grid;
  const std::size_t n = g.size();
  const double dx = g.dx();

  std::vector<double> xf(n);
  for (std::size_t j = 0; j < n; ++j) xf[j] = g.x(j) * f.values[j];

  SpectralFunction out(g);
  constexpr std::size_t kReseed = 64;
  // Real input: evaluate k = 0..N/2 and fill negative frequencies by conjugation.
  for (std::size_t k = 0; k <= n / 2; ++k) {
    const double omega = beta * static_cast<double>(k) * g.dw();
    const Complex step = std::polar(1.0, -omega * dx);
    Complex s0{}, s1{};
    Complex phase;
    for (std::size_t j = 0; j < n; ++j) {
      if (j % kReseed == 0) phase = std::polar(1.0, -omega * g.x(j));
      s0 += f.values[j] * phase;
      s1 += xf[j] * phase;
      phase *= step;
    }
    const Complex value = dx * s0;
    const Complex deriv = beta * dx * Complex{0.0, -1.0} * s1;
    if (k < n / 2) {
      out.coeffs[k] = value;
      out.deriv_coeffs[k] = deriv;
      if (k > 0) {
        out.coeffs[n - k] = std::conj(value);
        out.deriv_coeffs[n - k] = -std::conj(deriv);
      }
    } else {
      // Slot N/2 carries w = -N/2 dw.
      out.coeffs[k] = std::conj(value);
      out.deriv_coeffs[k] = -std::conj(deriv);
    }
  }
  return out;
}

}  // namespace rgflow
