#include "rgflow/harness.hpp"

#include <openssl/evp.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "rgflow/error.hpp"

namespace rgflow {

namespace fs = std::filesystem;

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::Direct: return "direct";
    case Mode::RG: return "rg";
    case Mode::Certify: return "certify";
    case Mode::OracleCompare: return "oracle-compare";
    case Mode::Sweep: return "sweep";
  }
  return "unknown";
}

Mode parse_mode(const std::string& name) {
  if (name == "direct" || name == "run") return Mode::Direct;
  if (name == "rg") return Mode::RG;
  if (name == "certify") return Mode::Certify;
  if (name == "oracle-compare") return Mode::OracleCompare;
  if (name == "sweep") return Mode::Sweep;
  throw ValidationError("mode", "unknown mode '" + name + "'");
}

namespace {

// Typed access to one JSON object; remembers which keys were read so that
// leftovers can be reported as unknown fields.
class ObjectReader {
 public:
  ObjectReader(const Json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ValidationError(where(), "expected an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const Json* get(const std::string& key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end()) return nullptr;
    return &*it;
  }

  double number(const std::string& key, double fallback) {
    const Json* v = get(key);
    if (v == nullptr) return fallback;
    if (!v->is_number()) throw ValidationError(field(key), "expected a number");
    return v->get<double>();
  }

  std::optional<double> optional_number(const std::string& key) {
    const Json* v = get(key);
    if (v == nullptr || v->is_null()) return std::nullopt;
    if (!v->is_number()) throw ValidationError(field(key), "expected a number or null");
    return v->get<double>();
  }

  long integer(const std::string& key, long fallback) {
    const Json* v = get(key);
    if (v == nullptr) return fallback;
    if (!v->is_number_integer()) throw ValidationError(field(key), "expected an integer");
    return v->get<long>();
  }

  bool boolean(const std::string& key, bool fallback) {
    const Json* v = get(key);
    if (v == nullptr) return fallback;
    if (!v->is_boolean()) throw ValidationError(field(key), "expected true or false");
    return v->get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    const Json* v = get(key);
    if (v == nullptr) return fallback;
    if (!v->is_string()) throw ValidationError(field(key), "expected a string");
    return v->get<std::string>();
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) throw ValidationError(field(it.key()), "unknown field");
    }
  }

 private:
  std::string where() const { return path_.empty() ? "<root>" : path_; }

  const Json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

const Json kEmptyObject = Json::object();

const Json& sub_object(ObjectReader& r, const std::string& key) {
  const Json* v = r.get(key);
  return v == nullptr ? kEmptyObject : *v;
}

std::string hypothesis_field(const std::string& label) {
  if (label == "H1") return "problem.q";
  if (label == "H2") return "problem.p";
  if (label == "lambda range") return "problem.lambda";
  return "problem.coefficients";
}

ProblemSpec parse_problem(const Json& doc, Admissibility& mode) {
  ObjectReader r(doc, "problem");
  DiffusionDescriptor diffusion;
  diffusion.p = r.number("p", 1.0);
  const std::string form = r.string("c_form", "pure_power");
  const Json& params = sub_object(r, "c_params");
  ObjectReader pr(params, "problem.c_params");
  if (form == "pure_power") {
    diffusion.form = PurePower{};
  } else if (form == "perturbed_power") {
    diffusion.form = PerturbedPower{pr.number("a", 0.0), pr.number("beta", 1.0)};
  } else {
    throw ValidationError("problem.c_form", "expected 'pure_power' or 'perturbed_power'");
  }
  pr.finish();

  const double lambda = r.number("lambda", -1.0);
  const double q = r.number("q", 2.0);
  const double reaction = r.number("r", 0.0);

  double radius = kInfiniteRadius;
  if (const Json* v = r.get("radius"); v != nullptr && !v->is_null()) {
    if (v->is_string() && (v->get<std::string>() == "inf" || v->get<std::string>() == "infinity")) {
      radius = kInfiniteRadius;
    } else if (v->is_number()) {
      radius = v->get<double>();
    } else {
      throw ValidationError("problem.radius", "expected a number, null or \"inf\"");
    }
  }

  std::vector<PowerTerm> terms;
  if (const Json* v = r.get("coefficients"); v != nullptr) {
    if (!v->is_array()) throw ValidationError("problem.coefficients", "expected a list of [degree, coefficient]");
    for (std::size_t i = 0; i < v->size(); ++i) {
      const Json& t = (*v)[i];
      const std::string f = "problem.coefficients[" + std::to_string(i) + "]";
      if (!t.is_array() || t.size() != 2 || !t[0].is_number() || !t[1].is_number()) {
        throw ValidationError(f, "expected [degree, coefficient]");
      }
      terms.push_back({t[0].get<double>(), t[1].get<double>()});
    }
  } else {
    terms.push_back({3.0, 1.0});
  }
  mode = r.boolean("exploratory", false) ? Admissibility::Exploratory : Admissibility::Theorem;
  r.finish();

  try {
    return make_problem(diffusion, NonlinearitySeries::from_terms(std::move(terms), radius), lambda, q, reaction,
                        mode);
  } catch (const InvalidHypothesis& e) {
    std::string reason = e.what();
    const std::string prefix = "invalid hypothesis (" + e.label() + "): ";
    if (reason.rfind(prefix, 0) == 0) reason.erase(0, prefix.size());
    throw InvalidHypothesis(e.label(), "at '" + hypothesis_field(e.label()) + "': " + reason);
  }
}

ProfileDescriptor parse_initial(const Json& doc, double p) {
  ObjectReader r(doc, "initial");
  const std::string kind = r.string("kind", "gaussian");
  ProfileDescriptor out;
  if (kind == "gaussian") {
    out = Gaussian{r.number("amplitude", 0.01), r.number("sigma", 1.0), r.number("center", 0.0)};
  } else if (kind == "fixed_point") {
    out = FixedPointProfile{r.number("p", p), r.number("amplitude", 0.01)};
  } else if (kind == "bump") {
    out = Bump{r.number("amplitude", 0.01), r.number("radius", 2.0), r.number("center", 0.0)};
  } else if (kind == "dipole") {
    out = Dipole{r.number("amplitude", 0.01), r.number("sigma", 1.0)};
  } else {
    throw ValidationError("initial.kind", "expected gaussian, fixed_point, bump or dipole");
  }
  r.finish();
  return out;
}

Json profile_json(const ProfileDescriptor& profile) {
  return std::visit(
      [](const auto& d) -> Json {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          return {{"kind", "gaussian"}, {"amplitude", d.amplitude}, {"sigma", d.sigma}, {"center", d.center}};
        } else if constexpr (std::is_same_v<T, FixedPointProfile>) {
          return {{"kind", "fixed_point"}, {"p", d.p}, {"amplitude", d.amplitude}};
        } else if constexpr (std::is_same_v<T, Bump>) {
          return {{"kind", "bump"}, {"amplitude", d.amplitude}, {"radius", d.radius}, {"center", d.center}};
        } else {
          return {{"kind", "dipole"}, {"amplitude", d.amplitude}, {"sigma", d.sigma}};
        }
      },
      profile);
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json config_document(const ExperimentConfig& c) {
  Json problem = to_json(c.spec);
  problem["exploratory"] = c.admissibility == Admissibility::Exploratory;
  Json doc;
  doc["mode"] = to_string(c.mode);
  doc["problem"] = problem;
  doc["grid"] = {{"X", c.grid.half_width()}, {"N", c.grid.size()}};
  doc["initial"] = profile_json(c.initial);
  doc["L"] = c.L;
  doc["steps"] = c.steps;
  doc["t1"] = c.t1;
  doc["delta"] = optional_json(c.delta);
  doc["solver"] = {{"method", c.method == Method::ETD ? "etd" : "picard"},
                   {"substeps", c.solver.substeps},
                   {"picard_tol", c.solver.picard_tol},
                   {"picard_max_iters", c.solver.picard_max_iters},
                   {"rho_guard", optional_json(c.solver.rho_guard)}};
  doc["oracle"] = {{"N", c.oracle_N}, {"steps_per_unit_time", c.oracle.steps_per_unit_time}};
  doc["fit"] = {{"t_min", optional_json(c.fit_t_min)}, {"t_max", optional_json(c.fit_t_max)}};
  doc["strict"] = c.strict;
  doc["output_dir"] = c.output_dir.string();
  if (!c.axes.empty()) {
    Json axes = Json::object();
    for (const auto& a : c.axes) axes[a.path] = a.values;
    doc["sweep"] = {{"mode", to_string(c.sweep_mode)}, {"axes", axes}};
  }
  Json asserts = Json::array();
  for (const auto& a : c.assertions) asserts.push_back({{"metric", a.metric}, {"op", a.op}, {"value", a.value}});
  doc["assertions"] = asserts;
  return doc;
}

const std::set<std::string> kOps = {"<", "<=", ">", ">=", "=="};

}  // namespace

Json to_json(const ProblemSpec& spec) {
  Json j;
  j["p"] = spec.p();
  if (const auto* pp = std::get_if<PerturbedPower>(&spec.diffusion.form)) {
    j["c_form"] = "perturbed_power";
    j["c_params"] = {{"a", pp->amplitude}, {"beta", pp->decay}};
  } else {
    j["c_form"] = "pure_power";
  }
  j["lambda"] = spec.lambda;
  j["q"] = spec.q;
  j["r"] = spec.reaction_exponent;
  Json terms = Json::array();
  for (const auto& t : spec.nonlinearity.terms) terms.push_back({t.degree, t.coefficient});
  j["coefficients"] = terms;
  if (std::isfinite(spec.nonlinearity.radius)) {
    j["radius"] = spec.nonlinearity.radius;
  } else {
    j["radius"] = "inf";
  }
  return j;
}

Json to_json(const CertificateBundle& b) {
  Json j;
  j["q"] = b.q;
  j["p"] = b.p;
  j["L"] = b.L;
  j["delta"] = b.delta;
  j["f_norm"] = b.f_norm;
  j["C_of_q"] = b.C_of_q;
  j["C_q_embed"] = b.C_q_embed;
  j["rho0"] = b.rho0;
  j["S0"] = b.S0;
  j["S1"] = b.S1;
  j["S2"] = b.S2;
  j["C0"] = b.C0;
  j["eps_local"] = b.eps_local;
  j["eps_n"] = b.eps_n;
  j["sigma"] = b.sigma;
  j["K"] = b.K;
  j["C_pq"] = b.C_pq;
  j["K_pq"] = b.K_pq;
  j["contraction_C"] = b.contraction_C;
  j["L0"] = b.L0;
  j["L1"] = b.L1;
  j["M"] = b.M;
  j["n0"] = b.n0;
  j["L_delta"] = b.L_delta;
  j["G"] = b.G;
  j["G_max"] = std::isfinite(b.G_max) ? Json(b.G_max) : Json("inf");
  j["eps_bar"] = b.eps_bar;
  j["basin_ok"] = b.basin_ok;
  Json ineq = Json::array();
  for (const auto& i : b.inequalities) {
    ineq.push_back({{"name", i.name}, {"lhs", i.lhs}, {"rhs", i.rhs}, {"holds", i.holds}});
  }
  j["inequalities"] = ineq;
  return j;
}

Json to_json(const DecayFit& fit) {
  return {{"gamma_est", fit.gamma_est}, {"stderr", fit.std_error}, {"t_min", fit.t_min},
          {"t_max", fit.t_max},         {"residual_rms", fit.residual_rms}, {"samples", fit.samples}};
}

ExperimentConfig parse_config(const Json& doc) {
  ObjectReader r(doc, "");
  ExperimentConfig c;
  c.mode = parse_mode(r.string("mode", "rg"));
  c.spec = parse_problem(sub_object(r, "problem"), c.admissibility);

  {
    ObjectReader g(sub_object(r, "grid"), "grid");
    const double X = g.number("X", 40.0);
    const long N = g.integer("N", 4096);
    if (!(X > 0.0)) throw ValidationError("grid.X", "must be > 0");
    if (N < 16 || (N & (N - 1)) != 0) throw ValidationError("grid.N", "must be a power of two >= 16");
    c.grid = Grid(X, static_cast<std::size_t>(N));
    g.finish();
  }
  c.initial = parse_initial(sub_object(r, "initial"), c.spec.p());

  c.L = r.number("L", 2.0);
  if (!(c.L > 1.0)) throw ValidationError("L", "must be > 1");
  c.steps = static_cast<int>(r.integer("steps", 14));
  if (c.steps < 1) throw ValidationError("steps", "must be >= 1");
  c.t1 = r.number("t1", 16.0);
  if (!(c.t1 > 1.0)) throw ValidationError("t1", "must be > 1");
  c.delta = r.optional_number("delta");
  if (c.delta) {
    try {
      check_delta(c.spec, *c.delta);
    } catch (const InvalidDelta& e) {
      throw ValidationError("delta", e.what());
    }
  }

  {
    ObjectReader s(sub_object(r, "solver"), "solver");
    const std::string method = s.string("method", "etd");
    if (method == "etd") {
      c.method = Method::ETD;
    } else if (method == "picard") {
      c.method = Method::Picard;
    } else {
      throw ValidationError("solver.method", "expected 'etd' or 'picard'");
    }
    c.solver.substeps = static_cast<int>(s.integer("substeps", c.solver.substeps));
    if (c.solver.substeps < 8) throw ValidationError("solver.substeps", "must be >= 8");
    c.solver.picard_tol = s.number("picard_tol", c.solver.picard_tol);
    if (!(c.solver.picard_tol > 0.0)) throw ValidationError("solver.picard_tol", "must be > 0");
    c.solver.picard_max_iters = static_cast<int>(s.integer("picard_max_iters", c.solver.picard_max_iters));
    if (c.solver.picard_max_iters < 1) throw ValidationError("solver.picard_max_iters", "must be >= 1");
    c.solver.rho_guard = s.optional_number("rho_guard");
    if (c.solver.rho_guard && !(*c.solver.rho_guard > 0.0)) throw ValidationError("solver.rho_guard", "must be > 0");
    s.finish();
  }
  {
    ObjectReader o(sub_object(r, "oracle"), "oracle");
    const long n = o.integer("N", static_cast<long>(2 * c.grid.size()));
    if (n < static_cast<long>(c.grid.size()) || n % static_cast<long>(c.grid.size()) != 0 || (n & (n - 1)) != 0) {
      throw ValidationError("oracle.N", "must be a power-of-two multiple of grid.N");
    }
    c.oracle_N = static_cast<std::size_t>(n);
    c.oracle.steps_per_unit_time = static_cast<int>(o.integer("steps_per_unit_time", 512));
    if (c.oracle.steps_per_unit_time < 1) throw ValidationError("oracle.steps_per_unit_time", "must be >= 1");
    o.finish();
  }
  c.oracle.rho_guard = c.solver.rho_guard;
  {
    ObjectReader f(sub_object(r, "fit"), "fit");
    c.fit_t_min = f.optional_number("t_min");
    c.fit_t_max = f.optional_number("t_max");
    f.finish();
  }
  c.strict = r.boolean("strict", false);
  c.output_dir = r.string("output_dir", "rgflow_out");

  if (const Json* sw = r.get("sweep"); sw != nullptr) {
    ObjectReader s(*sw, "sweep");
    c.sweep_mode = parse_mode(s.string("mode", "rg"));
    if (c.sweep_mode == Mode::Sweep) throw ValidationError("sweep.mode", "a sweep cannot nest another sweep");
    const Json* axes = s.get("axes");
    if (axes == nullptr || !axes->is_object()) throw ValidationError("sweep.axes", "expected an object of lists");
    for (auto it = axes->begin(); it != axes->end(); ++it) {
      const std::string f = "sweep.axes." + it.key();
      if (!it->is_array() || it->empty()) throw ValidationError(f, "axis must be a non-empty list of numbers");
      SweepAxis axis{it.key(), {}};
      for (const auto& v : *it) {
        if (!v.is_number()) throw ValidationError(f, "axis values must be numbers");
        axis.values.push_back(v.get<double>());
      }
      c.axes.push_back(std::move(axis));
    }
    s.finish();
  }
  if (c.mode == Mode::Sweep && c.axes.empty()) throw ValidationError("sweep.axes", "sweep mode needs at least one axis");

  if (const Json* as = r.get("assertions"); as != nullptr) {
    if (!as->is_array()) throw ValidationError("assertions", "expected a list");
    for (std::size_t i = 0; i < as->size(); ++i) {
      ObjectReader a((*as)[i], "assertions[" + std::to_string(i) + "]");
      Assertion x;
      x.metric = a.string("metric", "");
      if (x.metric.empty()) throw ValidationError(a.field("metric"), "required");
      x.op = a.string("op", "<=");
      if (!kOps.count(x.op)) throw ValidationError(a.field("op"), "expected one of < <= > >= ==");
      const Json* v = a.get("value");
      if (v == nullptr || !(v->is_number() || v->is_boolean())) throw ValidationError(a.field("value"), "expected a number");
      x.value = v->is_boolean() ? (v->get<bool>() ? 1.0 : 0.0) : v->get<double>();
      a.finish();
      c.assertions.push_back(std::move(x));
    }
  }
  r.finish();
  c.resolved = config_document(c);
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t upto = std::min(e.byte, text.size());
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < upto; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
  }
  return parse_config(doc);
}

std::string git_blob_sha1(const std::string& content) {
  const std::string blob = "blob " + std::to_string(content.size()) + std::string(1, '\0') + content;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(blob.data(), blob.size(), digest, &len, EVP_sha1(), nullptr) != 1) {
    throw Error("SHA-1 digest failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

Json RunReport::to_json() const {
  Json j;
  j["mode"] = rgflow::to_string(mode);
  j["config_hash"] = config_hash;
  j["wall_time_s"] = wall_time;
  j["config"] = config;
  j["payload"] = payload;
  Json as = Json::array();
  for (const auto& a : assertions) {
    as.push_back({{"metric", a.assertion.metric},
                  {"op", a.assertion.op},
                  {"value", a.assertion.value},
                  {"observed", optional_json(a.observed)},
                  {"passed", a.passed}});
  }
  j["assertions"] = as;
  j["assertions_passed"] = assertions_passed;
  if (!error.empty()) j["error"] = error;
  return j;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << fmt(row[i]);
    out << '\n';
  }
}

void write_json(const fs::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

void write_profile(const fs::path& path, const GridFunction& f) {
  std::vector<std::vector<double>> rows;
  rows.reserve(f.values.size());
  for (std::size_t i = 0; i < f.values.size(); ++i) rows.push_back({f.grid.x(i), f.values[i]});
  write_csv(path, {"x", "u"}, rows);
}

void write_fit_csv(const fs::path& path, const TimeSeries& series, const std::optional<DecayFit>& fit) {
  std::vector<std::vector<double>> rows;
  double intercept = 0.0;
  if (fit) {
    // Recover the intercept of the fitted line from the window samples.
    double sx = 0.0, sy = 0.0;
    std::size_t m = 0;
    for (std::size_t i = 0; i < series.t.size(); ++i) {
      if (series.t[i] >= fit->t_min && series.t[i] <= fit->t_max) {
        sx += std::log(series.t[i]);
        sy += std::log(series.amplitude[i]);
        ++m;
      }
    }
    if (m > 0) intercept = (sy + 0.5 * fit->gamma_est * sx) / static_cast<double>(m);
  }
  for (std::size_t i = 0; i < series.t.size(); ++i) {
    const double lt = std::log(series.t[i]);
    const double la = series.amplitude[i] > 0.0 ? std::log(series.amplitude[i]) : std::nan("");
    rows.push_back({lt, la, fit ? intercept - 0.5 * fit->gamma_est * lt : std::nan("")});
  }
  write_csv(path, {"log_t", "log_amplitude", "fit_line"}, rows);
}

Json criticality_json(const ProblemSpec& spec) {
  const auto cls = classify_criticality(spec);
  return {{"class", to_string(cls.tag)}, {"alpha_critical", cls.alpha_critical}};
}

GridFunction initial_data(const ExperimentConfig& c) { return sample(c.initial, c.grid); }

Trajectory direct_solve(const ExperimentConfig& c, const GridFunction& f, double t1) {
  if (c.method == Method::ETD) return etd_evolve(f, c.spec, 1.0, t1, c.solver);
  return picard_solve(f, c.spec, t1, c.solver).trajectory;
}

Json run_direct(const ExperimentConfig& c, const fs::path& out) {
  const GridFunction f = initial_data(c);
  const Trajectory traj = direct_solve(c, f, c.t1);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    rows.push_back({traj.times[i], traj.sup_abs[i], traj.mass[i], traj.bq[i]});
  }
  write_csv(out / "trajectory.csv", {"t", "sup_abs", "mass", "bq_norm"}, rows);
  write_profile(out / "final_profile.csv", traj.final_slice());

  Json p;
  p["criticality"] = criticality_json(c.spec);
  p["t_final"] = traj.times.back();
  p["initial_mass"] = traj.mass.front();
  p["final_mass"] = traj.mass.back();
  p["final_sup"] = traj.sup_abs.back();
  p["sup_norm"] = traj.sup_norm();
  p["samples"] = traj.size();
  std::optional<DecayFit> fit;
  const TimeSeries series = amplitude_series(traj);
  try {
    fit = fit_decay_exponent(series, c.fit_t_min, c.fit_t_max);
    p["fit"] = to_json(*fit);
    p["gamma_est"] = fit->gamma_est;
  } catch (const DegenerateSeries& e) {
    p["fit_error"] = e.what();
  }
  double A = traj.mass.back();
  try {
    A = estimate_A(traj);
    p["A_estimate"] = A;
  } catch (const Error& e) {
    p["A_error"] = e.what();
  }
  p["profile_distance"] = profile_distance(traj.final_slice(), traj.times.back(), c.spec.p(), A, c.spec.q);
  write_fit_csv(out / "decay_fit.csv", series, fit);
  return p;
}

Json run_rg(const ExperimentConfig& c, const fs::path& out) {
  const GridFunction f = initial_data(c);
  RGOptions options;
  options.strict = c.strict;
  const RGTrace trace = rg_flow(f, c.spec, c.L, c.steps, c.solver, options);

  std::vector<std::vector<double>> rows;
  for (const auto& s : trace.steps) {
    rows.push_back({double(s.n), std::pow(c.L, s.n), s.A_n, s.g_norm, s.g_zero, s.lambda_n, s.f_norm, s.eps_n,
                    s.admissible ? 1.0 : 0.0, s.nu_zero, double(s.picard_iterations)});
  }
  write_csv(out / "rg_trace.csv",
            {"n", "t", "A_n", "g_norm", "g_zero", "lambda_n", "f_norm", "eps_n", "admissible", "nu_zero",
             "picard_iterations"},
            rows);
  write_profile(out / "final_profile.csv", trace.steps.back().f_n);

  const RGStep& last = trace.steps.back();
  Json p;
  p["criticality"] = criticality_json(c.spec);
  p["steps_completed"] = static_cast<int>(trace.steps.size()) - 1;
  p["halted"] = trace.halted;
  if (trace.halted) p["diagnostic"] = trace.diagnostic;
  p["A_limit_estimate"] = trace.A_limit_estimate;
  bool all_admissible = true;
  for (const auto& s : trace.steps) all_admissible = all_admissible && s.admissible;
  p["all_admissible"] = all_admissible;
  p["g_norm_final"] = last.g_norm;
  if (trace.steps.size() >= 2) p["g_norm_ratio_final"] = last.g_norm / trace.steps[trace.steps.size() - 2].g_norm;
  p["profile_distance_final"] = distance_to_profile(last.f_n, c.spec.p(), last.A_n, c.spec.q);
  try {
    p["A_extrapolated"] = estimate_A(trace);
  } catch (const Error& e) {
    p["A_error"] = e.what();
  }
  const TimeSeries series = amplitude_series(trace);
  std::optional<DecayFit> fit;
  try {
    fit = fit_decay_exponent(series, c.fit_t_min, c.fit_t_max);
    p["fit"] = to_json(*fit);
    p["gamma_est"] = fit->gamma_est;
  } catch (const DegenerateSeries& e) {
    p["fit_error"] = e.what();
  }
  if (classify_criticality(c.spec).tag == Criticality::Critical) {
    try {
      const auto lc = log_correction_fit(series, c.spec.p() + 1.0, c.fit_t_min, c.fit_t_max);
      p["mu"] = lc.mu;
      p["mu_stderr"] = lc.std_error;
    } catch (const DegenerateSeries& e) {
      p["mu_error"] = e.what();
    }
  }
  try {
    const auto bundle = basin_check(f, c.spec, c.L, c.delta);
    p["basin_ok"] = bundle.basin_ok;
    p["L_delta"] = bundle.L_delta;
    p["eps_bar"] = bundle.eps_bar;
  } catch (const Error&) {
    // Outside the theorem's range (no admissible delta, p = 0): no verdict.
  }
  write_fit_csv(out / "decay_fit.csv", series, fit);
  return p;
}

Json run_certify(const ExperimentConfig& c, const fs::path& out) {
  const auto bundle = basin_check(initial_data(c), c.spec, c.L, c.delta);
  Json p = to_json(bundle);
  write_json(out / "certificate.json", p);
  return p;
}

Json run_oracle_compare(const ExperimentConfig& c, const fs::path& out) {
  const GridFunction f = initial_data(c);
  const GridFunction spectral = direct_solve(c, f, c.t1).final_slice();
  const Grid fine(c.grid.half_width(), c.oracle_N);
  const GridFunction oracle = oracle_solve(sample(c.initial, fine), c.spec, c.t1, fine, c.oracle);
  const GridFunction coarse = restrict_to(oracle, c.grid);
  double diff = 0.0;
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < c.grid.size(); ++i) {
    diff = std::max(diff, std::abs(spectral.values[i] - coarse.values[i]));
    rows.push_back({c.grid.x(i), spectral.values[i], coarse.values[i]});
  }
  write_csv(out / "comparison.csv", {"x", "spectral", "oracle"}, rows);
  Json p;
  p["t1"] = c.t1;
  p["max_sup_difference"] = diff;
  p["spectral_mass"] = spectral.mass();
  p["oracle_mass"] = oracle.mass();
  p["initial_mass"] = f.mass();
  return p;
}

std::vector<AssertionResult> evaluate_assertions(const std::vector<Assertion>& assertions, const Json& payload) {
  std::vector<AssertionResult> out;
  for (const auto& a : assertions) {
    AssertionResult r{a, std::nullopt, false};
    auto it = payload.find(a.metric);
    if (it != payload.end() && (it->is_number() || it->is_boolean())) {
      const double v = it->is_boolean() ? (it->get<bool>() ? 1.0 : 0.0) : it->get<double>();
      r.observed = v;
      if (a.op == "<") r.passed = v < a.value;
      else if (a.op == "<=") r.passed = v <= a.value;
      else if (a.op == ">") r.passed = v > a.value;
      else if (a.op == ">=") r.passed = v >= a.value;
      else r.passed = v == a.value;
    }
    out.push_back(r);
  }
  return out;
}

Json hashed_content(const Json& resolved) {
  Json h = resolved;
  h.erase("output_dir");
  return h;
}

void set_path(Json& doc, const std::string& path, double value) {
  if (path == "problem.alpha") {
    Json& coeffs = doc["problem"]["coefficients"];
    if (!coeffs.is_array() || coeffs.empty()) throw ValidationError("sweep.axes.problem.alpha", "no coefficients");
    coeffs[0][0] = value;
    return;
  }
  Json* node = &doc;
  std::stringstream ss(path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->is_object() || !node->contains(parts[i])) {
      throw ValidationError("sweep.axes." + path, "does not name a config field");
    }
    node = &(*node)[parts[i]];
  }
  if (!node->is_object() || !node->contains(parts.back())) {
    throw ValidationError("sweep.axes." + path, "does not name a config field");
  }
  Json& leaf = (*node)[parts.back()];
  if (leaf.is_number_integer() && value == std::floor(value)) {
    leaf = static_cast<long>(value);
  } else {
    leaf = value;
  }
}

}  // namespace

RunReport run(const ExperimentConfig& config) {
  if (config.mode == Mode::Sweep) throw Error("use sweep() for sweep configs");
  const auto start = std::chrono::steady_clock::now();
  fs::create_directories(config.output_dir);
  RunReport report;
  report.mode = config.mode;
  report.config = config.resolved;
  report.config_hash = git_blob_sha1(hashed_content(config.resolved).dump());
  switch (config.mode) {
    case Mode::Direct: report.payload = run_direct(config, config.output_dir); break;
    case Mode::RG: report.payload = run_rg(config, config.output_dir); break;
    case Mode::Certify: report.payload = run_certify(config, config.output_dir); break;
    case Mode::OracleCompare: report.payload = run_oracle_compare(config, config.output_dir); break;
    case Mode::Sweep: break;
  }
  report.assertions = evaluate_assertions(config.assertions, report.payload);
  for (const auto& a : report.assertions) report.assertions_passed = report.assertions_passed && a.passed;
  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_json(config.output_dir / "report.json", report.to_json());
  return report;
}

std::vector<RunReport> sweep(const ExperimentConfig& config, unsigned threads) {
  if (config.axes.empty()) throw ValidationError("sweep.axes", "sweep mode needs at least one axis");
  std::size_t count = 1;
  for (const auto& a : config.axes) count *= a.values.size();
  fs::create_directories(config.output_dir);

  // Point i enumerates the product with the last axis varying fastest.
  auto coordinates = [&](std::size_t i) {
    std::vector<double> v(config.axes.size());
    for (std::size_t k = config.axes.size(); k-- > 0;) {
      const auto& vals = config.axes[k].values;
      v[k] = vals[i % vals.size()];
      i /= vals.size();
    }
    return v;
  };

  std::vector<RunReport> reports(count);
  auto run_point = [&](std::size_t i) {
    const auto coords = coordinates(i);
    char name[32];
    std::snprintf(name, sizeof name, "point_%04zu", i);
    Json doc = config.resolved;
    doc.erase("sweep");
    doc["mode"] = to_string(config.sweep_mode);
    doc["output_dir"] = (config.output_dir / name).string();
    RunReport& rep = reports[i];
    rep.mode = config.sweep_mode;
    try {
      for (std::size_t k = 0; k < coords.size(); ++k) set_path(doc, config.axes[k].path, coords[k]);
      rep = run(parse_config(doc));
    } catch (const std::exception& e) {
      rep.config = doc;
      rep.config_hash = git_blob_sha1(hashed_content(doc).dump());
      rep.error = e.what();
      rep.assertions_passed = false;
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) run_point(i);
      });
    }
  }

  std::ofstream csv(config.output_dir / "sweep.csv");
  if (!csv) throw Error("cannot write sweep.csv");
  for (const auto& a : config.axes) csv << a.path << ',';
  csv << "criticality,gamma_est,g_norm_final,basin_ok,status\n";
  Json summary = Json::array();
  for (std::size_t i = 0; i < count; ++i) {
    const auto coords = coordinates(i);
    const RunReport& rep = reports[i];
    for (double v : coords) csv << fmt(v) << ',';
    auto field = [&](const char* key) -> std::string {
      auto it = rep.payload.find(key);
      if (it == rep.payload.end()) return "";
      if (it->is_boolean()) return it->get<bool>() ? "1" : "0";
      if (it->is_number()) return fmt(it->get<double>());
      return "";
    };
    std::string crit;
    if (auto it = rep.payload.find("criticality"); it != rep.payload.end()) crit = (*it)["class"].get<std::string>();
    csv << crit << ',' << field("gamma_est") << ',' << field("g_norm_final") << ',' << field("basin_ok") << ','
        << (rep.error.empty() ? "ok" : "error") << '\n';
    Json entry = {{"point", i}, {"coordinates", coords}, {"config_hash", rep.config_hash}};
    if (!rep.error.empty()) entry["error"] = rep.error;
    summary.push_back(entry);
  }
  write_json(config.output_dir / "sweep_report.json",
             Json{{"config", config.resolved},
                  {"config_hash", git_blob_sha1(hashed_content(config.resolved).dump())},
                  {"points", summary}});
  return reports;
}

}  // namespace rgflow
