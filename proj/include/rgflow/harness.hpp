#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rgflow/asymptotics.hpp"
#include "rgflow/certificates.hpp"
#include "rgflow/problem.hpp"
#include "rgflow/rg.hpp"
#include "rgflow/solver.hpp"
#include "rgflow/spectral.hpp"

namespace rgflow {

using Json = nlohmann::ordered_json;

enum class Mode { Direct, RG, Certify, OracleCompare, Sweep };

std::string to_string(Mode mode);
Mode parse_mode(const std::string& name);

enum class Method { ETD, Picard };

struct Assertion {
  std::string metric;
  std::string op;
  double value = 0.0;
};

struct AssertionResult {
  Assertion assertion;
  std::optional<double> observed;
  bool passed = false;
};

struct SweepAxis {
  std::string path;
  std::vector<double> values;
};

struct ExperimentConfig {
  Mode mode = Mode::RG;
  ProblemSpec spec;
  Admissibility admissibility = Admissibility::Theorem;
  Grid grid{40.0, 4096};
  ProfileDescriptor initial = Gaussian{0.01, 1.0, 0.0};
  double L = 2.0;
  int steps = 14;
  double t1 = 16.0;
  std::optional<double> delta;
  Method method = Method::ETD;
  SolverConfig solver;
  OracleConfig oracle;
  std::size_t oracle_N = 8192;
  std::optional<double> fit_t_min;
  std::optional<double> fit_t_max;
  bool strict = false;
  std::filesystem::path output_dir = "rgflow_out";
  Mode sweep_mode = Mode::RG;
  std::vector<SweepAxis> axes;
  std::vector<Assertion> assertions;
  /// Fully resolved document (defaults filled in) that reproduces this config.
  Json resolved;
};

/// Parses and validates a config document; unknown fields are rejected.
ExperimentConfig parse_config(const Json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

Json to_json(const ProblemSpec& spec);
Json to_json(const CertificateBundle& bundle);
Json to_json(const DecayFit& fit);

/// git-style blob hash: sha1("blob <len>\0" + content), hex.
std::string git_blob_sha1(const std::string& content);

struct RunReport {
  Json config;
  std::string config_hash;
  Mode mode = Mode::RG;
  Json payload;
  double wall_time = 0.0;
  std::vector<AssertionResult> assertions;
  bool assertions_passed = true;
  /// Non-empty when the run failed; set only by sweep, which isolates failures.
  std::string error;

  Json to_json() const;
};

/// Executes the configured mode, writing CSV/JSON artifacts into output_dir.
RunReport run(const ExperimentConfig& config);

/// Runs every point of the Cartesian product of the sweep axes on a pool of
/// `threads` workers; writes the aggregate CSV in point order.
std::vector<RunReport> sweep(const ExperimentConfig& config, unsigned threads = 1);

}  // namespace rgflow
