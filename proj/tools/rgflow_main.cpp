#include <cstdlib>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "rgflow/error.hpp"
#include "rgflow/harness.hpp"

namespace {

void print_certificate(const rgflow::Json& p) {
  std::cout << "basin_ok: " << (p["basin_ok"].get<bool>() ? "true" : "false") << '\n';
  for (const char* key : {"C_of_q", "C_q_embed", "rho0", "S0", "S1", "S2", "C0", "eps_local", "sigma", "K", "C_pq",
                          "K_pq", "contraction_C", "L1", "M", "n0", "L_delta", "G", "eps_bar", "f_norm"}) {
    std::cout << "  " << key << " = " << p[key].dump() << '\n';
  }
  std::cout << "inequalities:\n";
  for (const auto& i : p["inequalities"]) {
    std::cout << "  [" << (i["holds"].get<bool>() ? "ok  " : "FAIL") << "] " << i["name"].get<std::string>() << "  ("
              << i["lhs"].dump() << " vs " << i["rhs"].dump() << ")\n";
  }
}

int report_exit(const std::vector<rgflow::RunReport>& reports) {
  bool ok = true;
  for (const auto& r : reports) {
    for (const auto& a : r.assertions) {
      if (!a.passed) {
        std::cerr << "assertion failed: " << a.assertion.metric << ' ' << a.assertion.op << ' ' << a.assertion.value
                  << " (observed " << (a.observed ? std::to_string(*a.observed) : std::string("missing")) << ")\n";
      }
    }
    ok = ok && r.assertions_passed;
  }
  return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Renormalization-group flows for time-dependent nonlinear diffusion"};
  app.require_subcommand(1);
  std::string config_path;
  bool strict = false;
  std::string out_dir;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"run", "direct solve of the initial value problem"},
      {"rg", "iterate the renormalization-group map"},
      {"certify", "evaluate the constant chain and the basin verdict"},
      {"sweep", "run a parameter sweep"},
      {"oracle-compare", "compare the spectral solver with the finite-difference oracle"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_flag("--strict", strict, "abort when an RG step leaves the admissible ball");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--threads", threads, "worker threads for sweeps")->check(CLI::PositiveNumber);
  }
  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    rgflow::Json doc;
    {
      auto cfg = rgflow::load_config(config_path);
      doc = cfg.resolved;
    }
    doc["mode"] = command == "run" ? "direct" : command;
    if (strict) doc["strict"] = true;
    if (const char* env = std::getenv("RGFLOW_OUT"); env != nullptr && *env != '\0') doc["output_dir"] = env;
    if (!out_dir.empty()) doc["output_dir"] = out_dir;
    const auto cfg = rgflow::parse_config(doc);

    if (cfg.mode == rgflow::Mode::Sweep) {
      const auto reports = rgflow::sweep(cfg, threads);
      std::size_t failed = 0;
      for (const auto& r : reports) failed += r.error.empty() ? 0 : 1;
      std::cout << reports.size() << " sweep points, " << failed << " failed; results in " << cfg.output_dir.string()
                << '\n';
      return report_exit(reports);
    }
    const auto report = rgflow::run(cfg);
    if (cfg.mode == rgflow::Mode::Certify) {
      print_certificate(report.payload);
    } else {
      std::cout << report.payload.dump(2) << '\n';
    }
    std::cout << "config hash " << report.config_hash << ", report in " << cfg.output_dir.string() << '\n';
    return report_exit({report});
  } catch (const rgflow::InadmissibleData& e) {
    std::cerr << "strict mode: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
