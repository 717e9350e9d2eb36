// Command-line experiment harness: named experiments with file/override
// configuration and bit-stable CSV output.
//
// Exit codes: 0 success, 2 config error, 3 numeric-window error,
// 4 branch-cap error, 5 verification failure.

#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "krotor/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitWindow = 3;
constexpr int kExitBranchCap = 4;
constexpr int kExitVerify = 5;

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* sub, CommonArgs& args) {
  sub->add_option("--config", args.config_path, "config file (key=value with [section] headers)");
  sub->add_option("--out", args.out_dir, "output directory");
  sub->add_option("--override", args.overrides, "section.key=value override (repeatable)")
      ->take_all();
}

krotor::ExperimentConfig build_config(const std::string& experiment, const CommonArgs& args) {
  krotor::ExperimentConfig cfg = krotor::default_config(experiment);
  if (!args.config_path.empty()) krotor::load_config_file(cfg, args.config_path);
  for (const std::string& ov : args.overrides) krotor::apply_override(cfg, ov);
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  cfg.experiment = experiment;  // the subcommand wins over any config value
  return cfg;
}

int run_named(const std::string& experiment, const CommonArgs& args) {
  const krotor::ExperimentConfig cfg = build_config(experiment, args);
  const krotor::RunResult result = krotor::run_experiment(cfg);
  for (const auto& path : result.files) std::cout << path.string() << "\n";
  return kExitOk;
}

int run_verify() {
  const std::vector<krotor::CheckResult> table = krotor::run_verification();
  bool all_pass = true;
  std::printf("%-42s %14s %10s %6s\n", "check", "measured", "bound", "status");
  for (const krotor::CheckResult& c : table) {
    all_pass = all_pass && c.pass;
    std::printf("%-42s %14.4e %s %7.0e %6s\n", c.name.c_str(), c.measured,
                c.larger_is_better ? ">" : "<", c.bound, c.pass ? "pass" : "FAIL");
  }
  std::printf("%s\n", all_pass ? "verification passed" : "VERIFICATION FAILED");
  return all_pass ? kExitOk : kExitVerify;
}

void run_list() {
  for (const krotor::ExperimentInfo& info : krotor::experiment_registry()) {
    std::printf("%-18s %s\n", info.name.c_str(), info.description.c_str());
    std::string line;
    for (const std::string& tok : krotor::config_summary(info.defaults)) {
      if (tok.rfind("experiment=", 0) == 0) continue;
      if (line.size() + tok.size() > 88) {
        std::printf("%-18s   %s\n", "", line.c_str());
        line.clear();
      }
      line += (line.empty() ? "" : " ") + tok;
    }
    if (!line.empty()) std::printf("%-18s   %s\n", "", line.c_str());
  }
  std::printf("%-18s %s\n", "verify", "run the structural-invariant table (exit 5 on failure)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kicked-rotor resonance dynamics and pseudoclassical branching maps"};
  app.require_subcommand(1);

  CLI::App* list_cmd = app.add_subcommand("list", "enumerate the named experiments");
  CLI::App* verify_cmd =
      app.add_subcommand("verify", "run the structural-invariant checks");

  std::map<std::string, CommonArgs> args;
  for (const krotor::ExperimentInfo& info : krotor::experiment_registry()) {
    CLI::App* sub = app.add_subcommand(info.name, info.description);
    add_common(sub, args[info.name]);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (list_cmd->parsed()) {
      run_list();
      return kExitOk;
    }
    if (verify_cmd->parsed()) return run_verify();
    for (const krotor::ExperimentInfo& info : krotor::experiment_registry())
      if (app.get_subcommand(info.name)->parsed()) return run_named(info.name, args[info.name]);
    std::cerr << "no subcommand selected\n";
    return kExitConfig;
  } catch (const krotor::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const krotor::window_error& e) {
    std::cerr << "window error: " << e.what() << "\n";
    return kExitWindow;
  } catch (const krotor::branch_cap_error& e) {
    std::cerr << "branch-cap error: " << e.what() << "\n";
    return kExitBranchCap;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
