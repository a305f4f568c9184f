#include <CLI11.hpp>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "goafem/harness.hpp"

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    if (comma > pos) out.push_back(s.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return out;
}

// Collects raw key/value overrides so that a config file (when given) is
// loaded first and explicit flags win.
struct Overrides {
  std::vector<std::pair<std::string, std::string>> kv;

  void add(CLI::App* cmd, const std::string& flag, const std::string& key,
           const std::string& help) {
    cmd->add_option_function<std::string>(
        flag, [this, key](const std::string& v) { kv.emplace_back(key, v); }, help);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"goal-oriented adaptive FEM/BEM experiments"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides over;
  std::string strategies = "A,B,C,primal_only,dual_only";
  std::string thetas = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9";

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "key=value config file");
    over.add(cmd, "--problem", "problem", "exp1 | exp2 | bem_conf | bem_nonconf");
    over.add(cmd, "--strategy", "strategy", "A | B | C | primal_only | dual_only | uniform");
    over.add(cmd, "--theta", "theta", "marking parameter in (0,1]");
    over.add(cmd, "--p", "p", "polynomial degree (FEM)");
    over.add(cmd, "--nu", "nu", "diffusion coefficient (exp2)");
    over.add(cmd, "--epsilon", "epsilon", "estimator weight exponent shift (bem_nonconf)");
    over.add(cmd, "--max-elements", "max_elements", "stop when N reaches this");
    over.add(cmd, "--max-levels", "max_levels", "stop after this many levels (0 = off)");
    over.add(cmd, "--initial-refine", "initial_refine",
             "uniform pre-refinement rounds of the boundary mesh (BEM)");
    over.add(cmd, "--tol", "tol", "stop when the tolerance quantity reaches this");
    over.add(cmd, "--tol-quantity", "tol_quantity", "product | goal_err");
    over.add(cmd, "--out", "out", "output directory");
    over.add(cmd, "--snapshot-every", "snapshot_every", "dump mesh/solution every k levels");
    over.add(cmd, "--ref-max-elements", "ref_max_elements",
             "size of the hidden goal-reference pass (FEM)");
    over.add(cmd, "--reference", "reference", "externally supplied goal reference");
  };

  CLI::App* run = app.add_subcommand("run", "one adaptive run");
  add_common(run);
  CLI::App* sweep = app.add_subcommand("sweep", "strategy x theta sweep to a tolerance");
  add_common(sweep);
  sweep->add_option("--strategies", strategies, "comma-separated strategy list");
  sweep->add_option("--thetas", thetas, "comma-separated theta list");

  CLI11_PARSE(app, argc, argv);

  try {
    goafem::ExperimentConfig cfg;
    if (!config_path.empty()) cfg = goafem::load_config(config_path);
    for (const auto& [key, value] : over.kv) goafem::apply_override(cfg, key, value);

    if (run->parsed()) {
      goafem::RunResult rr = goafem::run_experiment(cfg);
      if (!rr.history.levels.empty()) {
        const goafem::LevelRecord& last = rr.history.levels.back();
        std::printf("levels=%zu N=%lld eta_u=%.6e eta_z=%.6e product=%.6e\n",
                    rr.history.levels.size(), static_cast<long long>(last.n), last.eta_u,
                    last.eta_z, last.product);
      }
      for (const goafem::RateFit& r : rr.rates)
        std::printf("rate %s = %.4f (levels %lld-%lld, rms %.3e)\n", r.quantity.c_str(), r.slope,
                    static_cast<long long>(r.window_begin),
                    static_cast<long long>(r.window_end), r.residual);
      if (rr.history.aborted)
        std::printf("aborted: %s\n", rr.history.abort_reason.c_str());
    } else {
      std::vector<double> theta_list;
      for (const std::string& t : split_list(thetas)) theta_list.push_back(std::stod(t));
      goafem::run_sweep(cfg, split_list(strategies), theta_list);
      std::printf("sweep finished; summary in %s/ncum.csv\n", cfg.out.c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
