// gcomb: generate instances, train, evaluate and run active search from the shell.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gcomb/errors.hpp"
#include "gcomb/harness.hpp"

namespace {

enum Exit { kOk = 0, kArgument = 2, kIo = 3, kTraining = 4 };

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string init;
  std::string model;
  std::string methods;
  std::string sizes;
  std::string manifest;
  std::string instance;
  std::string problem;
  std::optional<int> episodes;
  std::optional<int> threads;
  std::vector<std::string> set;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "Experiment config file (key = value with [sections])");
  cmd->add_option("--seed", f.seed, "Override the experiment seed");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--problem", f.problem, "mvc | maxcut | tsp | scp when no config is given");
  cmd->add_option("--set", f.set, "Override a config key, e.g. --set train.episodes=200");
}

gcomb::ExperimentConfig build_config(const Flags& f) {
  gcomb::ExperimentConfig cfg;
  if (!f.config.empty()) {
    cfg = gcomb::load_config(f.config);
    if (!f.problem.empty() && gcomb::problem_kind_from_string(f.problem) != cfg.problem) {
      throw gcomb::ArgumentError("--problem disagrees with the config file");
    }
  } else {
    cfg = gcomb::ExperimentConfig::defaults(gcomb::problem_kind_from_string(f.problem.empty() ? "mvc" : f.problem));
  }
  for (const auto& kv : f.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw gcomb::ArgumentError("--set expects key=value, got '" + kv + "'");
    gcomb::set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (f.seed) cfg.seed = *f.seed;
  if (!f.out.empty()) cfg.out = f.out;
  if (!f.methods.empty()) gcomb::set_config_value(cfg, "experiment.methods", f.methods);
  if (!f.sizes.empty()) cfg.test_sizes = gcomb::parse_size_list(f.sizes);
  if (f.episodes) cfg.train.episodes = *f.episodes;
  if (f.threads) cfg.threads = *f.threads;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learned greedy heuristics for graph optimization problems"};
  app.set_version_flag("--version", std::string(gcomb::kVersion));
  app.require_subcommand(1);
  Flags f;

  auto* gen = app.add_subcommand("generate", "Write seeded instance sets and a manifest");
  add_common(gen, f);
  gen->add_option("--manifest", f.manifest, "Regenerate the instances listed in a manifest");

  auto* train = app.add_subcommand("train", "Train a model with n-step Q-learning");
  add_common(train, f);
  train->add_option("--init", f.init, "Warm start from a model file");
  train->add_option("--episodes", f.episodes, "Override train.episodes");

  auto* eval = app.add_subcommand("eval", "Evaluate a model and baselines on the test sets");
  auto* generalize = app.add_subcommand("generalize", "Evaluate one model across several test size ranges");
  auto* timesweep = app.add_subcommand("timesweep", "Record time and ratio per method and instance");
  for (auto* cmd : {eval, generalize, timesweep}) {
    add_common(cmd, f);
    cmd->add_option("--model", f.model, "Trained model file");
    cmd->add_option("--init", f.model, "Alias of --model");
    cmd->add_option("--methods", f.methods, "Comma-separated method names");
    cmd->add_option("--sizes", f.sizes, "Comma-separated test size ranges, e.g. 15-20,40-50");
    cmd->add_option("--threads", f.threads, "Evaluation worker threads (0: all cores)");
  }

  auto* active = app.add_subcommand("active-search", "Train on a single instance and keep the best solution");
  add_common(active, f);
  active->add_option("instance", f.instance, "Instance file (.tsp for TSPLIB, native format otherwise)")->required();
  active->add_option("--init", f.init, "Warm start from a model file");
  active->add_option("--episodes", f.episodes, "Override train.episodes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kArgument;
  }

  try {
    gcomb::ExperimentConfig cfg = build_config(f);
    gcomb::CommandOptions opt;
    opt.log = &std::cout;
    if (!f.init.empty()) opt.init = f.init;
    if (!f.model.empty()) opt.model = f.model;
    if (!f.manifest.empty()) opt.manifest = f.manifest;
    if (!f.instance.empty()) opt.instance = f.instance;
    if (*gen) return gcomb::cmd_generate(cfg, opt);
    if (*train) return gcomb::cmd_train(cfg, opt);
    if (*eval) return gcomb::cmd_eval(cfg, opt);
    if (*generalize) return gcomb::cmd_generalize(cfg, opt);
    if (*timesweep) return gcomb::cmd_timesweep(cfg, opt);
    if (*active) return gcomb::cmd_active_search(cfg, opt);
  } catch (const gcomb::ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kArgument;
  } catch (const gcomb::SizeLimitError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kArgument;
  } catch (const gcomb::InfeasibleError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kArgument;
  } catch (const gcomb::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kIo;
  } catch (const gcomb::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kIo;
  } catch (const gcomb::TrainingError& e) {
    std::cerr << "training error: " << e.what() << '\n';
    return kTraining;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return kOk;
}
