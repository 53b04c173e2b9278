// reasoner: generate bAbI-style data and train/evaluate Neural Reasoner models.
//
//   reasoner gen --task positional --n 1000 --seed 7 --out data/
//   reasoner run --task positional --n 1000 --layers 2 --dnn-depth 2 --aux original --alpha 0.5
//   reasoner run --task path_finding --grid --out results/

#include <cstdlib>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "experiment.hpp"

namespace {

using nr::cli::ExitCode;

struct Flags {
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  std::string config_path;
  bool grid = false;
  bool paper_scale = false;
};

void add_value_flags(CLI::App& cmd, Flags& flags, const std::map<std::string, std::string>& help) {
  for (const auto& [key, text] : help) {
    flags.options[key] = cmd.add_option("--" + key, flags.values[key], text);
  }
}

/// Config file first, then every flag actually given on the command line.
std::map<std::string, std::string> merged_settings(const Flags& flags) {
  std::map<std::string, std::string> s;
  if (!flags.config_path.empty()) s = nr::cli::read_config_file(flags.config_path);
  for (const auto& [key, opt] : flags.options)
    if (opt->count() > 0) s[key] = flags.values.at(key);
  if (flags.grid) s["grid"] = "true";
  if (flags.paper_scale) s["paper-scale"] = "true";
  if (!s.contains("seed")) {
    if (const char* env = std::getenv("REASONER_SEED")) s["seed"] = env;
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neural Reasoner experiments on Path Finding and Positional Reasoning"};
  app.require_subcommand(1);

  const std::map<std::string, std::string> common = {
      {"task", "positional or path_finding"},
      {"n", "training instances to generate (default 1000)"},
      {"n-test", "test instances to generate (default 1000)"},
      {"seed", "random seed (falls back to $REASONER_SEED, then 1)"},
      {"out", "output directory"},
  };
  std::map<std::string, std::string> run_only = {
      {"data-dir", "read train/test bAbI files from this directory instead of generating"},
      {"layers", "reasoning layers (default 2)"},
      {"dnn-depth", "weight layers per interaction network (default 2)"},
      {"pooling", "max, avg or gating (default max)"},
      {"aux", "none, original or abstract (default original)"},
      {"alpha", "reconstruction loss weight in [0, 1] (default 0.5)"},
      {"epochs", "training epochs (default 50)"},
      {"batch", "mini-batch size (default 32)"},
      {"hidden", "GRU hidden size (default 64)"},
      {"embed", "word embedding size (default 32)"},
      {"clip", "gradient norm clipping threshold (default 40)"},
  };

  Flags run_flags, gen_flags;
  CLI::App* run_cmd = app.add_subcommand("run", "train and evaluate");
  add_value_flags(*run_cmd, run_flags, common);
  add_value_flags(*run_cmd, run_flags, run_only);
  run_cmd->add_option("--config", run_flags.config_path, "flat key=value file; flags override it");
  run_cmd->add_flag("--grid", run_flags.grid, "sweep layers {2,3} x dnn-depth {1,2,3} x aux {none,original,abstract}");
  run_cmd->add_flag("--paper-scale", run_flags.paper_scale, "10000 training instances, 200 epochs");

  CLI::App* gen_cmd = app.add_subcommand("gen", "write generated train/test files");
  add_value_flags(*gen_cmd, gen_flags, common);
  gen_cmd->add_option("--config", gen_flags.config_path, "flat key=value file; flags override it");
  gen_cmd->add_flag("--paper-scale", gen_flags.paper_scale, "10000 training instances");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return ExitCode::kUsage;
  }

  try {
    if (*run_cmd) return nr::cli::run(nr::cli::make_config(merged_settings(run_flags)), std::cout);
    return nr::cli::gen(nr::cli::make_config(merged_settings(gen_flags)), std::cout);
  } catch (const nr::cli::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return ExitCode::kUsage;
  } catch (const nr::cli::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return ExitCode::kData;
  } catch (const nr::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return ExitCode::kNumeric;
  } catch (const nr::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ExitCode::kData;
  }
}
