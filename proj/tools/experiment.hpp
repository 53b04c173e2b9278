#pragma once

// Experiment runner behind the `reasoner` command line tool.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "neural_reasoner/data/abstractize.hpp"
#include "neural_reasoner/data/babi_io.hpp"
#include "neural_reasoner/data/corpus.hpp"
#include "neural_reasoner/data/generators.hpp"
#include "neural_reasoner/model.hpp"
#include "neural_reasoner/training.hpp"

namespace nr::cli {

namespace fs = std::filesystem;

/// Bad flags or flag combinations. Exit status 1.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Unreadable or malformed data files. Exit status 2.
class DataError : public Error {
 public:
  using Error::Error;
};

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

struct ExperimentConfig {
  std::optional<data::TaskKind> task;
  std::size_t n = 1000;
  std::size_t n_test = 1000;
  std::optional<std::string> data_dir;
  std::size_t layers = 2;
  std::size_t dnn_depth = 2;
  Pooling pooling = Pooling::max;
  AuxMode aux = AuxMode::original;
  double alpha = 0.5;
  std::size_t epochs = 50;
  std::size_t batch = 32;
  std::size_t hidden = 64;
  std::size_t embed = 32;
  double clip = 40.0;
  std::uint64_t seed = 1;
  std::optional<std::string> out;
  bool grid = false;
  bool paper_scale = false;
};

/// Keys accepted in config files; identical to the long flag names.
inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {"task",   "n",     "n-test", "data-dir", "layers", "dnn-depth",
                                                "pooling", "aux",  "alpha",  "epochs",   "batch",  "hidden",
                                                "embed",  "clip",  "seed",   "out",      "grid",   "paper-scale"};
  return keys;
}

/// Reads a flat `key = value` file. Blank lines and lines starting with '#'
/// are ignored.
inline std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file '" + path + "'");
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = data::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw UsageError(path + ":" + std::to_string(lineno) + ": expected key=value");
    std::string key = data::trim(t.substr(0, eq));
    if (key.rfind("--", 0) == 0) key = key.substr(2);
    if (std::find(config_keys().begin(), config_keys().end(), key) == config_keys().end()) {
      throw UsageError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    out[key] = data::trim(t.substr(eq + 1));
  }
  return out;
}

namespace detail {

inline std::size_t parse_count(const std::string& key, const std::string& v, std::size_t min = 1) {
  try {
    std::size_t used = 0;
    const long long x = std::stoll(v, &used);
    if (used != v.size() || x < static_cast<long long>(min)) throw std::invalid_argument(v);
    return static_cast<std::size_t>(x);
  } catch (const std::exception&) {
    throw UsageError("--" + key + ": expected an integer >= " + std::to_string(min) + ", got '" + v + "'");
  }
}

inline double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw UsageError("--" + key + ": expected a number, got '" + v + "'");
  }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw UsageError("--" + key + ": expected true or false, got '" + v + "'");
}

}  // namespace detail

/// Builds a config from merged settings (config file values overridden by
/// flags). `--paper-scale` switches the defaults to 10000 training
/// instances and 200 epochs; explicit settings still win.
inline ExperimentConfig make_config(const std::map<std::string, std::string>& settings) {
  ExperimentConfig c;
  auto it = settings.find("paper-scale");
  if (it != settings.end() && detail::parse_bool("paper-scale", it->second)) {
    c.paper_scale = true;
    c.n = 10000;
    c.epochs = 200;
  }
  for (const auto& [key, v] : settings) {
    try {
      if (key == "task") c.task = data::parse_task_kind(v);
      else if (key == "n") c.n = detail::parse_count(key, v);
      else if (key == "n-test") c.n_test = detail::parse_count(key, v);
      else if (key == "data-dir") c.data_dir = v;
      else if (key == "layers") c.layers = detail::parse_count(key, v);
      else if (key == "dnn-depth") c.dnn_depth = detail::parse_count(key, v);
      else if (key == "pooling") c.pooling = parse_pooling(v);
      else if (key == "aux") c.aux = parse_aux_mode(v);
      else if (key == "alpha") c.alpha = detail::parse_real(key, v);
      else if (key == "epochs") c.epochs = detail::parse_count(key, v);
      else if (key == "batch") c.batch = detail::parse_count(key, v);
      else if (key == "hidden") c.hidden = detail::parse_count(key, v);
      else if (key == "embed") c.embed = detail::parse_count(key, v);
      else if (key == "clip") c.clip = detail::parse_real(key, v);
      else if (key == "seed") c.seed = detail::parse_count(key, v, 0);
      else if (key == "out") c.out = v;
      else if (key == "grid") c.grid = detail::parse_bool(key, v);
      else if (key == "paper-scale") continue;
      else throw UsageError("unknown setting '" + key + "'");
    } catch (const InputError& e) {
      throw UsageError("--" + key + ": " + e.what());
    }
  }
  if (!(c.alpha >= 0.0 && c.alpha <= 1.0)) throw UsageError("--alpha must lie in [0, 1]");
  if (!(c.clip > 0.0)) throw UsageError("--clip must be positive");
  if (c.grid && (settings.contains("layers") || settings.contains("dnn-depth") || settings.contains("aux"))) {
    throw UsageError("--grid sweeps --layers, --dnn-depth and --aux; do not set them explicitly");
  }
  return c;
}

inline std::vector<data::Instance> read_babi_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  try {
    return data::parse_babi(in);
  } catch (const ParseError& e) {
    throw DataError(path.string() + ":" + std::to_string(e.line()) + ": " + e.what());
  }
}

/// `<dir>/train.txt` or the single `<dir>/*_train.txt` (likewise for test).
inline fs::path find_split(const fs::path& dir, const std::string& split) {
  if (fs::exists(dir / (split + ".txt"))) return dir / (split + ".txt");
  std::vector<fs::path> hits;
  if (fs::is_directory(dir)) {
    for (const auto& e : fs::directory_iterator(dir)) {
      const std::string name = e.path().filename().string();
      const std::string suffix = "_" + split + ".txt";
      if (name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
        hits.push_back(e.path());
      }
    }
  }
  if (hits.size() != 1) {
    throw DataError("expected one " + split + " file in '" + dir.string() + "', found " + std::to_string(hits.size()));
  }
  return hits.front();
}

/// Generated train and test splits. The test stream uses a seed derived
/// from, but distinct from, the training seed.
inline std::pair<std::vector<data::Instance>, std::vector<data::Instance>> generate_splits(data::TaskKind kind,
                                                                                             std::size_t n,
                                                                                             std::size_t n_test,
                                                                                             std::uint64_t seed) {
  auto train_spec = data::TaskSpec::defaults(kind, seed);
  auto test_spec = data::TaskSpec::defaults(kind, derive_seed(seed, 7));
  return {data::generate(train_spec, n), data::generate(test_spec, n_test)};
}

struct CellResult {
  std::vector<EpochMetrics> history;
  nlohmann::json summary;
};

inline nlohmann::json to_json(const EpochMetrics& m) {
  nlohmann::json j;
  j["epoch"] = m.epoch;
  j["train_loss"] = m.train_loss;
  j["reasoning_loss"] = m.reasoning_loss;
  j["recovering_loss"] = m.recovering_loss;
  j["test_accuracy"] = m.test_accuracy ? nlohmann::json(*m.test_accuracy) : nlohmann::json(nullptr);
  j["wall_ms"] = m.wall_ms;
  return j;
}

/// Trains and evaluates one configuration. Epoch records go to `metrics`
/// when given.
inline CellResult run_cell(const ExperimentConfig& c, const std::vector<data::Instance>& train_raw,
                           const std::vector<data::Instance>& test_raw, std::ostream* metrics) {
  const data::TaskKind kind = c.task.value();
  const auto lexicon = data::EntityLexicon::for_entities(data::default_entities(kind));
  std::vector<data::Instance> train_inst = train_raw, test_inst = test_raw;
  if (c.aux == AuxMode::abstract) {
    for (auto& i : train_inst) i = data::abstractize(i, lexicon);
    for (auto& i : test_inst) i = data::abstractize(i, lexicon);
  }
  const Vocabulary vocab = data::build_vocab(train_inst, c.aux);
  const AnswerSpace answers = data::build_answer_space(train_inst);
  const auto train_set = data::encode_dataset(train_inst, vocab, answers, c.aux, &lexicon);
  const auto test_set = data::encode_dataset(test_inst, vocab, answers, c.aux, &lexicon);

  ModelConfig mc;
  mc.vocab_size = vocab.size();
  mc.num_classes = answers.size();
  mc.embed_dim = c.embed;
  mc.hidden = c.hidden;
  mc.reasoner.layers = c.layers;
  mc.reasoner.dnn_depth = c.dnn_depth;
  mc.reasoner.pooling = c.pooling;
  mc.aux = c.aux;

  TrainConfig tc;
  tc.alpha = c.aux == AuxMode::none ? 0.0 : c.alpha;
  tc.epochs = c.epochs;
  tc.clip_norm = c.clip;
  tc.batch_size = c.batch;
  tc.seed = c.seed;
  mc.init_range = tc.init_range;

  NeuralReasoner model(mc, derive_seed(c.seed, 0));
  TrainHooks hooks;
  hooks.on_epoch = [metrics](const EpochMetrics& m) {
    if (metrics) *metrics << to_json(m).dump() << '\n' << std::flush;
  };
  CellResult r;
  r.history = train(model, train_set, test_set, tc, hooks);

  double best = 0.0;
  for (const auto& m : r.history) best = std::max(best, m.test_accuracy.value_or(0.0));
  r.summary = {{"task", data::to_string(kind)},
               {"n_train", train_inst.size()},
               {"L", c.layers},
               {"dnn_depth", c.dnn_depth},
               {"aux", to_string(c.aux)},
               {"alpha", tc.alpha},
               {"best_acc", best},
               {"final_acc", r.history.back().test_accuracy.value_or(0.0)},
               {"seed", c.seed}};
  return r;
}

/// `run`: generate or load data, train every requested configuration and
/// write one summary row per configuration.
inline int run(const ExperimentConfig& c, std::ostream& out) {
  if (!c.task) throw UsageError("--task is required");
  std::vector<data::Instance> train_raw, test_raw;
  if (c.data_dir) {
    train_raw = read_babi_file(find_split(*c.data_dir, "train"));
    test_raw = read_babi_file(find_split(*c.data_dir, "test"));
    if (train_raw.empty()) throw DataError("training file holds no questions");
  } else {
    std::tie(train_raw, test_raw) = generate_splits(*c.task, c.n, c.n_test, c.seed);
  }

  std::vector<ExperimentConfig> cells;
  if (c.grid) {
    for (std::size_t layers : {2, 3})
      for (std::size_t depth : {1, 2, 3})
        for (AuxMode aux : {AuxMode::none, AuxMode::original, AuxMode::abstract}) {
          ExperimentConfig cell = c;
          cell.layers = layers;
          cell.dnn_depth = depth;
          cell.aux = aux;
          cells.push_back(cell);
        }
  } else {
    cells.push_back(c);
  }

  std::ofstream summary_file;
  if (c.out) {
    fs::create_directories(*c.out);
    summary_file.open(fs::path(*c.out) / "summary.jsonl", std::ios::app);
    if (!summary_file) throw DataError("cannot write to '" + *c.out + "'");
  }
  for (const auto& cell : cells) {
    std::ofstream metrics;
    if (c.out) {
      const std::string name = c.grid ? "metrics_L" + std::to_string(cell.layers) + "_dnn" +
                                            std::to_string(cell.dnn_depth) + "_" + to_string(cell.aux) + ".jsonl"
                                      : "metrics.jsonl";
      metrics.open(fs::path(*c.out) / name);
      if (!metrics) throw DataError("cannot write metrics under '" + *c.out + "'");
    }
    CellResult r = run_cell(cell, train_raw, test_raw, c.out ? &metrics : nullptr);
    out << r.summary.dump() << '\n' << std::flush;
    if (summary_file) summary_file << r.summary.dump() << '\n' << std::flush;
  }
  return kOk;
}

/// `gen`: writes train.txt (n instances) and test.txt (n_test instances).
inline int gen(const ExperimentConfig& c, std::ostream& out) {
  if (!c.task) throw UsageError("--task is required");
  const fs::path dir = c.out.value_or(".");
  std::error_code ec;
  fs::create_directories(dir, ec);
  auto [train_raw, test_raw] = generate_splits(*c.task, c.n, c.n_test, c.seed);
  for (const auto& [name, set] : {std::pair{"train.txt", &train_raw}, std::pair{"test.txt", &test_raw}}) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw DataError("cannot write '" + (dir / name).string() + "'");
    data::write_babi(f, *set);
    if (!f) throw DataError("write to '" + (dir / name).string() + "' failed");
  }
  out << "wrote " << train_raw.size() << " train and " << test_raw.size() << " test instances to " << dir.string()
      << '\n';
  return kOk;
}

}  // namespace nr::cli
