#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "stlgail/config.hpp"
#include "stlgail/env/expert.hpp"
#include "stlgail/error.hpp"
#include "stlgail/io/checkpoint.hpp"
#include "stlgail/io/csv_export.hpp"
#include "stlgail/io/dataset_io.hpp"
#include "stlgail/log.hpp"
#include "stlgail/stl/parser.hpp"
#include "stlgail/train/gan.hpp"
#include "stlgail/train/mcr.hpp"

namespace fs = std::filesystem;
using namespace stlgail;

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfigExit = 2, kDataExit = 3, kDivergenceExit = 4 };

// Seed phases for commands that draw randomness outside the GAN loop.
constexpr std::uint64_t kRolloutPhase = 101;
constexpr std::uint64_t kAdjustPhase = 102;

/// Sibling output path: `out` with its extension replaced by `suffix`.
fs::path sibling(const fs::path& out, const std::string& suffix) {
  fs::path p = out;
  p.replace_extension();
  p += suffix;
  return p;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

/// Environment for a dataset without a config: chosen from its agent dims.
RunConfig config_for(const io::Dataset& d) {
  RunConfig cfg;
  if (!d.empty() && d.front().agent_dims == env::DrivingEnv().agent_names()) cfg.env = "driving";
  return cfg;
}

/// D0 named by the checkpoint (or `override`), checked against its digest.
io::Dataset load_original(const io::Checkpoint& c, const std::string& override_path) {
  const std::string path = override_path.empty() ? c.dataset_path : override_path;
  auto d0 = io::load_dataset(path);
  io::restore_state(c, d0);
  return d0;
}

void write_text(const fs::path& path, const std::string& text) { io::write_file(path, text); }

// gen-data

struct GenOptions {
  std::string env;
  int n = 0;
  std::uint64_t seed = 0;
  std::string out;
  bool negatives = false;
  std::string config;
};

int gen_data(const GenOptions& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : load_config(o.config);
  cfg.env = o.env;
  const auto environment = make_environment(cfg);
  const std::string digest = config_digest(cfg);
  Rng rng(o.seed);
  io::Dataset d;
  if (const auto* uni = std::get_if<env::UnicycleEnv>(&environment)) {
    d = env::gen_unicycle_expert(*uni, o.n, rng);
    if (o.negatives) {
      auto neg = env::gen_unicycle_negatives(*uni, o.n, rng);
      d.insert(d.end(), neg.begin(), neg.end());
    }
  } else {
    if (o.n % 4 != 0) throw ConfigError("driving --n must be a multiple of 4 (one quarter per situation)");
    if (o.negatives) log_warn("driving data always holds all four situations; --negatives ignored");
    d = env::gen_driving_data(std::get<env::DrivingEnv>(environment), o.n / 4, rng);
  }
  for (auto& t : d) t.meta["config_digest"] = digest;
  io::save_dataset(d, o.out);
  std::cout << "wrote " << d.size() << " trajectories (" << io::count_label(d, 1)
            << " positive) to " << o.out << "\n";
  return kOk;
}

// train

struct TrainOptions {
  std::string data;
  std::string config;
  std::string out;
  std::string resume;
};

int run_train(const TrainOptions& o) {
  const RunConfig cfg = load_config(o.config);
  const std::string digest = config_digest(cfg);
  const auto d0 = io::load_dataset(o.data);
  const fs::path out = o.out;
  const fs::path metrics_path =
      cfg.output.metrics.empty() ? sibling(out, ".metrics.csv") : fs::path(cfg.output.metrics);
  const fs::path formula_path =
      cfg.output.formula.empty() ? sibling(out, ".formula.txt") : fs::path(cfg.output.formula);
  const fs::path dataset_path =
      cfg.output.dataset.empty() ? sibling(out, ".dataset.jsonl") : fs::path(cfg.output.dataset);
  const fs::path timing_path = sibling(out, ".timing.csv");

  std::ofstream logfile(sibling(out, ".log"), std::ios::trunc);
  set_log_sink([&logfile](LogLevel level, const std::string& m) {
    static const char* names[] = {"debug", "info", "warn", "error"};
    const std::string line = std::string("[") + names[static_cast<int>(level)] + "] " + m + "\n";
    std::cerr << line;
    if (logfile) logfile << line << std::flush;
  });
  log_info("config " + o.config + " (digest " + digest + "), data " + o.data + ", " +
           std::to_string(d0.size()) + " trajectories");

  const auto setup = make_setup(cfg);
  train::GanState state;
  if (!o.resume.empty()) {
    const auto c = io::load_checkpoint(o.resume);
    if (c.config_digest != digest) {
      throw ConfigError("config digest " + digest + " differs from the checkpoint's " +
                        c.config_digest);
    }
    state = io::restore_state(c, d0);
    log_info("resuming at iteration " + std::to_string(state.iteration));
  } else {
    state = train::gan_init(d0, setup);
  }

  const auto names = env::feature_names(setup.env);
  auto formula_of = [&](const train::GanState& s) {
    if (!s.has_model) return std::string("TRUE");
    const io::Dataset trained(s.dataset.begin(),
                              s.dataset.begin() + static_cast<std::ptrdiff_t>(s.trained_size));
    const auto f = train::learned_formula(s.model, env::feature_signals(setup.env, trained),
                                          setup.gan.gate_threshold);
    return stl::print(f, names);
  };
  auto write_tables = [&](const train::GanState& s) {
    write_text(metrics_path, io::metrics_csv(s.history, "config_digest " + digest));
    write_text(timing_path, io::timing_csv(s.history));
  };

  train::GanState last = state;
  const auto result = train::gan_run(state, setup, [&](const train::GanState& s) {
    last = s;
    const auto ckpt = io::make_checkpoint(cfg, s, d0, o.data, formula_of(s));
    io::save_checkpoint(ckpt, sibling(out, ".iter" + std::to_string(s.iteration - 1) + ".json"));
    write_tables(s);
  });

  const std::string formula = stl::print(result.formula, names);
  io::save_checkpoint(io::make_checkpoint(cfg, last, d0, o.data, formula), out);
  write_tables(last);
  write_text(formula_path, formula + "\n");
  io::save_dataset(result.dataset, dataset_path);

  const double final_mcr =
      train::mcr(result.formula, env::feature_signals(setup.env, result.dataset));
  std::cout << "formula: " << formula << "\n";
  std::cout << "exact mcr " << fmt(final_mcr) << " on " << result.dataset.size()
            << " trajectories after " << last.history.size() << " iterations"
            << (result.stopped ? " (stopped on the MCR threshold)" : "") << "\n";
  return kOk;
}

// extract

struct ExtractOptions {
  std::string ckpt;
  std::optional<double> threshold;
  std::string out;
  std::string data;
};

int extract(const ExtractOptions& o) {
  const auto c = io::load_checkpoint(o.ckpt);
  const auto d0 = load_original(c, o.data);
  const auto s = io::restore_state(c, d0);
  const auto environment = make_environment(c.config);
  const io::Dataset trained(s.dataset.begin(),
                            s.dataset.begin() + static_cast<std::ptrdiff_t>(s.trained_size));
  const double thr = o.threshold.value_or(c.config.gan.gate_threshold);
  if (!(thr > 0.0 && thr < 1.0)) throw ConfigError("--threshold must be in (0, 1)");
  const auto f =
      train::learned_formula(s.model, env::feature_signals(environment, trained), thr);
  const std::string text = stl::print(f, env::feature_names(environment));
  write_text(o.out, text + "\n");
  std::cout << text << "\n";
  return kOk;
}

// eval

struct EvalOptions {
  std::string formula;
  std::string data;
  std::string config;
};

int eval(const EvalOptions& o) {
  const auto d = io::load_dataset(o.data);
  const RunConfig cfg = o.config.empty() ? config_for(d) : load_config(o.config);
  const auto environment = make_environment(cfg);
  std::string text = io::read_file(o.formula);
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
  stl::Formula f = stl::Formula::truth();
  try {
    f = stl::parse(text, env::feature_names(environment));
  } catch (const SyntaxError& e) {
    throw ConfigError(std::string("formula: ") + e.what());
  } catch (const UnknownVariable& e) {
    throw ConfigError(std::string("formula: ") + e.what());
  }
  const auto sig = env::feature_signals(environment, d);
  const auto c = train::confusion(f, sig);
  std::cout << "mcr " << fmt(train::mcr(f, sig)) << "\n";
  std::cout << "positives " << c.positives << " misclassified " << c.false_negatives << "\n";
  std::cout << "negatives " << c.negatives << " misclassified " << c.false_positives << "\n";
  return kOk;
}

// rollout

struct RolloutOptions {
  std::string ckpt;
  int n = 50;
  std::string out;
  std::string data;
  std::optional<std::uint64_t> seed;
};

io::Dataset rollouts_of(const io::Checkpoint& c, const io::Dataset& d0, int n, std::uint64_t seed,
                        const std::string& prefix) {
  const auto environment = make_environment(c.config);
  Rng rng(seed);
  auto rolls = train::policy_rollouts(environment, c.policy_shape, c.state.policy,
                                      env::env_pool(d0), n, rng, prefix);
  for (auto& t : rolls) t.meta["source"] = "policy";
  return rolls;
}

int rollout(const RolloutOptions& o) {
  if (o.n < 1) throw ConfigError("--n must be >= 1");
  const auto c = io::load_checkpoint(o.ckpt);
  const auto d0 = load_original(c, o.data);
  const std::uint64_t seed = o.seed.value_or(derive_seed(c.config.seed, {kRolloutPhase}));
  const auto rolls = rollouts_of(c, d0, o.n, seed, "rollout");
  io::export_rollouts(rolls, o.out, "config_digest " + c.config_digest);
  std::cout << "wrote " << rolls.size() << " rollouts to " << o.out << "\n";
  return kOk;
}

// adjust

struct AdjustOptions {
  std::string ckpt;
  std::string conjoin;
  bool retrain = false;
  std::string out;
  std::string data;
  int n = 50;
};

int adjust(const AdjustOptions& o) {
  auto c = io::load_checkpoint(o.ckpt);
  const auto& shape = c.state.model.shape;
  stl::Formula rule = stl::Formula::truth();
  try {
    rule = stl::parse(o.conjoin, shape.dim_names);
  } catch (const SyntaxError& e) {
    throw ConfigError(std::string("--conjoin: ") + e.what());
  } catch (const UnknownVariable& e) {
    throw ConfigError(std::string("--conjoin: ") + e.what());
  }
  if (stl::horizon(rule) > shape.horizon) {
    throw ConfigError("--conjoin horizon " + std::to_string(stl::horizon(rule)) +
                          " exceeds the trajectory horizon " + std::to_string(shape.horizon));
  }
  const auto d0 = load_original(c, o.data);
  auto& model = c.state.model;
  model.known_rule = model.known_rule ? stl::Formula::conjunction({*model.known_rule, rule}) : rule;
  c.formula = stl::print(
      stl::Formula::conjunction({stl::parse(c.formula, shape.dim_names), rule}), shape.dim_names);
  log_info("known rule: " + stl::print(*model.known_rule, shape.dim_names));

  if (o.retrain) {
    const auto environment = make_environment(c.config);
    train::PolicyTrainConfig pcfg = c.config.policy;
    pcfg.seed = derive_seed(c.config.seed,
                            {static_cast<std::uint64_t>(c.state.iteration), kAdjustPhase});
    const auto r = train::train_policy(c.state.policy, model, environment, c.policy_shape,
                                       env::env_pool(d0), pcfg);
    c.state.policy = r.params;
    log_info("policy retrained: objective " + fmt(r.objective.empty() ? 0.0 : r.objective.back()));
  }
  io::save_checkpoint(c, o.out);
  const fs::path csv = sibling(o.out, ".rollouts.csv");
  const auto rolls =
      rollouts_of(c, d0, o.n, derive_seed(c.config.seed, {kRolloutPhase, kAdjustPhase}), "adjust");
  io::export_rollouts(rolls, csv, "config_digest " + c.config_digest);
  std::cout << "formula: " << c.formula << "\n";
  std::cout << "wrote " << o.out << " and " << csv.string() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learn STL task specifications and control policies from demonstrations"};
  app.require_subcommand(1);
  bool verbose = false;
  bool quiet = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");
  app.add_flag("-q,--quiet", quiet, "Warnings and errors only");

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Synthesize a demonstration dataset");
  gen_cmd->add_option("--env", gen.env, "unicycle or driving")
      ->required()
      ->check(CLI::IsMember({"unicycle", "driving"}));
  gen_cmd->add_option("--n", gen.n, "Trajectory count (driving: total over four situations)")
      ->required()
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", gen.seed, "Random seed");
  gen_cmd->add_option("--out", gen.out, "Output JSONL")->required();
  gen_cmd->add_flag("--negatives", gen.negatives,
                    "Unicycle: also write n scripted negatives");
  gen_cmd->add_option("--config", gen.config, "Config supplying environment constants");

  TrainOptions tr;
  auto* train_cmd = app.add_subcommand("train", "Run the adversarial learning loop");
  train_cmd->add_option("--data", tr.data, "Demonstrations (JSONL)")->required();
  train_cmd->add_option("--config", tr.config, "Run config (JSON)")->required();
  train_cmd->add_option("--out", tr.out, "Checkpoint path")->required();
  train_cmd->add_option("--resume", tr.resume, "Continue from this checkpoint");

  ExtractOptions ex;
  auto* extract_cmd = app.add_subcommand("extract", "Write the learned formula");
  extract_cmd->add_option("--ckpt", ex.ckpt, "Checkpoint")->required();
  extract_cmd->add_option("--threshold", ex.threshold, "Gate threshold (default from config)");
  extract_cmd->add_option("--out", ex.out, "Formula file")->required();
  extract_cmd->add_option("--data", ex.data, "Original dataset (default: path in checkpoint)");

  EvalOptions ev;
  auto* eval_cmd = app.add_subcommand("eval", "Misclassification rate of a formula");
  eval_cmd->add_option("--formula", ev.formula, "Formula file")->required();
  eval_cmd->add_option("--data", ev.data, "Labeled dataset (JSONL)")->required();
  eval_cmd->add_option("--config", ev.config, "Config (default: environment from the data)");

  RolloutOptions ro;
  auto* rollout_cmd = app.add_subcommand("rollout", "Roll out the learned policy to CSV");
  rollout_cmd->add_option("--ckpt", ro.ckpt, "Checkpoint")->required();
  rollout_cmd->add_option("--n", ro.n, "Number of rollouts");
  rollout_cmd->add_option("--out", ro.out, "CSV path")->required();
  rollout_cmd->add_option("--data", ro.data, "Original dataset (default: path in checkpoint)");
  rollout_cmd->add_option("--seed", ro.seed, "Random seed (default: derived from the config)");

  AdjustOptions ad;
  auto* adjust_cmd =
      app.add_subcommand("adjust", "Conjoin a known rule and optionally retrain the policy");
  adjust_cmd->add_option("--ckpt", ad.ckpt, "Checkpoint")->required();
  adjust_cmd->add_option("--conjoin", ad.conjoin, "STL formula over the feature names")
      ->required();
  adjust_cmd->add_flag("--retrain", ad.retrain, "Retrain the policy against the new formula");
  adjust_cmd->add_option("--out", ad.out, "New checkpoint path")->required();
  adjust_cmd->add_option("--data", ad.data, "Original dataset (default: path in checkpoint)");
  adjust_cmd->add_option("--n", ad.n, "Rollouts written next to the checkpoint");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfigExit;
  }
  if (verbose) set_log_level(LogLevel::Debug);
  if (quiet) set_log_level(LogLevel::Warn);

  try {
    if (*gen_cmd) return gen_data(gen);
    if (*train_cmd) return run_train(tr);
    if (*extract_cmd) return extract(ex);
    if (*eval_cmd) return eval(ev);
    if (*rollout_cmd) return rollout(ro);
    if (*adjust_cmd) return adjust(ad);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigExit;
  } catch (const NonFiniteValue& e) {
    std::cerr << "training diverged: " << e.what() << "\n";
    return kDivergenceExit;
  } catch (const NonFiniteState& e) {
    std::cerr << "training diverged: " << e.what() << "\n";
    return kDivergenceExit;
  } catch (const VersionMismatch& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kDataExit;
  } catch (const Error& e) {
    // Everything else the library raises concerns the input data or files.
    std::cerr << "data error: " << e.what() << "\n";
    return kDataExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}
