#include "stlgail/io/checkpoint.hpp"

#include <cmath>
#include <limits>

#include "json.hpp"
#include "stlgail/error.hpp"
#include "stlgail/io/dataset_io.hpp"
#include "stlgail/io/digest.hpp"
#include "stlgail/stl/parser.hpp"

namespace stlgail::io {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr const char* kFormat = "stlgail-checkpoint";

ordered_json params_json(const ad::ParamVector& p) {
  ordered_json out = ordered_json::array();
  for (const auto& g : p.groups()) {
    const auto v = p.group(g.name);
    out.push_back({{"name", g.name}, {"values", std::vector<double>(v.begin(), v.end())}});
  }
  return out;
}

ad::ParamVector params_from(const json& j) {
  ad::ParamVector p;
  for (const auto& g : j) {
    const auto values = g.at("values").get<std::vector<double>>();
    auto dst = p.add_group(g.at("name").get<std::string>(), values.size());
    std::copy(values.begin(), values.end(), dst.begin());
  }
  return p;
}

double number_or_nan(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace

std::string checkpoint_to_json(const Checkpoint& c) {
  const auto& s = c.state;
  const auto& shape = s.model.shape;
  ordered_json j;
  j["format"] = kFormat;
  j["version"] = kCheckpointVersion;
  j["config"] = ordered_json::parse(config_to_json(c.config));
  j["config_digest"] = c.config_digest;

  ordered_json inf;
  inf["shape"] = {{"n_pred", shape.n_pred},
                  {"n_conj", shape.n_conj},
                  {"horizon", shape.horizon},
                  {"tau", shape.tau},
                  {"window_sharpness", shape.window_sharpness},
                  {"inert", shape.inert},
                  {"dim_names", shape.dim_names},
                  {"predicate_dim", shape.predicate_dim}};
  inf["normalizer"] = {{"mid", s.model.normalizer.mid}, {"half", s.model.normalizer.half}};
  inf["params"] = params_json(s.model.params);
  inf["known_rule"] = s.model.known_rule
                          ? ordered_json(stl::print(*s.model.known_rule, shape.dim_names))
                          : ordered_json(nullptr);
  inf["margin"] = s.margin;
  inf["temperature"] = s.temperature;
  inf["trained"] = s.has_model;
  j["inference"] = std::move(inf);

  j["policy"] = {{"shape",
                  {{"input_dim", c.policy_shape.input_dim},
                   {"hidden", c.policy_shape.hidden},
                   {"control_dim", c.policy_shape.control_dim}}},
                 {"params", params_json(s.policy)}};

  ordered_json hist = ordered_json::array();
  for (const auto& m : s.history) {
    hist.push_back({{"iteration", m.iteration},
                    {"mcr_smooth", m.mcr_smooth},
                    {"mcr_exact", m.mcr_exact},
                    {"mean_policy_robustness", m.mean_policy_robustness},
                    {"loss", m.loss},
                    {"wall_time_s", m.wall_time_s}}); // NaN is written as null
  }
  j["gan"] = {{"iteration", s.iteration},
              {"trained_size", s.trained_size},
              {"original_size", s.original_size},
              {"bootstrapped", s.bootstrapped},
              {"stopped", s.stopped},
              {"history", std::move(hist)}};
  j["rng"] = {{"master_seed", c.config.seed}, {"next_iteration", s.iteration}};

  ordered_json gen = ordered_json::array();
  for (const auto& t : s.dataset) gen.push_back(ordered_json::parse(trajectory_to_json(t)));
  j["dataset"] = {{"digest", c.dataset_digest},
                  {"path", c.dataset_path},
                  {"generated", std::move(gen)}};
  j["formula"] = c.formula;
  return j.dump(1) + "\n";
}

Checkpoint parse_checkpoint(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
  if (!j.is_object() || j.value("format", "") != kFormat) {
    throw ParseError("not a checkpoint document");
  }
  if (j.value("version", -1) != kCheckpointVersion) {
    throw VersionMismatch("checkpoint version " + j["version"].dump() + ", expected " +
                          std::to_string(kCheckpointVersion));
  }
  Checkpoint c;
  try {
    c.config = parse_config(j.at("config").dump());
    c.config_digest = j.at("config_digest").get<std::string>();

    const auto& inf = j.at("inference");
    const auto& sh = inf.at("shape");
    auto& shape = c.state.model.shape;
    shape.n_pred = sh.at("n_pred").get<int>();
    shape.n_conj = sh.at("n_conj").get<int>();
    shape.horizon = sh.at("horizon").get<int>();
    shape.tau = sh.at("tau").get<double>();
    shape.window_sharpness = sh.at("window_sharpness").get<double>();
    shape.inert = sh.at("inert").get<double>();
    shape.dim_names = sh.at("dim_names").get<std::vector<std::string>>();
    shape.predicate_dim = sh.at("predicate_dim").get<std::vector<int>>();
    shape.validate();
    c.state.model.normalizer.mid = inf.at("normalizer").at("mid").get<std::vector<double>>();
    c.state.model.normalizer.half = inf.at("normalizer").at("half").get<std::vector<double>>();
    c.state.model.params = params_from(inf.at("params"));
    if (!c.state.model.params.same_layout(infer::make_params(shape))) {
      throw ParseError("inference parameters do not match the shape");
    }
    if (!inf.at("known_rule").is_null()) {
      c.state.model.known_rule =
          stl::parse(inf.at("known_rule").get<std::string>(), shape.dim_names);
    }
    c.state.margin = inf.at("margin").get<double>();
    c.state.temperature = inf.at("temperature").get<double>();
    c.state.has_model = inf.at("trained").get<bool>();

    const auto& pol = j.at("policy");
    c.policy_shape.input_dim = pol.at("shape").at("input_dim").get<int>();
    c.policy_shape.hidden = pol.at("shape").at("hidden").get<int>();
    c.policy_shape.control_dim = pol.at("shape").at("control_dim").get<int>();
    c.state.policy = params_from(pol.at("params"));
    if (!c.state.policy.same_layout(policy::make_policy_params(c.policy_shape))) {
      throw ParseError("policy parameters do not match the shape");
    }

    const auto& gan = j.at("gan");
    c.state.iteration = gan.at("iteration").get<int>();
    c.state.trained_size = gan.at("trained_size").get<std::size_t>();
    c.state.original_size = gan.at("original_size").get<std::size_t>();
    c.state.bootstrapped = gan.at("bootstrapped").get<bool>();
    c.state.stopped = gan.at("stopped").get<bool>();
    for (const auto& m : gan.at("history")) {
      train::GanMetrics g;
      g.iteration = m.at("iteration").get<int>();
      g.mcr_smooth = number_or_nan(m.at("mcr_smooth"));
      g.mcr_exact = number_or_nan(m.at("mcr_exact"));
      g.mean_policy_robustness = number_or_nan(m.at("mean_policy_robustness"));
      g.loss = number_or_nan(m.at("loss"));
      g.wall_time_s = number_or_nan(m.at("wall_time_s"));
      c.state.history.push_back(g);
    }

    const auto& ds = j.at("dataset");
    c.dataset_digest = ds.at("digest").get<std::string>();
    c.dataset_path = ds.at("path").get<std::string>();
    std::string lines;
    for (const auto& t : ds.at("generated")) lines += t.dump() + "\n";
    c.state.dataset = parse_dataset(lines);
    c.formula = j.at("formula").get<std::string>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  } catch (const ConfigError& e) {
    throw ParseError(std::string("checkpoint config: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  } catch (const SyntaxError& e) {
    throw ParseError(std::string("checkpoint known rule: ") + e.what());
  } catch (const UnknownVariable& e) {
    throw ParseError(std::string("checkpoint known rule: ") + e.what());
  }
  return c;
}

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path) {
  write_file(path, checkpoint_to_json(c));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return parse_checkpoint(read_file(path));
}

Checkpoint make_checkpoint(const RunConfig& config, const train::GanState& state,
                           const Dataset& d0, const std::string& dataset_path,
                           const std::string& formula) {
  Checkpoint c;
  c.config = config;
  c.config_digest = config_digest(config);
  const auto env = make_environment(config);
  c.policy_shape = env::policy_shape(env, config.gan.policy_hidden);
  c.state = state;
  c.state.dataset.assign(state.dataset.begin() + static_cast<std::ptrdiff_t>(state.original_size),
                         state.dataset.end());
  c.dataset_digest = dataset_digest(d0);
  c.dataset_path = dataset_path;
  c.formula = formula;
  return c;
}

train::GanState restore_state(const Checkpoint& c, const Dataset& d0) {
  if (dataset_digest(d0) != c.dataset_digest || d0.size() != c.state.original_size) {
    throw DatasetMismatch("dataset does not match the checkpoint (digest " + c.dataset_digest +
                          ")");
  }
  train::GanState s = c.state;
  s.dataset = d0;
  s.dataset.insert(s.dataset.end(), c.state.dataset.begin(), c.state.dataset.end());
  return s;
}

}  // namespace stlgail::io
