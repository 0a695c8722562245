#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "stlgail/config.hpp"
#include "stlgail/env/expert.hpp"
#include "stlgail/error.hpp"
#include "stlgail/io/checkpoint.hpp"
#include "stlgail/io/csv_export.hpp"
#include "stlgail/io/dataset_io.hpp"
#include "stlgail/io/digest.hpp"
#include "stlgail/stl/parser.hpp"

using namespace stlgail;
namespace fs = std::filesystem;

namespace {

io::LabeledTrajectory small(std::string id, int label, double offset = 0.0) {
  io::LabeledTrajectory t;
  t.id = std::move(id);
  t.label = label;
  t.agent_dims = {"p", "v"};
  t.env_dims = {"q"};
  t.agent_states = {0.1 + offset, 1.0 / 3.0, 2.0, -1e-12, 4.0, 5.0};
  t.env_states = {7.0, 8.0, 9.0};
  t.meta["k"] = "v";
  return t;
}

fs::path temp_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("stlgail_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Dataset, RoundTripIsExact) {
  const io::Dataset d{small("a", 1), small("b", -1, 0.7)};
  const auto text = io::dataset_to_jsonl(d);
  EXPECT_EQ(io::parse_dataset(text), d);
  EXPECT_EQ(io::dataset_to_jsonl(io::parse_dataset(text)), text);
}

TEST(Dataset, FileRoundTrip) {
  const auto dir = temp_dir("dataset");
  Rng rng(1);
  const auto d = env::gen_unicycle_expert(env::UnicycleEnv{}, 3, rng);
  io::save_dataset(d, dir / "d.jsonl");
  EXPECT_EQ(io::load_dataset(dir / "d.jsonl"), d);
  EXPECT_THROW(io::load_dataset(dir / "missing.jsonl"), IoError);
}

TEST(Dataset, ParseErrorsCarryLineNumbers) {
  const auto good = io::trajectory_to_json(small("a", 1));
  try {
    io::parse_dataset(good + "\n{not json}\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  auto bad_label = good;
  bad_label.replace(bad_label.find("\"label\":1"), 9, "\"label\":2");
  EXPECT_THROW(io::parse_dataset(bad_label), ParseError);
}

TEST(Dataset, InconsistentHorizon) {
  auto longer = small("b", 1);
  longer.agent_states.insert(longer.agent_states.end(), {1.0, 2.0});
  longer.env_states.push_back(3.0);
  const auto text = io::dataset_to_jsonl({small("a", 1), longer});
  EXPECT_THROW(io::parse_dataset(text), InconsistentHorizon);
}

TEST(Dataset, BlankLinesAreSkipped) {
  const auto text = "\n" + io::trajectory_to_json(small("a", 1)) + "\n\n";
  EXPECT_EQ(io::parse_dataset(text).size(), 1u);
}

TEST(Digest, Fnv1aKnownValues) {
  EXPECT_EQ(io::fnv1a(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(io::fnv1a("a"), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(io::hex_digest(0xabcull), "0000000000000abc");
  const io::Dataset d{small("a", 1)};
  EXPECT_EQ(io::dataset_digest(d), io::hex_digest(io::fnv1a(io::dataset_to_jsonl(d))));
  EXPECT_NE(io::dataset_digest(d), io::dataset_digest({small("a", 1, 1e-9)}));
}

TEST(Csv, RolloutsLongFormat) {
  const auto csv = io::rollouts_csv({small("a", -1)}, "note");
  EXPECT_EQ(csv.substr(0, 7), "# note\n");
  EXPECT_NE(csv.find("traj_id,t,p,v,q,label,source\n"), std::string::npos);
  EXPECT_NE(csv.find("a,2,4,5,9,-1,"), std::string::npos);
  EXPECT_THROW(io::rollouts_csv({}), EmptyInput);
  auto other = small("b", 1);
  other.agent_dims = {"x", "y"};
  EXPECT_THROW(io::rollouts_csv({small("a", 1), other}), DimensionMismatch);
}

TEST(Csv, MetricsAndTiming) {
  train::GanMetrics m;
  m.iteration = 2;
  m.mcr_exact = 0.25;
  m.mean_policy_robustness = std::numeric_limits<double>::quiet_NaN();
  m.wall_time_s = 1.5;
  const auto csv = io::metrics_csv({m});
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "iteration,mcr_smooth,mcr_exact,mean_policy_robustness,loss");
  EXPECT_EQ(csv.find("1.5"), std::string::npos);
  EXPECT_NE(io::timing_csv({m}).find("2,1.5"), std::string::npos);
}

TEST(Checkpoint, RoundTripAndResume) {
  RunConfig cfg;
  cfg.network.n_pred = 2;
  cfg.inference.max_proposals = 60;
  cfg.policy.steps = 5;
  cfg.policy.batch = 4;
  cfg.gan.n_ga = 5;
  cfg.gan.max_iterations = 1;
  cfg.gan.policy_hidden = 4;
  cfg.gan.known_rule = "G[0,20](dO >= 1)";
  const auto setup = make_setup(cfg);
  Rng rng(3);
  const auto d0 = env::gen_unicycle_expert(std::get<env::UnicycleEnv>(setup.env), 6, rng);
  train::GanState last;
  train::gan_loop(d0, setup, [&](const train::GanState& s) { last = s; });

  const auto c = io::make_checkpoint(cfg, last, d0, "d0.jsonl", "TRUE");
  EXPECT_EQ(c.state.dataset.size(), last.dataset.size() - d0.size());
  const auto text = io::checkpoint_to_json(c);
  const auto back = io::parse_checkpoint(text);
  EXPECT_EQ(io::checkpoint_to_json(back), text);
  EXPECT_EQ(back.config, cfg);
  ASSERT_TRUE(back.state.model.known_rule.has_value());
  EXPECT_EQ(stl::print(*back.state.model.known_rule, back.state.model.shape.dim_names),
            "G[0,20](dO >= 1)");

  const auto restored = io::restore_state(back, d0);
  EXPECT_EQ(restored.dataset, last.dataset);
  EXPECT_EQ(restored.model.params, last.model.params);
  EXPECT_EQ(restored.policy, last.policy);

  auto other = d0;
  other.pop_back();
  EXPECT_THROW(io::restore_state(back, other), DatasetMismatch);
}

TEST(Checkpoint, RejectsBadDocuments) {
  EXPECT_THROW(io::parse_checkpoint("{}"), ParseError);
  EXPECT_THROW(io::parse_checkpoint("[1,2"), ParseError);
  EXPECT_THROW(io::parse_checkpoint(R"({"format":"stlgail-checkpoint","version":99})"),
               VersionMismatch);
  EXPECT_THROW(io::parse_checkpoint(R"({"format":"stlgail-checkpoint","version":1})"),
               ParseError);
}

TEST(Config, DefaultsAndOverrides) {
  const auto c = parse_config(R"({"env":"driving","gan":{"n_ga":7},"seed":3})");
  EXPECT_EQ(c.env, "driving");
  EXPECT_EQ(c.gan.n_ga, 7);
  EXPECT_EQ(c.seed, 3u);
  EXPECT_EQ(c.network.n_pred, 6);
  EXPECT_EQ(parse_config(config_to_json(c)), c);
  EXPECT_EQ(config_digest(c), config_digest(parse_config(config_to_json(c))));
  EXPECT_NE(config_digest(c), config_digest(RunConfig{}));
}

TEST(Config, Rejections) {
  EXPECT_THROW(parse_config("{"), ConfigError);
  EXPECT_THROW(parse_config(R"({"gan":{"n_gaa":1}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"env":"boat"})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"gan":{"n_ga":"many"}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"network":{"predicate_dims":["speed"]}})"), ConfigError);
  EXPECT_THROW(parse_config(R"j({"gan":{"known_rule":"F[0,99](dA < 1)"}})j"), ConfigError);
  EXPECT_THROW(parse_config(R"({"gan":{"known_rule":"zz < 1"}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"policy":{"batch":0}})"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.json"), IoError);
}

TEST(Config, ShapeFollowsPredicateDims) {
  const auto c = parse_config(
      R"({"env":"driving","network":{"n_pred":4,"predicate_dims":["veg","vot"]}})");
  const auto s = make_shape(c, make_environment(c));
  EXPECT_EQ(s.predicate_dim, (std::vector<int>{1, 3, 1, 3}));
  EXPECT_EQ(s.horizon, 57);
}
