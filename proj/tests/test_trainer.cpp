#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "resq/errors.hpp"
#include "resq/eval.hpp"
#include "resq/trainer.hpp"
#include "support/fixtures.hpp"

using namespace resq;

namespace {

// Small geometry keeps these runs fast; the acceptance suite exercises the
// full defaults.
const EncoderDims kDims{8, 3, 8};

AgentConfig small_config() {
  AgentConfig config;
  config.hidden = 16;
  config.batch_size = 16;
  config.target_sync_period = 50;
  return config;
}

SyntheticAreaConfig small_synth() {
  SyntheticAreaConfig synth;
  synth.sessions_min = 4;
  synth.sessions_max = 8;
  synth.slots_min = 4;
  synth.slots_max = 8;
  return synth;
}

BootstrapModel small_model(std::uint64_t seed = 1) {
  return fit_bootstrap(testing::synthetic_spot_series(400, seed), 16);
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("resq-test-" + std::to_string(std::rand()) + std::to_string(std::rand()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("phase 1 runs one episode per area and bounds episode length") {
  QAgent agent(small_config(), kDims, 1);
  SyntheticAreaConfig synth;
  synth.sessions_min = 2;
  synth.sessions_max = 2;
  synth.slots_min = 2;
  synth.slots_max = 2;
  PhaseConfig cfg;
  cfg.episodes = 1;
  const TrainReport report = run_phase1(agent, small_model(), synth, cfg, RewardParams{});
  CHECK(report.episodes == 1);
  CHECK(report.episode_rewards.size() == 1);
  // A 2-session area admits at most 3 steps, hence at most 3 transitions.
  CHECK(agent.buffer().size() <= 3);
}

TEST_CASE("phase 1 is deterministic in the seed") {
  PhaseConfig cfg;
  cfg.episodes = 12;
  cfg.seed = 9;
  const BootstrapModel model = small_model();

  QAgent a(small_config(), kDims, 5);
  QAgent b(small_config(), kDims, 5);
  const TrainReport ra = run_phase1(a, model, small_synth(), cfg, RewardParams{});
  const TrainReport rb = run_phase1(b, model, small_synth(), cfg, RewardParams{});
  CHECK(ra.episode_rewards == rb.episode_rewards);
  CHECK(ra.episode_losses == rb.episode_losses);
  CHECK(ra.to_csv() == rb.to_csv());

  QAgent c(small_config(), kDims, 5);
  PhaseConfig other = cfg;
  other.seed = 10;
  const TrainReport rc = run_phase1(c, model, small_synth(), other, RewardParams{});
  CHECK(ra.episode_rewards != rc.episode_rewards);
}

TEST_CASE("phase 1 requires a fitted model") {
  QAgent agent(small_config(), kDims, 1);
  const BootstrapModel unfitted;
  PhaseConfig cfg;
  cfg.episodes = 1;
  CHECK_THROWS_AS(run_phase1(agent, unfitted, small_synth(), cfg, RewardParams{}), Error);
}

TEST_CASE("phase 2 draws uniformly from real areas and validates input") {
  QAgent agent(small_config(), kDims, 2);
  PhaseConfig cfg;
  cfg.episodes = 10;
  CHECK_THROWS_AS(run_phase2(agent, {}, cfg, RewardParams{}), Error);

  AreaGrid grid;
  grid.slot_count = 6;
  grid.max_sessions = 8;
  const auto series = testing::synthetic_spot_series(600, 3);
  const auto areas = testing::trace_areas(series, series.begin()->second.start,
                                          series.begin()->second.start + Duration::minutes(500),
                                          grid);
  REQUIRE(!areas.empty());
  const TrainReport report = run_phase2(agent, areas, cfg, RewardParams{});
  CHECK(report.episodes == cfg.episodes);
  CHECK(report.moving_avg_reward.size() == 10);
}

TEST_CASE("phase 3 fires fine-tuning rounds per interval of transitions") {
  PhaseConfig cfg;
  cfg.fine_tune_interval = 10;
  cfg.updates_per_round = 2;

  AgentConfig agent_cfg = small_config();
  agent_cfg.batch_size = 4;

  SyntheticAreaConfig synth;
  synth.sessions_min = 4;
  synth.sessions_max = 4;
  synth.slots_min = 4;
  synth.slots_max = 4;
  const BootstrapModel model = small_model();

  SUBCASE("stream shorter than the interval never fine-tunes") {
    QAgent agent(agent_cfg, kDims, 3);
    // One 4-session area yields at most 5 transitions < 10.
    std::vector<CostArea> areas = {model.sample_area(synth, 1)};
    const TrainReport report =
        run_phase3(agent, stream_from_areas(std::move(areas)), cfg, RewardParams{});
    CHECK(report.episodes == 1);
    CHECK(agent.train_steps() == 0);
  }

  SUBCASE("rounds equal floor(transitions / interval)") {
    QAgent agent(agent_cfg, kDims, 3);
    // Greedy agents may accept immediately; count actual transitions by
    // replaying a fixed large stream and checking the floor law.
    std::vector<CostArea> areas;
    for (std::uint64_t i = 0; i < 40; ++i) areas.push_back(model.sample_area(synth, i));
    const TrainReport report =
        run_phase3(agent, stream_from_areas(areas), cfg, RewardParams{});
    std::int64_t transitions = static_cast<std::int64_t>(agent.buffer().total_pushes());
    CHECK(agent.train_steps() == (transitions / cfg.fine_tune_interval) * cfg.updates_per_round);
    CHECK(report.episodes == 40);
  }
}

TEST_CASE("phase 3 on a stationary stream does not hurt evaluation reward") {
  // Seeded before/after comparison, majority over three seeds. Windows must
  // be long enough for price structure to resolve inside an episode.
  const EncoderDims p3_dims{16, 3, 8};
  const BootstrapModel model = small_model(11);
  SyntheticAreaConfig synth = small_synth();
  synth.sessions_min = 10;
  synth.sessions_max = 16;
  const RewardParams reward;

  std::vector<CostArea> held_out;
  for (std::uint64_t i = 1000; i < 1060; ++i) held_out.push_back(model.sample_area(synth, i));

  int improved = 0;
  for (std::uint64_t seed : {41, 42, 43}) {
    AgentConfig config = small_config();
    QAgent agent(config, p3_dims, seed);
    PhaseConfig warmup;
    warmup.episodes = 150;
    warmup.seed = seed;
    run_phase1(agent, model, synth, warmup, reward);

    const auto before = evaluate_policy(*make_greedy_policy(agent), held_out, reward, p3_dims);

    PhaseConfig online;
    online.fine_tune_interval = 64;
    online.updates_per_round = 64;
    online.seed = seed + 100;
    std::vector<CostArea> stream_areas;
    for (std::uint64_t i = 0; i < 800; ++i) {
      stream_areas.push_back(model.sample_area(synth, seed * 10000 + i));
    }
    run_phase3(agent, stream_from_areas(std::move(stream_areas)), online, reward);

    const auto after = evaluate_policy(*make_greedy_policy(agent), held_out, reward, p3_dims);
    if (after.avg_cum_reward >= before.avg_cum_reward - 1e-9) ++improved;
  }
  CHECK(improved >= 2);
}

TEST_CASE("checkpoint save and load reproduce the network bit-exactly") {
  TempDir tmp;
  const std::string path = (tmp.path / "checkpoint.json").string();

  QAgent agent(small_config(), kDims, 77);
  PhaseConfig cfg;
  cfg.episodes = 6;
  cfg.seed = 1;
  run_phase1(agent, small_model(), small_synth(), cfg, RewardParams{});

  checkpoint_save(agent, path);
  const QAgent back = checkpoint_load(path);

  Rng rng(13);
  for (int i = 0; i < 100; ++i) {
    FeatureVec x;
    x.dim = kDims.feature_dim();
    for (int j = 0; j < x.dim; ++j) {
      if (rng.uniform() < 0.3) x.push(j, rng.uniform(0.0, 1.0));
    }
    CHECK(forward(back.online(), x) == forward(agent.online(), x));
  }
}

TEST_CASE("checkpoint loading never silently accepts damage") {
  TempDir tmp;
  const std::string path = (tmp.path / "checkpoint.json").string();
  QAgent agent(small_config(), kDims, 7);
  checkpoint_save(agent, path);

  // Truncate the file.
  std::string text;
  {
    std::ifstream in(path);
    text.assign(std::istreambuf_iterator<char>(in), {});
  }
  {
    std::ofstream out(path, std::ios::trunc);
    out << text.substr(0, text.size() / 3);
  }
  CHECK_THROWS_AS(checkpoint_load(path), Error);
  CHECK_THROWS_AS(checkpoint_load((tmp.path / "missing.json").string()), Error);

  // A checkpoint with different encoder dims cannot drive this trainer setup.
  QAgent other(small_config(), EncoderDims{4, 2, 4}, 9);
  const std::string other_path = (tmp.path / "other.json").string();
  checkpoint_save(other, other_path);
  const QAgent loaded = checkpoint_load(other_path);
  CHECK(loaded.dims().max_sessions == 4);
  CHECK(loaded.online().dims.input != agent.online().dims.input);
}

TEST_CASE("train report csv has one row per episode and a moving average") {
  QAgent agent(small_config(), kDims, 1);
  PhaseConfig cfg;
  cfg.episodes = 5;
  const TrainReport report = run_phase1(agent, small_model(), small_synth(), cfg, RewardParams{});
  const std::string csv = report.to_csv();
  CHECK(csv.rfind("episode,reward,loss\n", 0) == 0);
  int lines = 0;
  for (char c : csv) lines += c == '\n';
  CHECK(lines == 6);
  CHECK(report.moving_avg_reward.size() == 5);
  CHECK(report.summary_json().find("mean_reward") != std::string::npos);
}

TEST_CASE("the replay buffer persists across phases") {
  QAgent agent(small_config(), kDims, 4);
  PhaseConfig cfg;
  cfg.episodes = 8;
  const BootstrapModel model = small_model();
  run_phase1(agent, model, small_synth(), cfg, RewardParams{});
  const std::size_t after_phase1 = agent.buffer().size();
  REQUIRE(after_phase1 > 0);

  std::vector<CostArea> areas;
  for (std::uint64_t i = 0; i < 5; ++i) areas.push_back(model.sample_area(small_synth(), i));
  run_phase2(agent, areas, cfg, RewardParams{});
  CHECK(agent.buffer().total_pushes() > after_phase1);
}
