#include "resq/trainer.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <memory>

#include <json.hpp>

#include "resq/errors.hpp"

namespace resq {

using nlohmann::json;

void PhaseConfig::validate() const {
  if (episodes < 1 || fine_tune_interval < 1 || updates_per_round < 1) {
    throw Error(Errc::bad_config, "phase config counts must be at least 1");
  }
  if (checkpoint_every < 0) throw Error(Errc::bad_config, "checkpoint cadence must be >= 0");
}

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct EpisodeResult {
  double reward = 0.0;
  double mean_loss = 0.0;
};

// One area-wise episode: act, store, optionally train every step.
EpisodeResult run_episode(QAgent& agent, const CostArea& area, const RewardParams& reward,
                          Rng& rng, bool train_each_step, int* transition_count = nullptr) {
  const AreaEnv env(area, reward);
  const EncoderDims& dims = agent.dims();

  EpisodeResult result;
  double loss_sum = 0.0;
  int loss_count = 0;

  EnvState state = env.reset();
  FeatureVec features = env.encode_state(state, dims);
  std::vector<std::uint8_t> mask = env.legal_mask(state, dims);
  while (!state.done) {
    const int action_idx = agent.act(features, mask, rng);
    const StepOutcome out = env.step(state, action_from_index(action_idx, dims));
    FeatureVec next_features = env.encode_state(out.next, dims);
    std::vector<std::uint8_t> next_mask = env.legal_mask(out.next, dims);
    agent.remember({std::move(features), action_idx, out.reward, next_features, out.done,
                    next_mask});
    if (transition_count != nullptr) ++*transition_count;
    if (train_each_step) {
      if (auto loss = agent.train_from_buffer(rng)) {
        loss_sum += *loss;
        ++loss_count;
      }
    }
    result.reward += out.reward;
    state = out.next;
    features = std::move(next_features);
    mask = std::move(next_mask);
  }
  result.mean_loss = loss_count > 0 ? loss_sum / loss_count : 0.0;
  return result;
}

void finish_report(TrainReport& report, QAgent& agent, const PhaseConfig& cfg,
                   std::chrono::steady_clock::time_point started) {
  report.episodes = static_cast<int>(report.episode_rewards.size());
  report.moving_avg_reward.reserve(report.episode_rewards.size());
  double window_sum = 0.0;
  for (std::size_t i = 0; i < report.episode_rewards.size(); ++i) {
    window_sum += report.episode_rewards[i];
    if (i >= 50) window_sum -= report.episode_rewards[i - 50];
    const double n = static_cast<double>(std::min<std::size_t>(i + 1, 50));
    report.moving_avg_reward.push_back(window_sum / n);
  }
  report.wall_clock_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  if (!cfg.checkpoint_path.empty()) {
    checkpoint_save(agent, cfg.checkpoint_path);
    report.checkpoint_path = cfg.checkpoint_path;
  }
}

void maybe_checkpoint(QAgent& agent, const PhaseConfig& cfg, int episode) {
  if (!cfg.checkpoint_path.empty() && cfg.checkpoint_every > 0 &&
      episode % cfg.checkpoint_every == 0) {
    checkpoint_save(agent, cfg.checkpoint_path);
  }
}

}  // namespace

AreaStream stream_from_areas(std::vector<CostArea> areas) {
  auto state = std::make_shared<std::pair<std::vector<CostArea>, std::size_t>>(std::move(areas),
                                                                               0);
  return [state]() -> std::optional<CostArea> {
    if (state->second >= state->first.size()) return std::nullopt;
    return state->first[state->second++];
  };
}

TrainReport run_phase1(QAgent& agent, const ForecastModel& model,
                       const SyntheticAreaConfig& synth, const PhaseConfig& cfg,
                       const RewardParams& reward) {
  cfg.validate();
  if (!model.fitted()) throw Error(Errc::unfitted, "phase 1 needs a fitted model");
  const auto started = std::chrono::steady_clock::now();

  Rng rng(mix_seed(cfg.seed, 0x7031ull));
  TrainReport report;
  for (int episode = 1; episode <= cfg.episodes; ++episode) {
    const CostArea area = model.sample_area(synth, rng.next_u64());
    const EpisodeResult result = run_episode(agent, area, reward, rng, true);
    report.episode_rewards.push_back(result.reward);
    report.episode_losses.push_back(result.mean_loss);
    maybe_checkpoint(agent, cfg, episode);
  }
  finish_report(report, agent, cfg, started);
  return report;
}

TrainReport run_phase2(QAgent& agent, const std::vector<CostArea>& areas, const PhaseConfig& cfg,
                       const RewardParams& reward) {
  cfg.validate();
  if (areas.empty()) throw Error(Errc::empty_area_source, "phase 2 has no areas to train on");
  const auto started = std::chrono::steady_clock::now();

  Rng rng(mix_seed(cfg.seed, 0x7032ull));
  TrainReport report;
  for (int episode = 1; episode <= cfg.episodes; ++episode) {
    const CostArea& area =
        areas[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(areas.size()) - 1))];
    const EpisodeResult result = run_episode(agent, area, reward, rng, true);
    report.episode_rewards.push_back(result.reward);
    report.episode_losses.push_back(result.mean_loss);
    maybe_checkpoint(agent, cfg, episode);
  }
  finish_report(report, agent, cfg, started);
  return report;
}

TrainReport run_phase3(QAgent& agent, const AreaStream& stream, const PhaseConfig& cfg,
                       const RewardParams& reward) {
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();

  Rng rng(mix_seed(cfg.seed, 0x7033ull));
  TrainReport report;
  int since_round = 0;
  int episode = 0;
  while (auto area = stream()) {
    ++episode;
    double loss_sum = 0.0;
    int loss_count = 0;

    const AreaEnv env(*area, reward);
    const EncoderDims& dims = agent.dims();
    EnvState state = env.reset();
    FeatureVec features = env.encode_state(state, dims);
    std::vector<std::uint8_t> mask = env.legal_mask(state, dims);
    double episode_reward = 0.0;
    while (!state.done) {
      const int action_idx = agent.act(features, mask, rng);
      const StepOutcome out = env.step(state, action_from_index(action_idx, dims));
      FeatureVec next_features = env.encode_state(out.next, dims);
      std::vector<std::uint8_t> next_mask = env.legal_mask(out.next, dims);
      agent.remember({std::move(features), action_idx, out.reward, next_features, out.done,
                      next_mask});
      episode_reward += out.reward;
      ++since_round;
      if (since_round >= cfg.fine_tune_interval) {
        // Fine-tuning round, then reset the timer.
        if (agent.buffer().size() >= static_cast<std::size_t>(agent.config().batch_size)) {
          for (int u = 0; u < cfg.updates_per_round; ++u) {
            if (auto loss = agent.train_from_buffer(rng)) {
              loss_sum += *loss;
              ++loss_count;
            }
          }
        }
        since_round = 0;
      }
      state = out.next;
      features = std::move(next_features);
      mask = std::move(next_mask);
    }
    report.episode_rewards.push_back(episode_reward);
    report.episode_losses.push_back(loss_count > 0 ? loss_sum / loss_count : 0.0);
    maybe_checkpoint(agent, cfg, episode);
  }
  finish_report(report, agent, cfg, started);
  return report;
}

std::string TrainReport::to_csv() const {
  std::string out = "episode,reward,loss\n";
  for (std::size_t i = 0; i < episode_rewards.size(); ++i) {
    out += std::to_string(i + 1);
    out += ',';
    out += fmt_double(episode_rewards[i]);
    out += ',';
    out += fmt_double(episode_losses[i]);
    out += '\n';
  }
  return out;
}

std::string TrainReport::summary_json() const {
  json doc;
  doc["episodes"] = episodes;
  doc["wall_clock_sec"] = wall_clock_sec;
  doc["checkpoint_path"] = checkpoint_path;
  if (!episode_rewards.empty()) {
    double total = 0.0;
    for (double r : episode_rewards) total += r;
    doc["mean_reward"] = total / static_cast<double>(episode_rewards.size());
    doc["final_moving_avg_reward"] = moving_avg_reward.back();
  }
  return doc.dump(2) + "\n";
}

void checkpoint_save(const QAgent& agent, const std::string& path, bool include_buffer) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_error, "cannot write " + path);
  out << agent.to_json(include_buffer);
  if (!out.good()) throw Error(Errc::io_error, "short write to " + path);
}

QAgent checkpoint_load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot read " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return QAgent::from_json(text);
}

}  // namespace resq
