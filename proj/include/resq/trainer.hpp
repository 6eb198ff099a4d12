#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "resq/agent.hpp"
#include "resq/forecaster.hpp"

namespace resq {

struct PhaseConfig {
  int episodes = 1000;
  int fine_tune_interval = 512;  // phase 3: transitions between rounds
  int updates_per_round = 8;     // phase 3: gradient steps per round
  std::uint64_t seed = 0;
  int checkpoint_every = 0;  // episodes between checkpoints; 0 = final only
  std::string checkpoint_path;

  void validate() const;
};

struct TrainReport {
  std::vector<double> episode_rewards;
  std::vector<double> episode_losses;  // mean TD loss per episode; 0 before updates begin
  std::vector<double> moving_avg_reward;  // window 50
  double wall_clock_sec = 0.0;
  int episodes = 0;
  std::string checkpoint_path;

  std::string to_csv() const;        // episode,reward,loss
  std::string summary_json() const;
};

// Pulls one area per episode; empty ends the stream.
using AreaStream = std::function<std::optional<CostArea>()>;
AreaStream stream_from_areas(std::vector<CostArea> areas);

// Phase 1: area-wise training on model-generated synthetic areas, one fresh
// area per episode, train-every-step once the buffer holds a batch.
TrainReport run_phase1(QAgent& agent, const ForecastModel& model,
                       const SyntheticAreaConfig& synth, const PhaseConfig& cfg,
                       const RewardParams& reward);

// Phase 2: same loop over areas drawn uniformly from the real training set.
TrainReport run_phase2(QAgent& agent, const std::vector<CostArea>& areas, const PhaseConfig& cfg,
                       const RewardParams& reward);

// Phase 3: consume live episodes, learn only in periodic fine-tuning rounds,
// one round per cfg.fine_tune_interval newly stored transitions.
TrainReport run_phase3(QAgent& agent, const AreaStream& stream, const PhaseConfig& cfg,
                       const RewardParams& reward);

void checkpoint_save(const QAgent& agent, const std::string& path, bool include_buffer = false);
QAgent checkpoint_load(const std::string& path);

}  // namespace resq
