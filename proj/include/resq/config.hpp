#pragma once

#include <cstdint>
#include <string>

#include "resq/agent.hpp"
#include "resq/env.hpp"
#include "resq/forecaster.hpp"
#include "resq/trainer.hpp"

namespace resq {

// Everything a run needs, loadable from one JSON file; command-line flags
// override individual fields after loading.
struct RunConfig {
  AgentConfig agent;
  RewardParams reward;
  EncoderDims dims;
  PhaseConfig phase;
  SyntheticAreaConfig synth;
  int block_len = 64;
  double jitter = 0.0;
  std::uint64_t seed = 0;
  std::string out_dir = "out";

  struct DataPaths {
    std::string spot_csv;
    std::string series_dir;
    std::string route;
    std::string model;
    std::string areas;       // training areas
    std::string eval_areas;  // held-out areas for evaluation
    std::string checkpoint;
  } data;

  // Re-checks every component invariant; `require_paths` also verifies that
  // any configured data path exists on disk.
  void validate(bool require_paths = true) const;
};

RunConfig run_config_from_json(const std::string& text);
RunConfig load_run_config(const std::string& path);
std::string run_config_to_json(const RunConfig& config);

}  // namespace resq
