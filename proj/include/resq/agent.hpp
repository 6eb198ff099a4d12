#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "resq/env.hpp"
#include "resq/feature_vec.hpp"
#include "resq/nn.hpp"
#include "resq/rng.hpp"

namespace resq {

enum class Variant { DQN, DoubleDQN, DuelingDQN };

const char* variant_name(Variant v);
Variant variant_from_name(const std::string& name);

struct Transition {
  FeatureVec s;
  int a = 0;
  double r = 0.0;
  FeatureVec s_next;
  bool done = false;
  std::vector<std::uint8_t> legal_next;  // action legality in s_next
};

// Fixed-capacity ring; eviction is oldest-first.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 50000);

  void push(Transition t);
  // Uniform with replacement; requires size() >= k.
  std::vector<const Transition*> sample(std::size_t k, Rng& rng) const;

  std::size_t size() const { return storage_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::uint64_t total_pushes() const { return total_pushes_; }
  const Transition& at(std::size_t i) const { return storage_[i]; }

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;
  std::uint64_t total_pushes_ = 0;
  std::vector<Transition> storage_;
};

struct AgentConfig {
  Variant variant = Variant::DuelingDQN;
  double gamma = 0.85;
  double epsilon = 0.05;
  int batch_size = 64;
  int target_sync_period = 500;  // in training steps
  double learning_rate = 4e-3;
  int hidden = 128;
  std::size_t buffer_capacity = 50000;

  void validate() const;
};

// Epsilon-greedy over the legal actions only; greedy ties break to the
// lowest index.
int select_action(const DuelingNet& net, const FeatureVec& state,
                  std::span<const std::uint8_t> legal_mask, double epsilon, Rng& rng);

// One target per transition: r when terminal, otherwise
//   DQN / DuelingDQN:  r + gamma * max_{legal a'} Q_target(s', a')
//   DoubleDQN:         r + gamma * Q_target(s', argmax_{legal a'} Q_online(s', a'))
std::vector<double> td_targets(Variant variant, std::span<const Transition* const> batch,
                               const DuelingNet& online, const DuelingNet& target, double gamma);

// Online/target network pair, optimizer and replay buffer under a
// single-writer contract.
class QAgent {
 public:
  QAgent(AgentConfig config, EncoderDims dims, std::uint64_t seed);
  // Free-form geometry for environments outside the area encoder (benchmarks,
  // toy MDPs); such an agent cannot drive the area trainer.
  QAgent(AgentConfig config, int input_dim, int action_count, std::uint64_t seed);

  int act(const FeatureVec& state, std::span<const std::uint8_t> legal_mask, Rng& rng) const {
    return select_action(online_, state, legal_mask, config_.epsilon, rng);
  }
  int act_greedy(const FeatureVec& state, std::span<const std::uint8_t> legal_mask) const;

  void remember(Transition t) { buffer_.push(std::move(t)); }

  // Mean squared TD error on the batch (pre-update), one Adam step applied.
  // Gradients flow only through the taken action's Q value.
  double train_step(std::span<const Transition* const> batch);

  // Samples a batch if the buffer holds one; syncs the target network every
  // config.target_sync_period training steps.
  std::optional<double> train_from_buffer(Rng& rng);

  void sync_target() { target_ = online_; }

  const AgentConfig& config() const { return config_; }
  const EncoderDims& dims() const { return dims_; }
  const DuelingNet& online() const { return online_; }
  const DuelingNet& target() const { return target_; }
  ReplayBuffer& buffer() { return buffer_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  std::int64_t train_steps() const { return train_steps_; }

  std::string to_json(bool include_buffer = false) const;
  static QAgent from_json(const std::string& text);

 private:
  QAgent(AgentConfig config, EncoderDims dims);  // deserialization shell

  AgentConfig config_;
  EncoderDims dims_;
  DuelingNet online_;
  DuelingNet target_;
  OptimState optim_;
  ReplayBuffer buffer_;
  std::int64_t train_steps_ = 0;
};

}  // namespace resq
