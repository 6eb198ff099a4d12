#include "resq/agent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "resq/errors.hpp"

namespace resq {

using nlohmann::json;

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::DQN: return "dqn";
    case Variant::DoubleDQN: return "double";
    case Variant::DuelingDQN: return "dueling";
  }
  return "dqn";
}

Variant variant_from_name(const std::string& name) {
  if (name == "dqn") return Variant::DQN;
  if (name == "double") return Variant::DoubleDQN;
  if (name == "dueling") return Variant::DuelingDQN;
  throw Error(Errc::bad_config, "unknown variant '" + name + "'");
}

void AgentConfig::validate() const {
  if (gamma < 0.0 || gamma > 1.0 || epsilon < 0.0 || epsilon > 1.0) {
    throw Error(Errc::bad_config, "gamma and epsilon must lie in [0, 1]");
  }
  if (batch_size < 1 || target_sync_period < 1 || hidden < 1 || buffer_capacity < 1 ||
      learning_rate <= 0.0) {
    throw Error(Errc::bad_config, "agent sizes and learning rate must be positive");
  }
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ < 1) throw Error(Errc::bad_config, "buffer capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
  if (storage_.size() < capacity_) {
    storage_.push_back(std::move(t));
  } else {
    storage_[head_] = std::move(t);
    head_ = (head_ + 1) % capacity_;
  }
  ++total_pushes_;
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t k, Rng& rng) const {
  if (k > storage_.size()) {
    throw Error(Errc::insufficient_data, "buffer holds " + std::to_string(storage_.size()) +
                                             " < batch " + std::to_string(k));
  }
  std::vector<const Transition*> batch;
  batch.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    batch.push_back(&storage_[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(storage_.size()) - 1))]);
  }
  return batch;
}

int select_action(const DuelingNet& net, const FeatureVec& state,
                  std::span<const std::uint8_t> legal_mask, double epsilon, Rng& rng) {
  std::vector<int> legal;
  for (std::size_t i = 0; i < legal_mask.size(); ++i) {
    if (legal_mask[i]) legal.push_back(static_cast<int>(i));
  }
  if (legal.empty()) throw Error(Errc::no_legal_action, "mask has no legal action");

  if (epsilon > 0.0 && rng.uniform() < epsilon) {
    return legal[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(legal.size()) - 1))];
  }

  const auto q = forward(net, state);
  int best = legal.front();
  for (int a : legal) {
    if (q[static_cast<std::size_t>(a)] > q[static_cast<std::size_t>(best)]) best = a;
  }
  return best;
}

namespace {

// Max over legal actions; -inf when nothing is legal.
double masked_max(std::span<const double> q, std::span<const std::uint8_t> mask) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (mask[i] && q[i] > best) best = q[i];
  }
  return best;
}

int masked_argmax(std::span<const double> q, std::span<const std::uint8_t> mask) {
  int best = -1;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (!mask[i]) continue;
    if (best < 0 || q[i] > q[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

}  // namespace

std::vector<double> td_targets(Variant variant, std::span<const Transition* const> batch,
                               const DuelingNet& online, const DuelingNet& target, double gamma) {
  if (batch.empty()) throw Error(Errc::insufficient_data, "empty batch");
  std::vector<double> targets;
  targets.reserve(batch.size());
  for (const Transition* t : batch) {
    if (t->done) {
      targets.push_back(t->r);
      continue;
    }
    const auto q_target = forward(target, t->s_next);
    double backup;
    if (variant == Variant::DoubleDQN) {
      const auto q_online = forward(online, t->s_next);
      const int pick = masked_argmax(q_online, t->legal_next);
      backup = pick >= 0 ? q_target[static_cast<std::size_t>(pick)] : 0.0;
    } else {
      const double m = masked_max(q_target, t->legal_next);
      backup = std::isfinite(m) ? m : 0.0;
    }
    targets.push_back(t->r + gamma * backup);
  }
  return targets;
}

QAgent::QAgent(AgentConfig config, EncoderDims dims)
    : config_(config), dims_(dims), buffer_(config.buffer_capacity) {}

QAgent::QAgent(AgentConfig config, EncoderDims dims, std::uint64_t seed)
    : QAgent(config, dims.feature_dim(), dims.action_count(), seed) {
  dims_ = dims;
}

QAgent::QAgent(AgentConfig config, int input_dim, int action_count, std::uint64_t seed)
    : config_(config), dims_{0, 0, 0}, buffer_(config.buffer_capacity) {
  config_.validate();
  const HeadMode mode =
      config_.variant == Variant::DuelingDQN ? HeadMode::Dueling : HeadMode::Plain;
  online_ = make_net({input_dim, config_.hidden, action_count}, mode, seed);
  target_ = online_;
  optim_ = make_optim(online_, config_.learning_rate);
}

int QAgent::act_greedy(const FeatureVec& state, std::span<const std::uint8_t> legal_mask) const {
  Rng unused(0);
  return select_action(online_, state, legal_mask, 0.0, unused);
}

double QAgent::train_step(std::span<const Transition* const> batch) {
  if (batch.empty()) throw Error(Errc::insufficient_data, "empty batch");
  const auto targets = td_targets(config_.variant, batch, online_, target_, config_.gamma);

  Gradients grads = zero_gradients(online_);
  std::vector<double> upstream(static_cast<std::size_t>(online_.dims.actions), 0.0);
  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Transition* t = batch[i];
    const auto q = forward(online_, t->s);
    const double err = q[static_cast<std::size_t>(t->a)] - targets[i];
    loss += err * err * inv_batch;
    upstream[static_cast<std::size_t>(t->a)] = 2.0 * err * inv_batch;
    backward_into(online_, t->s, upstream, grads);
    upstream[static_cast<std::size_t>(t->a)] = 0.0;
  }
  if (!std::isfinite(loss)) throw Error(Errc::non_finite_loss, "TD loss diverged");

  adam_step(online_, grads, optim_);
  ++train_steps_;
  return loss;
}

std::optional<double> QAgent::train_from_buffer(Rng& rng) {
  if (buffer_.size() < static_cast<std::size_t>(config_.batch_size)) return std::nullopt;
  const auto batch = buffer_.sample(static_cast<std::size_t>(config_.batch_size), rng);
  const double loss = train_step(batch);
  if (train_steps_ % config_.target_sync_period == 0) sync_target();
  return loss;
}

namespace {

json feature_to_json(const FeatureVec& f) {
  return json{{"dim", f.dim}, {"idx", f.idx}, {"val", f.val}};
}

FeatureVec feature_from_json(const json& doc) {
  FeatureVec f;
  f.dim = doc.at("dim").get<std::int32_t>();
  f.idx = doc.at("idx").get<std::vector<std::int32_t>>();
  f.val = doc.at("val").get<std::vector<float>>();
  if (f.idx.size() != f.val.size()) throw Error(Errc::shape_mismatch, "feature vector arrays");
  return f;
}

}  // namespace

std::string QAgent::to_json(bool include_buffer) const {
  json doc;
  doc["version"] = 1;
  doc["config"] = {{"variant", variant_name(config_.variant)},
                   {"gamma", config_.gamma},
                   {"epsilon", config_.epsilon},
                   {"batch_size", config_.batch_size},
                   {"target_sync_period", config_.target_sync_period},
                   {"learning_rate", config_.learning_rate},
                   {"hidden", config_.hidden},
                   {"buffer_capacity", config_.buffer_capacity}};
  doc["dims"] = {{"max_sessions", dims_.max_sessions},
                 {"max_mnos", dims_.max_mnos},
                 {"max_slots", dims_.max_slots}};
  doc["train_steps"] = train_steps_;
  doc["online"] = json::parse(net_to_json(online_, &optim_));
  doc["target"] = json::parse(net_to_json(target_));
  doc["buffer_stats"] = {{"size", buffer_.size()}, {"total_pushes", buffer_.total_pushes()}};
  if (include_buffer) {
    json items = json::array();
    for (std::size_t i = 0; i < buffer_.size(); ++i) {
      const Transition& t = buffer_.at(i);
      items.push_back({{"s", feature_to_json(t.s)},
                       {"a", t.a},
                       {"r", t.r},
                       {"s_next", feature_to_json(t.s_next)},
                       {"done", t.done},
                       {"legal_next", t.legal_next}});
    }
    doc["buffer"] = std::move(items);
  }
  return doc.dump() + "\n";
}

QAgent QAgent::from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::io_error, std::string("agent checkpoint: ") + e.what());
  }
  if (!doc.contains("version") || doc["version"] != 1) {
    throw Error(Errc::version_mismatch, "unsupported agent checkpoint version");
  }
  const auto& c = doc.at("config");
  AgentConfig config;
  config.variant = variant_from_name(c.at("variant").get<std::string>());
  config.gamma = c.at("gamma").get<double>();
  config.epsilon = c.at("epsilon").get<double>();
  config.batch_size = c.at("batch_size").get<int>();
  config.target_sync_period = c.at("target_sync_period").get<int>();
  config.learning_rate = c.at("learning_rate").get<double>();
  config.hidden = c.at("hidden").get<int>();
  config.buffer_capacity = c.at("buffer_capacity").get<std::size_t>();
  config.validate();

  EncoderDims dims;
  dims.max_sessions = doc.at("dims").at("max_sessions").get<int>();
  dims.max_mnos = doc.at("dims").at("max_mnos").get<int>();
  dims.max_slots = doc.at("dims").at("max_slots").get<int>();

  QAgent agent(config, dims);
  agent.online_ = net_from_json(doc.at("online").dump(), &agent.optim_);
  agent.target_ = net_from_json(doc.at("target").dump());
  agent.train_steps_ = doc.at("train_steps").get<std::int64_t>();
  if (dims.max_sessions > 0 && (agent.online_.dims.input != dims.feature_dim() ||
                                agent.online_.dims.actions != dims.action_count())) {
    throw Error(Errc::shape_mismatch, "network does not match encoder dims");
  }
  const HeadMode expect =
      config.variant == Variant::DuelingDQN ? HeadMode::Dueling : HeadMode::Plain;
  if (agent.online_.mode != expect || agent.target_.mode != expect) {
    throw Error(Errc::shape_mismatch, "head mode does not match variant");
  }
  if (doc.contains("buffer")) {
    for (const auto& item : doc.at("buffer")) {
      Transition t;
      t.s = feature_from_json(item.at("s"));
      t.a = item.at("a").get<int>();
      t.r = item.at("r").get<double>();
      t.s_next = feature_from_json(item.at("s_next"));
      t.done = item.at("done").get<bool>();
      t.legal_next = item.at("legal_next").get<std::vector<std::uint8_t>>();
      agent.buffer_.push(std::move(t));
    }
  }
  return agent;
}

}  // namespace resq
