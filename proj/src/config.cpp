#include "resq/config.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "resq/errors.hpp"

namespace resq {

using nlohmann::json;

void RunConfig::validate(bool require_paths) const {
  agent.validate();
  reward.validate();
  synth.validate();
  phase.validate();
  if (dims.max_sessions < 1 || dims.max_mnos < 1 || dims.max_slots < 1) {
    throw Error(Errc::bad_config, "encoder dims must be positive");
  }
  if (synth.sessions_max > dims.max_sessions || synth.slots_max > dims.max_slots ||
      synth.operators > dims.max_mnos) {
    throw Error(Errc::bad_config, "synthetic areas can exceed the encoder box");
  }
  if (block_len < 1) throw Error(Errc::bad_config, "block_len must be at least 1");
  if (jitter < 0.0) throw Error(Errc::bad_config, "jitter must be non-negative");
  if (require_paths) {
    for (const std::string* path : {&data.spot_csv, &data.series_dir, &data.route, &data.model,
                                    &data.areas, &data.eval_areas, &data.checkpoint}) {
      if (!path->empty() && !std::filesystem::exists(*path)) {
        throw Error(Errc::io_error, "configured path does not exist: " + *path);
      }
    }
  }
}

RunConfig run_config_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::bad_config, std::string("config: ") + e.what());
  }

  RunConfig config;
  if (doc.contains("variant")) {
    config.agent.variant = variant_from_name(doc["variant"].get<std::string>());
  }
  config.agent.gamma = doc.value("gamma", config.agent.gamma);
  config.agent.epsilon = doc.value("epsilon", config.agent.epsilon);
  config.reward.h = doc.value("h", config.reward.h);
  config.reward.r_global_min = doc.value("r_global_min", config.reward.r_global_min);
  config.reward.r_timeout = doc.value("r_timeout", config.reward.r_timeout);
  config.reward.t_sv_minutes = doc.value("t_sv_minutes", config.reward.t_sv_minutes);
  config.seed = doc.value("seed", config.seed);
  config.out_dir = doc.value("out", config.out_dir);
  config.block_len = doc.value("block_len", config.block_len);
  config.jitter = doc.value("jitter", config.jitter);

  if (doc.contains("dims")) {
    const auto& d = doc["dims"];
    config.dims.max_sessions = d.value("max_sessions", config.dims.max_sessions);
    config.dims.max_mnos = d.value("max_mnos", config.dims.max_mnos);
    config.dims.max_slots = d.value("max_slots", config.dims.max_slots);
  }
  if (doc.contains("agent")) {
    const auto& a = doc["agent"];
    config.agent.batch_size = a.value("batch_size", config.agent.batch_size);
    config.agent.target_sync_period = a.value("target_sync_period", config.agent.target_sync_period);
    config.agent.learning_rate = a.value("learning_rate", config.agent.learning_rate);
    config.agent.hidden = a.value("hidden", config.agent.hidden);
    config.agent.buffer_capacity = a.value("buffer_capacity", config.agent.buffer_capacity);
  }
  if (doc.contains("phase")) {
    const auto& p = doc["phase"];
    config.phase.episodes = p.value("episodes", config.phase.episodes);
    config.phase.fine_tune_interval = p.value("fine_tune_interval", config.phase.fine_tune_interval);
    config.phase.updates_per_round = p.value("updates_per_round", config.phase.updates_per_round);
    config.phase.checkpoint_every = p.value("checkpoint_every", config.phase.checkpoint_every);
  }
  if (doc.contains("synth")) {
    const auto& s = doc["synth"];
    config.synth.sessions_min = s.value("sessions_min", config.synth.sessions_min);
    config.synth.sessions_max = s.value("sessions_max", config.synth.sessions_max);
    config.synth.slots_min = s.value("slots_min", config.synth.slots_min);
    config.synth.slots_max = s.value("slots_max", config.synth.slots_max);
    config.synth.operators = s.value("operators", config.synth.operators);
    if (s.contains("t_sv_sec")) {
      config.synth.t_sv = Duration::seconds(s["t_sv_sec"].get<std::int64_t>());
    }
  }
  if (doc.contains("data")) {
    const auto& d = doc["data"];
    config.data.spot_csv = d.value("spot_csv", "");
    config.data.series_dir = d.value("series_dir", "");
    config.data.route = d.value("route", "");
    config.data.model = d.value("model", "");
    config.data.areas = d.value("areas", "");
    config.data.eval_areas = d.value("eval_areas", "");
    config.data.checkpoint = d.value("checkpoint", "");
  }
  return config;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot read config " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return run_config_from_json(text);
}

std::string run_config_to_json(const RunConfig& config) {
  json doc;
  doc["variant"] = variant_name(config.agent.variant);
  doc["gamma"] = config.agent.gamma;
  doc["epsilon"] = config.agent.epsilon;
  doc["h"] = config.reward.h;
  doc["r_global_min"] = config.reward.r_global_min;
  doc["r_timeout"] = config.reward.r_timeout;
  doc["t_sv_minutes"] = config.reward.t_sv_minutes;
  doc["seed"] = config.seed;
  doc["out"] = config.out_dir;
  doc["block_len"] = config.block_len;
  doc["jitter"] = config.jitter;
  doc["dims"] = {{"max_sessions", config.dims.max_sessions},
                 {"max_mnos", config.dims.max_mnos},
                 {"max_slots", config.dims.max_slots}};
  doc["agent"] = {{"batch_size", config.agent.batch_size},
                  {"target_sync_period", config.agent.target_sync_period},
                  {"learning_rate", config.agent.learning_rate},
                  {"hidden", config.agent.hidden},
                  {"buffer_capacity", config.agent.buffer_capacity}};
  doc["phase"] = {{"episodes", config.phase.episodes},
                  {"fine_tune_interval", config.phase.fine_tune_interval},
                  {"updates_per_round", config.phase.updates_per_round},
                  {"checkpoint_every", config.phase.checkpoint_every}};
  doc["synth"] = {{"sessions_min", config.synth.sessions_min},
                  {"sessions_max", config.synth.sessions_max},
                  {"slots_min", config.synth.slots_min},
                  {"slots_max", config.synth.slots_max},
                  {"operators", config.synth.operators},
                  {"t_sv_sec", config.synth.t_sv.secs()}};
  doc["data"] = {{"spot_csv", config.data.spot_csv},   {"series_dir", config.data.series_dir},
                 {"route", config.data.route},         {"model", config.data.model},
                 {"areas", config.data.areas},         {"eval_areas", config.data.eval_areas},
                 {"checkpoint", config.data.checkpoint}};
  return doc.dump(2) + "\n";
}

}  // namespace resq
