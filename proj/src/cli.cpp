#include "resq/cli.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>

#include <CLI11.hpp>
#include <json.hpp>

#include "resq/config.hpp"
#include "resq/errors.hpp"
#include "resq/eval.hpp"
#include "resq/log.hpp"
#include "resq/price_data.hpp"

namespace resq {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot read " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
  out << content;
  if (!out.good()) throw Error(Errc::io_error, "short write to " + path.string());
}

std::string sanitize_key(const MnoKey& key) {
  std::string name = key.str();
  for (char& c : name) {
    if (c == '/') c = '~';
  }
  return name;
}

MnoKey key_from_filename(const std::string& stem) {
  std::string name = stem;
  for (char& c : name) {
    if (c == '~') c = '/';
  }
  return MnoKey::parse(name);
}

std::map<MnoKey, PriceSeries> load_series_dir(const std::string& dir) {
  std::map<MnoKey, PriceSeries> series;
  if (!fs::is_directory(dir)) throw Error(Errc::io_error, dir + " is not a directory");
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".csv") continue;
    const MnoKey key = key_from_filename(entry.path().stem().string());
    std::ifstream in(entry.path(), std::ios::binary);
    if (!in) throw Error(Errc::io_error, "cannot read " + entry.path().string());
    series[key] = read_series_csv(in, key);
  }
  if (series.empty()) throw Error(Errc::empty_selection, "no .csv series under " + dir);
  return series;
}

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string variant;
};

// Paths are checked by the command that reads them; a command may point at
// outputs it is about to create.
RunConfig resolve_config(const CommonOpts& opts) {
  RunConfig config = opts.config_path.empty() ? RunConfig{} : load_run_config(opts.config_path);
  if (!opts.out_dir.empty()) config.out_dir = opts.out_dir;
  if (opts.seed.has_value()) config.seed = *opts.seed;
  if (!opts.variant.empty()) config.agent.variant = variant_from_name(opts.variant);
  config.validate(false);
  return config;
}

std::vector<CostArea> load_areas_file(const std::string& path) {
  auto collection = areas_from_json(read_file(path));
  return std::move(collection.areas);
}

int cmd_ingest(const CommonOpts& common, const std::string& input, std::int64_t resolution_sec,
               const std::vector<std::string>& keys, const std::string& boundary_text) {
  RunConfig config = resolve_config(common);
  const std::string csv_path = !input.empty() ? input : config.data.spot_csv;
  if (csv_path.empty()) throw Error(Errc::bad_config, "ingest needs --input or data.spot_csv");

  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot read " + csv_path);
  const auto records = parse_spot_csv(in);
  log_info("parsed " + std::to_string(records.size()) + " records from " + csv_path);

  std::set<MnoKey> wanted;
  if (keys.empty()) {
    for (const auto& rec : records) wanted.insert(rec.key());
  } else {
    for (const auto& text : keys) wanted.insert(MnoKey::parse(text));
  }

  std::optional<Timestamp> boundary;
  if (!boundary_text.empty()) boundary = Timestamp::parse(boundary_text);

  const fs::path out(config.out_dir);
  json manifest;
  manifest["source"] = csv_path;
  manifest["resolution_sec"] = resolution_sec;
  manifest["keys"] = json::array();
  for (const MnoKey& key : wanted) {
    const PriceSeries series =
        build_series(records, key, Duration::seconds(resolution_sec));
    write_file(out / "series" / (sanitize_key(key) + ".csv"), write_series_csv(series));
    json entry;
    entry["key"] = key.str();
    entry["points"] = series.size();
    entry["start"] = series.start.str();
    entry["end"] = series.end().str();
    if (boundary.has_value()) {
      const DataSplit split = split_series(series, *boundary);
      write_file(out / "train" / (sanitize_key(key) + ".csv"), write_series_csv(split.train));
      write_file(out / "test" / (sanitize_key(key) + ".csv"), write_series_csv(split.test));
      entry["train_points"] = split.train.size();
      entry["test_points"] = split.test.size();
    }
    manifest["keys"].push_back(std::move(entry));
  }
  write_file(out / "ingest.json", manifest.dump(2) + "\n");
  return 0;
}

int cmd_areas(const CommonOpts& common, const std::string& route_path,
              const std::string& series_dir, int slots, std::int64_t t_sv_sec,
              std::int64_t slot_spacing_sec, int max_sessions) {
  RunConfig config = resolve_config(common);
  const std::string route_file = !route_path.empty() ? route_path : config.data.route;
  const std::string dir = !series_dir.empty() ? series_dir : config.data.series_dir;
  if (route_file.empty() || dir.empty()) {
    throw Error(Errc::bad_config, "areas needs --route and --series-dir (or config data paths)");
  }
  const auto route = load_route_json(read_file(route_file));
  const auto series = load_series_dir(dir);
  AreaGrid grid;
  grid.slot_count = slots;
  grid.t_sv = Duration::seconds(t_sv_sec);
  grid.slot_spacing = Duration::seconds(slot_spacing_sec);
  grid.max_sessions = max_sessions;
  const AreaCollection collection = build_areas(route, series, grid);
  log_info("built " + std::to_string(collection.areas.size()) + " areas");
  write_file(fs::path(config.out_dir) / "areas.json", areas_to_json(collection));
  return 0;
}

int cmd_fit(const CommonOpts& common, const std::string& series_dir) {
  RunConfig config = resolve_config(common);
  const std::string dir = !series_dir.empty() ? series_dir : config.data.series_dir;
  if (dir.empty()) throw Error(Errc::bad_config, "fit needs --series-dir or data.series_dir");
  const auto series = load_series_dir(dir);
  const BootstrapModel model = fit_bootstrap(series, config.block_len, config.jitter);
  log_info("fitted bootstrap model, fingerprint " + model.fingerprint());
  write_file(fs::path(config.out_dir) / "model.json", model.to_json());
  return 0;
}

int cmd_synth(const CommonOpts& common, const std::string& model_path, int count) {
  RunConfig config = resolve_config(common);
  const std::string path = !model_path.empty() ? model_path : config.data.model;
  if (path.empty()) throw Error(Errc::bad_config, "synth needs --model or data.model");
  const BootstrapModel model = BootstrapModel::from_json(read_file(path));

  Rng rng(mix_seed(config.seed, 0x73796eull));
  AreaCollection collection;
  for (int i = 0; i < count; ++i) {
    collection.areas.push_back(model.sample_area(config.synth, rng.next_u64()));
  }
  write_file(fs::path(config.out_dir) / "areas.json", areas_to_json(collection));
  return 0;
}

int cmd_train(const CommonOpts& common, int phase, const std::string& init_checkpoint) {
  RunConfig config = resolve_config(common);
  config.phase.seed = config.seed;
  const fs::path out(config.out_dir);
  fs::create_directories(out);
  config.phase.checkpoint_path = (out / "checkpoint.json").string();

  QAgent agent = !init_checkpoint.empty()
                     ? checkpoint_load(init_checkpoint)
                     : QAgent(config.agent, config.dims, config.seed);

  TrainReport report;
  if (phase == 1) {
    const std::string model_path = config.data.model;
    if (model_path.empty()) throw Error(Errc::bad_config, "phase 1 needs data.model");
    const BootstrapModel model = BootstrapModel::from_json(read_file(model_path));
    report = run_phase1(agent, model, config.synth, config.phase, config.reward);
  } else if (phase == 2) {
    if (config.data.areas.empty()) throw Error(Errc::bad_config, "phase 2 needs data.areas");
    report = run_phase2(agent, load_areas_file(config.data.areas), config.phase, config.reward);
  } else if (phase == 3) {
    if (config.data.areas.empty()) throw Error(Errc::bad_config, "phase 3 needs data.areas");
    report = run_phase3(agent, stream_from_areas(load_areas_file(config.data.areas)),
                        config.phase, config.reward);
  } else {
    throw Error(Errc::bad_config, "phase must be 1, 2 or 3");
  }

  write_file(out / "train_report.csv", report.to_csv());
  write_file(out / "train_summary.json", report.summary_json());
  write_file(out / "run_config.json", run_config_to_json(config));  // effective settings
  log_info("trained " + std::to_string(report.episodes) + " episodes in " +
           std::to_string(report.wall_clock_sec) + "s");
  return 0;
}

void write_episode_traces(const fs::path& out, Policy& policy,
                          const std::vector<CostArea>& areas, const RewardParams& params) {
  std::string log;
  for (const CostArea& area : areas) {
    const AreaEnv env(area, params);
    EnvState state = env.reset();
    while (!state.done) {
      const Action action = policy.act(env, state);
      const StepOutcome outcome = env.step(state, action);
      log += trace_line(state, action, outcome);
      log += '\n';
      state = outcome.next;
    }
  }
  write_file(out / "episode_trace.jsonl", log);
}

int cmd_eval(const CommonOpts& common, const std::string& policy_name,
             const std::string& areas_path, const std::string& checkpoint_path, int workers,
             bool trace) {
  RunConfig config = resolve_config(common);
  const std::string areas_file = !areas_path.empty() ? areas_path : config.data.eval_areas;
  if (areas_file.empty()) throw Error(Errc::bad_config, "eval needs --areas or data.eval_areas");
  const auto areas = load_areas_file(areas_file);

  std::unique_ptr<Policy> policy;
  std::optional<QAgent> agent;
  if (policy_name == "none") {
    policy = make_baseline_policy();
  } else if (policy_name == "oracle") {
    policy = make_oracle_policy();
  } else {
    const std::string ckpt = !checkpoint_path.empty() ? checkpoint_path : config.data.checkpoint;
    if (ckpt.empty()) {
      throw Error(Errc::bad_config, "policy '" + policy_name + "' needs --checkpoint");
    }
    agent.emplace(checkpoint_load(ckpt));
    if (variant_name(agent->config().variant) != policy_name) {
      throw Error(Errc::bad_config, "checkpoint holds a " +
                                        std::string(variant_name(agent->config().variant)) +
                                        " agent, not " + policy_name);
    }
    policy = make_greedy_policy(*agent);
  }

  const Metrics metrics = evaluate_policy(*policy, areas, config.reward, config.dims, workers);
  const fs::path out(config.out_dir);
  write_file(out / "metrics.json", metrics.to_json());
  write_file(out / "eval_series.csv", metrics.series_csv());
  if (trace) {
    auto tracer = policy->clone();
    write_episode_traces(out, *tracer, areas, config.reward);
  }
  log_info(policy_name + ": savings " + std::to_string(metrics.cost_savings_pct) + "% over " +
           std::to_string(metrics.areas) + " areas");
  return 0;
}

int cmd_report(const CommonOpts& common, const std::vector<std::string>& inputs) {
  RunConfig config = resolve_config(common);
  if (inputs.empty()) throw Error(Errc::bad_config, "report needs at least one metrics.json");
  std::string csv = "policy,areas,avg_cum_reward,cum_cost,cum_penalty,cost_savings_pct\n";
  for (const std::string& path : inputs) {
    json doc;
    try {
      doc = json::parse(read_file(path));
    } catch (const json::exception& e) {
      throw Error(Errc::io_error, path + ": " + e.what());
    }
    char line[256];
    std::snprintf(line, sizeof(line), "%s,%d,%.6f,%s,%.6f,%.6f\n",
                  doc.at("policy").get<std::string>().c_str(), doc.at("areas").get<int>(),
                  doc.at("avg_cum_reward").get<double>(),
                  doc.at("cum_cost").get<std::string>().c_str(),
                  doc.at("cum_penalty").get<double>(), doc.at("cost_savings_pct").get<double>());
    csv += line;
  }
  write_file(fs::path(config.out_dir) / "report.csv", csv);
  return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& argv) {
  CLI::App app{"trace-driven multi-operator bandwidth-reservation decision engine", "resq"};
  app.require_subcommand(1);
  app.fallthrough();

  CommonOpts common;
  app.add_option("--config", common.config_path, "run configuration JSON");
  app.add_option("--out", common.out_dir, "output directory");
  app.add_option("--seed", common.seed, "seed for all randomness");
  app.add_option("--variant", common.variant, "agent variant: dqn, double or dueling");

  auto* ingest = app.add_subcommand("ingest", "spot CSV -> per-operator series");
  std::string input, boundary;
  std::int64_t resolution_sec = 60;
  std::vector<std::string> keys;
  ingest->add_option("--input", input, "spot price CSV");
  ingest->add_option("--resolution-sec", resolution_sec, "grid spacing in seconds");
  ingest->add_option("--key", keys, "operator key instance_type/zone (repeatable)");
  ingest->add_option("--boundary", boundary, "train/test split timestamp (RFC-3339)");

  auto* areas_cmd = app.add_subcommand("areas", "route + series -> cost areas");
  std::string route_path, series_dir;
  int slots = 16, max_sessions = 32;
  std::int64_t t_sv_sec = 60, slot_spacing_sec = 0;
  areas_cmd->add_option("--route", route_path, "route JSON");
  areas_cmd->add_option("--series-dir", series_dir, "directory of series CSVs");
  areas_cmd->add_option("--slots", slots, "departure slots per area");
  areas_cmd->add_option("--t-sv-sec", t_sv_sec, "session validity time in seconds");
  areas_cmd->add_option("--slot-spacing-sec", slot_spacing_sec,
                        "departure slot spacing, 0 divides one validity window");
  areas_cmd->add_option("--max-sessions", max_sessions, "session cap per area");

  auto* fit = app.add_subcommand("fit", "fit the bootstrap forecaster");
  std::string fit_series_dir;
  fit->add_option("--series-dir", fit_series_dir, "directory of series CSVs");

  auto* synth = app.add_subcommand("synth", "sample synthetic areas from a model");
  std::string model_path;
  int synth_count = 100;
  synth->add_option("--model", model_path, "model JSON");
  synth->add_option("--count", synth_count, "number of areas");

  auto* train = app.add_subcommand("train", "run a training phase");
  int phase = 1;
  std::string init_checkpoint;
  train->add_option("--phase", phase, "1: synthetic, 2: real areas, 3: online stream");
  train->add_option("--init", init_checkpoint, "checkpoint to start from");

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a policy over areas");
  std::string policy_name = "none", eval_areas, eval_checkpoint;
  int workers = 1;
  bool eval_trace = false;
  eval_cmd->add_option("--policy", policy_name, "none, dqn, double, dueling or oracle");
  eval_cmd->add_option("--areas", eval_areas, "areas JSON to evaluate on");
  eval_cmd->add_option("--checkpoint", eval_checkpoint, "agent checkpoint for net policies");
  eval_cmd->add_option("--workers", workers, "parallel evaluation workers");
  eval_cmd->add_flag("--trace", eval_trace, "also write an episode_trace.jsonl step log");

  auto* report = app.add_subcommand("report", "merge metrics files into a comparison table");
  std::vector<std::string> report_inputs;
  report->add_option("--inputs", report_inputs, "metrics.json files");

  std::vector<const char*> cargs;
  cargs.push_back("resq");
  for (const auto& a : argv) cargs.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (ingest->parsed()) return cmd_ingest(common, input, resolution_sec, keys, boundary);
    if (areas_cmd->parsed()) {
      return cmd_areas(common, route_path, series_dir, slots, t_sv_sec, slot_spacing_sec,
                       max_sessions);
    }
    if (fit->parsed()) return cmd_fit(common, fit_series_dir);
    if (synth->parsed()) return cmd_synth(common, model_path, synth_count);
    if (train->parsed()) return cmd_train(common, phase, init_checkpoint);
    if (eval_cmd->parsed()) {
      return cmd_eval(common, policy_name, eval_areas, eval_checkpoint, workers, eval_trace);
    }
    if (report->parsed()) return cmd_report(common, report_inputs);
  } catch (const std::exception& e) {
    log_error(e.what());
    return 1;
  }
  return 2;
}

}  // namespace resq
