#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "resq/cli.hpp"
#include "resq/config.hpp"
#include "resq/errors.hpp"
#include "resq/eval.hpp"
#include "resq/trainer.hpp"

namespace py = pybind11;
using namespace resq;

namespace {

std::map<MnoKey, PriceSeries> series_map(const std::vector<PriceSeries>& series) {
  std::map<MnoKey, PriceSeries> by_key;
  for (const auto& s : series) by_key[s.mno] = s;
  return by_key;
}

std::vector<double> prices_as_floats(const std::vector<Money>& prices) {
  std::vector<double> out;
  out.reserve(prices.size());
  for (Money p : prices) out.push_back(p.to_double());
  return out;
}

}  // namespace

PYBIND11_MODULE(_resq, m) {
  m.doc() = "Trace-driven multi-operator bandwidth-reservation decision engine";

  py::register_exception<Error>(m, "ResqError");

  py::class_<Duration>(m, "Duration")
      .def_static("seconds", &Duration::seconds)
      .def_static("minutes", &Duration::minutes)
      .def_property_readonly("secs", &Duration::secs)
      .def("__repr__", [](const Duration& d) { return std::to_string(d.secs()) + "s"; });

  py::class_<Timestamp>(m, "Timestamp")
      .def_static("parse", [](const std::string& text) { return Timestamp::parse(text); })
      .def_static("from_unix", &Timestamp::from_unix)
      .def_property_readonly("unix_seconds", &Timestamp::unix_seconds)
      .def("__str__", &Timestamp::str)
      .def("__repr__", &Timestamp::str);

  py::class_<Money>(m, "Money")
      .def_static("parse", [](const std::string& text) { return Money::parse(text); })
      .def_static("from_float", &Money::from_double)
      .def_property_readonly("micros", &Money::micros)
      .def("__float__", &Money::to_double)
      .def("__str__", &Money::str)
      .def("__repr__", &Money::str);

  py::class_<MnoKey>(m, "MnoKey")
      .def(py::init([](const std::string& text) { return MnoKey::parse(text); }))
      .def_readonly("instance_type", &MnoKey::instance_type)
      .def_readonly("zone", &MnoKey::zone)
      .def("__str__", &MnoKey::str)
      .def("__repr__", &MnoKey::str);

  py::class_<SpotRecord>(m, "SpotRecord")
      .def_readonly("timestamp", &SpotRecord::timestamp)
      .def_readonly("instance_type", &SpotRecord::instance_type)
      .def_readonly("zone", &SpotRecord::zone)
      .def_readonly("price", &SpotRecord::price)
      .def("key", &SpotRecord::key);

  py::class_<PriceSeries>(m, "PriceSeries")
      .def_readonly("mno", &PriceSeries::mno)
      .def_readonly("start", &PriceSeries::start)
      .def_readonly("resolution", &PriceSeries::resolution)
      .def("__len__", &PriceSeries::size)
      .def("prices", [](const PriceSeries& s) { return prices_as_floats(s.prices); })
      .def("timestamp_at", &PriceSeries::timestamp_at)
      .def("sample", &PriceSeries::sample);

  py::class_<DataSplit>(m, "DataSplit")
      .def_readonly("train", &DataSplit::train)
      .def_readonly("test", &DataSplit::test)
      .def_readonly("boundary", &DataSplit::boundary);

  m.def("parse_spot_csv", [](const std::string& text) { return parse_spot_csv(text); },
        "Parse a 'timestamp,instance_type,zone,price' CSV into spot records.");
  m.def("format_spot_csv", &format_spot_csv);
  m.def(
      "build_series",
      [](const std::vector<SpotRecord>& records, const std::string& key,
         std::int64_t resolution_sec) {
        return build_series(records, MnoKey::parse(key), Duration::seconds(resolution_sec));
      },
      py::arg("records"), py::arg("key"), py::arg("resolution_sec") = 60);
  m.def("split_series", &split_series, py::arg("series"), py::arg("boundary"));
  m.def("write_series_csv", &write_series_csv);

  py::enum_<AreaKind>(m, "AreaKind")
      .value("Disjoint", AreaKind::Disjoint)
      .value("Overlap", AreaKind::Overlap);

  py::class_<CostArea>(m, "CostArea")
      .def_readonly("area_id", &CostArea::area_id)
      .def_readonly("start", &CostArea::start)
      .def_readonly("end", &CostArea::end)
      .def_readonly("sessions", &CostArea::sessions)
      .def_readonly("kind", &CostArea::kind)
      .def_property_readonly("operators", [](const CostArea& a) { return a.operators; })
      .def_property_readonly("mno_count", &CostArea::mno_count)
      .def_property_readonly("slot_count", &CostArea::slot_count)
      .def("price", &CostArea::price, py::arg("session"), py::arg("mno"), py::arg("slot"))
      .def("global_min", &CostArea::global_min);

  py::class_<AreaGrid>(m, "AreaGrid")
      .def(py::init<>())
      .def_readwrite("t_sv", &AreaGrid::t_sv)
      .def_readwrite("slot_count", &AreaGrid::slot_count)
      .def_readwrite("slot_spacing", &AreaGrid::slot_spacing)
      .def_readwrite("max_sessions", &AreaGrid::max_sessions);

  py::class_<RoadSegment>(m, "RoadSegment")
      .def(py::init([](const std::string& id, const Timestamp& start, const Timestamp& end,
                       const std::vector<std::string>& operators) {
             RoadSegment segment{id, start, end, {}};
             for (const auto& op : operators) segment.operators.push_back(MnoKey::parse(op));
             return segment;
           }),
           py::arg("segment_id"), py::arg("start"), py::arg("end"), py::arg("operators"))
      .def_readonly("segment_id", &RoadSegment::segment_id)
      .def_readonly("start", &RoadSegment::start)
      .def_readonly("end", &RoadSegment::end);

  m.def(
      "build_areas",
      [](const std::vector<RoadSegment>& route, const std::vector<PriceSeries>& series,
         const AreaGrid& grid) { return build_areas(route, series_map(series), grid).areas; },
      py::arg("route"), py::arg("series"), py::arg("grid") = AreaGrid{});
  m.def("classify_area", &classify_area);
  m.def("areas_to_json",
        [](const std::vector<CostArea>& areas) { return areas_to_json(AreaCollection{areas}); });
  m.def("areas_from_json",
        [](const std::string& text) { return areas_from_json(text).areas; });

  py::class_<SyntheticAreaConfig>(m, "SyntheticAreaConfig")
      .def(py::init<>())
      .def_readwrite("sessions_min", &SyntheticAreaConfig::sessions_min)
      .def_readwrite("sessions_max", &SyntheticAreaConfig::sessions_max)
      .def_readwrite("slots_min", &SyntheticAreaConfig::slots_min)
      .def_readwrite("slots_max", &SyntheticAreaConfig::slots_max)
      .def_readwrite("operators", &SyntheticAreaConfig::operators)
      .def_readwrite("seed", &SyntheticAreaConfig::seed);

  py::class_<ForecastModel>(m, "ForecastModel");

  py::class_<BootstrapModel, ForecastModel>(m, "BootstrapModel")
      .def_property_readonly("fitted", &BootstrapModel::fitted)
      .def_property_readonly("fingerprint", &BootstrapModel::fingerprint)
      .def_property_readonly("block_len", &BootstrapModel::block_len)
      .def("sample_area", &BootstrapModel::sample_area, py::arg("config"), py::arg("seed"))
      .def(
          "forecast_next",
          [](const BootstrapModel& model, const std::vector<double>& history, int horizon) {
            std::vector<Money> hist;
            hist.reserve(history.size());
            for (double v : history) hist.push_back(Money::from_double(v));
            return prices_as_floats(model.forecast_next(hist, horizon));
          },
          py::arg("history"), py::arg("horizon"))
      .def("to_json", &BootstrapModel::to_json)
      .def_static("from_json", &BootstrapModel::from_json);

  m.def(
      "fit_bootstrap",
      [](const std::vector<PriceSeries>& series, int block_len, double jitter) {
        return fit_bootstrap(series_map(series), block_len, jitter);
      },
      py::arg("series"), py::arg("block_len") = 64, py::arg("jitter") = 0.0);

  py::class_<RewardParams>(m, "RewardParams")
      .def(py::init<>())
      .def_readwrite("h", &RewardParams::h)
      .def_readwrite("r_global_min", &RewardParams::r_global_min)
      .def_readwrite("r_timeout", &RewardParams::r_timeout)
      .def_readwrite("t_sv_minutes", &RewardParams::t_sv_minutes);

  py::class_<EncoderDims>(m, "EncoderDims")
      .def(py::init<>())
      .def_readwrite("max_sessions", &EncoderDims::max_sessions)
      .def_readwrite("max_mnos", &EncoderDims::max_mnos)
      .def_readwrite("max_slots", &EncoderDims::max_slots)
      .def_property_readonly("action_count", &EncoderDims::action_count)
      .def_property_readonly("feature_dim", &EncoderDims::feature_dim)
      .def_property_readonly("wait_index", &EncoderDims::wait_index);

  py::class_<Action>(m, "Action")
      .def_static("wait", &Action::wait)
      .def_static("accept", &Action::accept, py::arg("mno"), py::arg("slot"))
      .def_property_readonly("is_wait", &Action::is_wait)
      .def_property_readonly("mno", &Action::mno)
      .def_property_readonly("slot", &Action::slot)
      .def("__repr__", [](const Action& a) {
        return a.is_wait() ? std::string("Action.wait()")
                           : "Action.accept(" + std::to_string(a.mno()) + ", " +
                                 std::to_string(a.slot()) + ")";
      });

  m.def("action_index", &action_index);
  m.def("action_from_index", &action_from_index);

  py::class_<EnvState>(m, "EnvState")
      .def_readonly("revealed", &EnvState::revealed)
      .def_readonly("done", &EnvState::done);

  py::class_<StepInfo>(m, "StepInfo")
      .def_readonly("accepted_price", &StepInfo::accepted_price)
      .def_readonly("global_min", &StepInfo::global_min)
      .def_readonly("session_index", &StepInfo::session_index);

  py::class_<StepOutcome>(m, "StepOutcome")
      .def_readonly("next", &StepOutcome::next)
      .def_readonly("reward", &StepOutcome::reward)
      .def_readonly("done", &StepOutcome::done)
      .def_readonly("info", &StepOutcome::info);

  py::class_<FeatureVec>(m, "FeatureVec")
      .def_readonly("dim", &FeatureVec::dim)
      .def_readonly("idx", &FeatureVec::idx)
      .def_readonly("val", &FeatureVec::val)
      .def("to_dense", &FeatureVec::to_dense);

  py::class_<AreaEnv>(m, "AreaEnv")
      .def(py::init<const CostArea&, RewardParams>(), py::arg("area"),
           py::arg("params") = RewardParams{}, py::keep_alive<1, 2>())
      .def("reset", &AreaEnv::reset)
      .def("legal_actions", &AreaEnv::legal_actions)
      .def("legal_mask", &AreaEnv::legal_mask, py::arg("state"), py::arg("dims") = EncoderDims{})
      .def("compute_reward", &AreaEnv::compute_reward, py::arg("state"), py::arg("action"))
      .def("step", &AreaEnv::step, py::arg("state"), py::arg("action"))
      .def("encode_state", &AreaEnv::encode_state, py::arg("state"),
           py::arg("dims") = EncoderDims{})
      .def("global_min", &AreaEnv::global_min);

  py::enum_<Variant>(m, "Variant")
      .value("DQN", Variant::DQN)
      .value("DoubleDQN", Variant::DoubleDQN)
      .value("DuelingDQN", Variant::DuelingDQN);

  py::class_<AgentConfig>(m, "AgentConfig")
      .def(py::init<>())
      .def_readwrite("variant", &AgentConfig::variant)
      .def_readwrite("gamma", &AgentConfig::gamma)
      .def_readwrite("epsilon", &AgentConfig::epsilon)
      .def_readwrite("batch_size", &AgentConfig::batch_size)
      .def_readwrite("target_sync_period", &AgentConfig::target_sync_period)
      .def_readwrite("learning_rate", &AgentConfig::learning_rate)
      .def_readwrite("hidden", &AgentConfig::hidden)
      .def_readwrite("buffer_capacity", &AgentConfig::buffer_capacity);

  py::class_<QAgent>(m, "QAgent")
      .def(py::init<AgentConfig, EncoderDims, std::uint64_t>(), py::arg("config"),
           py::arg("dims") = EncoderDims{}, py::arg("seed") = 0)
      .def("act_greedy",
           [](const QAgent& agent, const FeatureVec& state,
              const std::vector<std::uint8_t>& mask) { return agent.act_greedy(state, mask); })
      .def("q_values", [](const QAgent& agent, const FeatureVec& state) {
        return forward(agent.online(), state);
      })
      .def("sync_target", &QAgent::sync_target)
      .def_property_readonly("train_steps", &QAgent::train_steps)
      .def_property_readonly("config", &QAgent::config)
      .def("to_json", &QAgent::to_json, py::arg("include_buffer") = false)
      .def_static("from_json", &QAgent::from_json);

  py::class_<PhaseConfig>(m, "PhaseConfig")
      .def(py::init<>())
      .def_readwrite("episodes", &PhaseConfig::episodes)
      .def_readwrite("fine_tune_interval", &PhaseConfig::fine_tune_interval)
      .def_readwrite("updates_per_round", &PhaseConfig::updates_per_round)
      .def_readwrite("seed", &PhaseConfig::seed)
      .def_readwrite("checkpoint_every", &PhaseConfig::checkpoint_every)
      .def_readwrite("checkpoint_path", &PhaseConfig::checkpoint_path);

  py::class_<TrainReport>(m, "TrainReport")
      .def_readonly("episode_rewards", &TrainReport::episode_rewards)
      .def_readonly("episode_losses", &TrainReport::episode_losses)
      .def_readonly("moving_avg_reward", &TrainReport::moving_avg_reward)
      .def_readonly("wall_clock_sec", &TrainReport::wall_clock_sec)
      .def_readonly("episodes", &TrainReport::episodes)
      .def("to_csv", &TrainReport::to_csv)
      .def("summary_json", &TrainReport::summary_json);

  m.def("run_phase1", &run_phase1, py::arg("agent"), py::arg("model"), py::arg("synth"),
        py::arg("config"), py::arg("reward") = RewardParams{});
  m.def(
      "run_phase2",
      [](QAgent& agent, const std::vector<CostArea>& areas, const PhaseConfig& config,
         const RewardParams& reward) { return run_phase2(agent, areas, config, reward); },
      py::arg("agent"), py::arg("areas"), py::arg("config"), py::arg("reward") = RewardParams{});
  m.def(
      "run_phase3",
      [](QAgent& agent, std::vector<CostArea> areas, const PhaseConfig& config,
         const RewardParams& reward) {
        return run_phase3(agent, stream_from_areas(std::move(areas)), config, reward);
      },
      py::arg("agent"), py::arg("areas"), py::arg("config"), py::arg("reward") = RewardParams{});
  m.def("checkpoint_save", &checkpoint_save, py::arg("agent"), py::arg("path"),
        py::arg("include_buffer") = false);
  m.def("checkpoint_load", &checkpoint_load, py::arg("path"));

  py::class_<OracleResult>(m, "OracleResult")
      .def_readonly("best_reward", &OracleResult::best_reward)
      .def_readonly("session", &OracleResult::session)
      .def_readonly("mno", &OracleResult::mno)
      .def_readonly("slot", &OracleResult::slot)
      .def_readonly("accepted_price", &OracleResult::accepted_price)
      .def_property_readonly("actions", [](const OracleResult& r) { return r.best_actions; });

  m.def("no_policy_cost", &no_policy_cost);
  m.def("dp_oracle", &dp_oracle, py::arg("area"), py::arg("params") = RewardParams{});
  m.def("cost_savings", &cost_savings, py::arg("policy_cost"), py::arg("baseline_cost"));

  py::class_<AreaOutcome>(m, "AreaOutcome")
      .def_readonly("area_id", &AreaOutcome::area_id)
      .def_readonly("cum_reward", &AreaOutcome::cum_reward)
      .def_readonly("cost", &AreaOutcome::cost)
      .def_readonly("penalty", &AreaOutcome::penalty)
      .def_readonly("baseline", &AreaOutcome::baseline)
      .def_readonly("accepted_session", &AreaOutcome::accepted_session)
      .def_readonly("accepted_mno", &AreaOutcome::accepted_mno)
      .def_readonly("accepted_slot", &AreaOutcome::accepted_slot);

  py::class_<Metrics>(m, "Metrics")
      .def_readonly("policy", &Metrics::policy)
      .def_readonly("areas", &Metrics::areas)
      .def_readonly("avg_cum_reward", &Metrics::avg_cum_reward)
      .def_readonly("cum_cost", &Metrics::cum_cost)
      .def_readonly("cum_penalty", &Metrics::cum_penalty)
      .def_readonly("baseline_cost", &Metrics::baseline_cost)
      .def_readonly("cost_savings_pct", &Metrics::cost_savings_pct)
      .def_readonly("rank_correlation", &Metrics::rank_correlation)
      .def_readonly("per_area", &Metrics::per_area)
      .def("to_json", &Metrics::to_json)
      .def("series_csv", &Metrics::series_csv);

  m.def(
      "evaluate_policy",
      [](const std::string& policy, const std::vector<CostArea>& areas,
         const RewardParams& params, const EncoderDims& dims, const QAgent* agent, int workers) {
        std::unique_ptr<Policy> p;
        if (policy == "none") {
          p = make_baseline_policy();
        } else if (policy == "oracle") {
          p = make_oracle_policy();
        } else if (policy == "agent") {
          if (agent == nullptr) {
            throw Error(Errc::bad_config, "policy 'agent' needs an agent argument");
          }
          p = make_greedy_policy(*agent);
        } else {
          throw Error(Errc::bad_config, "policy must be 'none', 'oracle' or 'agent'");
        }
        return evaluate_policy(*p, areas, params, dims, workers);
      },
      py::arg("policy"), py::arg("areas"), py::arg("params") = RewardParams{},
      py::arg("dims") = EncoderDims{}, py::arg("agent") = nullptr, py::arg("workers") = 1);

  m.def("run_command", &run_command, "Invoke the resq command line; returns the exit code.");

  m.attr("__version__") = "0.1.0";
}
