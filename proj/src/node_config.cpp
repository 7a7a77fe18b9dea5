#include "biofsm/node_config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "biofsm/errors.hpp"

namespace biofsm {

using nlohmann::json;

namespace {

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

json trajectory_to_json(const Trajectory& t) {
  json arr = json::array();
  for (const auto& [ms, v] : t.knots) arr.push_back({ms, v});
  return arr;
}

Trajectory trajectory_from_json(const json& j) {
  Trajectory t;
  if (j.is_number()) return Trajectory::constant(j.get<double>());
  for (const auto& k : j) t.knots.emplace_back(k.at(0).get<double>(), k.at(1).get<double>());
  return t;
}

json ladder_to_json(const BandLadder& b) {
  return {{"edges", b.edges}, {"scores", b.scores}};
}

void ladder_from_json(const json& j, BandLadder& b) {
  read_opt(j, "edges", b.edges);
  read_opt(j, "scores", b.scores);
}

std::string role_name(Role r) { return r == Role::WEARABLE ? "wearable" : "benchtop"; }

std::string source_kind_name(SignalSource::Kind k) {
  switch (k) {
    case SignalSource::Kind::SYNTH: return "synth";
    case SignalSource::Kind::TRACE: return "trace";
    case SignalSource::Kind::SCRIPT: return "script";
  }
  return "synth";
}

}  // namespace

void NodeConfig::validate() const {
  endpoint.validate();
  if (tick_ms == 0) throw ConfigError("tick_ms must be positive");
  if (role == Role::WEARABLE) {
    ladder.validate();
    features.pba.validate();
    if (features.bpm_intervals == 0) throw ConfigError("bpm_intervals must be at least 1");
    if (features.gsr_kernel.size() > kGsrWindowLength) throw ConfigError("gsr_kernel longer than 8 taps");
    if (source.kind == SignalSource::Kind::SYNTH) {
      source.profile.validate();
      if (!(source.duration_ms > 0.0)) throw ConfigError("source.duration_ms must be positive");
    } else if (source.path.empty()) {
      throw ConfigError("source.path is required for trace and script sources");
    }
  } else {
    fsm.validate();
  }
}

std::string node_config_to_json(const NodeConfig& cfg) {
  json j;
  j["role"] = role_name(cfg.role);
  j["endpoint"] = {{"bind_address", cfg.endpoint.bind_address},
                   {"peer_address", cfg.endpoint.peer_address},
                   {"port", cfg.endpoint.port}};
  j["tick_ms"] = cfg.tick_ms;
  j["log_path"] = cfg.log_path;

  j["ladder"] = {{"hr", ladder_to_json(cfg.ladder.hr)},
                 {"gsr", ladder_to_json(cfg.ladder.gsr)},
                 {"hr_weight", cfg.ladder.hr_weight},
                 {"gsr_weight", cfg.ladder.gsr_weight},
                 {"window_ms", cfg.ladder.window_ms}};

  const auto& p = cfg.features.pba;
  j["features"] = {{"pba",
                    {{"dc_alpha", p.dc_alpha},
                     {"threshold_fraction", p.threshold_fraction},
                     {"envelope_decay", p.envelope_decay},
                     {"min_threshold", p.min_threshold},
                     {"refractory_ms", p.refractory_ms},
                     {"ac_smoothing_taps", p.ac_smoothing_taps}}},
                   {"bpm_intervals", cfg.features.bpm_intervals},
                   {"gsr_kernel", cfg.features.gsr_kernel}};

  const auto& pr = cfg.source.profile;
  j["source"] = {{"type", source_kind_name(cfg.source.kind)},
                 {"duration_ms", cfg.source.duration_ms},
                 {"seed", cfg.source.seed},
                 {"path", cfg.source.path},
                 {"profile",
                  {{"bpm", trajectory_to_json(pr.bpm)},
                   {"gsr_us", trajectory_to_json(pr.gsr_us)},
                   {"ppg_rate_hz", pr.ppg_rate_hz},
                   {"gsr_rate_hz", pr.gsr_rate_hz},
                   {"ppg_offset", pr.ppg_offset},
                   {"ppg_amplitude", pr.ppg_amplitude},
                   {"noise", pr.noise},
                   {"gsr_noise_us", pr.gsr_noise_us},
                   {"dc_drift_amplitude", pr.dc_drift_amplitude},
                   {"dc_drift_hz", pr.dc_drift_hz}}}};

  j["brownout_ticks"] = cfg.fsm.brownout_ticks;
  j["initial_state"] = std::string(to_string(cfg.fsm.initial_state));
  return j.dump(2);
}

NodeConfig node_config_from_json(const std::string& text) {
  NodeConfig cfg;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw ConfigError("config must be a JSON object");

    const auto role = j.value("role", std::string("wearable"));
    if (role == "wearable") {
      cfg.role = Role::WEARABLE;
    } else if (role == "benchtop") {
      cfg.role = Role::BENCHTOP;
    } else {
      throw ConfigError("role must be 'wearable' or 'benchtop', got '" + role + "'");
    }

    if (auto e = j.find("endpoint"); e != j.end()) {
      read_opt(*e, "bind_address", cfg.endpoint.bind_address);
      read_opt(*e, "peer_address", cfg.endpoint.peer_address);
      read_opt(*e, "port", cfg.endpoint.port);
    }
    read_opt(j, "tick_ms", cfg.tick_ms);
    read_opt(j, "log_path", cfg.log_path);

    if (auto l = j.find("ladder"); l != j.end()) {
      if (auto h = l->find("hr"); h != l->end()) ladder_from_json(*h, cfg.ladder.hr);
      if (auto g = l->find("gsr"); g != l->end()) ladder_from_json(*g, cfg.ladder.gsr);
      read_opt(*l, "hr_weight", cfg.ladder.hr_weight);
      read_opt(*l, "gsr_weight", cfg.ladder.gsr_weight);
      read_opt(*l, "window_ms", cfg.ladder.window_ms);
    }

    if (auto f = j.find("features"); f != j.end()) {
      if (auto p = f->find("pba"); p != f->end()) {
        auto& pba = cfg.features.pba;
        read_opt(*p, "dc_alpha", pba.dc_alpha);
        read_opt(*p, "threshold_fraction", pba.threshold_fraction);
        read_opt(*p, "envelope_decay", pba.envelope_decay);
        read_opt(*p, "min_threshold", pba.min_threshold);
        read_opt(*p, "refractory_ms", pba.refractory_ms);
        read_opt(*p, "ac_smoothing_taps", pba.ac_smoothing_taps);
      }
      read_opt(*f, "bpm_intervals", cfg.features.bpm_intervals);
      read_opt(*f, "gsr_kernel", cfg.features.gsr_kernel);
    }

    if (auto s = j.find("source"); s != j.end()) {
      const auto type = s->value("type", std::string("synth"));
      if (type == "synth") {
        cfg.source.kind = SignalSource::Kind::SYNTH;
      } else if (type == "trace") {
        cfg.source.kind = SignalSource::Kind::TRACE;
      } else if (type == "script") {
        cfg.source.kind = SignalSource::Kind::SCRIPT;
      } else {
        throw ConfigError("source.type must be synth, trace or script");
      }
      read_opt(*s, "duration_ms", cfg.source.duration_ms);
      read_opt(*s, "seed", cfg.source.seed);
      read_opt(*s, "path", cfg.source.path);
      if (auto p = s->find("profile"); p != s->end()) {
        auto& pr = cfg.source.profile;
        if (auto b = p->find("bpm"); b != p->end()) pr.bpm = trajectory_from_json(*b);
        if (auto g = p->find("gsr_us"); g != p->end()) pr.gsr_us = trajectory_from_json(*g);
        read_opt(*p, "ppg_rate_hz", pr.ppg_rate_hz);
        read_opt(*p, "gsr_rate_hz", pr.gsr_rate_hz);
        read_opt(*p, "ppg_offset", pr.ppg_offset);
        read_opt(*p, "ppg_amplitude", pr.ppg_amplitude);
        read_opt(*p, "noise", pr.noise);
        read_opt(*p, "gsr_noise_us", pr.gsr_noise_us);
        read_opt(*p, "dc_drift_amplitude", pr.dc_drift_amplitude);
        read_opt(*p, "dc_drift_hz", pr.dc_drift_hz);
      }
    }

    read_opt(j, "brownout_ticks", cfg.fsm.brownout_ticks);
    if (auto st = j.find("initial_state"); st != j.end()) {
      auto s = bench_state_from_string(st->get<std::string>());
      if (!s) throw ConfigError("unknown initial_state");
      cfg.fsm.initial_state = *s;
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

NodeConfig load_node_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return node_config_from_json(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string resolve_log_path(const NodeConfig& cfg) {
  namespace fs = std::filesystem;
  fs::path p = cfg.log_path.empty() ? fs::path(role_name(cfg.role) + ".jsonl") : fs::path(cfg.log_path);
  if (const char* dir = std::getenv("BIOFSM_LOG_DIR"); dir && *dir) {
    p = fs::path(dir) / p.filename();
  }
  return p.string();
}

}  // namespace biofsm
