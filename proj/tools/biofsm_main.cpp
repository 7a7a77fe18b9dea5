// biofsm: wearable and benchtop nodes, the tick simulator and the session
// evaluator behind one executable.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "biofsm/errors.hpp"
#include "biofsm/node_config.hpp"
#include "biofsm/nodes.hpp"

using namespace biofsm;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitStartup = 2;

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop.store(true); }

struct Overrides {
  std::string config;
  std::optional<std::uint16_t> port;
  std::optional<std::uint32_t> tick_ms;
  std::optional<std::uint32_t> brownout_ticks;
  std::optional<double> window_ms;
  std::optional<std::string> log;
  std::optional<std::string> trace;
  std::optional<std::string> script;
  std::optional<std::uint64_t> seed;
};

void add_node_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "Node configuration (JSON)");
  cmd->add_option("--port", o.port, "UDP port (benchtop listens, wearable sends)");
  cmd->add_option("--tick-ms", o.tick_ms, "Tick length in milliseconds")->check(CLI::PositiveNumber);
  cmd->add_option("--log", o.log, "JSONL session log path");
}

NodeConfig load_for(Role role, const Overrides& o) {
  NodeConfig cfg;
  cfg.role = role;
  if (!o.config.empty()) {
    cfg = load_node_config(o.config);
    if (cfg.role != role) throw ConfigError(o.config + ": role does not match the command");
  }
  if (o.port) cfg.endpoint.port = *o.port;
  if (o.tick_ms) cfg.tick_ms = *o.tick_ms;
  if (o.brownout_ticks) cfg.fsm.brownout_ticks = *o.brownout_ticks;
  if (o.window_ms) cfg.ladder.window_ms = *o.window_ms;
  if (o.log) cfg.log_path = *o.log;
  if (o.trace) {
    cfg.source.kind = SignalSource::Kind::TRACE;
    cfg.source.path = *o.trace;
  }
  if (o.script) {
    cfg.source.kind = SignalSource::Kind::SCRIPT;
    cfg.source.path = *o.script;
  }
  if (o.seed) cfg.source.seed = *o.seed;
  cfg.validate();
  return cfg;
}

// Unix epoch milliseconds -> steady clock, so separate processes share a grid.
Clock::time_point start_point(std::optional<std::int64_t> epoch_ms) {
  if (!epoch_ms) return Clock::now();
  const auto target = std::chrono::system_clock::time_point(std::chrono::milliseconds(*epoch_ms));
  return Clock::now() + std::chrono::duration_cast<Clock::duration>(target - std::chrono::system_clock::now());
}

std::ofstream open_log(const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::app);
  if (!out) throw ConfigError(path + ": cannot open log for writing");
  return out;
}

struct BenchtopRun {
  NodeConfig cfg;
  Clock::time_point start;
  std::optional<std::uint64_t> ticks;
  bool quiet = false;
};

int run_benchtop(const BenchtopRun& run, UdpEndpoint& ep) {
  auto log = open_log(resolve_log_path(run.cfg));
  BenchtopLoopOptions o;
  o.fsm = run.cfg.fsm;
  o.start = run.start;
  o.tick = std::chrono::milliseconds(run.cfg.tick_ms);
  o.max_ticks = run.ticks;
  o.stop = &g_stop;
  run_benchtop_loop(ep, o, [&](const TraceEntry& e) {
    log << actuation_record_json(e) << '\n' << std::flush;
    if (!run.quiet) std::cout << render_actuation_line(e) << std::endl;
  });
  return kExitOk;
}

struct WearablePlan {
  std::vector<std::optional<std::vector<std::uint8_t>>> slots;
  std::vector<std::function<std::string(bool)>> records;
};

WearablePlan plan_wearable(const NodeConfig& cfg) {
  WearablePlan plan;
  if (cfg.source.kind == SignalSource::Kind::SCRIPT) {
    const auto script = load_tick_script(cfg.source.path);
    for (std::size_t i = 0; i < script.size(); ++i) {
      const InputSymbol s = script[i];
      plan.slots.push_back(payload_for(s));
      plan.records.push_back([i, s](bool sent) {
        nlohmann::ordered_json j;
        j["window"] = i;
        j["bpm_mean"] = nullptr;
        j["gsr_mean"] = nullptr;
        const int k = static_cast<int>(s);
        if (k < 3) {
          j["class"] = to_string(kAllClasses[k]);
        } else {
          j["class"] = nullptr;
        }
        if (sent) {
          j["byte_sent"] = std::string(1, symbol_token(s));
        } else {
          j["byte_sent"] = nullptr;
        }
        return j.dump();
      });
    }
    return plan;
  }

  std::vector<PhysioSample> samples;
  std::optional<double> duration;
  if (cfg.source.kind == SignalSource::Kind::SYNTH) {
    samples = synth_physio(cfg.source.profile, cfg.source.duration_ms, cfg.source.seed);
    duration = cfg.source.duration_ms;
  } else {
    samples = read_trace_csv_file(cfg.source.path);
  }
  for (const auto& w : run_wearable_pipeline(samples, cfg.features, cfg.ladder, duration)) {
    plan.slots.push_back(w.byte() ? std::optional(std::vector<std::uint8_t>{w.byte()->byte}) : std::nullopt);
    plan.records.push_back([w](bool sent) { return wearable_record_json(w, sent); });
  }
  return plan;
}

struct WearableRun {
  NodeConfig cfg;
  Clock::time_point start;
  bool realtime = false;
  bool duplex = false;
};

int run_wearable(const WearableRun& run) {
  const auto plan = plan_wearable(run.cfg);
  auto log = open_log(resolve_log_path(run.cfg));

  // One slot per window: window_ms of wall time with --realtime, otherwise
  // one tick so a window lines up with one benchtop tick.
  const auto slot = std::chrono::milliseconds(
      run.realtime ? static_cast<std::int64_t>(run.cfg.ladder.window_ms) : run.cfg.tick_ms);

  std::optional<UdpEndpoint> rx;
  std::thread bench;
  int bench_rc = kExitOk;
  std::uint16_t port = run.cfg.endpoint.port;
  if (run.duplex) {
    NodeConfig bcfg = run.cfg;
    bcfg.role = Role::BENCHTOP;
    bcfg.log_path.clear();
    bcfg.tick_ms = static_cast<std::uint32_t>(slot.count());
    rx.emplace(UdpEndpoint::bind(bcfg.endpoint.bind_address, run.cfg.endpoint.port));
    port = rx->local_port();
    bench = std::thread([&, bcfg] {
      BenchtopRun b{bcfg, run.start, plan.slots.size(), false};
      try {
        bench_rc = run_benchtop(b, *rx);
      } catch (const std::exception& e) {
        std::cerr << "benchtop: " << e.what() << '\n';
        bench_rc = kExitRuntime;
      }
    });
  }

  auto tx = UdpEndpoint::connect_to(run.cfg.endpoint.peer_address, port);
  std::size_t sent_count = 0;
  paced_send(tx, plan.slots, {run.start, slot, &g_stop}, [&](std::size_t i, bool sent) {
    sent_count += sent;
    log << plan.records[i](sent) << '\n' << std::flush;
    if (!run.duplex) {
      std::cout << "slot " << i << ": " << (sent ? "sent" : "nothing sent") << std::endl;
    }
  });
  if (bench.joinable()) bench.join();
  std::cerr << "wearable: " << plan.slots.size() << " window(s), " << sent_count << " byte(s) sent\n";
  return bench_rc;
}

void write_output(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw ConfigError(path + ": cannot open for writing");
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Biofeedback wearable / benchtop nodes, simulator and evaluator"};
  app.require_subcommand(1);

  Overrides wo, bo;
  std::optional<std::int64_t> start_at;
  bool realtime = false, duplex = false;
  auto* wearable = app.add_subcommand("wearable", "Run the wearable node");
  add_node_flags(wearable, wo);
  wearable->add_option("--window-ms", wo.window_ms, "Classification window length")->check(CLI::PositiveNumber);
  wearable->add_option("--trace", wo.trace, "Read samples from a trace CSV instead of the config source");
  wearable->add_option("--script", wo.script, "Send a tick script instead of classifier output");
  wearable->add_option("--seed", wo.seed, "Synthetic source seed");
  wearable->add_option("--start-at", start_at, "Shared start instant, Unix epoch ms");
  wearable->add_flag("--realtime", realtime, "Pace one window per window_ms instead of per tick");
  wearable->add_flag("--duplex", duplex, "Also run a benchtop in this process over loopback UDP");

  std::optional<std::uint64_t> ticks;
  bool quiet = false;
  auto* benchtop = app.add_subcommand("benchtop", "Run the benchtop node");
  add_node_flags(benchtop, bo);
  benchtop->add_option("--brownout-ticks", bo.brownout_ticks, "Silent ticks before BROWNOUT")
      ->check(CLI::PositiveNumber);
  benchtop->add_option("--ticks", ticks, "Stop after this many ticks");
  benchtop->add_option("--start-at", start_at, "Shared start instant, Unix epoch ms");
  benchtop->add_flag("--quiet", quiet, "No per-tick lines on stdout");

  std::string script_path, json_path;
  FsmConfig sim_fsm;
  auto* simulate = app.add_subcommand("simulate", "Run a tick script through the benchtop FSM");
  simulate->add_option("script", script_path, "Tick script (A B C X -)")->required();
  simulate->add_option("--brownout-ticks", sim_fsm.brownout_ticks, "Silent ticks before BROWNOUT")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--json", json_path, "Write the actuation JSONL here ('-' for stdout)");

  std::string table_path;
  std::optional<int> clip;
  auto* evaluate = app.add_subcommand("evaluate", "Per-clip accuracy of a session fixture");
  evaluate->add_option("fixture", table_path, "CSV clip,interval,self_report,predicted")->required();
  evaluate->add_option("--json", json_path, "Write the JSON report here ('-' for stdout)");
  evaluate->add_option("--clip", clip, "Print one clip's predicted column as a tick script")
      ->check(CLI::Range(1, kClips));

  std::uint32_t verify_brownout = 10;
  auto* verify = app.add_subcommand("verify", "Exhaustive transition-table determinism check");
  verify->add_option("--brownout-ticks", verify_brownout, "Silent ticks before BROWNOUT")
      ->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);

  try {
    if (*wearable) {
      WearableRun run{load_for(Role::WEARABLE, wo), start_point(start_at), realtime, duplex};
      return run_wearable(run);
    }
    if (*benchtop) {
      BenchtopRun run{load_for(Role::BENCHTOP, bo), start_point(start_at), ticks, quiet};
      auto ep = UdpEndpoint::bind(run.cfg.endpoint.bind_address, run.cfg.endpoint.port);
      std::cerr << "benchtop: listening on " << run.cfg.endpoint.bind_address << ':' << ep.local_port() << '\n';
      return run_benchtop(run, ep);
    }
    if (*simulate) {
      sim_fsm.validate();
      const auto trace = run_simulation(load_tick_script(script_path), sim_fsm);
      if (json_path != "-") {
        for (const auto& e : trace) std::cout << render_actuation_line(e) << '\n';
      }
      if (!json_path.empty()) write_output(json_path, trace_to_jsonl(trace));
      return kExitOk;
    }
    if (*evaluate) {
      const auto records = read_table3_file(table_path);
      const auto report = evaluate_table3(records);
      if (clip) {
        std::cout << format_tick_script(predicted_script(records, *clip));
        return kExitOk;
      }
      if (json_path != "-") std::cout << report.render_text();
      if (!json_path.empty()) write_output(json_path, report.to_json() + "\n");
      return kExitOk;
    }
    if (*verify) {
      FsmConfig cfg;
      cfg.brownout_ticks = verify_brownout;
      const auto report = verify_determinism(cfg);
      std::cout << report.render_table();
      for (const auto& v : report.violations) std::cout << "violation: " << v << '\n';
      std::cout << (report.deterministic() ? "deterministic" : "NOT deterministic") << ": "
                << report.cells.size() << " cells, " << report.symbol_level_cells << " (state, symbol) pairs\n";
      return report.deterministic() ? kExitOk : kExitRuntime;
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitStartup;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitStartup;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}
