#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <random>

#include "biofsm/errors.hpp"
#include "biofsm/node_config.hpp"

using namespace biofsm;

TEST_CASE("minimal file takes every default") {
  const auto cfg = node_config_from_json(R"({"role":"benchtop"})");
  CHECK(cfg.role == Role::BENCHTOP);
  CHECK(cfg.endpoint.port == 8888);
  CHECK(cfg.tick_ms == 1000);
  CHECK(cfg.fsm.brownout_ticks == 10);
  CHECK(cfg.ladder == LadderConfig{});
}

TEST_CASE("shipped configs load") {
  const auto w = load_node_config(BIOFSM_DATA_DIR "/wearable.json");
  CHECK(w.role == Role::WEARABLE);
  CHECK(w.source.kind == SignalSource::Kind::SYNTH);
  CHECK(w.source.profile.gsr_us.at(35000.0) == 17.5);
  const auto b = load_node_config(BIOFSM_DATA_DIR "/benchtop.json");
  CHECK(b.role == Role::BENCHTOP);
}

TEST_CASE("serialize then reload is the identity") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    NodeConfig cfg;
    cfg.role = trial % 2 ? Role::WEARABLE : Role::BENCHTOP;
    cfg.endpoint.port = static_cast<std::uint16_t>(1024 + rng() % 60000);
    cfg.endpoint.peer_address = "10.0.0." + std::to_string(rng() % 255);
    cfg.tick_ms = 1 + static_cast<std::uint32_t>(rng() % 5000);
    cfg.log_path = "logs/run" + std::to_string(trial) + ".jsonl";
    cfg.ladder.hr_weight = u(rng);
    cfg.ladder.gsr_weight = 1.0 - cfg.ladder.hr_weight;
    cfg.ladder.hr.edges = {50.0, 70.0 + u(rng), 100.0 + u(rng), 140.0};
    cfg.ladder.gsr.scores = {u(rng) + 0.1, 1.0, 2.0};
    cfg.ladder.window_ms = 1000.0 + 1e4 * u(rng);
    cfg.features.pba.dc_alpha = 0.5 + 0.49 * u(rng);
    cfg.features.pba.refractory_ms = 100.0 + 400.0 * u(rng);
    cfg.features.bpm_intervals = 1 + rng() % 6;
    cfg.features.gsr_kernel = {u(rng), u(rng) + 0.1, 1.0};
    cfg.source.kind = static_cast<SignalSource::Kind>(rng() % 3);
    cfg.source.path = "trace.csv";
    cfg.source.seed = rng();
    cfg.source.duration_ms = 1000.0 + 1e5 * u(rng);
    cfg.source.profile.bpm = Trajectory{{{0.0, 60.0 + 60.0 * u(rng)}, {30000.0, 60.0 + 60.0 * u(rng)}}};
    cfg.source.profile.noise = 0.3 * u(rng);
    cfg.fsm.brownout_ticks = 1 + static_cast<std::uint32_t>(rng() % 30);
    cfg.fsm.initial_state = kAllStates[rng() % 5];
    REQUIRE_NOTHROW(cfg.validate());

    const auto back = node_config_from_json(node_config_to_json(cfg));
    CHECK(back == cfg);
  }
}

TEST_CASE("scalar trajectories are constants") {
  const auto cfg = node_config_from_json(R"({"source":{"profile":{"bpm":72,"gsr_us":3.5}}})");
  CHECK(cfg.source.profile.bpm.at(12345.0) == 72.0);
  CHECK(cfg.source.profile.gsr_us.at(0.0) == 3.5);
}

TEST_CASE("bad configs are rejected") {
  CHECK_THROWS_AS(node_config_from_json("{not json"), ConfigError);
  CHECK_THROWS_AS(node_config_from_json(R"({"role":"router"})"), ConfigError);
  CHECK_THROWS_AS(node_config_from_json(R"({"tick_ms":0})"), ConfigError);
  CHECK_THROWS_AS(node_config_from_json(R"({"endpoint":{"port":0}})"), ConfigError);
  CHECK_THROWS_AS(node_config_from_json(R"({"ladder":{"hr_weight":0.9}})"), ConfigError);
  CHECK_THROWS_AS(node_config_from_json(R"({"source":{"type":"trace"}})"), ConfigError);
  CHECK_THROWS_AS(node_config_from_json(R"({"role":"benchtop","brownout_ticks":0})"), ConfigError);
  CHECK_THROWS_AS(node_config_from_json(R"({"role":"benchtop","initial_state":"SLEEP"})"), ConfigError);
  CHECK_THROWS_AS(load_node_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("log directory override") {
  NodeConfig cfg;
  cfg.role = Role::BENCHTOP;
  ::unsetenv("BIOFSM_LOG_DIR");
  CHECK(resolve_log_path(cfg) == "benchtop.jsonl");
  cfg.log_path = "/var/tmp/x/bench.jsonl";
  CHECK(resolve_log_path(cfg) == "/var/tmp/x/bench.jsonl");
  ::setenv("BIOFSM_LOG_DIR", "/tmp/logs", 1);
  CHECK(resolve_log_path(cfg) == "/tmp/logs/bench.jsonl");
  ::unsetenv("BIOFSM_LOG_DIR");
}
