#pragma once

// Per-node JSON configuration. Every field has a default, so `{"role":"benchtop"}`
// is a complete file.

#include <cstdint>
#include <string>

#include "biofsm/arousal_classifier.hpp"
#include "biofsm/benchtop_fsm.hpp"
#include "biofsm/signal_core.hpp"
#include "biofsm/wire_protocol.hpp"

namespace biofsm {

enum class Role { WEARABLE, BENCHTOP };

struct SignalSource {
  enum class Kind { SYNTH, TRACE, SCRIPT };

  Kind kind = Kind::SYNTH;
  SignalProfile profile;      // SYNTH
  double duration_ms = 60000.0;
  std::uint64_t seed = 1;
  std::string path;           // TRACE csv or SCRIPT file

  bool operator==(const SignalSource&) const = default;
};

struct NodeConfig {
  Role role = Role::WEARABLE;
  EndpointConfig endpoint;
  std::uint32_t tick_ms = 1000;
  std::string log_path;  // empty: <role>.jsonl

  // wearable
  LadderConfig ladder;
  FeatureConfig features;
  SignalSource source;

  // benchtop
  FsmConfig fsm;

  bool operator==(const NodeConfig&) const = default;

  void validate() const;
};

// Throws ConfigError on malformed JSON, unknown enum names or failed validation.
NodeConfig node_config_from_json(const std::string& text);
NodeConfig load_node_config(const std::string& path);
std::string node_config_to_json(const NodeConfig& cfg);

// BIOFSM_LOG_DIR, when set, replaces the directory part of the log path.
std::string resolve_log_path(const NodeConfig& cfg);

}  // namespace biofsm
