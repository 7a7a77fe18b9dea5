#pragma once

// Runtime loops for the two nodes. Both are parameterized by a start instant
// and a tick length so separate processes can share a tick grid.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "biofsm/arousal_classifier.hpp"
#include "biofsm/sim_harness.hpp"
#include "biofsm/signal_core.hpp"
#include "biofsm/wire_protocol.hpp"

namespace biofsm {

using Clock = std::chrono::steady_clock;

struct WindowResult {
  std::int64_t window_index = 0;
  std::optional<WindowDecision> decision;

  // The datagram for this window, nullopt when nothing is sent.
  std::optional<ClassByte> byte() const;
};

// Offline half of the wearable: samples -> frames -> one result per window
// in [0, ceil(duration_ms / window_ms)). With no duration the last sample's
// timestamp bounds the session.
std::vector<WindowResult> run_wearable_pipeline(std::span<const PhysioSample> samples,
                                                const FeatureConfig& features,
                                                const LadderConfig& ladder,
                                                std::optional<double> duration_ms = std::nullopt);

// Wearable session log record:
// `{"window":..,"bpm_mean":..,"gsr_mean":..,"class":..,"byte_sent":..}`
std::string wearable_record_json(const WindowResult& w, bool sent);

struct PacingOptions {
  Clock::time_point start;
  std::chrono::milliseconds slot{1000};
  const std::atomic<bool>* stop = nullptr;
};

// Sends one datagram per non-empty slot at start + (i + 0.5) * slot.
// `on_slot(i, sent)` runs after each slot's send attempt.
void paced_send(UdpEndpoint& ep, std::span<const std::optional<std::vector<std::uint8_t>>> slots,
                const PacingOptions& pacing,
                const std::function<void(std::size_t, bool)>& on_slot = {});

// Payload for one scripted slot: the class byte for A/B/C, a stray 'X' for
// UNRECOGNIZED, nothing for ABSENT.
std::optional<std::vector<std::uint8_t>> payload_for(InputSymbol s);

struct BenchtopLoopOptions {
  FsmConfig fsm;
  Clock::time_point start;
  std::chrono::milliseconds tick{1000};
  std::optional<std::uint64_t> max_ticks;  // run until stop when absent
  const std::atomic<bool>* stop = nullptr;
};

// Tick i covers [start + i*tick, start + (i+1)*tick). Datagrams are drained
// first; the tick is ABSENT only if none arrived.
std::vector<TraceEntry> run_benchtop_loop(UdpEndpoint& ep, const BenchtopLoopOptions& opts,
                                          const std::function<void(const TraceEntry&)>& on_tick = {});

// Human-readable rendering of a tick, e.g. "tick 3  HIGH      rgb(255,0,0) x16  TONE3".
std::string render_actuation_line(const TraceEntry& e);

}  // namespace biofsm
