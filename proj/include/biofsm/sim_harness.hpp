#pragma once

// Synchronous-reactive simulation of the Data Stream -> Benchtop pipeline on a
// virtual clock, the session accuracy evaluation, and the live-UDP replay that
// binds the two together.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "biofsm/arousal_classifier.hpp"
#include "biofsm/benchtop_fsm.hpp"
#include "biofsm/wire_protocol.hpp"

namespace biofsm {

// One symbol per tick; the tick index is the position.
using TickScript = std::vector<InputSymbol>;

// Script text: one token per line (A, B, C, X, -). Blank lines and lines
// starting with '#' are skipped. Throws ParseError naming the line.
TickScript parse_tick_script(std::istream& in, const std::string& source = "<script>");
TickScript load_tick_script(const std::string& path);
std::string format_tick_script(const TickScript& script);

struct TraceEntry {
  std::uint64_t tick = 0;
  InputSymbol input = InputSymbol::ABSENT;
  BenchState state = BenchState::NORMAL;
  ActuationCommand actuation;

  bool operator==(const TraceEntry&) const = default;
};

// `{"tick":..,"input":..,"state":..,"color":[r,g,b],"tone":..}`, no newline.
std::string actuation_record_json(const TraceEntry& e);
TraceEntry parse_actuation_record(const std::string& line);
std::string trace_to_jsonl(std::span<const TraceEntry> trace);

std::vector<TraceEntry> run_simulation(const TickScript& script, const FsmConfig& cfg = {});

std::vector<BenchState> states_of(std::span<const TraceEntry> trace);

// ---------------------------------------------------------------------------
// Session accuracy evaluation
// ---------------------------------------------------------------------------

inline constexpr int kClips = 3;
inline constexpr int kIntervalsPerClip = 16;

struct TraceRecord {
  int clip_id = 1;         // 1..3
  int interval_index = 0;  // 0..15
  ArousalClass self_report = ArousalClass::NORMAL;
  ArousalClass predicted = ArousalClass::NORMAL;
};

// CSV `clip,interval,self_report,predicted`.
std::vector<TraceRecord> read_table3_csv(std::istream& in, const std::string& source = "<table3>");
std::vector<TraceRecord> read_table3_file(const std::string& path);

struct ClipAccuracy {
  int clip_id = 0;
  int matches = 0;
  int total = 0;
  double accuracy_pct = 0.0;
  double stated_pct = 0.0;
  bool discrepant = false;  // |computed - stated| above reporting precision
};

struct AccuracyReport {
  std::vector<ClipAccuracy> clips;
  double average_pct = 0.0;
  double stated_average_pct = 0.0;
  bool average_discrepant = false;

  bool any_discrepancy() const;
  std::string render_text() const;
  std::string to_json() const;
};

// Accuracies as printed alongside the original table.
inline constexpr double kStatedClipAccuracyPct[kClips] = {66.67, 13.0, 43.75};
inline constexpr double kStatedAverageAccuracyPct = 41.0;

// Throws ParseError unless every clip has exactly 16 records with intervals
// 0..15.
AccuracyReport evaluate_table3(std::span<const TraceRecord> records);

// The predicted column of one clip as a tick script.
TickScript predicted_script(std::span<const TraceRecord> records, int clip_id);

// ---------------------------------------------------------------------------
// Live replay over loopback UDP
// ---------------------------------------------------------------------------

struct ReplayOptions {
  FsmConfig fsm;
  std::uint32_t tick_ms = 100;
  std::string address = "127.0.0.1";
  std::uint16_t port = 0;  // 0: ephemeral
};

// Plays `plan` through a sender and a benchtop receiver on separate threads
// that only share a UDP socket pair: every non-ABSENT slot is sent as one
// datagram mid-tick (X as a stray byte), ABSENT slots send nothing. Returns
// the benchtop's trace, one entry per slot.
std::vector<TraceEntry> replay_end_to_end(const TickScript& plan, const ReplayOptions& opts = {});

// Plan helpers for fault injection.
TickScript with_dropped(TickScript plan, std::size_t slot);
TickScript with_outage(TickScript plan, std::size_t at, std::size_t ticks);

}  // namespace biofsm
