#pragma once

// Benchtop node: a flat five-state machine driven by one InputSymbol per tick.
//
//   VALID_A/B/C   -> NORMAL/MILD/HIGH from any state (BROWNOUT included)
//   UNRECOGNIZED  -> INVALID, except BROWNOUT stays BROWNOUT
//   ABSENT        -> silence += 1; BROWNOUT once silence reaches brownout_ticks
//
// Any non-ABSENT input zeroes the silence counter.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "biofsm/wire_protocol.hpp"

namespace biofsm {

enum class BenchState : std::uint8_t { NORMAL, MILD, HIGH, INVALID, BROWNOUT };

inline constexpr std::array<BenchState, 5> kAllStates{BenchState::NORMAL, BenchState::MILD, BenchState::HIGH,
                                                      BenchState::INVALID, BenchState::BROWNOUT};

std::string_view to_string(BenchState s);
std::optional<BenchState> bench_state_from_string(std::string_view s);

enum class Tone : std::uint8_t { TONE1, TONE2, TONE3, SILENT };

std::string_view to_string(Tone t);

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

inline constexpr std::size_t kRingPixels = 16;

// Applied to every pixel of the ring.
struct ActuationCommand {
  Rgb color;
  Tone tone = Tone::SILENT;
  bool operator==(const ActuationCommand&) const = default;
};

ActuationCommand actuation_for(BenchState s);

struct FsmConfig {
  std::uint32_t brownout_ticks = 10;
  BenchState initial_state = BenchState::NORMAL;

  bool operator==(const FsmConfig&) const = default;

  void validate() const;
};

struct FsmRuntime {
  BenchState state = BenchState::NORMAL;
  std::uint32_t silence_ticks = 0;
  bool operator==(const FsmRuntime&) const = default;
};

// Pure transition function. Total over every state, counter value and symbol.
FsmRuntime next_runtime(const FsmRuntime& rt, InputSymbol input, std::uint32_t brownout_ticks);

class BenchtopFsm {
 public:
  explicit BenchtopFsm(FsmConfig cfg = {});

  ActuationCommand tick(InputSymbol input);

  const FsmRuntime& runtime() const noexcept { return rt_; }
  BenchState state() const noexcept { return rt_.state; }
  const FsmConfig& config() const noexcept { return cfg_; }

 private:
  FsmConfig cfg_;
  FsmRuntime rt_;
};

// ---------------------------------------------------------------------------
// Exhaustive transition-table check
// ---------------------------------------------------------------------------

struct TransitionCell {
  BenchState from;
  std::uint32_t silence_ticks;
  InputSymbol input;
  std::vector<FsmRuntime> successors;  // distinct outcomes observed
};

struct DeterminismReport {
  std::uint32_t brownout_ticks = 0;
  std::vector<TransitionCell> cells;  // every (state, silence, symbol)
  std::size_t symbol_level_cells = 0;  // distinct (state, symbol) pairs
  std::vector<std::string> violations;

  bool deterministic() const noexcept { return violations.empty(); }
  // One row per (state, symbol). ABSENT rows show the successor at each
  // counter value as "STATE@n".
  std::string render_table() const;
};

// Evaluates every cell `repeats` times from a freshly built runtime and
// records the distinct successors; also checks the counter invariants.
DeterminismReport verify_determinism(const FsmConfig& cfg = {}, int repeats = 2);

}  // namespace biofsm
