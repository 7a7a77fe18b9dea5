#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "biofsm/signal_core.hpp"

namespace biofsm {

enum class ArousalClass : std::uint8_t { NORMAL = 0, MILD = 1, HIGH = 2 };

inline constexpr std::array<ArousalClass, 3> kAllClasses{ArousalClass::NORMAL, ArousalClass::MILD,
                                                          ArousalClass::HIGH};

std::string_view to_string(ArousalClass c);
std::optional<ArousalClass> arousal_from_string(std::string_view s);

using ScoreVector = std::array<double, 3>;  // indexed by ArousalClass

// Three contiguous bands over one modality's valid range:
//   [edges[0], edges[1]) -> NORMAL, [edges[1], edges[2]) -> MILD,
//   [edges[2], edges[3]] -> HIGH.
// `scores` is the vote magnitude each band casts for its class.
struct BandLadder {
  std::array<double, 4> edges{};
  std::array<double, 3> scores{1.0, 1.0, 1.0};

  // nullopt outside [edges[0], edges[3]]
  std::optional<ArousalClass> band_of(double v) const;
  bool operator==(const BandLadder&) const = default;
};

struct LadderConfig {
  BandLadder hr{{60.0, 85.0, 105.0, 120.0}};
  BandLadder gsr{{0.0, 15.0, 20.0, 25.0}};
  double hr_weight = 0.4;
  double gsr_weight = 0.6;
  double window_ms = 15000.0;

  bool operator==(const LadderConfig&) const = default;

  // Throws ConfigError on non-increasing edges, negative weights or scores,
  // weights not summing to 1, or a non-positive window.
  void validate() const;
};

// True when both features land inside the configured ladders (the default
// ladders coincide with FeatureFrame::in_range()).
bool in_ladder_range(const FeatureFrame& frame, const LadderConfig& cfg);

// hr_weight * onehot(hr band) + gsr_weight * onehot(gsr band), each one-hot
// scaled by its band's score. Throws std::out_of_range for a frame outside
// the ladders; callers filter first.
ScoreVector score_frame(const FeatureFrame& frame, const LadderConfig& cfg);

// Argmax with ties resolved toward the lower-arousal class.
ArousalClass decide(const ScoreVector& scores);

struct WindowDecision {
  std::int64_t window_index = 0;
  ArousalClass arousal = ArousalClass::NORMAL;
  ScoreVector score_vector{};
  std::size_t frames_used = 0;
  double bpm_mean = 0.0;
  double gsr_mean = 0.0;
};

// Sums score_frame over the in-range frames. Absent when none survive.
std::optional<WindowDecision> classify_window(std::span<const FeatureFrame> frames,
                                              const LadderConfig& cfg,
                                              std::int64_t window_index = 0);

// Fixed back-to-back windows of cfg.window_ms from t = 0. Frames must arrive
// in timestamp order. Each closed window yields one result, absent when the
// window had no usable frames.
class WindowAccumulator {
 public:
  struct Closed {
    std::int64_t window_index;
    std::optional<WindowDecision> decision;
  };

  explicit WindowAccumulator(LadderConfig cfg);

  // Returns the windows closed by this frame's arrival (possibly several
  // when the stream skipped whole windows).
  std::vector<Closed> push(const FeatureFrame& frame);

  // Without an argument, closes the window in progress. With one, closes
  // every window before `until_window` (none if it is not ahead).
  std::vector<Closed> flush(std::optional<std::int64_t> until_window = std::nullopt);

  const LadderConfig& config() const noexcept { return cfg_; }
  std::int64_t current_window() const noexcept { return current_; }

 private:
  LadderConfig cfg_;
  std::int64_t current_ = 0;
  std::vector<FeatureFrame> pending_;
};

}  // namespace biofsm
