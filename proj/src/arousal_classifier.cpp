#include "biofsm/arousal_classifier.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "biofsm/errors.hpp"

namespace biofsm {

std::string_view to_string(ArousalClass c) {
  switch (c) {
    case ArousalClass::NORMAL: return "NORMAL";
    case ArousalClass::MILD: return "MILD";
    case ArousalClass::HIGH: return "HIGH";
  }
  return "?";
}

std::optional<ArousalClass> arousal_from_string(std::string_view s) {
  if (s == "NORMAL") return ArousalClass::NORMAL;
  // "Medium" is an alias some sources use for the middle class
  if (s == "MILD" || s == "MEDIUM") return ArousalClass::MILD;
  if (s == "HIGH") return ArousalClass::HIGH;
  return std::nullopt;
}

std::optional<ArousalClass> BandLadder::band_of(double v) const {
  if (!(v >= edges[0] && v <= edges[3])) return std::nullopt;
  if (v < edges[1]) return ArousalClass::NORMAL;
  if (v < edges[2]) return ArousalClass::MILD;
  return ArousalClass::HIGH;
}

static void validate_ladder(const BandLadder& b, const std::string& name) {
  for (std::size_t i = 1; i < b.edges.size(); ++i) {
    if (!(b.edges[i] > b.edges[i - 1])) throw ConfigError(name + " band edges must strictly increase");
  }
  for (double s : b.scores) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError(name + " band scores must be finite and non-negative");
  }
}

void LadderConfig::validate() const {
  validate_ladder(hr, "hr");
  validate_ladder(gsr, "gsr");
  if (!(hr_weight >= 0.0) || !(gsr_weight >= 0.0)) throw ConfigError("ladder weights must be non-negative");
  if (std::abs(hr_weight + gsr_weight - 1.0) > 1e-9) throw ConfigError("hr_weight + gsr_weight must equal 1");
  if (!(window_ms > 0.0)) throw ConfigError("window_ms must be positive");
}

bool in_ladder_range(const FeatureFrame& frame, const LadderConfig& cfg) {
  return cfg.hr.band_of(frame.bpm).has_value() && cfg.gsr.band_of(frame.gsr_us).has_value() &&
         std::isfinite(frame.bpm) && std::isfinite(frame.gsr_us);
}

ScoreVector score_frame(const FeatureFrame& frame, const LadderConfig& cfg) {
  const auto hb = cfg.hr.band_of(frame.bpm);
  const auto gb = cfg.gsr.band_of(frame.gsr_us);
  if (!hb || !gb) {
    throw std::out_of_range("frame at beat " + std::to_string(frame.beat_index) +
                            " is outside the valid feature range");
  }
  ScoreVector s{};
  const auto hi = static_cast<std::size_t>(*hb);
  const auto gi = static_cast<std::size_t>(*gb);
  s[hi] += cfg.hr_weight * cfg.hr.scores[hi];
  s[gi] += cfg.gsr_weight * cfg.gsr.scores[gi];
  return s;
}

ArousalClass decide(const ScoreVector& scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;  // strict: ties keep the lower class
  }
  return static_cast<ArousalClass>(best);
}

std::optional<WindowDecision> classify_window(std::span<const FeatureFrame> frames,
                                              const LadderConfig& cfg,
                                              std::int64_t window_index) {
  WindowDecision d;
  d.window_index = window_index;
  double bpm_sum = 0.0;
  double gsr_sum = 0.0;
  for (const auto& f : frames) {
    if (!in_ladder_range(f, cfg)) continue;
    const auto s = score_frame(f, cfg);
    for (std::size_t i = 0; i < s.size(); ++i) d.score_vector[i] += s[i];
    bpm_sum += f.bpm;
    gsr_sum += f.gsr_us;
    ++d.frames_used;
  }
  if (d.frames_used == 0) return std::nullopt;
  d.arousal = decide(d.score_vector);
  d.bpm_mean = bpm_sum / static_cast<double>(d.frames_used);
  d.gsr_mean = gsr_sum / static_cast<double>(d.frames_used);
  return d;
}

// ---------------------------------------------------------------------------

WindowAccumulator::WindowAccumulator(LadderConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
}

std::vector<WindowAccumulator::Closed> WindowAccumulator::push(const FeatureFrame& frame) {
  const auto idx = static_cast<std::int64_t>(std::floor(frame.timestamp_ms / cfg_.window_ms));
  if (idx < current_) {
    throw OrderingError("feature frame at " + std::to_string(frame.timestamp_ms) +
                        " ms belongs to an already closed window");
  }
  std::vector<Closed> closed;
  if (idx > current_) closed = flush(idx);
  pending_.push_back(frame);
  return closed;
}

std::vector<WindowAccumulator::Closed> WindowAccumulator::flush(std::optional<std::int64_t> until_window) {
  std::vector<Closed> closed;
  const std::int64_t stop = until_window ? *until_window : current_ + 1;
  while (current_ < stop) {
    closed.push_back({current_, classify_window(pending_, cfg_, current_)});
    pending_.clear();
    ++current_;
  }
  return closed;
}

}  // namespace biofsm
