#pragma once

// Wearable-side signal chain: PPG beat detection (baseline removal + threshold
// crossing), beat-to-BPM conversion, and beat-synchronized GSR smoothing.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace biofsm {

enum class Channel { PPG, GSR };

std::string_view to_string(Channel c);
std::optional<Channel> channel_from_string(std::string_view s);

struct PhysioSample {
  double timestamp_ms = 0.0;  // since session start
  Channel channel = Channel::PPG;
  double value = 0.0;  // ADC-like amplitude for PPG, microsiemens for GSR

  bool operator==(const PhysioSample&) const = default;
};

struct BeatEvent {
  std::uint64_t beat_index = 0;
  double timestamp_ms = 0.0;
  std::optional<double> inter_beat_interval_ms;  // absent for beat 0
};

struct HeartRateEstimate {
  double bpm = 0.0;
  std::uint64_t at_beat = 0;
};

// ---------------------------------------------------------------------------
// PBA beat detector
// ---------------------------------------------------------------------------

struct PbaConfig {
  double dc_alpha = 0.95;            // single-pole tracker: dc += (1 - alpha) * (x - dc)
  double threshold_fraction = 0.5;   // of the running AC peak envelope
  double envelope_decay = 0.995;     // per-sample multiplicative decay of the envelope
  double min_threshold = 1.0;        // floor, keeps the threshold strictly positive
  double refractory_ms = 300.0;
  std::size_t ac_smoothing_taps = 5;  // short moving average on the AC component; 1 disables

  bool operator==(const PbaConfig&) const = default;

  void validate() const;
};

struct PbaFilterState {
  double dc_estimate = 0.0;
  double ac_value = 0.0;
  double threshold = 0.0;
  std::optional<double> last_crossing_ms;

  // bookkeeping beyond the public fields
  double envelope = 0.0;
  bool armed = false;  // AC has been below the threshold since the last crossing
  std::optional<double> last_timestamp_ms;
  std::uint64_t next_beat_index = 0;
  std::deque<double> ac_history;  // raw baseline-removed values feeding the smoother
};

class PbaDetector {
 public:
  explicit PbaDetector(PbaConfig cfg = {});

  // Feeds one PPG sample. Throws OrderingError on a non-increasing timestamp
  // and std::invalid_argument on a non-PPG sample.
  std::optional<BeatEvent> step(const PhysioSample& sample);

  const PbaFilterState& state() const noexcept { return state_; }
  const PbaConfig& config() const noexcept { return cfg_; }

 private:
  PbaConfig cfg_;
  PbaFilterState state_;
};

// Single-interval BPM: absent for beat 0, otherwise 60000 / IBI.
// Throws std::domain_error on a non-positive interval.
std::optional<HeartRateEstimate> bpm_from_beat(const BeatEvent& event);

// Mean over the last k intervals (k = 1 reproduces bpm_from_beat).
class BpmEstimator {
 public:
  explicit BpmEstimator(std::size_t intervals = 1);

  std::optional<HeartRateEstimate> push(const BeatEvent& event);

 private:
  std::size_t k_;
  std::deque<double> intervals_;
};

// ---------------------------------------------------------------------------
// GSR smoothing
// ---------------------------------------------------------------------------

inline constexpr std::size_t kGsrWindowLength = 8;

struct GsrWindow {
  std::vector<double> samples;  // oldest first
  std::uint64_t anchored_beat = 0;

  bool warm() const noexcept { return samples.size() == kGsrWindowLength; }
};

// Convolution of the window with `kernel`, aligned to the newest sample.
// An empty kernel means uniform weights (moving average). During warm-up the
// kernel's newest taps are used and renormalized.
// Throws std::invalid_argument on an empty window.
double gsr_smooth(const GsrWindow& window, std::span<const double> kernel = {});

// Rolling buffer of the most recent GSR samples, snapshotted on each beat.
class GsrSmoother {
 public:
  explicit GsrSmoother(std::vector<double> kernel = {});

  void push(double gsr_us);
  GsrWindow window_at(std::uint64_t beat_index) const;
  double smooth(const GsrWindow& w) const { return gsr_smooth(w, kernel_); }
  bool warm() const noexcept { return buffer_.size() == kGsrWindowLength; }

 private:
  std::vector<double> kernel_;
  std::deque<double> buffer_;
};

// ---------------------------------------------------------------------------
// Feature assembly
// ---------------------------------------------------------------------------

struct FeatureFrame {
  std::uint64_t beat_index = 0;
  double timestamp_ms = 0.0;
  double bpm = 0.0;
  double gsr_us = 0.0;

  // 60 <= bpm <= 120 and 0 <= gsr_us <= 25
  bool in_range() const noexcept;
};

struct FeatureConfig {
  PbaConfig pba;
  std::size_t bpm_intervals = 1;
  std::vector<double> gsr_kernel;  // empty = uniform

  bool operator==(const FeatureConfig&) const = default;
};

// Merges an ordered PPG + GSR stream into beat-synchronized FeatureFrames.
// No frame is produced before beat 1 or before the GSR window holds 8 samples.
class FeatureExtractor {
 public:
  explicit FeatureExtractor(FeatureConfig cfg = {});

  std::optional<FeatureFrame> push(const PhysioSample& sample);

  // Every beat seen so far, including warm-up beats that produced no frame.
  const std::vector<BeatEvent>& beats() const noexcept { return beats_; }

 private:
  PbaDetector detector_;
  BpmEstimator bpm_;
  GsrSmoother gsr_;
  std::optional<double> last_gsr_ms_;
  std::vector<BeatEvent> beats_;
};

std::vector<FeatureFrame> extract_features(std::span<const PhysioSample> samples,
                                           const FeatureConfig& cfg = {});

// ---------------------------------------------------------------------------
// Synthetic physiology
// ---------------------------------------------------------------------------

// Piecewise-linear trajectory through (time_ms, value) knots; constant
// beyond the ends.
struct Trajectory {
  std::vector<std::pair<double, double>> knots;

  static Trajectory constant(double v) { return Trajectory{{{0.0, v}}}; }
  double at(double t_ms) const;
  bool operator==(const Trajectory&) const = default;
};

struct SignalProfile {
  Trajectory bpm = Trajectory::constant(60.0);
  Trajectory gsr_us = Trajectory::constant(5.0);
  double ppg_rate_hz = 50.0;
  double gsr_rate_hz = 10.0;
  double ppg_offset = 50000.0;       // DC level of the PPG channel
  double ppg_amplitude = 100.0;      // AC amplitude
  double noise = 0.0;                // uniform PPG noise, fraction of ppg_amplitude
  double gsr_noise_us = 0.0;         // uniform GSR noise, absolute
  double dc_drift_amplitude = 0.0;   // slow sinusoidal baseline wander
  double dc_drift_hz = 0.2;

  bool operator==(const SignalProfile&) const = default;

  void validate() const;
};

// Deterministic for a given (profile, duration, seed). Samples are ordered by
// timestamp; on equal timestamps GSR precedes PPG.
std::vector<PhysioSample> synth_physio(const SignalProfile& profile, double duration_ms,
                                       std::uint64_t seed);

// ---------------------------------------------------------------------------
// Trace CSV: header `timestamp_ms,channel,value`
// ---------------------------------------------------------------------------

std::vector<PhysioSample> read_trace_csv(std::istream& in, const std::string& source = "<trace>");
std::vector<PhysioSample> read_trace_csv_file(const std::string& path);
void write_trace_csv(std::ostream& out, std::span<const PhysioSample> samples);

}  // namespace biofsm
