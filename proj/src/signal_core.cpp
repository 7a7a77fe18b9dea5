#include "biofsm/signal_core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>

#include "biofsm/errors.hpp"

namespace biofsm {

std::string_view to_string(Channel c) {
  return c == Channel::PPG ? "PPG" : "GSR";
}

std::optional<Channel> channel_from_string(std::string_view s) {
  if (s == "PPG") return Channel::PPG;
  if (s == "GSR") return Channel::GSR;
  return std::nullopt;
}

// ---------------------------------------------------------------------------

void PbaConfig::validate() const {
  if (!(dc_alpha > 0.0 && dc_alpha < 1.0)) throw ConfigError("pba.dc_alpha must lie in (0, 1)");
  if (!(threshold_fraction > 0.0 && threshold_fraction < 1.0))
    throw ConfigError("pba.threshold_fraction must lie in (0, 1)");
  if (!(envelope_decay > 0.0 && envelope_decay <= 1.0))
    throw ConfigError("pba.envelope_decay must lie in (0, 1]");
  if (!(min_threshold > 0.0)) throw ConfigError("pba.min_threshold must be positive");
  if (!(refractory_ms >= 0.0)) throw ConfigError("pba.refractory_ms must be non-negative");
  if (ac_smoothing_taps == 0) throw ConfigError("pba.ac_smoothing_taps must be at least 1");
}

PbaDetector::PbaDetector(PbaConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  state_.threshold = cfg_.min_threshold;
}

std::optional<BeatEvent> PbaDetector::step(const PhysioSample& sample) {
  if (sample.channel != Channel::PPG) throw std::invalid_argument("PbaDetector fed a non-PPG sample");
  if (state_.last_timestamp_ms && !(sample.timestamp_ms > *state_.last_timestamp_ms)) {
    throw OrderingError("PPG timestamp " + std::to_string(sample.timestamp_ms) +
                        " does not follow " + std::to_string(*state_.last_timestamp_ms));
  }

  const bool first = !state_.last_timestamp_ms.has_value();
  if (first) {
    state_.dc_estimate = sample.value;
  } else {
    state_.dc_estimate = cfg_.dc_alpha * state_.dc_estimate + (1.0 - cfg_.dc_alpha) * sample.value;
  }

  state_.ac_history.push_back(sample.value - state_.dc_estimate);
  if (state_.ac_history.size() > cfg_.ac_smoothing_taps) state_.ac_history.pop_front();
  double sum = 0.0;
  for (double v : state_.ac_history) sum += v;
  const double ac = sum / static_cast<double>(state_.ac_history.size());

  const double prev_ac = state_.ac_value;
  const double threshold = std::max(cfg_.threshold_fraction * state_.envelope, cfg_.min_threshold);

  std::optional<BeatEvent> beat;
  if (ac < threshold) {
    state_.armed = true;
  } else if (state_.armed && !first) {
    state_.armed = false;
    // interpolate the crossing between the two samples
    const double t0 = *state_.last_timestamp_ms;
    const double frac = std::clamp((threshold - prev_ac) / (ac - prev_ac), 0.0, 1.0);
    const double t_cross = t0 + frac * (sample.timestamp_ms - t0);
    if (!state_.last_crossing_ms || t_cross - *state_.last_crossing_ms >= cfg_.refractory_ms) {
      BeatEvent ev;
      ev.beat_index = state_.next_beat_index++;
      ev.timestamp_ms = t_cross;
      if (state_.last_crossing_ms) ev.inter_beat_interval_ms = t_cross - *state_.last_crossing_ms;
      state_.last_crossing_ms = t_cross;
      beat = ev;
    }
  }

  state_.envelope = std::max(ac, state_.envelope * cfg_.envelope_decay);
  state_.ac_value = ac;
  state_.threshold = threshold;
  state_.last_timestamp_ms = sample.timestamp_ms;
  return beat;
}

// ---------------------------------------------------------------------------

std::optional<HeartRateEstimate> bpm_from_beat(const BeatEvent& event) {
  if (!event.inter_beat_interval_ms) return std::nullopt;
  const double ibi = *event.inter_beat_interval_ms;
  if (!(ibi > 0.0)) throw std::domain_error("inter-beat interval must be positive");
  return HeartRateEstimate{60000.0 / ibi, event.beat_index};
}

BpmEstimator::BpmEstimator(std::size_t intervals) : k_(intervals) {
  if (k_ == 0) throw ConfigError("bpm interval count must be at least 1");
}

std::optional<HeartRateEstimate> BpmEstimator::push(const BeatEvent& event) {
  if (!event.inter_beat_interval_ms) return std::nullopt;
  const double ibi = *event.inter_beat_interval_ms;
  if (!(ibi > 0.0)) throw std::domain_error("inter-beat interval must be positive");
  intervals_.push_back(ibi);
  if (intervals_.size() > k_) intervals_.pop_front();
  double sum = 0.0;
  for (double v : intervals_) sum += v;
  return HeartRateEstimate{60000.0 * static_cast<double>(intervals_.size()) / sum, event.beat_index};
}

// ---------------------------------------------------------------------------

double gsr_smooth(const GsrWindow& window, std::span<const double> kernel) {
  const auto& xs = window.samples;
  if (xs.empty()) throw std::invalid_argument("gsr_smooth: empty window");
  // Averaged as deviations from the newest sample, so a constant window
  // returns its value bit-exactly.
  const double ref = xs.back();
  if (kernel.empty()) {
    double dev = 0.0;
    for (double v : xs) dev += v - ref;
    return ref + dev / static_cast<double>(xs.size());
  }
  const std::size_t n = std::min(xs.size(), kernel.size());
  double dev = 0.0;
  double norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = kernel[kernel.size() - n + i];
    dev += w * (xs[xs.size() - n + i] - ref);
    norm += w;
  }
  if (norm == 0.0) throw std::invalid_argument("gsr_smooth: kernel taps sum to zero");
  return ref + dev / norm;
}

GsrSmoother::GsrSmoother(std::vector<double> kernel) : kernel_(std::move(kernel)) {
  if (kernel_.size() > kGsrWindowLength) throw ConfigError("GSR kernel longer than the 8-sample window");
}

void GsrSmoother::push(double gsr_us) {
  buffer_.push_back(gsr_us);
  if (buffer_.size() > kGsrWindowLength) buffer_.pop_front();
}

GsrWindow GsrSmoother::window_at(std::uint64_t beat_index) const {
  return GsrWindow{{buffer_.begin(), buffer_.end()}, beat_index};
}

// ---------------------------------------------------------------------------

bool FeatureFrame::in_range() const noexcept {
  return bpm >= 60.0 && bpm <= 120.0 && gsr_us >= 0.0 && gsr_us <= 25.0;
}

FeatureExtractor::FeatureExtractor(FeatureConfig cfg)
    : detector_(cfg.pba), bpm_(cfg.bpm_intervals), gsr_(std::move(cfg.gsr_kernel)) {}

std::optional<FeatureFrame> FeatureExtractor::push(const PhysioSample& sample) {
  if (sample.channel == Channel::GSR) {
    if (last_gsr_ms_ && !(sample.timestamp_ms > *last_gsr_ms_)) {
      throw OrderingError("GSR timestamp " + std::to_string(sample.timestamp_ms) +
                          " does not follow " + std::to_string(*last_gsr_ms_));
    }
    if (!std::isfinite(sample.value)) throw std::invalid_argument("non-finite GSR value");
    last_gsr_ms_ = sample.timestamp_ms;
    gsr_.push(sample.value);
    return std::nullopt;
  }

  auto beat = detector_.step(sample);
  if (!beat) return std::nullopt;
  beats_.push_back(*beat);
  auto hr = bpm_.push(*beat);
  if (!hr || !gsr_.warm()) return std::nullopt;

  const GsrWindow window = gsr_.window_at(beat->beat_index);
  return FeatureFrame{beat->beat_index, beat->timestamp_ms, hr->bpm, gsr_.smooth(window)};
}

std::vector<FeatureFrame> extract_features(std::span<const PhysioSample> samples,
                                           const FeatureConfig& cfg) {
  FeatureExtractor fx(cfg);
  std::vector<FeatureFrame> frames;
  for (const auto& s : samples) {
    if (auto f = fx.push(s)) frames.push_back(*f);
  }
  return frames;
}

// ---------------------------------------------------------------------------

double Trajectory::at(double t_ms) const {
  if (knots.empty()) throw std::logic_error("empty trajectory");
  if (t_ms <= knots.front().first) return knots.front().second;
  if (t_ms >= knots.back().first) return knots.back().second;
  auto hi = std::upper_bound(knots.begin(), knots.end(), t_ms,
                             [](double t, const auto& k) { return t < k.first; });
  auto lo = std::prev(hi);
  const double span = hi->first - lo->first;
  const double u = (t_ms - lo->first) / span;
  return lo->second + u * (hi->second - lo->second);
}

static void validate_trajectory(const Trajectory& tr, const char* name) {
  if (tr.knots.empty()) throw ConfigError(std::string(name) + " trajectory has no knots");
  for (std::size_t i = 1; i < tr.knots.size(); ++i) {
    if (!(tr.knots[i].first > tr.knots[i - 1].first))
      throw ConfigError(std::string(name) + " trajectory knots must have increasing times");
  }
}

void SignalProfile::validate() const {
  validate_trajectory(bpm, "bpm");
  validate_trajectory(gsr_us, "gsr");
  for (const auto& [t, v] : bpm.knots) {
    if (!(v > 0.0)) throw ConfigError("bpm trajectory must stay positive");
  }
  if (!(ppg_rate_hz > 0.0) || !(gsr_rate_hz > 0.0)) throw ConfigError("sample rates must be positive");
  if (!(ppg_amplitude >= 0.0) || !(noise >= 0.0) || !(gsr_noise_us >= 0.0))
    throw ConfigError("amplitudes and noise levels must be non-negative");
}

namespace {

// Portable uniform in [-1, 1): std::uniform_real_distribution is not
// specified bit-for-bit across standard libraries.
double symmetric_unit(std::mt19937_64& rng) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return 2.0 * u - 1.0;
}

}  // namespace

std::vector<PhysioSample> synth_physio(const SignalProfile& profile, double duration_ms,
                                       std::uint64_t seed) {
  if (!(duration_ms > 0.0)) throw ConfigError("synth duration must be positive");
  profile.validate();

  std::mt19937_64 rng(seed);
  const double ppg_dt = 1000.0 / profile.ppg_rate_hz;
  const double gsr_dt = 1000.0 / profile.gsr_rate_hz;
  const double two_pi = 2.0 * std::numbers::pi;

  std::vector<PhysioSample> out;
  out.reserve(static_cast<std::size_t>(duration_ms / ppg_dt + duration_ms / gsr_dt) + 2);

  std::uint64_t ppg_n = 0;
  std::uint64_t gsr_n = 0;
  double phase = 0.0;
  double phase_t = 0.0;

  for (;;) {
    const double t_ppg = static_cast<double>(ppg_n) * ppg_dt;
    const double t_gsr = static_cast<double>(gsr_n) * gsr_dt;
    const bool ppg_left = t_ppg < duration_ms;
    const bool gsr_left = t_gsr < duration_ms;
    if (!ppg_left && !gsr_left) break;

    if (gsr_left && (!ppg_left || t_gsr <= t_ppg)) {
      double v = profile.gsr_us.at(t_gsr);
      if (profile.gsr_noise_us > 0.0) v += profile.gsr_noise_us * symmetric_unit(rng);
      out.push_back({t_gsr, Channel::GSR, v});
      ++gsr_n;
      continue;
    }

    // integrate instantaneous heart rate into the pulse phase
    phase += two_pi * profile.bpm.at(phase_t) / 60.0 * (t_ppg - phase_t) / 1000.0;
    phase_t = t_ppg;
    double v = profile.ppg_offset + profile.ppg_amplitude * std::sin(phase);
    if (profile.dc_drift_amplitude != 0.0) {
      v += profile.dc_drift_amplitude * std::sin(two_pi * profile.dc_drift_hz * t_ppg / 1000.0);
    }
    if (profile.noise > 0.0) v += profile.noise * profile.ppg_amplitude * symmetric_unit(rng);
    out.push_back({t_ppg, Channel::PPG, v});
    ++ppg_n;
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::string_view kTraceHeader = "timestamp_ms,channel,value";

bool parse_double(std::string_view s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

std::vector<PhysioSample> read_trace_csv(std::istream& in, const std::string& source) {
  std::vector<PhysioSample> out;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  std::optional<double> last_ts[2];

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!header_seen) {
      if (line != kTraceHeader) throw ParseError(source, lineno, "expected header '" + std::string(kTraceHeader) + "'");
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;

    std::string_view sv(line);
    const auto c1 = sv.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : sv.find(',', c1 + 1);
    if (c2 == std::string_view::npos || sv.find(',', c2 + 1) != std::string_view::npos)
      throw ParseError(source, lineno, "expected 3 comma-separated fields");

    PhysioSample s;
    if (!parse_double(sv.substr(0, c1), s.timestamp_ms) || s.timestamp_ms < 0.0)
      throw ParseError(source, lineno, "bad timestamp_ms");
    auto ch = channel_from_string(sv.substr(c1 + 1, c2 - c1 - 1));
    if (!ch) throw ParseError(source, lineno, "channel must be PPG or GSR");
    s.channel = *ch;
    if (!parse_double(sv.substr(c2 + 1), s.value) || !std::isfinite(s.value))
      throw ParseError(source, lineno, "bad value");

    auto& last = last_ts[s.channel == Channel::PPG ? 0 : 1];
    if (last && !(s.timestamp_ms > *last))
      throw ParseError(source, lineno, "timestamps must strictly increase per channel");
    last = s.timestamp_ms;
    out.push_back(s);
  }
  if (!header_seen) throw ParseError(source, 0, "missing header");
  return out;
}

std::vector<PhysioSample> read_trace_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trace file '" + path + "'");
  return read_trace_csv(in, path);
}

void write_trace_csv(std::ostream& out, std::span<const PhysioSample> samples) {
  out << kTraceHeader << '\n';
  char buf[64];
  for (const auto& s : samples) {
    auto r1 = std::to_chars(buf, buf + sizeof buf, s.timestamp_ms);
    out.write(buf, r1.ptr - buf);
    out << ',' << to_string(s.channel) << ',';
    auto r2 = std::to_chars(buf, buf + sizeof buf, s.value);
    out.write(buf, r2.ptr - buf);
    out << '\n';
  }
}

}  // namespace biofsm
