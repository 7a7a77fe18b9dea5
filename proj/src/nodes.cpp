#include "biofsm/nodes.hpp"

#include <cmath>
#include <cstdio>
#include <thread>

#include <json.hpp>

namespace biofsm {

std::optional<ClassByte> WindowResult::byte() const {
  if (!decision) return std::nullopt;
  return encode(decision->arousal);
}

std::vector<WindowResult> run_wearable_pipeline(std::span<const PhysioSample> samples,
                                                const FeatureConfig& features,
                                                const LadderConfig& ladder,
                                                std::optional<double> duration_ms) {
  FeatureExtractor fx(features);
  WindowAccumulator acc(ladder);
  std::vector<WindowResult> out;
  auto collect = [&](std::vector<WindowAccumulator::Closed> closed) {
    for (auto& c : closed) out.push_back({c.window_index, std::move(c.decision)});
  };

  double last_ts = 0.0;
  for (const auto& s : samples) {
    last_ts = std::max(last_ts, s.timestamp_ms);
    if (auto f = fx.push(s)) collect(acc.push(*f));
  }
  if (samples.empty() && !duration_ms) return out;

  const double span = duration_ms ? *duration_ms : last_ts + 1.0;
  const auto windows = static_cast<std::int64_t>(std::ceil(span / ladder.window_ms));
  // a frame can land past the nominal end by a fraction of a beat
  collect(acc.flush(std::max(windows, acc.current_window() + 1)));
  return out;
}

std::string wearable_record_json(const WindowResult& w, bool sent) {
  nlohmann::ordered_json j;
  j["window"] = w.window_index;
  if (w.decision) {
    j["bpm_mean"] = w.decision->bpm_mean;
    j["gsr_mean"] = w.decision->gsr_mean;
    j["class"] = to_string(w.decision->arousal);
  } else {
    j["bpm_mean"] = nullptr;
    j["gsr_mean"] = nullptr;
    j["class"] = nullptr;
  }
  if (auto b = w.byte(); b && sent) {
    j["byte_sent"] = std::string(1, static_cast<char>(b->byte));
  } else {
    j["byte_sent"] = nullptr;
  }
  return j.dump();
}

std::optional<std::vector<std::uint8_t>> payload_for(InputSymbol s) {
  switch (s) {
    case InputSymbol::VALID_A: return std::vector<std::uint8_t>{'A'};
    case InputSymbol::VALID_B: return std::vector<std::uint8_t>{'B'};
    case InputSymbol::VALID_C: return std::vector<std::uint8_t>{'C'};
    case InputSymbol::UNRECOGNIZED: return std::vector<std::uint8_t>{'X'};
    case InputSymbol::ABSENT: return std::nullopt;
  }
  return std::nullopt;
}

void paced_send(UdpEndpoint& ep, std::span<const std::optional<std::vector<std::uint8_t>>> slots,
                const PacingOptions& pacing, const std::function<void(std::size_t, bool)>& on_slot) {
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (pacing.stop && pacing.stop->load()) break;
    const auto at = pacing.start + pacing.slot * i + pacing.slot / 2;
    std::this_thread::sleep_until(at);
    bool sent = false;
    if (slots[i]) {
      sent = ep.send_bytes(*slots[i]);
      if (!sent) std::fprintf(stderr, "wearable: send failed for slot %zu, dropped\n", i);
    }
    if (on_slot) on_slot(i, sent);
  }
}

std::vector<TraceEntry> run_benchtop_loop(UdpEndpoint& ep, const BenchtopLoopOptions& opts,
                                          const std::function<void(const TraceEntry&)>& on_tick) {
  BenchtopFsm fsm(opts.fsm);
  std::vector<TraceEntry> trace;
  for (std::uint64_t tick = 0; !opts.max_ticks || tick < *opts.max_ticks; ++tick) {
    if (opts.stop && opts.stop->load()) break;
    const auto deadline = opts.start + opts.tick * (tick + 1);
    const auto before = ep.datagrams_received();
    const auto received = ep.poll_receive(deadline);
    const auto arrived = ep.datagrams_received() - before;
    if (arrived > 1) {
      std::fprintf(stderr, "benchtop: tick %llu superseded %llu datagram(s)\n",
                   static_cast<unsigned long long>(tick), static_cast<unsigned long long>(arrived - 1));
    }
    const InputSymbol in = received.value_or(InputSymbol::ABSENT);
    const auto cmd = fsm.tick(in);
    trace.push_back({tick, in, fsm.state(), cmd});
    if (on_tick) on_tick(trace.back());
  }
  return trace;
}

std::string render_actuation_line(const TraceEntry& e) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "tick %-4llu %-12s -> %-8s rgb(%u,%u,%u) x%zu  %s",
                static_cast<unsigned long long>(e.tick), std::string(to_string(e.input)).c_str(),
                std::string(to_string(e.state)).c_str(), e.actuation.color.r, e.actuation.color.g,
                e.actuation.color.b, kRingPixels, std::string(to_string(e.actuation.tone)).c_str());
  return buf;
}

}  // namespace biofsm
