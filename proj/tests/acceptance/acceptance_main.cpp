// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failures.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "biofsm/nodes.hpp"

using namespace biofsm;

namespace {

using Steady = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

double seconds_since(Steady::time_point t0) {
  return std::chrono::duration<double>(Steady::now() - t0).count();
}

// 1 -------------------------------------------------------------------------
Outcome fsm_determinism() {
  Outcome o;
  const auto t0 = Steady::now();
  const FsmConfig cfg;
  const auto report = verify_determinism(cfg, 3);
  const double secs = seconds_since(t0);

  const std::size_t counters = cfg.brownout_ticks + 1;
  o.require(report.cells.size() == kAllStates.size() * kAllSymbols.size() * counters, "cell count");
  o.require(report.symbol_level_cells == 25, "25 (state, symbol) cells");
  std::map<std::pair<int, int>, std::vector<std::uint32_t>> absent_counters;
  for (const auto& c : report.cells) {
    o.require(c.successors.size() == 1, "cell with " + std::to_string(c.successors.size()) + " successors");
    if (c.input == InputSymbol::ABSENT) absent_counters[{int(c.from), 0}].push_back(c.silence_ticks);
  }
  for (auto& [k, v] : absent_counters) {
    std::sort(v.begin(), v.end());
    o.require(v.size() == counters && v.front() == 0 && v.back() == cfg.brownout_ticks, "ABSENT counter coverage");
  }
  o.require(report.deterministic(), "violations reported");
  o.require(secs < 1.0, "runtime " + std::to_string(secs) + " s");
  o.detail = o.pass ? std::to_string(report.cells.size()) + " cells, one successor each, " +
                          std::to_string(secs * 1000.0).substr(0, 5) + " ms"
                    : o.detail;
  return o;
}

// 2 -------------------------------------------------------------------------
Outcome brownout_timing() {
  Outcome o;
  FsmConfig cfg;
  cfg.brownout_ticks = 10;  // tick = 1 s
  const std::pair<InputSymbol, BenchState> restores[] = {{InputSymbol::VALID_A, BenchState::NORMAL},
                                                         {InputSymbol::VALID_B, BenchState::MILD},
                                                         {InputSymbol::VALID_C, BenchState::HIGH}};
  for (InputSymbol lead : {InputSymbol::VALID_A, InputSymbol::VALID_B, InputSymbol::VALID_C, InputSymbol::UNRECOGNIZED}) {
    TickScript nine{lead};
    nine.insert(nine.end(), 9, InputSymbol::ABSENT);
    const auto t9 = run_simulation(nine, cfg);
    o.require(std::none_of(t9.begin(), t9.end(), [](auto& e) { return e.state == BenchState::BROWNOUT; }),
              "9 silent ticks reached BROWNOUT");

    TickScript ten{lead};
    ten.insert(ten.end(), 10, InputSymbol::ABSENT);
    for (auto [sym, want] : restores) {
      auto script = ten;
      script.push_back(sym);
      const auto t = run_simulation(script, cfg);
      o.require(t[9].state != BenchState::BROWNOUT, "BROWNOUT before the 10th silent tick");
      o.require(t[10].state == BenchState::BROWNOUT, "10 silent ticks did not reach BROWNOUT");
      o.require(t[11].state == want, "valid byte did not restore the mapped state in one tick");
    }
  }
  if (o.pass) o.detail = "9 silent ticks: no BROWNOUT; 10: BROWNOUT; A/B/C restore in one tick";
  return o;
}

// 3 -------------------------------------------------------------------------
Outcome actuation_map() {
  Outcome o;
  // expected colours as 8-bit RGB, tones by number
  struct Row {
    const char* state;
    std::array<int, 3> rgb;
    const char* tone;
  };
  const Row table1[] = {{"NORMAL", {0, 255, 0}, "TONE1"},
                        {"MILD", {255, 165, 0}, "TONE2"},
                        {"HIGH", {255, 0, 0}, "TONE3"},
                        {"INVALID", {255, 255, 255}, "SILENT"},
                        {"BROWNOUT", {255, 0, 255}, "SILENT"}};

  TickScript script{InputSymbol::VALID_A, InputSymbol::VALID_B, InputSymbol::VALID_C, InputSymbol::UNRECOGNIZED};
  script.insert(script.end(), 10, InputSymbol::ABSENT);
  const auto log = trace_to_jsonl(run_simulation(script));

  std::map<std::string, nlohmann::json> seen;
  std::istringstream in(log);
  for (std::string line; std::getline(in, line);) {
    const auto j = nlohmann::json::parse(line);
    seen[j.at("state").get<std::string>()] = j;
  }
  for (const auto& row : table1) {
    auto it = seen.find(row.state);
    if (it == seen.end()) {
      o.require(false, std::string(row.state) + " missing from the log");
      continue;
    }
    o.require(it->second.at("color").get<std::array<int, 3>>() == row.rgb, std::string(row.state) + " colour");
    o.require(it->second.at("tone").get<std::string>() == row.tone, std::string(row.state) + " tone");
  }
  if (o.pass) o.detail = "5/5 (state -> colour, tone) pairs exact in the actuation log";
  return o;
}

// 4 -------------------------------------------------------------------------
Outcome table3_evaluation() {
  Outcome o;
  const std::string path = BIOFSM_DATA_DIR "/table3.csv";

  // hand count straight off the CSV text
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  int hand[kClips] = {0, 0, 0};
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() == 4 && f[2] == f[3]) ++hand[std::stoi(f[0]) - 1];
  }
  o.require(hand[0] == 9 && hand[1] == 5 && hand[2] == 5, "hand count is not 9/5/5");

  const auto report = evaluate_table3(read_table3_file(path));
  for (int c = 0; c < kClips; ++c) {
    o.require(report.clips[c].matches == hand[c], "clip " + std::to_string(c + 1) + " count");
    o.require(report.clips[c].total == 16, "clip total");
  }
  const std::string text = report.render_text();
  for (const char* stated : {"66.67", "13.00", "43.75", "41.00"}) {
    o.require(text.find(stated) != std::string::npos, std::string("stated ") + stated + " not printed");
  }
  o.require(report.any_discrepancy() && text.find("DISCREPANCY") != std::string::npos, "discrepancy not flagged");
  if (o.pass) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "matches %d/%d/%d of 16; computed %.2f/%.2f/%.2f mean %.2f; stated figures flagged",
                  hand[0], hand[1], hand[2], report.clips[0].accuracy_pct, report.clips[1].accuracy_pct,
                  report.clips[2].accuracy_pct, report.average_pct);
    o.detail = buf;
  }
  return o;
}

// 5 -------------------------------------------------------------------------
constexpr double kWarmupMs = 5000.0;

double worst_bpm_error(double bpm, double noise, std::size_t intervals, std::uint64_t seed) {
  SignalProfile p;
  p.bpm = Trajectory::constant(bpm);
  p.noise = noise;
  FeatureConfig fc;
  fc.bpm_intervals = intervals;
  double worst = 0.0;
  std::size_t n = 0;
  for (const auto& f : extract_features(synth_physio(p, 60000.0, seed), fc)) {
    if (f.timestamp_ms < kWarmupMs) continue;
    worst = std::max(worst, std::abs(f.bpm - bpm));
    ++n;
  }
  // a detector that finds almost nothing cannot pass
  if (n < static_cast<std::size_t>(bpm * 0.9 * (60000.0 - kWarmupMs) / 60000.0) - 1) return 1e9;
  return worst;
}

Outcome beat_rate() {
  Outcome o;
  const auto t0 = Steady::now();
  double clean = 0.0, noisy = 0.0;
  for (double bpm : {60.0, 90.0, 120.0}) {
    const double e = worst_bpm_error(bpm, 0.0, 1, 1);
    clean = std::max(clean, e);
    o.require(e <= 2.0, "noise-free " + std::to_string(int(bpm)) + " BPM off by " + std::to_string(e));
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const double en = worst_bpm_error(bpm, 0.2, 4, seed);
      noisy = std::max(noisy, en);
      o.require(en <= 5.0, "noisy " + std::to_string(int(bpm)) + " BPM seed " + std::to_string(seed) +
                               " off by " + std::to_string(en));
    }
  }
  const double secs = seconds_since(t0);
  o.require(secs < 10.0, "runtime " + std::to_string(secs) + " s");
  if (o.pass) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "60/90/120 BPM: worst %.2f noise-free (per beat), %.2f at 20%% noise (4-interval mean, 20 seeds)",
                  clean, noisy);
    o.detail = buf;
  }
  return o;
}

// 6 -------------------------------------------------------------------------
Outcome gsr_smoother() {
  Outcome o;
  for (double c : {0.0, 0.1, 5.0, 8.0, 17.3, 24.999}) {
    GsrWindow w{std::vector<double>(kGsrWindowLength, c), 0};
    o.require(gsr_smooth(w) == c, "constant window is not a fixed point");
  }

  GsrSmoother s;
  for (int i = 0; i < 20; ++i) s.push(0.0);
  for (std::size_t k = 1; k <= kGsrWindowLength; ++k) {
    s.push(8.0);
    const double y = s.smooth(s.window_at(k));
    if (k < kGsrWindowLength) {
      o.require(y < 8.0, "step reached 8.0 early");
    } else {
      o.require(y == 8.0, "step did not reach 8.0 exactly after 8 samples");
    }
  }

  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 25.0), a(-3.0, 3.0);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    GsrWindow x, y, z;
    const double alpha = a(rng), beta = a(rng);
    for (std::size_t i = 0; i < kGsrWindowLength; ++i) {
      x.samples.push_back(u(rng));
      y.samples.push_back(u(rng));
      z.samples.push_back(alpha * x.samples[i] + beta * y.samples[i]);
    }
    const double lhs = gsr_smooth(z);
    const double rhs = alpha * gsr_smooth(x) + beta * gsr_smooth(y);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  o.require(worst <= 1e-12, "linearity error " + std::to_string(worst));
  if (o.pass) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "fixed point exact, 0->8 step = 8.0 at sample 8, linearity error %.1e", worst);
    o.detail = buf;
  }
  return o;
}

// 7 -------------------------------------------------------------------------
Outcome classifier_example() {
  Outcome o;
  const LadderConfig cfg;
  double min_margin = 1e9;
  std::size_t n = 0;
  for (double bpm = 60.0; bpm < 85.0; bpm += 0.05) {
    for (double gsr = 15.0; gsr < 20.0; gsr += 0.01) {
      const auto s = score_frame({0, 0.0, bpm, gsr}, cfg);
      const double margin = s[size_t(ArousalClass::MILD)] - s[size_t(ArousalClass::NORMAL)];
      min_margin = std::min(min_margin, margin);
      ++n;
      if (!(margin > 0.0)) o.require(false, "MILD not above NORMAL at " + std::to_string(bpm) + "," + std::to_string(gsr));
    }
  }
  for (double bpm : {60.0, std::nextafter(85.0, 0.0)}) {
    for (double gsr : {15.0, std::nextafter(20.0, 0.0)}) {
      const auto s = score_frame({0, 0.0, bpm, gsr}, cfg);
      o.require(s[1] > s[0], "corner frame");
    }
  }
  if (o.pass) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%zu frames, MILD - NORMAL >= %.2f", n, min_margin);
    o.detail = buf;
  }
  return o;
}

// 8 -------------------------------------------------------------------------
Outcome end_to_end() {
  Outcome o;
  const auto t0 = Steady::now();
  const auto records = read_table3_file(BIOFSM_DATA_DIR "/table3.csv");
  ReplayOptions opts;
  opts.tick_ms = 100;

  for (int clip = 1; clip <= kClips; ++clip) {
    const auto plan = predicted_script(records, clip);
    o.require(replay_end_to_end(plan, opts) == run_simulation(plan, opts.fsm),
              "clip " + std::to_string(clip) + " live trace differs from simulation");
  }

  const auto clip1 = predicted_script(records, 1);
  const auto dropped = with_dropped(clip1, 7);
  const auto dt = replay_end_to_end(dropped, opts);
  o.require(dt == run_simulation(dropped, opts.fsm), "drop trace differs from simulation");
  o.require(std::count_if(dt.begin(), dt.end(), [](auto& e) { return e.input == InputSymbol::ABSENT; }) == 1,
            "drop did not yield exactly one ABSENT tick");
  o.require(std::none_of(dt.begin(), dt.end(), [](auto& e) { return e.state == BenchState::BROWNOUT; }),
            "drop caused BROWNOUT");

  const std::size_t at = 8;
  const auto outage = with_outage(clip1, at, 10);
  const auto ot = replay_end_to_end(outage, opts);
  o.require(ot == run_simulation(outage, opts.fsm), "outage trace differs from simulation");
  o.require(ot.size() == clip1.size() + 10, "outage length");
  if (ot.size() == clip1.size() + 10) {
    o.require(ot[at + 8].state != BenchState::BROWNOUT, "BROWNOUT before 10 silent ticks");
    o.require(ot[at + 9].state == BenchState::BROWNOUT, "outage did not reach BROWNOUT");
    const auto want = static_cast<BenchState>(static_cast<int>(clip1[at]));
    o.require(ot[at + 10].state == want, "no recovery after outage");
  }

  const double secs = seconds_since(t0);
  o.require(secs < 30.0, "runtime " + std::to_string(secs) + " s");
  if (o.pass) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "3 clips identical to simulation; drop -> 1 ABSENT, no BROWNOUT; 10-tick outage -> BROWNOUT, "
                  "recovery; %.1f s",
                  secs);
    o.detail = buf;
  }
  return o;
}

// 9 -------------------------------------------------------------------------
std::string csv_of(const std::vector<PhysioSample>& s) {
  std::ostringstream out;
  write_trace_csv(out, s);
  return out.str();
}

bool bit_identical(const std::vector<PhysioSample>& a, const std::vector<PhysioSample>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(a[i].timestamp_ms) != std::bit_cast<std::uint64_t>(b[i].timestamp_ms) ||
        a[i].channel != b[i].channel ||
        std::bit_cast<std::uint64_t>(a[i].value) != std::bit_cast<std::uint64_t>(b[i].value)) {
      return false;
    }
  }
  return true;
}

Outcome harness_determinism() {
  Outcome o;
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    TickScript script(rng() % 64);
    for (auto& s : script) s = kAllSymbols[rng() % kAllSymbols.size()];
    FsmConfig cfg;
    cfg.brownout_ticks = 1 + static_cast<std::uint32_t>(rng() % 12);
    o.require(trace_to_jsonl(run_simulation(script, cfg)) == trace_to_jsonl(run_simulation(script, cfg)),
              "simulation traces differ");
  }
  for (std::uint64_t seed : {1ull, 2ull, 42ull, 0xdeadbeefull}) {
    SignalProfile p;
    p.bpm = Trajectory{{{0.0, 60.0}, {20000.0, 120.0}}};
    p.noise = 0.2;
    p.gsr_noise_us = 0.5;
    p.dc_drift_amplitude = 200.0;
    p.dc_drift_hz = 0.1;
    const auto a = synth_physio(p, 20000.0, seed);
    const auto b = synth_physio(p, 20000.0, seed);
    o.require(bit_identical(a, b) && csv_of(a) == csv_of(b), "synth_physio streams differ");
    o.require(!bit_identical(a, synth_physio(p, 20000.0, seed + 1)), "seed has no effect");
  }
  if (o.pass) o.detail = "200 scripts and 4 seeds: byte-identical reruns";
  return o;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"FSM determinism", fsm_determinism},
      {"BrownOut timing and recovery", brownout_timing},
      {"Actuation map", actuation_map},
      {"Session fixture evaluation", table3_evaluation},
      {"Beat-rate fidelity", beat_rate},
      {"GSR smoother", gsr_smoother},
      {"Classifier worked example", classifier_example},
      {"End-to-end equivalence", end_to_end},
      {"Harness determinism", harness_determinism},
  };
  int failures = 0;
  int n = 0;
  for (const auto& [name, run] : criteria) {
    ++n;
    Outcome r;
    try {
      r = run();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    failures += !r.pass;
    std::printf("%s [%d] %s: %s\n", r.pass ? "PASS" : "FAIL", n, name, r.detail.c_str());
    std::fflush(stdout);
  }
  return failures;
}
