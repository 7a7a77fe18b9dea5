#include "biofsm/sim_harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "biofsm/errors.hpp"
#include "biofsm/nodes.hpp"

namespace biofsm {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    const auto c = line.find(',', pos);
    out.push_back(trim(line.substr(pos, c == std::string_view::npos ? c : c - pos)));
    if (c == std::string_view::npos) break;
    pos = c + 1;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Tick scripts
// ---------------------------------------------------------------------------

TickScript parse_tick_script(std::istream& in, const std::string& source) {
  TickScript script;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tok = trim(line);
    if (tok.empty() || tok.front() == '#') continue;
    if (tok.size() != 1) throw ParseError(source, lineno, "unknown token '" + std::string(tok) + "'");
    auto sym = symbol_from_token(tok.front());
    if (!sym) throw ParseError(source, lineno, "unknown token '" + std::string(tok) + "'");
    script.push_back(*sym);
  }
  return script;
}

TickScript load_tick_script(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open script '" + path + "'");
  return parse_tick_script(in, path);
}

std::string format_tick_script(const TickScript& script) {
  std::string out;
  for (auto s : script) {
    out += symbol_token(s);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

std::string actuation_record_json(const TraceEntry& e) {
  nlohmann::ordered_json j;
  j["tick"] = e.tick;
  j["input"] = to_string(e.input);
  j["state"] = to_string(e.state);
  j["color"] = {e.actuation.color.r, e.actuation.color.g, e.actuation.color.b};
  j["tone"] = to_string(e.actuation.tone);
  return j.dump();
}

TraceEntry parse_actuation_record(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  TraceEntry e;
  e.tick = j.at("tick").get<std::uint64_t>();
  const auto input = j.at("input").get<std::string>();
  auto sym = std::find_if(kAllSymbols.begin(), kAllSymbols.end(),
                          [&](InputSymbol s) { return to_string(s) == input; });
  if (sym == kAllSymbols.end()) throw ParseError("<actuation>", 0, "unknown input '" + input + "'");
  e.input = *sym;
  auto st = bench_state_from_string(j.at("state").get<std::string>());
  if (!st) throw ParseError("<actuation>", 0, "unknown state");
  e.state = *st;
  const auto& c = j.at("color");
  e.actuation.color = {c.at(0).get<std::uint8_t>(), c.at(1).get<std::uint8_t>(), c.at(2).get<std::uint8_t>()};
  const auto tone = j.at("tone").get<std::string>();
  bool found = false;
  for (auto t : {Tone::TONE1, Tone::TONE2, Tone::TONE3, Tone::SILENT}) {
    if (to_string(t) == tone) {
      e.actuation.tone = t;
      found = true;
    }
  }
  if (!found) throw ParseError("<actuation>", 0, "unknown tone '" + tone + "'");
  return e;
}

std::string trace_to_jsonl(std::span<const TraceEntry> trace) {
  std::string out;
  for (const auto& e : trace) {
    out += actuation_record_json(e);
    out += '\n';
  }
  return out;
}

std::vector<TraceEntry> run_simulation(const TickScript& script, const FsmConfig& cfg) {
  BenchtopFsm fsm(cfg);
  std::vector<TraceEntry> trace;
  trace.reserve(script.size());
  std::uint64_t tick = 0;
  for (auto in : script) {
    const auto cmd = fsm.tick(in);
    trace.push_back({tick++, in, fsm.state(), cmd});
  }
  return trace;
}

std::vector<BenchState> states_of(std::span<const TraceEntry> trace) {
  std::vector<BenchState> out;
  out.reserve(trace.size());
  for (const auto& e : trace) out.push_back(e.state);
  return out;
}

// ---------------------------------------------------------------------------
// Session accuracy
// ---------------------------------------------------------------------------

std::vector<TraceRecord> read_table3_csv(std::istream& in, const std::string& source) {
  std::vector<TraceRecord> out;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    if (!header) {
      if (trim(line) != "clip,interval,self_report,predicted")
        throw ParseError(source, lineno, "expected header 'clip,interval,self_report,predicted'");
      header = true;
      continue;
    }
    const auto f = split_csv(line);
    if (f.size() != 4) throw ParseError(source, lineno, "expected 4 fields");
    TraceRecord r;
    try {
      r.clip_id = std::stoi(std::string(f[0]));
      r.interval_index = std::stoi(std::string(f[1]));
    } catch (const std::exception&) {
      throw ParseError(source, lineno, "clip and interval must be integers");
    }
    auto sr = arousal_from_string(f[2]);
    auto pr = arousal_from_string(f[3]);
    if (!sr || !pr) throw ParseError(source, lineno, "class must be NORMAL, MILD or HIGH");
    r.self_report = *sr;
    r.predicted = *pr;
    out.push_back(r);
  }
  if (!header) throw ParseError(source, 0, "missing header");
  return out;
}

std::vector<TraceRecord> read_table3_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open fixture '" + path + "'");
  return read_table3_csv(in, path);
}

bool AccuracyReport::any_discrepancy() const {
  return average_discrepant ||
         std::any_of(clips.begin(), clips.end(), [](const ClipAccuracy& c) { return c.discrepant; });
}

AccuracyReport evaluate_table3(std::span<const TraceRecord> records) {
  AccuracyReport rep;
  // the stated figures carry at most two decimals, some none at all
  constexpr double kReportingPrecision = 0.5;

  for (int clip = 1; clip <= kClips; ++clip) {
    std::vector<bool> seen(kIntervalsPerClip, false);
    ClipAccuracy ca;
    ca.clip_id = clip;
    for (const auto& r : records) {
      if (r.clip_id != clip) continue;
      if (r.interval_index < 0 || r.interval_index >= kIntervalsPerClip || seen[r.interval_index]) {
        throw ParseError("<table3>", 0,
                         "clip " + std::to_string(clip) + " has a bad or repeated interval " +
                             std::to_string(r.interval_index));
      }
      seen[r.interval_index] = true;
      ++ca.total;
      if (r.self_report == r.predicted) ++ca.matches;
    }
    if (ca.total != kIntervalsPerClip) {
      throw ParseError("<table3>", 0,
                       "clip " + std::to_string(clip) + " has " + std::to_string(ca.total) +
                           " records, expected 16");
    }
    ca.accuracy_pct = 100.0 * ca.matches / ca.total;
    ca.stated_pct = kStatedClipAccuracyPct[clip - 1];
    ca.discrepant = std::abs(ca.accuracy_pct - ca.stated_pct) > kReportingPrecision;
    rep.clips.push_back(ca);
  }
  for (const auto& r : records) {
    if (r.clip_id < 1 || r.clip_id > kClips)
      throw ParseError("<table3>", 0, "unknown clip id " + std::to_string(r.clip_id));
  }

  double sum = 0.0;
  for (const auto& c : rep.clips) sum += c.accuracy_pct;
  rep.average_pct = sum / kClips;
  rep.stated_average_pct = kStatedAverageAccuracyPct;
  rep.average_discrepant = std::abs(rep.average_pct - rep.stated_average_pct) > kReportingPrecision;
  return rep;
}

std::string AccuracyReport::render_text() const {
  std::ostringstream out;
  char buf[160];
  out << "clip  matches  computed   stated   flag\n";
  for (const auto& c : clips) {
    std::snprintf(buf, sizeof buf, "%4d  %2d/%-2d    %7.2f%%  %6.2f%%  %s\n", c.clip_id, c.matches, c.total,
                  c.accuracy_pct, c.stated_pct, c.discrepant ? "DISCREPANCY" : "ok");
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "mean           %7.2f%%  %6.2f%%  %s\n", average_pct, stated_average_pct,
                average_discrepant ? "DISCREPANCY" : "ok");
  out << buf;
  if (any_discrepancy()) {
    out << "note: stated accuracies are not reproducible from exact-match counts over the table\n";
  }
  return out.str();
}

std::string AccuracyReport::to_json() const {
  nlohmann::ordered_json j;
  j["clips"] = nlohmann::ordered_json::array();
  for (const auto& c : clips) {
    nlohmann::ordered_json cj;
    cj["clip"] = c.clip_id;
    cj["matches"] = c.matches;
    cj["total"] = c.total;
    cj["accuracy_pct"] = c.accuracy_pct;
    cj["stated_pct"] = c.stated_pct;
    cj["discrepant"] = c.discrepant;
    j["clips"].push_back(cj);
  }
  j["average_pct"] = average_pct;
  j["stated_average_pct"] = stated_average_pct;
  j["average_discrepant"] = average_discrepant;
  j["any_discrepancy"] = any_discrepancy();
  return j.dump(2);
}

TickScript predicted_script(std::span<const TraceRecord> records, int clip_id) {
  std::vector<TraceRecord> rows;
  for (const auto& r : records) {
    if (r.clip_id == clip_id) rows.push_back(r);
  }
  std::sort(rows.begin(), rows.end(),
            [](const TraceRecord& a, const TraceRecord& b) { return a.interval_index < b.interval_index; });
  TickScript script;
  for (const auto& r : rows) script.push_back(symbol_for(r.predicted));
  return script;
}

// ---------------------------------------------------------------------------
// Live replay
// ---------------------------------------------------------------------------

TickScript with_dropped(TickScript plan, std::size_t slot) {
  if (slot < plan.size()) plan[slot] = InputSymbol::ABSENT;
  return plan;
}

TickScript with_outage(TickScript plan, std::size_t at, std::size_t ticks) {
  at = std::min(at, plan.size());
  plan.insert(plan.begin() + static_cast<std::ptrdiff_t>(at), ticks, InputSymbol::ABSENT);
  return plan;
}

std::vector<TraceEntry> replay_end_to_end(const TickScript& plan, const ReplayOptions& opts) {
  auto receiver = UdpEndpoint::bind(opts.address, opts.port);
  auto sender = UdpEndpoint::connect_to(opts.address, receiver.local_port());

  std::vector<std::optional<std::vector<std::uint8_t>>> slots;
  slots.reserve(plan.size());
  for (auto s : plan) slots.push_back(payload_for(s));

  const auto tick = std::chrono::milliseconds(opts.tick_ms);
  // leave both threads time to get scheduled before tick 0
  const auto start = Clock::now() + std::chrono::milliseconds(50);

  std::thread wearable([&] { paced_send(sender, slots, PacingOptions{start, tick, nullptr}); });

  BenchtopLoopOptions bo;
  bo.fsm = opts.fsm;
  bo.start = start;
  bo.tick = tick;
  bo.max_ticks = plan.size();
  auto trace = run_benchtop_loop(receiver, bo);
  wearable.join();
  return trace;
}

}  // namespace biofsm
