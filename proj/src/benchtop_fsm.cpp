#include "biofsm/benchtop_fsm.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "biofsm/errors.hpp"

namespace biofsm {

std::string_view to_string(BenchState s) {
  switch (s) {
    case BenchState::NORMAL: return "NORMAL";
    case BenchState::MILD: return "MILD";
    case BenchState::HIGH: return "HIGH";
    case BenchState::INVALID: return "INVALID";
    case BenchState::BROWNOUT: return "BROWNOUT";
  }
  return "?";
}

std::optional<BenchState> bench_state_from_string(std::string_view s) {
  for (auto st : kAllStates) {
    if (to_string(st) == s) return st;
  }
  return std::nullopt;
}

std::string_view to_string(Tone t) {
  switch (t) {
    case Tone::TONE1: return "TONE1";
    case Tone::TONE2: return "TONE2";
    case Tone::TONE3: return "TONE3";
    case Tone::SILENT: return "SILENT";
  }
  return "?";
}

ActuationCommand actuation_for(BenchState s) {
  switch (s) {
    case BenchState::NORMAL: return {{0, 255, 0}, Tone::TONE1};
    case BenchState::MILD: return {{255, 165, 0}, Tone::TONE2};
    case BenchState::HIGH: return {{255, 0, 0}, Tone::TONE3};
    case BenchState::INVALID: return {{255, 255, 255}, Tone::SILENT};
    case BenchState::BROWNOUT: return {{255, 0, 255}, Tone::SILENT};
  }
  return {};
}

void FsmConfig::validate() const {
  if (brownout_ticks == 0) throw ConfigError("brownout_ticks must be at least 1");
}

FsmRuntime next_runtime(const FsmRuntime& rt, InputSymbol input, std::uint32_t brownout_ticks) {
  switch (input) {
    case InputSymbol::VALID_A: return {BenchState::NORMAL, 0};
    case InputSymbol::VALID_B: return {BenchState::MILD, 0};
    case InputSymbol::VALID_C: return {BenchState::HIGH, 0};
    case InputSymbol::UNRECOGNIZED:
      // garbage proves the link is alive but is not the valid input BrownOut waits for
      return {rt.state == BenchState::BROWNOUT ? BenchState::BROWNOUT : BenchState::INVALID, 0};
    case InputSymbol::ABSENT: {
      const std::uint32_t silence = std::min(rt.silence_ticks + 1, brownout_ticks);
      return {silence >= brownout_ticks ? BenchState::BROWNOUT : rt.state, silence};
    }
  }
  return rt;
}

BenchtopFsm::BenchtopFsm(FsmConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  rt_.state = cfg_.initial_state;
}

ActuationCommand BenchtopFsm::tick(InputSymbol input) {
  rt_ = next_runtime(rt_, input, cfg_.brownout_ticks);
  return actuation_for(rt_.state);
}

// ---------------------------------------------------------------------------

DeterminismReport verify_determinism(const FsmConfig& cfg, int repeats) {
  cfg.validate();
  DeterminismReport rep;
  rep.brownout_ticks = cfg.brownout_ticks;

  std::map<std::pair<BenchState, InputSymbol>, int> symbol_cells;
  for (auto st : kAllStates) {
    for (std::uint32_t silence = 0; silence <= cfg.brownout_ticks; ++silence) {
      for (auto in : kAllSymbols) {
        TransitionCell cell{st, silence, in, {}};
        for (int r = 0; r < std::max(repeats, 1); ++r) {
          const FsmRuntime from{st, silence};
          const FsmRuntime to = next_runtime(from, in, cfg.brownout_ticks);
          if (std::find(cell.successors.begin(), cell.successors.end(), to) == cell.successors.end()) {
            cell.successors.push_back(to);
          }
        }

        std::ostringstream where;
        where << to_string(st) << "@" << silence << " x " << to_string(in);
        if (cell.successors.size() != 1) {
          rep.violations.push_back(where.str() + ": " + std::to_string(cell.successors.size()) + " successors");
        }
        for (const auto& to : cell.successors) {
          if (to.silence_ticks > cfg.brownout_ticks)
            rep.violations.push_back(where.str() + ": silence counter exceeds brownout_ticks");
          if (in != InputSymbol::ABSENT && to.silence_ticks != 0)
            rep.violations.push_back(where.str() + ": silence counter not reset");
        }
        rep.cells.push_back(std::move(cell));
        ++symbol_cells[{st, in}];
      }
    }
  }
  rep.symbol_level_cells = symbol_cells.size();
  return rep;
}

std::string DeterminismReport::render_table() const {
  std::ostringstream out;
  out << "brownout_ticks = " << brownout_ticks << "\n";
  out << "from       input         successor\n";
  for (auto st : kAllStates) {
    for (auto in : kAllSymbols) {
      std::string from(to_string(st));
      std::string input(to_string(in));
      from.resize(10, ' ');
      input.resize(13, ' ');
      out << from << ' ' << input << ' ';
      std::vector<std::string> parts;
      std::string first;
      bool uniform = true;
      for (const auto& c : cells) {
        if (c.from != st || c.input != in) continue;
        std::string succ;
        for (std::size_t i = 0; i < c.successors.size(); ++i) {
          if (i) succ += "|";
          succ += to_string(c.successors[i].state);
        }
        if (first.empty()) first = succ;
        if (succ != first) uniform = false;
        parts.push_back(succ + "@" + std::to_string(c.silence_ticks));
      }
      if (uniform) {
        out << first;
      } else {
        for (std::size_t i = 0; i < parts.size(); ++i) out << (i ? " " : "") << parts[i];
      }
      out << '\n';
    }
  }
  out << (deterministic() ? "deterministic: every cell has exactly one successor\n"
                          : "NOT deterministic\n");
  return out.str();
}

}  // namespace biofsm
