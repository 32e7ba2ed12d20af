#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "drqn/backtest.hpp"
#include "drqn/rl_agent.hpp"
#include "drqn/state_builder.hpp"
#include "drqn/strategies.hpp"
#include "drqn/synthetic_data.hpp"

namespace drqn {

// Every knob of a run. Text form is one `section.key = value` per line with
// `#` comments; unknown keys are errors.
struct RunConfig {
  std::uint64_t seed = 0;
  double train_fraction = 0.6;

  std::string data_path;
  std::size_t group_size = 30;

  std::optional<GeneratorSpec> synth;  // present once synth.kind is set
  std::optional<std::uint64_t> synth_seed;  // defaults to seed

  StateConfig state;
  ArbrThresholds thresholds;
  AgentConfig agent;
  BacktestConfig backtest;
  std::vector<std::string> strategies = {"arbr_drqn", "drqn", "macd", "buy_hold", "arbr"};

  GeneratorSpec generator_spec() const;  // synth with the effective seed
  bool has_data_source() const { return !data_path.empty() || synth.has_value(); }
};

inline const std::vector<std::string>& known_strategies() {
  static const std::vector<std::string> names = {"arbr_drqn", "drqn", "dqn", "macd", "buy_hold", "arbr", "hold"};
  return names;
}

void apply_setting(RunConfig& config, const std::string& key, const std::string& value);
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);
void validate(const RunConfig& config);

// Resolved form: every key with its effective value, sorted by key.
std::string serialize_config(const RunConfig& config);

}  // namespace drqn
