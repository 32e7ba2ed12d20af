#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "drqn/indicators.hpp"
#include "drqn/market_data.hpp"

namespace drqn {

struct StateConfig {
  std::size_t log_return_lags = 8;
  std::size_t z_window = 64;  // trailing window for every z-scored feature
  bool use_indicators = true;
  std::size_t arbr_window = 26;
};

// Feature layout: [logret_1..logret_L, indicator_1..indicator_20, ar/100, br/100].
struct StockState {
  Eigen::VectorXd features;
  std::size_t group_index = 0;
  bool valid = false;
  ArBrValue sentiment;  // raw AR/BR behind the last two features
};

// 8 + 20 + 2 = 30 under the default configuration.
std::size_t state_dimension(const StateConfig& config);

// Smallest group index at which a state can be valid.
std::size_t warmup_length(const StateConfig& config);

void validate(const StateConfig& config);

// One state per group bar. Invalid states (warm-up, absent AR/BR) carry
// all-zero features.
std::vector<StockState> build_states(std::span<const GroupBar> bars, const StateConfig& config);

StockState build_state(std::span<const GroupBar> bars, std::size_t at, const StateConfig& config);

}  // namespace drqn
