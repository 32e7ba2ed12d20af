#include "drqn/state_builder.hpp"

#include <algorithm>
#include <string>

#include "drqn/errors.hpp"

namespace drqn {
namespace {

StockState compute_state(std::span<const GroupBar> bars, std::span<const double> closes,
                         const Eigen::MatrixXd& indicators, std::size_t at,
                         const StateConfig& config) {
  StockState state;
  state.group_index = at;
  state.features = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(state_dimension(config)));
  state.sentiment = arbr(bars.first(at + 1), config.arbr_window);
  if (at < warmup_length(config) || !state.sentiment.ar || !state.sentiment.br) return state;

  const std::size_t lags = config.log_return_lags;
  const std::size_t zw = config.z_window;
  Eigen::Index k = 0;

  const auto returns = log_returns(closes.first(at + 1), zw);
  const auto z_returns = zscore(returns, zw);
  for (std::size_t i = zw - lags; i < zw; ++i) state.features[k++] = z_returns.values[i];

  if (config.use_indicators) {
    std::vector<double> column(zw);
    for (std::size_t j = 0; j < kIndicatorCount; ++j) {
      for (std::size_t i = 0; i < zw; ++i) {
        column[i] = indicators(static_cast<Eigen::Index>(at + 1 - zw + i), static_cast<Eigen::Index>(j));
      }
      state.features[k++] = zscore(column, zw).values.back();
    }
  }
  state.features[k++] = *state.sentiment.ar / 100.0;
  state.features[k++] = *state.sentiment.br / 100.0;
  state.valid = state.features.allFinite();
  if (!state.valid) state.features.setZero();
  return state;
}

}  // namespace

std::size_t state_dimension(const StateConfig& config) {
  return config.log_return_lags + (config.use_indicators ? kIndicatorCount : 0) + 2;
}

std::size_t warmup_length(const StateConfig& config) {
  std::size_t w = std::max(config.z_window, config.arbr_window);
  if (config.use_indicators) w = std::max(w, kIndicatorLookback + config.z_window - 1);
  return w;
}

void validate(const StateConfig& config) {
  if (config.z_window < 2) throw ConfigError("state.z_window must be >= 2");
  if (config.log_return_lags < 1 || config.log_return_lags > config.z_window) {
    throw ConfigError("state.log_return_lags must be in [1, state.z_window]");
  }
  if (config.arbr_window < 1) throw ConfigError("indicators.arbr_window must be >= 1");
}

std::vector<StockState> build_states(std::span<const GroupBar> bars, const StateConfig& config) {
  validate(config);
  const OhlcvArrays arrays = to_arrays(bars);
  const std::vector<double> closes(arrays.close.data(), arrays.close.data() + arrays.size());
  const Eigen::MatrixXd indicators =
      config.use_indicators ? indicator_series(arrays) : Eigen::MatrixXd();
  std::vector<StockState> states;
  states.reserve(bars.size());
  for (std::size_t at = 0; at < bars.size(); ++at) {
    states.push_back(compute_state(bars, closes, indicators, at, config));
  }
  return states;
}

StockState build_state(std::span<const GroupBar> bars, std::size_t at, const StateConfig& config) {
  validate(config);
  if (at >= bars.size()) throw DataError("DataError", "build_state: index " + std::to_string(at) + " out of range");
  const auto prefix = bars.first(at + 1);
  const OhlcvArrays arrays = to_arrays(prefix);
  const std::vector<double> closes(arrays.close.data(), arrays.close.data() + arrays.size());
  const Eigen::MatrixXd indicators =
      config.use_indicators ? indicator_series(arrays) : Eigen::MatrixXd();
  return compute_state(prefix, closes, indicators, at, config);
}

}  // namespace drqn
