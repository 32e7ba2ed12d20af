#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "drqn/market_data.hpp"

namespace drqn {

// Column view of a group-bar series in binary floating point.
struct OhlcvArrays {
  Eigen::ArrayXd open;
  Eigen::ArrayXd high;
  Eigen::ArrayXd low;
  Eigen::ArrayXd close;
  Eigen::ArrayXd volume;

  Eigen::Index size() const { return close.size(); }
};

OhlcvArrays to_arrays(std::span<const GroupBar> bars);

// Returns the `count` most recent ln(close[g] / close[g-1]), oldest first.
// Throws InsufficientHistory (fewer than count+1 closes) or NonPositivePrice.
std::vector<double> log_returns(std::span<const double> closes, std::size_t count = 8);

struct ZScoreParams {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  std::size_t window = 0;
};

struct ZScoreResult {
  std::vector<double> values;  // the trailing `window` inputs, normalized
  ZScoreParams params;
};

// Population standard deviations at or below kZScoreFlatTolerance *
// max(1, |mean|) count as zero and produce all-zero output.
inline constexpr double kZScoreFlatTolerance = 1e-12;

ZScoreResult zscore(std::span<const double> series, std::size_t window);

// AR = 100 * sum(high - open) / sum(open - low) over the trailing n bars.
// Sums are taken in exact decimal arithmetic; empty when the denominator is <= 0.
std::optional<double> ar_indicator(std::span<const GroupBar> bars, std::size_t n = 26);

// BR = 100 * sum(max(0, high - prev_close)) / sum(max(0, prev_close - low))
// over the trailing n bars; needs n + 1 bars.
std::optional<double> br_indicator(std::span<const GroupBar> bars, std::size_t n = 26);

struct ArBrValue {
  std::optional<double> ar;
  std::optional<double> br;
  std::size_t window = 26;
};

ArBrValue arbr(std::span<const GroupBar> bars, std::size_t n = 26);

inline constexpr std::size_t kIndicatorCount = 20;

// Network input layout contract: do not reorder.
inline constexpr std::array<std::string_view, kIndicatorCount> kIndicatorNames = {
    "sma5",      "sma10",     "sma20",   "ema12",    "ema26",      "macd",    "macd_signal",
    "macd_hist", "rsi14",     "mfi14",   "mom10",    "roc10",      "bb_pctb", "bb_width",
    "stoch_k14", "stoch_d3",  "atr14",   "obv_d10",  "vol_ratio5", "willr14"};

// Smallest group index at which every indicator in the suite is defined
// (the MACD signal line needs 26 + 9 - 1 closes).
inline constexpr std::size_t kIndicatorLookback = 33;

struct IndicatorVector {
  std::array<double, kIndicatorCount> values{};

  static constexpr const std::array<std::string_view, kIndicatorCount>& names() {
    return kIndicatorNames;
  }
};

// From-scratch evaluation at one group index. Price-denominated indicators are
// divided by the close at `at`. Throws InsufficientHistory for at < kIndicatorLookback.
IndicatorVector indicator_suite(std::span<const GroupBar> bars, std::size_t at);
IndicatorVector indicator_suite(const OhlcvArrays& series, std::size_t at);

// Single causal pass over the series: row g equals indicator_suite(series, g)
// up to floating-point summation order. Rows before kIndicatorLookback are NaN.
Eigen::MatrixXd indicator_series(const OhlcvArrays& series);

// Raw (unnormalized) MACD line and signal line in price units; NaN where undefined.
struct MacdSeries {
  Eigen::ArrayXd line;
  Eigen::ArrayXd signal;
};
MacdSeries macd_series(const Eigen::ArrayXd& close, int fast = 12, int slow = 26, int signal = 9);

}  // namespace drqn
