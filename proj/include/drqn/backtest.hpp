#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "drqn/action.hpp"
#include "drqn/decimal.hpp"
#include "drqn/market_data.hpp"

namespace drqn {

struct BacktestConfig {
  Decimal initial_cash = Decimal::from_int(100'000);
  std::int64_t lot_size = 100;  // shares per position unit
  Decimal fee_rate = Decimal::from_units(100'000);  // 0.001
  bool allow_short = false;
};

struct Fill {
  std::size_t group_index = 0;
  Timestamp timestamp = 0;
  Action side = Action::Hold;
  Decimal price;
  Decimal notional;
  Decimal fee;
};

struct Portfolio {
  Decimal cash;
  int position = 0;  // lots: 0/1, or -1/0/1 with shorting
  std::int64_t lot_size = 100;
  Decimal fees_paid;
  std::vector<Fill> fills;

  static Portfolio open(const BacktestConfig& config);
  // cash + position * lot_size * price
  Decimal equity(Decimal price) const;
};

// Executes `action` at `price`. Buy when flat (or short) and Sell when long
// (or flat with shorting) fill one lot and charge fee_rate * notional;
// every other combination is a no-op. Throws InsufficientCash when a buy
// would leave negative cash.
std::optional<Fill> apply_fill(Portfolio& portfolio, Action action, Decimal price,
                               const BacktestConfig& config, std::size_t group_index = 0,
                               Timestamp timestamp = 0);

struct EquityPoint {
  std::size_t group_index = 0;
  Timestamp timestamp = 0;
  Decimal price;
  Decimal equity;
  int position = 0;
  // Equity change over the step: previous position * lot * price change - fee.
  double reward = 0.0;
};

struct RunReport {
  std::string name;
  Decimal initial_cash;
  Decimal accumulated_income;  // final_equity - initial_cash
  std::size_t trade_count = 0;
  Decimal fee_total;
  double max_drawdown = 0.0;  // fraction of running peak equity
  Decimal final_equity;
  std::size_t first_group = 0;
  std::size_t last_group = 0;
};

struct BacktestResult {
  std::vector<EquityPoint> equity;
  std::vector<Fill> fills;
  std::vector<Action> executed;  // the action that actually filled, Hold otherwise
  RunReport report;
};

// Fills each action at its group's close.
BacktestResult run_backtest(std::span<const Action> actions, std::span<const GroupBar> bars,
                            const BacktestConfig& config, const std::string& name = "");

// Decision callback that only ever sees history through the current group.
using StrategyFn = std::function<Action(std::span<const GroupBar> history)>;

// Feeds `bars` one group at a time to `strategy` and backtests the result.
BacktestResult run_streaming(const StrategyFn& strategy, std::span<const GroupBar> bars,
                             const BacktestConfig& config, const std::string& name = "");

// Stable sort by accumulated income, best first. Throws MismatchedRange
// unless every report covers the same groups; needs at least two reports.
std::vector<RunReport> compare_runs(std::span<const RunReport> reports);

std::string format_real(double value);

void write_equity_csv(std::ostream& out, std::span<const EquityPoint> points);
void write_fills_csv(std::ostream& out, std::span<const Fill> fills);
std::string report_to_json(const RunReport& report);
RunReport report_from_json(const std::string& text);
void write_ranking_csv(std::ostream& out, std::span<const RunReport> ranked);
std::string ranking_to_json(std::span<const RunReport> ranked);

}  // namespace drqn
