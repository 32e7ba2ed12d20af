#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "drqn/action.hpp"
#include "drqn/backtest.hpp"
#include "drqn/indicators.hpp"
#include "drqn/neural_net.hpp"
#include "drqn/rl_agent.hpp"
#include "drqn/state_builder.hpp"

namespace drqn {

struct ArbrThresholds {
  double ar_buy = 50.0;
  double ar_sell = 150.0;
  double br_buy = 50.0;
  double br_sell = 300.0;
};

void validate(const ArbrThresholds& thresholds);

struct TradeSignal {
  Action s1 = Action::Hold;     // ARBR rule
  Action s2 = Action::Hold;     // network argmax
  Action fused = Action::Hold;
  std::size_t group_index = 0;
};

// Buy when AR < ar_buy and BR < br_buy; Sell when AR > ar_sell or BR > br_sell;
// Hold otherwise or when either value is absent.
Action arbr_signal(const ArBrValue& value, const ArbrThresholds& thresholds = {});

// Greedy action for one valid state; returns the advanced hidden state.
// Throws InvalidState.
std::pair<Action, HiddenState<double>> drqn_signal(const QNetworkParams<double>& net,
                                                   const HiddenState<double>& hidden,
                                                   const StockState& state);

// s1 when both agree, Hold otherwise.
constexpr Action fuse(Action s1, Action s2) { return s1 == s2 ? s1 : Action::Hold; }

// S1 over a state series.
std::vector<Action> arbr_signals(std::span<const StockState> states, const ArbrThresholds& thresholds);

// S2 over a state series, carrying the hidden state across it;
// invalid states emit Hold and leave the hidden state untouched.
std::vector<Action> drqn_signals(const QNetworkParams<double>& net, std::span<const StockState> states);

std::vector<TradeSignal> fuse_signals(std::span<const Action> s1, std::span<const Action> s2,
                                      std::size_t first_group = 0);

// Buy at the first tradable group, Hold everywhere else. Throws EmptyInput.
std::vector<Action> baseline_buy_hold(std::size_t length, std::size_t first_tradable = 0);

// Buy when the MACD line crosses above its signal line, Sell when it crosses
// below. Throws InsufficientHistory for series shorter than the warm-up.
std::vector<Action> baseline_macd(std::span<const GroupBar> bars, int fast = 12, int slow = 26,
                                  int signal = 9);

enum class BaselineKind { UnfusedDrqn, FeedforwardDqn };

struct AgentVariant {
  AgentConfig config;
  bool fused = false;
};

// Ablation agents: DRQN without ARBR fusion, and a feedforward DQN whose LSTM
// is replaced by a same-width tanh layer.
AgentVariant baseline_plain_dqn(const AgentConfig& base, BaselineKind kind);

struct SignalTraceRow {
  std::size_t group_index = 0;
  ArBrValue arbr;
  TradeSignal signal;
  Action executed = Action::Hold;
  int position = 0;
  Decimal price;
};

void write_signal_trace(std::ostream& out, std::span<const SignalTraceRow> rows);

}  // namespace drqn
