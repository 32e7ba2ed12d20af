#include "drqn/strategies.hpp"

#include <cmath>
#include <ostream>

#include "drqn/errors.hpp"

namespace drqn {

void validate(const ArbrThresholds& t) {
  if (!(t.ar_buy < t.ar_sell)) throw ConfigError("strategy.ar_buy must be < strategy.ar_sell");
  if (!(t.br_buy < t.br_sell)) throw ConfigError("strategy.br_buy must be < strategy.br_sell");
}

Action arbr_signal(const ArBrValue& value, const ArbrThresholds& t) {
  if (!value.ar || !value.br) return Action::Hold;
  const double ar = *value.ar, br = *value.br;
  if (ar > t.ar_sell || br > t.br_sell) return Action::Sell;
  if (ar < t.ar_buy && br < t.br_buy) return Action::Buy;
  return Action::Hold;
}

std::pair<Action, HiddenState<double>> drqn_signal(const QNetworkParams<double>& net,
                                                   const HiddenState<double>& hidden,
                                                   const StockState& state) {
  if (!state.valid) throw InvalidState("drqn_signal: state at group " + std::to_string(state.group_index) + " is not valid");
  const std::vector<Eigen::MatrixXd> input{state.features};
  auto out = forward<double>(net, input, hidden);
  return {greedy_action(out.q.front().col(0)), std::move(out.final_state)};
}

std::vector<Action> arbr_signals(std::span<const StockState> states, const ArbrThresholds& thresholds) {
  std::vector<Action> out;
  out.reserve(states.size());
  for (const StockState& s : states) out.push_back(arbr_signal(s.sentiment, thresholds));
  return out;
}

std::vector<Action> drqn_signals(const QNetworkParams<double>& net, std::span<const StockState> states) {
  std::vector<Action> out;
  out.reserve(states.size());
  auto hidden = HiddenState<double>::zero(net.hidden());
  for (const StockState& s : states) {
    if (!s.valid) {
      out.push_back(Action::Hold);
      continue;
    }
    auto [action, next] = drqn_signal(net, hidden, s);
    hidden = std::move(next);
    out.push_back(action);
  }
  return out;
}

std::vector<TradeSignal> fuse_signals(std::span<const Action> s1, std::span<const Action> s2,
                                      std::size_t first_group) {
  if (s1.size() != s2.size()) throw AlignmentError("fuse_signals: signal streams differ in length");
  std::vector<TradeSignal> out;
  out.reserve(s1.size());
  for (std::size_t i = 0; i < s1.size(); ++i) out.push_back({s1[i], s2[i], fuse(s1[i], s2[i]), first_group + i});
  return out;
}

std::vector<Action> baseline_buy_hold(std::size_t length, std::size_t first_tradable) {
  if (length == 0) throw EmptyInput("baseline_buy_hold: empty series");
  if (first_tradable >= length) throw InsufficientHistory("baseline_buy_hold: no tradable group");
  std::vector<Action> out(length, Action::Hold);
  out[first_tradable] = Action::Buy;
  return out;
}

std::vector<Action> baseline_macd(std::span<const GroupBar> bars, int fast, int slow, int signal) {
  const auto need = static_cast<std::size_t>(slow + signal);  // two defined signal points
  if (bars.size() < need) {
    throw InsufficientHistory("baseline_macd: need " + std::to_string(need) + " group bars");
  }
  const OhlcvArrays arrays = to_arrays(bars);
  const MacdSeries m = macd_series(arrays.close, fast, slow, signal);
  std::vector<Action> out(bars.size(), Action::Hold);
  for (Eigen::Index t = 1; t < arrays.size(); ++t) {
    if (std::isnan(m.signal[t - 1])) continue;
    const double prev = m.line[t - 1] - m.signal[t - 1];
    const double cur = m.line[t] - m.signal[t];
    if (prev <= 0.0 && cur > 0.0) out[static_cast<std::size_t>(t)] = Action::Buy;
    else if (prev >= 0.0 && cur < 0.0) out[static_cast<std::size_t>(t)] = Action::Sell;
  }
  return out;
}

AgentVariant baseline_plain_dqn(const AgentConfig& base, BaselineKind kind) {
  AgentVariant v{base, false};
  if (kind == BaselineKind::FeedforwardDqn) v.config.cell = CellKind::Dense;
  else v.config.cell = CellKind::Lstm;
  return v;
}

void write_signal_trace(std::ostream& out, std::span<const SignalTraceRow> rows) {
  out << "group_index,AR,BR,s1,s2,fused,executed,position,price\n";
  for (const SignalTraceRow& r : rows) {
    out << r.group_index << ',' << (r.arbr.ar ? format_real(*r.arbr.ar) : "") << ','
        << (r.arbr.br ? format_real(*r.arbr.br) : "") << ',' << action_code(r.signal.s1) << ','
        << action_code(r.signal.s2) << ',' << action_code(r.signal.fused) << ','
        << action_code(r.executed) << ',' << r.position << ',' << r.price.to_string() << '\n';
  }
}

}  // namespace drqn
