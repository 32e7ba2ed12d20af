#include "drqn/backtest.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include <json.hpp>

#include "drqn/errors.hpp"

namespace drqn {

Portfolio Portfolio::open(const BacktestConfig& config) {
  Portfolio p;
  p.cash = config.initial_cash;
  p.lot_size = config.lot_size;
  return p;
}

Decimal Portfolio::equity(Decimal price) const {
  return cash + price * (static_cast<std::int64_t>(position) * lot_size);
}

std::optional<Fill> apply_fill(Portfolio& portfolio, Action action, Decimal price,
                               const BacktestConfig& config, std::size_t group_index,
                               Timestamp timestamp) {
  if (price <= Decimal{}) throw DataError("InvalidPrice", "apply_fill: price must be positive");
  const int min_position = config.allow_short ? -1 : 0;
  int target = portfolio.position;
  if (action == Action::Buy && portfolio.position < 1) target = portfolio.position + 1;
  if (action == Action::Sell && portfolio.position > min_position) target = portfolio.position - 1;
  if (target == portfolio.position) return std::nullopt;

  const Decimal notional = price * portfolio.lot_size;
  const Decimal fee = notional * config.fee_rate;
  Decimal cash = portfolio.cash;
  if (action == Action::Buy) {
    cash -= notional + fee;
    if (cash < Decimal{}) {
      throw InsufficientCash("apply_fill: buying " + notional.to_string() + " with cash " +
                             portfolio.cash.to_string());
    }
  } else {
    cash += notional - fee;
  }
  portfolio.cash = cash;
  portfolio.position = target;
  portfolio.fees_paid += fee;
  Fill fill{group_index, timestamp, action, price, notional, fee};
  portfolio.fills.push_back(fill);
  return fill;
}

BacktestResult run_backtest(std::span<const Action> actions, std::span<const GroupBar> bars,
                            const BacktestConfig& config, const std::string& name) {
  if (bars.empty()) throw EmptyInput("run_backtest: no group bars");
  if (actions.size() != bars.size()) {
    throw AlignmentError("run_backtest: " + std::to_string(actions.size()) + " actions for " +
                         std::to_string(bars.size()) + " group bars");
  }
  BacktestResult result;
  result.equity.reserve(bars.size());
  result.executed.reserve(bars.size());
  Portfolio portfolio = Portfolio::open(config);
  Decimal prev_equity = config.initial_cash;
  double peak = config.initial_cash.to_double();
  double max_dd = 0.0;
  for (std::size_t g = 0; g < bars.size(); ++g) {
    const GroupBar& bar = bars[g];
    const auto fill = apply_fill(portfolio, actions[g], bar.close, config, bar.group_index, bar.timestamp);
    result.executed.push_back(fill ? fill->side : Action::Hold);
    const Decimal equity = portfolio.equity(bar.close);
    result.equity.push_back({bar.group_index, bar.timestamp, bar.close, equity, portfolio.position,
                             (equity - prev_equity).to_double()});
    prev_equity = equity;
    const double e = equity.to_double();
    peak = std::max(peak, e);
    if (peak > 0.0) max_dd = std::max(max_dd, (peak - e) / peak);
  }
  result.fills = std::move(portfolio.fills);
  RunReport& r = result.report;
  r.name = name;
  r.initial_cash = config.initial_cash;
  r.final_equity = prev_equity;
  r.accumulated_income = prev_equity - config.initial_cash;
  r.trade_count = result.fills.size();
  r.fee_total = portfolio.fees_paid;
  r.max_drawdown = max_dd;
  r.first_group = bars.front().group_index;
  r.last_group = bars.back().group_index;
  return result;
}

BacktestResult run_streaming(const StrategyFn& strategy, std::span<const GroupBar> bars,
                             const BacktestConfig& config, const std::string& name) {
  std::vector<Action> actions;
  actions.reserve(bars.size());
  for (std::size_t g = 0; g < bars.size(); ++g) actions.push_back(strategy(bars.first(g + 1)));
  return run_backtest(actions, bars, config, name);
}

std::vector<RunReport> compare_runs(std::span<const RunReport> reports) {
  if (reports.size() < 2) throw MismatchedRange("compare_runs: need at least two reports");
  for (const RunReport& r : reports) {
    if (r.first_group != reports.front().first_group || r.last_group != reports.front().last_group) {
      throw MismatchedRange("compare_runs: report '" + r.name + "' covers groups " +
                            std::to_string(r.first_group) + ".." + std::to_string(r.last_group) +
                            ", expected " + std::to_string(reports.front().first_group) + ".." +
                            std::to_string(reports.front().last_group));
    }
  }
  std::vector<RunReport> ranked(reports.begin(), reports.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const RunReport& a, const RunReport& b) {
    return a.accumulated_income > b.accumulated_income;
  });
  return ranked;
}

std::string format_real(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

void write_equity_csv(std::ostream& out, std::span<const EquityPoint> points) {
  out << "group_index,timestamp,price,equity,position,reward\n";
  for (const EquityPoint& p : points) {
    out << p.group_index << ',' << format_timestamp(p.timestamp) << ',' << p.price.to_string() << ','
        << p.equity.to_string() << ',' << p.position << ',' << format_real(p.reward) << '\n';
  }
}

void write_fills_csv(std::ostream& out, std::span<const Fill> fills) {
  out << "timestamp,side,price,notional,fee\n";
  for (const Fill& f : fills) {
    out << format_timestamp(f.timestamp) << ',' << action_name(f.side) << ',' << f.price.to_string()
        << ',' << f.notional.to_string() << ',' << f.fee.to_string() << '\n';
  }
}

namespace {

nlohmann::ordered_json report_json(const RunReport& r) {
  nlohmann::ordered_json j;
  j["name"] = r.name;
  j["accumulated_income"] = r.accumulated_income.to_string();
  j["final_equity"] = r.final_equity.to_string();
  j["initial_cash"] = r.initial_cash.to_string();
  j["trade_count"] = r.trade_count;
  j["fee_total"] = r.fee_total.to_string();
  j["max_drawdown"] = format_real(r.max_drawdown);
  j["first_group"] = r.first_group;
  j["last_group"] = r.last_group;
  return j;
}

Decimal decimal_field(const nlohmann::json& j, const char* key) {
  const auto d = Decimal::parse(j.at(key).get<std::string>());
  if (!d) throw DataError("DataError", std::string("report: bad decimal in '") + key + "'");
  return *d;
}

}  // namespace

std::string report_to_json(const RunReport& report) { return report_json(report).dump(2) + "\n"; }

RunReport report_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    RunReport r;
    r.name = j.at("name").get<std::string>();
    r.accumulated_income = decimal_field(j, "accumulated_income");
    r.final_equity = decimal_field(j, "final_equity");
    r.initial_cash = decimal_field(j, "initial_cash");
    r.trade_count = j.at("trade_count").get<std::size_t>();
    r.fee_total = decimal_field(j, "fee_total");
    r.max_drawdown = std::stod(j.at("max_drawdown").get<std::string>());
    r.first_group = j.at("first_group").get<std::size_t>();
    r.last_group = j.at("last_group").get<std::size_t>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("DataError", std::string("report: ") + e.what());
  }
}

void write_ranking_csv(std::ostream& out, std::span<const RunReport> ranked) {
  out << "rank,name,accumulated_income,final_equity,trade_count,fee_total,max_drawdown,first_group,"
         "last_group\n";
  std::size_t rank = 1;
  for (const RunReport& r : ranked) {
    out << rank++ << ',' << r.name << ',' << r.accumulated_income.to_string() << ','
        << r.final_equity.to_string() << ',' << r.trade_count << ',' << r.fee_total.to_string() << ','
        << format_real(r.max_drawdown) << ',' << r.first_group << ',' << r.last_group << '\n';
  }
}

std::string ranking_to_json(std::span<const RunReport> ranked) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  std::size_t rank = 1;
  for (const RunReport& r : ranked) {
    nlohmann::ordered_json row;
    row["rank"] = rank++;
    const nlohmann::ordered_json fields = report_json(r);
    for (const auto& [k, v] : fields.items()) row[k] = v;
    arr.push_back(row);
  }
  return arr.dump(2) + "\n";
}

}  // namespace drqn
