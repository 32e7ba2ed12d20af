#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "drqn/backtest.hpp"
#include "drqn/errors.hpp"
#include "drqn/random.hpp"

using namespace drqn;

namespace {

Decimal d(const char* s) { return *Decimal::parse(s); }

std::vector<GroupBar> closes(const std::vector<const char*>& prices) {
  std::vector<GroupBar> out;
  for (std::size_t i = 0; i < prices.size(); ++i) {
    GroupBar b;
    b.open = b.high = b.low = b.close = d(prices[i]);
    b.group_index = i;
    b.timestamp = 1'483'435'800 + static_cast<Timestamp>(i) * 1800;
    out.push_back(b);
  }
  return out;
}

std::vector<GroupBar> random_closes(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<int> step(-300, 300);
  std::vector<GroupBar> out;
  std::int64_t p = 200'000;  // 20.0000
  for (std::size_t i = 0; i < n; ++i) {
    p = std::clamp<std::int64_t>(p + step(gen), 50'000, 400'000);
    GroupBar b;
    b.open = b.high = b.low = b.close = Decimal::from_units(p * 10'000);
    b.group_index = i;
    b.timestamp = static_cast<Timestamp>(i) * 1800;
    out.push_back(b);
  }
  return out;
}

}  // namespace

TEST(ApplyFill, BuyWhenFlat) {
  BacktestConfig cfg;
  Portfolio p = Portfolio::open(cfg);
  const auto fill = apply_fill(p, Action::Buy, d("10.00"), cfg);
  ASSERT_TRUE(fill);
  EXPECT_EQ(fill->notional, d("1000"));
  EXPECT_EQ(fill->fee, d("1"));
  EXPECT_EQ(p.cash, d("98999"));
  EXPECT_EQ(p.position, 1);
}

TEST(ApplyFill, DisallowedTransitionsAreNoOps) {
  BacktestConfig cfg;
  Portfolio p = Portfolio::open(cfg);
  EXPECT_FALSE(apply_fill(p, Action::Sell, d("10"), cfg));
  EXPECT_FALSE(apply_fill(p, Action::Hold, d("10"), cfg));
  apply_fill(p, Action::Buy, d("10"), cfg);
  const Decimal cash = p.cash;
  EXPECT_FALSE(apply_fill(p, Action::Buy, d("12"), cfg));
  EXPECT_EQ(p.cash, cash);
  EXPECT_EQ(p.fees_paid, d("1"));
  EXPECT_EQ(p.fills.size(), 1u);
}

TEST(ApplyFill, RoundTripCostsTwoFees) {
  BacktestConfig cfg;
  Portfolio p = Portfolio::open(cfg);
  apply_fill(p, Action::Buy, d("10.00"), cfg);
  apply_fill(p, Action::Sell, d("10.00"), cfg);
  EXPECT_EQ(cfg.initial_cash - p.cash, d("2"));
  EXPECT_EQ(p.position, 0);
}

TEST(ApplyFill, Shorting) {
  BacktestConfig cfg;
  cfg.allow_short = true;
  Portfolio p = Portfolio::open(cfg);
  ASSERT_TRUE(apply_fill(p, Action::Sell, d("10"), cfg));
  EXPECT_EQ(p.position, -1);
  EXPECT_EQ(p.cash, d("100999"));
  EXPECT_FALSE(apply_fill(p, Action::Sell, d("10"), cfg));
  ASSERT_TRUE(apply_fill(p, Action::Buy, d("9"), cfg));
  EXPECT_EQ(p.position, 0);
  EXPECT_EQ(p.cash, d("100999") - d("900.9"));
}

TEST(ApplyFill, InsufficientCash) {
  BacktestConfig cfg;
  cfg.initial_cash = d("1000");
  Portfolio p = Portfolio::open(cfg);
  EXPECT_THROW(apply_fill(p, Action::Buy, d("10"), cfg), InsufficientCash);
  EXPECT_EQ(p.position, 0);
  EXPECT_EQ(p.cash, d("1000"));
  cfg.initial_cash = d("1001");
  p = Portfolio::open(cfg);
  EXPECT_TRUE(apply_fill(p, Action::Buy, d("10"), cfg));
  EXPECT_EQ(p.cash, Decimal{});
}

TEST(RunBacktest, AllHold) {
  const auto bars = random_closes(100, 1);
  const std::vector<Action> holds(100, Action::Hold);
  const auto r = run_backtest(holds, bars, {});
  EXPECT_EQ(r.report.trade_count, 0u);
  for (const auto& e : r.equity) EXPECT_EQ(e.equity, d("100000"));
  EXPECT_EQ(r.report.accumulated_income, Decimal{});
  EXPECT_EQ(r.report.max_drawdown, 0.0);
}

TEST(RunBacktest, BuyAndHoldHandAccounting) {
  const auto bars = closes({"10", "11"});
  const std::vector<Action> a{Action::Buy, Action::Hold};
  const auto r = run_backtest(a, bars, {});
  EXPECT_EQ(r.report.final_equity, d("100099"));
  EXPECT_EQ(r.report.accumulated_income, d("99"));
  EXPECT_EQ(r.report.fee_total, d("1"));
  EXPECT_EQ(r.equity[0].equity, d("99999"));
  EXPECT_DOUBLE_EQ(r.equity[0].reward, -1.0);
  EXPECT_DOUBLE_EQ(r.equity[1].reward, 100.0);
}

TEST(RunBacktest, AlignmentAndEmpty) {
  const auto bars = closes({"10", "11"});
  const std::vector<Action> one{Action::Buy};
  EXPECT_THROW(run_backtest(one, bars, {}), AlignmentError);
  EXPECT_THROW(run_backtest({}, {}, {}), EmptyInput);
}

TEST(RunBacktest, FuzzAccountingIdentityAndFeeTotality) {
  for (bool shorting : {false, true}) {
    BacktestConfig cfg;
    cfg.allow_short = shorting;
    const auto bars = random_closes(10'000, 2);
    Rng rng(3);
    std::vector<Action> actions;
    for (std::size_t i = 0; i < bars.size(); ++i) actions.push_back(kActionOrder[rng.uniform_index(3)]);
    const auto r = run_backtest(actions, bars, cfg);

    // Replay the fills independently, integer units of 1e-8.
    std::int64_t cash = cfg.initial_cash.units();
    int position = 0;
    std::size_t next_fill = 0;
    std::int64_t notional_total = 0, fee_total = 0;
    double reward_sum = 0;
    for (std::size_t g = 0; g < bars.size(); ++g) {
      if (next_fill < r.fills.size() && r.fills[next_fill].group_index == g) {
        const Fill& f = r.fills[next_fill++];
        EXPECT_EQ(f.price, bars[g].close);
        const std::int64_t notional = bars[g].close.units() * 100;
        ASSERT_EQ(f.notional.units(), notional);
        ASSERT_EQ(f.fee.units() * 1000, notional);  // exactly 0.1%
        notional_total += notional;
        fee_total += f.fee.units();
        if (f.side == Action::Buy) {
          cash -= notional + f.fee.units();
          ++position;
        } else {
          cash += notional - f.fee.units();
          --position;
        }
      }
      ASSERT_GE(position, shorting ? -1 : 0);
      ASSERT_LE(position, 1);
      ASSERT_EQ(r.equity[g].position, position);
      ASSERT_EQ(r.equity[g].equity.units(), cash + position * 100 * bars[g].close.units());
      reward_sum += r.equity[g].reward;
    }
    EXPECT_EQ(next_fill, r.fills.size());
    EXPECT_EQ(r.report.fee_total.units(), fee_total);
    EXPECT_EQ(fee_total * 1000, notional_total);
    EXPECT_EQ(r.report.accumulated_income, r.report.final_equity - cfg.initial_cash);
    EXPECT_NEAR(reward_sum, r.report.accumulated_income.to_double(), 1e-6);
  }
}

TEST(RunBacktest, ExecutedActionsMatchFills) {
  const auto bars = random_closes(500, 4);
  Rng rng(5);
  std::vector<Action> actions;
  for (std::size_t i = 0; i < bars.size(); ++i) actions.push_back(kActionOrder[rng.uniform_index(3)]);
  const auto r = run_backtest(actions, bars, {});
  std::size_t k = 0;
  for (std::size_t g = 0; g < bars.size(); ++g) {
    if (r.executed[g] != Action::Hold) {
      ASSERT_LT(k, r.fills.size());
      EXPECT_EQ(r.fills[k].group_index, g);
      EXPECT_EQ(r.fills[k].side, r.executed[g]);
      EXPECT_EQ(actions[g], r.executed[g]);
      ++k;
    }
  }
  EXPECT_EQ(k, r.fills.size());
}

TEST(Streaming, NoLookAhead) {
  // A momentum rule over the visible history.
  const StrategyFn rule = [](std::span<const GroupBar> h) {
    if (h.size() < 3) return Action::Hold;
    const auto& a = h[h.size() - 3];
    const auto& c = h.back();
    return c.close > a.close ? Action::Buy : (c.close < a.close ? Action::Sell : Action::Hold);
  };
  const auto bars = random_closes(300, 6);
  const auto base = run_streaming(rule, bars, {});
  for (std::size_t g : {10u, 100u, 250u}) {
    auto tampered = bars;
    for (std::size_t i = g + 1; i < tampered.size(); ++i) tampered[i].close = tampered[i].close * 3;
    const auto t = run_streaming(rule, tampered, {});
    for (std::size_t i = 0; i <= g; ++i) {
      ASSERT_EQ(t.executed[i], base.executed[i]) << i;
      ASSERT_EQ(t.equity[i].equity, base.equity[i].equity) << i;
    }
  }
  std::size_t longest_seen = 0;
  run_streaming([&](std::span<const GroupBar> h) {
    EXPECT_EQ(h.size(), longest_seen + 1);
    longest_seen = h.size();
    return Action::Hold;
  }, bars, {});
  EXPECT_EQ(longest_seen, bars.size());
}

TEST(CompareRuns, RankingAndErrors) {
  const auto bars = closes({"10", "10.5", "11", "12"});
  const auto bh = run_backtest(std::vector<Action>{Action::Buy, Action::Hold, Action::Hold, Action::Hold}, bars, {}, "buy_hold");
  const auto hold = run_backtest(std::vector<Action>(4, Action::Hold), bars, {}, "hold");
  const std::vector<RunReport> reports{hold.report, bh.report};
  const auto ranked = compare_runs(reports);
  EXPECT_EQ(ranked[0].name, "buy_hold");
  EXPECT_EQ(ranked[1].name, "hold");

  auto twin = hold.report;
  twin.name = "twin";
  const std::vector<RunReport> same{hold.report, twin};
  const auto r2 = compare_runs(same);
  EXPECT_EQ(r2[0].name, "hold");
  EXPECT_EQ(r2[1].name, "twin");

  const std::vector<RunReport> single{hold.report};
  EXPECT_THROW(compare_runs(single), MismatchedRange);
  auto shifted = bh.report;
  shifted.first_group = 1;
  const std::vector<RunReport> mismatched{hold.report, shifted};
  EXPECT_THROW(compare_runs(mismatched), MismatchedRange);
}

TEST(CompareRuns, FourStrategySchema) {
  const auto bars = random_closes(200, 7);
  std::vector<RunReport> reports;
  for (int k = 0; k < 4; ++k) {
    Rng rng(static_cast<std::uint64_t>(k));
    std::vector<Action> a;
    for (std::size_t i = 0; i < bars.size(); ++i) a.push_back(kActionOrder[rng.uniform_index(3)]);
    reports.push_back(run_backtest(a, bars, {}, "s" + std::to_string(k)).report);
  }
  const auto ranked = compare_runs(reports);
  std::ostringstream csv;
  write_ranking_csv(csv, ranked);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "rank,name,accumulated_income,final_equity,trade_count,fee_total,max_drawdown,first_group,last_group");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 4);
  for (std::size_t i = 1; i < ranked.size(); ++i) EXPECT_GE(ranked[i - 1].accumulated_income, ranked[i].accumulated_income);
}

TEST(Reports, JsonRoundTripAndStableOutput) {
  const auto bars = random_closes(50, 8);
  std::vector<Action> a(50, Action::Hold);
  a[3] = Action::Buy;
  a[30] = Action::Sell;
  const auto r = run_backtest(a, bars, {}, "x");
  const std::string json = report_to_json(r.report);
  const RunReport back = report_from_json(json);
  EXPECT_EQ(back.name, "x");
  EXPECT_EQ(back.accumulated_income, r.report.accumulated_income);
  EXPECT_EQ(back.final_equity, r.report.final_equity);
  EXPECT_EQ(back.fee_total, r.report.fee_total);
  EXPECT_EQ(back.trade_count, 2u);
  EXPECT_EQ(report_to_json(back), json);
  EXPECT_THROW(report_from_json("{}"), DataError);
  EXPECT_THROW(report_from_json("not json"), DataError);

  std::ostringstream eq, fills;
  write_equity_csv(eq, r.equity);
  write_fills_csv(fills, r.fills);
  EXPECT_EQ(eq.str().substr(0, eq.str().find('\n')), "group_index,timestamp,price,equity,position,reward");
  EXPECT_EQ(fills.str().substr(0, fills.str().find('\n')), "timestamp,side,price,notional,fee");
}
