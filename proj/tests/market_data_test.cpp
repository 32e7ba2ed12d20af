#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "drqn/errors.hpp"
#include "drqn/market_data.hpp"

using namespace drqn;

namespace {

std::vector<Bar> parse(const std::string& text) {
  std::istringstream in(text);
  return parse_ohlcv_csv(in);
}

Decimal d(const char* s) { return *Decimal::parse(s); }

std::vector<Bar> random_bars(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<int> step(-50, 50), wick(0, 30), vol(0, 5000);
  std::vector<Bar> bars;
  std::int64_t price = 100'000;  // 10.0000 in 1e-4 units
  for (std::size_t i = 0; i < n; ++i) {
    Bar b;
    b.timestamp = 1'483'435'860 + static_cast<std::int64_t>(i) * 60;
    const std::int64_t open = price;
    price = std::max<std::int64_t>(1000, price + step(gen));
    const std::int64_t close = price;
    b.open = Decimal::from_units(open * 10'000);
    b.close = Decimal::from_units(close * 10'000);
    b.high = Decimal::from_units((std::max(open, close) + wick(gen)) * 10'000);
    b.low = Decimal::from_units((std::min(open, close) - wick(gen)) * 10'000);
    b.volume = Decimal::from_int(vol(gen));
    bars.push_back(b);
  }
  return bars;
}

}  // namespace

TEST(ParseCsv, SingleRow) {
  const auto bars = parse("timestamp,open,high,low,close,volume\n2017-01-03T09:31:00Z,10.0,10.1,9.9,10.05,1200\n");
  ASSERT_EQ(bars.size(), 1u);
  EXPECT_EQ(bars[0].close, d("10.05"));
  EXPECT_EQ(bars[0].volume, d("1200"));
  EXPECT_EQ(bars[0].timestamp, 1483435860);
}

TEST(ParseCsv, TimestampForms) {
  EXPECT_EQ(parse_timestamp("2017-01-03T09:31:00Z"), 1483435860);
  EXPECT_EQ(parse_timestamp("2017-01-03 09:31:00"), 1483435860);
  EXPECT_EQ(parse_timestamp("2017-01-03T09:31:00+00:00"), 1483435860);
  EXPECT_EQ(parse_timestamp("1483435860"), 1483435860);
  EXPECT_FALSE(parse_timestamp("2017-13-03T09:31:00Z"));
  EXPECT_FALSE(parse_timestamp("yesterday"));
  EXPECT_EQ(format_timestamp(1483435860), "2017-01-03T09:31:00Z");
}

TEST(ParseCsv, PricesRoundToFourDigits) {
  const auto bars = parse("timestamp,open,high,low,close,volume\n1,10.00004,10.1,9.9,10.00005,1\n");
  EXPECT_EQ(bars[0].open.to_string(), "10");
  EXPECT_EQ(bars[0].close.to_string(), "10.0001");
}

TEST(ParseCsv, EqualTimestampsRejected) {
  try {
    parse("timestamp,open,high,low,close,volume\n1,10,10,10,10,1\n1,10,10,10,10,1\n");
    FAIL();
  } catch (const NonMonotonicTimestamp& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(ParseCsv, HighBelowLowRejected) {
  try {
    parse("timestamp,open,high,low,close,volume\n1,9.5,9.0,10.0,9.5,1\n");
    FAIL();
  } catch (const InvalidPrice& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(ParseCsv, MalformedRows) {
  EXPECT_THROW(parse("timestamp,open,high,low,close,volume\n1,10,10,10\n"), MalformedRow);
  EXPECT_THROW(parse("time,open,high,low,close,volume\n1,10,10,10,10,1\n"), MalformedRow);
  EXPECT_THROW(parse("timestamp,open,high,low,close,volume\nnever,10,10,10,10,1\n"), MalformedRow);
  EXPECT_THROW(parse("timestamp,open,high,low,close,volume\n1,x,10,10,10,1\n"), MalformedRow);
  EXPECT_THROW(parse("timestamp,open,high,low,close,volume\n1,0,0,0,0,1\n"), InvalidPrice);
  EXPECT_THROW(parse("timestamp,open,high,low,close,volume\n1,10,10,10,10,-1\n"), InvalidPrice);
}

TEST(GroupBars, SixtyBars) {
  const auto bars = random_bars(60, 1);
  const auto g = group_bars(bars, 30);
  ASSERT_EQ(g.groups.size(), 2u);
  EXPECT_FALSE(g.partial_tail);
  EXPECT_EQ(g.groups[0].open, bars[0].open);
  EXPECT_EQ(g.groups[0].close, bars[29].close);
  EXPECT_EQ(g.groups[1].group_index, 1u);
}

TEST(GroupBars, PartialTail) {
  const auto g = group_bars(random_bars(61, 2), 30);
  ASSERT_EQ(g.groups.size(), 3u);
  EXPECT_TRUE(g.partial_tail);
  EXPECT_EQ(g.groups.back().member_count, 1u);
}

TEST(GroupBars, HighsAreMemberMax) {
  auto bars = random_bars(4, 3);
  const char* highs[] = {"10", "12", "11", "13"};
  for (int i = 0; i < 4; ++i) {
    bars[i].open = bars[i].close = bars[i].low = d("9");
    bars[i].high = d(highs[i]);
  }
  const auto g = group_bars(bars, 2);
  ASSERT_EQ(g.groups.size(), 2u);
  EXPECT_EQ(g.groups[0].high, d("12"));
  EXPECT_EQ(g.groups[1].high, d("13"));
}

TEST(GroupBars, EmptyInputThrows) {
  EXPECT_THROW(group_bars({}, 30), EmptyInput);
}

TEST(GroupBars, BruteForceAggregates) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t n = 50 + seed * 37;
    const std::size_t size = 1 + seed % 31;
    const auto bars = random_bars(n, seed);
    const auto g = group_bars(bars, size);
    ASSERT_EQ(g.groups.size(), (n + size - 1) / size);
    for (std::size_t k = 0; k < g.groups.size(); ++k) {
      const std::size_t lo = k * size, hi = std::min(n, lo + size);
      Decimal high = bars[lo].high, low = bars[lo].low, vol;
      for (std::size_t i = lo; i < hi; ++i) {
        high = std::max(high, bars[i].high);
        low = std::min(low, bars[i].low);
        vol += bars[i].volume;
      }
      EXPECT_EQ(g.groups[k].open, bars[lo].open);
      EXPECT_EQ(g.groups[k].close, bars[hi - 1].close);
      EXPECT_EQ(g.groups[k].high, high);
      EXPECT_EQ(g.groups[k].low, low);
      EXPECT_EQ(g.groups[k].volume, vol);
      EXPECT_EQ(g.groups[k].member_count, hi - lo);
      EXPECT_EQ(g.groups[k].timestamp, bars[lo].timestamp);
    }
  }
}

TEST(GroupBars, CsvRoundTrip) {
  const auto g = group_bars(random_bars(500, 9), 30);
  std::stringstream ss;
  write_group_csv(ss, g.groups);
  EXPECT_EQ(parse_group_csv(ss), g.groups);
}

TEST(OhlcvCsv, RoundTrip) {
  const auto bars = random_bars(300, 4);
  std::stringstream ss;
  write_ohlcv_csv(ss, bars);
  EXPECT_EQ(parse_ohlcv_csv(ss), bars);
}

TEST(Validate, CleanDay) {
  const auto bars = random_bars(390, 5);
  const auto r = validate_series(bars);
  EXPECT_EQ(r.bar_count, 390u);
  EXPECT_TRUE(r.violations.empty());
  EXPECT_EQ(r.gap_count, 0u);
}

TEST(Validate, FiveMinuteHole) {
  auto bars = random_bars(100, 6);
  for (std::size_t i = 50; i < bars.size(); ++i) bars[i].timestamp += 240;
  EXPECT_EQ(validate_series(bars).gap_count, 1u);
}

TEST(Validate, LowAboveHigh) {
  auto bars = random_bars(10, 7);
  bars[4].low = bars[4].high + d("1");
  const auto r = validate_series(bars);
  EXPECT_EQ(r.violations.size(), 1u);
  EXPECT_EQ(r.violations[0].index, 4u);
}

TEST(Validate, DuplicatesAndOrder) {
  auto bars = random_bars(10, 8);
  bars[3].timestamp = bars[2].timestamp;
  bars[7].timestamp = bars[5].timestamp - 1;
  const auto r = validate_series(bars);
  EXPECT_EQ(r.duplicate_count, 1u);
  EXPECT_EQ(r.non_monotonic_count, 1u);
}
