#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "drqn/decimal.hpp"

namespace drqn {

// Seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

// One raw 1-minute OHLCV record.
struct Bar {
  Timestamp timestamp = 0;
  Decimal open;
  Decimal high;
  Decimal low;
  Decimal close;
  Decimal volume;

  bool operator==(const Bar&) const = default;
};

// Positional aggregate of `member_count` consecutive bars.
struct GroupBar : Bar {
  std::size_t group_index = 0;
  std::size_t member_count = 0;

  bool operator==(const GroupBar&) const = default;
};

struct GroupedBars {
  std::vector<GroupBar> groups;
  // True when the last group holds fewer than group_size members.
  bool partial_tail = false;
};

struct InvariantViolation {
  std::size_t index = 0;
  std::string description;
};

struct ValidationReport {
  std::size_t bar_count = 0;
  // Intraday holes: consecutive bars on the same UTC date more than 60 s apart.
  std::size_t gap_count = 0;
  std::size_t duplicate_count = 0;
  std::size_t non_monotonic_count = 0;
  // Informational: bars whose open differs from the previous close.
  std::size_t open_close_mismatches = 0;
  std::vector<InvariantViolation> violations;
};

inline constexpr std::string_view kOhlcvHeader = "timestamp,open,high,low,close,volume";
inline constexpr std::string_view kGroupHeader =
    "timestamp,open,high,low,close,volume,group_index,member_count";
inline constexpr int kPriceDigits = 4;

// ISO-8601 ("2017-01-03T09:31:00Z", 'T' or ' ' separator, optional Z or
// +00:00 suffix) or integer epoch seconds.
std::optional<Timestamp> parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp ts);

// Parses the 1-minute input format. Prices are rounded to four fractional
// digits. Throws MalformedRow, NonMonotonicTimestamp or InvalidPrice with the
// 1-based line number of the offending row.
std::vector<Bar> parse_ohlcv_csv(std::istream& in);
std::vector<Bar> load_ohlcv_csv(const std::string& path);

GroupedBars group_bars(std::span<const Bar> bars, std::size_t group_size = 30);

ValidationReport validate_series(std::span<const Bar> bars);

void write_ohlcv_csv(std::ostream& out, std::span<const Bar> bars);
void write_group_csv(std::ostream& out, std::span<const GroupBar> groups);
std::vector<GroupBar> parse_group_csv(std::istream& in);

}  // namespace drqn
