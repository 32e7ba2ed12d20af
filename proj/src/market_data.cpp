#include "drqn/market_data.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "drqn/errors.hpp"

namespace drqn {
namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_fixed_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  int v = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
    v = v * 10 + (s[i] - '0');
  }
  out = v;
  return true;
}

// Shared row parser for the bar and group formats. `extra` receives the
// columns after volume.
Bar parse_bar_fields(const std::vector<std::string_view>& fields, std::size_t line_no) {
  const auto ts = parse_timestamp(trim(fields[0]));
  if (!ts) throw MalformedRow(line_no, "unparseable timestamp");

  static constexpr const char* kNames[] = {"open", "high", "low", "close", "volume"};
  Decimal values[5];
  for (std::size_t k = 0; k < 5; ++k) {
    const auto v = Decimal::parse(trim(fields[k + 1]));
    if (!v) throw MalformedRow(line_no, std::string("unparseable ") + kNames[k]);
    values[k] = *v;
  }
  Bar bar;
  bar.timestamp = *ts;
  bar.open = values[0].rounded(kPriceDigits);
  bar.high = values[1].rounded(kPriceDigits);
  bar.low = values[2].rounded(kPriceDigits);
  bar.close = values[3].rounded(kPriceDigits);
  bar.volume = values[4];

  const Decimal zero;
  if (bar.open <= zero) throw InvalidPrice(line_no, "open");
  if (bar.high <= zero) throw InvalidPrice(line_no, "high");
  if (bar.low <= zero) throw InvalidPrice(line_no, "low");
  if (bar.close <= zero) throw InvalidPrice(line_no, "close");
  if (bar.volume < zero) throw InvalidPrice(line_no, "volume");
  if (bar.high < std::max(bar.open, bar.close)) throw InvalidPrice(line_no, "high");
  if (bar.low > std::min(bar.open, bar.close)) throw InvalidPrice(line_no, "low");
  return bar;
}

template <typename Row, typename RowFn>
std::vector<Row> parse_rows(std::istream& in, std::string_view header, std::size_t columns,
                            RowFn&& make_row) {
  std::vector<Row> rows;
  std::string line;
  std::size_t line_no = 0;
  bool saw_header = false;
  std::optional<Timestamp> last_ts;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (!saw_header) {
      if (view != header) throw MalformedRow(line_no, "expected header '" + std::string(header) + "'");
      saw_header = true;
      continue;
    }
    if (view.empty()) continue;
    const auto fields = split_fields(view);
    if (fields.size() != columns) {
      throw MalformedRow(line_no, "expected " + std::to_string(columns) + " fields, got " +
                                      std::to_string(fields.size()));
    }
    Row row = make_row(fields, line_no);
    if (last_ts && row.timestamp <= *last_ts) throw NonMonotonicTimestamp(line_no);
    last_ts = row.timestamp;
    rows.push_back(std::move(row));
  }
  if (!saw_header) throw MalformedRow(1, "missing header");
  return rows;
}

}  // namespace

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  const bool is_integer =
      std::all_of(text.begin() + ((text[0] == '-') ? 1 : 0), text.end(),
                  [](char c) { return c >= '0' && c <= '9'; }) &&
      text.size() > ((text[0] == '-') ? 1u : 0u);
  if (is_integer) {
    Timestamp v = 0;
    const bool neg = text[0] == '-';
    for (std::size_t i = neg ? 1 : 0; i < text.size(); ++i) {
      if (v > (INT64_MAX - 9) / 10) return std::nullopt;
      v = v * 10 + (text[i] - '0');
    }
    return neg ? -v : v;
  }
  // YYYY-MM-DDTHH:MM:SS
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  if (text.size() < 19) return std::nullopt;
  if (!parse_fixed_int(text, 0, 4, y) || text[4] != '-' || !parse_fixed_int(text, 5, 2, mo) ||
      text[7] != '-' || !parse_fixed_int(text, 8, 2, d) || (text[10] != 'T' && text[10] != ' ') ||
      !parse_fixed_int(text, 11, 2, h) || text[13] != ':' || !parse_fixed_int(text, 14, 2, mi) ||
      text[16] != ':' || !parse_fixed_int(text, 17, 2, s)) {
    return std::nullopt;
  }
  const std::string_view suffix = text.substr(19);
  if (!(suffix.empty() || suffix == "Z" || suffix == "+00:00")) return std::nullopt;
  if (h > 23 || mi > 59 || s > 59) return std::nullopt;
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return static_cast<Timestamp>(days) * 86400 + h * 3600 + mi * 60 + s;
}

std::string format_timestamp(Timestamp ts) {
  using namespace std::chrono;
  Timestamp days = ts / 86400;
  Timestamp rem = ts % 86400;
  if (rem < 0) {
    rem += 86400;
    days -= 1;
  }
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(rem / 3600), static_cast<int>((rem % 3600) / 60),
                static_cast<int>(rem % 60));
  return buf;
}

std::vector<Bar> parse_ohlcv_csv(std::istream& in) {
  return parse_rows<Bar>(in, kOhlcvHeader, 6, [](const auto& fields, std::size_t line_no) {
    return parse_bar_fields(fields, line_no);
  });
}

std::vector<Bar> load_ohlcv_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("DataError", "cannot open data file '" + path + "'");
  return parse_ohlcv_csv(in);
}

GroupedBars group_bars(std::span<const Bar> bars, std::size_t group_size) {
  if (bars.empty()) throw EmptyInput("group_bars: no bars");
  if (group_size == 0) throw DataError("DataError", "group_bars: group_size must be >= 1");
  GroupedBars out;
  out.groups.reserve((bars.size() + group_size - 1) / group_size);
  for (std::size_t start = 0; start < bars.size(); start += group_size) {
    const std::size_t end = std::min(bars.size(), start + group_size);
    GroupBar g;
    g.timestamp = bars[start].timestamp;
    g.open = bars[start].open;
    g.close = bars[end - 1].close;
    g.high = bars[start].high;
    g.low = bars[start].low;
    for (std::size_t i = start; i < end; ++i) {
      g.high = std::max(g.high, bars[i].high);
      g.low = std::min(g.low, bars[i].low);
      g.volume += bars[i].volume;
    }
    g.group_index = out.groups.size();
    g.member_count = end - start;
    out.groups.push_back(g);
  }
  out.partial_tail = out.groups.back().member_count < group_size;
  return out;
}

ValidationReport validate_series(std::span<const Bar> bars) {
  ValidationReport report;
  report.bar_count = bars.size();
  const Decimal zero;
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const Bar& b = bars[i];
    if (b.open <= zero || b.high <= zero || b.low <= zero || b.close <= zero) {
      report.violations.push_back({i, "non-positive price"});
    }
    if (b.volume < zero) report.violations.push_back({i, "negative volume"});
    if (b.low > std::min(b.open, b.close) || b.high < std::max(b.open, b.close) || b.low > b.high) {
      report.violations.push_back({i, "low/high do not bracket open/close"});
    }
    if (i == 0) continue;
    const Bar& prev = bars[i - 1];
    if (b.timestamp == prev.timestamp) {
      ++report.duplicate_count;
    } else if (b.timestamp < prev.timestamp) {
      ++report.non_monotonic_count;
    } else if (b.timestamp - prev.timestamp > 60) {
      const auto day_of = [](Timestamp t) { return t >= 0 ? t / 86400 : (t - 86399) / 86400; };
      if (day_of(b.timestamp) == day_of(prev.timestamp)) ++report.gap_count;
    }
    if (b.open != prev.close) ++report.open_close_mismatches;
  }
  return report;
}

void write_ohlcv_csv(std::ostream& out, std::span<const Bar> bars) {
  out << kOhlcvHeader << '\n';
  for (const Bar& b : bars) {
    out << format_timestamp(b.timestamp) << ',' << b.open.to_string() << ',' << b.high.to_string()
        << ',' << b.low.to_string() << ',' << b.close.to_string() << ',' << b.volume.to_string()
        << '\n';
  }
}

void write_group_csv(std::ostream& out, std::span<const GroupBar> groups) {
  out << kGroupHeader << '\n';
  for (const GroupBar& g : groups) {
    out << format_timestamp(g.timestamp) << ',' << g.open.to_string() << ',' << g.high.to_string()
        << ',' << g.low.to_string() << ',' << g.close.to_string() << ',' << g.volume.to_string()
        << ',' << g.group_index << ',' << g.member_count << '\n';
  }
}

std::vector<GroupBar> parse_group_csv(std::istream& in) {
  return parse_rows<GroupBar>(in, kGroupHeader, 8, [](const auto& fields, std::size_t line_no) {
    GroupBar g;
    static_cast<Bar&>(g) = parse_bar_fields(fields, line_no);
    const auto index = Decimal::parse(trim(fields[6]));
    const auto count = Decimal::parse(trim(fields[7]));
    if (!index || !count || index->units() < 0 || count->units() <= 0 ||
        index->units() % Decimal::kScale != 0 || count->units() % Decimal::kScale != 0) {
      throw MalformedRow(line_no, "bad group_index/member_count");
    }
    g.group_index = static_cast<std::size_t>(index->units() / Decimal::kScale);
    g.member_count = static_cast<std::size_t>(count->units() / Decimal::kScale);
    return g;
  });
}

}  // namespace drqn
