#include "drqn/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "drqn/errors.hpp"

namespace drqn {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum Column : int {
  kSma5, kSma10, kSma20, kEma12, kEma26, kMacd, kMacdSignal, kMacdHist, kRsi14, kMfi14,
  kMom10, kRoc10, kBbPctB, kBbWidth, kStochK, kStochD, kAtr14, kObvD10, kVolRatio, kWillR
};

double ema_alpha(int period) { return 2.0 / (period + 1.0); }

double ema_step(double prev, double x, double alpha) { return alpha * x + (1.0 - alpha) * prev; }

// Wilder smoothing step for a 14-period average.
double wilder_step(double prev, double x, int period) {
  return (prev * (period - 1) + x) / period;
}

double rsi_from(double avg_gain, double avg_loss) {
  if (avg_loss == 0.0) return avg_gain == 0.0 ? 50.0 : 100.0;
  const double rs = avg_gain / avg_loss;
  return 100.0 - 100.0 / (1.0 + rs);
}

double mfi_from(double pos, double neg) {
  if (neg == 0.0) return pos == 0.0 ? 50.0 : 100.0;
  return 100.0 * pos / (pos + neg);
}

double true_range(const OhlcvArrays& s, Eigen::Index i) {
  const double pc = s.close[i - 1];
  return std::max({s.high[i] - s.low[i], std::fabs(s.high[i] - pc), std::fabs(s.low[i] - pc)});
}

double typical(const OhlcvArrays& s, Eigen::Index i) {
  return (s.high[i] + s.low[i] + s.close[i]) / 3.0;
}

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

struct Bollinger {
  double pct_b;
  double width;
};

Bollinger bollinger(const Eigen::ArrayXd& close, Eigen::Index at, int period) {
  double sum = 0.0;
  for (Eigen::Index i = at - period + 1; i <= at; ++i) sum += close[i];
  const double mean = sum / period;
  double ss = 0.0;
  for (Eigen::Index i = at - period + 1; i <= at; ++i) ss += (close[i] - mean) * (close[i] - mean);
  const double sd = std::sqrt(ss / period);
  const double upper = mean + 2.0 * sd;
  const double lower = mean - 2.0 * sd;
  const double range = upper - lower;
  if (range <= kZScoreFlatTolerance * std::max(1.0, std::fabs(mean))) return {0.5, 0.0};
  return {(close[at] - lower) / range, range / mean};
}

double stochastic_k(double close, double hh, double ll) {
  const double range = hh - ll;
  return range == 0.0 ? 50.0 : 100.0 * (close - ll) / range;
}

double williams_r(double close, double hh, double ll) {
  const double range = hh - ll;
  return range == 0.0 ? -50.0 : -100.0 * (hh - close) / range;
}

double volume_ratio(double volume, double mean_volume) {
  return mean_volume == 0.0 ? 1.0 : volume / mean_volume;
}

// ---- from-scratch evaluation helpers -------------------------------------

double window_mean(const Eigen::ArrayXd& x, Eigen::Index at, int period) {
  double sum = 0.0;
  for (Eigen::Index i = at - period + 1; i <= at; ++i) sum += x[i];
  return sum / period;
}

double window_max(const Eigen::ArrayXd& x, Eigen::Index at, int period) {
  double m = x[at];
  for (Eigen::Index i = at - period + 1; i <= at; ++i) m = std::max(m, x[i]);
  return m;
}

double window_min(const Eigen::ArrayXd& x, Eigen::Index at, int period) {
  double m = x[at];
  for (Eigen::Index i = at - period + 1; i <= at; ++i) m = std::min(m, x[i]);
  return m;
}

// EMA seeded with the simple mean of x[start .. start+period-1].
double ema_at(const Eigen::ArrayXd& x, Eigen::Index start, int period, Eigen::Index at) {
  double e = window_mean(x, start + period - 1, period);
  const double a = ema_alpha(period);
  for (Eigen::Index i = start + period; i <= at; ++i) e = ema_step(e, x[i], a);
  return e;
}

double wilder_rsi_at(const Eigen::ArrayXd& close, Eigen::Index at, int period) {
  double gain = 0.0, loss = 0.0;
  for (Eigen::Index i = 1; i <= period; ++i) {
    const double d = close[i] - close[i - 1];
    gain += std::max(d, 0.0);
    loss += std::max(-d, 0.0);
  }
  gain /= period;
  loss /= period;
  for (Eigen::Index i = period + 1; i <= at; ++i) {
    const double d = close[i] - close[i - 1];
    gain = wilder_step(gain, std::max(d, 0.0), period);
    loss = wilder_step(loss, std::max(-d, 0.0), period);
  }
  return rsi_from(gain, loss);
}

double wilder_atr_at(const OhlcvArrays& s, Eigen::Index at, int period) {
  double atr = 0.0;
  for (Eigen::Index i = 1; i <= period; ++i) atr += true_range(s, i);
  atr /= period;
  for (Eigen::Index i = period + 1; i <= at; ++i) atr = wilder_step(atr, true_range(s, i), period);
  return atr;
}

double mfi_at(const OhlcvArrays& s, Eigen::Index at, int period) {
  double pos = 0.0, neg = 0.0;
  for (Eigen::Index i = at - period + 1; i <= at; ++i) {
    const double tp = typical(s, i);
    const double prev = typical(s, i - 1);
    const double flow = tp * s.volume[i];
    if (tp > prev) pos += flow;
    else if (tp < prev) neg += flow;
  }
  return mfi_from(pos, neg);
}

double stochastic_k_at(const OhlcvArrays& s, Eigen::Index at, int period) {
  return stochastic_k(s.close[at], window_max(s.high, at, period), window_min(s.low, at, period));
}

}  // namespace

OhlcvArrays to_arrays(std::span<const GroupBar> bars) {
  const auto n = static_cast<Eigen::Index>(bars.size());
  OhlcvArrays s{Eigen::ArrayXd(n), Eigen::ArrayXd(n), Eigen::ArrayXd(n), Eigen::ArrayXd(n),
                Eigen::ArrayXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const GroupBar& b = bars[static_cast<std::size_t>(i)];
    s.open[i] = b.open.to_double();
    s.high[i] = b.high.to_double();
    s.low[i] = b.low.to_double();
    s.close[i] = b.close.to_double();
    s.volume[i] = b.volume.to_double();
  }
  return s;
}

std::vector<double> log_returns(std::span<const double> closes, std::size_t count) {
  if (closes.size() < count + 1) {
    throw InsufficientHistory("log_returns: need " + std::to_string(count + 1) + " closes, have " +
                              std::to_string(closes.size()));
  }
  const std::size_t first = closes.size() - count - 1;
  for (std::size_t i = first; i < closes.size(); ++i) {
    if (!(closes[i] > 0.0)) throw NonPositivePrice("log_returns: non-positive close");
  }
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t i = first + 1; i < closes.size(); ++i) out.push_back(std::log(closes[i] / closes[i - 1]));
  return out;
}

ZScoreResult zscore(std::span<const double> series, std::size_t window) {
  if (window < 2 || series.size() < window) {
    throw InsufficientHistory("zscore: need a window of >= 2 and at least " + std::to_string(window) +
                              " observations");
  }
  const auto tail = series.subspan(series.size() - window);
  double sum = 0.0;
  for (double x : tail) sum += x;
  const double mean = sum / static_cast<double>(window);
  double ss = 0.0;
  for (double x : tail) ss += (x - mean) * (x - mean);
  double sd = std::sqrt(ss / static_cast<double>(window));
  ZScoreResult out;
  out.values.resize(window, 0.0);
  if (sd <= kZScoreFlatTolerance * std::max(1.0, std::fabs(mean))) {
    sd = 0.0;
  } else {
    for (std::size_t i = 0; i < window; ++i) out.values[i] = (tail[i] - mean) / sd;
  }
  out.params = {mean, sd, window};
  return out;
}

std::optional<double> ar_indicator(std::span<const GroupBar> bars, std::size_t n) {
  if (n == 0 || bars.size() < n) throw InsufficientHistory("ar_indicator: need " + std::to_string(n) + " bars");
  Decimal num, den;
  for (std::size_t i = bars.size() - n; i < bars.size(); ++i) {
    num += bars[i].high - bars[i].open;
    den += bars[i].open - bars[i].low;
  }
  if (den <= Decimal{}) return std::nullopt;
  return 100.0 * num.to_double() / den.to_double();
}

std::optional<double> br_indicator(std::span<const GroupBar> bars, std::size_t n) {
  if (n == 0 || bars.size() < n + 1) {
    throw InsufficientHistory("br_indicator: need " + std::to_string(n + 1) + " bars");
  }
  const Decimal zero;
  Decimal num, den;
  for (std::size_t i = bars.size() - n; i < bars.size(); ++i) {
    const Decimal prev_close = bars[i - 1].close;
    num += std::max(zero, bars[i].high - prev_close);
    den += std::max(zero, prev_close - bars[i].low);
  }
  if (den <= zero) return std::nullopt;
  return 100.0 * num.to_double() / den.to_double();
}

ArBrValue arbr(std::span<const GroupBar> bars, std::size_t n) {
  ArBrValue v;
  v.window = n;
  if (bars.size() >= n) v.ar = ar_indicator(bars, n);
  if (bars.size() >= n + 1) v.br = br_indicator(bars, n);
  return v;
}

IndicatorVector indicator_suite(std::span<const GroupBar> bars, std::size_t at) {
  if (at >= bars.size()) throw InsufficientHistory("indicator_suite: index past end of series");
  return indicator_suite(to_arrays(bars.first(at + 1)), at);
}

IndicatorVector indicator_suite(const OhlcvArrays& s, std::size_t at_index) {
  const auto at = static_cast<Eigen::Index>(at_index);
  if (at_index < kIndicatorLookback) {
    throw InsufficientHistory("indicator_suite: need index >= " + std::to_string(kIndicatorLookback));
  }
  if (at >= s.size()) throw InsufficientHistory("indicator_suite: index past end of series");
  const double c = s.close[at];
  IndicatorVector out;
  auto& v = out.values;
  v[kSma5] = window_mean(s.close, at, 5) / c;
  v[kSma10] = window_mean(s.close, at, 10) / c;
  v[kSma20] = window_mean(s.close, at, 20) / c;
  const double ema12 = ema_at(s.close, 0, 12, at);
  const double ema26 = ema_at(s.close, 0, 26, at);
  v[kEma12] = ema12 / c;
  v[kEma26] = ema26 / c;

  // MACD line from index 25 onward, then its 9-period EMA.
  Eigen::ArrayXd line(at - 25 + 1);
  {
    double e12 = window_mean(s.close, 11, 12);
    double e26 = window_mean(s.close, 25, 26);
    const double a12 = ema_alpha(12), a26 = ema_alpha(26);
    for (Eigen::Index i = 12; i <= 25; ++i) e12 = ema_step(e12, s.close[i], a12);
    line[0] = e12 - e26;
    for (Eigen::Index i = 26; i <= at; ++i) {
      e12 = ema_step(e12, s.close[i], a12);
      e26 = ema_step(e26, s.close[i], a26);
      line[i - 25] = e12 - e26;
    }
  }
  const double macd = line[line.size() - 1];
  const double signal = ema_at(line, 0, 9, line.size() - 1);
  v[kMacd] = macd / c;
  v[kMacdSignal] = signal / c;
  v[kMacdHist] = (macd - signal) / c;

  v[kRsi14] = wilder_rsi_at(s.close, at, 14);
  v[kMfi14] = mfi_at(s, at, 14);
  v[kMom10] = (c - s.close[at - 10]) / c;
  v[kRoc10] = 100.0 * (c - s.close[at - 10]) / s.close[at - 10];
  const Bollinger bb = bollinger(s.close, at, 20);
  v[kBbPctB] = bb.pct_b;
  v[kBbWidth] = bb.width;
  v[kStochK] = stochastic_k_at(s, at, 14);
  v[kStochD] = (stochastic_k_at(s, at - 2, 14) + stochastic_k_at(s, at - 1, 14) + v[kStochK]) / 3.0;
  v[kAtr14] = wilder_atr_at(s, at, 14) / c;
  double obv_delta = 0.0;
  for (Eigen::Index i = at - 9; i <= at; ++i) obv_delta += sign_of(s.close[i] - s.close[i - 1]) * s.volume[i];
  v[kObvD10] = obv_delta;
  v[kVolRatio] = volume_ratio(s.volume[at], window_mean(s.volume, at, 5));
  v[kWillR] = williams_r(c, window_max(s.high, at, 14), window_min(s.low, at, 14));
  return out;
}

MacdSeries macd_series(const Eigen::ArrayXd& close, int fast, int slow, int signal) {
  const Eigen::Index n = close.size();
  MacdSeries out{Eigen::ArrayXd::Constant(n, kNaN), Eigen::ArrayXd::Constant(n, kNaN)};
  if (n < slow) return out;
  double ef = 0.0, es = 0.0;
  for (Eigen::Index i = 0; i < fast; ++i) ef += close[i];
  ef /= fast;
  for (Eigen::Index i = 0; i < slow; ++i) es += close[i];
  es /= slow;
  const double af = ema_alpha(fast), as = ema_alpha(slow), ag = ema_alpha(signal);
  for (Eigen::Index i = fast; i < slow; ++i) ef = ema_step(ef, close[i], af);
  double sig_sum = 0.0;
  double sig = 0.0;
  for (Eigen::Index i = slow - 1; i < n; ++i) {
    if (i >= slow) {
      ef = ema_step(ef, close[i], af);
      es = ema_step(es, close[i], as);
    }
    const double line = ef - es;
    out.line[i] = line;
    const Eigen::Index k = i - (slow - 1);
    if (k < signal) {
      sig_sum += line;
      if (k == signal - 1) {
        sig = sig_sum / signal;
        out.signal[i] = sig;
      }
    } else {
      sig = ema_step(sig, line, ag);
      out.signal[i] = sig;
    }
  }
  return out;
}

Eigen::MatrixXd indicator_series(const OhlcvArrays& s) {
  const Eigen::Index n = s.size();
  Eigen::MatrixXd out = Eigen::MatrixXd::Constant(n, kIndicatorCount, kNaN);
  if (n <= static_cast<Eigen::Index>(kIndicatorLookback)) return out;

  const MacdSeries macd = macd_series(s.close);
  const double a12 = ema_alpha(12), a26 = ema_alpha(26);
  double ema12 = 0.0, ema26 = 0.0;
  double sum5 = 0.0, sum10 = 0.0, sum20 = 0.0, vsum5 = 0.0;
  double gain = 0.0, loss = 0.0, atr = 0.0, obv = 0.0;
  Eigen::ArrayXd obv_hist(n);
  Eigen::ArrayXd stoch_k = Eigen::ArrayXd::Constant(n, kNaN);
  std::deque<Eigen::Index> max_q, min_q;  // monotone deques over the 14-bar window

  for (Eigen::Index i = 0; i < n; ++i) {
    const double c = s.close[i];
    sum5 += c;
    sum10 += c;
    sum20 += c;
    vsum5 += s.volume[i];
    if (i >= 5) {
      sum5 -= s.close[i - 5];
      vsum5 -= s.volume[i - 5];
    }
    if (i >= 10) sum10 -= s.close[i - 10];
    if (i >= 20) sum20 -= s.close[i - 20];

    if (i < 12) {
      ema12 += c;
      if (i == 11) ema12 /= 12.0;
    } else {
      ema12 = ema_step(ema12, c, a12);
    }
    if (i < 26) {
      ema26 += c;
      if (i == 25) ema26 /= 26.0;
    } else {
      ema26 = ema_step(ema26, c, a26);
    }

    if (i >= 1) {
      const double d = c - s.close[i - 1];
      const double tr = true_range(s, i);
      if (i <= 14) {
        gain += std::max(d, 0.0);
        loss += std::max(-d, 0.0);
        atr += tr;
        if (i == 14) {
          gain /= 14.0;
          loss /= 14.0;
          atr /= 14.0;
        }
      } else {
        gain = wilder_step(gain, std::max(d, 0.0), 14);
        loss = wilder_step(loss, std::max(-d, 0.0), 14);
        atr = wilder_step(atr, tr, 14);
      }
      obv += sign_of(d) * s.volume[i];
    }
    obv_hist[i] = obv;

    while (!max_q.empty() && s.high[max_q.back()] <= s.high[i]) max_q.pop_back();
    max_q.push_back(i);
    while (!min_q.empty() && s.low[min_q.back()] >= s.low[i]) min_q.pop_back();
    min_q.push_back(i);
    while (max_q.front() <= i - 14) max_q.pop_front();
    while (min_q.front() <= i - 14) min_q.pop_front();
    const double hh = s.high[max_q.front()];
    const double ll = s.low[min_q.front()];
    if (i >= 13) stoch_k[i] = stochastic_k(c, hh, ll);

    if (i < static_cast<Eigen::Index>(kIndicatorLookback)) continue;

    auto row = out.row(i);
    row[kSma5] = (sum5 / 5.0) / c;
    row[kSma10] = (sum10 / 10.0) / c;
    row[kSma20] = (sum20 / 20.0) / c;
    row[kEma12] = ema12 / c;
    row[kEma26] = ema26 / c;
    row[kMacd] = macd.line[i] / c;
    row[kMacdSignal] = macd.signal[i] / c;
    row[kMacdHist] = (macd.line[i] - macd.signal[i]) / c;
    row[kRsi14] = rsi_from(gain, loss);
    row[kMfi14] = mfi_at(s, i, 14);
    row[kMom10] = (c - s.close[i - 10]) / c;
    row[kRoc10] = 100.0 * (c - s.close[i - 10]) / s.close[i - 10];
    const Bollinger bb = bollinger(s.close, i, 20);
    row[kBbPctB] = bb.pct_b;
    row[kBbWidth] = bb.width;
    row[kStochK] = stoch_k[i];
    row[kStochD] = (stoch_k[i - 2] + stoch_k[i - 1] + stoch_k[i]) / 3.0;
    row[kAtr14] = atr / c;
    row[kObvD10] = obv - obv_hist[i - 10];
    row[kVolRatio] = volume_ratio(s.volume[i], vsum5 / 5.0);
    row[kWillR] = williams_r(c, hh, ll);
  }
  return out;
}

}  // namespace drqn
