#include "drqn/synthetic_data.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "drqn/errors.hpp"
#include "drqn/random.hpp"

namespace drqn {
namespace {

Decimal price_of(double x) {
  return std::max(Decimal::from_double(x, kPriceDigits), Decimal::from_units(10'000));  // >= 0.0001
}

Bar make_bar(Timestamp ts, Decimal open, Decimal close, double high, double low, double volume) {
  Bar b;
  b.timestamp = ts;
  b.open = open;
  b.close = close;
  b.high = std::max({price_of(high), open, close});
  b.low = std::min({price_of(low), open, close});
  b.volume = Decimal::from_double(std::max(0.0, std::round(volume)), 0);
  return b;
}

double activity_volume(double base, double open, double close) {
  return base * (1.0 + 100.0 * std::fabs(std::log(close / open)));
}

GeneratedSeries sine_trend(const GeneratorSpec& s, Rng& rng) {
  GeneratedSeries out;
  out.bars.reserve(s.length);
  const auto level = [&](double i, double z) {
    return s.base_price * (1.0 + s.trend * i / static_cast<double>(s.length) +
                           s.amplitude * std::sin(2.0 * std::numbers::pi * i / s.period) + s.noise * z);
  };
  Decimal prev = price_of(level(-1.0, 0.0));
  for (std::size_t i = 0; i < s.length; ++i) {
    const double z = s.noise > 0.0 ? rng.normal() : 0.0;
    const Decimal close = price_of(level(static_cast<double>(i), z));
    const double o = prev.to_double(), c = close.to_double();
    const double w1 = s.wick * (1.0 + (s.noise > 0.0 ? std::fabs(rng.normal()) : 0.0));
    const double w2 = s.wick * (1.0 + (s.noise > 0.0 ? std::fabs(rng.normal()) : 0.0));
    out.bars.push_back(make_bar(s.start + 60 * static_cast<Timestamp>(i), prev, close,
                                std::max(o, c) * (1.0 + w1), std::min(o, c) * (1.0 - w2),
                                activity_volume(s.base_volume, o, c)));
    prev = close;
  }
  return out;
}

GeneratedSeries random_walk(const GeneratorSpec& s, Rng& rng) {
  GeneratedSeries out;
  out.bars.reserve(s.length);
  double log_price = std::log(s.base_price);
  Decimal prev = price_of(s.base_price);
  for (std::size_t i = 0; i < s.length; ++i) {
    log_price += s.noise * rng.normal();
    const Decimal close = price_of(std::exp(log_price));
    const double o = prev.to_double(), c = close.to_double();
    const double hi = std::max(o, c) * std::exp(0.5 * s.noise * std::fabs(rng.normal()));
    const double lo = std::min(o, c) * std::exp(-0.5 * s.noise * std::fabs(rng.normal()));
    out.bars.push_back(make_bar(s.start + 60 * static_cast<Timestamp>(i), prev, close, hi, lo,
                                activity_volume(s.base_volume, o, c)));
    prev = close;
  }
  return out;
}

GeneratedSeries regime_switch(const GeneratorSpec& s, Rng& rng) {
  GeneratedSeries out;
  out.bars.reserve(s.length);
  double log_price = std::log(s.base_price);
  Decimal prev = price_of(s.base_price);
  int direction = 1;
  std::size_t i = 0;
  while (i < s.length) {
    const double scale = 1.0 + s.switch_jitter * rng.uniform(-1.0, 1.0);
    const auto len = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(static_cast<double>(s.switch_period) * scale)));
    const std::size_t end = std::min(s.length, i + len);
    out.regimes.push_back({i, end, direction});
    const std::size_t pattern_start = len > s.pattern_length ? i + len - s.pattern_length : i;
    for (; i < end; ++i) {
      log_price += direction * s.drift + s.noise * rng.normal();
      const Decimal close = price_of(std::exp(log_price));
      const double o = prev.to_double(), c = close.to_double();
      const double z_hi = std::fabs(rng.normal());
      const double z_lo = std::fabs(rng.normal());
      double hi = std::max(o, c) * std::exp(0.5 * s.noise * z_hi);
      double lo = std::min(o, c) * std::exp(-0.5 * s.noise * z_lo);
      double volume = activity_volume(s.base_volume, o, c);
      if (i >= pattern_start) {
        const double wick = s.pattern_strength * s.noise * (1.0 + z_hi);
        if (direction > 0) {  // overheated ahead of a downturn
          hi = std::max(o, c) * std::exp(wick);
          lo = std::min(o, c);
        } else {  // oversold ahead of an upturn
          lo = std::min(o, c) * std::exp(-wick);
          hi = std::max(o, c);
        }
        volume *= 2.0;
      }
      out.bars.push_back(make_bar(s.start + 60 * static_cast<Timestamp>(i), prev, close, hi, lo, volume));
      prev = close;
    }
    direction = -direction;
  }
  return out;
}

}  // namespace

GeneratedSeries generate_series(const GeneratorSpec& spec) {
  if (spec.length == 0) throw ConfigError("synth.length must be >= 1");
  if (spec.noise < 0.0) throw ConfigError("synth.noise must be >= 0");
  if (!(spec.base_price > 0.0)) throw ConfigError("synth.base_price must be > 0");
  if (spec.kind == GeneratorKind::SineTrend && !(spec.period > 0.0)) throw ConfigError("synth.period must be > 0");
  if (spec.kind == GeneratorKind::RegimeSwitch &&
      (spec.switch_period == 0 || spec.switch_jitter < 0.0 || spec.switch_jitter >= 1.0)) {
    throw ConfigError("synth.switch_period must be >= 1 and synth.switch_jitter in [0, 1)");
  }
  Rng rng(Rng::mix(spec.seed, 0x5e7));
  switch (spec.kind) {
    case GeneratorKind::SineTrend: return sine_trend(spec, rng);
    case GeneratorKind::RegimeSwitch: return regime_switch(spec, rng);
    case GeneratorKind::RandomWalk: return random_walk(spec, rng);
  }
  return {};
}

std::vector<Bar> generate(const GeneratorSpec& spec) { return generate_series(spec).bars; }

}  // namespace drqn
