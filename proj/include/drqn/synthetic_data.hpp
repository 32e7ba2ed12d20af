#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "drqn/market_data.hpp"

namespace drqn {

enum class GeneratorKind { SineTrend, RegimeSwitch, RandomWalk };

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::SineTrend;
  std::size_t length = 20'000;  // 1-minute bars
  std::uint64_t seed = 0;
  double noise = 0.0;  // per-bar relative noise scale
  double base_price = 20.0;
  double base_volume = 1000.0;
  Timestamp start = 1483435800;  // 2017-01-03T09:30:00Z

  // sine_trend: close = base * (1 + trend * i / length + amplitude * sin(2 pi i / period) + noise * z)
  double amplitude = 0.05;
  double period = 1200.0;  // bars
  double trend = 0.1;
  double wick = 0.0002;  // deterministic relative wick on each bar

  // regime_switch: log-price drifts by +drift / -drift per bar in alternating
  // regimes; the last pattern_length bars of each regime carry one-sided wicks
  // (upper before a downturn, lower before an upturn).
  double drift = 0.0003;
  std::size_t switch_period = 900;  // mean regime length in bars
  double switch_jitter = 0.25;      // regime length uniform in period * (1 +- jitter)
  std::size_t pattern_length = 90;
  double pattern_strength = 6.0;
};

struct Regime {
  std::size_t begin = 0;  // bar index
  std::size_t end = 0;
  int direction = 1;  // +1 up, -1 down
};

struct GeneratedSeries {
  std::vector<Bar> bars;
  std::vector<Regime> regimes;  // regime_switch only
};

// Same GeneratorSpec, same bars; every bar satisfies the Bar invariants.
std::vector<Bar> generate(const GeneratorSpec& spec);
GeneratedSeries generate_series(const GeneratorSpec& spec);

}  // namespace drqn
