#include "drqn/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>

#include "drqn/errors.hpp"

namespace drqn {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
  throw ConfigError("'" + key + "': cannot parse '" + value + "' as " + expected);
}

double to_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "a number");
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "a non-negative integer");
  return out;
}

std::int64_t to_int(const std::string& key, const std::string& v) {
  std::int64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "an integer");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_value(key, v, "true/false");
}

Decimal to_decimal(const std::string& key, const std::string& v) {
  const auto d = Decimal::parse(v);
  if (!d) bad_value(key, v, "a decimal");
  return *d;
}

std::string real_text(double x) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, p);
}

GeneratorSpec& synth_of(RunConfig& c, const std::string& key) {
  if (!c.synth) throw ConfigError("'" + key + "' requires synth.kind to be set first");
  return *c.synth;
}

const char* kind_name(GeneratorKind k) {
  switch (k) {
    case GeneratorKind::SineTrend: return "sine_trend";
    case GeneratorKind::RegimeSwitch: return "regime_switch";
    case GeneratorKind::RandomWalk: return "random_walk";
  }
  return "";
}

struct Key {
  std::function<void(RunConfig&, const std::string& key, const std::string& value)> set;
  std::function<std::optional<std::string>(const RunConfig&)> get;
};

#define DRQN_FIELD(path, conv, text)                                                               \
  Key {                                                                                            \
    [](RunConfig& c, const std::string& k, const std::string& v) { c.path = conv(k, v); },         \
        [](const RunConfig& c) -> std::optional<std::string> { return text(c.path); }              \
  }
#define DRQN_SYNTH(field, conv, text)                                                              \
  Key {                                                                                            \
    [](RunConfig& c, const std::string& k, const std::string& v) { synth_of(c, k).field = conv(k, v); }, \
        [](const RunConfig& c) -> std::optional<std::string> {                                     \
          if (!c.synth) return std::nullopt;                                                       \
          return text(c.synth->field);                                                             \
        }                                                                                          \
  }

std::string uint_text(std::uint64_t v) { return std::to_string(v); }
std::string int_text(std::int64_t v) { return std::to_string(v); }
std::string bool_text(bool v) { return v ? "true" : "false"; }
std::string dec_text(Decimal d) { return d.to_string(); }
std::string str_text(const std::string& s) { return s; }
std::string str_conv(const std::string&, const std::string& v) { return v; }
std::size_t size_conv(const std::string& k, const std::string& v) { return static_cast<std::size_t>(to_uint(k, v)); }

const std::map<std::string, Key>& registry() {
  static const std::map<std::string, Key> keys = [] {
    std::map<std::string, Key> m;
    m["run.seed"] = DRQN_FIELD(seed, to_uint, uint_text);
    m["run.train_fraction"] = DRQN_FIELD(train_fraction, to_real, real_text);
    m["data.path"] = DRQN_FIELD(data_path, str_conv, str_text);
    m["data.group_size"] = DRQN_FIELD(group_size, size_conv, uint_text);

    m["synth.kind"] = Key{
        [](RunConfig& c, const std::string& k, const std::string& v) {
          GeneratorKind kind;
          if (v == "sine_trend") kind = GeneratorKind::SineTrend;
          else if (v == "regime_switch") kind = GeneratorKind::RegimeSwitch;
          else if (v == "random_walk") kind = GeneratorKind::RandomWalk;
          else bad_value(k, v, "sine_trend|regime_switch|random_walk");
          if (!c.synth) c.synth = GeneratorSpec{};
          c.synth->kind = kind;
        },
        [](const RunConfig& c) -> std::optional<std::string> {
          if (!c.synth) return std::nullopt;
          return std::string(kind_name(c.synth->kind));
        }};
    m["synth.seed"] = Key{
        [](RunConfig& c, const std::string& k, const std::string& v) { c.synth_seed = to_uint(k, v); },
        [](const RunConfig& c) -> std::optional<std::string> {
          if (!c.synth) return std::nullopt;
          return uint_text(c.synth_seed.value_or(c.seed));
        }};
    m["synth.length"] = DRQN_SYNTH(length, size_conv, uint_text);
    m["synth.noise"] = DRQN_SYNTH(noise, to_real, real_text);
    m["synth.base_price"] = DRQN_SYNTH(base_price, to_real, real_text);
    m["synth.base_volume"] = DRQN_SYNTH(base_volume, to_real, real_text);
    m["synth.start"] = DRQN_SYNTH(start, to_int, int_text);
    m["synth.amplitude"] = DRQN_SYNTH(amplitude, to_real, real_text);
    m["synth.period"] = DRQN_SYNTH(period, to_real, real_text);
    m["synth.trend"] = DRQN_SYNTH(trend, to_real, real_text);
    m["synth.wick"] = DRQN_SYNTH(wick, to_real, real_text);
    m["synth.drift"] = DRQN_SYNTH(drift, to_real, real_text);
    m["synth.switch_period"] = DRQN_SYNTH(switch_period, size_conv, uint_text);
    m["synth.switch_jitter"] = DRQN_SYNTH(switch_jitter, to_real, real_text);
    m["synth.pattern_length"] = DRQN_SYNTH(pattern_length, size_conv, uint_text);
    m["synth.pattern_strength"] = DRQN_SYNTH(pattern_strength, to_real, real_text);

    m["state.z_window"] = DRQN_FIELD(state.z_window, size_conv, uint_text);
    m["state.log_return_lags"] = DRQN_FIELD(state.log_return_lags, size_conv, uint_text);
    m["state.use_indicators"] = DRQN_FIELD(state.use_indicators, to_bool, bool_text);
    m["indicators.arbr_window"] = DRQN_FIELD(state.arbr_window, size_conv, uint_text);

    m["strategy.ar_buy"] = DRQN_FIELD(thresholds.ar_buy, to_real, real_text);
    m["strategy.ar_sell"] = DRQN_FIELD(thresholds.ar_sell, to_real, real_text);
    m["strategy.br_buy"] = DRQN_FIELD(thresholds.br_buy, to_real, real_text);
    m["strategy.br_sell"] = DRQN_FIELD(thresholds.br_sell, to_real, real_text);

    m["agent.batch_size"] = DRQN_FIELD(agent.batch_size, size_conv, uint_text);
    m["agent.learning_rate"] = DRQN_FIELD(agent.learning_rate, to_real, real_text);
    m["agent.gamma"] = DRQN_FIELD(agent.gamma, to_real, real_text);
    m["agent.hidden"] = DRQN_FIELD(agent.hidden, size_conv, uint_text);
    m["agent.seq_len"] = DRQN_FIELD(agent.seq_len, size_conv, uint_text);
    m["agent.burn_in"] = DRQN_FIELD(agent.burn_in, size_conv, uint_text);
    m["agent.epsilon_start"] = DRQN_FIELD(agent.epsilon.start, to_real, real_text);
    m["agent.epsilon_end"] = DRQN_FIELD(agent.epsilon.end, to_real, real_text);
    m["agent.epsilon_decay_steps"] = DRQN_FIELD(agent.epsilon.decay_steps, to_int, int_text);
    m["agent.target_sync_interval"] = DRQN_FIELD(agent.target_sync_interval, size_conv, uint_text);
    m["agent.replay_capacity"] = DRQN_FIELD(agent.replay_capacity, size_conv, uint_text);
    m["agent.train_steps"] = DRQN_FIELD(agent.train_steps, to_int, int_text);
    m["agent.train_every"] = DRQN_FIELD(agent.train_every, size_conv, uint_text);
    m["agent.log_interval"] = DRQN_FIELD(agent.log_interval, size_conv, uint_text);
    m["agent.huber_delta"] = DRQN_FIELD(agent.huber_delta, to_real, real_text);
    m["agent.optimizer"] = Key{
        [](RunConfig& c, const std::string& k, const std::string& v) {
          if (v == "adam") c.agent.optimizer = OptimizerKind::Adam;
          else if (v == "sgd") c.agent.optimizer = OptimizerKind::Sgd;
          else bad_value(k, v, "adam|sgd");
        },
        [](const RunConfig& c) -> std::optional<std::string> {
          return c.agent.optimizer == OptimizerKind::Adam ? "adam" : "sgd";
        }};
    m["agent.loss"] = Key{
        [](RunConfig& c, const std::string& k, const std::string& v) {
          if (v == "mse") c.agent.loss = LossKind::Mse;
          else if (v == "huber") c.agent.loss = LossKind::Huber;
          else bad_value(k, v, "mse|huber");
        },
        [](const RunConfig& c) -> std::optional<std::string> {
          return c.agent.loss == LossKind::Mse ? "mse" : "huber";
        }};
    m["agent.reward_mode"] = Key{
        [](RunConfig& c, const std::string& k, const std::string& v) {
          if (v == "position_aware") c.agent.reward_mode = RewardMode::PositionAware;
          else if (v == "paper_literal") c.agent.reward_mode = RewardMode::PaperLiteral;
          else bad_value(k, v, "position_aware|paper_literal");
        },
        [](const RunConfig& c) -> std::optional<std::string> {
          return c.agent.reward_mode == RewardMode::PositionAware ? "position_aware" : "paper_literal";
        }};
    m["agent.cell"] = Key{
        [](RunConfig& c, const std::string& k, const std::string& v) {
          if (v == "lstm") c.agent.cell = CellKind::Lstm;
          else if (v == "dense") c.agent.cell = CellKind::Dense;
          else bad_value(k, v, "lstm|dense");
        },
        [](const RunConfig& c) -> std::optional<std::string> {
          return c.agent.cell == CellKind::Lstm ? "lstm" : "dense";
        }};

    m["backtest.initial_cash"] = DRQN_FIELD(backtest.initial_cash, to_decimal, dec_text);
    m["backtest.lot_size"] = DRQN_FIELD(backtest.lot_size, to_int, int_text);
    m["backtest.fee_rate"] = DRQN_FIELD(backtest.fee_rate, to_decimal, dec_text);
    m["backtest.allow_short"] = DRQN_FIELD(backtest.allow_short, to_bool, bool_text);
    m["backtest.strategies"] = Key{
        [](RunConfig& c, const std::string&, const std::string& v) {
          c.strategies.clear();
          std::stringstream ss(v);
          std::string item;
          while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (!item.empty()) c.strategies.push_back(item);
          }
        },
        [](const RunConfig& c) -> std::optional<std::string> {
          std::string out;
          for (const auto& s : c.strategies) out += (out.empty() ? "" : ",") + s;
          return out;
        }};
    return m;
  }();
  return keys;
}

#undef DRQN_FIELD
#undef DRQN_SYNTH

}  // namespace

GeneratorSpec RunConfig::generator_spec() const {
  if (!synth) throw ConfigError("no generator configured (synth.kind)");
  GeneratorSpec s = *synth;
  s.seed = synth_seed.value_or(seed);
  return s;
}

void apply_setting(RunConfig& config, const std::string& key, const std::string& value) {
  const auto& keys = registry();
  const auto it = keys.find(key);
  if (it == keys.end()) throw ConfigError("unknown key '" + key + "'");
  it->second.set(config, key, value);
}

RunConfig parse_config(std::istream& in) {
  RunConfig config;
  std::string line;
  std::size_t line_no = 0;
  // synth.kind must be applied before other synth keys regardless of order.
  std::vector<std::pair<std::string, std::string>> deferred;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key == "synth.kind") apply_setting(config, key, value);
    else deferred.emplace_back(std::move(key), std::move(value));
  }
  for (const auto& [k, v] : deferred) apply_setting(config, k, v);
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  return parse_config(in);
}

void validate(const RunConfig& c) {
  if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0)) throw ConfigError("run.train_fraction must be in (0, 1)");
  if (c.group_size < 1) throw ConfigError("data.group_size must be >= 1");
  validate(c.state);
  validate(c.thresholds);
  validate(c.agent);
  if (c.backtest.lot_size < 1) throw ConfigError("backtest.lot_size must be >= 1");
  if (c.backtest.fee_rate < Decimal{}) throw ConfigError("backtest.fee_rate must be >= 0");
  if (c.backtest.initial_cash <= Decimal{}) throw ConfigError("backtest.initial_cash must be > 0");
  if (c.strategies.empty()) throw ConfigError("backtest.strategies must name at least one strategy");
  for (const auto& s : c.strategies) {
    const auto& known = known_strategies();
    if (std::find(known.begin(), known.end(), s) == known.end()) {
      throw ConfigError("backtest.strategies: unknown strategy '" + s + "'");
    }
  }
}

std::string serialize_config(const RunConfig& config) {
  std::string out;
  for (const auto& [key, k] : registry()) {
    const auto value = k.get(config);
    if (value) out += key + " = " + *value + "\n";
  }
  return out;
}

}  // namespace drqn
