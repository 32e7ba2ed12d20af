#include "drqn/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "drqn/errors.hpp"
#include "drqn/synthetic_data.hpp"

namespace drqn {

PreparedData prepare_data(const RunConfig& config) {
  if (!config.data_path.empty()) return prepare_data(config, load_ohlcv_csv(config.data_path));
  if (config.synth) return prepare_data(config, generate(config.generator_spec()));
  throw ConfigError("no data source: pass --data or set synth.kind");
}

PreparedData prepare_data(const RunConfig& config, std::vector<Bar> bars) {
  validate(config);
  PreparedData d;
  d.bars = std::move(bars);
  GroupedBars grouped = group_bars(d.bars, config.group_size);
  if (grouped.partial_tail) grouped.groups.pop_back();
  d.groups = std::move(grouped.groups);
  d.states = build_states(d.groups, config.state);

  const std::size_t n = d.groups.size();
  const std::size_t warmup = warmup_length(config.state);
  d.split = static_cast<std::size_t>(static_cast<double>(n) * config.train_fraction);
  if (d.split < warmup + config.agent.seq_len + 1) {
    throw InsufficientHistory("training range has " + std::to_string(d.split) + " groups; need more than " +
                              std::to_string(warmup + config.agent.seq_len) + " (warm-up plus one sequence)");
  }
  if (n - d.split < 2) throw InsufficientHistory("held-out range needs at least 2 groups");
  return d;
}

TrainedModel train_model(const RunConfig& config, const PreparedData& data, CellKind cell) {
  AgentConfig ac = config.agent;
  ac.cell = cell;
  const std::uint64_t stream = cell == CellKind::Lstm ? 1 : 3;
  TrainedModel m{make_agent(ac, static_cast<Eigen::Index>(state_dimension(config.state)),
                            Rng::mix(config.seed, stream)),
                 {}};
  Rng rng(Rng::mix(config.seed, stream + 1));
  EpisodeConfig ep{0, data.split, config.backtest};
  m.log = train_agent(m.agent, data.states, data.groups, ep, rng);
  return m;
}

bool needs_network(const std::string& strategy) {
  return strategy == "arbr_drqn" || strategy == "drqn";
}

bool needs_dqn(const RunConfig& config) {
  return std::find(config.strategies.begin(), config.strategies.end(), "dqn") != config.strategies.end();
}

Evaluation evaluate(const RunConfig& config, const PreparedData& data,
                    const QNetworkParams<double>* drqn, const QNetworkParams<double>* dqn) {
  const std::size_t n = data.groups.size();
  const std::size_t begin = data.split;
  const std::span<const GroupBar> test(data.groups.data() + begin, n - begin);
  const auto held_out = [&](const std::vector<Action>& full) {
    return std::vector<Action>(full.begin() + static_cast<std::ptrdiff_t>(begin), full.end());
  };

  const std::vector<Action> s1 = held_out(arbr_signals(data.states, config.thresholds));
  std::vector<Action> s2(n - begin, Action::Hold);
  if (drqn) s2 = held_out(drqn_signals(*drqn, data.states));

  Evaluation ev;
  for (const std::string& name : config.strategies) {
    std::vector<Action> actions;
    if (needs_network(name) && !drqn) throw ConfigError("strategy '" + name + "' needs a trained model");
    if (name == "arbr_drqn") {
      actions.reserve(s1.size());
      for (std::size_t i = 0; i < s1.size(); ++i) actions.push_back(fuse(s1[i], s2[i]));
    } else if (name == "drqn") {
      actions = s2;
    } else if (name == "dqn") {
      if (!dqn) throw ConfigError("strategy 'dqn' needs a trained feedforward model");
      actions = held_out(drqn_signals(*dqn, data.states));
    } else if (name == "arbr") {
      actions = s1;
    } else if (name == "macd") {
      actions = held_out(baseline_macd(data.groups));
    } else if (name == "buy_hold") {
      actions = baseline_buy_hold(n - begin, 0);
    } else if (name == "hold") {
      actions.assign(n - begin, Action::Hold);
    } else {
      throw ConfigError("unknown strategy '" + name + "'");
    }
    BacktestResult result = run_backtest(actions, test, config.backtest, name);
    ev.runs.push_back({name, std::move(actions), std::move(result)});
  }

  const auto fused_it = std::find(config.strategies.begin(), config.strategies.end(), "arbr_drqn");
  ev.primary = fused_it == config.strategies.end()
                   ? 0
                   : static_cast<std::size_t>(fused_it - config.strategies.begin());
  const BacktestResult& primary = ev.runs[ev.primary].result;
  ev.trace.reserve(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    SignalTraceRow row;
    row.group_index = test[i].group_index;
    row.arbr = data.states[begin + i].sentiment;
    row.signal = {s1[i], s2[i], fuse(s1[i], s2[i]), test[i].group_index};
    row.executed = primary.executed[i];
    row.position = primary.equity[i].position;
    row.price = test[i].close;
    ev.trace.push_back(row);
  }
  return ev;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("IoError", "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("IoError", "write failed for '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingRunArtifacts("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_evaluation(const std::filesystem::path& dir, const Evaluation& ev) {
  std::filesystem::create_directories(dir);
  std::vector<RunReport> reports;
  for (const StrategyRun& run : ev.runs) {
    std::ostringstream eq, fills;
    write_equity_csv(eq, run.result.equity);
    write_fills_csv(fills, run.result.fills);
    write_text(dir / ("equity_" + run.name + ".csv"), eq.str());
    write_text(dir / ("fills_" + run.name + ".csv"), fills.str());
    write_text(dir / ("report_" + run.name + ".json"), report_to_json(run.result.report));
    reports.push_back(run.result.report);
  }
  write_text(dir / "report.json", report_to_json(ev.runs[ev.primary].result.report));
  const std::vector<RunReport> ranked = reports.size() >= 2 ? compare_runs(reports) : reports;
  std::ostringstream csv;
  write_ranking_csv(csv, ranked);
  write_text(dir / "comparison.csv", csv.str());
  write_text(dir / "comparison.json", ranking_to_json(ranked));
  std::ostringstream trace;
  write_signal_trace(trace, ev.trace);
  write_text(dir / "signals.csv", trace.str());
}

}  // namespace drqn
