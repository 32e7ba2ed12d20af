#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "drqn/backtest.hpp"
#include "drqn/config.hpp"
#include "drqn/rl_agent.hpp"
#include "drqn/state_builder.hpp"
#include "drqn/strategies.hpp"

namespace drqn {

struct PreparedData {
  std::vector<Bar> bars;
  std::vector<GroupBar> groups;  // complete groups only
  std::vector<StockState> states;
  std::size_t split = 0;  // first held-out group
};

// Loads data.path or runs the configured generator, groups, builds states and
// picks the train/test split. Throws ConfigError without a data source and
// InsufficientHistory when either side of the split is too short.
PreparedData prepare_data(const RunConfig& config);
PreparedData prepare_data(const RunConfig& config, std::vector<Bar> bars);

struct TrainedModel {
  Agent agent;
  TrainingLog log;
};

// Trains on groups [0, split). Seeds derive from run.seed and the cell kind.
TrainedModel train_model(const RunConfig& config, const PreparedData& data, CellKind cell);

bool needs_network(const std::string& strategy);
bool needs_dqn(const RunConfig& config);

struct StrategyRun {
  std::string name;
  std::vector<Action> actions;  // held-out range
  BacktestResult result;
};

struct Evaluation {
  std::vector<StrategyRun> runs;  // in config order
  std::vector<SignalTraceRow> trace;  // held-out range, executed/position of the primary run
  std::size_t primary = 0;
};

// Backtests every configured strategy over the held-out groups. Network
// signals carry the hidden state from the first group of the series.
Evaluation evaluate(const RunConfig& config, const PreparedData& data,
                    const QNetworkParams<double>* drqn, const QNetworkParams<double>* dqn);

// equity_/fills_/report_<name>, report.json (primary), comparison.{csv,json}, signals.csv.
void write_evaluation(const std::filesystem::path& dir, const Evaluation& evaluation);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace drqn
