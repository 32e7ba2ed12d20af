#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "drqn/action.hpp"
#include "drqn/backtest.hpp"
#include "drqn/neural_net.hpp"
#include "drqn/random.hpp"
#include "drqn/state_builder.hpp"

namespace drqn {

// ---- tabular Q-learning ------------------------------------------------------

struct QTable {
  Eigen::MatrixXd values;  // states x actions

  static QTable zeros(Eigen::Index states, Eigen::Index actions) {
    return {Eigen::MatrixXd::Zero(states, actions)};
  }
};

// Q(s,a) += alpha * (r + gamma * max_a' Q(s',a') - Q(s,a)).
void q_update_tabular(QTable& table, Eigen::Index state, Eigen::Index action, double reward,
                      Eigen::Index next_state, double alpha, double gamma);

// r + gamma * max(q_next), or r alone for terminal transitions.
double td_target(double reward, double gamma, const Eigen::Ref<const Eigen::VectorXd>& q_next,
                 bool terminal = false);

// PaperLiteral: p_t - p_prev. PositionAware: position * (p_t - p_prev) - fee_paid.
enum class RewardMode { PaperLiteral, PositionAware };

double reward(double p_t, double p_prev, double position, double fee_paid, RewardMode mode);

double cumulative_return(std::span<const double> rewards);

// ---- action selection ----------------------------------------------------------

// Argmax over (buy, hold, sell) q-values; ties prefer Hold, then Buy.
Action greedy_action(const Eigen::Ref<const Eigen::VectorXd>& q);

// With probability epsilon a uniform action, otherwise greedy_action.
// Throws NonFiniteQ.
Action select_action(const Eigen::Ref<const Eigen::VectorXd>& q, double epsilon, Rng& rng);

struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.1;
  std::int64_t decay_steps = 50'000;

  double at(std::int64_t step) const;
};

// ---- replay ----------------------------------------------------------------------

struct Transition {
  Eigen::VectorXd state;
  Action action = Action::Hold;
  double reward = 0.0;
  Eigen::VectorXd next_state;
  bool terminal = false;
  std::size_t group_index = 0;
};

// Contiguous windows of transitions, one per batch entry.
using SequenceBatch = std::vector<std::vector<Transition>>;

// Transitions grouped into time-contiguous runs with oldest-first eviction.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 100'000);

  // Subsequent pushes go to a fresh run.
  void begin_run();
  void push(Transition transition);

  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t run_count() const { return runs_.size(); }
  // Number of distinct start positions of a contiguous seq_len window.
  std::size_t window_count(std::size_t seq_len) const;

  // Uniform over all window start positions, with replacement. Throws
  // NotEnoughData when fewer than batch_size start positions exist.
  SequenceBatch sample_sequences(std::size_t batch_size, std::size_t seq_len, Rng& rng) const;

  // Run identifier of each stored transition, oldest first (for audits).
  std::vector<std::uint64_t> run_ids() const;

 private:
  struct Run {
    std::uint64_t id;
    std::size_t length;
  };
  std::size_t capacity_;
  std::deque<Transition> entries_;
  std::deque<Run> runs_;
  std::uint64_t next_run_id_ = 0;
  bool open_new_run_ = true;
};

// ---- the DRQN agent -----------------------------------------------------------

enum class LossKind { Mse, Huber };

struct AgentConfig {
  std::size_t batch_size = 16;
  double learning_rate = 0.00025;
  double gamma = 0.001;
  std::size_t hidden = 32;
  std::size_t seq_len = 16;
  std::size_t burn_in = 4;
  EpsilonSchedule epsilon;
  std::size_t target_sync_interval = 100;
  std::size_t replay_capacity = 100'000;
  std::int64_t train_steps = 50'000;
  std::size_t train_every = 1;  // environment steps per gradient step
  std::size_t log_interval = 100;
  OptimizerKind optimizer = OptimizerKind::Adam;
  LossKind loss = LossKind::Mse;
  double huber_delta = 1.0;
  RewardMode reward_mode = RewardMode::PositionAware;
  CellKind cell = CellKind::Lstm;
};

void validate(const AgentConfig& config);

struct Agent {
  AgentConfig config;
  QNetworkParams<double> online;
  QNetworkParams<double> target;
  OptimizerState<double> optimizer;
  std::int64_t train_steps = 0;
};

Agent make_agent(const AgentConfig& config, Eigen::Index input_dim, std::uint64_t seed);

// One gradient step on a batch of windows: zero initial hidden state, the
// first burn_in steps only warm the state, TD targets from the target net.
// Syncs the target network every target_sync_interval steps. Returns the loss.
double train_step(Agent& agent, const SequenceBatch& batch);

struct EpisodeStats {
  std::size_t env_steps = 0;  // valid states acted on
  std::size_t trades = 0;
  Decimal fees;
  double cumulative_reward = 0.0;
  Decimal final_equity;
};

struct EpisodeResult {
  std::vector<std::vector<Transition>> runs;  // time-contiguous transition runs
  EpisodeStats stats;

  std::size_t transition_count() const;
};

struct EpisodeConfig {
  std::size_t begin = 0;  // first group index of the episode
  std::size_t end = 0;    // one past the last; 0 means states.size()
  BacktestConfig backtest;
};

// Walks states[begin, end) once with the online network, carrying the LSTM
// hidden state. Invalid states force Hold and are not recorded. `epsilon_at`
// receives the running count of acted-on steps.
EpisodeResult run_episode(const Agent& agent, std::span<const StockState> states,
                          std::span<const GroupBar> bars, const EpisodeConfig& config,
                          const std::function<double(std::int64_t)>& epsilon_at,
                          std::int64_t step_offset, Rng& rng);

struct MetricsRow {
  std::int64_t step = 0;
  double loss = 0.0;
  double epsilon = 0.0;
  std::size_t buffer_size = 0;
  double cumulative_reward = 0.0;
};

struct TrainingLog {
  std::vector<MetricsRow> rows;
  std::vector<double> losses;  // every step
  std::size_t episodes = 0;
  std::int64_t env_steps = 0;
};

// Alternates run_episode over [begin, end) with gradient steps until
// config.train_steps is reached.
TrainingLog train_agent(Agent& agent, std::span<const StockState> states,
                        std::span<const GroupBar> bars, const EpisodeConfig& episode, Rng& rng);

void write_metrics_csv(std::ostream& out, const TrainingLog& log);

}  // namespace drqn
