#include "drqn/rl_agent.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "drqn/errors.hpp"

namespace drqn {

void q_update_tabular(QTable& table, Eigen::Index state, Eigen::Index action, double reward,
                      Eigen::Index next_state, double alpha, double gamma) {
  auto& q = table.values;
  if (state < 0 || state >= q.rows()) throw UnknownState("state " + std::to_string(state));
  if (next_state < 0 || next_state >= q.rows()) throw UnknownState("next state " + std::to_string(next_state));
  if (action < 0 || action >= q.cols()) throw UnknownAction("action " + std::to_string(action));
  const double target = reward + gamma * q.row(next_state).maxCoeff();
  q(state, action) += alpha * (target - q(state, action));
}

double td_target(double reward, double gamma, const Eigen::Ref<const Eigen::VectorXd>& q_next,
                 bool terminal) {
  if (terminal) return reward;
  return reward + gamma * q_next.maxCoeff();
}

double reward(double p_t, double p_prev, double position, double fee_paid, RewardMode mode) {
  if (mode == RewardMode::PaperLiteral) return p_t - p_prev;
  return position * (p_t - p_prev) - fee_paid;
}

double cumulative_return(std::span<const double> rewards) {
  double total = 0.0;
  for (double r : rewards) total += r;
  return total;
}

Action greedy_action(const Eigen::Ref<const Eigen::VectorXd>& q) {
  // Scan in tie-break preference order so the first maximum wins.
  static constexpr Action kPreference[] = {Action::Hold, Action::Buy, Action::Sell};
  Action best = Action::Hold;
  double best_q = q[static_cast<Eigen::Index>(action_index(Action::Hold))];
  for (Action a : kPreference) {
    const double v = q[static_cast<Eigen::Index>(action_index(a))];
    if (v > best_q) {
      best_q = v;
      best = a;
    }
  }
  return best;
}

Action select_action(const Eigen::Ref<const Eigen::VectorXd>& q, double epsilon, Rng& rng) {
  if (q.size() != kNumActions) throw DimensionMismatch("select_action: expected 3 q-values");
  if (!q.allFinite()) throw NonFiniteQ("select_action: non-finite q-value");
  if (rng.uniform() < epsilon) return kActionOrder[rng.uniform_index(3)];
  return greedy_action(q);
}

double EpsilonSchedule::at(std::int64_t step) const {
  if (decay_steps <= 0 || step >= decay_steps) return end;
  const double frac = static_cast<double>(step) / static_cast<double>(decay_steps);
  return start + (end - start) * frac;
}

// ---- replay --------------------------------------------------------------------

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("replay capacity must be >= 1");
}

void ReplayBuffer::begin_run() { open_new_run_ = true; }

void ReplayBuffer::push(Transition transition) {
  if (open_new_run_ || runs_.empty()) {
    runs_.push_back({next_run_id_++, 0});
    open_new_run_ = false;
  }
  entries_.push_back(std::move(transition));
  ++runs_.back().length;
  if (entries_.size() > capacity_) {
    entries_.pop_front();
    if (--runs_.front().length == 0) runs_.pop_front();
  }
}

std::size_t ReplayBuffer::window_count(std::size_t seq_len) const {
  std::size_t total = 0;
  for (const Run& r : runs_) {
    if (r.length >= seq_len) total += r.length - seq_len + 1;
  }
  return total;
}

SequenceBatch ReplayBuffer::sample_sequences(std::size_t batch_size, std::size_t seq_len,
                                             Rng& rng) const {
  if (seq_len == 0) throw ConfigError("seq_len must be >= 1");
  const std::size_t windows = window_count(seq_len);
  if (windows < batch_size || windows == 0) {
    throw NotEnoughData("replay: " + std::to_string(windows) + " windows of length " +
                        std::to_string(seq_len) + " available, need " + std::to_string(batch_size));
  }
  SequenceBatch batch;
  batch.reserve(batch_size);
  for (std::size_t b = 0; b < batch_size; ++b) {
    std::size_t k = rng.uniform_index(windows);
    std::size_t offset = 0;
    for (const Run& r : runs_) {
      const std::size_t starts = r.length >= seq_len ? r.length - seq_len + 1 : 0;
      if (k < starts) {
        const auto first = entries_.begin() + static_cast<std::ptrdiff_t>(offset + k);
        batch.emplace_back(first, first + static_cast<std::ptrdiff_t>(seq_len));
        break;
      }
      k -= starts;
      offset += r.length;
    }
  }
  return batch;
}

std::vector<std::uint64_t> ReplayBuffer::run_ids() const {
  std::vector<std::uint64_t> ids;
  ids.reserve(entries_.size());
  for (const Run& r : runs_) ids.insert(ids.end(), r.length, r.id);
  return ids;
}

// ---- agent ---------------------------------------------------------------------

void validate(const AgentConfig& c) {
  if (!(c.gamma >= 0.0 && c.gamma <= 1.0)) throw ConfigError("agent.gamma must be in [0, 1]");
  if (c.batch_size < 1) throw ConfigError("agent.batch_size must be >= 1");
  if (c.seq_len < 1) throw ConfigError("agent.seq_len must be >= 1");
  if (c.burn_in >= c.seq_len) throw ConfigError("agent.burn_in must be < agent.seq_len");
  if (c.hidden < 1) throw ConfigError("agent.hidden must be >= 1");
  if (!(c.learning_rate > 0.0)) throw ConfigError("agent.learning_rate must be > 0");
  if (c.target_sync_interval < 1) throw ConfigError("agent.target_sync_interval must be >= 1");
  if (c.train_every < 1) throw ConfigError("agent.train_every must be >= 1");
  if (c.train_steps < 0) throw ConfigError("agent.train_steps must be >= 0");
  if (!(c.huber_delta > 0.0)) throw ConfigError("agent.huber_delta must be > 0");
  if (c.replay_capacity < 1) throw ConfigError("agent.replay_capacity must be >= 1");
}

Agent make_agent(const AgentConfig& config, Eigen::Index input_dim, std::uint64_t seed) {
  validate(config);
  Agent agent;
  agent.config = config;
  agent.online = init_params<double>(input_dim, static_cast<Eigen::Index>(config.hidden), seed, config.cell);
  agent.target = agent.online;
  OptimizerConfig opt;
  opt.kind = config.optimizer;
  opt.learning_rate = config.learning_rate;
  agent.optimizer = OptimizerState<double>::for_params(agent.online, opt);
  return agent;
}

double train_step(Agent& agent, const SequenceBatch& batch) {
  const AgentConfig& cfg = agent.config;
  if (batch.empty()) throw NotEnoughData("train_step: empty batch");
  const std::size_t len = batch.front().size();
  if (len <= cfg.burn_in) throw DimensionMismatch("train_step: window shorter than burn-in");
  const auto batch_size = static_cast<Eigen::Index>(batch.size());
  const Eigen::Index dim = agent.online.input_dim();
  const Eigen::Index hidden = agent.online.hidden();

  // inputs[t] holds state t of every window; inputs[len] the final next_state.
  std::vector<Eigen::MatrixXd> inputs(len + 1, Eigen::MatrixXd(dim, batch_size));
  for (Eigen::Index b = 0; b < batch_size; ++b) {
    const auto& window = batch[static_cast<std::size_t>(b)];
    if (window.size() != len) throw DimensionMismatch("train_step: ragged batch");
    for (std::size_t t = 0; t < len; ++t) {
      if (window[t].state.size() != dim) throw DimensionMismatch("train_step: state dimension");
      inputs[t].col(b) = window[t].state;
    }
    inputs[len].col(b) = window[len - 1].next_state;
  }

  ForwardCache<double> cache;
  const auto online = forward<double>(agent.online, std::span(inputs).first(len),
                                      HiddenState<double>::zero(hidden, batch_size), &cache);
  const auto target = forward<double>(agent.target, std::span<const Eigen::MatrixXd>(inputs),
                                      HiddenState<double>::zero(hidden, batch_size));

  const double count = static_cast<double>(batch_size) * static_cast<double>(len - cfg.burn_in);
  std::vector<Eigen::MatrixXd> dq(len, Eigen::MatrixXd::Zero(kNumActions, batch_size));
  double loss = 0.0;
  for (std::size_t t = cfg.burn_in; t < len; ++t) {
    for (Eigen::Index b = 0; b < batch_size; ++b) {
      const Transition& tr = batch[static_cast<std::size_t>(b)][t];
      const auto a = static_cast<Eigen::Index>(action_index(tr.action));
      const double y = td_target(tr.reward, cfg.gamma, target.q[t + 1].col(b), tr.terminal);
      const double diff = online.q[t](a, b) - y;
      if (cfg.loss == LossKind::Huber && std::fabs(diff) > cfg.huber_delta) {
        loss += cfg.huber_delta * (std::fabs(diff) - 0.5 * cfg.huber_delta);
        dq[t](a, b) = (diff > 0 ? cfg.huber_delta : -cfg.huber_delta) / count;
      } else if (cfg.loss == LossKind::Huber) {
        loss += 0.5 * diff * diff;
        dq[t](a, b) = diff / count;
      } else {
        loss += diff * diff;
        dq[t](a, b) = 2.0 * diff / count;
      }
    }
  }
  loss /= count;

  const auto grads = backward<double>(agent.online, cache, dq);
  optimizer_step(agent.online, grads, agent.optimizer);
  ++agent.train_steps;
  if (agent.train_steps % static_cast<std::int64_t>(cfg.target_sync_interval) == 0) {
    agent.target = agent.online;
  }
  return loss;
}

std::size_t EpisodeResult::transition_count() const {
  std::size_t n = 0;
  for (const auto& r : runs) n += r.size();
  return n;
}

EpisodeResult run_episode(const Agent& agent, std::span<const StockState> states,
                          std::span<const GroupBar> bars, const EpisodeConfig& config,
                          const std::function<double(std::int64_t)>& epsilon_at,
                          std::int64_t step_offset, Rng& rng) {
  if (states.size() != bars.size()) {
    throw AlignmentError("run_episode: " + std::to_string(states.size()) + " states for " +
                         std::to_string(bars.size()) + " bars");
  }
  const std::size_t end = config.end == 0 ? states.size() : config.end;
  if (config.begin > end || end > states.size()) throw AlignmentError("run_episode: bad range");
  const double lot = static_cast<double>(config.backtest.lot_size);
  const Eigen::Index hidden = agent.online.hidden();

  EpisodeResult result;
  Portfolio portfolio = Portfolio::open(config.backtest);
  auto hidden_state = HiddenState<double>::zero(hidden);
  std::vector<Transition> run;

  struct Pending {
    Eigen::VectorXd state;
    Action action;
    double fee_per_share;
    int position;
    double price;
    std::size_t group;
  };
  std::optional<Pending> pending;

  for (std::size_t g = config.begin; g < end; ++g) {
    const StockState& s = states[g];
    const GroupBar& bar = bars[g];
    const double price = bar.close.to_double();

    if (pending) {
      if (s.valid) {
        Transition tr;
        tr.state = std::move(pending->state);
        tr.action = pending->action;
        tr.reward = reward(price, pending->price, pending->position, pending->fee_per_share,
                           agent.config.reward_mode);
        tr.next_state = s.features;
        tr.terminal = g + 1 == end;
        tr.group_index = pending->group;
        result.stats.cumulative_reward += tr.reward;
        run.push_back(std::move(tr));
      } else if (!run.empty()) {
        result.runs.push_back(std::move(run));
        run.clear();
      }
      pending.reset();
    }

    Action action = Action::Hold;
    if (s.valid) {
      const std::vector<Eigen::MatrixXd> input{s.features};
      const auto out = forward<double>(agent.online, input, hidden_state);
      hidden_state = out.final_state;
      const double eps = epsilon_at(step_offset + static_cast<std::int64_t>(result.stats.env_steps));
      action = select_action(out.q.front().col(0), eps, rng);
      ++result.stats.env_steps;
    }
    const auto fill = apply_fill(portfolio, action, bar.close, config.backtest, bar.group_index, bar.timestamp);
    const double fee = fill ? fill->fee.to_double() : 0.0;
    if (s.valid && g + 1 < end) {
      pending = Pending{s.features, action, fee / lot, portfolio.position, price, bar.group_index};
    }
  }
  if (!run.empty()) result.runs.push_back(std::move(run));
  result.stats.trades = portfolio.fills.size();
  result.stats.fees = portfolio.fees_paid;
  result.stats.final_equity = portfolio.equity(end > config.begin ? bars[end - 1].close : Decimal{});
  return result;
}

TrainingLog train_agent(Agent& agent, std::span<const StockState> states,
                        std::span<const GroupBar> bars, const EpisodeConfig& episode, Rng& rng) {
  const AgentConfig& cfg = agent.config;
  ReplayBuffer buffer(cfg.replay_capacity);
  TrainingLog log;
  const auto epsilon_at = [&](std::int64_t step) { return cfg.epsilon.at(step); };
  double last_episode_reward = 0.0;
  while (agent.train_steps < cfg.train_steps) {
    EpisodeResult ep = run_episode(agent, states, bars, episode, epsilon_at, log.env_steps, rng);
    const std::size_t produced = ep.transition_count();
    if (produced == 0) throw NotEnoughData("train_agent: episode produced no transitions");
    for (auto& r : ep.runs) {
      buffer.begin_run();
      for (auto& t : r) buffer.push(std::move(t));
    }
    ++log.episodes;
    const std::int64_t steps_before = log.env_steps;
    log.env_steps += static_cast<std::int64_t>(ep.stats.env_steps);
    last_episode_reward = ep.stats.cumulative_reward;

    const std::size_t updates = produced / cfg.train_every;
    for (std::size_t k = 0; k < updates && agent.train_steps < cfg.train_steps; ++k) {
      if (buffer.window_count(cfg.seq_len) < cfg.batch_size) break;
      const auto batch = buffer.sample_sequences(cfg.batch_size, cfg.seq_len, rng);
      const double loss = train_step(agent, batch);
      log.losses.push_back(loss);
      if (agent.train_steps % static_cast<std::int64_t>(std::max<std::size_t>(cfg.log_interval, 1)) == 0 ||
          agent.train_steps == cfg.train_steps) {
        const std::int64_t env_step =
            steps_before + static_cast<std::int64_t>((k + 1) * cfg.train_every);
        log.rows.push_back({agent.train_steps, loss, cfg.epsilon.at(env_step), buffer.size(),
                            last_episode_reward});
      }
    }
    const bool has_window = std::any_of(ep.runs.begin(), ep.runs.end(),
                                        [&](const auto& r) { return r.size() >= cfg.seq_len; });
    if (!has_window && buffer.window_count(cfg.seq_len) < cfg.batch_size) {
      throw NotEnoughData("train_agent: no contiguous run of " + std::to_string(cfg.seq_len) +
                          " transitions in the training range");
    }
  }
  return log;
}

void write_metrics_csv(std::ostream& out, const TrainingLog& log) {
  out << "step,loss,epsilon,buffer_size,cumulative_reward\n";
  for (const MetricsRow& r : log.rows) {
    out << r.step << ',' << format_real(r.loss) << ',' << format_real(r.epsilon) << ','
        << r.buffer_size << ',' << format_real(r.cumulative_reward) << '\n';
  }
}

}  // namespace drqn
