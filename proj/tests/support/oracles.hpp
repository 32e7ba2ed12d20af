#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "drqn/market_data.hpp"

// Brute-force references written independently of the library.
namespace drqn::check {

inline bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-300});
}

inline double rel_error(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

inline GroupBar make_group_bar(double o, double h, double l, double c, double v, std::size_t index) {
  GroupBar b;
  b.open = Decimal::from_double(o, 4);
  b.high = Decimal::from_double(h, 4);
  b.low = Decimal::from_double(l, 4);
  b.close = Decimal::from_double(c, 4);
  b.volume = Decimal::from_double(v, 0);
  b.group_index = index;
  b.member_count = 30;
  b.timestamp = static_cast<Timestamp>(index) * 1800;
  return b;
}

inline std::vector<GroupBar> random_group_bars(std::size_t n, std::uint64_t seed, double start = 20.0) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z(0.0, 0.01);
  std::uniform_real_distribution<double> u(0.0, 0.01), vol(100.0, 10000.0);
  std::vector<GroupBar> out;
  double prev = start;
  for (std::size_t i = 0; i < n; ++i) {
    const double open = prev * std::exp(z(gen) * 0.2);
    const double close = open * std::exp(z(gen));
    const double high = std::max(open, close) * (1.0 + u(gen));
    const double low = std::min(open, close) * (1.0 - u(gen));
    out.push_back(make_group_bar(open, high, low, close, std::round(vol(gen)), i));
    prev = out.back().close.to_double();
  }
  return out;
}

// 100 * sum(H - O) / sum(O - L) over the last n bars.
inline std::optional<double> ar_oracle(const std::vector<GroupBar>& bars, std::size_t n) {
  long double num = 0, den = 0;
  for (std::size_t i = bars.size() - n; i < bars.size(); ++i) {
    num += static_cast<long double>(bars[i].high.units() - bars[i].open.units());
    den += static_cast<long double>(bars[i].open.units() - bars[i].low.units());
  }
  if (den <= 0) return std::nullopt;
  return static_cast<double>(100.0L * num / den);
}

// 100 * sum max(0, H - PC) / sum max(0, PC - L) over the last n bars.
inline std::optional<double> br_oracle(const std::vector<GroupBar>& bars, std::size_t n) {
  long double num = 0, den = 0;
  for (std::size_t i = bars.size() - n; i < bars.size(); ++i) {
    const auto pc = bars[i - 1].close.units();
    num += std::max<long double>(0, static_cast<long double>(bars[i].high.units() - pc));
    den += std::max<long double>(0, static_cast<long double>(pc - bars[i].low.units()));
  }
  if (den <= 0) return std::nullopt;
  return static_cast<double>(100.0L * num / den);
}

// Population z-scores of the trailing window, in long double.
inline std::vector<double> zscore_oracle(const std::vector<double>& s, std::size_t window) {
  long double mean = 0, var = 0;
  for (std::size_t i = s.size() - window; i < s.size(); ++i) mean += s[i];
  mean /= window;
  for (std::size_t i = s.size() - window; i < s.size(); ++i) var += (s[i] - mean) * (s[i] - mean);
  const long double sd = std::sqrt(var / window);
  std::vector<double> out;
  for (std::size_t i = s.size() - window; i < s.size(); ++i) out.push_back(static_cast<double>((s[i] - mean) / sd));
  return out;
}

// Q fixed point of a deterministic MDP by value iteration.
inline Eigen::MatrixXd value_iteration(const Eigen::MatrixXi& next, const Eigen::MatrixXd& r, double gamma) {
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(r.rows(), r.cols());
  for (int it = 0; it < 10'000; ++it) {
    Eigen::MatrixXd nq(q.rows(), q.cols());
    for (Eigen::Index s = 0; s < q.rows(); ++s) {
      for (Eigen::Index a = 0; a < q.cols(); ++a) nq(s, a) = r(s, a) + gamma * q.row(next(s, a)).maxCoeff();
    }
    const double delta = (nq - q).cwiseAbs().maxCoeff();
    q = nq;
    if (delta < 1e-14) break;
  }
  return q;
}

struct RandomMdp {
  Eigen::MatrixXi next;
  Eigen::MatrixXd reward;
};

// Up to 5 states and 3 actions, rewards uniform in [-1, 1].
inline RandomMdp random_mdp(std::mt19937_64& gen) {
  const int ns = 1 + static_cast<int>(gen() % 5), na = 1 + static_cast<int>(gen() % 3);
  RandomMdp m{Eigen::MatrixXi(ns, na), Eigen::MatrixXd(ns, na)};
  std::uniform_real_distribution<double> rd(-1.0, 1.0);
  for (int s = 0; s < ns; ++s) {
    for (int a = 0; a < na; ++a) {
      m.next(s, a) = static_cast<int>(gen() % static_cast<std::uint64_t>(ns));
      m.reward(s, a) = rd(gen);
    }
  }
  return m;
}

}  // namespace drqn::check
