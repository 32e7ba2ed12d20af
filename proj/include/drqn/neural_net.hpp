#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "drqn/errors.hpp"
#include "drqn/random.hpp"

namespace drqn {

inline constexpr Eigen::Index kNumActions = 3;

// Lstm: one LSTM layer. Dense: same-width tanh layer without recurrence.
enum class CellKind : std::uint32_t { Lstm = 0, Dense = 1 };

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Recurrent Q-network parameters. Gate blocks are stacked [input, forget,
// candidate, output] along the rows of wx, wh and b. Output row order is
// (buy, hold, sell).
template <typename Scalar>
struct QNetworkParams {
  CellKind kind = CellKind::Lstm;
  MatrixX<Scalar> wx;  // (G*H) x D
  MatrixX<Scalar> wh;  // (G*H) x H, empty for Dense
  VectorX<Scalar> b;   // G*H
  MatrixX<Scalar> wy;  // 3 x H
  VectorX<Scalar> by;  // 3

  Eigen::Index input_dim() const { return wx.cols(); }
  Eigen::Index hidden() const { return wy.cols(); }
  static Eigen::Index gate_count(CellKind k) { return k == CellKind::Lstm ? 4 : 1; }

  static QNetworkParams zeros(CellKind kind, Eigen::Index input_dim, Eigen::Index hidden) {
    const Eigen::Index g = gate_count(kind) * hidden;
    QNetworkParams p;
    p.kind = kind;
    p.wx = MatrixX<Scalar>::Zero(g, input_dim);
    p.wh = kind == CellKind::Lstm ? MatrixX<Scalar>::Zero(g, hidden) : MatrixX<Scalar>(0, 0);
    p.b = VectorX<Scalar>::Zero(g);
    p.wy = MatrixX<Scalar>::Zero(kNumActions, hidden);
    p.by = VectorX<Scalar>::Zero(kNumActions);
    return p;
  }

  QNetworkParams zeros_like() const { return zeros(kind, input_dim(), hidden()); }

  // Visits every tensor in declared order as (data pointer, element count).
  template <typename F>
  void for_each_tensor(F&& f) {
    f(wx.data(), wx.size());
    f(wh.data(), wh.size());
    f(b.data(), b.size());
    f(wy.data(), wy.size());
    f(by.data(), by.size());
  }
  template <typename F>
  void for_each_tensor(F&& f) const {
    f(wx.data(), wx.size());
    f(wh.data(), wh.size());
    f(b.data(), b.size());
    f(wy.data(), wy.size());
    f(by.data(), by.size());
  }

  Eigen::Index parameter_count() const { return wx.size() + wh.size() + b.size() + wy.size() + by.size(); }

  bool same_shape(const QNetworkParams& o) const {
    return kind == o.kind && wx.rows() == o.wx.rows() && wx.cols() == o.wx.cols() &&
           wh.rows() == o.wh.rows() && wh.cols() == o.wh.cols() && b.size() == o.b.size() &&
           wy.rows() == o.wy.rows() && wy.cols() == o.wy.cols() && by.size() == o.by.size();
  }

  bool all_finite() const {
    return wx.allFinite() && wh.allFinite() && b.allFinite() && wy.allFinite() && by.allFinite();
  }

  bool operator==(const QNetworkParams& o) const {
    return same_shape(o) && wx == o.wx && wh == o.wh && b == o.b && wy == o.wy && by == o.by;
  }
};

template <typename Scalar>
using Gradients = QNetworkParams<Scalar>;

// Columns are independent sequences of a batch.
template <typename Scalar>
struct HiddenState {
  MatrixX<Scalar> h;
  MatrixX<Scalar> c;

  static HiddenState zero(Eigen::Index hidden, Eigen::Index batch = 1) {
    return {MatrixX<Scalar>::Zero(hidden, batch), MatrixX<Scalar>::Zero(hidden, batch)};
  }
};

template <typename Scalar>
struct ForwardCache {
  std::vector<MatrixX<Scalar>> x;       // inputs, D x B per step
  std::vector<MatrixX<Scalar>> gates;   // activated gates, G*H x B
  std::vector<MatrixX<Scalar>> c;       // cell state after each step
  std::vector<MatrixX<Scalar>> h;       // hidden output after each step
  std::vector<MatrixX<Scalar>> tanh_c;  // tanh(c)
  HiddenState<Scalar> initial;

  std::size_t steps() const { return x.size(); }
};

template <typename Scalar>
struct ForwardResult {
  std::vector<MatrixX<Scalar>> q;  // 3 x B per step
  HiddenState<Scalar> final_state;
};

namespace detail {

template <typename Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& z) {
  using S = typename Derived::Scalar;
  return (S(1) + (-z).exp()).inverse();
}

}  // namespace detail

// Runs the network over `inputs` (T steps of D x B) from `initial`. Pass a
// cache to enable backward().
template <typename Scalar>
ForwardResult<Scalar> forward(const QNetworkParams<Scalar>& params,
                              std::span<const MatrixX<Scalar>> inputs,
                              const HiddenState<Scalar>& initial,
                              ForwardCache<Scalar>* cache = nullptr) {
  if (inputs.empty()) throw DimensionMismatch("forward: empty sequence");
  const Eigen::Index hidden = params.hidden();
  const Eigen::Index batch = inputs.front().cols();
  const bool lstm = params.kind == CellKind::Lstm;
  if (initial.h.rows() != hidden || initial.h.cols() != batch ||
      (lstm && (initial.c.rows() != hidden || initial.c.cols() != batch))) {
    throw DimensionMismatch("forward: hidden state shape does not match network/batch");
  }
  for (const auto& x : inputs) {
    if (x.rows() != params.input_dim() || x.cols() != batch) {
      throw DimensionMismatch("forward: input has " + std::to_string(x.rows()) + " rows, network expects " +
                              std::to_string(params.input_dim()));
    }
  }
  if (cache) {
    *cache = ForwardCache<Scalar>{};
    cache->initial = initial;
  }

  ForwardResult<Scalar> result;
  result.q.reserve(inputs.size());
  MatrixX<Scalar> h = initial.h;
  MatrixX<Scalar> c = initial.c;
  MatrixX<Scalar> z(params.b.size(), batch);
  for (const auto& x : inputs) {
    z.noalias() = params.wx * x;
    if (lstm) z.noalias() += params.wh * h;
    z.colwise() += params.b;
    MatrixX<Scalar> tanh_c;
    if (lstm) {
      z.topRows(2 * hidden) = detail::sigmoid(z.topRows(2 * hidden).array()).matrix();
      z.middleRows(2 * hidden, hidden) = z.middleRows(2 * hidden, hidden).array().tanh().matrix();
      z.bottomRows(hidden) = detail::sigmoid(z.bottomRows(hidden).array()).matrix();
      c = (z.middleRows(hidden, hidden).array() * c.array() +
           z.topRows(hidden).array() * z.middleRows(2 * hidden, hidden).array())
              .matrix();
      tanh_c = c.array().tanh().matrix();
      h = (z.bottomRows(hidden).array() * tanh_c.array()).matrix();
    } else {
      z = z.array().tanh().matrix();
      h = z;
    }
    MatrixX<Scalar> q(kNumActions, batch);
    q.noalias() = params.wy * h;
    q.colwise() += params.by;
    result.q.push_back(std::move(q));
    if (cache) {
      cache->x.push_back(x);
      cache->gates.push_back(z);
      cache->c.push_back(c);
      cache->h.push_back(h);
      cache->tanh_c.push_back(std::move(tanh_c));
    }
  }
  if (lstm) {
    result.final_state = {h, c};
  } else {
    result.final_state = initial;  // stateless: carry is the identity
  }
  return result;
}

// Exact backpropagation through time for the sequence held in `cache`, given
// dLoss/dQ per step (3 x B each).
template <typename Scalar>
Gradients<Scalar> backward(const QNetworkParams<Scalar>& params, const ForwardCache<Scalar>& cache,
                           std::span<const MatrixX<Scalar>> dq) {
  const std::size_t steps = cache.steps();
  if (steps == 0) throw MissingCache("backward: forward cache is empty");
  if (dq.size() != steps) throw DimensionMismatch("backward: upstream gradient count differs from cached steps");
  const Eigen::Index hidden = params.hidden();
  const Eigen::Index batch = cache.x.front().cols();
  if (cache.x.front().rows() != params.input_dim() || cache.h.front().rows() != hidden) {
    throw MissingCache("backward: cache was produced by a different network shape");
  }
  for (const auto& d : dq) {
    if (d.rows() != kNumActions || d.cols() != batch) throw DimensionMismatch("backward: upstream gradient shape");
  }
  const bool lstm = params.kind == CellKind::Lstm;
  Gradients<Scalar> grads = params.zeros_like();
  MatrixX<Scalar> dh_next = MatrixX<Scalar>::Zero(hidden, batch);
  MatrixX<Scalar> dc_next = MatrixX<Scalar>::Zero(hidden, batch);
  MatrixX<Scalar> dh(hidden, batch);
  MatrixX<Scalar> dz(params.b.size(), batch);

  for (std::size_t t = steps; t-- > 0;) {
    const MatrixX<Scalar>& h = cache.h[t];
    grads.wy.noalias() += dq[t] * h.transpose();
    grads.by += dq[t].rowwise().sum();
    dh.noalias() = params.wy.transpose() * dq[t];
    if (!lstm) {
      dz = (dh.array() * (Scalar(1) - h.array().square())).matrix();
      grads.wx.noalias() += dz * cache.x[t].transpose();
      grads.b += dz.rowwise().sum();
      continue;
    }
    dh += dh_next;
    const auto& gates = cache.gates[t];
    const auto i = gates.topRows(hidden).array();
    const auto f = gates.middleRows(hidden, hidden).array();
    const auto g = gates.middleRows(2 * hidden, hidden).array();
    const auto o = gates.bottomRows(hidden).array();
    const auto tc = cache.tanh_c[t].array();
    const MatrixX<Scalar>& c_prev = t > 0 ? cache.c[t - 1] : cache.initial.c;
    const MatrixX<Scalar>& h_prev = t > 0 ? cache.h[t - 1] : cache.initial.h;

    const MatrixX<Scalar> dc = (dh.array() * o * (Scalar(1) - tc.square()) + dc_next.array()).matrix();
    dz.topRows(hidden) = (dc.array() * g * i * (Scalar(1) - i)).matrix();
    dz.middleRows(hidden, hidden) = (dc.array() * c_prev.array() * f * (Scalar(1) - f)).matrix();
    dz.middleRows(2 * hidden, hidden) = (dc.array() * i * (Scalar(1) - g.square())).matrix();
    dz.bottomRows(hidden) = (dh.array() * tc * o * (Scalar(1) - o)).matrix();

    grads.wx.noalias() += dz * cache.x[t].transpose();
    grads.wh.noalias() += dz * h_prev.transpose();
    grads.b += dz.rowwise().sum();
    dh_next.noalias() = params.wh.transpose() * dz;
    dc_next = (dc.array() * f).matrix();
  }
  return grads;
}

// Uniform in [-1/sqrt(H), 1/sqrt(H)], forget-gate bias 1.0.
template <typename Scalar>
QNetworkParams<Scalar> init_params(Eigen::Index input_dim, Eigen::Index hidden, std::uint64_t seed,
                                   CellKind kind = CellKind::Lstm) {
  if (input_dim < 1 || hidden < 1) throw DimensionMismatch("init_params: dimensions must be >= 1");
  auto p = QNetworkParams<Scalar>::zeros(kind, input_dim, hidden);
  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  p.for_each_tensor([&](Scalar* data, Eigen::Index n) {
    for (Eigen::Index k = 0; k < n; ++k) data[k] = static_cast<Scalar>(rng.uniform(-bound, bound));
  });
  if (kind == CellKind::Lstm) p.b.segment(hidden, hidden).setConstant(Scalar(1));
  return p;
}

enum class OptimizerKind : std::uint32_t { Adam = 0, Sgd = 1 };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::Adam;
  double learning_rate = 0.00025;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename Scalar>
struct OptimizerState {
  OptimizerConfig config;
  QNetworkParams<Scalar> m;  // first moments
  QNetworkParams<Scalar> v;  // second moments
  std::int64_t step = 0;

  static OptimizerState for_params(const QNetworkParams<Scalar>& params, OptimizerConfig config = {}) {
    return {config, params.zeros_like(), params.zeros_like(), 0};
  }
};

template <typename Scalar>
void optimizer_step(QNetworkParams<Scalar>& params, const Gradients<Scalar>& grads,
                    OptimizerState<Scalar>& state) {
  if (!params.same_shape(grads) || !params.same_shape(state.m) || !params.same_shape(state.v)) {
    throw DimensionMismatch("optimizer_step: parameter, gradient and moment shapes differ");
  }
  ++state.step;
  const OptimizerConfig& cfg = state.config;
  std::vector<const Scalar*> g_ptrs;
  grads.for_each_tensor([&](const Scalar* d, Eigen::Index) { g_ptrs.push_back(d); });
  std::vector<Scalar*> m_ptrs, v_ptrs;
  state.m.for_each_tensor([&](Scalar* d, Eigen::Index) { m_ptrs.push_back(d); });
  state.v.for_each_tensor([&](Scalar* d, Eigen::Index) { v_ptrs.push_back(d); });

  const Scalar lr = static_cast<Scalar>(cfg.learning_rate);
  const Scalar b1 = static_cast<Scalar>(cfg.beta1), b2 = static_cast<Scalar>(cfg.beta2);
  const Scalar eps = static_cast<Scalar>(cfg.epsilon);
  const Scalar corr1 = Scalar(1) - static_cast<Scalar>(std::pow(cfg.beta1, static_cast<double>(state.step)));
  const Scalar corr2 = Scalar(1) - static_cast<Scalar>(std::pow(cfg.beta2, static_cast<double>(state.step)));
  std::size_t k = 0;
  params.for_each_tensor([&](Scalar* p, Eigen::Index n) {
    Eigen::Map<VectorX<Scalar>> theta(p, n);
    Eigen::Map<const VectorX<Scalar>> g(g_ptrs[k], n);
    if (cfg.kind == OptimizerKind::Sgd) {
      theta -= lr * g;
    } else {
      Eigen::Map<VectorX<Scalar>> m(m_ptrs[k], n);
      Eigen::Map<VectorX<Scalar>> v(v_ptrs[k], n);
      m = b1 * m + (Scalar(1) - b1) * g;
      v = b2 * v + (Scalar(1) - b2) * g.cwiseProduct(g);
      theta.array() -= lr * (m.array() / corr1) / ((v.array() / corr2).sqrt() + eps);
    }
    ++k;
  });
}

// Versioned little-endian binary container: shape, parameters, optimizer
// state, and the training step count. Round-trips bit-exactly.
struct Checkpoint {
  QNetworkParams<double> params;
  OptimizerState<double> optimizer;
  std::int64_t train_step = 0;
};

void save_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint load_checkpoint(std::istream& in);
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace drqn
