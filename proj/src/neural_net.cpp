#include "drqn/neural_net.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace drqn {
namespace {

constexpr std::array<char, 8> kMagic = {'D', 'R', 'Q', 'N', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian host");

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw DataError("DataError", "checkpoint truncated");
  return value;
}

void put_tensors(std::ostream& out, const QNetworkParams<double>& p) {
  p.for_each_tensor([&](const double* data, Eigen::Index n) {
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
  });
}

void get_tensors(std::istream& in, QNetworkParams<double>& p) {
  p.for_each_tensor([&](double* data, Eigen::Index n) {
    in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw DataError("DataError", "checkpoint truncated");
  });
}

}  // namespace

void save_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  const auto& p = ckpt.params;
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(p.kind));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(p.input_dim()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(p.hidden()));
  put<std::int64_t>(out, ckpt.train_step);
  const auto& cfg = ckpt.optimizer.config;
  put<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.kind));
  put<double>(out, cfg.learning_rate);
  put<double>(out, cfg.beta1);
  put<double>(out, cfg.beta2);
  put<double>(out, cfg.epsilon);
  put<std::int64_t>(out, ckpt.optimizer.step);
  put_tensors(out, p);
  put_tensors(out, ckpt.optimizer.m);
  put_tensors(out, ckpt.optimizer.v);
  if (!out) throw Error("RuntimeFailure", "checkpoint write failed");
}

Checkpoint load_checkpoint(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw DataError("DataError", "not a checkpoint file");
  const auto version = get<std::uint32_t>(in);
  if (version != kVersion) throw DataError("DataError", "unsupported checkpoint version " + std::to_string(version));
  const auto kind_raw = get<std::uint32_t>(in);
  if (kind_raw > 1) throw DataError("DataError", "checkpoint: unknown cell kind");
  const auto kind = static_cast<CellKind>(kind_raw);
  const auto input_dim = get<std::uint32_t>(in);
  const auto hidden = get<std::uint32_t>(in);
  if (input_dim == 0 || hidden == 0) throw DataError("DataError", "checkpoint: zero dimension");

  Checkpoint ckpt;
  ckpt.train_step = get<std::int64_t>(in);
  OptimizerConfig cfg;
  const auto opt_kind = get<std::uint32_t>(in);
  if (opt_kind > 1) throw DataError("DataError", "checkpoint: unknown optimizer");
  cfg.kind = static_cast<OptimizerKind>(opt_kind);
  cfg.learning_rate = get<double>(in);
  cfg.beta1 = get<double>(in);
  cfg.beta2 = get<double>(in);
  cfg.epsilon = get<double>(in);
  ckpt.params = QNetworkParams<double>::zeros(kind, input_dim, hidden);
  ckpt.optimizer = OptimizerState<double>::for_params(ckpt.params, cfg);
  ckpt.optimizer.step = get<std::int64_t>(in);
  get_tensors(in, ckpt.params);
  get_tensors(in, ckpt.optimizer.m);
  get_tensors(in, ckpt.optimizer.v);
  return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("RuntimeFailure", "cannot write checkpoint '" + path + "'");
  save_checkpoint(out, ckpt);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingRunArtifacts("cannot open checkpoint '" + path + "'");
  return load_checkpoint(in);
}

template struct QNetworkParams<double>;

}  // namespace drqn
