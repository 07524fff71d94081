#include "geosched/score_network.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "geosched/rng.hpp"

namespace geosched {

namespace {

using Matrix = Eigen::MatrixXd;
using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

constexpr double kLayerNormEps = 1e-5;
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }
double gelu_grad(double x) { return 0.5 * (1.0 + std::erf(x * kInvSqrt2)) + x * kInvSqrt2Pi * std::exp(-0.5 * x * x); }

}  // namespace

struct ScoreNetwork::Layout {
  struct Block {
    Eigen::Index gain, bias, weight, offset;
  };
  Eigen::Index w_in, b_in, w_emb, b_emb, w_out, b_out, total;
  std::vector<Block> blocks;
};

struct ScoreNetwork::Tape {
  Matrix embedding;
  Matrix emb_pre;
  std::vector<Matrix> hidden;  // h_0 .. h_depth
  std::vector<Matrix> normed;  // x_hat per block
  std::vector<Eigen::RowVectorXd> rstd;
  std::vector<Matrix> ln_out;
  std::vector<Matrix> pre;  // z per block
};

std::size_t ScoreNetwork::parameter_count(const NetworkConfig& c) {
  const std::size_t w = c.width;
  return w * c.dim + w + w * c.embed + w + c.depth * (2 * w + w * w + w) + c.dim * w + c.dim;
}

ScoreNetwork::Layout ScoreNetwork::layout() const {
  const Eigen::Index w = config_.width;
  const Eigen::Index d = config_.dim;
  Layout l{};
  Eigen::Index at = 0;
  auto take = [&](Eigen::Index n) {
    const Eigen::Index start = at;
    at += n;
    return start;
  };
  l.w_in = take(w * d);
  l.b_in = take(w);
  l.w_emb = take(w * config_.embed);
  l.b_emb = take(w);
  for (int k = 0; k < config_.depth; ++k) {
    Layout::Block b{};
    b.gain = take(w);
    b.bias = take(w);
    b.weight = take(w * w);
    b.offset = take(w);
    l.blocks.push_back(b);
  }
  l.w_out = take(d * w);
  l.b_out = take(d);
  l.total = at;
  return l;
}

ScoreNetwork::ScoreNetwork(NetworkConfig config, std::uint64_t seed) : config_(config) {
  if (config_.dim < 1 || config_.width < 1 || config_.depth < 0 || config_.embed < 2 || config_.embed % 2 != 0)
    throw std::invalid_argument("invalid network configuration");
  SplitMix64 rng(seed);
  freqs_.resize(config_.embed / 2);
  for (auto& f : freqs_) f = config_.fourier_scale * rng.normal();

  const Layout l = layout();
  params_.setZero(l.total);
  auto fill_uniform = [&](Eigen::Index start, Eigen::Index n, double fan_in) {
    const double bound = 1.0 / std::sqrt(fan_in);
    for (Eigen::Index i = 0; i < n; ++i) params_[start + i] = bound * (2.0 * rng.uniform() - 1.0);
  };
  const Eigen::Index w = config_.width;
  fill_uniform(l.w_in, w * config_.dim, config_.dim);
  fill_uniform(l.b_in, w, config_.dim);
  fill_uniform(l.w_emb, w * config_.embed, config_.embed);
  fill_uniform(l.b_emb, w, config_.embed);
  for (const auto& b : l.blocks) {
    params_.segment(b.gain, w).setOnes();
    fill_uniform(b.weight, w * w, static_cast<double>(w));
    fill_uniform(b.offset, w, static_cast<double>(w));
  }
  fill_uniform(l.w_out, config_.dim * w, static_cast<double>(w));
  fill_uniform(l.b_out, config_.dim, static_cast<double>(w));
}

ScoreNetwork::ScoreNetwork(NetworkConfig config, Eigen::VectorXd frequencies, Eigen::VectorXd parameters)
    : config_(config), freqs_(std::move(frequencies)), params_(std::move(parameters)) {
  if (freqs_.size() != config_.embed / 2) throw std::invalid_argument("frequency count does not match config");
  if (static_cast<std::size_t>(params_.size()) != parameter_count(config_))
    throw std::invalid_argument("parameter count does not match config");
}

Points ScoreNetwork::forward(const Points& x, std::span<const double> t, Tape* tape) const {
  const Eigen::Index n = x.cols();
  const Eigen::Index w = config_.width;
  const Eigen::Index d = config_.dim;
  if (x.rows() != d) throw std::invalid_argument("input dimension mismatch");
  if (static_cast<Eigen::Index>(t.size()) != n) throw std::invalid_argument("one time value per column required");
  const Layout l = layout();
  const double* p = params_.data();

  const Eigen::Index half = config_.embed / 2;
  Matrix emb(config_.embed, n);
  const double log_floor = std::log(config_.time_floor);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = config_.log_time ? (std::log(t[i]) - log_floor) / (-log_floor) : t[i];
    for (Eigen::Index k = 0; k < half; ++k) {
      const double a = 2.0 * std::numbers::pi * freqs_[k] * u;
      emb(k, i) = std::sin(a);
      emb(half + k, i) = std::cos(a);
    }
  }

  Matrix emb_pre = ConstMatrixMap(p + l.w_emb, w, config_.embed) * emb;
  emb_pre.colwise() += ConstVectorMap(p + l.b_emb, w);
  Matrix h = ConstMatrixMap(p + l.w_in, w, d) * x;
  h.colwise() += ConstVectorMap(p + l.b_in, w);
  h += emb_pre.unaryExpr(&gelu);

  if (tape) {
    tape->embedding = emb;
    tape->emb_pre = emb_pre;
    tape->hidden.assign(1, h);
    tape->normed.clear();
    tape->rstd.clear();
    tape->ln_out.clear();
    tape->pre.clear();
  }

  for (const auto& b : l.blocks) {
    const Eigen::RowVectorXd mean = h.colwise().mean();
    Matrix centred = h.rowwise() - mean;
    const Eigen::RowVectorXd var = centred.array().square().colwise().mean();
    const Eigen::RowVectorXd rstd = (var.array() + kLayerNormEps).rsqrt();
    Matrix normed = centred.array().rowwise() * rstd.array();
    Matrix ln = normed.array().colwise() * ConstVectorMap(p + b.gain, w).array();
    ln.colwise() += ConstVectorMap(p + b.bias, w);
    Matrix z = ConstMatrixMap(p + b.weight, w, w) * ln;
    z.colwise() += ConstVectorMap(p + b.offset, w);
    h += z.unaryExpr(&gelu);
    if (tape) {
      tape->normed.push_back(std::move(normed));
      tape->rstd.push_back(rstd);
      tape->ln_out.push_back(std::move(ln));
      tape->pre.push_back(std::move(z));
      tape->hidden.push_back(h);
    }
  }

  Matrix out = ConstMatrixMap(p + l.w_out, d, w) * h;
  out.colwise() += ConstVectorMap(p + l.b_out, d);
  return out;
}

Points ScoreNetwork::predict_noise(const Points& x, std::span<const double> t) const {
  return forward(x, t, nullptr);
}

double ScoreNetwork::noise_regression(const Points& x, std::span<const double> t, const Points& target,
                                      Eigen::VectorXd* grad) const {
  if (target.rows() != x.rows() || target.cols() != x.cols()) throw std::invalid_argument("target shape mismatch");
  const Eigen::Index n = x.cols();
  if (n == 0) throw std::invalid_argument("empty batch");
  Tape tape;
  const Points out = forward(x, t, grad ? &tape : nullptr);
  const Matrix resid = out - target;
  const double loss = resid.squaredNorm() / static_cast<double>(n);
  if (!grad) return loss;

  const Layout l = layout();
  const Eigen::Index w = config_.width;
  const Eigen::Index d = config_.dim;
  const double* p = params_.data();
  grad->setZero(params_.size());
  double* g = grad->data();

  Matrix d_out = (2.0 / static_cast<double>(n)) * resid;
  MatrixMap(g + l.w_out, d, w).noalias() = d_out * tape.hidden.back().transpose();
  Eigen::Map<Eigen::VectorXd>(g + l.b_out, d) = d_out.rowwise().sum();
  Matrix d_h = ConstMatrixMap(p + l.w_out, d, w).transpose() * d_out;

  for (int k = config_.depth - 1; k >= 0; --k) {
    const auto& b = l.blocks[k];
    const Matrix& z = tape.pre[k];
    const Matrix d_z = d_h.array() * z.unaryExpr(&gelu_grad).array();
    MatrixMap(g + b.weight, w, w).noalias() = d_z * tape.ln_out[k].transpose();
    Eigen::Map<Eigen::VectorXd>(g + b.offset, w) = d_z.rowwise().sum();
    const Matrix d_ln = ConstMatrixMap(p + b.weight, w, w).transpose() * d_z;

    const Matrix& xhat = tape.normed[k];
    Eigen::Map<Eigen::VectorXd>(g + b.gain, w) = (d_ln.array() * xhat.array()).rowwise().sum();
    Eigen::Map<Eigen::VectorXd>(g + b.bias, w) = d_ln.rowwise().sum();
    const Matrix d_xhat = d_ln.array().colwise() * ConstVectorMap(p + b.gain, w).array();
    const Eigen::RowVectorXd mean_dx = d_xhat.colwise().mean();
    const Eigen::RowVectorXd mean_dx_xhat = (d_xhat.array() * xhat.array()).colwise().mean();
    Matrix d_in = d_xhat.rowwise() - mean_dx;
    d_in -= (xhat.array().rowwise() * mean_dx_xhat.array()).matrix();
    d_in = d_in.array().rowwise() * tape.rstd[k].array();
    d_h += d_in;
  }

  MatrixMap(g + l.w_in, w, d).noalias() = d_h * x.transpose();
  Eigen::Map<Eigen::VectorXd>(g + l.b_in, w) = d_h.rowwise().sum();
  const Matrix d_emb = d_h.array() * tape.emb_pre.unaryExpr(&gelu_grad).array();
  MatrixMap(g + l.w_emb, w, config_.embed).noalias() = d_emb * tape.embedding.transpose();
  Eigen::Map<Eigen::VectorXd>(g + l.b_emb, w) = d_emb.rowwise().sum();
  return loss;
}

void adam_step(ScoreNetwork& net, const Eigen::VectorXd& grads, AdamState& state, double lr) {
  auto& theta = net.parameters();
  if (grads.size() != theta.size() || state.m.size() != theta.size() || state.v.size() != theta.size())
    throw std::invalid_argument("Adam state and gradient must match the parameter vector");
  ++state.step;
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grads;
  state.v = state.beta2 * state.v + (1.0 - state.beta2) * grads.cwiseAbs2();
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  theta.array() -= lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + state.eps);
}

namespace {

constexpr std::array<char, 8> kMagic = {'G', 'S', 'N', 'E', 'T', '\0', '\0', '\1'};

template <class T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error("truncated checkpoint");
  return v;
}

void put_vector(std::ostream& out, const Eigen::VectorXd& v) {
  put<std::uint64_t>(out, static_cast<std::uint64_t>(v.size()));
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

Eigen::VectorXd get_vector(std::istream& in) {
  const auto n = get<std::uint64_t>(in);
  if (n > (std::uint64_t{1} << 32)) throw std::runtime_error("implausible vector length in checkpoint");
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw std::runtime_error("truncated checkpoint");
  return v;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  const auto& c = ckpt.network.config();
  out.write(kMagic.data(), kMagic.size());
  put<std::int32_t>(out, c.dim);
  put<std::int32_t>(out, c.width);
  put<std::int32_t>(out, c.depth);
  put<std::int32_t>(out, c.embed);
  put<std::int32_t>(out, c.log_time ? 1 : 0);
  put<double>(out, c.fourier_scale);
  put<double>(out, c.time_floor);
  put<std::uint64_t>(out, ckpt.schedule_fingerprint);
  put_vector(out, ckpt.network.frequencies());
  put_vector(out, ckpt.network.parameters());
  put<std::uint8_t>(out, ckpt.training ? 1 : 0);
  if (ckpt.training) {
    const auto& s = *ckpt.training;
    put<std::int64_t>(out, s.iteration);
    put<std::int64_t>(out, s.adam.step);
    put_vector(out, s.adam.m);
    put_vector(out, s.adam.v);
    put_vector(out, Eigen::Map<const Eigen::VectorXd>(s.schedule.data(), static_cast<Eigen::Index>(s.schedule.size())));
  }
  if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw std::runtime_error(path.string() + " is not a geosched checkpoint");
  NetworkConfig c;
  c.dim = get<std::int32_t>(in);
  c.width = get<std::int32_t>(in);
  c.depth = get<std::int32_t>(in);
  c.embed = get<std::int32_t>(in);
  c.log_time = get<std::int32_t>(in) != 0;
  c.fourier_scale = get<double>(in);
  c.time_floor = get<double>(in);
  const auto fingerprint = get<std::uint64_t>(in);
  Eigen::VectorXd freqs = get_vector(in);
  Eigen::VectorXd params = get_vector(in);
  Checkpoint ckpt{ScoreNetwork(c, std::move(freqs), std::move(params)), fingerprint, std::nullopt};
  if (get<std::uint8_t>(in)) {
    TrainingState s;
    s.iteration = get<std::int64_t>(in);
    s.adam.step = get<std::int64_t>(in);
    s.adam.m = get_vector(in);
    s.adam.v = get_vector(in);
    const Eigen::VectorXd sched = get_vector(in);
    s.schedule.assign(sched.data(), sched.data() + sched.size());
    ckpt.training = std::move(s);
  }
  return ckpt;
}

}  // namespace geosched
