#include "geosched/score_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "geosched/rng.hpp"

namespace geosched {

ScoreSource::ScoreSource(LearnedScore learned) : impl_(std::move(learned)) {
  if (!std::get<LearnedScore>(impl_).net) throw std::invalid_argument("learned score source needs a network");
}

int ScoreSource::dim() const {
  if (const auto* o = std::get_if<OracleScore>(&impl_)) return o->target.dim();
  return std::get<LearnedScore>(impl_).net->config().dim;
}

const NoiseSchedule& ScoreSource::noise_schedule() const {
  if (const auto* o = std::get_if<OracleScore>(&impl_)) return o->target.noise_schedule();
  return std::get<LearnedScore>(impl_).sched;
}

const DiffusedGmm* ScoreSource::target() const {
  const auto* o = std::get_if<OracleScore>(&impl_);
  return o ? &o->target : nullptr;
}

const ScoreNetwork* ScoreSource::network() const {
  const auto* l = std::get_if<LearnedScore>(&impl_);
  return l ? l->net.get() : nullptr;
}

Points eval_score(const ScoreSource& src, const Points& xs, double t) {
  const double t_min = src.noise_schedule().t_min();
  if (!(t >= t_min && t <= 1.0)) {
    throw std::domain_error(fmt::format("score requested at t={} outside [{}, 1]", t, t_min));
  }
  if (const auto* target = src.target()) return score(*target, xs, t);
  const ScoreNetwork& net = *src.network();
  const double scale = -1.0 / sigma_at(src.noise_schedule(), t);
  constexpr Eigen::Index kChunk = 4096;
  Points out(xs.rows(), xs.cols());
  const std::vector<double> ts(static_cast<std::size_t>(std::min(kChunk, xs.cols())), t);
  for (Eigen::Index start = 0; start < xs.cols(); start += kChunk) {
    const Eigen::Index len = std::min(kChunk, xs.cols() - start);
    out.middleCols(start, len) =
        scale * net.predict_noise(xs.middleCols(start, len), std::span<const double>(ts).first(len));
  }
  return out;
}

DsmBatch make_dsm_batch(const Points& x0, const NoiseSchedule& sched, std::span<const double> times,
                        std::uint64_t seed) {
  if (x0.cols() == 0) throw std::invalid_argument("empty DSM batch");
  if (times.empty()) throw std::invalid_argument("DSM needs at least one training time");
  const Eigen::Index n = x0.cols();
  const Eigen::Index d = x0.rows();
  DsmBatch b{Points(d, n), Points(d, n), std::vector<double>(static_cast<std::size_t>(n))};
  for (Eigen::Index i = 0; i < n; ++i) {
    SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    auto k = static_cast<std::size_t>(rng.uniform() * static_cast<double>(times.size()));
    if (k >= times.size()) k = times.size() - 1;
    const double t = sched.clamp(times[k]);
    const auto [s, sigma] = kernel_params(sched, t);
    for (Eigen::Index j = 0; j < d; ++j) {
      const double eps = rng.normal();
      b.noise(j, i) = eps;
      b.x_t(j, i) = s * x0(j, i) + sigma * eps;
    }
    b.t[static_cast<std::size_t>(i)] = t;
  }
  return b;
}

DsmBatch noise_batch(const Points& x0, const NoiseSchedule& sched, std::vector<double> sample_times,
                     std::uint64_t seed) {
  const Eigen::Index n = x0.cols();
  const Eigen::Index d = x0.rows();
  if (n == 0) throw std::invalid_argument("empty DSM batch");
  if (static_cast<Eigen::Index>(sample_times.size()) != n) throw std::invalid_argument("one time per sample required");
  DsmBatch b{Points(d, n), Points(d, n), std::move(sample_times)};
  for (Eigen::Index i = 0; i < n; ++i) {
    SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    double& t = b.t[static_cast<std::size_t>(i)];
    t = sched.clamp(t);
    const auto [s, sigma] = kernel_params(sched, t);
    for (Eigen::Index j = 0; j < d; ++j) {
      const double eps = rng.normal();
      b.noise(j, i) = eps;
      b.x_t(j, i) = s * x0(j, i) + sigma * eps;
    }
  }
  return b;
}

double dsm_objective(const ScoreSource& src, const DsmBatch& batch) {
  const auto n = batch.x_t.cols();
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = batch.t[static_cast<std::size_t>(i)];
    const double sigma = sigma_at(src.noise_schedule(), t);
    const Eigen::VectorXd s = eval_score(src, Points(batch.x_t.col(i)), t);
    total += (sigma * s + batch.noise.col(i)).squaredNorm();
  }
  return total / static_cast<double>(n);
}

LossAndGrad dsm_loss(const ScoreNetwork& net, const DsmBatch& batch) {
  LossAndGrad out;
  // sigma * s_theta + eps = eps - eps_hat, so the weighted objective is plain noise regression.
  out.loss = net.noise_regression(batch.x_t, batch.t, batch.noise, &out.grad);
  return out;
}

LossAndGrad dsm_loss(const ScoreNetwork& net, const Points& x0, const NoiseSchedule& sched,
                     std::span<const double> times, std::uint64_t seed) {
  return dsm_loss(net, make_dsm_batch(x0, sched, times, seed));
}

TraceGradEstimate hutchinson_trace_grad(const ScoreSource& src, const Points& xs, double t,
                                        const HutchinsonOptions& opts, std::uint64_t seed) {
  if (opts.probes < 1) throw std::invalid_argument("Hutchinson needs at least one probe");
  const Eigen::Index d = xs.rows();
  const Eigen::Index n = xs.cols();
  const int m = opts.probes;

  // probes(j, i*m + k): component j of probe k for column i.
  Points probes(d, n * m);
  for (Eigen::Index i = 0; i < n; ++i) {
    SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    for (int k = 0; k < m; ++k)
      for (Eigen::Index j = 0; j < d; ++j) probes(j, i * m + k) = rng.normal();
  }

  Points samples(d, n * m);
  if (src.target() && src.target()->base().size() == 1 && opts.exact_oracle) {
    // A single Gaussian has an affine score.
    samples.setZero();
  } else if (src.target() && d == 1 && opts.exact_oracle) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double third = score_derivative_1d(*src.target(), xs(0, i), t, 3);
      for (int k = 0; k < m; ++k) samples(0, i * m + k) = probes(0, i * m + k) * probes(0, i * m + k) * third;
    }
  } else {
    // q(y) = v . (S(y + h v) - S(y - h v)) / (2h), differentiated by central
    // differences along each coordinate.
    const double h = opts.inner_h;
    auto quad_form = [&](const Points& ys) {
      const Points plus = eval_score(src, ys + h * probes, t);
      const Points minus = eval_score(src, ys - h * probes, t);
      return Eigen::RowVectorXd(((plus - minus).array() * probes.array()).colwise().sum() / (2.0 * h));
    };
    Points base(d, n * m);
    Eigen::RowVectorXd steps(n * m);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double H = opts.outer_h * (1.0 + xs.col(i).norm());
      for (int k = 0; k < m; ++k) {
        base.col(i * m + k) = xs.col(i);
        steps[i * m + k] = H;
      }
    }
    for (Eigen::Index j = 0; j < d; ++j) {
      Points up = base;
      Points down = base;
      up.row(j) += steps;
      down.row(j) -= steps;
      samples.row(j) = (quad_form(up) - quad_form(down)).cwiseQuotient(2.0 * steps);
    }
  }

  TraceGradEstimate out{Points(d, n), Points::Zero(d, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto block = samples.middleCols(i * m, m);
    out.mean.col(i) = block.rowwise().mean();
    if (m > 1) {
      const Eigen::VectorXd var =
          (block.colwise() - out.mean.col(i)).array().square().rowwise().sum() / static_cast<double>(m - 1);
      out.std_error.col(i) = (var / static_cast<double>(m)).cwiseSqrt();
    }
  }
  return out;
}

}  // namespace geosched
