#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "geosched/target_oracle.hpp"

namespace geosched {

struct NetworkConfig {
  int dim = 1;
  int width = 128;
  int depth = 5;
  int embed = 12;  // Fourier features: embed/2 frequencies, sin and cos each
  double fourier_scale = 4.0;
  /// Embed w(t) = log(t / time_floor) / log(1 / time_floor) instead of t itself.
  bool log_time = true;
  double time_floor = 1e-5;

  bool operator==(const NetworkConfig&) const = default;
};

/// Noise-prediction network eps_hat(x, t):
///
///   e   = [sin(2 pi f w(t)), cos(2 pi f w(t))]            fixed random f
///   h_0 = W_in x + b_in + GELU(W_e e + b_e)               time-conditioned residual input
///   h_l = h_{l-1} + GELU(W_l LN_l(h_{l-1}) + b_l)         l = 1..depth
///   out = W_out h_depth + b_out
///
/// Gradients are computed by a hand-written reverse pass over this fixed graph.
class ScoreNetwork {
 public:
  explicit ScoreNetwork(NetworkConfig config, std::uint64_t seed = 0);
  ScoreNetwork(NetworkConfig config, Eigen::VectorXd frequencies, Eigen::VectorXd parameters);

  const NetworkConfig& config() const { return config_; }
  static std::size_t parameter_count(const NetworkConfig& config);

  Eigen::VectorXd& parameters() { return params_; }
  const Eigen::VectorXd& parameters() const { return params_; }
  const Eigen::VectorXd& frequencies() const { return freqs_; }

  /// eps_hat for each column of x at the matching entry of t.
  Points predict_noise(const Points& x, std::span<const double> t) const;

  /// Mean over columns of ||eps_hat(x_i, t_i) - target_i||^2; fills `grad` with
  /// the exact parameter gradient when non-null.
  double noise_regression(const Points& x, std::span<const double> t, const Points& target,
                          Eigen::VectorXd* grad) const;

 private:
  struct Layout;
  struct Tape;

  Layout layout() const;
  Points forward(const Points& x, std::span<const double> t, Tape* tape) const;

  NetworkConfig config_;
  Eigen::VectorXd freqs_;
  Eigen::VectorXd params_;
};

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState for_parameters(Eigen::Index n) {
    return AdamState{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
  }
};

/// One bias-corrected Adam update. Throws std::invalid_argument on size mismatch.
void adam_step(ScoreNetwork& net, const Eigen::VectorXd& grads, AdamState& state, double lr);

/// Optional training state carried by a checkpoint so runs can resume.
struct TrainingState {
  long iteration = 0;
  AdamState adam;
  std::vector<double> schedule;
};

struct Checkpoint {
  ScoreNetwork network;
  std::uint64_t schedule_fingerprint = 0;
  std::optional<TrainingState> training;
};

/// Binary checkpoint: "GSNET\0\0\1" magic, little-endian header with
/// (dim, width, depth, embed, log_time, fourier_scale, time_floor,
/// schedule fingerprint, parameter count), frequencies, parameters, and an
/// optional training-state trailer.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace geosched
