// SPDX-License-Identifier: Apache-2.0
//
// A small feed-forward network engine with exactly the layers the
// self-nomination policy needs: 1D convolution, dense, batch normalization,
// tanh, and concatenation of a side branch. Activations are stored one
// sample per column.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace selfnom::nn {

enum class LayerKind : std::uint32_t { Conv1d = 0, Dense = 1, BatchNorm = 2, Tanh = 3, ConcatBranch = 4 };

struct LayerSpec {
  LayerKind kind = LayerKind::Dense;
  std::size_t in_width = 0;
  std::size_t out_width = 0;
  // Conv1d: input is `length` positions x in_channels, stored position-major
  // (x[p * in_channels + c]); valid convolution, stride 1.
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 0;

  static LayerSpec conv1d(std::size_t length, std::size_t in_channels, std::size_t out_channels,
                          std::size_t kernel);
  static LayerSpec dense(std::size_t in, std::size_t out);
  static LayerSpec batchnorm(std::size_t width);
  static LayerSpec tanh(std::size_t width);
  // Appends the branch output (branch_width rows) below the trunk activations.
  static LayerSpec concat_branch(std::size_t trunk_width, std::size_t branch_width);

  std::size_t param_count() const;
  bool operator==(const LayerSpec&) const = default;
};

struct NetSpec {
  std::size_t input_width = 0;
  std::size_t side_width = 0;      // 0: no side input
  std::vector<LayerSpec> branch;   // applied to the side input
  std::vector<LayerSpec> trunk;    // one ConcatBranch iff side_width > 0; ends at width 1

  void validate() const;  // throws ShapeMismatch
  std::size_t param_count() const;
  bool operator==(const NetSpec&) const = default;
};

enum class Mode { Train, Eval };

inline constexpr double kBatchNormEpsilon = 1e-5;
inline constexpr double kBatchNormMomentum = 0.1;

using Gradient = Eigen::VectorXd;

class Network;

// Activations of one batch_forward call. Only valid for the parameter
// version it was computed with.
class ForwardPass {
 public:
  const Eigen::VectorXd& outputs() const { return c_; }
  std::size_t batch_size() const { return static_cast<std::size_t>(c_.size()); }

 private:
  friend class Network;
  struct Stage {
    std::vector<Eigen::MatrixXd> acts;  // acts[i] = input of layer i, acts.back() = output
    // per BatchNorm layer (indexed by layer position), batch statistics
    std::vector<Eigen::VectorXd> mean, var, inv_std;
    std::vector<Eigen::MatrixXd> xhat;
  };
  Stage branch_;
  Stage trunk_;
  Eigen::VectorXd c_;
  std::uint64_t version_ = 0;
  Mode mode_ = Mode::Eval;
};

class Network {
 public:
  // All parameters zero, running mean 0 and running variance 1.
  explicit Network(NetSpec spec);
  // Uniform fan-in initialization U(-1/sqrt(fan_in), 1/sqrt(fan_in)) for
  // conv/dense weights and biases; batch-norm scale 1, shift 0.
  static Network initialized(NetSpec spec, std::uint64_t seed);

  const NetSpec& spec() const { return spec_; }
  Mode mode() const { return mode_; }
  void set_mode(Mode m) { mode_ = m; }

  const Eigen::VectorXd& parameters() const { return theta_; }
  void set_parameters(const Eigen::VectorXd& theta);
  // Mutable access for optimizers; bumps the version.
  Eigen::VectorXd& mutable_parameters();
  std::uint64_t version() const { return version_; }

  const Eigen::VectorXd& running_mean() const { return running_mean_; }
  const Eigen::VectorXd& running_var() const { return running_var_; }
  void set_running_stats(const Eigen::VectorXd& mean, const Eigen::VectorXd& var);

  // inputs: input_width x B; side: side_width x B (required iff side_width > 0).
  // Train mode normalizes with batch statistics and needs B >= 2 when the
  // network has batch-norm layers.
  ForwardPass batch_forward(const Eigen::MatrixXd& inputs,
                            const Eigen::MatrixXd* side = nullptr) const;
  ForwardPass forward(std::span<const double> input,
                      std::optional<double> side = std::nullopt) const;

  // Gradient of sum_b upstream(b) * c_b with respect to the parameters,
  // consistent with the statistics mode the cache was computed in.
  Gradient backward(const ForwardPass& cache, const Eigen::VectorXd& upstream) const;

  // Running statistics <- (1 - momentum) running + momentum batch.
  void absorb_batch_statistics(const ForwardPass& cache);

  bool has_batchnorm() const;

 private:
  struct Offsets {
    std::vector<std::size_t> param;  // per layer
    std::vector<std::size_t> stat;   // per layer, into running_mean_/var_
  };
  void run_stage(const std::vector<LayerSpec>& layers, const Offsets& off, ForwardPass::Stage& st,
                 const Eigen::MatrixXd* concat_source) const;
  Eigen::MatrixXd backprop_stage(const std::vector<LayerSpec>& layers, const Offsets& off,
                                 const ForwardPass::Stage& st, Mode mode, Eigen::MatrixXd grad_out,
                                 Gradient& g, Eigen::MatrixXd* concat_grad) const;

  NetSpec spec_;
  Offsets branch_off_;
  Offsets trunk_off_;
  Eigen::VectorXd theta_;
  Eigen::VectorXd running_mean_;
  Eigen::VectorXd running_var_;
  Mode mode_ = Mode::Eval;
  std::uint64_t version_ = 0;
};

enum class Direction { Ascend, Descend };

// theta <- theta -/+ learning_rate * g
void sgd_step(Network& net, const Gradient& g, double learning_rate, Direction dir);

enum class OptimizerKind { Sgd, Momentum, Adam };

// Stateful update rule. Sgd is stateless and identical to sgd_step.
class Optimizer {
 public:
  Optimizer() = default;
  Optimizer(OptimizerKind kind, double learning_rate, double beta1 = 0.9, double beta2 = 0.999);
  void step(Network& net, const Gradient& g, Direction dir);
  OptimizerKind kind() const { return kind_; }

  std::uint64_t steps() const { return t_; }
  const Eigen::VectorXd& first_moment() const { return m_; }
  const Eigen::VectorXd& second_moment() const { return v_; }
  void restore(std::uint64_t steps, Eigen::VectorXd m, Eigen::VectorXd v);

 private:
  OptimizerKind kind_ = OptimizerKind::Sgd;
  double lr_ = 1e-3;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  std::uint64_t t_ = 0;
  Eigen::VectorXd m_, v_;
};

// Architecture, parameters and running statistics; see checkpoint.hpp for
// the full file layout.
void write_network(std::ostream& os, const Network& net);
Network read_network(std::istream& is);

}  // namespace selfnom::nn
