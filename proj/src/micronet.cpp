// SPDX-License-Identifier: Apache-2.0

#include "selfnom/micronet.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <string>

#include "selfnom/binary_io.hpp"
#include "selfnom/errors.hpp"
#include "selfnom/rng.hpp"

namespace selfnom::nn {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstRowMap = Eigen::Map<const RowMat>;
using RowMap = Eigen::Map<RowMat>;

std::size_t conv_length(const LayerSpec& l) { return l.in_width / l.in_channels; }
std::size_t conv_out_length(const LayerSpec& l) { return conv_length(l) - l.kernel + 1; }

std::size_t fan_in(const LayerSpec& l) {
  return l.kind == LayerKind::Conv1d ? l.in_channels * l.kernel : l.in_width;
}

void check_chain(const std::vector<LayerSpec>& layers, std::size_t width, const char* what,
                 std::size_t* out_width, std::size_t branch_width, int* concat_count) {
  for (const auto& l : layers) {
    if (l.in_width != width)
      throw ShapeMismatch(std::string(what) + ": layer input width " + std::to_string(l.in_width) +
                          " does not follow previous width " + std::to_string(width));
    switch (l.kind) {
      case LayerKind::Conv1d:
        if (l.in_channels == 0 || l.kernel == 0 || l.in_width % l.in_channels != 0 ||
            l.kernel > conv_length(l) || l.out_width != conv_out_length(l) * l.out_channels)
          throw ShapeMismatch(std::string(what) + ": inconsistent conv1d shape");
        break;
      case LayerKind::Dense:
        if (l.in_width == 0 || l.out_width == 0) throw ShapeMismatch("dense: zero width");
        break;
      case LayerKind::BatchNorm:
      case LayerKind::Tanh:
        if (l.in_width != l.out_width) throw ShapeMismatch("elementwise layer changes width");
        break;
      case LayerKind::ConcatBranch:
        if (concat_count == nullptr) throw ShapeMismatch("concat_branch inside the branch");
        if (l.out_width != l.in_width + branch_width)
          throw ShapeMismatch("concat_branch: width does not match branch output");
        ++*concat_count;
        break;
    }
    width = l.out_width;
  }
  *out_width = width;
}

}  // namespace

LayerSpec LayerSpec::conv1d(std::size_t length, std::size_t in_channels, std::size_t out_channels,
                            std::size_t kernel) {
  LayerSpec l;
  l.kind = LayerKind::Conv1d;
  l.in_width = length * in_channels;
  l.in_channels = in_channels;
  l.out_channels = out_channels;
  l.kernel = kernel;
  l.out_width = (length >= kernel ? length - kernel + 1 : 0) * out_channels;
  return l;
}

LayerSpec LayerSpec::dense(std::size_t in, std::size_t out) {
  LayerSpec l;
  l.kind = LayerKind::Dense;
  l.in_width = in;
  l.out_width = out;
  return l;
}

LayerSpec LayerSpec::batchnorm(std::size_t width) {
  LayerSpec l;
  l.kind = LayerKind::BatchNorm;
  l.in_width = l.out_width = width;
  return l;
}

LayerSpec LayerSpec::tanh(std::size_t width) {
  LayerSpec l;
  l.kind = LayerKind::Tanh;
  l.in_width = l.out_width = width;
  return l;
}

LayerSpec LayerSpec::concat_branch(std::size_t trunk_width, std::size_t branch_width) {
  LayerSpec l;
  l.kind = LayerKind::ConcatBranch;
  l.in_width = trunk_width;
  l.out_width = trunk_width + branch_width;
  return l;
}

std::size_t LayerSpec::param_count() const {
  switch (kind) {
    case LayerKind::Conv1d: return out_channels * kernel * in_channels + out_channels;
    case LayerKind::Dense: return out_width * in_width + out_width;
    case LayerKind::BatchNorm: return 2 * out_width;
    default: return 0;
  }
}

void NetSpec::validate() const {
  if (input_width == 0) throw ShapeMismatch("network: zero input width");
  std::size_t branch_out = 0;
  if (side_width > 0) {
    if (branch.empty()) throw ShapeMismatch("network: side input without branch layers");
    check_chain(branch, side_width, "branch", &branch_out, 0, nullptr);
  } else if (!branch.empty()) {
    throw ShapeMismatch("network: branch layers without side input");
  }
  int concats = 0;
  std::size_t out = 0;
  check_chain(trunk, input_width, "trunk", &out, branch_out, &concats);
  if (concats != (side_width > 0 ? 1 : 0))
    throw ShapeMismatch("network: need exactly one concat_branch when a side input exists");
  if (out != 1) throw ShapeMismatch("network: final layer must output a single scalar");
}

std::size_t NetSpec::param_count() const {
  std::size_t n = 0;
  for (const auto& l : branch) n += l.param_count();
  for (const auto& l : trunk) n += l.param_count();
  return n;
}

Network::Network(NetSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  std::size_t p = 0, s = 0;
  auto lay_out = [&](const std::vector<LayerSpec>& layers, Offsets& off) {
    for (const auto& l : layers) {
      off.param.push_back(p);
      off.stat.push_back(s);
      p += l.param_count();
      if (l.kind == LayerKind::BatchNorm) s += l.out_width;
    }
  };
  lay_out(spec_.branch, branch_off_);
  lay_out(spec_.trunk, trunk_off_);
  theta_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  running_mean_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s));
  running_var_ = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(s));
}

Network Network::initialized(NetSpec spec, std::uint64_t seed) {
  Network net(std::move(spec));
  RngStream rng = make_stream(seed, {stream_tag::kInit});
  auto init = [&](const std::vector<LayerSpec>& layers, const Offsets& off) {
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const auto& l = layers[i];
      double* p = net.theta_.data() + off.param[i];
      if (l.kind == LayerKind::Conv1d || l.kind == LayerKind::Dense) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in(l)));
        std::uniform_real_distribution<double> u(-bound, bound);
        for (std::size_t k = 0; k < l.param_count(); ++k) p[k] = u(rng);
      } else if (l.kind == LayerKind::BatchNorm) {
        for (std::size_t k = 0; k < l.out_width; ++k) p[k] = 1.0;
      }
    }
  };
  init(net.spec_.branch, net.branch_off_);
  init(net.spec_.trunk, net.trunk_off_);
  return net;
}

void Network::set_parameters(const Eigen::VectorXd& theta) {
  if (theta.size() != theta_.size()) throw ShapeMismatch("set_parameters: wrong length");
  theta_ = theta;
  ++version_;
}

Eigen::VectorXd& Network::mutable_parameters() {
  ++version_;
  return theta_;
}

void Network::set_running_stats(const Eigen::VectorXd& mean, const Eigen::VectorXd& var) {
  if (mean.size() != running_mean_.size() || var.size() != running_var_.size())
    throw ShapeMismatch("set_running_stats: wrong length");
  if ((var.array() <= 0.0).any()) throw std::invalid_argument("running variance must be > 0");
  running_mean_ = mean;
  running_var_ = var;
}

bool Network::has_batchnorm() const { return running_mean_.size() > 0; }

void Network::run_stage(const std::vector<LayerSpec>& layers, const Offsets& off,
                        ForwardPass::Stage& st, const Eigen::MatrixXd* concat_source) const {
  const std::size_t n = layers.size();
  st.mean.assign(n, {});
  st.var.assign(n, {});
  st.inv_std.assign(n, {});
  st.xhat.assign(n, {});
  for (std::size_t i = 0; i < n; ++i) {
    const auto& l = layers[i];
    const Eigen::MatrixXd& x = st.acts[i];
    const Eigen::Index b = x.cols();
    const double* p = theta_.data() + off.param[i];
    Eigen::MatrixXd y;
    switch (l.kind) {
      case LayerKind::Conv1d: {
        const auto cin = static_cast<Eigen::Index>(l.in_channels);
        const auto cout = static_cast<Eigen::Index>(l.out_channels);
        const auto kw = static_cast<Eigen::Index>(l.kernel * l.in_channels);
        ConstRowMap w(p, cout, kw);
        Eigen::Map<const Eigen::VectorXd> bias(p + cout * kw, cout);
        y.resize(static_cast<Eigen::Index>(l.out_width), b);
        const auto lout = static_cast<Eigen::Index>(conv_out_length(l));
        for (Eigen::Index q = 0; q < lout; ++q) {
          y.middleRows(q * cout, cout).noalias() = w * x.middleRows(q * cin, kw);
          y.middleRows(q * cout, cout).colwise() += bias;
        }
        break;
      }
      case LayerKind::Dense: {
        const auto out = static_cast<Eigen::Index>(l.out_width);
        const auto in = static_cast<Eigen::Index>(l.in_width);
        ConstRowMap w(p, out, in);
        Eigen::Map<const Eigen::VectorXd> bias(p + out * in, out);
        y.noalias() = w * x;
        y.colwise() += bias;
        break;
      }
      case LayerKind::BatchNorm: {
        const auto wdt = static_cast<Eigen::Index>(l.out_width);
        Eigen::Map<const Eigen::VectorXd> gamma(p, wdt);
        Eigen::Map<const Eigen::VectorXd> beta(p + wdt, wdt);
        Eigen::VectorXd mean, var;
        if (mode_ == Mode::Train) {
          mean = x.rowwise().mean();
          var = (x.colwise() - mean).array().square().rowwise().mean();
        } else {
          mean = running_mean_.segment(static_cast<Eigen::Index>(off.stat[i]), wdt);
          var = running_var_.segment(static_cast<Eigen::Index>(off.stat[i]), wdt);
        }
        Eigen::VectorXd inv_std = (var.array() + kBatchNormEpsilon).rsqrt();
        Eigen::MatrixXd xhat = (x.colwise() - mean).array().colwise() * inv_std.array();
        y = (xhat.array().colwise() * gamma.array()).colwise() + beta.array();
        st.mean[i] = std::move(mean);
        st.var[i] = std::move(var);
        st.inv_std[i] = std::move(inv_std);
        st.xhat[i] = std::move(xhat);
        break;
      }
      case LayerKind::Tanh:
        y = x.array().tanh();
        break;
      case LayerKind::ConcatBranch:
        y.resize(static_cast<Eigen::Index>(l.out_width), b);
        y.topRows(x.rows()) = x;
        y.bottomRows(concat_source->rows()) = *concat_source;
        break;
    }
    st.acts.push_back(std::move(y));
  }
}

ForwardPass Network::batch_forward(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd* side) const {
  if (static_cast<std::size_t>(inputs.rows()) != spec_.input_width)
    throw ShapeMismatch("batch_forward: input width " + std::to_string(inputs.rows()) +
                        ", expected " + std::to_string(spec_.input_width));
  if ((spec_.side_width > 0) != (side != nullptr))
    throw ShapeMismatch("batch_forward: side input presence does not match the network");
  if (side && (static_cast<std::size_t>(side->rows()) != spec_.side_width || side->cols() != inputs.cols()))
    throw ShapeMismatch("batch_forward: side input shape");
  if (mode_ == Mode::Train && has_batchnorm() && inputs.cols() < 2)
    throw ShapeMismatch("batch_forward: train mode with batch norm needs batch size >= 2");

  ForwardPass fp;
  fp.version_ = version_;
  fp.mode_ = mode_;
  const Eigen::MatrixXd* branch_out = nullptr;
  if (side) {
    fp.branch_.acts.push_back(*side);
    run_stage(spec_.branch, branch_off_, fp.branch_, nullptr);
    branch_out = &fp.branch_.acts.back();
  }
  fp.trunk_.acts.push_back(inputs);
  run_stage(spec_.trunk, trunk_off_, fp.trunk_, branch_out);
  fp.c_ = fp.trunk_.acts.back().row(0).transpose();
  return fp;
}

ForwardPass Network::forward(std::span<const double> input, std::optional<double> side) const {
  Eigen::MatrixXd x = Eigen::Map<const Eigen::VectorXd>(input.data(), static_cast<Eigen::Index>(input.size()));
  if (side) {
    Eigen::MatrixXd s(1, 1);
    s(0, 0) = *side;
    return batch_forward(x, &s);
  }
  return batch_forward(x, nullptr);
}

Eigen::MatrixXd Network::backprop_stage(const std::vector<LayerSpec>& layers, const Offsets& off,
                                        const ForwardPass::Stage& st, Mode mode,
                                        Eigen::MatrixXd grad, Gradient& g,
                                        Eigen::MatrixXd* concat_grad) const {
  for (std::size_t ii = layers.size(); ii-- > 0;) {
    const auto& l = layers[ii];
    const Eigen::MatrixXd& x = st.acts[ii];
    const Eigen::MatrixXd& y = st.acts[ii + 1];
    const double* p = theta_.data() + off.param[ii];
    double* gp = g.data() + off.param[ii];
    Eigen::MatrixXd dx;
    switch (l.kind) {
      case LayerKind::Conv1d: {
        const auto cin = static_cast<Eigen::Index>(l.in_channels);
        const auto cout = static_cast<Eigen::Index>(l.out_channels);
        const auto kw = static_cast<Eigen::Index>(l.kernel * l.in_channels);
        ConstRowMap w(p, cout, kw);
        RowMap gw(gp, cout, kw);
        Eigen::Map<Eigen::VectorXd> gb(gp + cout * kw, cout);
        dx = Eigen::MatrixXd::Zero(x.rows(), x.cols());
        const auto lout = static_cast<Eigen::Index>(conv_out_length(l));
        for (Eigen::Index q = 0; q < lout; ++q) {
          const auto dy = grad.middleRows(q * cout, cout);
          gw.noalias() += dy * x.middleRows(q * cin, kw).transpose();
          gb += dy.rowwise().sum();
          dx.middleRows(q * cin, kw).noalias() += w.transpose() * dy;
        }
        break;
      }
      case LayerKind::Dense: {
        const auto out = static_cast<Eigen::Index>(l.out_width);
        const auto in = static_cast<Eigen::Index>(l.in_width);
        ConstRowMap w(p, out, in);
        RowMap gw(gp, out, in);
        Eigen::Map<Eigen::VectorXd> gb(gp + out * in, out);
        gw.noalias() += grad * x.transpose();
        gb += grad.rowwise().sum();
        dx.noalias() = w.transpose() * grad;
        break;
      }
      case LayerKind::BatchNorm: {
        const auto wdt = static_cast<Eigen::Index>(l.out_width);
        Eigen::Map<const Eigen::VectorXd> gamma(p, wdt);
        Eigen::Map<Eigen::VectorXd> ggamma(gp, wdt);
        Eigen::Map<Eigen::VectorXd> gbeta(gp + wdt, wdt);
        const Eigen::MatrixXd& xhat = st.xhat[ii];
        const Eigen::VectorXd& inv_std = st.inv_std[ii];
        ggamma += (grad.array() * xhat.array()).rowwise().sum().matrix();
        gbeta += grad.rowwise().sum();
        const Eigen::MatrixXd dxhat = grad.array().colwise() * gamma.array();
        if (mode == Mode::Train) {
          const double bsz = static_cast<double>(x.cols());
          const Eigen::VectorXd sum_d = dxhat.rowwise().sum();
          const Eigen::VectorXd sum_dx = (dxhat.array() * xhat.array()).rowwise().sum();
          dx = ((bsz * dxhat.array() - xhat.array().colwise() * sum_dx.array()).colwise() -
                sum_d.array())
                   .colwise() *
               (inv_std.array() / bsz);
        } else {
          dx = dxhat.array().colwise() * inv_std.array();
        }
        break;
      }
      case LayerKind::Tanh:
        dx = grad.array() * (1.0 - y.array().square());
        break;
      case LayerKind::ConcatBranch:
        *concat_grad = grad.bottomRows(static_cast<Eigen::Index>(l.out_width - l.in_width));
        dx = grad.topRows(static_cast<Eigen::Index>(l.in_width));
        break;
    }
    grad = std::move(dx);
  }
  return grad;
}

Gradient Network::backward(const ForwardPass& cache, const Eigen::VectorXd& upstream) const {
  if (cache.version_ != version_)
    throw StaleCache("backward: parameters changed since the forward pass");
  if (upstream.size() != cache.c_.size()) throw ShapeMismatch("backward: upstream length");
  Gradient g = Gradient::Zero(theta_.size());
  Eigen::MatrixXd top = upstream.transpose();
  Eigen::MatrixXd branch_grad;
  backprop_stage(spec_.trunk, trunk_off_, cache.trunk_, cache.mode_, std::move(top), g,
                 spec_.side_width > 0 ? &branch_grad : nullptr);
  if (spec_.side_width > 0)
    backprop_stage(spec_.branch, branch_off_, cache.branch_, cache.mode_, std::move(branch_grad), g,
                   nullptr);
  return g;
}

void Network::absorb_batch_statistics(const ForwardPass& cache) {
  if (cache.mode_ != Mode::Train) return;
  auto absorb = [&](const std::vector<LayerSpec>& layers, const Offsets& off,
                    const ForwardPass::Stage& st) {
    for (std::size_t i = 0; i < layers.size(); ++i) {
      if (layers[i].kind != LayerKind::BatchNorm) continue;
      const auto w = static_cast<Eigen::Index>(layers[i].out_width);
      const auto s = static_cast<Eigen::Index>(off.stat[i]);
      running_mean_.segment(s, w) =
          (1.0 - kBatchNormMomentum) * running_mean_.segment(s, w) + kBatchNormMomentum * st.mean[i];
      running_var_.segment(s, w) =
          (1.0 - kBatchNormMomentum) * running_var_.segment(s, w) + kBatchNormMomentum * st.var[i];
    }
  };
  if (spec_.side_width > 0) absorb(spec_.branch, branch_off_, cache.branch_);
  absorb(spec_.trunk, trunk_off_, cache.trunk_);
}

void sgd_step(Network& net, const Gradient& g, double learning_rate, Direction dir) {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("sgd_step: learning_rate must be > 0");
  if (g.size() != net.parameters().size()) throw ShapeMismatch("sgd_step: gradient length");
  const double s = dir == Direction::Ascend ? learning_rate : -learning_rate;
  net.mutable_parameters() += s * g;
}

Optimizer::Optimizer(OptimizerKind kind, double learning_rate, double beta1, double beta2)
    : kind_(kind), lr_(learning_rate), beta1_(beta1), beta2_(beta2) {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("optimizer: learning_rate must be > 0");
}

void Optimizer::step(Network& net, const Gradient& g, Direction dir) {
  if (kind_ == OptimizerKind::Sgd) {
    sgd_step(net, g, lr_, dir);
    return;
  }
  const double sign = dir == Direction::Ascend ? 1.0 : -1.0;
  if (m_.size() != g.size()) {
    m_ = Eigen::VectorXd::Zero(g.size());
    v_ = Eigen::VectorXd::Zero(g.size());
  }
  ++t_;
  if (kind_ == OptimizerKind::Momentum) {
    m_ = beta1_ * m_ + g;
    net.mutable_parameters() += sign * lr_ * m_;
    return;
  }
  m_ = beta1_ * m_ + (1.0 - beta1_) * g;
  v_ = beta2_ * v_ + (1.0 - beta2_) * g.array().square().matrix();
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  net.mutable_parameters().array() +=
      sign * lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + 1e-8);
}

void Optimizer::restore(std::uint64_t steps, Eigen::VectorXd m, Eigen::VectorXd v) {
  if (m.size() != v.size()) throw ShapeMismatch("optimizer: moment sizes differ");
  t_ = steps;
  m_ = std::move(m);
  v_ = std::move(v);
}

void write_network(std::ostream& os, const Network& net) {
  auto put_layers = [&](const std::vector<LayerSpec>& layers) {
    io::put<std::uint64_t>(os, layers.size());
    for (const auto& l : layers) {
      io::put<std::uint32_t>(os, static_cast<std::uint32_t>(l.kind));
      io::put<std::uint64_t>(os, l.in_width);
      io::put<std::uint64_t>(os, l.out_width);
      io::put<std::uint64_t>(os, l.in_channels);
      io::put<std::uint64_t>(os, l.out_channels);
      io::put<std::uint64_t>(os, l.kernel);
    }
  };
  const auto& s = net.spec();
  io::put<std::uint64_t>(os, s.input_width);
  io::put<std::uint64_t>(os, s.side_width);
  put_layers(s.branch);
  put_layers(s.trunk);
  io::put<std::uint64_t>(os, static_cast<std::uint64_t>(net.parameters().size()));
  for (double v : net.parameters()) io::put<double>(os, v);
  io::put<std::uint64_t>(os, static_cast<std::uint64_t>(net.running_mean().size()));
  for (double v : net.running_mean()) io::put<double>(os, v);
  for (double v : net.running_var()) io::put<double>(os, v);
}

Network read_network(std::istream& is) {
  auto get_layers = [&] {
    const auto n = io::get<std::uint64_t>(is);
    if (n > 4096) throw FormatError("network: implausible layer count");
    std::vector<LayerSpec> layers(n);
    for (auto& l : layers) {
      const auto kind = io::get<std::uint32_t>(is);
      if (kind > static_cast<std::uint32_t>(LayerKind::ConcatBranch)) throw FormatError("network: bad layer kind");
      l.kind = static_cast<LayerKind>(kind);
      l.in_width = io::get<std::uint64_t>(is);
      l.out_width = io::get<std::uint64_t>(is);
      l.in_channels = io::get<std::uint64_t>(is);
      l.out_channels = io::get<std::uint64_t>(is);
      l.kernel = io::get<std::uint64_t>(is);
    }
    return layers;
  };
  NetSpec s;
  s.input_width = io::get<std::uint64_t>(is);
  s.side_width = io::get<std::uint64_t>(is);
  s.branch = get_layers();
  s.trunk = get_layers();
  Network net(s);
  const auto np = io::get<std::uint64_t>(is);
  if (np != static_cast<std::uint64_t>(net.parameters().size()))
    throw FormatError("network: parameter count does not match the architecture");
  Eigen::VectorXd theta(static_cast<Eigen::Index>(np));
  for (auto& v : theta) v = io::get<double>(is);
  const auto ns = io::get<std::uint64_t>(is);
  if (ns != static_cast<std::uint64_t>(net.running_mean().size()))
    throw FormatError("network: running statistics size mismatch");
  Eigen::VectorXd mean(static_cast<Eigen::Index>(ns)), var(static_cast<Eigen::Index>(ns));
  for (auto& v : mean) v = io::get<double>(is);
  for (auto& v : var) v = io::get<double>(is);
  net.set_parameters(theta);
  net.set_running_stats(mean, var);
  return net;
}

}  // namespace selfnom::nn
