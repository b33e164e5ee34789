#include "hpfold/net.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

namespace hpfold {
namespace {

constexpr double kNormEps = 1e-5;
constexpr double kRunningRate = 0.1;   // running stat update fraction
constexpr double kLogFloor = 1e-12;    // clamp under the policy log
constexpr char kMagic[4] = {'H', 'P', 'F', 'C'};
constexpr uint32_t kVersion = 1;

}  // namespace

void NetworkConfig::validate() const {
  if (grid_size < 5 || grid_size % 4 != 1)
    throw ConfigError("grid_size must be >= 5 and of the form 4r+1; got " +
                      std::to_string(grid_size));
  if (residual_blocks < 1) throw ConfigError("residual_blocks must be >= 1");
  if (channels < 1) throw ConfigError("channels must be >= 1");
  if (!(learning_rate > 0)) throw ConfigError("learning_rate must be positive");
  if (!(momentum >= 0 && momentum < 1))
    throw ConfigError("momentum must lie in [0,1)");
  if (!(weight_decay >= 0)) throw ConfigError("weight_decay must be >= 0");
}

void TrainingBatch::validate() const {
  if (inputs.empty()) throw ConfigError("training batch is empty");
  if (target_policies.size() != inputs.size() ||
      target_rewards.size() != inputs.size())
    throw ConfigError("training batch fields have mismatched lengths");
  for (const auto& pi : target_policies) {
    double sum = pi[0] + pi[1] + pi[2];
    if (pi[0] < 0 || pi[1] < 0 || pi[2] < 0 || std::abs(sum - 1.0) > 1e-6)
      throw ConfigError("target policy is not a distribution");
  }
}

template <typename T>
struct Network<T>::Trace {
  int batch = 0;
  Matrix input;
  Matrix stem_cols;
  NormCtx stem_ctx;
  Matrix stem_out;
  struct BlockTrace {
    Matrix cols1;
    NormCtx ctx1;
    Matrix h1;
    Matrix cols2;
    NormCtx ctx2;
    Matrix out;
  };
  std::vector<BlockTrace> blocks;
  NormCtx p_ctx;
  Matrix p_h;      // policy conv output after relu, 2 x B*HW
  Matrix p_flat;   // 2*HW x B
  Matrix p_probs;  // 3 x B
  NormCtx v_ctx;
  Matrix v_h;      // value conv output after relu, 1 x B*HW
  Matrix v_flat;   // HW x B
  Matrix v_h1;     // 64 x B
  Matrix v_out;    // 1 x B

  const Matrix& trunk() const {
    return blocks.empty() ? stem_out : blocks.back().out;
  }
};

template <typename T>
int Network<T>::add_param(const std::string& name, int rows, int cols,
                          bool decay) {
  Param p;
  p.name = name;
  p.value = Matrix::Zero(rows, cols);
  p.grad = Matrix::Zero(rows, cols);
  p.momentum = Matrix::Zero(rows, cols);
  p.decay = decay;
  params_.push_back(std::move(p));
  return static_cast<int>(params_.size()) - 1;
}

template <typename T>
int Network<T>::add_norm_state(int channels_count) {
  NormState s;
  s.running_mean = Vector::Zero(channels_count);
  s.running_var = Vector::Ones(channels_count);
  norm_states_.push_back(std::move(s));
  return static_cast<int>(norm_states_.size()) - 1;
}

template <typename T>
typename Network<T>::Conv Network<T>::make_conv(const std::string& name,
                                                int in_c, int out_c, int k) {
  Conv c;
  c.in_c = in_c;
  c.out_c = out_c;
  c.k = k;
  c.w = add_param(name + ".w", out_c, in_c * k * k, true);
  return c;
}

template <typename T>
typename Network<T>::Norm Network<T>::make_norm(const std::string& name,
                                                int channels_count) {
  Norm n;
  n.channels_count = channels_count;
  n.gamma = add_param(name + ".gamma", channels_count, 1, false);
  n.beta = add_param(name + ".beta", channels_count, 1, false);
  n.state = add_norm_state(channels_count);
  return n;
}

template <typename T>
typename Network<T>::Dense Network<T>::make_dense(const std::string& name,
                                                  int in, int out) {
  Dense d;
  d.in = in;
  d.out = out;
  d.w = add_param(name + ".w", out, in, true);
  d.b = add_param(name + ".b", out, 1, true);
  return d;
}

template <typename T>
Network<T>::Network(NetworkConfig config, uint64_t init_seed)
    : config_(std::move(config)) {
  config_.validate();
  const int c = config_.channels;
  const int hw = config_.grid_size * config_.grid_size;
  stem_conv_ = make_conv("stem.conv", PlaneStack::kPlanes, c, 3);
  stem_norm_ = make_norm("stem.norm", c);
  blocks_.resize(config_.residual_blocks);
  for (int i = 0; i < config_.residual_blocks; ++i) {
    std::string base = "block" + std::to_string(i + 1);
    blocks_[i].conv1 = make_conv(base + ".conv1", c, c, 3);
    blocks_[i].norm1 = make_norm(base + ".norm1", c);
    blocks_[i].conv2 = make_conv(base + ".conv2", c, c, 3);
    blocks_[i].norm2 = make_norm(base + ".norm2", c);
  }
  policy_conv_ = make_conv("policy.conv", c, 2, 1);
  policy_norm_ = make_norm("policy.norm", 2);
  policy_fc_ = make_dense("policy.fc", 2 * hw, 3);
  value_conv_ = make_conv("value.conv", c, 1, 1);
  value_norm_ = make_norm("value.norm", 1);
  value_fc1_ = make_dense("value.fc1", hw, 64);
  value_fc2_ = make_dense("value.fc2", 64, 1);
  initialize(init_seed);
}

template <typename T>
void Network<T>::initialize(uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Param& p : params_) {
    bool is_norm = p.name.ends_with(".gamma") || p.name.ends_with(".beta");
    bool is_bias = p.name.ends_with(".b");
    if (is_norm) {
      p.value.setConstant(p.name.ends_with(".gamma") ? T(1) : T(0));
      continue;
    }
    if (is_bias) {
      p.value.setZero();
      continue;
    }
    // He fan-in scaling; fan-in is the weight's column count for both
    // convolutions (in_c * k * k) and dense layers.
    double stddev = std::sqrt(2.0 / p.value.cols());
    for (Eigen::Index i = 0; i < p.value.size(); ++i)
      p.value.data()[i] = static_cast<T>(normal(rng) * stddev);
  }
}

template <typename T>
typename Network<T>::Matrix Network<T>::input_matrix(
    const std::vector<PlaneStack>& inputs) const {
  const int n = config_.grid_size;
  const int hw = n * n;
  const int b_count = static_cast<int>(inputs.size());
  Matrix x(PlaneStack::kPlanes, static_cast<Eigen::Index>(b_count) * hw);
  for (int b = 0; b < b_count; ++b) {
    if (inputs[b].grid_size() != n)
      throw ConfigError("input grid size " +
                        std::to_string(inputs[b].grid_size()) +
                        " does not match the network's " + std::to_string(n));
    const uint8_t* data = inputs[b].data().data();
    for (int c = 0; c < PlaneStack::kPlanes; ++c)
      for (int p = 0; p < hw; ++p)
        x(c, static_cast<Eigen::Index>(b) * hw + p) =
            static_cast<T>(data[static_cast<size_t>(c) * hw + p]);
  }
  return x;
}

// Same-padding convolution via im2col and one matrix product. The column
// matrix has one column per output pixel and one row per (input channel,
// kernel offset) pair; cols_out receives it for reuse in the backward pass
// (for 1x1 kernels the input itself serves and nothing is stored).
template <typename T>
typename Network<T>::Matrix Network<T>::conv_fwd(const Conv& c,
                                                 const Matrix& x, int batch,
                                                 Matrix* cols_out) const {
  const Matrix& w = params_[c.w].value;
  if (c.k == 1) return w * x;
  const int n = config_.grid_size;
  const int hw = n * n;
  Matrix cols = Matrix::Zero(static_cast<Eigen::Index>(c.in_c) * 9,
                             static_cast<Eigen::Index>(batch) * hw);
  for (int b = 0; b < batch; ++b) {
    const Eigen::Index base = static_cast<Eigen::Index>(b) * hw;
    for (int y = 0; y < n; ++y) {
      for (int xx = 0; xx < n; ++xx) {
        const Eigen::Index col = base + static_cast<Eigen::Index>(y) * n + xx;
        for (int ci = 0; ci < c.in_c; ++ci) {
          for (int ky = 0; ky < 3; ++ky) {
            const int sy = y + ky - 1;
            if (sy < 0 || sy >= n) continue;
            for (int kx = 0; kx < 3; ++kx) {
              const int sx = xx + kx - 1;
              if (sx < 0 || sx >= n) continue;
              cols((ci * 3 + ky) * 3 + kx,
                   col) = x(ci, base + static_cast<Eigen::Index>(sy) * n + sx);
            }
          }
        }
      }
    }
  }
  Matrix y = w * cols;
  if (cols_out) *cols_out = std::move(cols);
  return y;
}

// Accumulates the weight gradient and returns the input gradient.
// `cols` is the saved column matrix for 3x3 kernels and the layer input
// for 1x1 kernels.
template <typename T>
typename Network<T>::Matrix Network<T>::conv_bwd(const Conv& c,
                                                 const Matrix& dy,
                                                 const Matrix& cols,
                                                 int batch) {
  params_[c.w].grad.noalias() += dy * cols.transpose();
  Matrix dcols = params_[c.w].value.transpose() * dy;
  if (c.k == 1) return dcols;
  const int n = config_.grid_size;
  const int hw = n * n;
  Matrix dx = Matrix::Zero(c.in_c, static_cast<Eigen::Index>(batch) * hw);
  for (int b = 0; b < batch; ++b) {
    const Eigen::Index base = static_cast<Eigen::Index>(b) * hw;
    for (int y = 0; y < n; ++y) {
      for (int xx = 0; xx < n; ++xx) {
        const Eigen::Index col = base + static_cast<Eigen::Index>(y) * n + xx;
        for (int ci = 0; ci < c.in_c; ++ci) {
          for (int ky = 0; ky < 3; ++ky) {
            const int sy = y + ky - 1;
            if (sy < 0 || sy >= n) continue;
            for (int kx = 0; kx < 3; ++kx) {
              const int sx = xx + kx - 1;
              if (sx < 0 || sx >= n) continue;
              dx(ci, base + static_cast<Eigen::Index>(sy) * n + sx) +=
                  dcols((ci * 3 + ky) * 3 + kx, col);
            }
          }
        }
      }
    }
  }
  return dx;
}

template <typename T>
typename Network<T>::Matrix Network<T>::norm_fwd_infer(const Norm& n,
                                                       const Matrix& x) const {
  const NormState& s = norm_states_[n.state];
  const Vector& gamma = params_[n.gamma].value.col(0);
  const Vector& beta = params_[n.beta].value.col(0);
  Vector scale =
      gamma.array() / (s.running_var.array() + T(kNormEps)).sqrt();
  Vector shift = beta.array() - s.running_mean.array() * scale.array();
  Matrix y = x.array().colwise() * scale.array();
  y.array().colwise() += shift.array();
  return y;
}

template <typename T>
typename Network<T>::Matrix Network<T>::norm_fwd_train(const Norm& n,
                                                       const Matrix& x,
                                                       NormCtx& ctx,
                                                       bool update_running) {
  Vector mean = x.rowwise().mean();
  Matrix centered = x.colwise() - mean;
  Vector var = centered.array().square().rowwise().mean();
  ctx.inv_std = (var.array() + T(kNormEps)).rsqrt();
  ctx.xhat = centered.array().colwise() * ctx.inv_std.array();
  if (update_running) {
    NormState& s = norm_states_[n.state];
    s.running_mean =
        (T(1) - T(kRunningRate)) * s.running_mean + T(kRunningRate) * mean;
    s.running_var =
        (T(1) - T(kRunningRate)) * s.running_var + T(kRunningRate) * var;
  }
  const Vector& gamma = params_[n.gamma].value.col(0);
  const Vector& beta = params_[n.beta].value.col(0);
  Matrix y = ctx.xhat.array().colwise() * gamma.array();
  y.array().colwise() += beta.array();
  return y;
}

template <typename T>
typename Network<T>::Matrix Network<T>::norm_bwd(const Norm& n,
                                                 const Matrix& dy,
                                                 const NormCtx& ctx) {
  const T m = static_cast<T>(dy.cols());
  params_[n.gamma].grad.col(0).noalias() +=
      (dy.array() * ctx.xhat.array()).rowwise().sum().matrix();
  params_[n.beta].grad.col(0).noalias() += dy.rowwise().sum();
  const Vector& gamma = params_[n.gamma].value.col(0);
  Matrix dxhat = dy.array().colwise() * gamma.array();
  Vector s1 = dxhat.rowwise().sum();
  Vector s2 = (dxhat.array() * ctx.xhat.array()).rowwise().sum();
  Matrix dx = (m * dxhat).colwise() - s1;
  dx.array() -= ctx.xhat.array().colwise() * s2.array();
  dx.array() = dx.array().colwise() * (ctx.inv_std.array() / m);
  return dx;
}

namespace {

template <typename M>
void relu_inplace(M& x) {
  x = x.cwiseMax(typename M::Scalar(0));
}

// dLoss/dx for y = relu(x), given the post-activation y.
template <typename M>
M relu_bwd(const M& dy, const M& y) {
  return (y.array() > typename M::Scalar(0))
      .select(dy, M::Zero(dy.rows(), dy.cols()));
}

template <typename M>
M flatten_channels(const M& x, int batch, int hw) {
  const Eigen::Index c = x.rows();
  M flat(c * hw, batch);
  for (int b = 0; b < batch; ++b)
    for (Eigen::Index ch = 0; ch < c; ++ch)
      flat.block(ch * hw, b, hw, 1) =
          x.block(ch, static_cast<Eigen::Index>(b) * hw, 1, hw).transpose();
  return flat;
}

template <typename M>
M unflatten_channels(const M& flat, int batch, int hw) {
  const Eigen::Index c = flat.rows() / hw;
  M x(c, static_cast<Eigen::Index>(batch) * hw);
  for (int b = 0; b < batch; ++b)
    for (Eigen::Index ch = 0; ch < c; ++ch)
      x.block(ch, static_cast<Eigen::Index>(b) * hw, 1, hw) =
          flat.block(ch * hw, b, hw, 1).transpose();
  return x;
}

template <typename M>
M softmax_columns(const M& z) {
  M p = z;
  for (Eigen::Index col = 0; col < p.cols(); ++col) {
    auto column = p.col(col);
    column.array() -= column.maxCoeff();
    column = column.array().exp();
    column /= column.sum();
  }
  return p;
}

}  // namespace

template <typename T>
PolicyValue Network<T>::forward(const PlaneStack& input) const {
  return forward(std::vector<PlaneStack>{input})[0];
}

template <typename T>
std::vector<PolicyValue> Network<T>::forward(
    const std::vector<PlaneStack>& inputs) const {
  if (inputs.empty()) return {};
  const int batch = static_cast<int>(inputs.size());
  const int hw = config_.grid_size * config_.grid_size;
  Matrix x = input_matrix(inputs);
  x = conv_fwd(stem_conv_, x, batch, nullptr);
  x = norm_fwd_infer(stem_norm_, x);
  relu_inplace(x);
  for (const Block& blk : blocks_) {
    Matrix h = conv_fwd(blk.conv1, x, batch, nullptr);
    h = norm_fwd_infer(blk.norm1, h);
    relu_inplace(h);
    h = conv_fwd(blk.conv2, h, batch, nullptr);
    h = norm_fwd_infer(blk.norm2, h);
    h += x;
    relu_inplace(h);
    x = std::move(h);
  }
  Matrix ph = conv_fwd(policy_conv_, x, batch, nullptr);
  ph = norm_fwd_infer(policy_norm_, ph);
  relu_inplace(ph);
  Matrix pflat = flatten_channels(ph, batch, hw);
  Matrix logits = params_[policy_fc_.w].value * pflat;
  logits.colwise() += params_[policy_fc_.b].value.col(0);
  Matrix probs = softmax_columns(logits);

  Matrix vh = conv_fwd(value_conv_, x, batch, nullptr);
  vh = norm_fwd_infer(value_norm_, vh);
  relu_inplace(vh);
  Matrix vflat = flatten_channels(vh, batch, hw);
  Matrix v1 = params_[value_fc1_.w].value * vflat;
  v1.colwise() += params_[value_fc1_.b].value.col(0);
  relu_inplace(v1);
  Matrix v = params_[value_fc2_.w].value * v1;
  v.colwise() += params_[value_fc2_.b].value.col(0);

  std::vector<PolicyValue> out(batch);
  for (int b = 0; b < batch; ++b) {
    for (int a = 0; a < 3; ++a) out[b].policy[a] = probs(a, b);
    out[b].value = v(0, b);
  }
  return out;
}

template <typename T>
LossParts Network<T>::run_training_pass(const TrainingBatch& batch,
                                        Trace* trace, bool update_running) {
  batch.validate();
  const int b_count = static_cast<int>(batch.size());
  const int hw = config_.grid_size * config_.grid_size;
  Trace local;
  Trace& tr = trace ? *trace : local;
  tr.batch = b_count;
  tr.blocks.resize(blocks_.size());

  tr.input = input_matrix(batch.inputs);
  Matrix x = conv_fwd(stem_conv_, tr.input, b_count, &tr.stem_cols);
  x = norm_fwd_train(stem_norm_, x, tr.stem_ctx, update_running);
  relu_inplace(x);
  tr.stem_out = x;
  for (size_t i = 0; i < blocks_.size(); ++i) {
    const Block& blk = blocks_[i];
    auto& bt = tr.blocks[i];
    Matrix h = conv_fwd(blk.conv1, x, b_count, &bt.cols1);
    h = norm_fwd_train(blk.norm1, h, bt.ctx1, update_running);
    relu_inplace(h);
    bt.h1 = h;
    h = conv_fwd(blk.conv2, h, b_count, &bt.cols2);
    h = norm_fwd_train(blk.norm2, h, bt.ctx2, update_running);
    h += x;
    relu_inplace(h);
    bt.out = h;
    x = std::move(h);
  }
  Matrix ph = conv_fwd(policy_conv_, x, b_count, nullptr);
  ph = norm_fwd_train(policy_norm_, ph, tr.p_ctx, update_running);
  relu_inplace(ph);
  tr.p_h = ph;
  tr.p_flat = flatten_channels(ph, b_count, hw);
  Matrix logits = params_[policy_fc_.w].value * tr.p_flat;
  logits.colwise() += params_[policy_fc_.b].value.col(0);
  tr.p_probs = softmax_columns(logits);

  Matrix vh = conv_fwd(value_conv_, x, b_count, nullptr);
  vh = norm_fwd_train(value_norm_, vh, tr.v_ctx, update_running);
  relu_inplace(vh);
  tr.v_h = vh;
  tr.v_flat = flatten_channels(vh, b_count, hw);
  Matrix v1 = params_[value_fc1_.w].value * tr.v_flat;
  v1.colwise() += params_[value_fc1_.b].value.col(0);
  relu_inplace(v1);
  tr.v_h1 = v1;
  tr.v_out = params_[value_fc2_.w].value * v1;
  tr.v_out.colwise() += params_[value_fc2_.b].value.col(0);

  LossParts parts;
  for (int b = 0; b < b_count; ++b) {
    double diff = batch.target_rewards[b] - static_cast<double>(tr.v_out(0, b));
    parts.value_term += diff * diff;
    for (int a = 0; a < 3; ++a) {
      double pi = batch.target_policies[b][a];
      if (pi > 0)
        parts.policy_term -=
            pi * std::log(std::max(static_cast<double>(tr.p_probs(a, b)),
                                   kLogFloor));
    }
  }
  parts.value_term /= b_count;
  parts.policy_term /= b_count;
  for (const Param& p : params_)
    if (p.decay)
      parts.l2_term += static_cast<double>(
          p.value.template cast<double>().array().square().sum());
  parts.l2_term *= config_.weight_decay;
  parts.total = parts.value_term + parts.policy_term + parts.l2_term;
  if (!std::isfinite(parts.total)) {
    std::ostringstream msg;
    msg << "non-finite training loss: value=" << parts.value_term
        << " policy=" << parts.policy_term << " l2=" << parts.l2_term;
    throw std::runtime_error(msg.str());
  }
  return parts;
}

template <typename T>
void Network<T>::backward(const TrainingBatch& batch, const Trace& trace) {
  const int b_count = trace.batch;
  const int hw = config_.grid_size * config_.grid_size;

  // Heads: seed gradients from the loss.
  Matrix dlogits = trace.p_probs;
  for (int b = 0; b < b_count; ++b)
    for (int a = 0; a < 3; ++a)
      dlogits(a, b) = (dlogits(a, b) -
                       static_cast<T>(batch.target_policies[b][a])) /
                      T(b_count);
  params_[policy_fc_.w].grad.noalias() += dlogits * trace.p_flat.transpose();
  params_[policy_fc_.b].grad.col(0).noalias() += dlogits.rowwise().sum();
  Matrix dpflat = params_[policy_fc_.w].value.transpose() * dlogits;
  Matrix dph = unflatten_channels(dpflat, b_count, hw);
  dph = relu_bwd(dph, trace.p_h);
  dph = norm_bwd(policy_norm_, dph, trace.p_ctx);
  Matrix dtrunk = conv_bwd(policy_conv_, dph, trace.trunk(), b_count);

  Matrix dv = trace.v_out;
  for (int b = 0; b < b_count; ++b)
    dv(0, b) = T(2) *
               (dv(0, b) - static_cast<T>(batch.target_rewards[b])) /
               T(b_count);
  params_[value_fc2_.w].grad.noalias() += dv * trace.v_h1.transpose();
  params_[value_fc2_.b].grad.col(0).noalias() += dv.rowwise().sum();
  Matrix dv1 = params_[value_fc2_.w].value.transpose() * dv;
  dv1 = relu_bwd(dv1, trace.v_h1);
  params_[value_fc1_.w].grad.noalias() += dv1 * trace.v_flat.transpose();
  params_[value_fc1_.b].grad.col(0).noalias() += dv1.rowwise().sum();
  Matrix dvflat = params_[value_fc1_.w].value.transpose() * dv1;
  Matrix dvh = unflatten_channels(dvflat, b_count, hw);
  dvh = relu_bwd(dvh, trace.v_h);
  dvh = norm_bwd(value_norm_, dvh, trace.v_ctx);
  dtrunk += conv_bwd(value_conv_, dvh, trace.trunk(), b_count);

  // Residual stack, last block first.
  Matrix dx = std::move(dtrunk);
  for (size_t i = blocks_.size(); i-- > 0;) {
    const Block& blk = blocks_[i];
    const auto& bt = trace.blocks[i];
    dx = relu_bwd(dx, bt.out);
    Matrix dskip = dx;  // gradient flowing straight through the addition
    Matrix dh = norm_bwd(blk.norm2, dx, bt.ctx2);
    dh = conv_bwd(blk.conv2, dh, bt.cols2, b_count);
    dh = relu_bwd(dh, bt.h1);
    dh = norm_bwd(blk.norm1, dh, bt.ctx1);
    dx = conv_bwd(blk.conv1, dh, bt.cols1, b_count);
    dx += dskip;
  }
  dx = relu_bwd(dx, trace.stem_out);
  dx = norm_bwd(stem_norm_, dx, trace.stem_ctx);
  conv_bwd(stem_conv_, dx, trace.stem_cols, b_count);

  // Weight decay: d(beta * theta^2)/dtheta.
  const T two_beta = T(2) * static_cast<T>(config_.weight_decay);
  if (config_.weight_decay > 0)
    for (Param& p : params_)
      if (p.decay) p.grad.noalias() += two_beta * p.value;
}

template <typename T>
LossParts Network<T>::compute_loss(const TrainingBatch& batch) {
  return run_training_pass(batch, nullptr, false);
}

template <typename T>
LossParts Network<T>::compute_gradients(const TrainingBatch& batch) {
  Trace trace;
  LossParts parts = run_training_pass(batch, &trace, false);
  for (Param& p : params_) p.grad.setZero();
  backward(batch, trace);
  return parts;
}

template <typename T>
void Network<T>::apply_sgd() {
  const T lr = static_cast<T>(config_.learning_rate);
  const T mu = static_cast<T>(config_.momentum);
  for (Param& p : params_) {
    p.momentum = mu * p.momentum + p.grad;
    p.value.noalias() -= lr * p.momentum;
  }
}

template <typename T>
LossParts Network<T>::train_step(const TrainingBatch& batch) {
  Trace trace;
  LossParts parts = run_training_pass(batch, &trace, true);
  for (Param& p : params_) p.grad.setZero();
  backward(batch, trace);
  apply_sgd();
  ++steps_;
  return parts;
}

template <typename T>
size_t Network<T>::parameter_count() const {
  size_t count = 0;
  for (const Param& p : params_) count += static_cast<size_t>(p.value.size());
  return count;
}

template <typename T>
T Network<T>::get_parameter(size_t flat_index) const {
  for (const Param& p : params_) {
    size_t n = static_cast<size_t>(p.value.size());
    if (flat_index < n) return p.value.data()[flat_index];
    flat_index -= n;
  }
  throw std::out_of_range("parameter index");
}

template <typename T>
void Network<T>::set_parameter(size_t flat_index, T value) {
  for (Param& p : params_) {
    size_t n = static_cast<size_t>(p.value.size());
    if (flat_index < n) {
      p.value.data()[flat_index] = value;
      return;
    }
    flat_index -= n;
  }
  throw std::out_of_range("parameter index");
}

template <typename T>
T Network<T>::get_gradient(size_t flat_index) const {
  for (const Param& p : params_) {
    size_t n = static_cast<size_t>(p.grad.size());
    if (flat_index < n) return p.grad.data()[flat_index];
    flat_index -= n;
  }
  throw std::out_of_range("parameter index");
}

namespace {

void write_bytes(std::ostream& out, const void* data, size_t n) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}
void write_u32(std::ostream& out, uint32_t v) { write_bytes(out, &v, 4); }
void write_u64(std::ostream& out, uint64_t v) { write_bytes(out, &v, 8); }
void write_f64(std::ostream& out, double v) { write_bytes(out, &v, 8); }
void write_i32(std::ostream& out, int32_t v) { write_bytes(out, &v, 4); }

void read_bytes(std::istream& in, void* data, size_t n) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
  if (static_cast<size_t>(in.gcount()) != n)
    throw CheckpointError(CheckpointError::Kind::Corrupt,
                          "checkpoint file is truncated");
}
uint32_t read_u32(std::istream& in) {
  uint32_t v;
  read_bytes(in, &v, 4);
  return v;
}
uint64_t read_u64(std::istream& in) {
  uint64_t v;
  read_bytes(in, &v, 8);
  return v;
}
double read_f64(std::istream& in) {
  double v;
  read_bytes(in, &v, 8);
  return v;
}
int32_t read_i32(std::istream& in) {
  int32_t v;
  read_bytes(in, &v, 4);
  return v;
}

}  // namespace

template <typename T>
void Network<T>::save_checkpoint(const std::filesystem::path& path) const {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw CheckpointError(CheckpointError::Kind::Io,
                            "cannot open " + tmp.string() + " for writing");
    write_bytes(out, kMagic, 4);
    write_u32(out, kVersion);
    write_u32(out, static_cast<uint32_t>(sizeof(T)));
    write_i32(out, config_.grid_size);
    write_i32(out, config_.residual_blocks);
    write_i32(out, config_.channels);
    write_f64(out, config_.learning_rate);
    write_f64(out, config_.momentum);
    write_f64(out, config_.weight_decay);
    write_u64(out, steps_);
    write_u32(out, static_cast<uint32_t>(params_.size()));
    for (const Param& p : params_) {
      write_u32(out, static_cast<uint32_t>(p.name.size()));
      write_bytes(out, p.name.data(), p.name.size());
      write_u32(out, static_cast<uint32_t>(p.value.rows()));
      write_u32(out, static_cast<uint32_t>(p.value.cols()));
      uint32_t decay = p.decay ? 1 : 0;
      write_u32(out, decay);
      write_bytes(out, p.value.data(), sizeof(T) * p.value.size());
      write_bytes(out, p.momentum.data(), sizeof(T) * p.momentum.size());
    }
    write_u32(out, static_cast<uint32_t>(norm_states_.size()));
    for (const NormState& s : norm_states_) {
      write_u32(out, static_cast<uint32_t>(s.running_mean.size()));
      write_bytes(out, s.running_mean.data(),
                  sizeof(T) * s.running_mean.size());
      write_bytes(out, s.running_var.data(), sizeof(T) * s.running_var.size());
    }
    if (!out)
      throw CheckpointError(CheckpointError::Kind::Io,
                            "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec)
    throw CheckpointError(CheckpointError::Kind::Io,
                          "cannot move checkpoint into place: " + ec.message());
}

template <typename T>
Network<T> Network<T>::load_checkpoint(const std::filesystem::path& path,
                                       const NetworkConfig* expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw CheckpointError(CheckpointError::Kind::Io,
                          "cannot open " + path.string());
  char magic[4];
  read_bytes(in, magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw CheckpointError(CheckpointError::Kind::Corrupt,
                          path.string() + " is not a checkpoint file");
  uint32_t version = read_u32(in);
  if (version != kVersion)
    throw CheckpointError(CheckpointError::Kind::VersionMismatch,
                          "checkpoint version " + std::to_string(version) +
                              ", this build reads version " +
                              std::to_string(kVersion));
  uint32_t dtype = read_u32(in);
  if (dtype != sizeof(T))
    throw CheckpointError(
        CheckpointError::Kind::ConfigMismatch,
        "checkpoint holds " + std::to_string(dtype * 8) +
            "-bit parameters, this network uses " +
            std::to_string(sizeof(T) * 8) + "-bit");
  NetworkConfig cfg;
  cfg.grid_size = read_i32(in);
  cfg.residual_blocks = read_i32(in);
  cfg.channels = read_i32(in);
  cfg.learning_rate = read_f64(in);
  cfg.momentum = read_f64(in);
  cfg.weight_decay = read_f64(in);
  if (expected && !expected->same_shape(cfg))
    throw CheckpointError(
        CheckpointError::Kind::ConfigMismatch,
        "checkpoint shape (grid " + std::to_string(cfg.grid_size) + ", " +
            std::to_string(cfg.residual_blocks) + " blocks, " +
            std::to_string(cfg.channels) + " channels) does not match the "
            "expected configuration");
  Network net(cfg, 0);
  net.steps_ = read_u64(in);
  uint32_t param_count = read_u32(in);
  if (param_count != net.params_.size())
    throw CheckpointError(CheckpointError::Kind::Corrupt,
                          "checkpoint parameter list does not match its "
                          "declared configuration");
  for (Param& p : net.params_) {
    uint32_t name_len = read_u32(in);
    std::string name(name_len, '\0');
    read_bytes(in, name.data(), name_len);
    uint32_t rows = read_u32(in);
    uint32_t cols = read_u32(in);
    uint32_t decay = read_u32(in);
    if (name != p.name || rows != static_cast<uint32_t>(p.value.rows()) ||
        cols != static_cast<uint32_t>(p.value.cols()) ||
        (decay != 0) != p.decay)
      throw CheckpointError(CheckpointError::Kind::Corrupt,
                            "checkpoint tensor '" + name +
                                "' does not match the expected layout");
    read_bytes(in, p.value.data(), sizeof(T) * p.value.size());
    read_bytes(in, p.momentum.data(), sizeof(T) * p.momentum.size());
  }
  uint32_t norm_count = read_u32(in);
  if (norm_count != net.norm_states_.size())
    throw CheckpointError(CheckpointError::Kind::Corrupt,
                          "checkpoint normalization state count mismatch");
  for (NormState& s : net.norm_states_) {
    uint32_t size = read_u32(in);
    if (size != static_cast<uint32_t>(s.running_mean.size()))
      throw CheckpointError(CheckpointError::Kind::Corrupt,
                            "checkpoint normalization state size mismatch");
    read_bytes(in, s.running_mean.data(), sizeof(T) * s.running_mean.size());
    read_bytes(in, s.running_var.data(), sizeof(T) * s.running_var.size());
  }
  if (in.peek() != std::char_traits<char>::eof())
    throw CheckpointError(CheckpointError::Kind::Corrupt,
                          "checkpoint has trailing data");
  return net;
}

Evaluation NetEvaluator::evaluate(const FoldState& state) {
  PlaneStack stack = encode_episode_state(state, net_->config().grid_size);
  PolicyValue pv = net_->forward(stack);
  Evaluation out;
  out.priors = pv.policy;
  out.value = pv.value;
  return out;
}

template class Network<float>;
template class Network<double>;

}  // namespace hpfold
