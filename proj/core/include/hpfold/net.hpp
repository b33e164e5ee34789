#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "hpfold/encode.hpp"
#include "hpfold/error.hpp"
#include "hpfold/search.hpp"

namespace hpfold {

struct NetworkConfig {
  int grid_size = 41;         // tensor grid N; input shape is N x N x 17
  int residual_blocks = 4;    // reference setting is 20; 4 trains on a desk
  int channels = 32;
  double learning_rate = 0.001;
  double momentum = 0.9;
  double weight_decay = 4e-5;  // beta in the loss; normalization params exempt

  void validate() const;
  bool same_shape(const NetworkConfig& other) const {
    return grid_size == other.grid_size &&
           residual_blocks == other.residual_blocks &&
           channels == other.channels;
  }
};

struct PolicyValue {
  std::array<double, 3> policy{};  // over (Forward, Left, Right), sums to 1
  double value = 0.0;              // expected final contacts, unbounded
};

struct TrainingBatch {
  std::vector<PlaneStack> inputs;
  std::vector<std::array<double, 3>> target_policies;  // search pi
  std::vector<double> target_rewards;                  // final contact counts

  size_t size() const { return inputs.size(); }
  void validate() const;
};

// The loss splits into mean squared value error, mean policy cross-entropy,
// and the weight-decay penalty; total is their sum by construction.
struct LossParts {
  double value_term = 0.0;
  double policy_term = 0.0;
  double l2_term = 0.0;
  double total = 0.0;
};

// Two-head residual convolutional evaluator. T is float for the engine and
// double for gradient verification. Layout: an initial 3x3 convolution
// into `channels` feature maps, `residual_blocks` blocks of
// [conv -> norm -> relu -> conv -> norm -> skip-add -> relu], then a policy
// head (1x1 conv to 2 channels -> norm -> relu -> dense to 3 -> softmax)
// and a value head (1x1 conv to 1 channel -> norm -> relu -> dense to 64
// -> relu -> dense to 1, linear). Convolutions carry no bias since a
// normalization layer follows each one.
template <typename T>
class Network {
 public:
  using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

  Network(NetworkConfig config, uint64_t init_seed);

  const NetworkConfig& config() const { return config_; }
  uint64_t training_steps() const { return steps_; }

  // Inference mode: normalization uses running statistics; bit-identical
  // outputs for bit-identical inputs and parameters.
  PolicyValue forward(const PlaneStack& input) const;
  std::vector<PolicyValue> forward(const std::vector<PlaneStack>& inputs) const;

  // Training-mode loss (normalization from batch statistics). Touches
  // neither gradients nor running statistics, so it is a pure function of
  // the parameters; the finite-difference harness probes it.
  LossParts compute_loss(const TrainingBatch& batch);

  // Training-mode loss plus a full backward pass filling the gradient
  // buffers (data terms plus the decay term 2*beta*theta).
  LossParts compute_gradients(const TrainingBatch& batch);

  // One momentum-SGD update: forward, backward, parameter step, running
  // statistics update. Returns the pre-update loss.
  LossParts train_step(const TrainingBatch& batch);

  // Flat parameter access across all tensors in registration order,
  // column-major within each tensor. Powers finite-difference probing and
  // the checkpoint round-trip test.
  size_t parameter_count() const;
  T get_parameter(size_t flat_index) const;
  void set_parameter(size_t flat_index, T value);
  T get_gradient(size_t flat_index) const;

  void save_checkpoint(const std::filesystem::path& path) const;
  // expected, when given, must match the stored structural shape
  // (grid/blocks/channels); training hyperparameters load from the file.
  static Network load_checkpoint(const std::filesystem::path& path,
                                 const NetworkConfig* expected = nullptr);

 private:
  struct Param {
    std::string name;
    Matrix value;
    Matrix grad;
    Matrix momentum;
    bool decay = true;
  };
  struct NormState {
    Vector running_mean;
    Vector running_var;
  };
  struct Conv {
    int w = -1;  // param index; weight is out_c x (in_c * k * k)
    int in_c = 0, out_c = 0, k = 0;
  };
  struct Norm {
    int gamma = -1, beta = -1;  // param indices
    int state = -1;             // running-stat index
    int channels_count = 0;
  };
  struct Dense {
    int w = -1, b = -1;
    int in = 0, out = 0;
  };
  struct Block {
    Conv conv1, conv2;
    Norm norm1, norm2;
  };

  struct NormCtx {
    Matrix xhat;
    Vector inv_std;
  };
  struct Trace;  // forward activations kept for the backward pass

  int add_param(const std::string& name, int rows, int cols, bool decay);
  int add_norm_state(int channels_count);
  Conv make_conv(const std::string& name, int in_c, int out_c, int k);
  Norm make_norm(const std::string& name, int channels_count);
  Dense make_dense(const std::string& name, int in, int out);
  void initialize(uint64_t seed);

  Matrix input_matrix(const std::vector<PlaneStack>& inputs) const;
  Matrix conv_fwd(const Conv& c, const Matrix& x, int batch,
                  Matrix* cols_out) const;
  Matrix conv_bwd(const Conv& c, const Matrix& dy, const Matrix& cols,
                  int batch);
  Matrix norm_fwd_infer(const Norm& n, const Matrix& x) const;
  Matrix norm_fwd_train(const Norm& n, const Matrix& x, NormCtx& ctx,
                        bool update_running);
  Matrix norm_bwd(const Norm& n, const Matrix& dy, const NormCtx& ctx);

  // Shared forward in training mode; fills the trace when given.
  LossParts run_training_pass(const TrainingBatch& batch, Trace* trace,
                              bool update_running);
  void backward(const TrainingBatch& batch, const Trace& trace);
  void apply_sgd();

  NetworkConfig config_;
  std::vector<Param> params_;
  std::vector<NormState> norm_states_;
  Conv stem_conv_;
  Norm stem_norm_;
  std::vector<Block> blocks_;
  Conv policy_conv_;
  Norm policy_norm_;
  Dense policy_fc_;
  Conv value_conv_;
  Norm value_norm_;
  Dense value_fc1_;
  Dense value_fc2_;
  uint64_t steps_ = 0;
};

using NetworkF = Network<float>;
using NetworkD = Network<double>;

// Search evaluator backed by a frozen network snapshot. Thread-safe for
// concurrent evaluate() calls since inference never mutates the network.
class NetEvaluator : public Evaluator {
 public:
  explicit NetEvaluator(std::shared_ptr<const NetworkF> net)
      : net_(std::move(net)) {}

  Evaluation evaluate(const FoldState& state) override;
  const NetworkF& network() const { return *net_; }

 private:
  std::shared_ptr<const NetworkF> net_;
};

}  // namespace hpfold
