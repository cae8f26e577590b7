#pragma once

#include <Eigen/Core>
#include <vector>

#include "sawlab/random.hpp"

namespace sawlab {

/// Gate pre-activations are stored in blocks [input; forget; cell; output].
struct LstmLayerParams {
  Eigen::MatrixXd w_ih;  // 4H x D
  Eigen::MatrixXd w_hh;  // 4H x H
  Eigen::VectorXd b;     // 4H
};

struct LinearParams {
  Eigen::MatrixXd w;
  Eigen::VectorXd b;
};

/// Per-layer hidden and cell vectors.
struct LstmState {
  std::vector<Eigen::VectorXd> h, c;

  bool empty() const { return h.empty(); }
};

/// Gradients with the same shape as the network parameters.
struct LstmGradients {
  std::vector<LstmLayerParams> layers;
  LinearParams head;

  void add(const LstmGradients& other);
  void scale(double s);
};

/// Stacked LSTM with a linear head and an analytic backward pass
/// (backpropagation through time over the full cached sequence).
class LstmNetwork {
 public:
  LstmNetwork() = default;
  LstmNetwork(int input_dim, std::vector<int> hidden_sizes, int output_dim);

  /// Orthogonal gate blocks, zero biases with forget-gate bias 1, small
  /// orthogonal head.
  void init_params(RandomStream& rng, double head_scale = 0.01);

  int input_dim() const { return input_dim_; }
  int output_dim() const { return output_dim_; }
  int num_layers() const { return static_cast<int>(hidden_.size()); }
  const std::vector<int>& hidden_sizes() const { return hidden_; }

  LstmState zero_state() const;

  /// One step; advances `state`.
  Eigen::VectorXd forward(const Eigen::VectorXd& x, LstmState& state) const;

  /// Everything backward() needs about one forward sequence.
  struct Cache {
    struct StepLayer {
      Eigen::VectorXd x, h_prev, c_prev;
      Eigen::VectorXd gi, gf, gg, go;  // post-activation gates
      Eigen::VectorXd c_new, tanh_c;
    };
    std::vector<std::vector<StepLayer>> steps;  // [t][layer]
    std::vector<Eigen::VectorXd> outputs;       // head output per step

    int length() const { return static_cast<int>(steps.size()); }
    void clear() {
      steps.clear();
      outputs.clear();
    }
  };

  /// One step recording intermediates for backward().
  Eigen::VectorXd forward_cached(const Eigen::VectorXd& x, LstmState& state,
                                 Cache& cache) const;

  /// Exact gradients of sum_t upstream[t] . y_t with respect to all
  /// parameters, via BPTT over the full cached sequence. `grads` is
  /// accumulated into (callers zero it first). Throws ProtocolError if the
  /// cache length does not match.
  void backward(const Cache& cache,
                const std::vector<Eigen::VectorXd>& upstream,
                LstmGradients& grads) const;

  LstmGradients zero_gradients() const;

  // Flat parameter views used by the optimizer, checkpoints and
  // finite-difference checks. Layout: layers in order (w_ih, w_hh, b
  // column-major), then head (w, b).
  int num_params() const;
  Eigen::VectorXd get_params() const;
  void set_params(const Eigen::VectorXd& flat);
  static Eigen::VectorXd flatten(const LstmGradients& g);

  const std::vector<LstmLayerParams>& layers() const { return layers_; }
  std::vector<LstmLayerParams>& layers() { return layers_; }
  const LinearParams& head() const { return head_; }
  LinearParams& head() { return head_; }

 private:
  int input_dim_ = 0;
  int output_dim_ = 0;
  std::vector<int> hidden_;
  std::vector<LstmLayerParams> layers_;
  LinearParams head_;
};

}  // namespace sawlab
