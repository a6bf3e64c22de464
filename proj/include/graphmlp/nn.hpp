#pragma once

#include <string>
#include <vector>

#include "graphmlp/graph.hpp"
#include "graphmlp/tensor.hpp"

namespace graphmlp {

// Elementwise x * Phi(x), exact erf-based standard-normal CDF.
Tensor2 gelu(const Tensor2& x);
// grad wrt x given upstream grad g.
Tensor2 gelu_backward(const Tensor2& x, const Tensor2& g);

// One named trainable array with its gradient buffer.
struct ParamRef {
    std::string name;
    std::vector<double>* value;
    std::vector<double>* grad;
};

struct LinearLayer {
    Tensor2 W;               // in x out
    std::vector<double> b;   // out
    Tensor2 dW;
    std::vector<double> db;
    bool use_bias = true;

    LinearLayer() = default;
    LinearLayer(std::size_t in, std::size_t out, bool bias = true);

    Tensor2 forward(const Tensor2& x);
    // Accumulates dW/db and returns grad wrt x.
    Tensor2 backward(const Tensor2& g);
    void zero_grad();

  private:
    Tensor2 x_cache_;
};

struct LayerNormLayer {
    std::vector<double> scale;  // gamma
    std::vector<double> shift;  // beta
    std::vector<double> dscale;
    std::vector<double> dshift;
    double eps = 1e-5;

    LayerNormLayer() = default;
    explicit LayerNormLayer(std::size_t dim);

    Tensor2 forward(const Tensor2& x);
    Tensor2 backward(const Tensor2& g);
    void zero_grad();

  private:
    Tensor2 xhat_cache_;
    std::vector<double> inv_std_cache_;
};

struct DropoutLayer {
    double rate = 0.0;  // in [0, 1)
    Tensor2 last_mask;  // scaled keep mask from the last train-mode forward

    Tensor2 forward(const Tensor2& x, bool training, Rng& rng);
    Tensor2 backward(const Tensor2& g) const;
};

struct GraphMlpOutput {
    Tensor2 z;         // B x h, feeds the NContrast loss
    Tensor2 y_logits;  // B x C
};

// Linear-GELU-LayerNorm-Dropout block, then two linear heads.
// The forward signature takes node features only; no adjacency parameter
// exists anywhere on this type.
class GraphMlpModel {
  public:
    GraphMlpModel() = default;
    GraphMlpModel(std::size_t d, std::size_t hidden, std::size_t num_classes,
                  double dropout_rate, bool bias = true);

    GraphMlpOutput forward(const Tensor2& x, bool training, Rng& rng);
    // Joint backward from both heads; accumulates parameter grads.
    void backward(const Tensor2& grad_z, const Tensor2& grad_y);

    std::vector<ParamRef> params();
    void zero_grad();

    std::size_t in_dim() const { return fc0.W.rows; }
    std::size_t hidden_dim() const { return fc0.W.cols; }
    std::size_t num_classes() const { return head_y.W.cols; }

    LinearLayer fc0;
    LayerNormLayer ln;
    DropoutLayer drop;
    LinearLayer head_z;
    LinearLayer head_y;

  private:
    Tensor2 a0_cache_;  // pre-GELU activations
    Tensor2 g_cache_;   // post-GELU
};

// Two-layer GCN sharing the block conventions of GraphMlpModel (GELU,
// dropout between layers). Forward requires an adjacency operand.
class GcnModel {
  public:
    GcnModel() = default;
    GcnModel(std::size_t d, std::size_t hidden, std::size_t num_classes,
             double dropout_rate, bool bias = true);

    Tensor2 forward(const SparseMatrix& a_hat, const Tensor2& x, bool training,
                    Rng& rng);
    void backward(const Tensor2& grad_logits);

    std::vector<ParamRef> params();
    void zero_grad();

    LinearLayer layer1;
    LinearLayer layer2;
    DropoutLayer drop;

  private:
    const SparseMatrix* a_cache_ = nullptr;
    Tensor2 x_cache_;
    Tensor2 a0_cache_;  // A_hat X W1 + b1
    Tensor2 h_cache_;   // dropout(gelu(a0))
};

// Glorot-uniform weights, zero biases, scale=1 / shift=0 for layer norm.
void glorot_init(LinearLayer& layer, Rng& rng);
void init_params(GraphMlpModel& model, Rng& rng);
void init_params(GcnModel& model, Rng& rng);

// Checkpoint: magic + JSON meta + little-endian f64 blobs + CRC32.
// Round-trips bit-exactly. extra_state may carry optimizer buffers.
void save_checkpoint(const std::string& path, const std::string& kind,
                     const std::vector<ParamRef>& params,
                     const std::vector<ParamRef>& extra_state = {});
// Loads into pre-shaped buffers; names and sizes must match the file.
void load_checkpoint(const std::string& path, const std::string& kind,
                     std::vector<ParamRef> params,
                     std::vector<ParamRef> extra_state = {});

}  // namespace graphmlp
