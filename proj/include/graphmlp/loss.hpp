#pragma once

#include <span>
#include <vector>

#include "graphmlp/tensor.hpp"

namespace graphmlp {

struct NContrastBatch {
    Tensor2 z;       // B x h embeddings
    Tensor2 gamma;   // B x B, A_hat^r restricted to the batch; diagonal ignored
    double tau = 1.0;
    double alpha = 1.0;
};

struct LossReport {
    double loss_nc = 0.0;
    double loss_ce = 0.0;
    double loss_final = 0.0;
    int skipped_nodes = 0;
    bool no_labeled_nodes = false;
};

struct NContrastResult {
    double loss = 0.0;
    Tensor2 grad_z;
    int skipped = 0;
};

struct CrossEntropyResult {
    double loss = 0.0;
    Tensor2 grad;
    bool no_labeled_nodes = false;
};

// S[i][j] = <z_i, z_j> / (max(|z_i|, eps) * max(|z_j|, eps)), eps = 1e-12.
Tensor2 cosine_sim_matrix(const Tensor2& z);

// Neighboring contrastive loss, log-sum-exp stabilized. Nodes whose
// off-diagonal gamma row is all zero are excluded from the average and
// counted in `skipped`. loss = alpha / (B - skipped) * sum of l_i.
NContrastResult ncontrast_loss(const NContrastBatch& batch);

// Mean of -log softmax(logits)[label] over the rows named by `mask`.
// Empty mask gives loss 0, zero grad, and the no_labeled_nodes flag.
CrossEntropyResult softmax_cross_entropy(const Tensor2& logits,
                                         std::span<const int> labels,
                                         std::span<const int> mask);

// Sums the two sub-losses; gradients stay separate (grad_z from NContrast,
// grad wrt logits from CE) and are composed by the model's backward.
LossReport combined_loss(const NContrastResult& nc,
                         const CrossEntropyResult& ce);

}  // namespace graphmlp
