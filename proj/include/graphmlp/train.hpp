#pragma once

#include <optional>
#include <string>
#include <vector>

#include "graphmlp/graph.hpp"
#include "graphmlp/loss.hpp"
#include "graphmlp/nn.hpp"

namespace graphmlp {

enum class ModelKind { graphmlp, gcn, mlp };

ModelKind model_kind_from_string(const std::string& s);
std::string to_string(ModelKind k);

struct TrainConfig {
    int batch_size = 2000;
    double alpha = 1.0;
    double tau = 1.0;
    int r = 2;
    int iterations = 400;
    double lr = 0.01;
    double weight_decay = 5e-4;
    int hidden = 256;
    double dropout = 0.6;
    std::uint64_t seed = 0;
    int eval_every = 1;
    bool bias = true;
    bool decay_norms_and_biases = true;
    bool row_normalize = false;  // consumed by ingest/CLI, recorded here
};

struct IterationLog {
    int iter = 0;
    double loss_nc = 0.0;
    double loss_ce = 0.0;
    double loss_final = 0.0;
    double val_acc = -1.0;  // -1 when no validation pass ran this iteration
    double elapsed_ms = 0.0;
    int skipped_nodes = 0;
};

struct TrainResult {
    ModelKind kind = ModelKind::graphmlp;
    std::vector<std::vector<double>> best_params;  // snapshot, params() order
    double best_val_acc = 0.0;
    double test_acc_at_best = 0.0;
    std::vector<IterationLog> log;
};

// min(B, n) distinct indices, uniform without replacement; B >= n yields
// all nodes in ascending order.
std::vector<int> sample_batch(int n, int batch_size, Rng& rng);

// Algorithm-1 training with per-iteration validation and best-snapshot
// selection. GCN trains full-graph; mlp is graphmlp with alpha forced to 0.
TrainResult train(const Graph& g, const TrainConfig& config, ModelKind kind);

// Eval-mode full-graph forward, argmax with lowest-index tie-break.
double evaluate(GraphMlpModel& model, const Graph& g, std::span<const int> split);
double evaluate(GcnModel& model, const SparseMatrix& a_hat, const Graph& g,
                std::span<const int> split);

// Argmax predictions for a whole logits matrix (lowest-index tie-break).
std::vector<int> argmax_predictions(const Tensor2& logits);

// Copies a snapshot back into a freshly shaped model.
void restore_params(GraphMlpModel& model, const std::vector<std::vector<double>>& snap);
void restore_params(GcnModel& model, const std::vector<std::vector<double>>& snap);

// JSON-lines training log; elapsed_ms is written as 0 when deterministic
// output is requested so reruns are byte-comparable.
void write_jsonl_log(const TrainResult& result, const std::string& path,
                     bool deterministic_times);

}  // namespace graphmlp
