#pragma once

#include <string>
#include <vector>

#include "graphmlp/graph.hpp"
#include "graphmlp/train.hpp"

#include "json.hpp"

namespace graphmlp {

struct SweepGrid {
    std::vector<double> lr = {0.001, 0.01, 0.05, 0.1};
    std::vector<double> weight_decay = {5e-4, 5e-3};
    std::vector<int> batch_size = {2000, 3000};
    std::vector<double> tau = {0.5, 1.0, 2.0};
    std::vector<int> r = {2, 3, 4};
    std::vector<double> alpha = {0.0, 1.0, 10.0, 100.0};

    std::size_t size() const {
        return lr.size() * weight_decay.size() * batch_size.size() * tau.size() *
               r.size() * alpha.size();
    }
};

struct AccuracyRow {
    std::string dataset;
    std::string model;
    double mean_acc = 0.0;
    double std_acc = 0.0;
    std::vector<double> per_seed;
};

struct TimingReport {
    double graphmlp_infer_s = 0.0;  // mean over repetitions, test features only
    double gcn_infer_s = 0.0;       // mean over repetitions, full graph + A_hat
    int repetitions = 100;
    double graphmlp_test_acc = 0.0;
    double gcn_test_acc = 0.0;
    // convergence curves: (iteration, wall ms since first step, val acc)
    std::vector<IterationLog> graphmlp_curve;
    std::vector<IterationLog> gcn_curve;
};

struct CorruptionReport {
    double delta = 0.0;
    std::string model;
    std::vector<double> accuracies;  // exactly 3 runs
    double mean_acc = 0.0;
};

struct SweepEntry {
    TrainConfig config;
    double mean_val_acc = 0.0;
    double mean_test_acc = 0.0;  // filled only after ranking
};

// Mean +- std test accuracy over n_seeds for graphmlp and mlp (alpha=0).
std::vector<AccuracyRow> run_accuracy_table(
    const std::vector<std::pair<std::string, Graph>>& datasets,
    const TrainConfig& base, int n_seeds);

// Trains both models with the shared settings, then times eval-mode
// inference over `repetitions` runs. Graph-MLP sees test-node features only.
TimingReport run_timing(const Graph& g, const TrainConfig& config,
                        int repetitions = 100);

// For each delta: corrupt the raw A, re-normalize, evaluate GCN on the
// corrupted A_hat; Graph-MLP ignores adjacency. 3 train+test runs each.
std::vector<CorruptionReport> run_corruption(const Graph& g,
                                             const TrainConfig& config,
                                             const std::vector<double>& deltas);

// TSV: node index, label, h-dim Z vector; eval-mode forward, node order.
void export_embeddings(GraphMlpModel& model, const Graph& g,
                       const std::string& path);

// Full Cartesian product, each point averaged over n_seeds, ranked by mean
// val accuracy; test accuracy computed only after ranking. `workers`
// bounds the thread pool (0 = GRAPHMLP_THREADS or hardware concurrency).
std::vector<SweepEntry> run_sweep(const Graph& g, const SweepGrid& grid,
                                  const TrainConfig& base, int n_seeds,
                                  int workers = 0);

nlohmann::json to_json(const std::vector<AccuracyRow>& rows);
nlohmann::json to_json(const TimingReport& t);
nlohmann::json to_json(const std::vector<CorruptionReport>& reports);
nlohmann::json to_json(const std::vector<SweepEntry>& entries);
nlohmann::json to_json(const TrainConfig& c);

// Plot-ready CSV: iteration, wall_ms, val_acc.
void write_curve_csv(const std::vector<IterationLog>& curve, const std::string& path);

}  // namespace graphmlp
