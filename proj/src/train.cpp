#include "graphmlp/train.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <stdexcept>

#include "graphmlp/optim.hpp"
#include "json.hpp"

namespace graphmlp {

namespace {

// Access guard: training may only read labels of explicitly allowed nodes.
// Test labels stay unreadable until the final evaluation.
class GuardedLabels {
  public:
    GuardedLabels(const std::vector<int>& labels, std::span<const int> allowed)
        : labels_(labels), allowed_(labels.size(), false) {
        for (const int i : allowed) allowed_[static_cast<std::size_t>(i)] = true;
    }

    void allow(std::span<const int> more) {
        for (const int i : more) allowed_[static_cast<std::size_t>(i)] = true;
    }

    int operator[](int i) const {
        if (!allowed_[static_cast<std::size_t>(i)])
            throw std::logic_error("label access outside the allowed split (node " +
                                   std::to_string(i) + ")");
        return labels_[static_cast<std::size_t>(i)];
    }

  private:
    const std::vector<int>& labels_;
    std::vector<bool> allowed_;
};

Tensor2 gather_rows(const Tensor2& x, std::span<const int> ids) {
    Tensor2 out(ids.size(), x.cols);
    for (std::size_t p = 0; p < ids.size(); ++p)
        std::copy(x.row(static_cast<std::size_t>(ids[p])),
                  x.row(static_cast<std::size_t>(ids[p])) + x.cols, out.row(p));
    return out;
}

std::vector<std::vector<double>> snapshot(std::vector<ParamRef> refs) {
    std::vector<std::vector<double>> snap;
    snap.reserve(refs.size());
    for (const auto& p : refs) snap.push_back(*p.value);
    return snap;
}

void restore(std::vector<ParamRef> refs, const std::vector<std::vector<double>>& snap) {
    if (refs.size() != snap.size())
        throw std::invalid_argument("restore_params: snapshot size mismatch");
    for (std::size_t k = 0; k < refs.size(); ++k) {
        if (refs[k].value->size() != snap[k].size())
            throw std::invalid_argument("restore_params: shape mismatch at '" +
                                        refs[k].name + "'");
        *refs[k].value = snap[k];
    }
}

double accuracy_from_logits(const Tensor2& logits, const std::vector<int>& labels,
                            std::span<const int> split) {
    if (split.empty()) return 0.0;
    int correct = 0;
    for (const int i : split) {
        const double* row = logits.row(static_cast<std::size_t>(i));
        std::size_t best = 0;
        for (std::size_t c = 1; c < logits.cols; ++c)
            if (row[c] > row[best]) best = c;
        if (static_cast<int>(best) == labels[static_cast<std::size_t>(i)]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(split.size());
}

}  // namespace

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "graphmlp") return ModelKind::graphmlp;
    if (s == "gcn") return ModelKind::gcn;
    if (s == "mlp") return ModelKind::mlp;
    throw std::invalid_argument("unknown model kind: " + s);
}

std::string to_string(ModelKind k) {
    switch (k) {
        case ModelKind::graphmlp: return "graphmlp";
        case ModelKind::gcn: return "gcn";
        case ModelKind::mlp: return "mlp";
    }
    return "?";
}

std::vector<int> sample_batch(int n, int batch_size, Rng& rng) {
    if (batch_size < 2) throw std::invalid_argument("sample_batch: B must be >= 2");
    std::vector<int> all(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
    if (batch_size >= n) return all;
    // partial Fisher-Yates: first B slots become the sample
    for (int k = 0; k < batch_size; ++k) {
        const std::size_t j =
            static_cast<std::size_t>(k) +
            rng.index(static_cast<std::size_t>(n - k));
        std::swap(all[static_cast<std::size_t>(k)], all[j]);
    }
    all.resize(static_cast<std::size_t>(batch_size));
    return all;
}

std::vector<int> argmax_predictions(const Tensor2& logits) {
    std::vector<int> pred(logits.rows);
    for (std::size_t i = 0; i < logits.rows; ++i) {
        const double* row = logits.row(i);
        std::size_t best = 0;
        for (std::size_t c = 1; c < logits.cols; ++c)
            if (row[c] > row[best]) best = c;
        pred[i] = static_cast<int>(best);
    }
    return pred;
}

double evaluate(GraphMlpModel& model, const Graph& g, std::span<const int> split) {
    Rng dummy(0);
    const auto out = model.forward(g.features, /*training=*/false, dummy);
    return accuracy_from_logits(out.y_logits, g.labels, split);
}

double evaluate(GcnModel& model, const SparseMatrix& a_hat, const Graph& g,
                std::span<const int> split) {
    Rng dummy(0);
    const Tensor2 logits = model.forward(a_hat, g.features, /*training=*/false, dummy);
    return accuracy_from_logits(logits, g.labels, split);
}

void restore_params(GraphMlpModel& model, const std::vector<std::vector<double>>& snap) {
    restore(model.params(), snap);
}

void restore_params(GcnModel& model, const std::vector<std::vector<double>>& snap) {
    restore(model.params(), snap);
}

TrainResult train(const Graph& g, const TrainConfig& config, ModelKind kind) {
    if (g.splits.train.empty()) throw std::invalid_argument("train: empty train split");
    if (config.iterations < 1) throw std::invalid_argument("train: T must be >= 1");
    if (config.batch_size < 2) throw std::invalid_argument("train: B must be >= 2");

    const double alpha = (kind == ModelKind::mlp) ? 0.0 : config.alpha;
    Rng rng(config.seed);
    GuardedLabels guarded(g.labels, g.splits.train);

    std::vector<bool> in_train(static_cast<std::size_t>(g.n), false);
    for (const int i : g.splits.train) in_train[static_cast<std::size_t>(i)] = true;

    TrainResult result;
    result.kind = kind;
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed_ms = [&] {
        return std::chrono::duration<double, std::milli>(
                   std::chrono::steady_clock::now() - t0)
            .count();
    };

    if (kind == ModelKind::gcn) {
        const SparseMatrix a_hat = normalize_adjacency(build_adjacency(g));
        GcnModel model(static_cast<std::size_t>(g.d),
                       static_cast<std::size_t>(config.hidden),
                       static_cast<std::size_t>(g.num_classes), config.dropout,
                       config.bias);
        init_params(model, rng);
        Adam opt(model.params(), config.lr, config.weight_decay, 0.9, 0.999, 1e-8,
                 config.decay_norms_and_biases);
        std::vector<int> labels_for_ce(static_cast<std::size_t>(g.n), kUnlabeled);
        for (const int i : g.splits.train)
            labels_for_ce[static_cast<std::size_t>(i)] = guarded[i];

        for (int it = 1; it <= config.iterations; ++it) {
            const Tensor2 logits = model.forward(a_hat, g.features, true, rng);
            const auto ce = softmax_cross_entropy(logits, labels_for_ce, g.splits.train);
            model.zero_grad();
            model.backward(ce.grad);
            opt.step();

            IterationLog log;
            log.iter = it;
            log.loss_ce = ce.loss;
            log.loss_final = ce.loss;
            if (config.eval_every > 0 && it % config.eval_every == 0) {
                log.val_acc = evaluate(model, a_hat, g, g.splits.val);
                if (log.val_acc > result.best_val_acc || result.best_params.empty()) {
                    result.best_val_acc = log.val_acc;
                    result.best_params = snapshot(model.params());
                }
            }
            log.elapsed_ms = elapsed_ms();
            result.log.push_back(log);
        }
        if (result.best_params.empty()) result.best_params = snapshot(model.params());
        restore_params(model, result.best_params);
        result.test_acc_at_best = evaluate(model, a_hat, g, g.splits.test);
        return result;
    }

    // graphmlp / mlp path: adjacency only touches the loss.
    SparseMatrix a_power;
    if (alpha != 0.0) {
        a_power = sparse_power(normalize_adjacency(build_adjacency(g)), config.r);
    }
    GraphMlpModel model(static_cast<std::size_t>(g.d),
                        static_cast<std::size_t>(config.hidden),
                        static_cast<std::size_t>(g.num_classes), config.dropout,
                        config.bias);
    init_params(model, rng);
    Adam opt(model.params(), config.lr, config.weight_decay, 0.9, 0.999, 1e-8,
             config.decay_norms_and_biases);

    for (int it = 1; it <= config.iterations; ++it) {
        const std::vector<int> ids = sample_batch(g.n, config.batch_size, rng);
        const Tensor2 xb = gather_rows(g.features, ids);
        const auto out = model.forward(xb, true, rng);

        NContrastResult nc;
        if (alpha != 0.0) {
            NContrastBatch batch;
            batch.z = out.z;
            batch.gamma = extract_submatrix(a_power, ids);
            batch.tau = config.tau;
            batch.alpha = alpha;
            nc = ncontrast_loss(batch);
        } else {
            nc.grad_z = Tensor2(out.z.rows, out.z.cols, 0.0);
        }

        std::vector<int> batch_labels(ids.size(), kUnlabeled);
        std::vector<int> ce_mask;
        for (std::size_t p = 0; p < ids.size(); ++p) {
            if (in_train[static_cast<std::size_t>(ids[p])]) {
                batch_labels[p] = guarded[ids[p]];
                ce_mask.push_back(static_cast<int>(p));
            }
        }
        const auto ce = softmax_cross_entropy(out.y_logits, batch_labels, ce_mask);
        const LossReport rep = combined_loss(nc, ce);

        model.zero_grad();
        model.backward(nc.grad_z, ce.grad);
        opt.step();

        IterationLog log;
        log.iter = it;
        log.loss_nc = rep.loss_nc;
        log.loss_ce = rep.loss_ce;
        log.loss_final = rep.loss_final;
        log.skipped_nodes = rep.skipped_nodes;
        if (config.eval_every > 0 && it % config.eval_every == 0) {
            log.val_acc = evaluate(model, g, g.splits.val);
            if (log.val_acc > result.best_val_acc || result.best_params.empty()) {
                result.best_val_acc = log.val_acc;
                result.best_params = snapshot(model.params());
            }
        }
        log.elapsed_ms = elapsed_ms();
        result.log.push_back(log);
    }
    if (result.best_params.empty()) result.best_params = snapshot(model.params());
    restore_params(model, result.best_params);
    result.test_acc_at_best = evaluate(model, g, g.splits.test);
    return result;
}

void write_jsonl_log(const TrainResult& result, const std::string& path,
                     bool deterministic_times) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("write_jsonl_log: cannot open " + path);
    for (const auto& l : result.log) {
        nlohmann::json j;
        j["iter"] = l.iter;
        j["loss_nc"] = l.loss_nc;
        j["loss_ce"] = l.loss_ce;
        j["loss_final"] = l.loss_final;
        j["val_acc"] = l.val_acc;
        j["elapsed_ms"] = deterministic_times ? 0.0 : l.elapsed_ms;
        j["skipped_nodes"] = l.skipped_nodes;
        os << j.dump() << '\n';
    }
}

}  // namespace graphmlp
