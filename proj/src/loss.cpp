#include "graphmlp/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace graphmlp {

namespace {
constexpr double kNormEps = 1e-12;
}

Tensor2 cosine_sim_matrix(const Tensor2& z) {
    if (z.rows < 1) throw std::invalid_argument("cosine_sim_matrix: empty input");
    const std::size_t B = z.rows;
    std::vector<double> norms(B);
    Tensor2 zhat(B, z.cols);
    for (std::size_t i = 0; i < B; ++i) {
        double sq = 0.0;
        for (std::size_t c = 0; c < z.cols; ++c) sq += z.at(i, c) * z.at(i, c);
        norms[i] = std::max(std::sqrt(sq), kNormEps);
        for (std::size_t c = 0; c < z.cols; ++c)
            zhat.at(i, c) = z.at(i, c) / norms[i];
    }
    Tensor2 s(B, B);
    for (std::size_t i = 0; i < B; ++i)
        for (std::size_t j = i; j < B; ++j) {
            double dot = 0.0;
            for (std::size_t c = 0; c < z.cols; ++c)
                dot += zhat.at(i, c) * zhat.at(j, c);
            dot = std::clamp(dot, -1.0, 1.0);
            s.at(i, j) = dot;
            s.at(j, i) = dot;
        }
    return s;
}

NContrastResult ncontrast_loss(const NContrastBatch& batch) {
    const std::size_t B = batch.z.rows;
    if (B < 2) throw std::invalid_argument("ncontrast_loss: batch must have >= 2 nodes");
    if (batch.gamma.rows != B || batch.gamma.cols != B)
        throw std::invalid_argument("ncontrast_loss: gamma must be B x B");
    if (batch.tau <= 0.0) throw std::invalid_argument("ncontrast_loss: tau must be > 0");

    const std::size_t H = batch.z.cols;
    std::vector<double> norms(B);
    Tensor2 zhat(B, H);
    for (std::size_t i = 0; i < B; ++i) {
        double sq = 0.0;
        for (std::size_t c = 0; c < H; ++c) sq += batch.z.at(i, c) * batch.z.at(i, c);
        norms[i] = std::sqrt(sq);
        const double div = std::max(norms[i], kNormEps);
        for (std::size_t c = 0; c < H; ++c) zhat.at(i, c) = batch.z.at(i, c) / div;
    }
    Tensor2 s(B, B);
    for (std::size_t i = 0; i < B; ++i)
        for (std::size_t j = i; j < B; ++j) {
            double dot = 0.0;
            for (std::size_t c = 0; c < H; ++c) dot += zhat.at(i, c) * zhat.at(j, c);
            s.at(i, j) = dot;
            s.at(j, i) = dot;
        }

    // Pass 1: value and per-row numerator/denominator masses.
    std::vector<double> num(B, 0.0), den(B, 0.0), row_max(B, 0.0);
    std::vector<bool> active(B, false);
    int skipped = 0;
    double total = 0.0;
    for (std::size_t i = 0; i < B; ++i) {
        double gmass = 0.0;
        for (std::size_t j = 0; j < B; ++j)
            if (j != i) gmass += batch.gamma.at(i, j);
        if (gmass == 0.0) {
            ++skipped;
            continue;
        }
        active[i] = true;
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < B; ++j)
            if (j != i) m = std::max(m, s.at(i, j) / batch.tau);
        row_max[i] = m;
        for (std::size_t j = 0; j < B; ++j) {
            if (j == i) continue;
            const double e = std::exp(s.at(i, j) / batch.tau - m);
            num[i] += batch.gamma.at(i, j) * e;
            den[i] += e;
        }
        total += -std::log(num[i]) + std::log(den[i]);
    }

    NContrastResult out;
    out.skipped = skipped;
    out.grad_z = Tensor2(B, H, 0.0);
    const std::size_t b_eff = B - static_cast<std::size_t>(skipped);
    if (b_eff == 0 || batch.alpha == 0.0) {
        out.loss = 0.0;
        if (b_eff > 0) out.loss = batch.alpha * total / static_cast<double>(b_eff);
        return out;
    }
    const double coef = batch.alpha / static_cast<double>(b_eff);
    out.loss = coef * total;

    // Pass 2: grad wrt the similarity entries, then pull back through the
    // row normalization. d l_i / d s_ij = (e_ij/den_i - gamma_ij e_ij/num_i)/tau.
    Tensor2 gs(B, B, 0.0);
    for (std::size_t i = 0; i < B; ++i) {
        if (!active[i]) continue;
        for (std::size_t j = 0; j < B; ++j) {
            if (j == i) continue;
            const double e = std::exp(s.at(i, j) / batch.tau - row_max[i]);
            gs.at(i, j) = coef * (e / den[i] - batch.gamma.at(i, j) * e / num[i]) /
                          batch.tau;
        }
    }
    // dzhat = (gs + gs^T) zhat
    Tensor2 gzhat(B, H, 0.0);
    for (std::size_t i = 0; i < B; ++i)
        for (std::size_t j = 0; j < B; ++j) {
            const double g = gs.at(i, j) + gs.at(j, i);
            if (g == 0.0) continue;
            for (std::size_t c = 0; c < H; ++c)
                gzhat.at(i, c) += g * zhat.at(j, c);
        }
    for (std::size_t i = 0; i < B; ++i) {
        if (norms[i] > kNormEps) {
            double dot = 0.0;
            for (std::size_t c = 0; c < H; ++c) dot += gzhat.at(i, c) * zhat.at(i, c);
            for (std::size_t c = 0; c < H; ++c)
                out.grad_z.at(i, c) =
                    (gzhat.at(i, c) - dot * zhat.at(i, c)) / norms[i];
        } else {
            for (std::size_t c = 0; c < H; ++c)
                out.grad_z.at(i, c) = gzhat.at(i, c) / kNormEps;
        }
    }
    return out;
}

CrossEntropyResult softmax_cross_entropy(const Tensor2& logits,
                                         std::span<const int> labels,
                                         std::span<const int> mask) {
    if (labels.size() != logits.rows)
        throw std::invalid_argument("softmax_cross_entropy: labels length mismatch");
    CrossEntropyResult out;
    out.grad = Tensor2(logits.rows, logits.cols, 0.0);
    if (mask.empty()) {
        out.no_labeled_nodes = true;
        return out;
    }
    const double inv_m = 1.0 / static_cast<double>(mask.size());
    double total = 0.0;
    for (const int r : mask) {
        if (r < 0 || static_cast<std::size_t>(r) >= logits.rows)
            throw std::invalid_argument("softmax_cross_entropy: mask row out of range");
        const int y = labels[static_cast<std::size_t>(r)];
        if (y < 0 || static_cast<std::size_t>(y) >= logits.cols)
            throw std::invalid_argument("softmax_cross_entropy: unlabeled row in mask");
        const double* row = logits.row(static_cast<std::size_t>(r));
        double m = row[0];
        for (std::size_t c = 1; c < logits.cols; ++c) m = std::max(m, row[c]);
        double sum = 0.0;
        for (std::size_t c = 0; c < logits.cols; ++c) sum += std::exp(row[c] - m);
        const double lse = m + std::log(sum);
        total += lse - row[y];
        for (std::size_t c = 0; c < logits.cols; ++c) {
            double p = std::exp(row[c] - m) / sum;
            if (static_cast<int>(c) == y) p -= 1.0;
            out.grad.at(static_cast<std::size_t>(r), c) = inv_m * p;
        }
    }
    out.loss = total * inv_m;
    return out;
}

LossReport combined_loss(const NContrastResult& nc,
                         const CrossEntropyResult& ce) {
    LossReport rep;
    rep.loss_nc = nc.loss;
    rep.loss_ce = ce.loss;
    rep.loss_final = nc.loss + ce.loss;
    rep.skipped_nodes = nc.skipped;
    rep.no_labeled_nodes = ce.no_labeled_nodes;
    return rep;
}

}  // namespace graphmlp
