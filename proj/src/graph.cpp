#include "graphmlp/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>
#include <unordered_set>

namespace graphmlp {

namespace {
constexpr double kPruneTol = 1e-12;
}

double SparseMatrix::get(int i, int j) const {
    const auto begin = col_idx.begin() + row_ptr[i];
    const auto end = col_idx.begin() + row_ptr[i + 1];
    const auto it = std::lower_bound(begin, end, j);
    if (it == end || *it != j) return 0.0;
    return values[static_cast<std::size_t>(it - col_idx.begin())];
}

SparseMatrix csr_from_triplets(int n,
                               std::vector<std::tuple<int, int, double>> trips,
                               double prune_tol) {
    for (const auto& [i, j, v] : trips) {
        (void)v;
        if (i < 0 || i >= n || j < 0 || j >= n)
            throw std::invalid_argument("csr_from_triplets: index out of range");
    }
    std::sort(trips.begin(), trips.end(),
              [](const auto& a, const auto& b) {
                  return std::tie(std::get<0>(a), std::get<1>(a)) <
                         std::tie(std::get<0>(b), std::get<1>(b));
              });
    SparseMatrix m;
    m.n = n;
    m.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
    std::size_t k = 0;
    while (k < trips.size()) {
        const int i = std::get<0>(trips[k]);
        const int j = std::get<1>(trips[k]);
        double v = std::get<2>(trips[k]);
        ++k;
        while (k < trips.size() && std::get<0>(trips[k]) == i &&
               std::get<1>(trips[k]) == j) {
            v += std::get<2>(trips[k]);
            ++k;
        }
        if (std::abs(v) <= prune_tol) continue;
        m.col_idx.push_back(j);
        m.values.push_back(v);
        ++m.row_ptr[static_cast<std::size_t>(i) + 1];
    }
    for (int i = 0; i < n; ++i) m.row_ptr[i + 1] += m.row_ptr[i];
    return m;
}

Tensor2 to_dense(const SparseMatrix& m) {
    Tensor2 out(static_cast<std::size_t>(m.n), static_cast<std::size_t>(m.n), 0.0);
    for (int i = 0; i < m.n; ++i)
        for (auto p = m.row_ptr[i]; p < m.row_ptr[i + 1]; ++p)
            out.at(i, m.col_idx[p]) = m.values[p];
    return out;
}

SparseMatrix build_adjacency(const Graph& g) {
    std::vector<std::tuple<int, int, double>> trips;
    trips.reserve(g.edges.size() * 2);
    std::unordered_set<std::int64_t> seen;
    for (const auto& [i, j] : g.edges) {
        if (i < 0 || i >= g.n || j < 0 || j >= g.n)
            throw std::invalid_argument("build_adjacency: edge endpoint out of range");
        if (i == j) continue;
        const std::int64_t key =
            static_cast<std::int64_t>(std::min(i, j)) * g.n + std::max(i, j);
        if (!seen.insert(key).second) continue;
        trips.emplace_back(i, j, 1.0);
        trips.emplace_back(j, i, 1.0);
    }
    return csr_from_triplets(g.n, std::move(trips));
}

SparseMatrix normalize_adjacency(const SparseMatrix& a) {
    std::vector<double> deg(static_cast<std::size_t>(a.n), 1.0);  // self-loop
    for (int i = 0; i < a.n; ++i)
        for (auto p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p)
            deg[i] += a.values[p];
    std::vector<double> dinv(deg.size());
    for (std::size_t i = 0; i < deg.size(); ++i) dinv[i] = 1.0 / std::sqrt(deg[i]);

    std::vector<std::tuple<int, int, double>> trips;
    trips.reserve(a.col_idx.size() + static_cast<std::size_t>(a.n));
    for (int i = 0; i < a.n; ++i) {
        trips.emplace_back(i, i, dinv[i] * dinv[i]);  // self-loop entry
        for (auto p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
            const int j = a.col_idx[p];
            trips.emplace_back(i, j, dinv[i] * a.values[p] * dinv[j]);
        }
    }
    return csr_from_triplets(a.n, std::move(trips));
}

namespace {
// C = A * B, classic row-wise CSR product with a dense accumulator.
SparseMatrix sparse_product(const SparseMatrix& a, const SparseMatrix& b) {
    SparseMatrix c;
    c.n = a.n;
    c.row_ptr.assign(static_cast<std::size_t>(a.n) + 1, 0);
    std::vector<double> acc(static_cast<std::size_t>(a.n), 0.0);
    std::vector<int> touched;
    for (int i = 0; i < a.n; ++i) {
        touched.clear();
        for (auto p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
            const int k = a.col_idx[p];
            const double aik = a.values[p];
            for (auto q = b.row_ptr[k]; q < b.row_ptr[k + 1]; ++q) {
                const int j = b.col_idx[q];
                if (acc[j] == 0.0) touched.push_back(j);
                acc[j] += aik * b.values[q];
            }
        }
        std::sort(touched.begin(), touched.end());
        for (const int j : touched) {
            if (std::abs(acc[j]) > kPruneTol) {
                c.col_idx.push_back(j);
                c.values.push_back(acc[j]);
            }
            acc[j] = 0.0;
        }
        c.row_ptr[i + 1] = static_cast<std::int64_t>(c.col_idx.size());
    }
    return c;
}
}  // namespace

SparseMatrix sparse_power(const SparseMatrix& a_hat, int r) {
    if (r < 1) throw std::invalid_argument("sparse_power: r must be >= 1");
    SparseMatrix out = a_hat;
    for (int k = 1; k < r; ++k) out = sparse_product(out, a_hat);
    return out;
}

Tensor2 extract_submatrix(const SparseMatrix& m, std::span<const int> ids) {
    std::vector<int> pos(static_cast<std::size_t>(m.n), -1);
    for (std::size_t p = 0; p < ids.size(); ++p) {
        const int i = ids[p];
        if (i < 0 || i >= m.n)
            throw std::invalid_argument("extract_submatrix: index out of range");
        if (pos[i] != -1)
            throw std::invalid_argument("extract_submatrix: duplicate index");
        pos[i] = static_cast<int>(p);
    }
    Tensor2 out(ids.size(), ids.size(), 0.0);
    for (std::size_t p = 0; p < ids.size(); ++p) {
        const int i = ids[p];
        for (auto q = m.row_ptr[i]; q < m.row_ptr[i + 1]; ++q) {
            const int c = pos[m.col_idx[q]];
            if (c != -1) out.at(p, c) = m.values[q];
        }
    }
    return out;
}

SparseMatrix corrupt_adjacency(const SparseMatrix& a, double delta, Rng& rng) {
    if (delta < 0.0 || delta > 1.0)
        throw std::invalid_argument("corrupt_adjacency: delta must be in [0,1]");
    if (delta == 0.0) return a;

    // Walk the upper triangle; start from the existing edges and apply the
    // mask/noise overwrite. Positions not selected keep their value.
    std::vector<std::tuple<int, int, double>> trips;
    for (int i = 0; i < a.n; ++i) {
        auto p = a.row_ptr[i];
        const auto pe = a.row_ptr[i + 1];
        while (p < pe && a.col_idx[p] <= i) ++p;  // skip lower triangle + diag
        for (int j = i + 1; j < a.n; ++j) {
            const bool had = (p < pe && a.col_idx[p] == j);
            if (had) ++p;
            double v = had ? 1.0 : 0.0;
            if (rng.next_double() < delta)
                v = (rng.next_double() < 0.5) ? 1.0 : 0.0;
            if (v != 0.0) {
                trips.emplace_back(i, j, 1.0);
                trips.emplace_back(j, i, 1.0);
            }
        }
    }
    return csr_from_triplets(a.n, std::move(trips));
}

Tensor2 spmm(const SparseMatrix& m, const Tensor2& x) {
    if (static_cast<std::size_t>(m.n) != x.rows)
        throw std::invalid_argument("spmm: dimension mismatch");
    Tensor2 out(x.rows, x.cols, 0.0);
    for (int i = 0; i < m.n; ++i) {
        double* orow = out.row(i);
        for (auto p = m.row_ptr[i]; p < m.row_ptr[i + 1]; ++p) {
            const double v = m.values[p];
            const double* xrow = x.row(m.col_idx[p]);
            for (std::size_t c = 0; c < x.cols; ++c) orow[c] += v * xrow[c];
        }
    }
    return out;
}

}  // namespace graphmlp
