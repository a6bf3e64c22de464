#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "graphmlp/tensor.hpp"

namespace graphmlp {

constexpr int kUnlabeled = -1;

struct Splits {
    std::vector<int> train;
    std::vector<int> val;
    std::vector<int> test;
};

struct Graph {
    int n = 0;
    int d = 0;
    int num_classes = 0;
    Tensor2 features;             // n x d
    std::vector<int> labels;      // length n, kUnlabeled for unlabeled
    std::vector<std::pair<int, int>> edges;  // undirected, i < j, unique
    Splits splits;
};

// Square CSR matrix. col_idx sorted within each row, no duplicates,
// no stored zeros.
struct SparseMatrix {
    int n = 0;
    std::vector<std::int64_t> row_ptr;  // length n+1
    std::vector<int> col_idx;
    std::vector<double> values;

    std::int64_t nnz() const { return static_cast<std::int64_t>(col_idx.size()); }
    double get(int i, int j) const;
};

// Builds a CSR matrix from (row, col, value) triplets: sorts, merges
// duplicates by summation, prunes entries with |v| <= prune_tol.
SparseMatrix csr_from_triplets(int n,
                               std::vector<std::tuple<int, int, double>> trips,
                               double prune_tol = 0.0);

Tensor2 to_dense(const SparseMatrix& m);

// Symmetric binary adjacency with zero diagonal.
SparseMatrix build_adjacency(const Graph& g);

// A_hat = D^{-1/2} (A + I) D^{-1/2}, D the degree matrix of A + I.
SparseMatrix normalize_adjacency(const SparseMatrix& a);

// Exact r-fold sparse product; entries with |v| <= 1e-12 pruned.
SparseMatrix sparse_power(const SparseMatrix& a_hat, int r);

// Dense B x B slice m[ids, ids]. Duplicate or out-of-range ids throw.
Tensor2 extract_submatrix(const SparseMatrix& m, std::span<const int> ids);

// Eq.-style corruption of a binary symmetric matrix: each upper-triangular
// position is selected with probability delta and overwritten by a fair
// coin; mirrored to stay symmetric; diagonal untouched.
SparseMatrix corrupt_adjacency(const SparseMatrix& a, double delta, Rng& rng);

// Dense out = m * x (sparse-dense product).
Tensor2 spmm(const SparseMatrix& m, const Tensor2& x);

}  // namespace graphmlp
