#pragma once

#include <optional>
#include <string>
#include <vector>

#include "graphmlp/graph.hpp"

namespace graphmlp {

struct DatasetSpec {
    std::string name;  // cora | citeseer | pubmed | custom
    int expected_n = 0;
    int expected_edges = 0;
    int expected_d = 0;
    int expected_classes = 0;

    static DatasetSpec named(const std::string& name);
};

struct LoadReport {
    int skipped_cites = 0;      // cite lines with an unknown id
    int duplicate_edges = 0;    // deduplicated pairs (incl. reversed dirs)
    int self_cites = 0;
    std::vector<std::string> notes;
};

// LINQS .content/.cites layout (Cora, Citeseer). Node order follows the
// content file; class labels are indexed by first appearance.
// Gzip-compressed inputs (.gz suffix) are read transparently.
Graph load_linqs_content_cites(const std::string& content_path,
                               const std::string& cites_path,
                               LoadReport* report = nullptr);

// Pubmed-Diabetes tab layout: sparse `w-term=<tfidf>` attributes scattered
// into a dense n x 500 matrix, labels 1..3 mapped to 0..2.
Graph load_pubmed_tab(const std::string& nodes_path,
                      const std::string& cites_path,
                      LoadReport* report = nullptr);

// Planetoid convention: per_class_train labeled nodes per class, then
// num_val and num_test labeled nodes from the remainder. Deterministic
// for a fixed rng seed.
Splits make_planetoid_splits(const Graph& g, int per_class_train, int num_val,
                             int num_test, Rng& rng);

// Validates n/d/C against the spec (hard failure for named datasets);
// edge-count discrepancies are reported, not fatal.
void validate_dataset(const Graph& g, const DatasetSpec& spec,
                      LoadReport* report = nullptr);

// Scales every feature row to unit L1 norm (zero rows left untouched).
void row_normalize_features(Graph& g);

// Canonical directory format: meta.json, features.tsv, labels.tsv,
// edges.tsv, splits.json. Bit-exact round trip.
void save_canonical(const Graph& g, const std::string& dir);
Graph load_canonical(const std::string& dir);

}  // namespace graphmlp
