#include "graphmlp/ingest.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "json.hpp"

namespace graphmlp {

namespace fs = std::filesystem;

namespace {

// gzread is transparent for uncompressed files, so one path serves both.
std::string read_text_file(const std::string& path) {
    gzFile f = gzopen(path.c_str(), "rb");
    if (!f) throw std::runtime_error("cannot open file: " + path);
    std::string out;
    char buf[1 << 16];
    int n = 0;
    while ((n = gzread(f, buf, sizeof(buf))) > 0) out.append(buf, static_cast<std::size_t>(n));
    const bool bad = (n < 0);
    gzclose(f);
    if (bad) throw std::runtime_error("error reading file: " + path);
    return out;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        std::string line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
        start = end + 1;
    }
    return lines;
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t end = line.find('\t', start);
        if (end == std::string::npos) {
            parts.push_back(line.substr(start));
            break;
        }
        parts.push_back(line.substr(start, end - start));
        start = end + 1;
    }
    return parts;
}

void add_undirected_edge(Graph& g, std::set<std::pair<int, int>>& seen, int a,
                         int b, LoadReport& rep) {
    if (a == b) {
        ++rep.self_cites;
        return;
    }
    const auto key = std::minmax(a, b);
    if (!seen.insert(key).second) {
        ++rep.duplicate_edges;
        return;
    }
    g.edges.emplace_back(key.first, key.second);
}

std::uint32_t crc_of_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open file: " + path);
    std::uint32_t crc = 0;
    char buf[1 << 16];
    while (is) {
        is.read(buf, sizeof(buf));
        crc = static_cast<std::uint32_t>(crc32(
            crc, reinterpret_cast<const Bytef*>(buf), static_cast<uInt>(is.gcount())));
    }
    return crc;
}

}  // namespace

DatasetSpec DatasetSpec::named(const std::string& name) {
    if (name == "cora") return {"cora", 2708, 5429, 1433, 7};
    if (name == "citeseer") return {"citeseer", 3327, 4732, 3703, 6};
    if (name == "pubmed") return {"pubmed", 19717, 44338, 500, 3};
    return {"custom", 0, 0, 0, 0};
}

Graph load_linqs_content_cites(const std::string& content_path,
                               const std::string& cites_path,
                               LoadReport* report) {
    LoadReport rep;
    Graph g;
    std::unordered_map<std::string, int> id_to_node;
    std::unordered_map<std::string, int> label_to_class;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> raw_labels;

    for (const std::string& line : split_lines(read_text_file(content_path))) {
        if (line.empty()) continue;
        const auto parts = split_tabs(line);
        if (parts.size() < 3)
            throw std::runtime_error("content line too short: '" + line + "'");
        const std::string& id = parts.front();
        if (id_to_node.count(id))
            throw std::runtime_error("duplicate node id: " + id);
        std::vector<double> feats(parts.size() - 2);
        for (std::size_t k = 1; k + 1 < parts.size(); ++k)
            feats[k - 1] = std::stod(parts[k]);
        if (!rows.empty() && feats.size() != rows.front().size())
            throw std::runtime_error("ragged feature row for node " + id);
        id_to_node.emplace(id, static_cast<int>(rows.size()));
        rows.push_back(std::move(feats));
        raw_labels.push_back(parts.back());
    }
    if (rows.empty()) throw std::runtime_error("empty content file: " + content_path);

    g.n = static_cast<int>(rows.size());
    g.d = static_cast<int>(rows.front().size());
    g.features = Tensor2(static_cast<std::size_t>(g.n), static_cast<std::size_t>(g.d));
    g.labels.resize(static_cast<std::size_t>(g.n), kUnlabeled);
    for (int i = 0; i < g.n; ++i) {
        std::copy(rows[i].begin(), rows[i].end(), g.features.row(i));
        const auto [it, inserted] = label_to_class.emplace(
            raw_labels[i], static_cast<int>(label_to_class.size()));
        (void)inserted;
        g.labels[i] = it->second;
    }
    g.num_classes = static_cast<int>(label_to_class.size());

    std::set<std::pair<int, int>> seen;
    for (const std::string& line : split_lines(read_text_file(cites_path))) {
        if (line.empty()) continue;
        const auto parts = split_tabs(line);
        if (parts.size() != 2)
            throw std::runtime_error("cites line malformed: '" + line + "'");
        const auto a = id_to_node.find(parts[0]);
        const auto b = id_to_node.find(parts[1]);
        if (a == id_to_node.end() || b == id_to_node.end()) {
            ++rep.skipped_cites;
            continue;
        }
        add_undirected_edge(g, seen, a->second, b->second, rep);
    }
    if (report) *report = rep;
    return g;
}

Graph load_pubmed_tab(const std::string& nodes_path,
                      const std::string& cites_path, LoadReport* report) {
    LoadReport rep;
    const auto node_lines = split_lines(read_text_file(nodes_path));
    if (node_lines.size() < 3)
        throw std::runtime_error("pubmed node file too short: " + nodes_path);

    // Line 2 is the attribute header: numeric:w-<term>:0.0 tokens define
    // the vocabulary and the column order.
    std::unordered_map<std::string, int> vocab;
    for (const std::string& tok : split_tabs(node_lines[1])) {
        if (tok.rfind("numeric:", 0) != 0) continue;
        std::string name = tok.substr(8);
        const std::size_t colon = name.find(':');
        if (colon != std::string::npos) name.resize(colon);
        if (name == "summary") continue;
        vocab.emplace(name, static_cast<int>(vocab.size()));
    }
    if (vocab.empty())
        throw std::runtime_error("pubmed header defines no attributes");

    Graph g;
    g.d = static_cast<int>(vocab.size());
    std::unordered_map<std::string, int> id_to_node;
    std::vector<std::vector<std::pair<int, double>>> sparse_rows;
    std::vector<int> labels;
    int max_label = 0;
    for (std::size_t ln = 2; ln < node_lines.size(); ++ln) {
        const std::string& line = node_lines[ln];
        if (line.empty()) continue;
        const auto parts = split_tabs(line);
        if (parts.size() < 2)
            throw std::runtime_error("pubmed node line malformed: '" + line + "'");
        const std::string& id = parts[0];
        if (id_to_node.count(id)) throw std::runtime_error("duplicate node id: " + id);
        int label = kUnlabeled;
        std::vector<std::pair<int, double>> row;
        for (std::size_t k = 1; k < parts.size(); ++k) {
            const std::string& tok = parts[k];
            const std::size_t eq = tok.find('=');
            if (eq == std::string::npos) continue;
            const std::string name = tok.substr(0, eq);
            const std::string val = tok.substr(eq + 1);
            if (name == "label") {
                label = std::stoi(val) - 1;  // 1..3 -> 0..2
            } else if (name == "summary") {
                continue;
            } else {
                const auto it = vocab.find(name);
                if (it == vocab.end())
                    throw std::runtime_error("attribute not in header vocabulary: " + name);
                row.emplace_back(it->second, std::stod(val));
            }
        }
        if (label < 0)
            throw std::runtime_error("pubmed node without label: " + id);
        max_label = std::max(max_label, label);
        id_to_node.emplace(id, static_cast<int>(sparse_rows.size()));
        sparse_rows.push_back(std::move(row));
        labels.push_back(label);
    }
    if (sparse_rows.empty())
        throw std::runtime_error("empty pubmed node file: " + nodes_path);

    g.n = static_cast<int>(sparse_rows.size());
    g.num_classes = max_label + 1;
    g.labels = std::move(labels);
    g.features = Tensor2(static_cast<std::size_t>(g.n), static_cast<std::size_t>(g.d));
    for (int i = 0; i < g.n; ++i)
        for (const auto& [c, v] : sparse_rows[i]) g.features.at(i, c) = v;

    std::set<std::pair<int, int>> seen;
    const auto cite_lines = split_lines(read_text_file(cites_path));
    for (std::size_t ln = 0; ln < cite_lines.size(); ++ln) {
        if (ln < 2) continue;  // two header lines
        const std::string& line = cite_lines[ln];
        if (line.empty()) continue;
        std::vector<int> endpoints;
        bool unknown = false;
        for (const std::string& tok : split_tabs(line)) {
            const std::size_t p = tok.find("paper:");
            if (p == std::string::npos) continue;
            const std::string id = tok.substr(p + 6);
            const auto it = id_to_node.find(id);
            if (it == id_to_node.end())
                unknown = true;
            else
                endpoints.push_back(it->second);
        }
        if (unknown || endpoints.size() != 2) {
            ++rep.skipped_cites;
            continue;
        }
        add_undirected_edge(g, seen, endpoints[0], endpoints[1], rep);
    }
    if (report) *report = rep;
    return g;
}

Splits make_planetoid_splits(const Graph& g, int per_class_train, int num_val,
                             int num_test, Rng& rng) {
    if (per_class_train <= 0)
        throw std::invalid_argument("make_planetoid_splits: per_class_train must be > 0");
    const long need = static_cast<long>(per_class_train) * g.num_classes +
                      num_val + num_test;
    if (need > g.n)
        throw std::invalid_argument("make_planetoid_splits: split sizes exceed node count");

    // One shared shuffle drives both the per-class picks and the val/test tail.
    std::vector<int> order(static_cast<std::size_t>(g.n));
    for (int i = 0; i < g.n; ++i) order[static_cast<std::size_t>(i)] = i;
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.index(i)]);

    Splits s;
    std::vector<int> taken_per_class(static_cast<std::size_t>(g.num_classes), 0);
    std::vector<bool> used(static_cast<std::size_t>(g.n), false);
    for (const int i : order) {
        const int y = g.labels[static_cast<std::size_t>(i)];
        if (y == kUnlabeled) continue;
        if (taken_per_class[static_cast<std::size_t>(y)] < per_class_train) {
            ++taken_per_class[static_cast<std::size_t>(y)];
            s.train.push_back(i);
            used[static_cast<std::size_t>(i)] = true;
        }
    }
    for (int c = 0; c < g.num_classes; ++c)
        if (taken_per_class[static_cast<std::size_t>(c)] < per_class_train)
            throw std::runtime_error("make_planetoid_splits: class " +
                                     std::to_string(c) + " has fewer than " +
                                     std::to_string(per_class_train) + " labeled nodes");
    for (const int i : order) {
        if (used[static_cast<std::size_t>(i)]) continue;
        if (g.labels[static_cast<std::size_t>(i)] == kUnlabeled) continue;
        if (static_cast<int>(s.val.size()) < num_val) {
            s.val.push_back(i);
            used[static_cast<std::size_t>(i)] = true;
        } else if (static_cast<int>(s.test.size()) < num_test) {
            s.test.push_back(i);
            used[static_cast<std::size_t>(i)] = true;
        }
    }
    if (static_cast<int>(s.val.size()) < num_val ||
        static_cast<int>(s.test.size()) < num_test)
        throw std::runtime_error("make_planetoid_splits: not enough labeled nodes");
    return s;
}

void validate_dataset(const Graph& g, const DatasetSpec& spec,
                      LoadReport* report) {
    if (spec.name == "custom") return;
    auto fail = [&](const std::string& what, long got, long want) {
        throw std::runtime_error("dataset validation failed for '" + spec.name +
                                 "': " + what + " is " + std::to_string(got) +
                                 ", expected " + std::to_string(want));
    };
    if (g.n != spec.expected_n) fail("node count", g.n, spec.expected_n);
    if (g.d != spec.expected_d) fail("feature dim", g.d, spec.expected_d);
    if (g.num_classes != spec.expected_classes)
        fail("class count", g.num_classes, spec.expected_classes);
    if (static_cast<int>(g.edges.size()) != spec.expected_edges && report)
        report->notes.push_back(
            "edge count " + std::to_string(g.edges.size()) + " differs from the " +
            "published " + std::to_string(spec.expected_edges) +
            " (raw corpora carry duplicate and dangling citations)");
}

void row_normalize_features(Graph& g) {
    for (std::size_t i = 0; i < g.features.rows; ++i) {
        double* row = g.features.row(i);
        double sum = 0.0;
        for (std::size_t j = 0; j < g.features.cols; ++j) sum += std::abs(row[j]);
        if (sum == 0.0) continue;
        for (std::size_t j = 0; j < g.features.cols; ++j) row[j] /= sum;
    }
}

void save_canonical(const Graph& g, const std::string& dir) {
    fs::create_directories(dir);
    {
        std::ofstream os(fs::path(dir) / "features.tsv", std::ios::binary);
        char buf[64];
        for (std::size_t i = 0; i < g.features.rows; ++i) {
            for (std::size_t j = 0; j < g.features.cols; ++j) {
                std::snprintf(buf, sizeof(buf), "%.17g", g.features.at(i, j));
                if (j) os << '\t';
                os << buf;
            }
            os << '\n';
        }
    }
    {
        std::ofstream os(fs::path(dir) / "labels.tsv", std::ios::binary);
        for (const int y : g.labels) os << y << '\n';
    }
    {
        std::ofstream os(fs::path(dir) / "edges.tsv", std::ios::binary);
        auto edges = g.edges;
        for (auto& [a, b] : edges)
            if (a > b) std::swap(a, b);
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
        for (const auto& [a, b] : edges) os << a << '\t' << b << '\n';
    }
    {
        nlohmann::json j;
        j["train"] = g.splits.train;
        j["val"] = g.splits.val;
        j["test"] = g.splits.test;
        std::ofstream os(fs::path(dir) / "splits.json", std::ios::binary);
        os << j.dump() << '\n';
    }
    nlohmann::json meta;
    meta["format_version"] = 1;
    meta["n"] = g.n;
    meta["d"] = g.d;
    meta["num_classes"] = g.num_classes;
    meta["num_edges"] = g.edges.size();
    nlohmann::json sums;
    for (const char* f : {"features.tsv", "labels.tsv", "edges.tsv", "splits.json"})
        sums[f] = crc_of_file((fs::path(dir) / f).string());
    meta["crc32"] = sums;
    std::ofstream os(fs::path(dir) / "meta.json", std::ios::binary);
    os << meta.dump(2) << '\n';
}

Graph load_canonical(const std::string& dir) {
    const fs::path root(dir);
    for (const char* f :
         {"meta.json", "features.tsv", "labels.tsv", "edges.tsv", "splits.json"})
        if (!fs::exists(root / f))
            throw std::runtime_error("canonical dataset missing component: " +
                                     (root / f).string());
    nlohmann::json meta;
    {
        std::ifstream is(root / "meta.json");
        is >> meta;
    }
    if (meta.at("format_version").get<int>() != 1)
        throw std::runtime_error("unsupported canonical format version");
    for (const auto& [f, want] : meta.at("crc32").items()) {
        const std::uint32_t got = crc_of_file((root / f).string());
        if (got != want.get<std::uint32_t>())
            throw std::runtime_error("checksum mismatch in " + (root / f).string());
    }

    Graph g;
    g.n = meta.at("n").get<int>();
    g.d = meta.at("d").get<int>();
    g.num_classes = meta.at("num_classes").get<int>();
    g.features = Tensor2(static_cast<std::size_t>(g.n), static_cast<std::size_t>(g.d));
    {
        const auto lines = split_lines(read_text_file((root / "features.tsv").string()));
        std::size_t row = 0;
        for (const std::string& line : lines) {
            if (line.empty()) continue;
            if (row >= g.features.rows)
                throw std::runtime_error("features.tsv has too many rows");
            const char* p = line.c_str();
            for (std::size_t j = 0; j < g.features.cols; ++j) {
                char* endp = nullptr;
                g.features.at(row, j) = std::strtod(p, &endp);
                if (endp == p) throw std::runtime_error("malformed features.tsv row");
                p = endp;
                if (*p == '\t') ++p;
            }
            ++row;
        }
        if (row != g.features.rows)
            throw std::runtime_error("features.tsv row count mismatch");
    }
    for (const std::string& line : split_lines(read_text_file((root / "labels.tsv").string())))
        if (!line.empty()) g.labels.push_back(std::stoi(line));
    if (static_cast<int>(g.labels.size()) != g.n)
        throw std::runtime_error("labels.tsv length mismatch");
    for (const std::string& line : split_lines(read_text_file((root / "edges.tsv").string()))) {
        if (line.empty()) continue;
        const auto parts = split_tabs(line);
        if (parts.size() != 2) throw std::runtime_error("malformed edges.tsv line");
        g.edges.emplace_back(std::stoi(parts[0]), std::stoi(parts[1]));
    }
    {
        std::ifstream is(root / "splits.json");
        nlohmann::json j;
        is >> j;
        g.splits.train = j.at("train").get<std::vector<int>>();
        g.splits.val = j.at("val").get<std::vector<int>>();
        g.splits.test = j.at("test").get<std::vector<int>>();
    }
    return g;
}

}  // namespace graphmlp
