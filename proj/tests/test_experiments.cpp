#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "graphmlp/experiments.hpp"

using namespace graphmlp;

namespace {

Graph make_sbm(Rng& rng, int n = 60, int d = 8, int classes = 3,
               double p_in = 0.25, double p_out = 0.02) {
    Graph g;
    g.n = n;
    g.d = d;
    g.num_classes = classes;
    g.features = Tensor2(static_cast<std::size_t>(n), static_cast<std::size_t>(d));
    for (int i = 0; i < n; ++i) {
        const int y = i % classes;
        g.labels.push_back(y);
        for (int j = 0; j < d; ++j)
            g.features.at(i, j) = 0.4 * rng.normal() + (j % classes == y ? 1.0 : 0.0);
    }
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            const double p = (a % classes == b % classes) ? p_in : p_out;
            if (rng.next_double() < p) g.edges.emplace_back(a, b);
        }
    for (int i = 0; i < n; ++i) {
        const int bucket = (i / 3) % 3;
        if (bucket == 0) g.splits.train.push_back(i);
        if (bucket == 1) g.splits.val.push_back(i);
        if (bucket == 2) g.splits.test.push_back(i);
    }
    return g;
}

TrainConfig small_config() {
    TrainConfig cfg;
    cfg.iterations = 60;
    cfg.hidden = 16;
    cfg.batch_size = 40;
    cfg.dropout = 0.3;
    cfg.lr = 0.05;
    cfg.seed = 7;
    return cfg;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(f)),
                       std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("default sweep grid enumerates 576 configurations") {
    CHECK(SweepGrid{}.size() == 576);
}

TEST_CASE("accuracy table reports both models over the requested seeds") {
    Rng rng(601);
    const Graph g = make_sbm(rng);
    TrainConfig cfg = small_config();
    cfg.iterations = 80;
    const auto rows =
        run_accuracy_table({{"toy", g}}, cfg, 3);
    REQUIRE(rows.size() == 2);
    for (const auto& row : rows) {
        CHECK(row.dataset == "toy");
        REQUIRE(row.per_seed.size() == 3);
        double mean = 0.0;
        for (const double a : row.per_seed) mean += a;
        mean /= 3.0;
        CHECK(row.mean_acc == doctest::Approx(mean).epsilon(1e-12));
        CHECK(row.std_acc >= 0.0);
        CHECK(row.mean_acc >= 0.0);
        CHECK(row.mean_acc <= 1.0);
    }
    CHECK(rows[0].model != rows[1].model);
    // contrastive structure helps on this graph: graphmlp >= plain mlp
    const double gmlp = rows[0].model == "graphmlp" ? rows[0].mean_acc : rows[1].mean_acc;
    const double mlp = rows[0].model == "mlp" ? rows[0].mean_acc : rows[1].mean_acc;
    CHECK(gmlp + 1e-9 >= mlp);
}

TEST_CASE("timing report produces positive times and convergence curves") {
    Rng rng(603);
    const Graph g = make_sbm(rng);
    TrainConfig cfg = small_config();
    cfg.iterations = 30;
    const TimingReport t = run_timing(g, cfg, 5);
    CHECK(t.repetitions == 5);
    CHECK(t.graphmlp_infer_s > 0.0);
    CHECK(t.gcn_infer_s > 0.0);
    CHECK(t.graphmlp_test_acc > 0.0);
    CHECK(t.gcn_test_acc > 0.0);
    CHECK(t.graphmlp_curve.size() == 30);
    CHECK(t.gcn_curve.size() == 30);

    const std::string path = "/tmp/graphmlp_curve.csv";
    write_curve_csv(t.graphmlp_curve, path);
    const std::string csv = slurp(path);
    CHECK(csv.rfind("iteration,wall_ms,val_acc\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 31);
    std::remove(path.c_str());
}

TEST_CASE("corruption sweep: graphmlp accuracy is invariant, gcn reacts") {
    Rng rng(605);
    const Graph g = make_sbm(rng, 90);
    TrainConfig cfg = small_config();
    cfg.iterations = 80;
    const auto reports = run_corruption(g, cfg, {0.0, 0.5});
    // two deltas x two models
    REQUIRE(reports.size() == 4);

    double gmlp_clean = -1.0, gmlp_noisy = -1.0;
    double gcn_clean = -1.0, gcn_noisy = -1.0;
    for (const auto& rep : reports) {
        REQUIRE(rep.accuracies.size() == 3);
        double mean = 0.0;
        for (const double a : rep.accuracies) mean += a;
        CHECK(rep.mean_acc == doctest::Approx(mean / 3.0).epsilon(1e-12));
        if (rep.model == "graphmlp" && rep.delta == 0.0) gmlp_clean = rep.mean_acc;
        if (rep.model == "graphmlp" && rep.delta == 0.5) gmlp_noisy = rep.mean_acc;
        if (rep.model == "gcn" && rep.delta == 0.0) gcn_clean = rep.mean_acc;
        if (rep.model == "gcn" && rep.delta == 0.5) gcn_noisy = rep.mean_acc;
    }
    REQUIRE(gmlp_clean >= 0.0);
    REQUIRE(gcn_clean >= 0.0);
    // inference never touches A, so corrupted runs match clean bit-for-bit
    CHECK(gmlp_clean == gmlp_noisy);
    // a half-randomized adjacency destroys most of the GCN's signal
    CHECK(gcn_noisy < gcn_clean);
}

TEST_CASE("embedding export is deterministic and well-formed") {
    Rng rng(607);
    const Graph g = make_sbm(rng, 20);
    GraphMlpModel model(g.d, 6, g.num_classes, 0.5);
    Rng init(5);
    init_params(model, init);

    const std::string p1 = "/tmp/graphmlp_emb1.tsv";
    const std::string p2 = "/tmp/graphmlp_emb2.tsv";
    export_embeddings(model, g, p1);
    export_embeddings(model, g, p2);  // eval mode: dropout must not fire
    const std::string s1 = slurp(p1);
    CHECK(s1 == slurp(p2));

    std::istringstream is(s1);
    std::string line;
    int rows = 0;
    while (std::getline(is, line)) {
        std::istringstream fields(line);
        int idx = -1, label = -2;
        fields >> idx >> label;
        CHECK(idx == rows);
        CHECK(label == g.labels[rows]);
        int dims = 0;
        double v = 0.0;
        while (fields >> v) ++dims;
        CHECK(dims == 6);
        ++rows;
    }
    CHECK(rows == g.n);
    std::remove(p1.c_str());
    std::remove(p2.c_str());
}

TEST_CASE("one-point sweep equals the plain training runs it covers") {
    Rng rng(609);
    const Graph g = make_sbm(rng);
    TrainConfig base = small_config();
    base.iterations = 40;

    SweepGrid grid;
    grid.lr = {0.05};
    grid.weight_decay = {5e-4};
    grid.batch_size = {40};
    grid.tau = {1.0};
    grid.r = {2};
    grid.alpha = {1.0};
    REQUIRE(grid.size() == 1);

    const auto entries = run_sweep(g, grid, base, 2, 1);
    REQUIRE(entries.size() == 1);

    double want_val = 0.0, want_test = 0.0;
    for (std::uint64_t s = 0; s < 2; ++s) {
        TrainConfig cfg = base;
        cfg.lr = 0.05;
        cfg.weight_decay = 5e-4;
        cfg.batch_size = 40;
        cfg.tau = 1.0;
        cfg.r = 2;
        cfg.alpha = 1.0;
        cfg.seed = base.seed + s;
        const TrainResult res = train(g, cfg, ModelKind::graphmlp);
        want_val += res.best_val_acc;
        want_test += res.test_acc_at_best;
    }
    CHECK(entries[0].mean_val_acc == doctest::Approx(want_val / 2).epsilon(1e-12));
    CHECK(entries[0].mean_test_acc == doctest::Approx(want_test / 2).epsilon(1e-12));
}

TEST_CASE("multi-point sweep ranks by mean validation accuracy") {
    Rng rng(611);
    const Graph g = make_sbm(rng);
    TrainConfig base = small_config();
    base.iterations = 25;

    SweepGrid grid;
    grid.lr = {0.05, 0.001};
    grid.weight_decay = {5e-4};
    grid.batch_size = {40};
    grid.tau = {1.0};
    grid.r = {2};
    grid.alpha = {0.0, 1.0};
    REQUIRE(grid.size() == 4);

    const auto serial = run_sweep(g, grid, base, 1, 1);
    REQUIRE(serial.size() == 4);
    for (std::size_t i = 1; i < serial.size(); ++i)
        CHECK(serial[i - 1].mean_val_acc >= serial[i].mean_val_acc);

    // thread count must not change the outcome
    const auto parallel = run_sweep(g, grid, base, 1, 4);
    REQUIRE(parallel.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(serial[i].mean_val_acc == parallel[i].mean_val_acc);
        CHECK(serial[i].mean_test_acc == parallel[i].mean_test_acc);
        CHECK(serial[i].config.lr == parallel[i].config.lr);
        CHECK(serial[i].config.alpha == parallel[i].config.alpha);
    }
}

TEST_CASE("json serializers carry the headline numbers") {
    Rng rng(613);
    const Graph g = make_sbm(rng, 30);
    TrainConfig cfg = small_config();
    cfg.iterations = 10;

    const auto rows = run_accuracy_table({{"toy", g}}, cfg, 1);
    const nlohmann::json ja = to_json(rows);
    REQUIRE(ja.is_array());
    CHECK(ja.size() == 2);
    CHECK(ja[0].contains("mean_acc"));
    CHECK(ja[0].contains("per_seed"));

    const nlohmann::json jc = to_json(cfg);
    CHECK(jc.at("lr").get<double>() == cfg.lr);
    CHECK(jc.at("batch_size").get<int>() == cfg.batch_size);
    CHECK(jc.at("tau").get<double>() == cfg.tau);
    CHECK(jc.at("iterations").get<int>() == cfg.iterations);
}
