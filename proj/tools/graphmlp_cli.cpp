// Command-line front end: ingest | train | eval | corrupt-eval | bench |
// sweep | embed. Every run writes the fully resolved config.json into the
// output directory.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "graphmlp/experiments.hpp"
#include "graphmlp/ingest.hpp"
#include "graphmlp/train.hpp"

namespace fs = std::filesystem;
using namespace graphmlp;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct CommonOpts {
    std::string dataset_dir;
    std::string out_dir = "out";
    std::string model = "graphmlp";
    bool deterministic = false;
    TrainConfig cfg;
};

void add_train_flags(CLI::App* cmd, CommonOpts& o, bool need_dataset = true) {
    if (need_dataset)
        cmd->add_option("--dataset", o.dataset_dir, "canonical dataset directory")
            ->required();
    cmd->add_option("--out", o.out_dir, "output directory");
    cmd->add_option("--model", o.model, "graphmlp | gcn | mlp");
    cmd->add_option("--batch-size,-B", o.cfg.batch_size);
    cmd->add_option("--alpha", o.cfg.alpha);
    cmd->add_option("--tau", o.cfg.tau);
    cmd->add_option("--r", o.cfg.r);
    cmd->add_option("--iterations,-T", o.cfg.iterations);
    cmd->add_option("--lr", o.cfg.lr);
    cmd->add_option("--weight-decay", o.cfg.weight_decay);
    cmd->add_option("--hidden", o.cfg.hidden);
    cmd->add_option("--dropout", o.cfg.dropout);
    cmd->add_option("--seed", o.cfg.seed);
    cmd->add_option("--eval-every", o.cfg.eval_every);
    cmd->add_flag("--no-bias", [&o](std::int64_t) { o.cfg.bias = false; },
                  "disable linear-layer biases");
    cmd->add_flag("--no-decay-norms-biases",
                  [&o](std::int64_t) { o.cfg.decay_norms_and_biases = false; },
                  "exempt layer norm and biases from weight decay");
    cmd->add_flag("--row-normalize", o.cfg.row_normalize,
                  "scale feature rows to unit L1 norm");
    cmd->add_flag("--deterministic", o.deterministic,
                  "zero wall times in emitted logs for byte-exact reruns");
}

void write_config_json(const CommonOpts& o, const std::string& subcommand) {
    fs::create_directories(o.out_dir);
    nlohmann::json j = to_json(o.cfg);
    j["subcommand"] = subcommand;
    j["dataset"] = o.dataset_dir;
    j["out"] = o.out_dir;
    j["model"] = o.model;
    j["deterministic"] = o.deterministic;
    std::ofstream os(fs::path(o.out_dir) / "config.json");
    os << j.dump(2) << '\n';
}

Graph load_dataset(const CommonOpts& o) {
    Graph g = load_canonical(o.dataset_dir);
    if (o.cfg.row_normalize) row_normalize_features(g);
    return g;
}

std::vector<ParamRef> snapshot_refs(std::vector<ParamRef> refs,
                                    std::vector<std::vector<double>>& snap) {
    // Rebind the model's param names onto the snapshot buffers.
    for (std::size_t k = 0; k < refs.size(); ++k) {
        refs[k].value = &snap[k];
        refs[k].grad = nullptr;
    }
    return refs;
}

int run_train(CommonOpts& o) {
    const Graph g = load_dataset(o);
    const ModelKind kind = model_kind_from_string(o.model);
    TrainResult res = train(g, o.cfg, kind);
    write_jsonl_log(res, (fs::path(o.out_dir) / "train_log.jsonl").string(),
                    o.deterministic);
    if (kind == ModelKind::gcn) {
        GcnModel m(static_cast<std::size_t>(g.d), static_cast<std::size_t>(o.cfg.hidden),
                   static_cast<std::size_t>(g.num_classes), o.cfg.dropout, o.cfg.bias);
        save_checkpoint((fs::path(o.out_dir) / "best.ckpt").string(), "gcn",
                        snapshot_refs(m.params(), res.best_params));
    } else {
        GraphMlpModel m(static_cast<std::size_t>(g.d),
                        static_cast<std::size_t>(o.cfg.hidden),
                        static_cast<std::size_t>(g.num_classes), o.cfg.dropout,
                        o.cfg.bias);
        save_checkpoint((fs::path(o.out_dir) / "best.ckpt").string(), "graphmlp",
                        snapshot_refs(m.params(), res.best_params));
    }
    nlohmann::json j = {{"model", to_string(res.kind)},
                        {"best_val_acc", res.best_val_acc},
                        {"test_acc_at_best", res.test_acc_at_best},
                        {"iterations", res.log.size()}};
    std::ofstream os(fs::path(o.out_dir) / "result.json");
    os << j.dump(2) << '\n';
    std::cout << j.dump(2) << '\n';
    return 0;
}

int run_eval(CommonOpts& o, const std::string& ckpt, const std::string& split) {
    const Graph g = load_dataset(o);
    const std::vector<int>* ids = &g.splits.test;
    if (split == "train") ids = &g.splits.train;
    else if (split == "val") ids = &g.splits.val;
    else if (split != "test")
        throw std::invalid_argument("unknown split: " + split);

    double acc = 0.0;
    if (o.model == "gcn") {
        GcnModel m(static_cast<std::size_t>(g.d), static_cast<std::size_t>(o.cfg.hidden),
                   static_cast<std::size_t>(g.num_classes), o.cfg.dropout, o.cfg.bias);
        load_checkpoint(ckpt, "gcn", m.params());
        acc = evaluate(m, normalize_adjacency(build_adjacency(g)), g, *ids);
    } else {
        GraphMlpModel m(static_cast<std::size_t>(g.d),
                        static_cast<std::size_t>(o.cfg.hidden),
                        static_cast<std::size_t>(g.num_classes), o.cfg.dropout,
                        o.cfg.bias);
        load_checkpoint(ckpt, "graphmlp", m.params());
        acc = evaluate(m, g, *ids);
    }
    nlohmann::json j = {{"split", split}, {"accuracy", acc}};
    std::ofstream os(fs::path(o.out_dir) / "eval.json");
    os << j.dump(2) << '\n';
    std::cout << j.dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Graph-MLP: message-passing-free graph node classification"};
    app.require_subcommand(1);

    CommonOpts o;

    // ingest
    auto* ingest = app.add_subcommand("ingest", "convert raw corpora to the canonical format");
    std::string format = "linqs", content, cites, name = "custom";
    bool row_norm = false;
    ingest->add_option("--format", format, "linqs | pubmed");
    ingest->add_option("--content", content, "content/node file")->required();
    ingest->add_option("--cites", cites, "cites file")->required();
    ingest->add_option("--name", name, "cora | citeseer | pubmed | custom (validates counts)");
    ingest->add_option("--out", o.out_dir, "output dataset directory")->required();
    ingest->add_flag("--row-normalize", row_norm, "scale feature rows to unit L1 norm");
    int per_class = 20, num_val = 500, num_test = 1000;
    std::uint64_t split_seed = 0;
    ingest->add_option("--per-class-train", per_class);
    ingest->add_option("--num-val", num_val);
    ingest->add_option("--num-test", num_test);
    ingest->add_option("--split-seed", split_seed);

    // train / eval / corrupt-eval / bench / sweep / embed
    auto* train_cmd = app.add_subcommand("train", "train a model");
    add_train_flags(train_cmd, o);

    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
    std::string ckpt, split = "test";
    add_train_flags(eval_cmd, o);
    eval_cmd->add_option("--checkpoint", ckpt, "checkpoint file")->required();
    eval_cmd->add_option("--split", split, "train | val | test");

    auto* corrupt_cmd = app.add_subcommand("corrupt-eval",
                                           "corruption robustness experiment");
    add_train_flags(corrupt_cmd, o);
    std::vector<double> deltas = {0.0, 0.01, 0.1};
    corrupt_cmd->add_option("--delta", deltas, "corruption ratios");

    auto* bench_cmd = app.add_subcommand("bench", "timing comparison vs GCN");
    add_train_flags(bench_cmd, o);
    int reps = 100;
    bench_cmd->add_option("--repetitions", reps);

    auto* sweep_cmd = app.add_subcommand("sweep", "hyperparameter grid sweep");
    add_train_flags(sweep_cmd, o);
    int n_seeds = 1, workers = 0;
    bool full_grid = false;
    sweep_cmd->add_option("--seeds", n_seeds, "seeds per grid point");
    sweep_cmd->add_option("--workers", workers, "worker pool size (0 = auto)");
    sweep_cmd->add_flag("--full-grid", full_grid,
                        "run the full 576-point grid instead of the reduced one");

    auto* embed_cmd = app.add_subcommand("embed", "export Z embeddings as TSV");
    add_train_flags(embed_cmd, o);
    std::string embed_ckpt;
    embed_cmd->add_option("--checkpoint", embed_ckpt, "checkpoint file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? kExitUsage : 0;
    }

    try {
        if (ingest->parsed()) {
            LoadReport rep;
            Graph g = (format == "pubmed")
                          ? load_pubmed_tab(content, cites, &rep)
                          : load_linqs_content_cites(content, cites, &rep);
            const DatasetSpec spec = DatasetSpec::named(name);
            validate_dataset(g, spec, &rep);
            if (row_norm) row_normalize_features(g);
            Rng rng(split_seed);
            g.splits = make_planetoid_splits(g, per_class, num_val, num_test, rng);
            save_canonical(g, o.out_dir);
            nlohmann::json j = {{"n", g.n},
                                {"d", g.d},
                                {"num_classes", g.num_classes},
                                {"num_edges", g.edges.size()},
                                {"skipped_cites", rep.skipped_cites},
                                {"duplicate_edges", rep.duplicate_edges},
                                {"self_cites", rep.self_cites},
                                {"notes", rep.notes}};
            std::ofstream os(fs::path(o.out_dir) / "load_report.json");
            os << j.dump(2) << '\n';
            std::cout << j.dump(2) << '\n';
            return 0;
        }
        if (train_cmd->parsed()) {
            write_config_json(o, "train");
            return run_train(o);
        }
        if (eval_cmd->parsed()) {
            write_config_json(o, "eval");
            return run_eval(o, ckpt, split);
        }
        if (corrupt_cmd->parsed()) {
            write_config_json(o, "corrupt-eval");
            const Graph g = load_dataset(o);
            const auto reports = run_corruption(g, o.cfg, deltas);
            std::ofstream os(fs::path(o.out_dir) / "corruption.json");
            os << to_json(reports).dump(2) << '\n';
            std::cout << to_json(reports).dump(2) << '\n';
            return 0;
        }
        if (bench_cmd->parsed()) {
            write_config_json(o, "bench");
            const Graph g = load_dataset(o);
            const TimingReport t = run_timing(g, o.cfg, reps);
            std::ofstream os(fs::path(o.out_dir) / "timing.json");
            os << to_json(t).dump(2) << '\n';
            write_curve_csv(t.graphmlp_curve,
                            (fs::path(o.out_dir) / "curve_graphmlp.csv").string());
            write_curve_csv(t.gcn_curve,
                            (fs::path(o.out_dir) / "curve_gcn.csv").string());
            std::cout << to_json(t).dump(2) << '\n';
            return 0;
        }
        if (sweep_cmd->parsed()) {
            write_config_json(o, "sweep");
            const Graph g = load_dataset(o);
            SweepGrid grid;
            if (!full_grid) {
                // reduced default grid: lr x alpha, everything else fixed
                grid.weight_decay = {o.cfg.weight_decay};
                grid.batch_size = {o.cfg.batch_size};
                grid.tau = {o.cfg.tau};
                grid.r = {o.cfg.r};
            }
            const auto ranked = run_sweep(g, grid, o.cfg, n_seeds, workers);
            std::ofstream os(fs::path(o.out_dir) / "sweep.json");
            os << to_json(ranked).dump(2) << '\n';
            if (!ranked.empty()) {
                nlohmann::json best = {{"config", to_json(ranked.front().config)},
                                       {"mean_val_acc", ranked.front().mean_val_acc},
                                       {"mean_test_acc", ranked.front().mean_test_acc}};
                std::cout << best.dump(2) << '\n';
            }
            return 0;
        }
        if (embed_cmd->parsed()) {
            write_config_json(o, "embed");
            const Graph g = load_dataset(o);
            GraphMlpModel m(static_cast<std::size_t>(g.d),
                            static_cast<std::size_t>(o.cfg.hidden),
                            static_cast<std::size_t>(g.num_classes), o.cfg.dropout,
                            o.cfg.bias);
            load_checkpoint(embed_ckpt, "graphmlp", m.params());
            export_embeddings(m, g, (fs::path(o.out_dir) / "embeddings.tsv").string());
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::runtime_error& e) {
        const std::string what = e.what();
        std::cerr << "error: " << what << '\n';
        return what.find("non-finite") != std::string::npos ? kExitNumeric
                                                            : kExitData;
    }
    return kExitUsage;
}
