// lipreg: vector-valued regression under a Lipschitz budget.
//
// Pipeline: generate-data -> smooth -> predict / evaluate, with tune for
// budget selection, baseline-nw for the kernel-regression baseline, and
// experiment for the end-to-end comparison table.

#include "lipreg/constraint_graph.hpp"
#include "lipreg/dataset.hpp"
#include "lipreg/errors.hpp"
#include "lipreg/experiment.hpp"
#include "lipreg/extension.hpp"
#include "lipreg/nadaraya_watson.hpp"
#include "lipreg/planar_arm.hpp"
#include "lipreg/rng.hpp"
#include "lipreg/selection.hpp"
#include "lipreg/smoothing.hpp"
#include "lipreg/version.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalFlags {
    double epsilon = 0.1;
    std::uint64_t seed = 1;
    int threads = 1;
    bool to_stdout = false;
    std::string manifest_path;
};

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw lipreg::IoError("cannot write " + path.string());
    out << content;
}

// Every run records its resolved parameters and artifacts; rerunning from the
// manifest reproduces the outputs byte for byte.
class ManifestWriter {
public:
    ManifestWriter(std::string subcommand, const GlobalFlags& flags)
        : started_(std::chrono::steady_clock::now()), flags_(flags) {
        manifest_["version"] = lipreg::kVersion;
        manifest_["subcommand"] = std::move(subcommand);
        manifest_["parameters"]["epsilon"] = flags.epsilon;
        manifest_["parameters"]["seed"] = flags.seed;
        manifest_["parameters"]["threads"] = flags.threads;
    }

    json& parameters() { return manifest_["parameters"]; }
    void add_input(const std::string& path) { manifest_["inputs"].push_back(path); }
    void add_output(const std::string& path) { manifest_["outputs"].push_back(path); }

    void finish(const std::string& default_path) {
        manifest_["seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
        const std::string path =
            flags_.manifest_path.empty() ? default_path : flags_.manifest_path;
        write_file(path, manifest_.dump(2) + "\n");
    }

private:
    std::chrono::steady_clock::time_point started_;
    GlobalFlags flags_;
    json manifest_;
};

void emit(const GlobalFlags& flags, const std::string& content,
          const std::optional<fs::path>& path) {
    if (path) write_file(*path, content + "\n");
    if (flags.to_stdout || !path) std::cout << content << std::endl;
}

// Queries arrive either as an inline comma-separated vector or as a file
// holding a dataset-style {"X": [[...]]} or a bare JSON array of points.
Eigen::MatrixXd parse_queries(const std::string& spec, int dim) {
    auto matrix_from = [dim](const std::vector<std::vector<double>>& rows) {
        if (rows.empty()) throw lipreg::ValidationError("no query points given");
        Eigen::MatrixXd Q(static_cast<Eigen::Index>(rows.size()), dim);
        for (size_t r = 0; r < rows.size(); ++r) {
            if (static_cast<int>(rows[r].size()) != dim)
                throw lipreg::ValidationError("query row " + std::to_string(r) + " has " +
                                              std::to_string(rows[r].size()) +
                                              " coordinates, expected " + std::to_string(dim));
            for (int c = 0; c < dim; ++c) Q(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<size_t>(c)];
        }
        return Q;
    };

    if (fs::exists(spec)) {
        std::ifstream in(spec);
        std::stringstream buffer;
        buffer << in.rdbuf();
        json j;
        try {
            j = json::parse(buffer.str());
        } catch (const json::exception& e) {
            throw lipreg::IoError("cannot parse query file " + spec + ": " + e.what());
        }
        const json& points = j.is_object() && j.contains("X") ? j["X"] : j;
        std::vector<std::vector<double>> rows;
        if (points.is_array() && !points.empty() && points[0].is_number()) {
            rows.push_back(points.get<std::vector<double>>());
        } else {
            for (const auto& row : points) rows.push_back(row.get<std::vector<double>>());
        }
        return matrix_from(rows);
    }

    std::vector<double> values;
    std::stringstream ss(spec);
    std::string token;
    while (std::getline(ss, token, ',')) {
        try {
            values.push_back(std::stod(token));
        } catch (const std::exception&) {
            throw lipreg::ValidationError("cannot parse query coordinate '" + token + "'");
        }
    }
    return matrix_from({values});
}

json extension_report(const lipreg::ExtensionResult& r) {
    return json{{"y_star", std::vector<double>(r.y_star.begin(), r.y_star.end())},
                {"max_slack", r.max_slack},
                {"iterations", r.iterations},
                {"anchor_index", r.anchor_index},
                {"epsilon", r.epsilon},
                {"feasible", r.feasible}};
}

std::vector<double> parse_number_list(const std::string& text) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) {
        try {
            values.push_back(std::stod(token));
        } catch (const std::exception&) {
            throw lipreg::ValidationError("cannot parse number '" + token + "'");
        }
    }
    if (values.empty()) throw lipreg::ValidationError("empty number list");
    return values;
}

int run(int argc, char** argv) {
    CLI::App app{"Lipschitz-budgeted vector regression"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand
    app.set_version_flag("--version", lipreg::kVersion);

    GlobalFlags flags;
    app.add_option("--epsilon", flags.epsilon, "approximation slack in (0, 1/2)")
        ->capture_default_str();
    app.add_option("--seed", flags.seed, "master random seed")->capture_default_str();
    app.add_option("--threads", flags.threads, "worker threads for independent work")
        ->capture_default_str();
    app.add_flag("--stdout", flags.to_stdout, "echo the primary JSON artifact to stdout");
    app.add_option("--manifest", flags.manifest_path, "run manifest path");

    // ---- generate-data ----
    auto* generate = app.add_subcommand("generate-data", "sample expert poses with ground truth");
    int gen_n = 100, gen_test_n = 0;
    std::string gen_out = "data";
    std::vector<double> expert_lengths{0.6, 0.6, 0.6, 0.6, 0.6};
    std::vector<double> learner_lengths{1.0, 1.0, 1.0};
    generate->add_option("--n", gen_n, "training samples")->capture_default_str();
    generate->add_option("--test-n", gen_test_n, "test samples (0 = none)")->capture_default_str();
    generate->add_option("--out", gen_out, "output directory")->capture_default_str();
    generate->add_option("--expert-lengths", expert_lengths, "expert link lengths");
    generate->add_option("--learner-lengths", learner_lengths, "learner link lengths");

    // ---- smooth ----
    auto* smooth_cmd = app.add_subcommand("smooth", "make labels Lipschitz-consistent");
    std::string smooth_input, smooth_output = "smoothed.json", smooth_report, smooth_graph = "complete";
    std::string smooth_dump_graph;
    double smooth_L = 1.0, smooth_phi0 = 0.0;
    smooth_cmd->add_option("--input", smooth_input, "dataset file")->required();
    smooth_cmd->add_option("--lipschitz", smooth_L, "Lipschitz budget")->required();
    smooth_cmd->add_option("--graph", smooth_graph, "complete | knn:<k> | spanner:<eps>")
        ->capture_default_str();
    smooth_cmd->add_option("--phi0", smooth_phi0, "distortion bracket (0 = binary search)")
        ->capture_default_str();
    smooth_cmd->add_option("--output", smooth_output, "smoothed dataset file")
        ->capture_default_str();
    smooth_cmd->add_option("--report", smooth_report, "JSON report file");
    smooth_cmd->add_option("--dump-graph", smooth_dump_graph, "write the constraint graph as JSON");

    // ---- predict ----
    auto* predict = app.add_subcommand("predict", "label new points by Lipschitz extension");
    std::string predict_model, predict_query, predict_output;
    double predict_L = 1.0;
    predict->add_option("--model", predict_model, "smoothed dataset file")->required();
    predict->add_option("--lipschitz", predict_L, "Lipschitz budget")->required();
    predict->add_option("--query", predict_query, "inline x1,x2,... or a JSON file of points")
        ->required();
    predict->add_option("--output", predict_output, "prediction JSON file");

    // ---- tune ----
    auto* tune = app.add_subcommand("tune", "select the Lipschitz budget");
    std::string tune_input, tune_output, tune_csv, tune_graph = "knn:8", tune_method = "cv";
    std::string tune_candidates;
    int tune_folds = 5;
    double tune_C = 1.0;
    tune->add_option("--input", tune_input, "dataset file")->required();
    tune->add_option("--method", tune_method, "cv | srm")->capture_default_str();
    tune->add_option("--candidates", tune_candidates, "comma-separated budgets (default: auto grid)");
    tune->add_option("--folds", tune_folds, "cross-validation folds")->capture_default_str();
    tune->add_option("--bound-constant", tune_C, "SRM bound constant C")->capture_default_str();
    tune->add_option("--graph", tune_graph, "constraint graph policy")->capture_default_str();
    tune->add_option("--output", tune_output, "profile JSON file");
    tune->add_option("--csv", tune_csv, "plot-ready CSV file");

    // ---- baseline-nw ----
    auto* baseline = app.add_subcommand("baseline-nw", "Nadaraya-Watson baseline");
    std::string nw_train, nw_query, nw_test, nw_output;
    double nw_bandwidth = 0.0;
    int nw_folds = 5, nw_grid = 16;
    baseline->add_option("--train", nw_train, "training dataset file")->required();
    baseline->add_option("--bandwidth", nw_bandwidth, "kernel bandwidth (0 = tune by CV)")
        ->capture_default_str();
    baseline->add_option("--folds", nw_folds, "CV folds for bandwidth tuning")
        ->capture_default_str();
    baseline->add_option("--grid-size", nw_grid, "bandwidth grid size")->capture_default_str();
    baseline->add_option("--query", nw_query, "inline point or JSON file of points");
    baseline->add_option("--test", nw_test, "labeled test set to evaluate");
    baseline->add_option("--output", nw_output, "output JSON file");

    // ---- evaluate ----
    auto* evaluate = app.add_subcommand("evaluate", "score predictions against labels");
    std::string eval_predictions, eval_truth, eval_loss = "squared", eval_output;
    evaluate->add_option("--predictions", eval_predictions, "dataset file with predicted labels")
        ->required();
    evaluate->add_option("--truth", eval_truth, "dataset file with true labels")->required();
    evaluate->add_option("--loss", eval_loss, "squared | euclidean")->capture_default_str();
    evaluate->add_option("--output", eval_output, "risk report JSON file");

    // ---- experiment ----
    auto* experiment = app.add_subcommand("experiment", "end-to-end comparison table");
    std::string exp_out = "experiment";
    std::string exp_sizes = "100,1000,10000";
    std::string exp_nw_policy = "median";
    int exp_test_n = 100, exp_knn = 16;
    double exp_L = 0.0, exp_quantile = 0.95, exp_gap = 0.2;
    experiment->add_option("--sizes", exp_sizes, "training sizes")->capture_default_str();
    experiment->add_option("--test-n", exp_test_n, "test samples")->capture_default_str();
    experiment->add_option("--knn", exp_knn, "constraint graph neighbors")->capture_default_str();
    experiment->add_option("--lipschitz", exp_L, "fixed budget (0 = quantile rule)")
        ->capture_default_str();
    experiment->add_option("--quantile", exp_quantile, "edge-ratio quantile for the budget")
        ->capture_default_str();
    experiment->add_option("--gap", exp_gap, "required mwu/nw loss ratio")->capture_default_str();
    experiment->add_option("--nw-policy", exp_nw_policy, "baseline bandwidth rule: median | cv")
        ->capture_default_str();
    experiment->add_option("--out", exp_out, "output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e); // 0
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e); // 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (generate->parsed()) {
        ManifestWriter manifest("generate-data", flags);
        manifest.parameters()["n"] = gen_n;
        manifest.parameters()["test_n"] = gen_test_n;
        manifest.parameters()["expert_lengths"] = expert_lengths;
        manifest.parameters()["learner_lengths"] = learner_lengths;
        lipreg::GenerateOptions options;
        options.expert_lengths = expert_lengths;
        options.learner_lengths = learner_lengths;
        options.threads = flags.threads;
        manifest.parameters()["angle_center"] = options.angle_center;
        manifest.parameters()["angle_range"] = options.angle_range;
        manifest.parameters()["solver"] = {{"stations", options.solver.stations},
                                           {"starts", options.solver.starts},
                                           {"ee_tol", options.solver.ee_tol}};

        lipreg::GeneratedData train = lipreg::generate_dataset(gen_n, flags.seed, options);
        const fs::path out_dir(gen_out);
        const fs::path train_path = out_dir / "train.json";
        write_file(train_path, lipreg::dataset_to_json_string(train.dataset) + "\n");
        manifest.add_output(train_path.string());
        json summary{{"train", train_path.string()},
                     {"n", gen_n},
                     {"resamples", train.resamples},
                     {"seed", flags.seed}};
        if (gen_test_n > 0) {
            lipreg::GeneratedData test = lipreg::generate_dataset(
                gen_test_n, lipreg::splitmix64(flags.seed ^ 0x74657374ULL), options);
            const fs::path test_path = out_dir / "test.json";
            write_file(test_path, lipreg::dataset_to_json_string(test.dataset) + "\n");
            manifest.add_output(test_path.string());
            summary["test"] = test_path.string();
            summary["test_n"] = gen_test_n;
        }
        emit(flags, summary.dump(2), std::nullopt);
        manifest.finish((out_dir / "manifest.json").string());
        return 0;
    }

    if (smooth_cmd->parsed()) {
        ManifestWriter manifest("smooth", flags);
        manifest.parameters()["input"] = smooth_input;
        manifest.parameters()["lipschitz"] = smooth_L;
        manifest.parameters()["graph"] = smooth_graph;
        manifest.parameters()["phi0"] = smooth_phi0;
        manifest.parameters()["c1"] = lipreg::SmoothingOptions{}.c1;
        manifest.parameters()["c2"] = lipreg::SmoothingOptions{}.c2;
        manifest.add_input(smooth_input);

        lipreg::LabeledDataset data = lipreg::load_dataset(smooth_input);
        lipreg::GraphPolicy policy = lipreg::GraphPolicy::parse(smooth_graph);
        lipreg::ConstraintGraph graph = policy.build(data, lipreg::LipschitzBudget(smooth_L));
        if (!smooth_dump_graph.empty()) {
            write_file(smooth_dump_graph, graph.to_json_string() + "\n");
            manifest.add_output(smooth_dump_graph);
        }
        lipreg::SmoothingOptions options;
        options.epsilon = flags.epsilon;
        lipreg::SmoothingResult result =
            smooth_phi0 > 0.0 ? lipreg::smooth(data, graph, smooth_phi0, options)
                              : lipreg::smooth_auto(data, graph, options);

        lipreg::LabeledDataset smoothed =
            lipreg::LabeledDataset::create(data.inputs, result.smoothed_labels);
        write_file(smooth_output, lipreg::dataset_to_json_string(smoothed) + "\n");
        manifest.add_output(smooth_output);
        json report{{"distortion", result.distortion},
                    {"phi0", result.phi0_used},
                    {"max_edge_violation", result.max_edge_violation},
                    {"iterations", result.iterations},
                    {"feasible", result.feasible},
                    {"epsilon", result.epsilon},
                    {"lipschitz", smooth_L},
                    {"graph", policy.to_string()},
                    {"edges", graph.m()}};
        if (!smooth_report.empty()) {
            write_file(smooth_report, report.dump(2) + "\n");
            manifest.add_output(smooth_report);
        }
        emit(flags, report.dump(2), std::nullopt);
        manifest.finish("smooth_manifest.json");
        if (!result.feasible) {
            std::cerr << json{{"error", "smoothing did not reach feasibility"},
                              {"max_edge_violation", result.max_edge_violation}}
                             .dump()
                      << std::endl;
            return 1;
        }
        return 0;
    }

    if (predict->parsed()) {
        ManifestWriter manifest("predict", flags);
        manifest.parameters()["model"] = predict_model;
        manifest.parameters()["lipschitz"] = predict_L;
        manifest.parameters()["query"] = predict_query;
        manifest.parameters()["c1"] = lipreg::ExtensionOptions{}.c1;
        manifest.parameters()["c2"] = lipreg::ExtensionOptions{}.c2;
        manifest.add_input(predict_model);

        lipreg::LabeledDataset model = lipreg::load_dataset(predict_model);
        Eigen::MatrixXd queries = parse_queries(predict_query, model.a());
        lipreg::ExtensionOptions options;
        options.epsilon = flags.epsilon;
        json out = json::array();
        bool all_feasible = true;
        for (Eigen::Index q = 0; q < queries.rows(); ++q) {
            lipreg::ExtensionResult r = lipreg::extend_one_point(
                model, lipreg::LipschitzBudget(predict_L), queries.row(q).transpose(), options);
            all_feasible = all_feasible && r.feasible;
            out.push_back(extension_report(r));
        }
        const json payload = queries.rows() == 1 ? out[0] : out;
        emit(flags, payload.dump(2),
             predict_output.empty() ? std::nullopt : std::optional<fs::path>(predict_output));
        if (!predict_output.empty()) manifest.add_output(predict_output);
        manifest.finish("predict_manifest.json");
        if (!all_feasible) {
            std::cerr << json{{"error", "a query exceeded the relaxed slack bound; smooth the "
                                        "labels first or raise the budget"}}
                             .dump()
                      << std::endl;
            return 1;
        }
        return 0;
    }

    if (tune->parsed()) {
        ManifestWriter manifest("tune", flags);
        manifest.parameters()["input"] = tune_input;
        manifest.parameters()["method"] = tune_method;
        manifest.parameters()["graph"] = tune_graph;
        manifest.parameters()["folds"] = tune_folds;
        manifest.parameters()["bound_constant"] = tune_C;
        manifest.add_input(tune_input);

        lipreg::LabeledDataset data = lipreg::load_dataset(tune_input);
        lipreg::GraphPolicy policy = lipreg::GraphPolicy::parse(tune_graph);
        std::vector<double> candidates = tune_candidates.empty()
                                             ? lipreg::default_candidate_grid(data, policy)
                                             : parse_number_list(tune_candidates);
        manifest.parameters()["candidates"] = candidates;
        lipreg::SmoothingOptions smoothing;
        smoothing.epsilon = flags.epsilon;

        json out;
        std::string csv = "L,risk,bound,objective\n";
        if (tune_method == "srm") {
            lipreg::SrmProfile profile =
                lipreg::srm_select(data, candidates, policy, smoothing, tune_C);
            out["method"] = "srm";
            out["chosen_L"] = profile.chosen_L;
            json rows = json::array();
            char buf[160];
            for (size_t i = 0; i < profile.candidate_Ls.size(); ++i) {
                rows.push_back({{"L", profile.candidate_Ls[i]},
                                {"risk", profile.empirical_risks[i]},
                                {"bound", profile.bounds[i]},
                                {"objective", profile.objectives[i]},
                                {"failed", static_cast<bool>(profile.failed[i])}});
                std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n",
                              profile.candidate_Ls[i], profile.empirical_risks[i],
                              profile.bounds[i], profile.objectives[i]);
                csv += buf;
            }
            out["candidates"] = std::move(rows);
        } else if (tune_method == "cv") {
            lipreg::CvProfile profile =
                lipreg::cross_validate(data, candidates, tune_folds, policy, smoothing, flags.seed);
            out["method"] = "cv";
            out["chosen_L"] = profile.chosen_L;
            json rows = json::array();
            csv = "L,mean_squared_loss\n";
            char buf[80];
            for (size_t i = 0; i < profile.candidate_Ls.size(); ++i) {
                rows.push_back({{"L", profile.candidate_Ls[i]},
                                {"mean_squared_loss", profile.mean_losses[i]},
                                {"per_fold", profile.per_fold_losses[i]},
                                {"failed", static_cast<bool>(profile.failed[i])}});
                std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", profile.candidate_Ls[i],
                              profile.mean_losses[i]);
                csv += buf;
            }
            out["candidates"] = std::move(rows);
        } else {
            throw lipreg::ValidationError("unknown tune method '" + tune_method + "'");
        }
        emit(flags, out.dump(2),
             tune_output.empty() ? std::nullopt : std::optional<fs::path>(tune_output));
        if (!tune_output.empty()) manifest.add_output(tune_output);
        if (!tune_csv.empty()) {
            write_file(tune_csv, csv);
            manifest.add_output(tune_csv);
        }
        manifest.finish("tune_manifest.json");
        return 0;
    }

    if (baseline->parsed()) {
        ManifestWriter manifest("baseline-nw", flags);
        manifest.parameters()["train"] = nw_train;
        manifest.add_input(nw_train);

        lipreg::LabeledDataset train = lipreg::load_dataset(nw_train);
        double bandwidth = nw_bandwidth;
        if (!(bandwidth > 0.0)) {
            bandwidth = lipreg::nw_tune_bandwidth(
                train, std::min(nw_folds, train.n()),
                lipreg::nw_default_grid(train, nw_grid), flags.seed);
        }
        manifest.parameters()["bandwidth"] = bandwidth;
        lipreg::NwModel model = lipreg::make_nw_model(train, bandwidth);

        json out{{"bandwidth", bandwidth}};
        if (!nw_query.empty()) {
            Eigen::MatrixXd queries = parse_queries(nw_query, train.a());
            json predictions = json::array();
            for (Eigen::Index q = 0; q < queries.rows(); ++q) {
                Eigen::VectorXd y = lipreg::nw_predict(model, queries.row(q).transpose());
                predictions.push_back(std::vector<double>(y.begin(), y.end()));
            }
            out["predictions"] = queries.rows() == 1 ? predictions[0] : predictions;
        }
        if (!nw_test.empty()) {
            manifest.add_input(nw_test);
            lipreg::LabeledDataset test = lipreg::load_dataset(nw_test);
            Eigen::MatrixXd predictions(test.n(), train.b());
            for (int q = 0; q < test.n(); ++q)
                predictions.row(q) =
                    lipreg::nw_predict(model, test.inputs.row(q).transpose()).transpose();
            out["mean_squared_loss"] =
                lipreg::squared_loss(predictions, test.labels).empirical_risk;
        }
        if (nw_query.empty() && nw_test.empty())
            throw lipreg::ValidationError("baseline-nw needs --query or --test");
        emit(flags, out.dump(2),
             nw_output.empty() ? std::nullopt : std::optional<fs::path>(nw_output));
        if (!nw_output.empty()) manifest.add_output(nw_output);
        manifest.finish("baseline_nw_manifest.json");
        return 0;
    }

    if (evaluate->parsed()) {
        ManifestWriter manifest("evaluate", flags);
        manifest.parameters()["loss"] = eval_loss;
        manifest.add_input(eval_predictions);
        manifest.add_input(eval_truth);

        lipreg::LabeledDataset predictions = lipreg::load_dataset(eval_predictions);
        lipreg::LabeledDataset truth = lipreg::load_dataset(eval_truth);
        lipreg::RiskReport report;
        if (eval_loss == "squared")
            report = lipreg::squared_loss(predictions.labels, truth.labels);
        else if (eval_loss == "euclidean")
            report = lipreg::empirical_risk(predictions.labels, truth.labels);
        else
            throw lipreg::ValidationError("unknown loss '" + eval_loss + "'");
        json out{{"loss", eval_loss},
                 {"empirical_risk", report.empirical_risk},
                 {"per_point_losses", report.per_point_losses}};
        emit(flags, out.dump(2),
             eval_output.empty() ? std::nullopt : std::optional<fs::path>(eval_output));
        if (!eval_output.empty()) manifest.add_output(eval_output);
        manifest.finish("evaluate_manifest.json");
        return 0;
    }

    if (experiment->parsed()) {
        ManifestWriter manifest("experiment", flags);
        lipreg::ExperimentConfig config;
        config.train_sizes.clear();
        for (double v : parse_number_list(exp_sizes))
            config.train_sizes.push_back(static_cast<int>(v));
        config.test_size = exp_test_n;
        config.seed = flags.seed;
        config.epsilon = flags.epsilon;
        config.knn_k = exp_knn;
        config.lipschitz = exp_L;
        config.lipschitz_quantile = exp_quantile;
        config.gap_factor = exp_gap;
        config.nw_policy = exp_nw_policy;
        config.threads = flags.threads;
        manifest.parameters()["train_sizes"] = config.train_sizes;
        manifest.parameters()["test_n"] = exp_test_n;
        manifest.parameters()["knn"] = exp_knn;
        manifest.parameters()["lipschitz"] = exp_L;
        manifest.parameters()["quantile"] = exp_quantile;
        manifest.parameters()["gap"] = exp_gap;
        manifest.parameters()["nw_policy"] = exp_nw_policy;
        manifest.parameters()["c1"] = lipreg::SmoothingOptions{}.c1;
        manifest.parameters()["c2"] = lipreg::SmoothingOptions{}.c2;

        const fs::path out_dir(exp_out);
        lipreg::ExperimentResult result;
        try {
            result = lipreg::run_experiment(config);
        } catch (const std::exception& e) {
            // failed runs still leave a diagnostic manifest behind
            manifest.parameters()["error"] = e.what();
            manifest.finish((out_dir / "manifest.json").string());
            throw;
        }
        const std::string results_json = lipreg::experiment_results_json(config, result);
        write_file(out_dir / "results.json", results_json + "\n");
        write_file(out_dir / "results.csv", lipreg::experiment_results_csv(result));
        write_file(out_dir / "slack_histogram.csv",
                   lipreg::experiment_slack_histogram_csv(result));
        manifest.add_output((out_dir / "results.json").string());
        manifest.add_output((out_dir / "results.csv").string());
        manifest.add_output((out_dir / "slack_histogram.csv").string());
        if (flags.to_stdout) std::cout << results_json << std::endl;
        manifest.finish((out_dir / "manifest.json").string());
        return result.gap_ok && result.monotone_ok ? 0 : 1;
    }

    return 2;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const lipreg::SolverError& e) {
        std::cerr << json{{"error", e.what()}, {"residual", e.residual()}}.dump() << std::endl;
        return 1;
    } catch (const lipreg::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << std::endl;
        return 2;
    } catch (const lipreg::IoError& e) {
        std::cerr << "usage error: " << e.what() << std::endl;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", e.what()}}.dump() << std::endl;
        return 1;
    }
}
