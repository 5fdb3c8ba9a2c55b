#include "lipreg/extension.hpp"
#include "lipreg/errors.hpp"
#include "lipreg/rng.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace lipreg;

namespace {

LabeledDataset make_data(std::initializer_list<std::initializer_list<double>> xs,
                         std::initializer_list<std::initializer_list<double>> ys) {
    Eigen::MatrixXd X(static_cast<Eigen::Index>(xs.size()),
                      static_cast<Eigen::Index>(xs.begin()->size()));
    Eigen::MatrixXd Y(static_cast<Eigen::Index>(ys.size()),
                      static_cast<Eigen::Index>(ys.begin()->size()));
    Eigen::Index r = 0;
    for (const auto& row : xs) {
        Eigen::Index c = 0;
        for (double v : row) X(r, c++) = v;
        ++r;
    }
    r = 0;
    for (const auto& row : ys) {
        Eigen::Index c = 0;
        for (double v : row) Y(r, c++) = v;
        ++r;
    }
    return LabeledDataset::create(X, Y);
}

Eigen::VectorXd vec(std::initializer_list<double> values) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double value : values) v[i++] = value;
    return v;
}

} // namespace

TEST_CASE("query on a training point returns its label exactly") {
    LabeledDataset data = make_data({{0.0}, {2.0}, {5.0}}, {{1.0}, {3.0}, {-2.0}});
    ExtensionOptions options;
    options.epsilon = 0.1;
    ExtensionResult r = extend_one_point(data, LipschitzBudget(2.0), vec({2.0}), options);
    CHECK(r.anchored_exact);
    CHECK(r.y_star[0] == 3.0);
    CHECK(r.feasible);
    CHECK(r.slacks[1] == 0.0);
}

TEST_CASE("two opposing constraints force the midpoint") {
    LabeledDataset data = make_data({{0.0}, {2.0}}, {{0.0}, {2.0}});
    ExtensionOptions options;
    options.epsilon = 0.05;
    ExtensionResult r = extend_one_point(data, LipschitzBudget(1.0), vec({1.0}), options);
    CHECK(r.feasible);
    CHECK(r.y_star[0] >= 0.95);
    CHECK(r.y_star[0] <= 1.05);
    CHECK(r.max_slack <= 1.05);
}

TEST_CASE("planar lens instance lands near the midpoint") {
    LabeledDataset data = make_data({{0.0}, {2.0}}, {{0.0, 0.0}, {2.0, 0.0}});
    ExtensionOptions options;
    options.epsilon = 0.01;
    ExtensionResult r = extend_one_point(data, LipschitzBudget(1.0), vec({1.0}), options);
    CHECK((r.y_star - vec({1.0, 0.0})).norm() <= 0.05);
    CHECK(r.feasible);
}

TEST_CASE("labels violating the budget are reported with the worst slack") {
    LabeledDataset data = make_data({{0.0}, {1.0}}, {{0.0}, {10.0}});
    ExtensionOptions options;
    options.epsilon = 0.1;
    ExtensionResult r = extend_one_point(data, LipschitzBudget(1.0), vec({0.5}), options);
    CHECK_FALSE(r.feasible);
    CHECK(r.max_slack > 1.1);
}

TEST_CASE("iterate diagnostics stay within the analysis window on feasible instances") {
    Rng rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(4));
        const int a = 1 + static_cast<int>(rng.below(2));
        const int b = 1 + static_cast<int>(rng.below(2));
        LabeledDataset data = oracles::random_lipschitz_instance(rng, n, a, b, 1.5);
        Eigen::VectorXd x_star(a);
        for (int c = 0; c < a; ++c) x_star[c] = rng.uniform(0.0, 1.0);

        ExtensionOptions options;
        options.epsilon = 0.1;
        ExtensionResult r = extend_one_point(data, LipschitzBudget(1.5), x_star, options);
        if (r.anchored_exact) continue;
        CHECK(r.feasible);
        CHECK(r.min_h >= -2.0 - 1e-9);
        CHECK(r.max_h <= 1.0 + 1e-9);
        CHECK(r.min_oracle_value >= -1e-9);
    }
}

TEST_CASE("answer stays inside the anchor ball") {
    Rng rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        LabeledDataset data = oracles::random_lipschitz_instance(rng, 5, 2, 2, 2.0);
        Eigen::VectorXd x_star = vec({rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)});
        ExtensionOptions options;
        options.epsilon = 0.2;
        ExtensionResult r = extend_one_point(data, LipschitzBudget(2.0), x_star, options);
        const double anchor_dist =
            (data.inputs.row(r.anchor_index).transpose() - x_star).norm();
        const double ball =
            (r.y_star - data.labels.row(r.anchor_index).transpose()).norm();
        CHECK(ball <= 2.0 * anchor_dist * (1.0 + 1e-12));
    }
}

TEST_CASE("tight epsilon stays within the loose-epsilon slack bound") {
    LabeledDataset data = make_data({{0.0}, {1.0}, {3.0}}, {{0.0}, {0.9}, {2.5}});
    ExtensionOptions tight;
    tight.epsilon = 0.05;
    ExtensionResult r = extend_one_point(data, LipschitzBudget(1.0), vec({2.0}), tight);
    CHECK(r.feasible);
    CHECK(r.max_slack <= 1.25); // the bound the 0.25 run would have to meet
}

TEST_CASE("returned point is feasible for the grid-verified constraint set") {
    Rng rng(29);
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(4));
        LabeledDataset data = oracles::random_lipschitz_instance(rng, n, 2, 2, 1.0);
        Eigen::VectorXd x_star = vec({rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)});
        ExtensionOptions options;
        options.epsilon = 0.1;
        ExtensionResult r = extend_one_point(data, LipschitzBudget(1.0), x_star, options);
        if (r.anchored_exact) continue;
        CHECK(r.max_slack <= 1.1);
        // the exhaustive scan confirms a feasible point exists where the
        // solver claims one
        auto grid = oracles::grid_search_extension(data, 1.0, x_star, 5e-3);
        CHECK(grid.best_slack <= 1.0 + 0.05);
    }
}

TEST_CASE("identical inputs give bit-identical answers") {
    LabeledDataset data = make_data({{0.0}, {1.0}, {3.0}}, {{0.0}, {0.9}, {2.5}});
    ExtensionOptions options;
    options.epsilon = 0.07;
    ExtensionResult a = extend_one_point(data, LipschitzBudget(1.0), vec({2.0}), options);
    ExtensionResult b = extend_one_point(data, LipschitzBudget(1.0), vec({2.0}), options);
    CHECK(a.y_star == b.y_star);
    CHECK(a.iterations == b.iterations);
}

TEST_CASE("prediction is invariant to pre-scaling the inputs by the budget") {
    LabeledDataset data = make_data({{0.0}, {1.0}, {3.0}}, {{0.0}, {1.8}, {5.0}});
    const double L = 2.0;
    LabeledDataset scaled = LabeledDataset::create(data.inputs * L, data.labels);
    ExtensionOptions options;
    options.epsilon = 0.1;
    ExtensionResult raw = extend_one_point(data, LipschitzBudget(L), vec({2.0}), options);
    ExtensionResult normalized =
        extend_one_point(scaled, LipschitzBudget(1.0), vec({2.0 * L}), options);
    CHECK((raw.y_star - normalized.y_star).norm() <= 1e-12);
    CHECK(raw.iterations == normalized.iterations);
}

TEST_CASE("literal weight update also converges on the forced instance") {
    LabeledDataset data = make_data({{0.0}, {2.0}}, {{0.0}, {2.0}});
    ExtensionOptions options;
    options.epsilon = 0.05;
    options.literal_update = true;
    ExtensionResult r = extend_one_point(data, LipschitzBudget(1.0), vec({1.0}), options);
    CHECK(r.feasible);
    CHECK(r.y_star[0] == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("epsilon domain is validated") {
    LabeledDataset data = make_data({{0.0}}, {{0.0}});
    ExtensionOptions options;
    options.epsilon = 0.7;
    CHECK_THROWS_AS(extend_one_point(data, LipschitzBudget(1.0), vec({1.0}), options),
                    ValidationError);
    options.epsilon = 0.0;
    CHECK_THROWS_AS(extend_one_point(data, LipschitzBudget(1.0), vec({1.0}), options),
                    ValidationError);
}

TEST_CASE("multi-point extension resolves a forced chain") {
    // known 0 -> 0 and 3 -> 3; unknowns at x = 1, 2 chained between them
    LabeledDataset data = make_data({{0.0}, {3.0}}, {{0.0}, {3.0}});
    Eigen::MatrixXd new_points(2, 1);
    new_points << 1.0, 2.0;
    Eigen::MatrixXd all(4, 1);
    all << 0.0, 3.0, 1.0, 2.0;
    ConstraintGraph graph =
        graph_from_pairs(all, LipschitzBudget(1.0), {{0, 2}, {2, 3}, {3, 1}});
    ExtensionOptions options;
    options.epsilon = 0.05;
    MultiExtensionResult r = extend_multi(data, new_points, graph, options);
    CHECK(r.feasible);
    CHECK(r.labels(0, 0) == doctest::Approx(1.0).epsilon(0.06));
    CHECK(r.labels(1, 0) == doctest::Approx(2.0).epsilon(0.06));
    CHECK(r.max_slack <= 1.05);
}

TEST_CASE("multi-point extension agrees with the one-point solver") {
    LabeledDataset data = make_data({{0.0}, {2.0}}, {{0.0}, {2.0}});
    Eigen::MatrixXd new_points(1, 1);
    new_points << 1.0;
    const double eps = 0.05;
    ConstraintGraph graph = knn_extension_graph(data, new_points, LipschitzBudget(1.0), 2);
    ExtensionOptions options;
    options.epsilon = eps;
    MultiExtensionResult multi = extend_multi(data, new_points, graph, options);
    ExtensionResult single = extend_one_point(data, LipschitzBudget(1.0), vec({1.0}), options);
    CHECK(std::abs(multi.labels(0, 0) - single.y_star[0]) <= 2.0 * eps);
}

TEST_CASE("multi-point extension validates its graph") {
    LabeledDataset data = make_data({{0.0}, {3.0}}, {{0.0}, {3.0}});
    Eigen::MatrixXd new_points(2, 1);
    new_points << 1.0, 2.0;
    Eigen::MatrixXd all(4, 1);
    all << 0.0, 3.0, 1.0, 2.0;
    ExtensionOptions options;
    options.epsilon = 0.1;

    ConstraintGraph labeled_pair =
        graph_from_pairs(all, LipschitzBudget(1.0), {{0, 1}, {0, 2}, {1, 3}});
    CHECK_THROWS_AS(extend_multi(data, new_points, labeled_pair, options), ValidationError);

    ConstraintGraph orphan = graph_from_pairs(all, LipschitzBudget(1.0), {{0, 2}});
    CHECK_THROWS_AS(extend_multi(data, new_points, orphan, options), ValidationError);

    // a new point duplicating a training input would need a zero-radius edge
    Eigen::MatrixXd dup(3, 1);
    dup << 0.0, 3.0, 0.0;
    CHECK_THROWS_AS(graph_from_pairs(dup, LipschitzBudget(1.0), {{0, 2}}), ValidationError);
    Eigen::MatrixXd coincident(1, 1);
    coincident << 0.0;
    CHECK_THROWS_AS(knn_extension_graph(data, coincident, LipschitzBudget(1.0), 1),
                    ValidationError);
}

TEST_CASE("multi-point extension labels a planar patch feasibly") {
    Rng rng(31);
    LabeledDataset data = oracles::random_lipschitz_instance(rng, 12, 2, 2, 1.2);
    Eigen::MatrixXd new_points(3, 2);
    for (int q = 0; q < 3; ++q)
        for (int c = 0; c < 2; ++c) new_points(q, c) = rng.uniform(0.2, 0.8);
    ConstraintGraph graph = knn_extension_graph(data, new_points, LipschitzBudget(1.2), 5);
    ExtensionOptions options;
    options.epsilon = 0.1;
    MultiExtensionResult r = extend_multi(data, new_points, graph, options);
    CHECK(r.feasible);
    CHECK(r.max_slack <= 1.1);
    CHECK(r.min_oracle_value >= -1e-9);
    CHECK(static_cast<int>(r.slacks.size()) == graph.m());
}
