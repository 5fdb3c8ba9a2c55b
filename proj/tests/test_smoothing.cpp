#include "lipreg/smoothing.hpp"
#include "lipreg/errors.hpp"
#include "lipreg/extension.hpp"
#include "lipreg/rng.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace lipreg;

namespace {

LabeledDataset line_instance(std::initializer_list<double> xs, std::initializer_list<double> ys) {
    Eigen::MatrixXd X(static_cast<Eigen::Index>(xs.size()), 1);
    Eigen::MatrixXd Y(static_cast<Eigen::Index>(ys.size()), 1);
    Eigen::Index r = 0;
    for (double v : xs) X(r++, 0) = v;
    r = 0;
    for (double v : ys) Y(r++, 0) = v;
    return LabeledDataset::create(X, Y);
}

LabeledDataset spike_instance() { return line_instance({0.0, 1.0, 2.0}, {0.0, 10.0, 0.0}); }

} // namespace

TEST_CASE("feasibility check measures the worst edge ratio") {
    LabeledDataset flat = line_instance({0.0, 1.0}, {0.0, 0.5});
    ConstraintGraph g = complete_graph(flat, LipschitzBudget(1.0));
    CHECK(feasibility_check(flat, g) == doctest::Approx(0.5));

    LabeledDataset steep = line_instance({0.0, 1.0}, {0.0, 10.0});
    CHECK(feasibility_check(steep, complete_graph(steep, LipschitzBudget(1.0))) ==
          doctest::Approx(10.0));

    LabeledDataset single = line_instance({0.0}, {4.0});
    CHECK(feasibility_check(single, complete_graph(single, LipschitzBudget(1.0))) == 0.0);
}

TEST_CASE("already-feasible labels are returned unchanged") {
    LabeledDataset data = line_instance({0.0, 1.0, 2.0}, {0.0, 0.5, 1.0});
    ConstraintGraph g = complete_graph(data, LipschitzBudget(1.0));
    SmoothingOptions options;
    options.epsilon = 0.1;
    SmoothingResult r = smooth_auto(data, g, options);
    CHECK(r.feasible);
    CHECK(r.distortion == 0.0);
    CHECK(r.phi0_used == 0.0);
    CHECK(r.iterations == 0);
    CHECK(r.smoothed_labels == data.labels);

    // a generous budget also leaves the spike alone
    ConstraintGraph loose = complete_graph(spike_instance(), LipschitzBudget(100.0));
    SmoothingResult spike = smooth_auto(spike_instance(), loose, options);
    CHECK(spike.distortion == 0.0);
}

TEST_CASE("spike instance smooths to the hand-derived optimum") {
    LabeledDataset data = spike_instance();
    ConstraintGraph g = complete_graph(data, LipschitzBudget(1.0));
    SmoothingOptions options;
    options.epsilon = 0.02;
    SmoothingResult r = smooth_auto(data, g, options);
    CHECK(r.feasible);
    CHECK(r.max_edge_violation <= 1.02);
    CHECK(r.distortion <= 1.02 * 1.02 * 54.0 + 1e-6);
    CHECK(std::abs(r.smoothed_labels(0, 0) - 3.0) <= 0.1);
    CHECK(std::abs(r.smoothed_labels(1, 0) - 4.0) <= 0.1);
    CHECK(std::abs(r.smoothed_labels(2, 0) - 3.0) <= 0.1);
    // phi0 lands within the bisection's relaxed acceptance band around 54
    CHECK(r.phi0_used <= 54.0 * 1.02);
    CHECK(r.phi0_used >= 40.5 * 0.99);
}

TEST_CASE("single-edge instance meets the derived distortion bound") {
    LabeledDataset data = line_instance({0.0, 1.0}, {0.0, 10.0});
    ConstraintGraph g = complete_graph(data, LipschitzBudget(1.0));
    SmoothingOptions options;
    options.epsilon = 0.1;
    SmoothingResult r = smooth_auto(data, g, options);
    CHECK(r.feasible);
    CHECK(r.distortion <= 40.5 * 1.1 * 1.1 + 1e-6);
    CHECK(r.max_edge_violation <= 1.1);
    // perturbation splits symmetrically across the edge
    CHECK(r.smoothed_labels(0, 0) + r.smoothed_labels(1, 0) == doctest::Approx(10.0).epsilon(1e-6));
}

TEST_CASE("direct smoothing with a valid bracket satisfies the contract") {
    LabeledDataset data = spike_instance();
    ConstraintGraph g = complete_graph(data, LipschitzBudget(1.0));
    SmoothingOptions options;
    options.epsilon = 0.1;
    SmoothingResult r = smooth(data, g, 54.0, options);
    CHECK(r.feasible);
    CHECK_FALSE(r.infeasibility_certified);
    CHECK(r.distortion <= 1.1 * 1.1 * 54.0);
    CHECK(r.max_edge_violation <= 1.1);
    CHECK(r.min_oracle_value >= -options.epsilon - 1e-9);
}

TEST_CASE("a hopeless bracket is certified infeasible") {
    LabeledDataset data = spike_instance();
    ConstraintGraph g = complete_graph(data, LipschitzBudget(1.0));
    SmoothingOptions options;
    options.epsilon = 0.1;
    SmoothingResult r = smooth(data, g, 1.0, options);
    CHECK_FALSE(r.feasible);
    CHECK(r.infeasibility_certified);
    SmoothingResult zero = smooth(data, g, 0.0, options);
    CHECK_FALSE(zero.feasible);
}

TEST_CASE("oracle step meets the weighted-average certificate") {
    LabeledDataset data = spike_instance();
    ConstraintGraph g = complete_graph(data, LipschitzBudget(1.0));
    const int m = g.m();
    const double eps = 0.1;
    const double phi0 = 60.0; // above the optimum 54: the instance is feasible

    auto certificate = [&](const SmoothingWeights& weights) {
        Eigen::MatrixXd V = oracle_step(g, data.labels, weights, phi0, eps);
        double value = weights.w_phi * (1.0 - std::sqrt((data.labels - V).squaredNorm() / phi0));
        double min_h = 1.0;
        for (int e = 0; e < m; ++e) {
            const auto& edge = g.edges[static_cast<size_t>(e)];
            const double h = 1.0 - (V.row(edge.i) - V.row(edge.j)).norm() / edge.radius;
            value += weights.w_edge[e] * h;
            min_h = std::min(min_h, h);
        }
        return std::make_pair(value, min_h);
    };

    SmoothingWeights uniform{1.0 / (m + 1), Eigen::VectorXd::Constant(m, 1.0 / (m + 1))};
    auto [uniform_value, uniform_min_h] = certificate(uniform);
    CHECK(uniform_value >= -eps);

    // adversarial mass on a single edge
    SmoothingWeights skewed{1e-6, Eigen::VectorXd::Zero(m)};
    skewed.w_edge[0] = 1.0 - 1e-6;
    auto [skewed_value, skewed_min_h] = certificate(skewed);
    CHECK(skewed_value >= -eps);

    // width bound from the certificate chain
    const double width_cap = 2.0 * std::sqrt((m + 1) / eps);
    CHECK(-uniform_min_h <= width_cap);
    CHECK(-skewed_min_h <= width_cap);
}

TEST_CASE("oracle step validates its weights") {
    LabeledDataset data = spike_instance();
    ConstraintGraph g = complete_graph(data, LipschitzBudget(1.0));
    SmoothingWeights bad{0.5, Eigen::VectorXd::Constant(g.m(), 0.5)};
    CHECK_THROWS_AS(oracle_step(g, data.labels, bad, 10.0, 0.1), ValidationError);
}

TEST_CASE("per-iteration certificates hold across feasible runs") {
    Rng rng(31);
    for (int trial = 0; trial < 6; ++trial) {
        const int n = 3 + static_cast<int>(rng.below(4));
        const int b = 1 + static_cast<int>(rng.below(2));
        Eigen::MatrixXd X(n, 1), Y(n, b);
        for (int r = 0; r < n; ++r) {
            X(r, 0) = r;
            for (int c = 0; c < b; ++c) Y(r, c) = rng.uniform(-4.0, 4.0);
        }
        LabeledDataset data = LabeledDataset::create(X, Y);
        ConstraintGraph g = complete_graph(data, LipschitzBudget(1.0));
        SmoothingOptions options;
        options.epsilon = 0.1;
        SmoothingResult r = smooth_auto(data, g, options);
        CHECK(r.feasible);
        if (r.iterations == 0) continue;
        CHECK(r.min_oracle_value >= -options.epsilon - 1e-9);
        const double width_cap = 2.0 * std::sqrt((g.m() + 1) / options.epsilon);
        CHECK(-r.min_h_phi <= width_cap);
        CHECK(-r.min_h_edge <= width_cap);
    }
}

TEST_CASE("distortion tracks the brute-force optimum on small instances") {
    Rng rng(37);
    for (int trial = 0; trial < 6; ++trial) {
        const int n = 3 + static_cast<int>(rng.below(4));
        const int b = 1 + static_cast<int>(rng.below(2));
        Eigen::MatrixXd X(n, 2), Y(n, b);
        for (int r = 0; r < n; ++r) {
            X(r, 0) = r;
            X(r, 1) = rng.uniform(0.0, 0.5);
            for (int c = 0; c < b; ++c) Y(r, c) = rng.uniform(-3.0, 3.0);
        }
        LabeledDataset data = LabeledDataset::create(X, Y);
        ConstraintGraph g = complete_graph(data, LipschitzBudget(0.8));
        SmoothingOptions options;
        options.epsilon = 0.1;
        SmoothingResult r = smooth_auto(data, g, options);
        CHECK(r.feasible);
        const double optimum = oracles::qcqp_optimal_distortion(data.labels, g);
        CHECK(r.distortion <= (1.1 * 1.1) * optimum + 1e-6);
    }
}

TEST_CASE("smoothing is deterministic") {
    LabeledDataset data = spike_instance();
    ConstraintGraph g = complete_graph(data, LipschitzBudget(1.0));
    SmoothingOptions options;
    options.epsilon = 0.05;
    SmoothingResult a = smooth_auto(data, g, options);
    SmoothingResult b = smooth_auto(data, g, options);
    CHECK(a.smoothed_labels == b.smoothed_labels);
    CHECK(a.phi0_used == b.phi0_used);
    CHECK(a.iterations == b.iterations);
}

TEST_CASE("averaging feasible-on-average iterates keeps the relaxed constraints") {
    // concavity of the constraint functions: the average of the returned
    // iterates can only improve on their mean constraint values
    LabeledDataset data = spike_instance();
    ConstraintGraph g = complete_graph(data, LipschitzBudget(1.0));
    const double eps = 0.1, phi0 = 60.0;
    const int m = g.m();
    SmoothingWeights weights{1.0 / (m + 1), Eigen::VectorXd::Constant(m, 1.0 / (m + 1))};
    Eigen::MatrixXd first = oracle_step(g, data.labels, weights, phi0, eps);
    SmoothingWeights skew{0.5, Eigen::VectorXd::Constant(m, 0.5 / m)};
    Eigen::MatrixXd second = oracle_step(g, data.labels, skew, phi0, eps);
    Eigen::MatrixXd average = 0.5 * (first + second);

    auto h_phi = [&](const Eigen::MatrixXd& V) {
        return 1.0 - std::sqrt((data.labels - V).squaredNorm() / phi0);
    };
    auto h_edge = [&](const Eigen::MatrixXd& V, int e) {
        const auto& edge = g.edges[static_cast<size_t>(e)];
        return 1.0 - (V.row(edge.i) - V.row(edge.j)).norm() / edge.radius;
    };
    CHECK(h_phi(average) >= 0.5 * (h_phi(first) + h_phi(second)) - 1e-12);
    for (int e = 0; e < m; ++e)
        CHECK(h_edge(average, e) >= 0.5 * (h_edge(first, e) + h_edge(second, e)) - 1e-12);
}

TEST_CASE("reference quadratic-penalty oracle reproduces hand-derived optima") {
    // keeps the oracle honest before it is used to judge the solver
    LabeledDataset spike = spike_instance();
    ConstraintGraph g3 = complete_graph(spike, LipschitzBudget(1.0));
    CHECK(oracles::qcqp_optimal_distortion(spike.labels, g3) == doctest::Approx(54.0).epsilon(1e-4));

    LabeledDataset pair = line_instance({0.0, 1.0}, {0.0, 10.0});
    ConstraintGraph g2 = complete_graph(pair, LipschitzBudget(1.0));
    CHECK(oracles::qcqp_optimal_distortion(pair.labels, g2) == doctest::Approx(40.5).epsilon(1e-4));
}
