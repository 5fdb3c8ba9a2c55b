#include "lipreg/extension.hpp"

#include "lipreg/errors.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <queue>

namespace lipreg {

namespace {

constexpr double kCoincidentDistance = 1e-12;

void check_epsilon(double epsilon) {
    if (!(epsilon > 0.0) || !(epsilon < 0.5))
        throw ValidationError("epsilon must lie in (0, 1/2), got " + std::to_string(epsilon));
}

} // namespace

ExtensionResult extend_one_point(const LabeledDataset& dataset, LipschitzBudget L,
                                 const Eigen::VectorXd& x_star, const ExtensionOptions& options) {
    check_epsilon(options.epsilon);
    if (x_star.size() != dataset.a())
        throw ValidationError("query dimension " + std::to_string(x_star.size()) +
                              " does not match input dimension " + std::to_string(dataset.a()));

    const int n = dataset.n();
    const double eps = options.epsilon;

    ExtensionResult result;
    result.epsilon = eps;
    result.slacks.assign(static_cast<size_t>(n), 0.0);
    result.min_h = 1.0;
    result.max_h = -2.0;
    result.min_oracle_value = 1.0;

    // Constraint radii R_i = L ||x* - x_i|| and the nearest-neighbor anchor.
    Eigen::VectorXd radius(n);
    int anchor = 0;
    double anchor_dist = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double d = (dataset.inputs.row(i).transpose() - x_star).norm();
        radius[i] = L.value() * d;
        if (d < anchor_dist) {
            anchor_dist = d;
            anchor = i;
        }
    }
    result.anchor_index = anchor;
    const Eigen::VectorXd y_anchor = dataset.labels.row(anchor).transpose();
    const double anchor_radius = radius[anchor];

    // Coincident query: the label is known exactly.
    if (anchor_radius < kCoincidentDistance * L.value()) {
        result.y_star = y_anchor;
        result.anchored_exact = true;
        result.feasible = true;
        for (int i = 0; i < n; ++i)
            result.slacks[static_cast<size_t>(i)] =
                i == anchor ? 0.0 : (result.y_star - dataset.labels.row(i).transpose()).norm() / radius[i];
        result.max_slack = *std::max_element(result.slacks.begin(), result.slacks.end());
        return result;
    }

    const int iteration_cap =
        std::max(1, static_cast<int>(std::ceil(16.0 * std::log(std::max(n, 2)) / (eps * eps))));

    Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / n);
    Eigen::VectorXd z(dataset.b()), z_sum = Eigen::VectorXd::Zero(dataset.b());
    Eigen::VectorXd slack(n);

    auto max_slack_of = [&](const Eigen::VectorXd& point) {
        double worst = 0.0;
        for (int i = 0; i < n; ++i)
            worst = std::max(worst,
                             (point - dataset.labels.row(i).transpose()).norm() / radius[i]);
        return worst;
    };

    int t = 0;
    while (t < iteration_cap) {
        ++t;
        // Oracle: minimize sum p_i ||z - y_i||^2 over the ball around the
        // anchor label, p_i proportional to w_i / R_i^2. The unconstrained
        // minimizer is the weighted centroid; outside the ball it is pulled
        // back radially.
        double p_total = 0.0;
        z.setZero();
        for (int i = 0; i < n; ++i) {
            const double p = w[i] / (radius[i] * radius[i]);
            p_total += p;
            z += p * dataset.labels.row(i).transpose();
        }
        z /= p_total;
        const double delta = (z - y_anchor).norm();
        if (delta > anchor_radius)
            z = (anchor_radius / delta) * z + (1.0 - anchor_radius / delta) * y_anchor;

        double oracle_value = 0.0;
        for (int i = 0; i < n; ++i) {
            slack[i] = (z - dataset.labels.row(i).transpose()).norm() / radius[i];
            const double h = 1.0 - slack[i];
            oracle_value += w[i] * h;
            result.min_h = std::min(result.min_h, h);
            result.max_h = std::max(result.max_h, h);
        }
        result.min_oracle_value = std::min(result.min_oracle_value, oracle_value);

        for (int i = 0; i < n; ++i) {
            const double step = options.literal_update ? slack[i] : slack[i] - 1.0;
            w[i] *= 1.0 + (eps / 8.0) * step;
        }
        w /= w.sum();
        assert(w.minCoeff() > 0.0 && std::abs(w.sum() - 1.0) <= 1e-12);

        z_sum += z;
        if (options.early_exit && (t % std::max(1, options.check_period) == 0) &&
            max_slack_of(z_sum / t) <= 1.0 + eps)
            break;
    }

    result.iterations = t;
    result.y_star = z_sum / t;
    for (int i = 0; i < n; ++i)
        result.slacks[static_cast<size_t>(i)] =
            (result.y_star - dataset.labels.row(i).transpose()).norm() / radius[i];
    result.max_slack = *std::max_element(result.slacks.begin(), result.slacks.end());
    result.feasible = result.max_slack <= 1.0 + eps;
    return result;
}

MultiExtensionResult extend_multi(const LabeledDataset& dataset, const Eigen::MatrixXd& new_points,
                                  const ConstraintGraph& joint_graph,
                                  const ExtensionOptions& options) {
    check_epsilon(options.epsilon);
    const int n = dataset.n();
    const int n_new = static_cast<int>(new_points.rows());
    const int total = n + n_new;
    if (new_points.cols() != dataset.a())
        throw ValidationError("new point dimension does not match dataset");
    if (joint_graph.n != total)
        throw ValidationError("joint graph must span training plus new vertices");
    if (n_new < 1)
        throw ValidationError("no new points to label");
    const int m = joint_graph.m();
    if (m < 1)
        throw ValidationError("joint graph has no constraints");

    // No constraints between two training vertices; every new vertex must
    // reach a training vertex through the edge set.
    std::vector<std::vector<int>> adj(static_cast<size_t>(total));
    for (const auto& e : joint_graph.edges) {
        if (e.i < n && e.j < n)
            throw ValidationError("edge (" + std::to_string(e.i) + "," + std::to_string(e.j) +
                                  ") joins two labeled vertices");
        adj[static_cast<size_t>(e.i)].push_back(e.j);
        adj[static_cast<size_t>(e.j)].push_back(e.i);
    }
    {
        std::vector<bool> reach(static_cast<size_t>(total), false);
        std::queue<int> frontier;
        for (int v = 0; v < n; ++v) {
            reach[static_cast<size_t>(v)] = true;
            frontier.push(v);
        }
        while (!frontier.empty()) {
            int u = frontier.front();
            frontier.pop();
            for (int v : adj[static_cast<size_t>(u)])
                if (!reach[static_cast<size_t>(v)]) {
                    reach[static_cast<size_t>(v)] = true;
                    frontier.push(v);
                }
        }
        for (int v = n; v < total; ++v)
            if (!reach[static_cast<size_t>(v)])
                throw ValidationError("new vertex " + std::to_string(v - n) +
                                      " is not connected to any labeled vertex");
    }

    const double eps = options.epsilon;
    const int b = dataset.b();
    const int iteration_cap = std::max(
        1, static_cast<int>(options.c1 * std::ceil(std::sqrt(static_cast<double>(m)) *
                                                   std::log(std::max(total, 2)) / (eps * eps))));

    MultiExtensionResult result;
    result.epsilon = eps;
    result.min_h = 1.0;
    result.min_oracle_value = 1.0;

    Eigen::VectorXd w = Eigen::VectorXd::Constant(m, 1.0 / m);
    Eigen::VectorXd mu(m);
    Eigen::MatrixXd iterate = Eigen::MatrixXd::Zero(n_new, b);
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n_new, b);
    LaplaceOptions laplace_options;
    laplace_options.tol = options.laplace_tol;

    auto vertex_value = [&](const Eigen::MatrixXd& free_values, int v) -> Eigen::RowVectorXd {
        return v < n ? Eigen::RowVectorXd(dataset.labels.row(v))
                     : Eigen::RowVectorXd(free_values.row(v - n));
    };
    auto max_slack_of = [&](const Eigen::MatrixXd& free_values) {
        double worst = 0.0;
        for (const auto& e : joint_graph.edges)
            worst = std::max(worst, (vertex_value(free_values, e.i) - vertex_value(free_values, e.j))
                                            .norm() /
                                        e.radius);
        return worst;
    };

    bool warm = false;
    int t = 0;
    while (t < iteration_cap) {
        ++t;
        for (int e = 0; e < m; ++e) {
            const double r = joint_graph.edges[static_cast<size_t>(e)].radius;
            mu[e] = (w[e] + eps / m) / (r * r);
        }
        iterate = solve_dirichlet(joint_graph, n, dataset.labels, mu, laplace_options,
                                  warm ? &iterate : nullptr);
        warm = true;

        double oracle_value = 0.0;
        for (int e = 0; e < m; ++e) {
            const auto& edge = joint_graph.edges[static_cast<size_t>(e)];
            const double slack =
                (vertex_value(iterate, edge.i) - vertex_value(iterate, edge.j)).norm() /
                edge.radius;
            const double h = 1.0 - slack;
            oracle_value += w[e] * h;
            result.min_h = std::min(result.min_h, h);
            w[e] *= 1.0 + options.c2 * eps * (slack - 1.0);
        }
        result.min_oracle_value = std::min(result.min_oracle_value, oracle_value);
        w /= w.sum();
        assert(w.minCoeff() > 0.0 && std::abs(w.sum() - 1.0) <= 1e-12);

        sum += iterate;
        if (options.early_exit && (t % std::max(1, options.check_period) == 0) &&
            max_slack_of(sum / t) <= 1.0 + eps)
            break;
    }

    result.iterations = t;
    result.labels = sum / t;
    result.slacks.reserve(static_cast<size_t>(m));
    for (const auto& e : joint_graph.edges)
        result.slacks.push_back(
            (vertex_value(result.labels, e.i) - vertex_value(result.labels, e.j)).norm() /
            e.radius);
    result.max_slack = *std::max_element(result.slacks.begin(), result.slacks.end());
    result.feasible = result.max_slack <= 1.0 + eps;
    return result;
}

ConstraintGraph knn_extension_graph(const LabeledDataset& dataset,
                                    const Eigen::MatrixXd& new_points, LipschitzBudget L, int k) {
    const int n = dataset.n();
    const int n_new = static_cast<int>(new_points.rows());
    if (k < 1 || k > n)
        throw ValidationError("extension graph requires 1 <= k <= n");
    if (new_points.cols() != dataset.a())
        throw ValidationError("new point dimension does not match dataset");

    ConstraintGraph g;
    g.n = n + n_new;
    g.lipschitz = L.value();
    std::vector<std::pair<double, int>> dists(static_cast<size_t>(n));
    for (int q = 0; q < n_new; ++q) {
        for (int i = 0; i < n; ++i)
            dists[static_cast<size_t>(i)] = {(dataset.inputs.row(i) - new_points.row(q)).norm(), i};
        std::sort(dists.begin(), dists.end());
        for (int r = 0; r < k; ++r) {
            const auto& [dist, i] = dists[static_cast<size_t>(r)];
            if (dist <= 0.0)
                throw ValidationError("new point " + std::to_string(q) +
                                      " coincides with training point " + std::to_string(i));
            g.edges.push_back({i, n + q, dist, L.value() * dist});
        }
    }
    return g;
}

ConstraintGraph graph_from_pairs(const Eigen::MatrixXd& points, LipschitzBudget L,
                                 const std::vector<std::pair<int, int>>& pairs) {
    ConstraintGraph g;
    g.n = static_cast<int>(points.rows());
    g.lipschitz = L.value();
    for (auto [i, j] : pairs) {
        if (i == j || i < 0 || j < 0 || i >= g.n || j >= g.n)
            throw ValidationError("bad edge (" + std::to_string(i) + "," + std::to_string(j) + ")");
        if (i > j) std::swap(i, j);
        const double dist = (points.row(i) - points.row(j)).norm();
        if (dist <= 0.0)
            throw ValidationError("zero-length constraint edge between points " +
                                  std::to_string(i) + " and " + std::to_string(j));
        g.edges.push_back({i, j, dist, L.value() * dist});
    }
    return g;
}

} // namespace lipreg
