#include "lipreg/smoothing.hpp"

#include "lipreg/errors.hpp"
#include "lipreg/laplace.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

namespace lipreg {

namespace {

void check_inputs(const LabeledDataset& dataset, const ConstraintGraph& graph, double epsilon) {
    if (graph.n != dataset.n())
        throw ValidationError("graph vertex count does not match dataset");
    if (!(epsilon > 0.0) || !(epsilon < 0.5))
        throw ValidationError("epsilon must lie in (0, 1/2), got " + std::to_string(epsilon));
}

double max_violation(const Eigen::MatrixXd& labels, const ConstraintGraph& graph) {
    double worst = 0.0;
    for (const auto& e : graph.edges)
        worst = std::max(worst, (labels.row(e.i) - labels.row(e.j)).norm() / e.radius);
    return worst;
}

SmoothingResult identity_result(const LabeledDataset& dataset, const ConstraintGraph& graph,
                                double epsilon) {
    SmoothingResult r;
    r.smoothed_labels = dataset.labels;
    r.distortion = 0.0;
    r.phi0_used = 0.0;
    r.max_edge_violation = max_violation(dataset.labels, graph);
    r.iterations = 0;
    r.epsilon = epsilon;
    r.feasible = true;
    r.min_oracle_value = 1.0;
    r.min_h_phi = 1.0;
    r.min_h_edge = 1.0;
    return r;
}

} // namespace

double feasibility_check(const LabeledDataset& dataset, const ConstraintGraph& graph) {
    if (graph.n != dataset.n())
        throw ValidationError("graph vertex count does not match dataset");
    return max_violation(dataset.labels, graph);
}

Eigen::MatrixXd oracle_step(const ConstraintGraph& graph, const Eigen::MatrixXd& Y,
                            const SmoothingWeights& weights, double phi0, double epsilon,
                            double laplace_tol) {
    const int m = graph.m();
    if (weights.w_edge.size() != m)
        throw ValidationError("weight count does not match edge count");
    const double total = weights.w_phi + weights.w_edge.sum();
    if (std::abs(total - 1.0) > 1e-9)
        throw ValidationError("constraint weights must sum to 1, got " + std::to_string(total));
    if (!(phi0 > 0.0))
        throw ValidationError("phi0 must be positive in the oracle step");

    const double pad = epsilon / (m + 1);
    const double lambda = (weights.w_phi + pad) / phi0;
    Eigen::VectorXd mu(m);
    for (int e = 0; e < m; ++e) {
        const double r = graph.edges[static_cast<size_t>(e)].radius;
        mu[e] = (weights.w_edge[e] + pad) / (r * r);
    }
    LaplaceOptions options;
    options.tol = laplace_tol;
    return solve_laplace(graph, Y, Eigen::VectorXd::Constant(graph.n, lambda), mu, options);
}

SmoothingResult smooth(const LabeledDataset& dataset, const ConstraintGraph& graph, double phi0,
                       const SmoothingOptions& options) {
    check_inputs(dataset, graph, options.epsilon);
    const double eps = options.epsilon;
    const int m = graph.m();
    const int n = dataset.n();
    const Eigen::MatrixXd& Y = dataset.labels;

    // Already-feasible labels need no smoothing; this also removes the
    // lambda = (w_phi + ...) / phi0 singularity at phi0 = 0.
    if (feasibility_check(dataset, graph) <= 1.0)
        return identity_result(dataset, graph, eps);
    if (!(phi0 > 0.0)) {
        SmoothingResult r = identity_result(dataset, graph, eps);
        r.feasible = false;
        r.infeasibility_certified = true; // positive distortion is required
        r.phi0_used = phi0;
        return r;
    }

    const double pad = eps / (m + 1);
    const int iteration_cap = std::max(
        1, static_cast<int>(options.c1 * std::ceil(std::sqrt(static_cast<double>(m)) *
                                                   std::log(std::max(n, 2)) / (eps * eps))));
    // A feasible instance keeps the oracle value above 1 - sqrt(1+eps); see
    // the certificate chain in the oracle analysis. Falling below certifies
    // that no labeling with distortion <= phi0 satisfies the constraints.
    const double certificate_threshold = 1.0 - std::sqrt(1.0 + eps) - 1e-7;

    SmoothingResult result;
    result.epsilon = eps;
    result.phi0_used = phi0;
    result.min_oracle_value = 1.0;
    result.min_h_phi = 1.0;
    result.min_h_edge = 1.0;

    double w_phi = 1.0 / (m + 1);
    Eigen::VectorXd w_edge = Eigen::VectorXd::Constant(m, 1.0 / (m + 1));
    Eigen::VectorXd mu(m);
    Eigen::MatrixXd iterate;
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, dataset.b());
    LaplaceOptions laplace_options;
    laplace_options.tol = options.laplace_tol;

    const double feasible_distortion = (1.0 + eps) * (1.0 + eps) * phi0;
    // The averaged iterates typically enter the feasible region from the
    // over-smoothed side (high distortion, slack constraints). After first
    // entry the run continues for up to the same number of iterations again,
    // keeping the best feasible average seen, which trims the distortion
    // excess at bounded extra cost.
    const double strict_distortion = (1.0 + eps) * phi0;
    Eigen::MatrixXd best_average;
    double best_average_distortion = std::numeric_limits<double>::infinity();
    int best_average_t = 0;
    int first_entry_t = 0;
    bool warm = false;
    int t = 0;
    while (t < iteration_cap) {
        ++t;
        const double lambda = (w_phi + pad) / phi0;
        for (int e = 0; e < m; ++e) {
            const double r = graph.edges[static_cast<size_t>(e)].radius;
            mu[e] = (w_edge[e] + pad) / (r * r);
        }
        iterate = solve_laplace(graph, Y, Eigen::VectorXd::Constant(n, lambda), mu,
                                laplace_options, warm ? &iterate : nullptr);
        warm = true;

        const double phi_t = (Y - iterate).squaredNorm();
        const double h_phi = 1.0 - std::sqrt(phi_t / phi0);
        double oracle_value = w_phi * h_phi;
        result.min_h_phi = std::min(result.min_h_phi, h_phi);
        for (int e = 0; e < m; ++e) {
            const auto& edge = graph.edges[static_cast<size_t>(e)];
            const double ratio = (iterate.row(edge.i) - iterate.row(edge.j)).norm() / edge.radius;
            const double h = 1.0 - ratio;
            oracle_value += w_edge[e] * h;
            result.min_h_edge = std::min(result.min_h_edge, h);
            w_edge[e] *= 1.0 + options.c2 * eps * (ratio - 1.0);
        }
        result.min_oracle_value = std::min(result.min_oracle_value, oracle_value);
        w_phi *= 1.0 + options.c2 * eps * (std::sqrt(phi_t / phi0) - 1.0);
        const double w_total = w_phi + w_edge.sum();
        w_phi /= w_total;
        w_edge /= w_total;
        assert(w_phi > 0.0 && w_edge.minCoeff() > 0.0 &&
               std::abs(w_phi + w_edge.sum() - 1.0) <= 1e-12);

        sum += iterate;

        if (oracle_value < certificate_threshold) {
            result.infeasibility_certified = true;
            break;
        }
        if (options.early_exit && (t % std::max(1, options.check_period) == 0)) {
            const Eigen::MatrixXd average = sum / t;
            const double distortion = (Y - average).squaredNorm();
            if (distortion <= feasible_distortion && max_violation(average, graph) <= 1.0 + eps) {
                if (first_entry_t == 0) first_entry_t = t;
                if (distortion < best_average_distortion) {
                    best_average = average;
                    best_average_distortion = distortion;
                    best_average_t = t;
                }
                if (distortion <= strict_distortion || t >= 2 * first_entry_t) break;
            }
        }
    }

    if (best_average_t > 0) {
        result.iterations = best_average_t;
        result.smoothed_labels = std::move(best_average);
    } else {
        result.iterations = t;
        result.smoothed_labels = sum / t;
    }
    result.distortion = (Y - result.smoothed_labels).squaredNorm();
    result.max_edge_violation = max_violation(result.smoothed_labels, graph);
    result.feasible = !result.infeasibility_certified &&
                      result.max_edge_violation <= 1.0 + eps &&
                      result.distortion <= feasible_distortion;
    return result;
}

SmoothingResult smooth_auto(const LabeledDataset& dataset, const ConstraintGraph& graph,
                            const SmoothingOptions& options) {
    check_inputs(dataset, graph, options.epsilon);
    if (feasibility_check(dataset, graph) <= 1.0)
        return identity_result(dataset, graph, options.epsilon);

    const Eigen::MatrixXd& Y = dataset.labels;

    // Lower bound: the single worst edge must shrink to its radius, and a gap
    // g split across two endpoints costs at least g^2/2 in distortion.
    double phi_lo = 1e-12;
    for (const auto& e : graph.edges) {
        const double gap = (Y.row(e.i) - Y.row(e.j)).norm() - e.radius;
        if (gap > 0.0) phi_lo = std::max(phi_lo, gap * gap / 2.0);
    }
    // Upper bound: collapsing every label to the centroid satisfies any
    // budget on a connected graph.
    const Eigen::RowVectorXd centroid = Y.colwise().mean();
    double phi_hi = (Y.rowwise() - centroid).squaredNorm();
    phi_hi = std::max(phi_hi, phi_lo * 2.0);

    auto attempt = [&](double phi0) { return smooth(dataset, graph, phi0, options); };

    SmoothingResult best;
    bool have_best = false;
    double lo = phi_lo;   // known-infeasible side (after the first probe)
    double hi = phi_hi;   // known-feasible side

    SmoothingResult probe = attempt(phi_lo);
    if (probe.feasible) {
        best = probe;
        have_best = true;
        hi = phi_lo;
        lo = phi_lo / 4.0;
    } else {
        // geometric ascent until feasible
        double cursor = phi_lo;
        while (cursor < phi_hi) {
            cursor = std::min(cursor * 4.0, phi_hi);
            probe = attempt(cursor);
            if (probe.feasible) {
                best = probe;
                have_best = true;
                hi = cursor;
                lo = cursor / 4.0;
                break;
            }
            lo = cursor;
        }
        if (!have_best) {
            // The centroid collapse is feasible outright; use it as a guaranteed
            // fallback answer for the bracket top.
            best.smoothed_labels = Eigen::MatrixXd(Y.rows(), Y.cols());
            best.smoothed_labels.rowwise() = centroid;
            best.distortion = (Y - best.smoothed_labels).squaredNorm();
            best.phi0_used = phi_hi;
            best.max_edge_violation = max_violation(best.smoothed_labels, graph);
            best.iterations = 0;
            best.epsilon = options.epsilon;
            best.feasible = true;
            best.min_oracle_value = 1.0;
            best.min_h_phi = 1.0;
            best.min_h_edge = 1.0;
            have_best = true;
            hi = phi_hi;
        }
    }

    // Bisect down to relative width eps.
    while (hi > lo * (1.0 + options.epsilon) && lo > 0.0) {
        const double mid = std::sqrt(lo * hi);
        probe = attempt(mid);
        if (probe.feasible) {
            best = probe;
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return best;
}

} // namespace lipreg
