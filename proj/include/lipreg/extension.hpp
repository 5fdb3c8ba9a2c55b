#pragma once

#include "lipreg/constraint_graph.hpp"
#include "lipreg/dataset.hpp"
#include "lipreg/laplace.hpp"

#include <Eigen/Core>

#include <vector>

namespace lipreg {

struct ExtensionOptions {
    double epsilon = 0.1; // in (0, 1/2)
    // Weight update w_i <- (1 + eps/8 * (slack_i - 1)) w_i by default; the
    // literal variant multiplies by (1 + eps/8 * slack_i) instead. Both
    // converge; the default is the form the step-size analysis covers.
    bool literal_update = false;
    bool early_exit = true;  // stop once the running average is feasible
    int check_period = 8;    // feasibility-check cadence, in iterations
    double c1 = 8.0;         // multi-point iteration-count constant
    double c2 = 0.125;       // multi-point learning-rate constant
    double laplace_tol = 1e-10;
};

struct ExtensionResult {
    Eigen::VectorXd y_star;
    std::vector<double> slacks; // ||y* - y_i|| / (L ||x* - x_i||)
    double max_slack = 0.0;
    int anchor_index = 0;
    int iterations = 0;
    double epsilon = 0.0;
    bool feasible = false;       // max_slack <= 1 + epsilon
    bool anchored_exact = false; // query coincided with a training point

    // Per-iteration diagnostics over the oracle outputs z^(t):
    // h_i(z) = 1 - ||z - y_i|| / (L ||x* - x_i||).
    double min_h = 0.0;
    double max_h = 0.0;
    double min_oracle_value = 0.0; // min over t of sum_i w_i h_i(z^(t))
};

// Predict the label at x_star subject to ||y* - y_i|| <= (1+eps) L ||x* - x_i||
// for every training point. The instance is feasible whenever the training
// labels are L-Lipschitz consistent; an infeasible instance is reported via
// feasible = false with the worst slack recorded, signalling that the caller
// should smooth the labels first or raise L.
ExtensionResult extend_one_point(const LabeledDataset& dataset, LipschitzBudget L,
                                 const Eigen::VectorXd& x_star, const ExtensionOptions& options);

struct MultiExtensionResult {
    Eigen::MatrixXd labels; // n' x b, one row per new point
    std::vector<double> slacks; // per graph edge, ||v_i - v_j|| / r_ij
    double max_slack = 0.0;
    int iterations = 0;
    double epsilon = 0.0;
    bool feasible = false;
    double min_h = 0.0;
    double min_oracle_value = 0.0;
};

// Label all new points at once. joint_graph spans n + n' vertices with
// training points first; no edge may join two training vertices, and every
// new vertex must reach a training vertex through the edge set.
MultiExtensionResult extend_multi(const LabeledDataset& dataset, const Eigen::MatrixXd& new_points,
                                  const ConstraintGraph& joint_graph,
                                  const ExtensionOptions& options);

// Joint graph builder: connects each new point to its k nearest training
// points. Vertices 0..n-1 are the training points, n..n+n'-1 the new ones.
ConstraintGraph knn_extension_graph(const LabeledDataset& dataset,
                                    const Eigen::MatrixXd& new_points, LipschitzBudget L, int k);

// Graph over explicit points (one per row) and an explicit pair list.
ConstraintGraph graph_from_pairs(const Eigen::MatrixXd& points, LipschitzBudget L,
                                 const std::vector<std::pair<int, int>>& pairs);

} // namespace lipreg
