#pragma once

#include "lipreg/constraint_graph.hpp"
#include "lipreg/dataset.hpp"

#include <Eigen/Core>

#include <vector>

namespace lipreg {

struct SmoothingOptions {
    double epsilon = 0.1;  // in (0, 1/2)
    double c1 = 8.0;       // iteration-count constant
    double c2 = 0.125;     // learning-rate constant
    double laplace_tol = 1e-10;
    bool early_exit = true; // stop once the running average is feasible
    int check_period = 1;
};

// Constraint weights: one scalar for the distortion constraint plus one per
// edge; they form a probability distribution.
struct SmoothingWeights {
    double w_phi = 0.0;
    Eigen::VectorXd w_edge;
};

struct SmoothingResult {
    Eigen::MatrixXd smoothed_labels; // n x b
    double distortion = 0.0;         // sum_i ||y_i - smoothed_i||^2
    double phi0_used = 0.0;
    double max_edge_violation = 0.0; // max over E of ||v_i - v_j|| / r_ij
    int iterations = 0;
    double epsilon = 0.0;
    bool feasible = false; // violation <= 1+eps and distortion <= (1+eps)^2 phi0
    // Oracle certified that no labeling with distortion <= phi0 satisfies the
    // constraints; distinct from merely running out of iterations.
    bool infeasibility_certified = false;

    // Per-iteration certificates:
    //   h_phi(V)  = 1 - sqrt(distortion(V)/phi0)
    //   h_ij(V)   = 1 - ||v_i - v_j|| / r_ij
    //   oracle    = w_phi h_phi + sum w_ij h_ij   (must stay >= -eps)
    double min_oracle_value = 0.0;
    double min_h_phi = 0.0;
    double min_h_edge = 0.0;
};

// Max over E of ||y_i - y_j|| / r_ij; <= 1 means the labels already satisfy
// every constraint. Zero by convention on an empty edge set.
double feasibility_check(const LabeledDataset& dataset, const ConstraintGraph& graph);

// One oracle invocation: solve the Laplace problem with
// mu_ij = (w_ij + eps/(m+1)) / r_ij^2 and lambda = (w_phi + eps/(m+1)) / phi0.
// On any instance admitting labels with distortion <= phi0, the returned
// candidate satisfies w_phi h_phi + sum w_ij h_ij >= -eps.
Eigen::MatrixXd oracle_step(const ConstraintGraph& graph, const Eigen::MatrixXd& Y,
                            const SmoothingWeights& weights, double phi0, double epsilon,
                            double laplace_tol = 1e-10);

// Minimally perturb the labels so every edge constraint holds within (1+eps),
// with distortion at most (1+eps)^2 * phi0. phi0 must upper-bound the optimal
// distortion; too-small phi0 is reported through the result flags.
SmoothingResult smooth(const LabeledDataset& dataset, const ConstraintGraph& graph, double phi0,
                       const SmoothingOptions& options);

// Locates phi0 by geometric bracketing plus bisection to relative width eps.
// The upper bracket (collapse to the label centroid) is always feasible, so
// this never fails on valid inputs.
SmoothingResult smooth_auto(const LabeledDataset& dataset, const ConstraintGraph& graph,
                            const SmoothingOptions& options);

} // namespace lipreg
