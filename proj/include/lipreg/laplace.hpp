#pragma once

#include "lipreg/constraint_graph.hpp"

#include <Eigen/Core>

#include <vector>

namespace lipreg {

// Sparse symmetric operator L + Lambda, where L is the graph Laplacian with
// edge weights mu_ij and Lambda = diag(lambda_i). L is diagonally dominant and
// positive semidefinite with L*1 = 0; L + Lambda is positive definite when
// every connected component (over mu > 0 edges) contains a vertex with
// lambda > 0.
class WeightedLaplacian {
public:
    WeightedLaplacian(const ConstraintGraph& graph, const Eigen::VectorXd& edge_weights,
                      const Eigen::VectorXd& vertex_weights);

    int n() const { return n_; }
    void apply(const Eigen::VectorXd& x, Eigen::VectorXd& out) const;
    const Eigen::VectorXd& diagonal() const { return diag_; }
    Eigen::MatrixXd dense() const;

    // True iff L + Lambda is nonsingular (component-wise lambda support).
    bool positive_definite() const;

private:
    int n_;
    std::vector<int> edge_i_, edge_j_;
    Eigen::VectorXd mu_, lambda_, diag_;
};

struct LaplaceOptions {
    double tol = 1e-10;          // relative residual target per column
    int max_iter_per_vertex = 10; // iteration cap = max_iter_per_vertex * n
};

// Minimizer of  sum_i lambda_i ||y_i - v_i||^2 + sum_E mu_ij ||v_i - v_j||^2,
// i.e. the solution of (L + Lambda) V = Lambda Y, solved column by column
// with Jacobi-preconditioned conjugate gradients.
// Y is n x b; the returned matrix has the same shape.
// warm_start, when non-null and correctly shaped, seeds the iteration.
Eigen::MatrixXd solve_laplace(const ConstraintGraph& graph, const Eigen::MatrixXd& Y,
                              const Eigen::VectorXd& vertex_weights,
                              const Eigen::VectorXd& edge_weights,
                              const LaplaceOptions& options = {},
                              const Eigen::MatrixXd* warm_start = nullptr);

// Harmonic extension with fixed boundary: vertices 0..n_known-1 carry the rows
// of known_values; the remaining vertices are free. Minimizes
// sum_E w_ij ||v_i - v_j||^2 over the free values. Every free connected
// component must reach a known vertex.
Eigen::MatrixXd solve_dirichlet(const ConstraintGraph& graph, int n_known,
                                const Eigen::MatrixXd& known_values,
                                const Eigen::VectorXd& edge_weights,
                                const LaplaceOptions& options = {},
                                const Eigen::MatrixXd* warm_start = nullptr);

} // namespace lipreg
