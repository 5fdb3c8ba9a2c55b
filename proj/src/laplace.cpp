#include "lipreg/laplace.hpp"

#include "lipreg/errors.hpp"

#include <cmath>
#include <limits>
#include <queue>

namespace lipreg {

WeightedLaplacian::WeightedLaplacian(const ConstraintGraph& graph,
                                     const Eigen::VectorXd& edge_weights,
                                     const Eigen::VectorXd& vertex_weights)
    : n_(graph.n), mu_(edge_weights), lambda_(vertex_weights) {
    if (edge_weights.size() != graph.m())
        throw ValidationError("edge weight count does not match graph");
    if (vertex_weights.size() != graph.n)
        throw ValidationError("vertex weight count does not match graph");
    for (int e = 0; e < graph.m(); ++e)
        if (!(edge_weights[e] >= 0.0))
            throw ValidationError("negative edge weight");
    for (int v = 0; v < graph.n; ++v)
        if (!(vertex_weights[v] >= 0.0))
            throw ValidationError("negative vertex weight");

    edge_i_.reserve(graph.edges.size());
    edge_j_.reserve(graph.edges.size());
    diag_ = vertex_weights;
    for (int e = 0; e < graph.m(); ++e) {
        const auto& edge = graph.edges[static_cast<size_t>(e)];
        edge_i_.push_back(edge.i);
        edge_j_.push_back(edge.j);
        diag_[edge.i] += mu_[e];
        diag_[edge.j] += mu_[e];
    }
}

void WeightedLaplacian::apply(const Eigen::VectorXd& x, Eigen::VectorXd& out) const {
    out = lambda_.cwiseProduct(x);
    for (size_t e = 0; e < edge_i_.size(); ++e) {
        const double w = mu_[static_cast<Eigen::Index>(e)];
        const double d = x[edge_i_[e]] - x[edge_j_[e]];
        out[edge_i_[e]] += w * d;
        out[edge_j_[e]] -= w * d;
    }
}

Eigen::MatrixXd WeightedLaplacian::dense() const {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n_, n_);
    for (int v = 0; v < n_; ++v) M(v, v) = lambda_[v];
    for (size_t e = 0; e < edge_i_.size(); ++e) {
        const double w = mu_[static_cast<Eigen::Index>(e)];
        int i = edge_i_[e], j = edge_j_[e];
        M(i, i) += w;
        M(j, j) += w;
        M(i, j) -= w;
        M(j, i) -= w;
    }
    return M;
}

bool WeightedLaplacian::positive_definite() const {
    // Each connected component over mu > 0 edges needs some lambda > 0.
    std::vector<std::vector<int>> adj(static_cast<size_t>(n_));
    for (size_t e = 0; e < edge_i_.size(); ++e)
        if (mu_[static_cast<Eigen::Index>(e)] > 0.0) {
            adj[static_cast<size_t>(edge_i_[e])].push_back(edge_j_[e]);
            adj[static_cast<size_t>(edge_j_[e])].push_back(edge_i_[e]);
        }
    std::vector<bool> seen(static_cast<size_t>(n_), false);
    for (int s = 0; s < n_; ++s) {
        if (seen[static_cast<size_t>(s)]) continue;
        bool anchored = false;
        std::queue<int> frontier;
        frontier.push(s);
        seen[static_cast<size_t>(s)] = true;
        while (!frontier.empty()) {
            int u = frontier.front();
            frontier.pop();
            if (lambda_[u] > 0.0) anchored = true;
            for (int v : adj[static_cast<size_t>(u)])
                if (!seen[static_cast<size_t>(v)]) {
                    seen[static_cast<size_t>(v)] = true;
                    frontier.push(v);
                }
        }
        if (!anchored) return false;
    }
    return true;
}

namespace {

// Jacobi-preconditioned conjugate gradients on a WeightedLaplacian.
// Solves to ||A x - rhs|| <= tol * ||rhs|| or throws SolverError.
void pcg_solve(const WeightedLaplacian& A, const Eigen::VectorXd& rhs, Eigen::VectorXd& x,
               double tol, int max_iter) {
    const double rhs_norm = rhs.norm();
    if (rhs_norm == 0.0) {
        x.setZero(rhs.size());
        return;
    }
    Eigen::VectorXd inv_diag = A.diagonal().cwiseMax(1e-300).cwiseInverse();
    Eigen::VectorXd r(rhs.size()), z(rhs.size()), p(rhs.size()), Ap(rhs.size());

    A.apply(x, Ap);
    r = rhs - Ap;
    z = inv_diag.cwiseProduct(r);
    p = z;
    double rz = r.dot(z);
    double best_rel = r.norm() / rhs_norm;
    if (best_rel <= tol) return;

    for (int it = 0; it < max_iter; ++it) {
        A.apply(p, Ap);
        const double pAp = p.dot(Ap);
        if (!(pAp > 0.0))
            throw SolverError("conjugate gradient hit a non-positive curvature direction "
                              "(system is singular or indefinite)",
                              best_rel);
        const double alpha = rz / pAp;
        x += alpha * p;
        r -= alpha * Ap;

        // periodic exact residual refresh guards against drift
        if ((it + 1) % 64 == 0) {
            A.apply(x, Ap);
            r = rhs - Ap;
        }
        const double rel = r.norm() / rhs_norm;
        best_rel = std::min(best_rel, rel);
        if (rel <= tol) {
            A.apply(x, Ap);
            if ((rhs - Ap).norm() / rhs_norm <= tol) return;
            r = rhs - Ap;
        }
        z = inv_diag.cwiseProduct(r);
        const double rz_next = r.dot(z);
        p = z + (rz_next / rz) * p;
        rz = rz_next;
    }
    throw SolverError("conjugate gradient did not reach tolerance " + std::to_string(tol) +
                          " within " + std::to_string(max_iter) + " iterations",
                      best_rel);
}

} // namespace

Eigen::MatrixXd solve_laplace(const ConstraintGraph& graph, const Eigen::MatrixXd& Y,
                              const Eigen::VectorXd& vertex_weights,
                              const Eigen::VectorXd& edge_weights, const LaplaceOptions& options,
                              const Eigen::MatrixXd* warm_start) {
    if (Y.rows() != graph.n)
        throw ValidationError("label matrix row count does not match graph");
    if (!(options.tol > 0.0))
        throw ValidationError("solver tolerance must be positive");

    WeightedLaplacian A(graph, edge_weights, vertex_weights);
    if (!A.positive_definite())
        throw SolverError("singular Laplace system: a connected component has no vertex weight",
                          std::numeric_limits<double>::infinity());

    const int b = static_cast<int>(Y.cols());
    const int max_iter = std::max(64, options.max_iter_per_vertex * graph.n);
    Eigen::MatrixXd result(graph.n, b);
    // The b coordinate solves are independent; they share nothing but A.
    for (int c = 0; c < b; ++c) {
        Eigen::VectorXd rhs = vertex_weights.cwiseProduct(Y.col(c));
        Eigen::VectorXd x = Eigen::VectorXd::Zero(graph.n);
        if (warm_start && warm_start->rows() == graph.n && warm_start->cols() == b)
            x = warm_start->col(c);
        pcg_solve(A, rhs, x, options.tol, max_iter);
        result.col(c) = x;
    }
    return result;
}

Eigen::MatrixXd solve_dirichlet(const ConstraintGraph& graph, int n_known,
                                const Eigen::MatrixXd& known_values,
                                const Eigen::VectorXd& edge_weights, const LaplaceOptions& options,
                                const Eigen::MatrixXd* warm_start) {
    const int n_free = graph.n - n_known;
    if (n_known < 1 || n_free < 1)
        throw ValidationError("dirichlet solve needs at least one known and one free vertex");
    if (known_values.rows() != n_known)
        throw ValidationError("known value row count does not match n_known");
    if (edge_weights.size() != graph.m())
        throw ValidationError("edge weight count does not match graph");

    // Grounded system over the free vertices: the diagonal picks up all
    // incident weights, couplings to known vertices move to the right side.
    ConstraintGraph free_graph;
    free_graph.n = n_free;
    free_graph.lipschitz = graph.lipschitz;
    std::vector<double> free_mu;
    Eigen::VectorXd ground = Eigen::VectorXd::Zero(n_free);
    const int b = static_cast<int>(known_values.cols());
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n_free, b);
    for (int e = 0; e < graph.m(); ++e) {
        const auto& edge = graph.edges[static_cast<size_t>(e)];
        const double w = edge_weights[e];
        const bool i_known = edge.i < n_known;
        const bool j_known = edge.j < n_known;
        if (i_known && j_known)
            throw ValidationError("constraint between two known vertices (" +
                                  std::to_string(edge.i) + "," + std::to_string(edge.j) + ")");
        if (!i_known && !j_known) {
            free_graph.edges.push_back(
                {edge.i - n_known, edge.j - n_known, edge.dist, edge.radius});
            free_mu.push_back(w);
        } else {
            const int free_v = (i_known ? edge.j : edge.i) - n_known;
            const int known_v = i_known ? edge.i : edge.j;
            ground[free_v] += w;
            rhs.row(free_v) += w * known_values.row(known_v);
        }
    }

    WeightedLaplacian A(free_graph,
                        Eigen::Map<const Eigen::VectorXd>(free_mu.data(),
                                                          static_cast<Eigen::Index>(free_mu.size())),
                        ground);
    if (!A.positive_definite())
        throw SolverError("free vertex component is not connected to any known vertex",
                          std::numeric_limits<double>::infinity());

    const int max_iter = std::max(64, options.max_iter_per_vertex * n_free);
    Eigen::MatrixXd result(n_free, b);
    for (int c = 0; c < b; ++c) {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(n_free);
        if (warm_start && warm_start->rows() == n_free && warm_start->cols() == b)
            x = warm_start->col(c);
        pcg_solve(A, rhs.col(c), x, options.tol, max_iter);
        result.col(c) = x;
    }
    return result;
}

} // namespace lipreg
