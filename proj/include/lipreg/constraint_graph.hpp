#pragma once

#include "lipreg/dataset.hpp"

#include <string>
#include <vector>

namespace lipreg {

// Edge set over point indices on which Lipschitz constraints are enforced.
// Each edge carries dist = ||x_i - x_j|| and radius = L * dist, the label-space
// budget for the pair.
struct ConstraintGraph {
    struct Edge {
        int i = 0; // i < j
        int j = 0;
        double dist = 0.0;
        double radius = 0.0;
    };

    int n = 0;
    double lipschitz = 0.0;
    std::vector<Edge> edges;

    int m() const { return static_cast<int>(edges.size()); }
    bool connected() const;

    // Rebuild radii for a different budget; the edge set is L-independent.
    ConstraintGraph with_budget(LipschitzBudget L) const;

    std::string to_json_string() const;
};

// All n(n-1)/2 pairs: the exact constraint set.
ConstraintGraph complete_graph(const LabeledDataset& dataset, LipschitzBudget L);

// Symmetrized k-nearest-neighbor edges, augmented with the Euclidean
// minimum-spanning-tree so the result is always connected.
ConstraintGraph knn_graph(const LabeledDataset& dataset, LipschitzBudget L, int k);

// Greedy (1+eps)-stretch spanner: pairs are scanned in ascending distance
// order, and a pair becomes an edge iff the current graph distance exceeds
// stretch times the pair distance.
ConstraintGraph greedy_spanner(const LabeledDataset& dataset, LipschitzBudget L, double stretch);

// Graph construction policy, parseable from CLI syntax:
//   "complete" | "knn:<k>" | "spanner:<eps>"
struct GraphPolicy {
    enum class Kind { Complete, Knn, Spanner };
    Kind kind = Kind::Complete;
    int k = 8;
    double spanner_eps = 0.5;

    ConstraintGraph build(const LabeledDataset& dataset, LipschitzBudget L) const;
    std::string to_string() const;
    static GraphPolicy parse(const std::string& text);
};

} // namespace lipreg
