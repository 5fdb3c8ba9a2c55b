#pragma once

#include "lipreg/constraint_graph.hpp"
#include "lipreg/dataset.hpp"
#include "lipreg/smoothing.hpp"

#include <cstdint>
#include <vector>

namespace lipreg {

// Capacity penalty Q_n = C * L * n^(-1/(a+b+1)).
double generalization_bound(int a, int b, double L, int n, double C);

struct SrmProfile {
    std::vector<double> candidate_Ls;     // sorted ascending
    std::vector<double> empirical_risks;  // post-smoothing risk per candidate
    std::vector<double> bounds;           // Q_n per candidate
    std::vector<double> objectives;       // risk + bound
    std::vector<bool> failed;             // candidate excluded by solver error
    double chosen_L = 0.0;
};

// For each candidate L: smooth the labels, record the unsquared empirical
// risk of the smoothed labels against the originals, and pick the minimizer
// of risk + Q_n. Ties break toward the smaller L.
SrmProfile srm_select(const LabeledDataset& dataset, std::vector<double> candidate_Ls,
                      const GraphPolicy& graph_policy, const SmoothingOptions& smoothing,
                      double C);

// Deterministic fold assignment: indices are shuffled with the seed and dealt
// round-robin. Returned vector maps point index -> fold id.
std::vector<int> make_folds(int n, int folds, std::uint64_t seed);

struct CvProfile {
    std::vector<double> candidate_Ls;
    std::vector<std::vector<double>> per_fold_losses; // [candidate][fold]
    std::vector<double> mean_losses;                  // squared loss
    std::vector<bool> failed;
    double chosen_L = 0.0;
};

// k-fold cross-validation: smooth on each training split, predict held-out
// points by one-point extension, score squared loss. fold_of overrides the
// seed-derived assignment when non-empty.
CvProfile cross_validate(const LabeledDataset& dataset, std::vector<double> candidate_Ls,
                         int folds, const GraphPolicy& graph_policy,
                         const SmoothingOptions& smoothing, std::uint64_t seed,
                         const std::vector<int>& fold_of = {});

// Geometric grid of `count` candidates centered (in log space) on the data's
// own worst edge ratio, spanning a factor of 10 on each side.
std::vector<double> default_candidate_grid(const LabeledDataset& dataset,
                                           const GraphPolicy& graph_policy, int count = 10);

} // namespace lipreg
