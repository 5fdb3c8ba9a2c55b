#pragma once

#include "lipreg/dataset.hpp"

#include <cstdint>
#include <vector>

namespace lipreg {

// Gaussian-kernel Nadaraya-Watson regressor: a kernel-weighted average of
// training labels, so predictions stay in their convex hull.
struct NwModel {
    LabeledDataset data;
    double bandwidth = 1.0;
};

NwModel make_nw_model(LabeledDataset data, double bandwidth);

// Kernel-weighted label average; falls back to the nearest-neighbor label
// when every kernel value underflows (below 1e-300).
Eigen::VectorXd nw_predict(const NwModel& model, const Eigen::VectorXd& x_star);

// k-fold CV over a bandwidth grid, squared loss; ties break toward the
// smaller bandwidth.
double nw_tune_bandwidth(const LabeledDataset& dataset, int folds,
                         const std::vector<double>& grid, std::uint64_t seed);

// Geometric bandwidth grid from the data scale: spans roughly the minimum
// pairwise distance up to the input diameter.
std::vector<double> nw_default_grid(const LabeledDataset& dataset, int count = 16);

} // namespace lipreg
