#include "lipreg/nadaraya_watson.hpp"

#include "lipreg/errors.hpp"
#include "lipreg/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace lipreg {

NwModel make_nw_model(LabeledDataset data, double bandwidth) {
    if (!(bandwidth > 0.0))
        throw ValidationError("bandwidth must be positive, got " + std::to_string(bandwidth));
    return NwModel{std::move(data), bandwidth};
}

Eigen::VectorXd nw_predict(const NwModel& model, const Eigen::VectorXd& x_star) {
    const auto& d = model.data;
    if (x_star.size() != d.a())
        throw ValidationError("query dimension does not match training data");

    const int n = d.n();
    double weight_sum = 0.0;
    double best_dist = std::numeric_limits<double>::infinity();
    int nearest = 0;
    Eigen::VectorXd accum = Eigen::VectorXd::Zero(d.b());
    double max_kernel = 0.0;
    for (int i = 0; i < n; ++i) {
        const double dist = (d.inputs.row(i).transpose() - x_star).norm();
        if (dist < best_dist) {
            best_dist = dist;
            nearest = i;
        }
        const double u = dist / model.bandwidth;
        const double k = std::exp(-0.5 * u * u);
        max_kernel = std::max(max_kernel, k);
        weight_sum += k;
        accum += k * d.labels.row(i).transpose();
    }
    if (max_kernel < 1e-300)
        return d.labels.row(nearest).transpose(); // all weights underflowed
    return accum / weight_sum;
}

double nw_tune_bandwidth(const LabeledDataset& dataset, int folds,
                         const std::vector<double>& grid, std::uint64_t seed) {
    if (grid.empty())
        throw ValidationError("bandwidth grid must be non-empty");
    std::vector<double> candidates = grid;
    std::sort(candidates.begin(), candidates.end());

    const int n = dataset.n();
    std::vector<int> fold_of = make_folds(n, folds, seed);

    // fold splits are shared by every candidate bandwidth
    std::vector<LabeledDataset> fold_train;
    std::vector<std::vector<int>> fold_test(static_cast<size_t>(folds));
    for (int f = 0; f < folds; ++f) {
        std::vector<int> train_rows;
        for (int i = 0; i < n; ++i)
            (fold_of[static_cast<size_t>(i)] == f ? fold_test[static_cast<size_t>(f)]
                                                  : train_rows)
                .push_back(i);
        Eigen::MatrixXd X(static_cast<Eigen::Index>(train_rows.size()), dataset.a());
        Eigen::MatrixXd Y(static_cast<Eigen::Index>(train_rows.size()), dataset.b());
        for (size_t r = 0; r < train_rows.size(); ++r) {
            X.row(static_cast<Eigen::Index>(r)) = dataset.inputs.row(train_rows[r]);
            Y.row(static_cast<Eigen::Index>(r)) = dataset.labels.row(train_rows[r]);
        }
        fold_train.push_back(LabeledDataset::create(std::move(X), std::move(Y)));
    }

    double best_loss = std::numeric_limits<double>::infinity();
    double best_h = candidates.front();
    for (double h : candidates) {
        double loss_sum = 0.0;
        int count = 0;
        for (int f = 0; f < folds; ++f) {
            NwModel model{fold_train[static_cast<size_t>(f)], h};
            for (int i : fold_test[static_cast<size_t>(f)]) {
                Eigen::VectorXd pred = nw_predict(model, dataset.inputs.row(i).transpose());
                loss_sum += (pred - dataset.labels.row(i).transpose()).squaredNorm();
                ++count;
            }
        }
        const double loss = loss_sum / std::max(1, count);
        // ties (up to roundoff) break toward the smaller bandwidth
        const double tie =
            std::isfinite(best_loss) ? 1e-12 * std::max(1.0, std::abs(best_loss)) : 0.0;
        if (loss + tie < best_loss) {
            best_loss = loss;
            best_h = h;
        }
    }
    return best_h;
}

std::vector<double> nw_default_grid(const LabeledDataset& dataset, int count) {
    if (count < 1) throw ValidationError("grid size must be >= 1");
    const int n = dataset.n();
    double min_dist = std::numeric_limits<double>::infinity();
    double diameter = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double dist = (dataset.inputs.row(i) - dataset.inputs.row(j)).norm();
            min_dist = std::min(min_dist, dist);
            diameter = std::max(diameter, dist);
        }
    if (!(diameter > 0.0)) { min_dist = 1.0; diameter = 1.0; }
    min_dist = std::max(min_dist, diameter * 1e-6);
    std::vector<double> grid;
    if (count == 1) {
        grid.push_back(std::sqrt(min_dist * diameter));
        return grid;
    }
    const double lo = min_dist / 4.0, hi = diameter;
    for (int i = 0; i < count; ++i)
        grid.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1)));
    return grid;
}

} // namespace lipreg
