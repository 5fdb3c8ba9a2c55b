#include "lipreg/selection.hpp"

#include "lipreg/errors.hpp"
#include "lipreg/extension.hpp"
#include "lipreg/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace lipreg {

double generalization_bound(int a, int b, double L, int n, double C) {
    if (n < 1) throw ValidationError("sample size must be >= 1");
    if (!(L > 0.0)) throw ValidationError("Lipschitz constant must be positive");
    if (!(C > 0.0)) throw ValidationError("bound constant must be positive");
    const double d = static_cast<double>(a + b);
    return C * L * std::pow(static_cast<double>(n), -1.0 / (d + 1.0));
}

SrmProfile srm_select(const LabeledDataset& dataset, std::vector<double> candidate_Ls,
                      const GraphPolicy& graph_policy, const SmoothingOptions& smoothing,
                      double C) {
    if (candidate_Ls.empty())
        throw ValidationError("srm_select requires at least one candidate");
    std::sort(candidate_Ls.begin(), candidate_Ls.end());

    SrmProfile profile;
    profile.candidate_Ls = candidate_Ls;
    double best_objective = std::numeric_limits<double>::infinity();
    for (double L : candidate_Ls) {
        double risk = std::numeric_limits<double>::quiet_NaN();
        bool failed = false;
        try {
            ConstraintGraph graph = graph_policy.build(dataset, LipschitzBudget(L));
            SmoothingResult smoothed = smooth_auto(dataset, graph, smoothing);
            risk = empirical_risk(smoothed.smoothed_labels, dataset.labels).empirical_risk;
        } catch (const std::exception&) {
            failed = true;
        }
        const double bound = generalization_bound(dataset.a(), dataset.b(), L, dataset.n(), C);
        const double objective = risk + bound;
        profile.empirical_risks.push_back(risk);
        profile.bounds.push_back(bound);
        profile.objectives.push_back(objective);
        profile.failed.push_back(failed);
        // ties (up to roundoff) break toward the smaller L (candidates ascend)
        const double srm_tie = std::isfinite(best_objective)
                                   ? 1e-12 * std::max(1.0, std::abs(best_objective))
                                   : 0.0;
        if (!failed && objective + srm_tie < best_objective) {
            best_objective = objective;
            profile.chosen_L = L;
        }
    }
    if (!std::isfinite(best_objective))
        throw SolverError("every SRM candidate failed", best_objective);
    return profile;
}

std::vector<int> make_folds(int n, int folds, std::uint64_t seed) {
    if (folds < 2 || folds > n)
        throw ValidationError("fold count must satisfy 2 <= folds <= n");
    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    // Fisher-Yates with the deterministic engine
    for (int i = n - 1; i > 0; --i)
        std::swap(order[static_cast<size_t>(i)],
                  order[static_cast<size_t>(rng.below(static_cast<std::uint64_t>(i + 1)))]);
    std::vector<int> fold_of(static_cast<size_t>(n));
    for (int pos = 0; pos < n; ++pos) fold_of[static_cast<size_t>(order[static_cast<size_t>(pos)])] = pos % folds;
    return fold_of;
}

CvProfile cross_validate(const LabeledDataset& dataset, std::vector<double> candidate_Ls,
                         int folds, const GraphPolicy& graph_policy,
                         const SmoothingOptions& smoothing, std::uint64_t seed,
                         const std::vector<int>& fold_of_override) {
    if (candidate_Ls.empty())
        throw ValidationError("cross_validate requires at least one candidate");
    std::sort(candidate_Ls.begin(), candidate_Ls.end());
    const int n = dataset.n();
    std::vector<int> fold_of =
        fold_of_override.empty() ? make_folds(n, folds, seed) : fold_of_override;
    if (static_cast<int>(fold_of.size()) != n)
        throw ValidationError("fold assignment size does not match dataset");

    // Pre-split once; the splits are shared across candidates.
    std::vector<std::vector<int>> train_idx(static_cast<size_t>(folds)),
        test_idx(static_cast<size_t>(folds));
    for (int i = 0; i < n; ++i) {
        const int f = fold_of[static_cast<size_t>(i)];
        if (f < 0 || f >= folds)
            throw ValidationError("fold id out of range for point " + std::to_string(i));
        for (int g = 0; g < folds; ++g)
            (g == f ? test_idx : train_idx)[static_cast<size_t>(g)].push_back(i);
    }
    for (int f = 0; f < folds; ++f)
        if (train_idx[static_cast<size_t>(f)].empty())
            throw ValidationError("fold " + std::to_string(f) + " has an empty training split");

    auto subset = [&](const std::vector<int>& rows) {
        Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), dataset.a());
        Eigen::MatrixXd Y(static_cast<Eigen::Index>(rows.size()), dataset.b());
        for (size_t r = 0; r < rows.size(); ++r) {
            X.row(static_cast<Eigen::Index>(r)) = dataset.inputs.row(rows[r]);
            Y.row(static_cast<Eigen::Index>(r)) = dataset.labels.row(rows[r]);
        }
        return LabeledDataset::create(std::move(X), std::move(Y));
    };

    CvProfile profile;
    profile.candidate_Ls = candidate_Ls;
    double best_loss = std::numeric_limits<double>::infinity();
    for (double L : candidate_Ls) {
        std::vector<double> fold_losses;
        bool failed = false;
        try {
            for (int f = 0; f < folds && !failed; ++f) {
                LabeledDataset train = subset(train_idx[static_cast<size_t>(f)]);
                ConstraintGraph graph = graph_policy.build(train, LipschitzBudget(L));
                SmoothingResult smoothed = smooth_auto(train, graph, smoothing);
                LabeledDataset model = LabeledDataset::create(train.inputs, smoothed.smoothed_labels);

                ExtensionOptions ext;
                ext.epsilon = smoothing.epsilon;
                double loss_sum = 0.0;
                for (int i : test_idx[static_cast<size_t>(f)]) {
                    ExtensionResult prediction = extend_one_point(
                        model, LipschitzBudget(L), dataset.inputs.row(i).transpose(), ext);
                    loss_sum += (prediction.y_star - dataset.labels.row(i).transpose()).squaredNorm();
                }
                fold_losses.push_back(loss_sum /
                                      static_cast<double>(test_idx[static_cast<size_t>(f)].size()));
            }
        } catch (const std::exception&) {
            failed = true;
        }
        double mean = std::numeric_limits<double>::quiet_NaN();
        if (!failed)
            mean = std::accumulate(fold_losses.begin(), fold_losses.end(), 0.0) /
                   static_cast<double>(fold_losses.size());
        profile.per_fold_losses.push_back(std::move(fold_losses));
        profile.mean_losses.push_back(mean);
        profile.failed.push_back(failed);
        const double cv_tie =
            std::isfinite(best_loss) ? 1e-12 * std::max(1.0, std::abs(best_loss)) : 0.0;
        if (!failed && mean + cv_tie < best_loss) {
            best_loss = mean;
            profile.chosen_L = L;
        }
    }
    if (!std::isfinite(best_loss))
        throw SolverError("every cross-validation candidate failed", best_loss);
    return profile;
}

std::vector<double> default_candidate_grid(const LabeledDataset& dataset,
                                           const GraphPolicy& graph_policy, int count) {
    if (count < 1) throw ValidationError("candidate count must be >= 1");
    // Center the sweep on the data's own worst edge ratio.
    ConstraintGraph probe = graph_policy.build(dataset, LipschitzBudget(1.0));
    double ratio = feasibility_check(dataset, probe);
    if (!(ratio > 0.0)) ratio = 1.0;
    std::vector<double> grid;
    if (count == 1) {
        grid.push_back(ratio);
        return grid;
    }
    const double lo = ratio / 10.0, hi = ratio * 10.0;
    for (int i = 0; i < count; ++i)
        grid.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1)));
    return grid;
}

} // namespace lipreg
