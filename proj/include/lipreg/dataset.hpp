#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <string>
#include <vector>

namespace lipreg {

// Paired point sets X in R^a, Y in R^b. Immutable after construction; all
// operations taking a dataset are pure functions.
struct LabeledDataset {
    Eigen::MatrixXd inputs; // n x a, one point per row
    Eigen::MatrixXd labels; // n x b

    int n() const { return static_cast<int>(inputs.rows()); }
    int a() const { return static_cast<int>(inputs.cols()); }
    int b() const { return static_cast<int>(labels.cols()); }

    // Validates: n >= 1, matching row counts, strictly distinct inputs.
    // Throws ValidationError otherwise.
    static LabeledDataset create(Eigen::MatrixXd inputs, Eigen::MatrixXd labels);
};

// Upper bound on the Lipschitz constant of the hypothesis class.
// Strictly positive and finite for every solver entry point.
class LipschitzBudget {
public:
    explicit LipschitzBudget(double value);
    double value() const { return value_; }

private:
    double value_;
};

struct RiskReport {
    double empirical_risk = 0.0; // mean of per_point_losses
    std::vector<double> per_point_losses;
};

// Mean Euclidean distance between predictions and labels (rows paired).
RiskReport empirical_risk(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& labels);

// Mean squared Euclidean distance.
RiskReport squared_loss(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& labels);

enum class DatasetFormat { Json, Csv };

// Infers Json/Csv from the file extension; defaults to Json.
DatasetFormat format_from_path(const std::filesystem::path& path);

// Loading merges exact-duplicate inputs whose labels agree within 1e-12
// (max norm) and rejects duplicate inputs with conflicting labels, so every
// loaded dataset satisfies the distinct-inputs invariant.
LabeledDataset load_dataset(const std::filesystem::path& path, DatasetFormat format);
LabeledDataset load_dataset(const std::filesystem::path& path);

// JSON round-trips bit-exactly; CSV to 1e-15 relative.
void save_dataset(const LabeledDataset& dataset, const std::filesystem::path& path,
                  DatasetFormat format);
void save_dataset(const LabeledDataset& dataset, const std::filesystem::path& path);

std::string dataset_to_json_string(const LabeledDataset& dataset);
LabeledDataset dataset_from_json_string(const std::string& text);

} // namespace lipreg
