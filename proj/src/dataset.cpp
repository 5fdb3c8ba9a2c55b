#include "lipreg/dataset.hpp"

#include "lipreg/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace lipreg {

using nlohmann::json;

LabeledDataset LabeledDataset::create(Eigen::MatrixXd inputs, Eigen::MatrixXd labels) {
    if (inputs.rows() == 0)
        throw ValidationError("empty dataset");
    if (inputs.rows() != labels.rows())
        throw ValidationError("inputs/labels row count mismatch: " +
                              std::to_string(inputs.rows()) + " vs " +
                              std::to_string(labels.rows()));
    if (inputs.cols() == 0 || labels.cols() == 0)
        throw ValidationError("points must have dimension >= 1");
    for (Eigen::Index r = 0; r < inputs.rows(); ++r)
        for (Eigen::Index c = 0; c < inputs.cols(); ++c)
            if (!std::isfinite(inputs(r, c)))
                throw ValidationError("non-finite input coordinate at row " + std::to_string(r));
    for (Eigen::Index r = 0; r < labels.rows(); ++r)
        for (Eigen::Index c = 0; c < labels.cols(); ++c)
            if (!std::isfinite(labels(r, c)))
                throw ValidationError("non-finite label coordinate at row " + std::to_string(r));

    // Distinct inputs: a duplicate x with conflicting y makes every finite
    // Lipschitz budget infeasible, so it is rejected at the boundary.
    std::map<std::vector<double>, Eigen::Index> seen;
    for (Eigen::Index r = 0; r < inputs.rows(); ++r) {
        std::vector<double> key(inputs.row(r).begin(), inputs.row(r).end());
        auto [it, inserted] = seen.emplace(std::move(key), r);
        if (!inserted)
            throw ValidationError("duplicate input points at rows " + std::to_string(it->second) +
                                  " and " + std::to_string(r));
    }

    LabeledDataset d;
    d.inputs = std::move(inputs);
    d.labels = std::move(labels);
    return d;
}

LipschitzBudget::LipschitzBudget(double value) : value_(value) {
    if (!(value > 0.0) || !std::isfinite(value))
        throw ValidationError("Lipschitz budget must be positive and finite, got " +
                              std::to_string(value));
}

namespace {

RiskReport make_report(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& labels,
                       bool squared) {
    if (predictions.rows() != labels.rows())
        throw ValidationError("predictions/labels length mismatch");
    if (predictions.cols() != labels.cols())
        throw ValidationError("predictions/labels dimension mismatch");
    if (predictions.rows() == 0)
        throw ValidationError("empty prediction set");

    RiskReport report;
    report.per_point_losses.reserve(static_cast<size_t>(predictions.rows()));
    double sum = 0.0;
    for (Eigen::Index r = 0; r < predictions.rows(); ++r) {
        double d = (predictions.row(r) - labels.row(r)).norm();
        double loss = squared ? d * d : d;
        report.per_point_losses.push_back(loss);
        sum += loss;
    }
    report.empirical_risk = sum / static_cast<double>(predictions.rows());
    return report;
}

// Collapse exact-duplicate inputs. Labels must agree within 1e-12 (max norm).
void merge_duplicate_inputs(std::vector<std::vector<double>>& xs,
                            std::vector<std::vector<double>>& ys) {
    std::map<std::vector<double>, size_t> first_at;
    std::vector<std::vector<double>> out_x, out_y;
    for (size_t r = 0; r < xs.size(); ++r) {
        auto it = first_at.find(xs[r]);
        if (it == first_at.end()) {
            first_at.emplace(xs[r], out_x.size());
            out_x.push_back(xs[r]);
            out_y.push_back(ys[r]);
            continue;
        }
        const auto& kept = out_y[it->second];
        double max_diff = 0.0;
        for (size_t c = 0; c < kept.size(); ++c)
            max_diff = std::max(max_diff, std::abs(kept[c] - ys[r][c]));
        if (max_diff > 1e-12)
            throw ValidationError("duplicate input at row " + std::to_string(r) +
                                  " has conflicting labels (max diff " +
                                  std::to_string(max_diff) + ")");
    }
    xs = std::move(out_x);
    ys = std::move(out_y);
}

LabeledDataset from_rows(std::vector<std::vector<double>> xs, std::vector<std::vector<double>> ys) {
    merge_duplicate_inputs(xs, ys);
    if (xs.empty())
        throw IoError("empty dataset");
    Eigen::MatrixXd X(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(xs[0].size()));
    Eigen::MatrixXd Y(static_cast<Eigen::Index>(ys.size()), static_cast<Eigen::Index>(ys[0].size()));
    for (size_t r = 0; r < xs.size(); ++r) {
        for (size_t c = 0; c < xs[r].size(); ++c) X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = xs[r][c];
        for (size_t c = 0; c < ys[r].size(); ++c) Y(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = ys[r][c];
    }
    return LabeledDataset::create(std::move(X), std::move(Y));
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

RiskReport empirical_risk(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& labels) {
    return make_report(predictions, labels, /*squared=*/false);
}

RiskReport squared_loss(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& labels) {
    return make_report(predictions, labels, /*squared=*/true);
}

DatasetFormat format_from_path(const std::filesystem::path& path) {
    return path.extension() == ".csv" ? DatasetFormat::Csv : DatasetFormat::Json;
}

std::string dataset_to_json_string(const LabeledDataset& dataset) {
    json j;
    j["a"] = dataset.a();
    j["b"] = dataset.b();
    json X = json::array(), Y = json::array();
    for (Eigen::Index r = 0; r < dataset.n(); ++r) {
        X.push_back(std::vector<double>(dataset.inputs.row(r).begin(), dataset.inputs.row(r).end()));
        Y.push_back(std::vector<double>(dataset.labels.row(r).begin(), dataset.labels.row(r).end()));
    }
    j["X"] = std::move(X);
    j["Y"] = std::move(Y);
    return j.dump(2);
}

LabeledDataset dataset_from_json_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw IoError(std::string("JSON parse failure: ") + e.what());
    }
    if (!j.contains("a") || !j.contains("b") || !j.contains("X") || !j.contains("Y"))
        throw IoError("dataset JSON must contain keys a, b, X, Y");
    const int a = j["a"].get<int>();
    const int b = j["b"].get<int>();
    if (a < 1 || b < 1)
        throw IoError("dataset dimensions must be >= 1");
    std::vector<std::vector<double>> xs, ys;
    for (size_t r = 0; r < j["X"].size(); ++r) {
        auto row = j["X"][r].get<std::vector<double>>();
        if (static_cast<int>(row.size()) != a)
            throw IoError("X row " + std::to_string(r) + " has " + std::to_string(row.size()) +
                          " coordinates, expected " + std::to_string(a));
        xs.push_back(std::move(row));
    }
    for (size_t r = 0; r < j["Y"].size(); ++r) {
        auto row = j["Y"][r].get<std::vector<double>>();
        if (static_cast<int>(row.size()) != b)
            throw IoError("Y row " + std::to_string(r) + " has " + std::to_string(row.size()) +
                          " coordinates, expected " + std::to_string(b));
        ys.push_back(std::move(row));
    }
    if (xs.size() != ys.size())
        throw IoError("X and Y row counts differ");
    if (xs.empty())
        throw IoError("empty dataset");
    return from_rows(std::move(xs), std::move(ys));
}

LabeledDataset load_dataset(const std::filesystem::path& path, DatasetFormat format) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::string text = buffer.str();

    if (format == DatasetFormat::Json)
        return dataset_from_json_string(text);

    // CSV with header x1..xa,y1..yb; the header carries the split between
    // input and label columns.
    std::istringstream lines(text);
    std::string line;
    if (!std::getline(lines, line) || line.empty())
        throw IoError("empty dataset");
    int a = 0, b = 0;
    {
        std::istringstream header(line);
        std::string col;
        bool in_labels = false;
        while (std::getline(header, col, ',')) {
            if (!col.empty() && col.back() == '\r') col.pop_back();
            if (col.size() >= 2 && col[0] == 'x' && !in_labels)
                ++a;
            else if (col.size() >= 2 && col[0] == 'y') {
                in_labels = true;
                ++b;
            } else
                throw IoError("CSV header column '" + col + "' must be x<i> or y<j>");
        }
    }
    if (a < 1 || b < 1)
        throw IoError("CSV header must name at least one x column and one y column");

    std::vector<std::vector<double>> xs, ys;
    size_t row_number = 1;
    while (std::getline(lines, line)) {
        ++row_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string field;
        std::vector<double> values;
        while (std::getline(fields, field, ',')) {
            try {
                size_t pos = 0;
                values.push_back(std::stod(field, &pos));
                if (pos != field.size())
                    throw std::invalid_argument(field);
            } catch (const std::exception&) {
                throw IoError("CSV row " + std::to_string(row_number) + ": cannot parse '" +
                              field + "' as a number");
            }
        }
        if (static_cast<int>(values.size()) != a + b)
            throw IoError("CSV row " + std::to_string(row_number) + " has " +
                          std::to_string(values.size()) + " columns, expected " +
                          std::to_string(a + b));
        xs.emplace_back(values.begin(), values.begin() + a);
        ys.emplace_back(values.begin() + a, values.end());
    }
    if (xs.empty())
        throw IoError("empty dataset");
    return from_rows(std::move(xs), std::move(ys));
}

LabeledDataset load_dataset(const std::filesystem::path& path) {
    return load_dataset(path, format_from_path(path));
}

void save_dataset(const LabeledDataset& dataset, const std::filesystem::path& path,
                  DatasetFormat format) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write " + path.string());
    if (format == DatasetFormat::Json) {
        out << dataset_to_json_string(dataset) << '\n';
        return;
    }
    for (int c = 0; c < dataset.a(); ++c) out << (c ? "," : "") << "x" << (c + 1);
    for (int c = 0; c < dataset.b(); ++c) out << ",y" << (c + 1);
    out << '\n';
    for (int r = 0; r < dataset.n(); ++r) {
        for (int c = 0; c < dataset.a(); ++c)
            out << (c ? "," : "") << format_double(dataset.inputs(r, c));
        for (int c = 0; c < dataset.b(); ++c)
            out << ',' << format_double(dataset.labels(r, c));
        out << '\n';
    }
}

void save_dataset(const LabeledDataset& dataset, const std::filesystem::path& path) {
    save_dataset(dataset, path, format_from_path(path));
}

} // namespace lipreg
