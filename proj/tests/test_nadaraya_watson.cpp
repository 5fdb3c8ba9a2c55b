#include "lipreg/nadaraya_watson.hpp"
#include "lipreg/errors.hpp"
#include "lipreg/rng.hpp"

#include <doctest.h>

using namespace lipreg;

namespace {

LabeledDataset sample_data(Rng& rng, int n, int a, int b) {
    Eigen::MatrixXd X(n, a), Y(n, b);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < a; ++c) X(r, c) = rng.uniform(-3.0, 3.0);
        for (int c = 0; c < b; ++c) Y(r, c) = rng.uniform(-2.0, 2.0);
    }
    return LabeledDataset::create(X, Y);
}

} // namespace

TEST_CASE("tiny bandwidth concentrates on the queried training point") {
    Rng rng(3);
    LabeledDataset data = sample_data(rng, 8, 2, 2);
    double min_dist = 1e300;
    for (int i = 0; i < data.n(); ++i)
        for (int j = i + 1; j < data.n(); ++j)
            min_dist = std::min(min_dist, (data.inputs.row(i) - data.inputs.row(j)).norm());
    NwModel model = make_nw_model(data, 1e-6 * min_dist);
    for (int i = 0; i < data.n(); ++i) {
        Eigen::VectorXd y = nw_predict(model, data.inputs.row(i).transpose());
        CHECK((y - data.labels.row(i).transpose()).norm() <= 1e-9);
    }
}

TEST_CASE("huge bandwidth returns the label centroid") {
    Rng rng(5);
    LabeledDataset data = sample_data(rng, 10, 2, 2);
    double diameter = 0.0;
    for (int i = 0; i < data.n(); ++i)
        for (int j = i + 1; j < data.n(); ++j)
            diameter = std::max(diameter, (data.inputs.row(i) - data.inputs.row(j)).norm());
    NwModel model = make_nw_model(data, 1e9 * diameter);
    Eigen::VectorXd centroid = data.labels.colwise().mean().transpose();
    Eigen::VectorXd y = nw_predict(model, data.inputs.row(0).transpose());
    CHECK((y - centroid).norm() <= 1e-6);
}

TEST_CASE("two equidistant points average their labels") {
    Eigen::MatrixXd X(2, 1), Y(2, 2);
    X << -1.0, 1.0;
    Y << 0.0, 4.0, 2.0, 0.0;
    NwModel model = make_nw_model(LabeledDataset::create(X, Y), 0.7);
    Eigen::VectorXd q(1);
    q << 0.0;
    Eigen::VectorXd y = nw_predict(model, q);
    CHECK(y[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(y[1] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("predictions stay inside the label hull coordinate-wise") {
    Rng rng(7);
    LabeledDataset data = sample_data(rng, 12, 3, 2);
    NwModel model = make_nw_model(data, 0.8);
    for (int trial = 0; trial < 30; ++trial) {
        Eigen::VectorXd q(3);
        for (int c = 0; c < 3; ++c) q[c] = rng.uniform(-4.0, 4.0);
        Eigen::VectorXd y = nw_predict(model, q);
        for (int c = 0; c < 2; ++c) {
            CHECK(y[c] >= data.labels.col(c).minCoeff() - 1e-12);
            CHECK(y[c] <= data.labels.col(c).maxCoeff() + 1e-12);
        }
    }
}

TEST_CASE("prediction is invariant to training order") {
    Rng rng(9);
    LabeledDataset data = sample_data(rng, 9, 2, 1);
    Eigen::MatrixXd Xr = data.inputs.colwise().reverse().eval();
    Eigen::MatrixXd Yr = data.labels.colwise().reverse().eval();
    NwModel a = make_nw_model(data, 1.1);
    NwModel b = make_nw_model(LabeledDataset::create(Xr, Yr), 1.1);
    Eigen::VectorXd q(2);
    q << 0.3, -0.4;
    CHECK((nw_predict(a, q) - nw_predict(b, q)).norm() <= 1e-12);
}

TEST_CASE("total kernel underflow falls back to the nearest neighbor") {
    Eigen::MatrixXd X(2, 1), Y(2, 1);
    X << 0.0, 1000.0;
    Y << -7.0, 7.0;
    NwModel model = make_nw_model(LabeledDataset::create(X, Y), 1e-3);
    Eigen::VectorXd q(1);
    q << 400.0; // 4e5 bandwidths from the nearest point
    Eigen::VectorXd y = nw_predict(model, q);
    CHECK(y[0] == -7.0);
}

TEST_CASE("bandwidth must be positive") {
    Rng rng(11);
    LabeledDataset data = sample_data(rng, 4, 1, 1);
    CHECK_THROWS_AS(make_nw_model(data, 0.0), ValidationError);
}

TEST_CASE("noiseless smooth data tunes to a small bandwidth") {
    Eigen::MatrixXd X(16, 1), Y(16, 1);
    for (int r = 0; r < 16; ++r) {
        X(r, 0) = r * 0.25;
        Y(r, 0) = 2.0 * X(r, 0);
    }
    LabeledDataset data = LabeledDataset::create(X, Y);
    std::vector<double> grid = nw_default_grid(data, 12);
    const double h = nw_tune_bandwidth(data, 4, grid, 13);
    // linear data with no noise favors the narrow end of the grid
    CHECK(h <= grid[grid.size() / 2]);
}

TEST_CASE("constant labels tie toward the smallest bandwidth") {
    Eigen::MatrixXd X(8, 1), Y(8, 1);
    for (int r = 0; r < 8; ++r) {
        X(r, 0) = r;
        Y(r, 0) = 3.0;
    }
    LabeledDataset data = LabeledDataset::create(X, Y);
    std::vector<double> grid{0.5, 1.0, 2.0};
    CHECK(nw_tune_bandwidth(data, 4, grid, 1) == 0.5);
}

TEST_CASE("singleton grid is returned unchanged") {
    Rng rng(13);
    LabeledDataset data = sample_data(rng, 6, 1, 1);
    CHECK(nw_tune_bandwidth(data, 3, {0.33}, 1) == 0.33);
}
