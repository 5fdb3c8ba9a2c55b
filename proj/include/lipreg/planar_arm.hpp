#pragma once

#include "lipreg/dataset.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace lipreg {

// Planar chain anchored at the origin. Joint angles are relative: each is
// measured from the previous link's direction, so link j points along the
// cumulative sum of angles 1..j.
struct ArmConfig {
    std::vector<double> link_lengths;
    std::vector<double> joint_angles;
};

// Wrap into (-pi, pi].
double normalize_angle(double theta);

// Joint positions after each link (base excluded), so result.size() equals
// the link count and result.back() is the end effector.
std::vector<Eigen::Vector2d> forward_kinematics(const ArmConfig& config);
Eigen::Vector2d end_effector(const ArmConfig& config);

// Points at arc lengths total*j/S for j = 1..S; the shared base is excluded.
std::vector<Eigen::Vector2d> arm_stations(const ArmConfig& config, int stations = 20);

struct PoseFit {
    ArmConfig learner;
    double fit_residual = 0.0;     // station objective at the optimum
    double ee_error = 0.0;         // ||learner EE - expert EE||
    double reduced_gradient = 0.0; // objective derivative along the EE manifold
};

struct PoseSolverOptions {
    int stations = 20;   // arc-length sample count for the objective
    int starts = 8;      // deterministic first-angle multistart
    double ee_tol = 1e-6;
};

// Ground-truth learner pose for an expert configuration: equal total length,
// coincident end effectors, minimal summed squared distance between
// arc-length-corresponding points of the two arms. The last two learner
// angles are resolved analytically from the end-effector constraint; the
// remaining freedom is searched by multistart and refined by penalty descent.
PoseFit ground_truth_pose(const ArmConfig& expert, const std::vector<double>& learner_lengths,
                          const PoseSolverOptions& options = {});

struct PoseSample {
    Eigen::VectorXd expert_angles;
    Eigen::VectorXd learner_angles;
    Eigen::Vector2d end_effector_point;
    double fit_residual = 0.0;
};

struct GenerateOptions {
    std::vector<double> expert_lengths{0.6, 0.6, 0.6, 0.6, 0.6};
    std::vector<double> learner_lengths{1.0, 1.0, 1.0};
    // Expert joint angle j is drawn uniformly from
    // angle_center[j] +/- angle_range. Sampling the full circle makes the
    // pose map jump at every angle wrap and every elbow flip of the
    // ground-truth optimizer, which buries the local structure regression
    // needs; the default curls the expert consistently to one side so the
    // sampled region stays inside a single smooth branch of the pose map.
    std::vector<double> angle_center{0.0, 0.5, 0.5, 0.5, 0.5};
    double angle_range = 0.3;
    PoseSolverOptions solver;
    int retry_cap = 16;
    int threads = 1;
};

struct GeneratedData {
    LabeledDataset dataset; // inputs: expert angles, labels: learner angles
    std::vector<PoseSample> samples;
    int resamples = 0; // ground-truth failures recovered by redrawing
};

// Reproducible from the seed: per-sample seeds are derived by index, so any
// thread count produces bit-identical data.
GeneratedData generate_dataset(int n, std::uint64_t seed, const GenerateOptions& options = {});

} // namespace lipreg
