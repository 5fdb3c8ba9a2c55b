#include "lipreg/planar_arm.hpp"

#include "lipreg/errors.hpp"
#include "lipreg/parallel.hpp"
#include "lipreg/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace lipreg {

namespace {

constexpr double kPi = 3.14159265358979323846;

double total_length(const std::vector<double>& lengths) {
    return std::accumulate(lengths.begin(), lengths.end(), 0.0);
}

void check_config(const ArmConfig& config) {
    if (config.link_lengths.empty())
        throw ValidationError("arm needs at least one link");
    if (config.link_lengths.size() != config.joint_angles.size())
        throw ValidationError("link and angle counts differ");
    for (double len : config.link_lengths)
        if (!(len > 0.0))
            throw ValidationError("link lengths must be positive");
}

} // namespace

double normalize_angle(double theta) {
    double r = std::fmod(theta + kPi, 2.0 * kPi);
    if (r <= 0.0) r += 2.0 * kPi;
    return r - kPi;
}

std::vector<Eigen::Vector2d> forward_kinematics(const ArmConfig& config) {
    check_config(config);
    std::vector<Eigen::Vector2d> joints;
    joints.reserve(config.link_lengths.size());
    Eigen::Vector2d p(0.0, 0.0);
    double heading = 0.0;
    for (size_t i = 0; i < config.link_lengths.size(); ++i) {
        heading += config.joint_angles[i];
        p += config.link_lengths[i] * Eigen::Vector2d(std::cos(heading), std::sin(heading));
        joints.push_back(p);
    }
    return joints;
}

Eigen::Vector2d end_effector(const ArmConfig& config) {
    return forward_kinematics(config).back();
}

std::vector<Eigen::Vector2d> arm_stations(const ArmConfig& config, int stations) {
    check_config(config);
    if (stations < 1) throw ValidationError("station count must be >= 1");
    const double total = total_length(config.link_lengths);

    std::vector<Eigen::Vector2d> vertices;
    vertices.emplace_back(0.0, 0.0);
    for (const auto& joint : forward_kinematics(config)) vertices.push_back(joint);
    std::vector<double> cumulative{0.0};
    for (size_t i = 0; i < config.link_lengths.size(); ++i)
        cumulative.push_back(cumulative.back() + config.link_lengths[i]);

    std::vector<Eigen::Vector2d> points;
    points.reserve(static_cast<size_t>(stations));
    size_t seg = 0;
    for (int j = 1; j <= stations; ++j) {
        const double s = total * static_cast<double>(j) / stations;
        while (seg + 2 < cumulative.size() && cumulative[seg + 1] < s) ++seg;
        const double span = cumulative[seg + 1] - cumulative[seg];
        const double t = std::clamp((s - cumulative[seg]) / span, 0.0, 1.0);
        points.push_back(vertices[seg] + t * (vertices[seg + 1] - vertices[seg]));
    }
    return points;
}

namespace {

// Distance between corresponding arc-length stations of the two arms.
double station_objective(const std::vector<Eigen::Vector2d>& expert_stations,
                         const ArmConfig& learner, int stations) {
    const auto learner_stations = arm_stations(learner, stations);
    double sum = 0.0;
    for (size_t j = 0; j < expert_stations.size(); ++j)
        sum += (expert_stations[j] - learner_stations[j]).squaredNorm();
    return sum;
}

struct IkSolution {
    bool valid = false;
    std::vector<double> angles; // relative angles, normalized
};

// Three-link chain with the first angle fixed: the remaining two links form a
// planar 2R problem toward the target; branch picks the elbow sign.
IkSolution ik_last_two(const std::vector<double>& lengths, double theta1,
                       const Eigen::Vector2d& target, int branch) {
    const double l1 = lengths[0], l2 = lengths[1], l3 = lengths[2];
    const Eigen::Vector2d p1 = l1 * Eigen::Vector2d(std::cos(theta1), std::sin(theta1));
    const Eigen::Vector2d v = target - p1;
    const double rho = v.norm();
    IkSolution solution;
    if (rho > l2 + l3 + 1e-12 || rho < std::abs(l2 - l3) - 1e-12) return solution;

    const double cos_elbow =
        std::clamp((rho * rho - l2 * l2 - l3 * l3) / (2.0 * l2 * l3), -1.0, 1.0);
    const double elbow = (branch >= 0 ? 1.0 : -1.0) * std::acos(cos_elbow);
    const double heading2 =
        std::atan2(v.y(), v.x()) - std::atan2(l3 * std::sin(elbow), l2 + l3 * std::cos(elbow));
    solution.valid = true;
    solution.angles = {normalize_angle(theta1), normalize_angle(heading2 - theta1),
                       normalize_angle(elbow)};
    return solution;
}

// Reachable first-angle set: |theta1 - atan2(target)| in [dev_lo, dev_hi].
// The inner bound is positive when the remaining two links cannot fold short
// enough; dev_hi = 0 pins theta1 to the target bearing (fully stretched arm).
struct Theta1Window {
    double center = 0.0;
    double dev_lo = 0.0;
    double dev_hi = 0.0;
    bool reachable = false;
};

Theta1Window theta1_window(const std::vector<double>& lengths, const Eigen::Vector2d& target) {
    const double l1 = lengths[0];
    const double reach = lengths[1] + lengths[2];
    const double inner = std::abs(lengths[1] - lengths[2]);
    const double dist = target.norm();
    Theta1Window window;
    window.center = std::atan2(target.y(), target.x());
    if (dist < 1e-12) {
        // target at the base: any bearing works if the two-link ring allows it
        window.reachable = l1 <= reach + 1e-12 && l1 >= inner - 1e-12;
        window.dev_hi = kPi;
        return window;
    }
    // ||target - p1||^2 = dist^2 + l1^2 - 2 dist l1 cos(delta) must lie in
    // [inner^2, reach^2]
    const double cos_hi_dev = (dist * dist + l1 * l1 - reach * reach) / (2.0 * dist * l1);
    const double cos_lo_dev = (dist * dist + l1 * l1 - inner * inner) / (2.0 * dist * l1);
    if (cos_hi_dev > 1.0 + 1e-12 || cos_lo_dev < -1.0 - 1e-12) return window;
    window.reachable = true;
    window.dev_hi = std::acos(std::clamp(cos_hi_dev, -1.0, 1.0));
    window.dev_lo = cos_lo_dev >= 1.0 ? 0.0 : std::acos(std::clamp(cos_lo_dev, -1.0, 1.0));
    return window;
}

double clamp_to_window(double theta, const Theta1Window& window) {
    double offset = normalize_angle(theta - window.center);
    const double magnitude = std::clamp(std::abs(offset), window.dev_lo, window.dev_hi);
    if (offset == 0.0) offset = 1.0; // deterministic side for a pinned bearing
    return normalize_angle(window.center + std::copysign(magnitude, offset));
}

struct Candidate {
    std::vector<double> angles;
    double objective = std::numeric_limits<double>::infinity();
    int branch = 1;
};

bool lexicographically_less(const std::vector<double>& a, const std::vector<double>& b) {
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) return true;
        if (a[i] > b[i]) return false;
    }
    return false;
}

} // namespace

PoseFit ground_truth_pose(const ArmConfig& expert, const std::vector<double>& learner_lengths,
                          const PoseSolverOptions& options) {
    check_config(expert);
    if (learner_lengths.size() != 3)
        throw ValidationError("the pose solver expects a three-link learner");
    for (double len : learner_lengths)
        if (!(len > 0.0)) throw ValidationError("link lengths must be positive");
    if (std::abs(total_length(learner_lengths) - total_length(expert.link_lengths)) > 1e-9)
        throw ValidationError("learner and expert total lengths must match");

    const Eigen::Vector2d target = end_effector(expert);
    const auto expert_stations = arm_stations(expert, options.stations);
    const Theta1Window window = theta1_window(learner_lengths, target);
    if (!window.reachable)
        throw SolverError("expert end effector is outside the learner workspace", target.norm());

    auto objective_of = [&](const std::vector<double>& angles) {
        return station_objective(expert_stations, ArmConfig{learner_lengths, angles},
                                 options.stations);
    };
    auto resolve = [&](double theta1, int branch) {
        return ik_last_two(learner_lengths, clamp_to_window(theta1, window), target, branch);
    };

    // Penalty descent in full angle space, then exact re-projection onto the
    // end-effector manifold through the analytic two-link solve.
    auto refine = [&](Candidate candidate) {
        std::vector<double> angles = candidate.angles;
        for (double penalty : {1e4, 1e8}) {
            auto penalized = [&](const std::vector<double>& a) {
                const ArmConfig arm{learner_lengths, a};
                return station_objective(expert_stations, arm, options.stations) +
                       penalty * (end_effector(arm) - target).squaredNorm();
            };
            double value = penalized(angles);
            for (int iter = 0; iter < 25; ++iter) {
                std::vector<double> gradient(3);
                const double h = 1e-6;
                for (int d = 0; d < 3; ++d) {
                    std::vector<double> plus = angles, minus = angles;
                    plus[static_cast<size_t>(d)] += h;
                    minus[static_cast<size_t>(d)] -= h;
                    gradient[static_cast<size_t>(d)] = (penalized(plus) - penalized(minus)) / (2 * h);
                }
                double norm = std::sqrt(gradient[0] * gradient[0] + gradient[1] * gradient[1] +
                                        gradient[2] * gradient[2]);
                if (norm < 1e-10) break;
                double step = 1.0 / (1.0 + norm);
                bool moved = false;
                for (int back = 0; back < 30; ++back) {
                    std::vector<double> next = angles;
                    for (int d = 0; d < 3; ++d)
                        next[static_cast<size_t>(d)] -= step * gradient[static_cast<size_t>(d)];
                    const double next_value = penalized(next);
                    if (next_value < value - 1e-15) {
                        angles = next;
                        value = next_value;
                        moved = true;
                        break;
                    }
                    step *= 0.5;
                }
                if (!moved) break;
            }
        }
        // re-projection: keep the refined bearing, pick the elbow branch
        // closest to the refined pose
        Candidate best = candidate;
        for (int branch : {1, -1}) {
            IkSolution solution = resolve(angles[0], branch);
            if (!solution.valid) continue;
            const double value = objective_of(solution.angles);
            if (value < best.objective - 1e-12 ||
                (value < best.objective + 1e-12 &&
                 lexicographically_less(solution.angles, best.angles))) {
                best.angles = solution.angles;
                best.objective = value;
                best.branch = branch;
            }
        }
        // polish along the one-dimensional constraint manifold by
        // step-halving descent on the bearing
        double theta1 = best.angles[0];
        double step = 0.25;
        while (step > 1e-11) {
            bool moved = false;
            for (double trial : {theta1 + step, theta1 - step}) {
                IkSolution solution = resolve(trial, best.branch);
                if (!solution.valid) continue;
                const double value = objective_of(solution.angles);
                if (value < best.objective - 1e-15) {
                    best.angles = solution.angles;
                    best.objective = value;
                    theta1 = best.angles[0];
                    moved = true;
                    break;
                }
            }
            if (!moved) step *= 0.5;
        }
        return best;
    };

    // Deterministic multistart: evenly spread bearings plus the target
    // bearing itself, each resolved on both elbow branches.
    std::vector<double> starts;
    for (int s = 0; s < options.starts; ++s)
        starts.push_back(-kPi + 2.0 * kPi * static_cast<double>(s) / options.starts);
    starts.push_back(window.center);

    Candidate best;
    std::vector<std::pair<double, int>> seen; // clamped bearing x branch
    for (double theta1_raw : starts) {
        for (int branch : {1, -1}) {
            IkSolution solution = resolve(theta1_raw, branch);
            if (!solution.valid) continue;
            bool duplicate = false;
            for (auto [bearing, seen_branch] : seen)
                if (seen_branch == branch && std::abs(bearing - solution.angles[0]) < 1e-9)
                    duplicate = true;
            if (duplicate) continue;
            seen.emplace_back(solution.angles[0], branch);

            Candidate candidate;
            candidate.angles = solution.angles;
            candidate.objective = objective_of(solution.angles);
            candidate.branch = branch;
            candidate = refine(candidate);
            if (candidate.objective < best.objective - 1e-9 ||
                (candidate.objective < best.objective + 1e-9 &&
                 lexicographically_less(candidate.angles, best.angles))) {
                best = candidate;
            }
        }
    }
    if (!std::isfinite(best.objective))
        throw SolverError("no reachable learner pose found", target.norm());

    PoseFit fit;
    fit.learner = ArmConfig{learner_lengths, best.angles};
    fit.fit_residual = best.objective;
    fit.ee_error = (end_effector(fit.learner) - target).norm();
    {
        // reduced gradient: central difference along the manifold
        const double h = 1e-5;
        auto at = [&](double theta1) {
            IkSolution solution = resolve(theta1, best.branch);
            return solution.valid ? objective_of(solution.angles) : best.objective;
        };
        fit.reduced_gradient =
            window.dev_hi - window.dev_lo > 1e-12
                ? std::abs(at(best.angles[0] + h) - at(best.angles[0] - h)) / (2 * h)
                : 0.0;
    }
    if (fit.ee_error > options.ee_tol)
        throw SolverError("pose solver failed the end-effector tolerance", fit.ee_error);
    return fit;
}

GeneratedData generate_dataset(int n, std::uint64_t seed, const GenerateOptions& options) {
    if (n < 1) throw ValidationError("sample count must be >= 1");
    const size_t k = options.expert_lengths.size();

    GeneratedData out;
    out.samples.resize(static_cast<size_t>(n));
    std::vector<int> resample_counts(static_cast<size_t>(n), 0);

    parallel_for(n, options.threads, [&](int index) {
        Rng rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(index) + 1)));
        for (int attempt = 0;; ++attempt) {
            ArmConfig expert;
            expert.link_lengths = options.expert_lengths;
            expert.joint_angles.resize(k);
            for (size_t j = 0; j < k; ++j) {
                const double center =
                    j < options.angle_center.size() ? options.angle_center[j] : 0.0;
                expert.joint_angles[j] = normalize_angle(
                    rng.uniform(center - options.angle_range, center + options.angle_range));
            }
            try {
                PoseFit fit = ground_truth_pose(expert, options.learner_lengths, options.solver);
                PoseSample& sample = out.samples[static_cast<size_t>(index)];
                sample.expert_angles = Eigen::Map<const Eigen::VectorXd>(
                    expert.joint_angles.data(), static_cast<Eigen::Index>(k));
                sample.learner_angles = Eigen::Map<const Eigen::VectorXd>(
                    fit.learner.joint_angles.data(),
                    static_cast<Eigen::Index>(fit.learner.joint_angles.size()));
                sample.end_effector_point = end_effector(expert);
                sample.fit_residual = fit.fit_residual;
                resample_counts[static_cast<size_t>(index)] = attempt;
                return;
            } catch (const SolverError&) {
                if (attempt + 1 >= options.retry_cap)
                    throw SolverError("sample " + std::to_string(index) +
                                          " failed after " + std::to_string(attempt + 1) +
                                          " attempts",
                                      0.0);
            }
        }
    });

    for (int count : resample_counts) out.resamples += count;
    Eigen::MatrixXd X(n, static_cast<Eigen::Index>(k));
    Eigen::MatrixXd Y(n, static_cast<Eigen::Index>(options.learner_lengths.size()));
    for (int i = 0; i < n; ++i) {
        X.row(i) = out.samples[static_cast<size_t>(i)].expert_angles;
        Y.row(i) = out.samples[static_cast<size_t>(i)].learner_angles;
    }
    out.dataset = LabeledDataset::create(std::move(X), std::move(Y));
    return out;
}

} // namespace lipreg
