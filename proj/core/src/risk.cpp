#include "rewardlab/risk.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "rewardlab/errors.hpp"
#include "rewardlab/occupancy.hpp"
#include "rewardlab/random.hpp"

namespace rewardlab {

UtilityTransform UtilityTransform::exponential(double alpha) {
    UtilityTransform t{TransformKind::Exponential, alpha, 1.0, 0.0};
    t.validate();
    return t;
}

UtilityTransform UtilityTransform::isoelastic(double alpha) {
    UtilityTransform t{TransformKind::Isoelastic, alpha, 1.0, 0.0};
    t.validate();
    return t;
}

UtilityTransform UtilityTransform::logarithmic() {
    return UtilityTransform{TransformKind::Logarithmic, 1.0, 1.0, 0.0};
}

UtilityTransform UtilityTransform::quadratic(double alpha) {
    UtilityTransform t{TransformKind::Quadratic, alpha, 1.0, 0.0};
    t.validate();
    return t;
}

UtilityTransform UtilityTransform::affine(double b, double a) {
    UtilityTransform t{TransformKind::Affine, 1.0, b, a};
    t.validate();
    return t;
}

void UtilityTransform::validate() const {
    switch (kind) {
        case TransformKind::Exponential:
            if (!(alpha > 0.0)) throw std::invalid_argument("exponential transform needs alpha > 0");
            break;
        case TransformKind::Isoelastic:
            if (!(alpha > 0.0) || alpha == 1.0)
                throw std::invalid_argument("isoelastic transform needs alpha > 0, alpha != 1");
            break;
        case TransformKind::Quadratic:
            if (!(alpha > 0.0)) throw std::invalid_argument("quadratic transform needs alpha > 0");
            break;
        case TransformKind::Affine:
            if (!(b > 0.0)) throw std::invalid_argument("affine transform needs b > 0");
            break;
        case TransformKind::Logarithmic: break;
    }
}

const char* transform_kind_name(TransformKind kind) {
    switch (kind) {
        case TransformKind::Exponential: return "exponential";
        case TransformKind::Isoelastic: return "isoelastic";
        case TransformKind::Logarithmic: return "logarithmic";
        case TransformKind::Quadratic: return "quadratic";
        case TransformKind::Affine: return "affine";
    }
    return "affine";
}

TransformKind transform_kind_from_name(const std::string& name) {
    if (name == "exponential") return TransformKind::Exponential;
    if (name == "isoelastic") return TransformKind::Isoelastic;
    if (name == "logarithmic") return TransformKind::Logarithmic;
    if (name == "quadratic") return TransformKind::Quadratic;
    if (name == "affine") return TransformKind::Affine;
    throw ParseError("unknown transform kind: " + name);
}

namespace {

// Empty when g is admissible, otherwise the violated bound.
std::string domain_violation(const UtilityTransform& t, double g) {
    std::ostringstream msg;
    switch (t.kind) {
        case TransformKind::Isoelastic:
        case TransformKind::Logarithmic:
            if (!(g > 0.0)) {
                msg << "requires g > 0, got g = " << g;
                return msg.str();
            }
            break;
        case TransformKind::Quadratic:
            if (g > 1.0 / (2.0 * t.alpha)) {
                msg << "requires g <= 1/(2 alpha) = " << 1.0 / (2.0 * t.alpha) << ", got g = " << g;
                return msg.str();
            }
            break;
        case TransformKind::Exponential:
        case TransformKind::Affine: break;
    }
    return {};
}

} // namespace

double apply_transform(const UtilityTransform& t, double g) {
    t.validate();
    const std::string violation = domain_violation(t, g);
    if (!violation.empty())
        throw DomainError(std::string("apply_transform: ") + transform_kind_name(t.kind) + " " +
                          violation);
    switch (t.kind) {
        case TransformKind::Exponential: return -std::exp(t.alpha * g);
        case TransformKind::Isoelastic:
            return (std::pow(g, 1.0 - t.alpha) - 1.0) / (1.0 - t.alpha);
        case TransformKind::Logarithmic: return std::log(g);
        case TransformKind::Quadratic: return g - t.alpha * g * g;
        case TransformKind::Affine: return t.b * g + t.a;
    }
    return 0.0;
}

double DigitTrajectory::partial_mass(double gamma) const {
    double mass = 0.0;
    double scale = 1.0;
    for (int d : digits) {
        mass += d * scale;
        scale *= gamma;
    }
    return mass;
}

DigitTrajectory digits_base_inv_gamma(double alpha, double gamma, double epsilon) {
    if (gamma < 0.5 || gamma >= 1.0)
        throw GuardError("digits_base_inv_gamma: gamma must lie in [0.5, 1)");
    const double full = 1.0 / (1.0 - gamma);
    if (alpha < 0.0 || alpha > full)
        throw GuardError("digits_base_inv_gamma: alpha must lie in [0, 1/(1-gamma)]");
    if (!(epsilon > 0.0)) throw std::invalid_argument("digits_base_inv_gamma: epsilon must be > 0");

    const int horizon =
        std::max(1, static_cast<int>(std::ceil(std::log(epsilon * (1.0 - gamma)) / std::log(gamma))));

    DigitTrajectory out;
    out.alpha = alpha;
    out.digits.reserve(static_cast<std::size_t>(horizon));
    double remaining = alpha;
    double power = 1.0;
    for (int k = 0; k < horizon; ++k) {
        // gamma >= 0.5 makes plain greedy exact: when a digit is declined the
        // tail gamma^{k+1}/(1-gamma) >= gamma^k still covers the remainder.
        if (remaining >= power) {
            out.digits.push_back(1);
            remaining -= power;
        } else {
            out.digits.push_back(0);
        }
        power *= gamma;
    }
    return out;
}

Trajectory digit_trajectory_path(const DigitTrajectory& digit, int num_actions) {
    if (digit.transition_one < 0 || digit.transition_zero < 0)
        throw std::invalid_argument("digit_trajectory_path: transitions unset");
    auto step_of = [num_actions](int sa) {
        return std::make_pair(sa / num_actions, sa % num_actions);
    };
    Trajectory traj;
    traj.steps.reserve(digit.digits.size() + 1);
    for (int d : digit.digits)
        traj.steps.push_back(step_of(d == 1 ? digit.transition_one : digit.transition_zero));
    traj.steps.push_back(step_of(digit.transition_zero)); // zero-digit repeat tail
    traj.tail = TailRule::RepeatLast;
    return traj;
}

namespace {

std::string describe_trajectory(const Trajectory& traj) {
    std::ostringstream out;
    const std::size_t shown = std::min<std::size_t>(traj.steps.size(), 6);
    for (std::size_t i = 0; i < shown; ++i)
        out << "(" << traj.steps[i].first << "," << traj.steps[i].second << ")";
    if (traj.steps.size() > shown) out << "...";
    return out.str();
}

std::vector<Trajectory> make_probes(int num_states, int num_actions, double gamma, int random_count,
                                    std::uint64_t seed, const char* stream_name) {
    std::vector<Trajectory> probes;
    const int n = num_states * num_actions;

    for (int sa = 0; sa < n; ++sa)
        probes.push_back(Trajectory{{{sa / num_actions, sa % num_actions}}, TailRule::RepeatLast});

    if (gamma >= 0.5) {
        std::vector<std::pair<int, int>> pairs;
        if (n <= 10) {
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
        } else {
            RandomStream pair_rng = RandomStream::derive(seed, stream_name, 1);
            while (pairs.size() < 120) {
                const int i = pair_rng.next_int(n);
                const int j = pair_rng.next_int(n);
                if (i != j) pairs.emplace_back(i, j);
            }
        }
        const double full = 1.0 / (1.0 - gamma);
        for (const auto& [i, j] : pairs)
            for (double frac : {1.0 / 6, 2.0 / 6, 3.0 / 6, 4.0 / 6, 5.0 / 6}) {
                DigitTrajectory d = digits_base_inv_gamma(frac * full, gamma);
                d.transition_one = i;
                d.transition_zero = j;
                probes.push_back(digit_trajectory_path(d, num_actions));
            }
    }

    RandomStream rng = RandomStream::derive(seed, stream_name, 0);
    for (int p = 0; p < random_count; ++p) {
        Trajectory traj;
        const int length = 1 + rng.next_int(20);
        for (int step = 0; step < length; ++step)
            traj.steps.emplace_back(rng.next_int(num_states), rng.next_int(num_actions));
        traj.tail = TailRule::RepeatLast;
        probes.push_back(std::move(traj));
    }
    return probes;
}

struct LeastSquaresOutcome {
    Vec x;
    double residual_inf = 0.0;
    double lower_bound = 0.0;
};

LeastSquaresOutcome solve_probe_system(const std::vector<Trajectory>& probes,
                                       const RewardTable& r1, const UtilityTransform& t,
                                       double gamma, int num_states, int num_actions) {
    const int n = num_states * num_actions;
    Mat a(static_cast<int>(probes.size()), n);
    Vec rhs(static_cast<int>(probes.size()));
    for (std::size_t p = 0; p < probes.size(); ++p) {
        a.row(static_cast<int>(p)) =
            embed_trajectory(probes[p], gamma, num_states, num_actions).mass.transpose();
        const double g1 = trajectory_return(probes[p], r1, gamma);
        const std::string violation = domain_violation(t, g1);
        if (!violation.empty())
            throw DomainError(std::string("check_transform_realizable: ") +
                              transform_kind_name(t.kind) + " " + violation +
                              " on probe trajectory " + describe_trajectory(probes[p]));
        rhs[static_cast<int>(p)] = apply_transform(t, g1);
    }

    LeastSquaresOutcome out;
    out.x = a.colPivHouseholderQr().solve(rhs);
    const Vec r = a * out.x - rhs;
    out.residual_inf = r.lpNorm<Eigen::Infinity>();
    const double l1 = r.lpNorm<1>();
    // For any x': r is orthogonal to the column space, so
    // |r|_2^2 = |r . (rhs - A x')| <= |r|_1 |A x' - rhs|_inf.
    out.lower_bound = l1 > 1e-300 ? r.squaredNorm() / l1 : 0.0;
    return out;
}

RewardTable table_from_flat(const Vec& x, int num_states, int num_actions) {
    Mat values(num_states, num_actions);
    for (int s = 0; s < num_states; ++s)
        for (int a = 0; a < num_actions; ++a) values(s, a) = x[sa_index(s, a, num_actions)];
    return RewardTable(std::move(values));
}

} // namespace

TransformFeasibility check_transform_realizable(const TabularMdp& skeleton, const RewardTable& r1,
                                                const UtilityTransform& t, int probe_count,
                                                std::uint64_t seed) {
    t.validate();
    if (r1.num_states() != skeleton.num_states() || r1.num_actions() != skeleton.num_actions())
        throw std::invalid_argument("check_transform_realizable: reward shape mismatch");
    const int ns = skeleton.num_states();
    const int na = skeleton.num_actions();
    const double gamma = skeleton.gamma();

    TransformFeasibility result;
    result.outside_regime = gamma < 0.5;

    std::vector<Trajectory> probes = make_probes(ns, na, gamma, probe_count, seed, "risk_probes");
    LeastSquaresOutcome fit = solve_probe_system(probes, r1, t, gamma, ns, na);
    result.probe_count = static_cast<int>(probes.size());

    if (fit.residual_inf <= 1e-7) {
        const std::vector<Trajectory> holdout =
            make_probes(ns, na, gamma, 100, seed, "risk_holdout");
        double worst = 0.0;
        for (const Trajectory& traj : holdout) {
            const Vec m = embed_trajectory(traj, gamma, ns, na).mass;
            const double target = apply_transform(t, trajectory_return(traj, r1, gamma));
            worst = std::max(worst, std::abs(m.dot(fit.x) - target));
        }
        if (worst <= 1e-6) {
            result.outcome = FeasibilityOutcome::Realizable;
            result.reward = table_from_flat(fit.x, ns, na);
            result.residual = fit.residual_inf;
            result.holdout_residual = worst;
            return result;
        }
        // The training probes were too easy; refit once on the merged system.
        probes.insert(probes.end(), holdout.begin(), holdout.end());
        fit = solve_probe_system(probes, r1, t, gamma, ns, na);
        result.probe_count = static_cast<int>(probes.size());
        if (fit.residual_inf <= 1e-7) {
            result.outcome = FeasibilityOutcome::Realizable;
            result.reward = table_from_flat(fit.x, ns, na);
            result.residual = fit.residual_inf;
            result.holdout_residual = fit.residual_inf;
            return result;
        }
    }

    result.outcome = FeasibilityOutcome::Infeasible;
    result.residual = fit.residual_inf;
    result.certificate = fit.lower_bound;
    return result;
}

MonotoneScanReport monotone_consistency_scan(const RewardTable& r1, const RewardTable& r2,
                                             double gamma, int probe_count, std::uint64_t seed) {
    if (r1.num_states() != r2.num_states() || r1.num_actions() != r2.num_actions())
        throw std::invalid_argument("monotone_consistency_scan: reward shape mismatch");
    const std::vector<Trajectory> probes =
        make_probes(r1.num_states(), r1.num_actions(), gamma, probe_count, seed, "monotone_scan");

    MonotoneScanReport report;
    report.probe_count = static_cast<int>(probes.size());
    std::vector<double> g1(probes.size()), g2(probes.size());
    for (std::size_t p = 0; p < probes.size(); ++p) {
        g1[p] = trajectory_return(probes[p], r1, gamma);
        g2[p] = trajectory_return(probes[p], r2, gamma);
    }

    auto sign_of = [](double a, double b) {
        if (b - a > 1e-9) return 1;
        if (a - b > 1e-9) return -1;
        return 0;
    };
    for (std::size_t p = 0; p < probes.size(); ++p)
        for (std::size_t q = p + 1; q < probes.size(); ++q)
            if (sign_of(g1[p], g1[q]) != sign_of(g2[p], g2[q])) {
                if (report.violations == 0) {
                    report.pair_a = static_cast<int>(p);
                    report.pair_b = static_cast<int>(q);
                    report.g1_a = g1[p];
                    report.g1_b = g1[q];
                    report.g2_a = g2[p];
                    report.g2_b = g2[q];
                }
                ++report.violations;
            }
    if (report.violations > 0) return report;

    Mat a(static_cast<int>(probes.size()), 2);
    Vec rhs(static_cast<int>(probes.size()));
    for (std::size_t p = 0; p < probes.size(); ++p) {
        a(static_cast<int>(p), 0) = g1[p];
        a(static_cast<int>(p), 1) = 1.0;
        rhs[static_cast<int>(p)] = g2[p];
    }
    const Vec beta = a.colPivHouseholderQr().solve(rhs);
    report.fitted_b = beta[0];
    report.fitted_a = beta[1];
    report.residual = (a * beta - rhs).lpNorm<Eigen::Infinity>();
    return report;
}

std::string feasibility_to_json(const TransformFeasibility& feasibility) {
    nlohmann::json out;
    out["outcome"] =
        feasibility.outcome == FeasibilityOutcome::Realizable ? "Realizable" : "Infeasible";
    out["residual"] = feasibility.residual;
    out["probe_count"] = feasibility.probe_count;
    if (feasibility.outcome == FeasibilityOutcome::Infeasible)
        out["certificate"] = feasibility.certificate;
    else
        out["holdout_residual"] = feasibility.holdout_residual;
    if (feasibility.outside_regime) out["outside_regime"] = true;
    if (feasibility.reward) {
        std::vector<std::vector<double>> rows;
        for (int s = 0; s < feasibility.reward->num_states(); ++s) {
            std::vector<double> row;
            for (int a = 0; a < feasibility.reward->num_actions(); ++a)
                row.push_back((*feasibility.reward)(s, a));
            rows.push_back(std::move(row));
        }
        out["reward"] = rows;
    }
    return out.dump(2);
}

std::string scan_to_json(const MonotoneScanReport& report) {
    nlohmann::json out;
    out["outcome"] = report.violations == 0 ? "Consistent" : "Violations";
    out["probe_count"] = report.probe_count;
    out["violations"] = report.violations;
    if (report.violations == 0) {
        out["fitted_affine"] = {{"b", report.fitted_b}, {"a", report.fitted_a}};
        out["residual"] = report.residual;
    } else {
        out["violating_pair"] = {{"a", report.pair_a},
                                 {"b", report.pair_b},
                                 {"g1", {report.g1_a, report.g1_b}},
                                 {"g2", {report.g2_a, report.g2_b}}};
    }
    return out.dump(2);
}

} // namespace rewardlab
