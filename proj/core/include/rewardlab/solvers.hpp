#pragma once

#include <cstdint>
#include <vector>

#include "rewardlab/mdp.hpp"
#include "rewardlab/objectives.hpp"
#include "rewardlab/types.hpp"

namespace rewardlab {

/// Iteration trace of an iterative solver. Wall time is informational only and
/// never serialized into reproducible payloads.
struct SolveReport {
    int iterations = 0;
    double final_residual = 0.0;
    double wall_time_sec = 0.0;
    std::vector<double> objective_trace;
    std::vector<double> residual_trace;
};

struct OptimalSolution {
    ValueTables tables;        // V*, Q*, J*
    StationaryPolicy greedy;   // argmax ties broken by lowest action index
    SolveReport report;
};

/**
 * Value iteration to sup-norm residual below tol (default 1e-10), then greedy
 * extraction. The returned tables satisfy the Bellman optimality equation to
 * within 1e-9.
 */
OptimalSolution optimal_values(const TabularMdp& mdp, const RewardTable& reward,
                               double tol = 1e-10, int max_iterations = 2'000'000);

/// Row-softmax policy parameterization. Stable per-row exponentials.
struct SoftmaxPolicyParams {
    Mat theta; // |S| x |A| logits

    StationaryPolicy policy() const;
    static SoftmaxPolicyParams zeros(int num_states, int num_actions);
    static SoftmaxPolicyParams random(int num_states, int num_actions, double scale,
                                      std::uint64_t seed);
};

/**
 * Exact per-reward policy gradient: for each reward i, the |S| x |A| matrix of
 * dJ_i / dtheta computed from the closed form d(s) pi(a|s) (Q_i(s,a) - V_i(s))
 * with d the discounted state occupancy. No sampling, no finite differences.
 */
std::vector<Mat> j_gradient(const Momdp& momdp, const SoftmaxPolicyParams& params);

struct AscentRule {
    double initial_step = 0.1;
    double backtrack_factor = 0.5;
    int max_halvings = 30;
};

struct MorlSolution {
    SoftmaxPolicyParams params;
    Vec j;            // final per-reward returns
    double utility;   // final smoothed-objective value
    SolveReport report;
};

/**
 * Gradient ascent on a differentiable objective utility over softmax policy
 * parameters. The total gradient chains utility_gradient through j_gradient;
 * a backtracking line search (halving, bounded) keeps the utility trace
 * non-decreasing. Deterministic given the initial point.
 */
MorlSolution solve_differentiable_morl(const Momdp& momdp, const ObjectiveSpec& spec,
                                       const SoftmaxPolicyParams& init, int steps,
                                       const AscentRule& rule = {});

/// Best-of-n restart wrapper with seeded random initial logits.
MorlSolution solve_differentiable_morl_multistart(const Momdp& momdp, const ObjectiveSpec& spec,
                                                  int restarts, int steps, std::uint64_t seed,
                                                  const AscentRule& rule = {});

} // namespace rewardlab
