#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rewardlab/types.hpp"

namespace rewardlab {

/// A scalar reward table over state-action pairs.
class RewardTable {
public:
    RewardTable() = default;
    explicit RewardTable(Mat values);

    int num_states() const { return static_cast<int>(values_.rows()); }
    int num_actions() const { return static_cast<int>(values_.cols()); }
    double operator()(int s, int a) const { return values_(s, a); }
    double& operator()(int s, int a) { return values_(s, a); }
    const Mat& values() const { return values_; }

    // Flat view in sa_index order, the dot-product partner of occupancy vectors.
    Vec flat() const;

private:
    Mat values_;
};

/**
 * Finite discounted MDP without a reward function: states, actions, transition
 * kernel, initial distribution and discount.
 *
 * The transition kernel is stored as an (|S|*|A|) x |S| matrix whose row
 * sa_index(s,a) holds the distribution over successor states. Construction
 * validates row-stochasticity and the initial distribution to 1e-12 and the
 * discount to [0, 1).
 */
class TabularMdp {
public:
    TabularMdp(std::vector<std::string> states, std::vector<std::string> actions,
               Mat transition, Vec initial, double gamma);

    int num_states() const { return static_cast<int>(states_.size()); }
    int num_actions() const { return static_cast<int>(actions_.size()); }
    int num_pairs() const { return num_states() * num_actions(); }
    double gamma() const { return gamma_; }
    const Vec& initial() const { return initial_; }
    const Mat& transition() const { return transition_; }
    const std::vector<std::string>& state_names() const { return states_; }
    const std::vector<std::string>& action_names() const { return actions_; }

    // Distribution over successors of (s, a), as a row expression.
    auto successor_row(int s, int a) const { return transition_.row(sa_index(s, a, num_actions())); }

    // Replaces the transition kernel (same shape), revalidating stochasticity.
    TabularMdp with_transition(Mat transition) const;
    TabularMdp with_gamma(double gamma) const;

private:
    std::vector<std::string> states_;
    std::vector<std::string> actions_;
    Mat transition_; // (|S|*|A|) x |S|
    Vec initial_;
    double gamma_;
};

/// An MDP skeleton paired with k >= 1 reward tables of matching shape.
class Momdp {
public:
    Momdp(TabularMdp mdp, std::vector<RewardTable> rewards);

    const TabularMdp& mdp() const { return mdp_; }
    const std::vector<RewardTable>& rewards() const { return rewards_; }
    int num_rewards() const { return static_cast<int>(rewards_.size()); }

private:
    TabularMdp mdp_;
    std::vector<RewardTable> rewards_;
};

/// Row-stochastic stationary policy; rows are per-state action distributions.
class StationaryPolicy {
public:
    StationaryPolicy() = default;
    explicit StationaryPolicy(Mat action_probs);

    static StationaryPolicy uniform(int num_states, int num_actions);
    static StationaryPolicy deterministic(const std::vector<int>& actions, int num_actions);

    int num_states() const { return static_cast<int>(probs_.rows()); }
    int num_actions() const { return static_cast<int>(probs_.cols()); }
    double operator()(int s, int a) const { return probs_(s, a); }
    const Mat& probs() const { return probs_; }

    // True when every row puts all mass on one action.
    bool is_deterministic(double tol = 1e-12) const;

private:
    Mat probs_;
};

enum class TailRule { RepeatLast, ZeroAfter };

/// Finite transition prefix plus a tail rule fixing the infinite remainder.
struct Trajectory {
    std::vector<std::pair<int, int>> steps; // (state, action), at least one
    TailRule tail = TailRule::RepeatLast;
};

/// Exact evaluation artifacts of one (policy, reward) pair.
struct ValueTables {
    Vec v;    // state values
    Mat q;    // state-action values
    double j; // initial-distribution-weighted return
};

// P_pi and R_pi, the policy-averaged kernel (|S| x |S|) and reward (|S|).
Mat policy_transition_matrix(const TabularMdp& mdp, const StationaryPolicy& policy);
Vec policy_reward_vector(const RewardTable& reward, const StationaryPolicy& policy);

/**
 * Exact policy evaluation by direct linear solve of (I - gamma P_pi) V = R_pi.
 *
 * Returns V, Q and J with residual below 1e-10; a residual above that signals a
 * corrupted system and raises SolverError (the matrix is nonsingular for any
 * stochastic P_pi and gamma < 1).
 */
ValueTables evaluate_policy(const TabularMdp& mdp, const RewardTable& reward,
                            const StationaryPolicy& policy);

/**
 * Discounted return of a trajectory: sum of gamma^t r(s_t, a_t) over the prefix
 * plus the tail in closed form (RepeatLast: gamma^T r_last / (1 - gamma);
 * ZeroAfter: nothing).
 */
double trajectory_return(const Trajectory& traj, const RewardTable& reward, double gamma);

enum class RewardRelation { Trivial1, Trivial2, Equivalent, Opposite, Unrelated };

/**
 * Classifies how two rewards order policies on one skeleton.
 *
 * J_1 and J_2 are computed over the full deterministic-policy enumeration
 * (guarded at 2^20 policies) plus seeded random stochastic policies; the
 * relation is decided from the induced orderings with a 1e-9 tie band.
 * A reward whose J is constant across the sample is reported trivial
 * (Trivial1 checked first).
 */
RewardRelation reward_relation(const TabularMdp& mdp, const RewardTable& r1,
                               const RewardTable& r2, int random_policies = 100,
                               std::uint64_t seed = 0);

/**
 * The zero/minus-one reward whose optimal policies are exactly those acting
 * inside the given per-state action sets: r(s, a) = 0 if a is listed for s,
 * else -1. Every state must list at least one action.
 */
RewardTable reward_from_optimal_set(const TabularMdp& mdp,
                                    const std::vector<std::vector<int>>& optimal_actions);

/**
 * Per-state sets of optimal actions of a reward: argmax_a Q*(s, a) with a 1e-9
 * band below the per-state maximum. Inverse direction of reward_from_optimal_set.
 */
std::vector<std::vector<int>> optimal_action_map(const TabularMdp& mdp, const RewardTable& reward);

// Enumerates all deterministic policies (odometer order, action of state 0
// fastest). Throws GuardError beyond 2^20 policies.
std::vector<StationaryPolicy> enumerate_deterministic_policies(int num_states, int num_actions);

} // namespace rewardlab
