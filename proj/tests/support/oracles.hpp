#pragma once

// Independent oracles and shared fixtures for the test suite. Everything here
// re-derives its answer from first principles (Monte-Carlo rollouts, policy
// iteration, graph search, finite differences) so library results are checked
// against code that shares no internals with them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rewardlab/harness.hpp"
#include "rewardlab/mdp.hpp"
#include "rewardlab/modal.hpp"
#include "rewardlab/random.hpp"
#include "rewardlab/solvers.hpp"
#include "rewardlab/types.hpp"

namespace testlab {

using rewardlab::Mat;
using rewardlab::Vec;

// ---------------------------------------------------------------------------
// Monte-Carlo policy evaluation.

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

// Samples `rollouts` trajectories of `horizon` steps and averages the
// discounted returns. Sampling is inverse-CDF over precomputed cumulative
// rows, so a million rollouts stay cheap.
inline McEstimate mc_return(const rewardlab::TabularMdp& mdp, const rewardlab::RewardTable& reward,
                            const rewardlab::StationaryPolicy& policy, int rollouts, int horizon,
                            std::uint64_t seed) {
    const int ns = mdp.num_states();
    const int na = mdp.num_actions();

    auto cumulative = [](const Vec& row) {
        std::vector<double> c(static_cast<std::size_t>(row.size()));
        double total = 0.0;
        for (int i = 0; i < row.size(); ++i) {
            total += row[i];
            c[static_cast<std::size_t>(i)] = total;
        }
        c.back() = 1.0; // guard against trailing round-off
        return c;
    };
    auto pick = [](const std::vector<double>& cdf, double u) {
        return static_cast<int>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    };

    const std::vector<double> init_cdf = cumulative(mdp.initial());
    std::vector<std::vector<double>> policy_cdf;
    policy_cdf.reserve(static_cast<std::size_t>(ns));
    for (int s = 0; s < ns; ++s) policy_cdf.push_back(cumulative(policy.probs().row(s)));
    std::vector<std::vector<double>> step_cdf;
    step_cdf.reserve(static_cast<std::size_t>(ns * na));
    for (int row = 0; row < ns * na; ++row) step_cdf.push_back(cumulative(mdp.transition().row(row)));

    rewardlab::RandomStream rng(seed);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int r = 0; r < rollouts; ++r) {
        int s = pick(init_cdf, rng.next_double());
        double g = 0.0;
        double discount = 1.0;
        for (int t = 0; t < horizon; ++t) {
            const int a = pick(policy_cdf[static_cast<std::size_t>(s)], rng.next_double());
            g += discount * reward(s, a);
            discount *= mdp.gamma();
            s = pick(step_cdf[static_cast<std::size_t>(rewardlab::sa_index(s, a, na))],
                     rng.next_double());
        }
        sum += g;
        sum_sq += g * g;
    }
    McEstimate est;
    est.mean = sum / rollouts;
    const double var = std::max(0.0, sum_sq / rollouts - est.mean * est.mean);
    est.std_error = std::sqrt(var / rollouts);
    return est;
}

// ---------------------------------------------------------------------------
// Policy iteration (Howard), an exact oracle independent of value iteration.

struct PolicyIterationResult {
    Vec v;
    std::vector<int> actions;
};

inline PolicyIterationResult policy_iteration(const rewardlab::TabularMdp& mdp,
                                              const rewardlab::RewardTable& reward) {
    const int ns = mdp.num_states();
    const int na = mdp.num_actions();
    std::vector<int> actions(static_cast<std::size_t>(ns), 0);
    Vec v = Vec::Zero(ns);

    for (int sweep = 0; sweep < 1000; ++sweep) {
        // Evaluate the current deterministic policy by direct solve.
        Mat p = Mat::Zero(ns, ns);
        Vec r = Vec::Zero(ns);
        for (int s = 0; s < ns; ++s) {
            const int a = actions[static_cast<std::size_t>(s)];
            p.row(s) = mdp.successor_row(s, a);
            r[s] = reward(s, a);
        }
        v = (Mat::Identity(ns, ns) - mdp.gamma() * p).partialPivLu().solve(r);

        bool stable = true;
        for (int s = 0; s < ns; ++s) {
            int best = 0;
            double best_q = -std::numeric_limits<double>::infinity();
            for (int a = 0; a < na; ++a) {
                const double q = reward(s, a) + mdp.gamma() * mdp.successor_row(s, a).dot(v);
                if (q > best_q + 1e-12) {
                    best_q = q;
                    best = a;
                }
            }
            if (best != actions[static_cast<std::size_t>(s)]) {
                actions[static_cast<std::size_t>(s)] = best;
                stable = false;
            }
        }
        if (stable) break;
    }
    return {std::move(v), std::move(actions)};
}

// ---------------------------------------------------------------------------
// Graph search: states from which `target` is reachable in the support graph.

inline std::vector<bool> bfs_can_reach(const Mat& transition, int num_actions, int target) {
    const int ns = static_cast<int>(transition.cols());
    // Reverse adjacency: predecessors[s'] lists every s with an action edge
    // s -> s'.
    std::vector<std::vector<int>> predecessors(static_cast<std::size_t>(ns));
    for (int s = 0; s < ns; ++s)
        for (int a = 0; a < num_actions; ++a) {
            const auto row = transition.row(rewardlab::sa_index(s, a, num_actions));
            for (int next = 0; next < ns; ++next)
                if (row[next] > 0.0) predecessors[static_cast<std::size_t>(next)].push_back(s);
        }

    std::vector<bool> reach(static_cast<std::size_t>(ns), false);
    std::deque<int> queue{target};
    reach[static_cast<std::size_t>(target)] = true;
    while (!queue.empty()) {
        const int s = queue.front();
        queue.pop_front();
        for (int pred : predecessors[static_cast<std::size_t>(s)])
            if (!reach[static_cast<std::size_t>(pred)]) {
                reach[static_cast<std::size_t>(pred)] = true;
                queue.push_back(pred);
            }
    }
    return reach;
}

// BFS distance from every state to `target` along forward edges (|S| when
// unreachable).
inline std::vector<int> bfs_distance_to(const Mat& transition, int num_actions, int target) {
    const int ns = static_cast<int>(transition.cols());
    std::vector<int> dist(static_cast<std::size_t>(ns), ns);
    const std::vector<bool> reach = bfs_can_reach(transition, num_actions, target);
    dist[static_cast<std::size_t>(target)] = 0;
    // Bellman-Ford style relaxation over the support graph; fine at test sizes.
    for (int round = 0; round < ns; ++round)
        for (int s = 0; s < ns; ++s)
            for (int a = 0; a < num_actions; ++a) {
                const auto row = transition.row(rewardlab::sa_index(s, a, num_actions));
                for (int next = 0; next < ns; ++next)
                    if (row[next] > 0.0 && reach[static_cast<std::size_t>(s)] && s != target)
                        dist[static_cast<std::size_t>(s)] = std::min(
                            dist[static_cast<std::size_t>(s)], dist[static_cast<std::size_t>(next)] + 1);
            }
    return dist;
}

// ---------------------------------------------------------------------------
// Finite differences.

// Central difference of J_i with respect to theta(s, a).
inline double fd_j_coordinate(const rewardlab::Momdp& momdp,
                              const rewardlab::SoftmaxPolicyParams& params, int reward_index,
                              int s, int a, double h = 1e-5) {
    auto j_at = [&](double offset) {
        rewardlab::SoftmaxPolicyParams shifted = params;
        shifted.theta(s, a) += offset;
        return rewardlab::evaluate_policy(momdp.mdp(), momdp.rewards()[static_cast<std::size_t>(
                                              reward_index)],
                                          shifted.policy())
            .j;
    };
    return (j_at(h) - j_at(-h)) / (2.0 * h);
}

// ---------------------------------------------------------------------------
// Fixtures.

// The two-armed bandit: one state, self-loop actions, gamma 0.5, rewards
// R1 = [1, 0] and R2 = [0, 1]. J1 = 2p, J2 = 2 - 2p for pi(a1) = p.
inline rewardlab::Momdp bandit_momdp() {
    Mat transition(2, 1);
    transition << 1.0, 1.0;
    Vec initial(1);
    initial << 1.0;
    rewardlab::TabularMdp mdp({"s0"}, {"a1", "a2"}, transition, initial, 0.5);
    Mat r1(1, 2), r2(1, 2);
    r1 << 1.0, 0.0;
    r2 << 0.0, 1.0;
    return rewardlab::Momdp(std::move(mdp),
                            {rewardlab::RewardTable(r1), rewardlab::RewardTable(r2)});
}

inline rewardlab::Momdp random_momdp(std::uint64_t seed, int states, int actions, int rewards,
                                     double gamma_lo = 0.5, double gamma_hi = 0.95) {
    rewardlab::RandomInstanceSpec spec;
    spec.states = states;
    spec.actions = actions;
    spec.rewards = rewards;
    spec.gamma_lo = gamma_lo;
    spec.gamma_hi = gamma_hi;
    spec.seed = seed;
    return rewardlab::generate_random_instance(spec);
}

inline rewardlab::StationaryPolicy random_policy(int states, int actions, std::uint64_t seed) {
    rewardlab::RandomStream rng = rewardlab::RandomStream::derive(seed, "test_policy", 0);
    Mat probs(states, actions);
    for (int s = 0; s < states; ++s) {
        const std::vector<double> row = rng.dirichlet(actions);
        for (int a = 0; a < actions; ++a) probs(s, a) = row[static_cast<std::size_t>(a)];
    }
    return rewardlab::StationaryPolicy(probs);
}

// Deterministic corridor 0..5 with a one-way door between 2 and 3: moving
// right at 2 enters 3, but moving left at 3 stays at 3. Action 0 = left,
// action 1 = right.
inline rewardlab::TabularMdp door_corridor_mdp(double gamma = 0.9) {
    const int ns = 6;
    const int na = 2;
    Mat transition = Mat::Zero(ns * na, ns);
    for (int s = 0; s < ns; ++s) {
        int left = std::max(s - 1, 0);
        if (s == 3) left = 3; // the door does not open backwards
        const int right = std::min(s + 1, ns - 1);
        transition(rewardlab::sa_index(s, 0, na), left) = 1.0;
        transition(rewardlab::sa_index(s, 1, na), right) = 1.0;
    }
    const Vec initial = Vec::Constant(ns, 1.0 / ns);
    return rewardlab::TabularMdp({"c0", "c1", "c2", "c3", "c4", "c5"}, {"left", "right"},
                                 transition, initial, gamma);
}

// Base reward for the corridor: a modest income at the left wall and a large
// one at the far right, so the base-optimal policy crosses the door while a
// start-reachability gate should keep the agent left of it.
inline rewardlab::RewardTable door_corridor_base_reward() {
    Mat base = Mat::Zero(6, 2);
    base(0, 0) = 0.2; // left at the wall: stay home income
    base(4, 1) = 1.0; // entering c5
    base(5, 0) = 1.0; // c5 self area keeps paying
    base(5, 1) = 1.0;
    return rewardlab::RewardTable(base);
}

// Reach-the-start affordance: reward 1 on every transition that enters c0.
inline rewardlab::Affordance reach_start_affordance(const rewardlab::TabularMdp& mdp,
                                                    double discount = 0.9) {
    Mat reward = Mat::Zero(mdp.num_states(), mdp.num_actions());
    for (int s = 0; s < mdp.num_states(); ++s)
        for (int a = 0; a < mdp.num_actions(); ++a)
            reward(s, a) = mdp.successor_row(s, a)[0]; // probability of entering c0
    return rewardlab::Affordance{rewardlab::RewardTable(reward), discount};
}

// One-way-door affordance MDP with the tanh gate: rewards beyond the door are
// multiplied by tanh(V1*) = 0, so the modal optimum never crosses.
inline rewardlab::AffordanceMdp door_affordance_mdp() {
    rewardlab::TabularMdp mdp = door_corridor_mdp();
    rewardlab::ModalForm form;
    form.kind = rewardlab::ModalFormKind::TanhGate;
    form.base_reward = door_corridor_base_reward();
    form.affordance_index = 0;
    return rewardlab::AffordanceMdp(mdp, {reach_start_affordance(mdp)}, form);
}

// Two-kernel family on which no fixed reward reproduces both contingent
// orderings of a reachability-penalty modal reward. State 0 is the hub,
// state 1 the den; the "back" action at the den leads home under kernel A
// and is walled off under kernel B, flipping whether the den is penalized
// while the stay-home and jump-and-loop policies keep identical occupancies.
struct VacuousnessFixture {
    rewardlab::TabularMdp base;
    std::vector<Mat> family;
    rewardlab::ModalReward modal;
};

inline VacuousnessFixture reachability_flip_fixture() {
    const int ns = 2;
    const int na = 2; // action 0: stay/back, action 1: jump/loop
    Mat tau_a = Mat::Zero(ns * na, ns);
    tau_a(rewardlab::sa_index(0, 0, na), 0) = 1.0; // stay at hub
    tau_a(rewardlab::sa_index(0, 1, na), 1) = 1.0; // jump to den
    tau_a(rewardlab::sa_index(1, 0, na), 0) = 1.0; // back home
    tau_a(rewardlab::sa_index(1, 1, na), 1) = 1.0; // loop in den
    Mat tau_b = tau_a;
    tau_b.row(rewardlab::sa_index(1, 0, na)).setZero();
    tau_b(rewardlab::sa_index(1, 0, na), 1) = 1.0; // door sealed: back loops

    Vec initial(2);
    initial << 1.0, 0.0;
    rewardlab::TabularMdp base({"hub", "den"}, {"back", "loop"}, tau_a, initial, 0.5);

    Mat reward(2, 2);
    reward << 0.4, 0.0, // hub: staying pays a little, jumping nothing
        1.0, 1.0;       // den: both actions pay well
    rewardlab::ModalReward modal =
        rewardlab::ModalReward::reachability_penalty(rewardlab::RewardTable(reward), 0, -1.0);
    return {std::move(base), {tau_a, tau_b}, std::move(modal)};
}

// 5x5 deterministic gridworld: actions up/down/left/right with wall clamping,
// reward 1 on entering the far corner, uniform starts.
inline rewardlab::TabularMdp grid5_mdp(double gamma = 0.9) {
    const int side = 5;
    const int ns = side * side;
    const int na = 4;
    Mat transition = Mat::Zero(ns * na, ns);
    auto at = [side](int r, int c) { return r * side + c; };
    for (int r = 0; r < side; ++r)
        for (int c = 0; c < side; ++c) {
            const int s = at(r, c);
            const int up = at(std::max(r - 1, 0), c);
            const int down = at(std::min(r + 1, side - 1), c);
            const int left = at(r, std::max(c - 1, 0));
            const int right = at(r, std::min(c + 1, side - 1));
            transition(rewardlab::sa_index(s, 0, na), up) = 1.0;
            transition(rewardlab::sa_index(s, 1, na), down) = 1.0;
            transition(rewardlab::sa_index(s, 2, na), left) = 1.0;
            transition(rewardlab::sa_index(s, 3, na), right) = 1.0;
        }
    std::vector<std::string> states;
    states.reserve(static_cast<std::size_t>(ns));
    for (int s = 0; s < ns; ++s) states.push_back("g" + std::to_string(s));
    return rewardlab::TabularMdp(std::move(states), {"up", "down", "left", "right"}, transition,
                                 Vec::Constant(ns, 1.0 / ns), gamma);
}

inline rewardlab::RewardTable grid5_goal_reward(const rewardlab::TabularMdp& grid) {
    const int goal = grid.num_states() - 1;
    Mat reward = Mat::Zero(grid.num_states(), grid.num_actions());
    for (int s = 0; s < grid.num_states(); ++s)
        for (int a = 0; a < grid.num_actions(); ++a) reward(s, a) = grid.successor_row(s, a)[goal];
    return rewardlab::RewardTable(reward);
}

// ---------------------------------------------------------------------------
// Small helpers.

inline std::string join_failures(const std::vector<std::string>& failures) {
    std::string out;
    for (const std::string& f : failures) {
        if (!out.empty()) out += "; ";
        out += f;
    }
    return out;
}

} // namespace testlab
