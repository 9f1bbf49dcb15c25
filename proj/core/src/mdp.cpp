#include "rewardlab/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "rewardlab/errors.hpp"
#include "rewardlab/random.hpp"
#include "rewardlab/solvers.hpp"

namespace rewardlab {

namespace {

constexpr double kStochasticTol = 1e-12;
constexpr double kTieTol = 1e-9;
constexpr std::uint64_t kEnumerationGuard = 1ULL << 20;

void check_distribution(const Eigen::Ref<const Vec>& p, const char* what) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p[i] < -kStochasticTol)
            throw std::invalid_argument(std::string(what) + ": negative probability");
        total += p[i];
    }
    if (std::abs(total - 1.0) > kStochasticTol)
        throw std::invalid_argument(std::string(what) + ": probabilities sum to " + std::to_string(total));
}

} // namespace

RewardTable::RewardTable(Mat values) : values_(std::move(values)) {
    if (values_.size() == 0) throw std::invalid_argument("RewardTable: empty table");
    if (!values_.allFinite()) throw std::invalid_argument("RewardTable: non-finite entry");
}

Vec RewardTable::flat() const {
    Vec out(values_.size());
    const int actions = num_actions();
    for (int s = 0; s < num_states(); ++s)
        for (int a = 0; a < actions; ++a) out[sa_index(s, a, actions)] = values_(s, a);
    return out;
}

TabularMdp::TabularMdp(std::vector<std::string> states, std::vector<std::string> actions,
                       Mat transition, Vec initial, double gamma)
    : states_(std::move(states)), actions_(std::move(actions)),
      transition_(std::move(transition)), initial_(std::move(initial)), gamma_(gamma) {
    const int s_count = num_states();
    const int a_count = num_actions();
    if (s_count == 0 || a_count == 0)
        throw std::invalid_argument("TabularMdp: needs at least one state and one action");
    if (transition_.rows() != s_count * a_count || transition_.cols() != s_count)
        throw std::invalid_argument("TabularMdp: transition shape mismatch");
    if (initial_.size() != s_count)
        throw std::invalid_argument("TabularMdp: initial distribution shape mismatch");
    if (!(gamma_ >= 0.0 && gamma_ < 1.0))
        throw std::invalid_argument("TabularMdp: gamma must lie in [0, 1)");
    if (!transition_.allFinite())
        throw std::invalid_argument("TabularMdp: non-finite transition entry");
    for (int r = 0; r < transition_.rows(); ++r)
        check_distribution(transition_.row(r).transpose(), "TabularMdp transition row");
    check_distribution(initial_, "TabularMdp initial distribution");
}

TabularMdp TabularMdp::with_transition(Mat transition) const {
    return TabularMdp(states_, actions_, std::move(transition), initial_, gamma_);
}

TabularMdp TabularMdp::with_gamma(double gamma) const {
    return TabularMdp(states_, actions_, transition_, initial_, gamma);
}

Momdp::Momdp(TabularMdp mdp, std::vector<RewardTable> rewards)
    : mdp_(std::move(mdp)), rewards_(std::move(rewards)) {
    if (rewards_.empty()) throw std::invalid_argument("Momdp: needs at least one reward");
    for (const RewardTable& r : rewards_)
        if (r.num_states() != mdp_.num_states() || r.num_actions() != mdp_.num_actions())
            throw std::invalid_argument("Momdp: reward shape mismatch");
}

StationaryPolicy::StationaryPolicy(Mat action_probs) : probs_(std::move(action_probs)) {
    if (probs_.size() == 0) throw std::invalid_argument("StationaryPolicy: empty");
    if (!probs_.allFinite()) throw std::invalid_argument("StationaryPolicy: non-finite entry");
    for (int s = 0; s < probs_.rows(); ++s)
        check_distribution(probs_.row(s).transpose(), "StationaryPolicy row");
}

StationaryPolicy StationaryPolicy::uniform(int num_states, int num_actions) {
    return StationaryPolicy(Mat::Constant(num_states, num_actions, 1.0 / num_actions));
}

StationaryPolicy StationaryPolicy::deterministic(const std::vector<int>& actions, int num_actions) {
    Mat probs = Mat::Zero(static_cast<int>(actions.size()), num_actions);
    for (int s = 0; s < probs.rows(); ++s) {
        if (actions[s] < 0 || actions[s] >= num_actions)
            throw std::invalid_argument("StationaryPolicy: action index out of range");
        probs(s, actions[s]) = 1.0;
    }
    return StationaryPolicy(std::move(probs));
}

bool StationaryPolicy::is_deterministic(double tol) const {
    for (int s = 0; s < probs_.rows(); ++s)
        if (probs_.row(s).maxCoeff() < 1.0 - tol) return false;
    return true;
}

Mat policy_transition_matrix(const TabularMdp& mdp, const StationaryPolicy& policy) {
    const int s_count = mdp.num_states();
    const int a_count = mdp.num_actions();
    if (policy.num_states() != s_count || policy.num_actions() != a_count)
        throw std::invalid_argument("policy_transition_matrix: policy shape mismatch");
    Mat p = Mat::Zero(s_count, s_count);
    for (int s = 0; s < s_count; ++s)
        for (int a = 0; a < a_count; ++a)
            if (policy(s, a) != 0.0) p.row(s) += policy(s, a) * mdp.successor_row(s, a);
    return p;
}

Vec policy_reward_vector(const RewardTable& reward, const StationaryPolicy& policy) {
    if (policy.num_states() != reward.num_states() || policy.num_actions() != reward.num_actions())
        throw std::invalid_argument("policy_reward_vector: shape mismatch");
    return (reward.values().array() * policy.probs().array()).rowwise().sum();
}

ValueTables evaluate_policy(const TabularMdp& mdp, const RewardTable& reward,
                            const StationaryPolicy& policy) {
    if (reward.num_states() != mdp.num_states() || reward.num_actions() != mdp.num_actions())
        throw std::invalid_argument("evaluate_policy: reward shape mismatch");
    const int s_count = mdp.num_states();
    const int a_count = mdp.num_actions();
    const Mat p_pi = policy_transition_matrix(mdp, policy);
    const Vec r_pi = policy_reward_vector(reward, policy);

    Mat system = Mat::Identity(s_count, s_count) - mdp.gamma() * p_pi;
    Vec v = system.partialPivLu().solve(r_pi);
    if ((system * v - r_pi).lpNorm<Eigen::Infinity>() > 1e-10)
        throw SolverError("evaluate_policy: linear solve residual exceeds 1e-10");

    ValueTables out;
    out.v = v;
    out.q = Mat(s_count, a_count);
    for (int s = 0; s < s_count; ++s)
        for (int a = 0; a < a_count; ++a)
            out.q(s, a) = reward(s, a) + mdp.gamma() * mdp.successor_row(s, a).dot(v);
    out.j = mdp.initial().dot(v);
    return out;
}

double trajectory_return(const Trajectory& traj, const RewardTable& reward, double gamma) {
    if (traj.steps.empty()) throw std::invalid_argument("trajectory_return: empty trajectory");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("trajectory_return: bad gamma");
    double total = 0.0;
    double discount = 1.0;
    for (const auto& [s, a] : traj.steps) {
        total += discount * reward(s, a);
        discount *= gamma;
    }
    if (traj.tail == TailRule::RepeatLast) {
        const auto& [s, a] = traj.steps.back();
        total += discount * reward(s, a) / (1.0 - gamma);
    }
    return total;
}

std::vector<StationaryPolicy> enumerate_deterministic_policies(int num_states, int num_actions) {
    std::uint64_t count = 1;
    for (int s = 0; s < num_states; ++s) {
        count *= static_cast<std::uint64_t>(num_actions);
        if (count > kEnumerationGuard)
            throw GuardError("enumerate_deterministic_policies: |A|^|S| exceeds 2^20");
    }
    std::vector<StationaryPolicy> out;
    out.reserve(count);
    std::vector<int> choice(static_cast<std::size_t>(num_states), 0);
    for (std::uint64_t p = 0; p < count; ++p) {
        std::uint64_t rest = p;
        for (int s = 0; s < num_states; ++s) {
            choice[static_cast<std::size_t>(s)] = static_cast<int>(rest % num_actions);
            rest /= static_cast<std::uint64_t>(num_actions);
        }
        out.push_back(StationaryPolicy::deterministic(choice, num_actions));
    }
    return out;
}

namespace {

// Sign of b - a with a dead band.
int ordering_sign(double a, double b, double tol) {
    if (b - a > tol) return 1;
    if (a - b > tol) return -1;
    return 0;
}

StationaryPolicy random_policy(int num_states, int num_actions, RandomStream& rng) {
    Mat probs(num_states, num_actions);
    for (int s = 0; s < num_states; ++s) {
        std::vector<double> row = rng.dirichlet(num_actions);
        for (int a = 0; a < num_actions; ++a) probs(s, a) = row[static_cast<std::size_t>(a)];
    }
    return StationaryPolicy(std::move(probs));
}

} // namespace

RewardRelation reward_relation(const TabularMdp& mdp, const RewardTable& r1,
                               const RewardTable& r2, int random_policies, std::uint64_t seed) {
    std::vector<StationaryPolicy> policies =
        enumerate_deterministic_policies(mdp.num_states(), mdp.num_actions());
    RandomStream rng = RandomStream::derive(seed, "reward_relation", 0);
    for (int i = 0; i < random_policies; ++i)
        policies.push_back(random_policy(mdp.num_states(), mdp.num_actions(), rng));

    const std::size_t count = policies.size();
    std::vector<double> j1(count), j2(count);
    for (std::size_t i = 0; i < count; ++i) {
        j1[i] = evaluate_policy(mdp, r1, policies[i]).j;
        j2[i] = evaluate_policy(mdp, r2, policies[i]).j;
    }

    auto spread = [](const std::vector<double>& j) {
        auto [lo, hi] = std::minmax_element(j.begin(), j.end());
        return *hi - *lo;
    };
    if (spread(j1) <= kTieTol) return RewardRelation::Trivial1;
    if (spread(j2) <= kTieTol) return RewardRelation::Trivial2;

    bool equivalent = true;
    bool opposite = true;
    if (count <= 4096) {
        for (std::size_t i = 0; i + 1 < count && (equivalent || opposite); ++i) {
            for (std::size_t k = i + 1; k < count; ++k) {
                const int s1 = ordering_sign(j1[i], j1[k], kTieTol);
                const int s2 = ordering_sign(j2[i], j2[k], kTieTol);
                if (s1 != s2) equivalent = false;
                if (s1 != -s2) opposite = false;
                if (!equivalent && !opposite) break;
            }
        }
    } else {
        // Sorted consistency check; avoids the quadratic pair scan on large
        // enumerations. Sound when the 1e-9 tie bands are well separated.
        std::vector<std::size_t> order(count);
        for (std::size_t i = 0; i < count; ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return j1[a] < j1[b]; });
        for (std::size_t i = 0; i + 1 < count; ++i) {
            const std::size_t a = order[i], b = order[i + 1];
            const int s1 = ordering_sign(j1[a], j1[b], kTieTol);
            const int s2 = ordering_sign(j2[a], j2[b], kTieTol);
            if (s1 != s2) equivalent = false;
            if (s1 != -s2) opposite = false;
        }
    }
    if (equivalent) return RewardRelation::Equivalent;
    if (opposite) return RewardRelation::Opposite;
    return RewardRelation::Unrelated;
}

RewardTable reward_from_optimal_set(const TabularMdp& mdp,
                                    const std::vector<std::vector<int>>& optimal_actions) {
    if (static_cast<int>(optimal_actions.size()) != mdp.num_states())
        throw std::invalid_argument("reward_from_optimal_set: one action set per state required");
    Mat values = Mat::Constant(mdp.num_states(), mdp.num_actions(), -1.0);
    for (int s = 0; s < mdp.num_states(); ++s) {
        if (optimal_actions[static_cast<std::size_t>(s)].empty())
            throw std::invalid_argument("reward_from_optimal_set: empty action set");
        for (int a : optimal_actions[static_cast<std::size_t>(s)]) {
            if (a < 0 || a >= mdp.num_actions())
                throw std::invalid_argument("reward_from_optimal_set: action index out of range");
            values(s, a) = 0.0;
        }
    }
    return RewardTable(std::move(values));
}

std::vector<std::vector<int>> optimal_action_map(const TabularMdp& mdp, const RewardTable& reward) {
    const OptimalSolution solution = optimal_values(mdp, reward);
    std::vector<std::vector<int>> out(static_cast<std::size_t>(mdp.num_states()));
    for (int s = 0; s < mdp.num_states(); ++s) {
        const double best = solution.tables.q.row(s).maxCoeff();
        for (int a = 0; a < mdp.num_actions(); ++a)
            if (solution.tables.q(s, a) >= best - kTieTol) out[static_cast<std::size_t>(s)].push_back(a);
    }
    return out;
}

} // namespace rewardlab
