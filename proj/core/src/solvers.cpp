#include "rewardlab/solvers.hpp"

#include <chrono>
#include <cmath>

#include "rewardlab/errors.hpp"
#include "rewardlab/occupancy.hpp"
#include "rewardlab/random.hpp"

namespace rewardlab {

OptimalSolution optimal_values(const TabularMdp& mdp, const RewardTable& reward, double tol,
                               int max_iterations) {
    if (reward.num_states() != mdp.num_states() || reward.num_actions() != mdp.num_actions())
        throw std::invalid_argument("optimal_values: reward shape mismatch");
    const auto start = std::chrono::steady_clock::now();
    const int s_count = mdp.num_states();
    const int a_count = mdp.num_actions();

    Vec v = Vec::Zero(s_count);
    Mat q(s_count, a_count);
    OptimalSolution out;
    double residual = 0.0;
    int iter = 0;
    for (; iter < max_iterations; ++iter) {
        for (int s = 0; s < s_count; ++s)
            for (int a = 0; a < a_count; ++a)
                q(s, a) = reward(s, a) + mdp.gamma() * mdp.successor_row(s, a).dot(v);
        Vec next = q.rowwise().maxCoeff();
        residual = (next - v).lpNorm<Eigen::Infinity>();
        v = std::move(next);
        out.report.residual_trace.push_back(residual);
        out.report.objective_trace.push_back(mdp.initial().dot(v));
        if (residual <= tol) break;
    }
    if (residual > tol)
        throw SolverError("optimal_values: value iteration failed to reach tolerance");

    std::vector<int> greedy(static_cast<std::size_t>(s_count), 0);
    for (int s = 0; s < s_count; ++s) {
        int best = 0;
        for (int a = 1; a < a_count; ++a)
            if (q(s, a) > q(s, best)) best = a; // strict: ties keep the lowest index
        greedy[static_cast<std::size_t>(s)] = best;
    }

    out.tables.v = v;
    out.tables.q = q;
    out.tables.j = mdp.initial().dot(v);
    out.greedy = StationaryPolicy::deterministic(greedy, a_count);
    out.report.iterations = iter + 1;
    out.report.final_residual = residual;
    out.report.wall_time_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

StationaryPolicy SoftmaxPolicyParams::policy() const {
    Mat probs(theta.rows(), theta.cols());
    for (int s = 0; s < theta.rows(); ++s) {
        const double shift = theta.row(s).maxCoeff();
        for (int a = 0; a < theta.cols(); ++a) probs(s, a) = std::exp(theta(s, a) - shift);
        probs.row(s) /= probs.row(s).sum();
    }
    return StationaryPolicy(std::move(probs));
}

SoftmaxPolicyParams SoftmaxPolicyParams::zeros(int num_states, int num_actions) {
    return {Mat::Zero(num_states, num_actions)};
}

SoftmaxPolicyParams SoftmaxPolicyParams::random(int num_states, int num_actions, double scale,
                                                std::uint64_t seed) {
    RandomStream rng = RandomStream::derive(seed, "softmax_init", 0);
    Mat theta(num_states, num_actions);
    for (int s = 0; s < num_states; ++s)
        for (int a = 0; a < num_actions; ++a) theta(s, a) = rng.uniform(-scale, scale);
    return {std::move(theta)};
}

std::vector<Mat> j_gradient(const Momdp& momdp, const SoftmaxPolicyParams& params) {
    const TabularMdp& mdp = momdp.mdp();
    const StationaryPolicy pi = params.policy();
    const Vec d = state_occupancy(mdp, pi);

    std::vector<Mat> grads;
    grads.reserve(static_cast<std::size_t>(momdp.num_rewards()));
    for (const RewardTable& reward : momdp.rewards()) {
        const ValueTables tables = evaluate_policy(mdp, reward, pi);
        Mat g(mdp.num_states(), mdp.num_actions());
        for (int s = 0; s < mdp.num_states(); ++s)
            for (int a = 0; a < mdp.num_actions(); ++a)
                g(s, a) = d[s] * pi(s, a) * (tables.q(s, a) - tables.v[s]);
        grads.push_back(std::move(g));
    }
    return grads;
}

namespace {

Vec j_vector(const Momdp& momdp, const StationaryPolicy& pi) {
    Vec j(momdp.num_rewards());
    for (int i = 0; i < momdp.num_rewards(); ++i)
        j[i] = evaluate_policy(momdp.mdp(), momdp.rewards()[static_cast<std::size_t>(i)], pi).j;
    return j;
}

} // namespace

MorlSolution solve_differentiable_morl(const Momdp& momdp, const ObjectiveSpec& spec,
                                       const SoftmaxPolicyParams& init, int steps,
                                       const AscentRule& rule) {
    if (!is_differentiable(spec.kind))
        throw std::invalid_argument("solve_differentiable_morl: objective is not differentiable");
    spec.validate_for(momdp.num_rewards());
    const auto start = std::chrono::steady_clock::now();

    MorlSolution out;
    out.params = init;
    Vec j = j_vector(momdp, out.params.policy());
    double u = utility(spec, j);
    out.report.objective_trace.push_back(u);

    double grad_norm = 0.0;
    int iter = 0;
    for (; iter < steps; ++iter) {
        const Vec du = utility_gradient(spec, j);
        const std::vector<Mat> dj = j_gradient(momdp, out.params);
        Mat direction = Mat::Zero(out.params.theta.rows(), out.params.theta.cols());
        for (int i = 0; i < momdp.num_rewards(); ++i)
            direction += du[i] * dj[static_cast<std::size_t>(i)];
        grad_norm = direction.lpNorm<Eigen::Infinity>();
        out.report.residual_trace.push_back(grad_norm);
        if (grad_norm < 1e-12) break;

        // Backtracking keeps the utility trace non-decreasing; a step that
        // survives max_halvings halvings without improving ends the ascent.
        double step = rule.initial_step;
        bool improved = false;
        for (int h = 0; h <= rule.max_halvings; ++h) {
            SoftmaxPolicyParams trial{out.params.theta + step * direction};
            const Vec j_trial = j_vector(momdp, trial.policy());
            const double u_trial = utility(spec, j_trial);
            if (u_trial >= u) {
                out.params = std::move(trial);
                j = j_trial;
                u = u_trial;
                improved = true;
                break;
            }
            step *= rule.backtrack_factor;
        }
        out.report.objective_trace.push_back(u);
        if (!improved) break;
    }

    out.j = j;
    out.utility = u;
    out.report.iterations = iter;
    out.report.final_residual = grad_norm;
    out.report.wall_time_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

MorlSolution solve_differentiable_morl_multistart(const Momdp& momdp, const ObjectiveSpec& spec,
                                                  int restarts, int steps, std::uint64_t seed,
                                                  const AscentRule& rule) {
    if (restarts < 1) throw std::invalid_argument("multistart: needs at least one restart");
    MorlSolution best;
    bool have_best = false;
    for (int r = 0; r < restarts; ++r) {
        SoftmaxPolicyParams init =
            r == 0 ? SoftmaxPolicyParams::zeros(momdp.mdp().num_states(), momdp.mdp().num_actions())
                   : SoftmaxPolicyParams::random(momdp.mdp().num_states(), momdp.mdp().num_actions(),
                                                 2.0, RandomStream::derive(seed, "morl_restart", r).next_u64());
        MorlSolution candidate = solve_differentiable_morl(momdp, spec, init, steps, rule);
        if (!have_best || candidate.utility > best.utility) {
            best = std::move(candidate);
            have_best = true;
        }
    }
    return best;
}

} // namespace rewardlab
