#include "rewardlab/occupancy.hpp"

#include <cmath>
#include <ostream>

#include "rewardlab/errors.hpp"
#include "rewardlab/random.hpp"

namespace rewardlab {

Mat reward_matrix(const Momdp& momdp) {
    Mat rows(momdp.num_rewards(), momdp.mdp().num_pairs());
    for (int i = 0; i < momdp.num_rewards(); ++i)
        rows.row(i) = momdp.rewards()[static_cast<std::size_t>(i)].flat().transpose();
    return rows;
}

Vec state_occupancy(const TabularMdp& mdp, const StationaryPolicy& policy) {
    const Mat p_pi = policy_transition_matrix(mdp, policy);
    const int s_count = mdp.num_states();
    Mat system = Mat::Identity(s_count, s_count) - mdp.gamma() * p_pi.transpose();
    Vec d = system.partialPivLu().solve(mdp.initial());
    if ((system * d - mdp.initial()).lpNorm<Eigen::Infinity>() > 1e-10)
        throw SolverError("state_occupancy: flow solve residual exceeds 1e-10");
    return d;
}

OccupancyVector embed_policy(const TabularMdp& mdp, const StationaryPolicy& policy) {
    const Vec d = state_occupancy(mdp, policy);
    const int a_count = mdp.num_actions();
    Vec mass(mdp.num_pairs());
    for (int s = 0; s < mdp.num_states(); ++s)
        for (int a = 0; a < a_count; ++a) mass[sa_index(s, a, a_count)] = d[s] * policy(s, a);
    return {std::move(mass), mdp.gamma()};
}

OccupancyVector embed_trajectory(const Trajectory& traj, double gamma, int num_states,
                                 int num_actions) {
    if (traj.steps.empty()) throw std::invalid_argument("embed_trajectory: empty trajectory");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("embed_trajectory: bad gamma");
    Vec mass = Vec::Zero(num_states * num_actions);
    double discount = 1.0;
    for (const auto& [s, a] : traj.steps) {
        if (s < 0 || s >= num_states || a < 0 || a >= num_actions)
            throw std::invalid_argument("embed_trajectory: index out of range");
        mass[sa_index(s, a, num_actions)] += discount;
        discount *= gamma;
    }
    if (traj.tail == TailRule::RepeatLast) {
        const auto& [s, a] = traj.steps.back();
        mass[sa_index(s, a, num_actions)] += discount / (1.0 - gamma);
    }
    return {std::move(mass), gamma};
}

double AffineHull::residual(const Vec& x) const {
    Vec delta = x - base;
    if (dim > 0) delta -= basis * (basis.transpose() * delta);
    return delta.lpNorm<Eigen::Infinity>();
}

AffineHull affine_hull_of_policies(const TabularMdp& mdp, int sample_count, std::uint64_t seed) {
    std::vector<StationaryPolicy> policies =
        enumerate_deterministic_policies(mdp.num_states(), mdp.num_actions());
    RandomStream rng = RandomStream::derive(seed, "affine_hull", 0);
    for (int i = 0; i < sample_count; ++i) {
        Mat probs(mdp.num_states(), mdp.num_actions());
        for (int s = 0; s < mdp.num_states(); ++s) {
            std::vector<double> row = rng.dirichlet(mdp.num_actions());
            for (int a = 0; a < mdp.num_actions(); ++a) probs(s, a) = row[static_cast<std::size_t>(a)];
        }
        policies.emplace_back(std::move(probs));
    }

    const int n = mdp.num_pairs();
    AffineHull hull;
    hull.base = embed_policy(mdp, policies.front()).mass;
    Mat directions(static_cast<int>(policies.size()) - 1, n);
    for (std::size_t i = 1; i < policies.size(); ++i)
        directions.row(static_cast<int>(i) - 1) =
            (embed_policy(mdp, policies[i]).mass - hull.base).transpose();

    Eigen::BDCSVD<Mat> svd(directions, Eigen::ComputeThinV);
    const Vec& sigma = svd.singularValues();
    const double cutoff = 1e-9 * std::max(1.0, sigma.size() > 0 ? sigma[0] : 0.0);
    int rank = 0;
    while (rank < sigma.size() && sigma[rank] > cutoff) ++rank;
    hull.dim = rank;
    hull.basis = svd.matrixV().leftCols(rank);
    return hull;
}

StationaryPolicy policy_from_occupancy(const OccupancyVector& occ, int num_states,
                                       int num_actions) {
    if (occ.mass.size() != num_states * num_actions)
        throw std::invalid_argument("policy_from_occupancy: size mismatch");
    Mat probs(num_states, num_actions);
    for (int s = 0; s < num_states; ++s) {
        double row_total = 0.0;
        for (int a = 0; a < num_actions; ++a) row_total += occ.mass[sa_index(s, a, num_actions)];
        if (row_total <= 1e-300) {
            probs.row(s).setConstant(1.0 / num_actions);
            continue;
        }
        for (int a = 0; a < num_actions; ++a)
            probs(s, a) = std::max(0.0, occ.mass[sa_index(s, a, num_actions)]) / row_total;
        // Row renormalization absorbs the clamping of tiny negative masses.
        probs.row(s) /= probs.row(s).sum();
    }
    return StationaryPolicy(std::move(probs));
}

void write_occupancy_csv(std::ostream& out, const OccupancyVector& occ, const TabularMdp& mdp) {
    out << "index,state,action,mass\n";
    const int a_count = mdp.num_actions();
    for (int s = 0; s < mdp.num_states(); ++s)
        for (int a = 0; a < a_count; ++a) {
            const int i = sa_index(s, a, a_count);
            out << i << ',' << mdp.state_names()[static_cast<std::size_t>(s)] << ','
                << mdp.action_names()[static_cast<std::size_t>(a)] << ',' << occ.mass[i] << '\n';
        }
}

} // namespace rewardlab
