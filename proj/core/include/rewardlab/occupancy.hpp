#pragma once

#include <cstdint>
#include <iosfwd>

#include "rewardlab/mdp.hpp"
#include "rewardlab/types.hpp"

namespace rewardlab {

/**
 * Discounted state-action visitation mass in sa_index order.
 *
 * For a policy embedding the components sum to 1 / (1 - gamma); a zero-tail
 * trajectory embedding carries only its truncated prefix mass, so the sum
 * identity is a property of policy and repeat-tail embeddings, not of the
 * container.
 */
struct OccupancyVector {
    Vec mass;
    double gamma = 0.0;

    double total() const { return mass.sum(); }
};

/// Stacked flat reward rows of a Momdp: row i is rewards()[i].flat(). The
/// product with an occupancy vector is the vector of per-reward returns.
Mat reward_matrix(const Momdp& momdp);

/**
 * Occupancy embedding of a stationary policy: solve the flow system
 * (I - gamma P_pi^T) d = mu_0 for the discounted state occupancy d, then
 * m(s, a) = d(s) pi(a|s). Satisfies J = r_flat . m for every reward table
 * (checked against evaluate_policy in tests to 1e-9).
 */
OccupancyVector embed_policy(const TabularMdp& mdp, const StationaryPolicy& policy);

/// Discounted state occupancy d alone (the row sums of embed_policy).
Vec state_occupancy(const TabularMdp& mdp, const StationaryPolicy& policy);

/**
 * Occupancy embedding of a trajectory: gamma^t on the t-th prefix transition,
 * plus the closed-form tail gamma^T / (1 - gamma) on the final transition for
 * RepeatLast (ZeroAfter adds nothing).
 */
OccupancyVector embed_trajectory(const Trajectory& traj, double gamma, int num_states,
                                 int num_actions);

/// Affine subspace through a set of embedded policies: base point plus an
/// orthonormal basis of the direction span.
struct AffineHull {
    Vec base;
    Mat basis;   // n x dim, orthonormal columns
    int dim = 0;

    // Orthogonal-complement residual of x - base against the basis.
    double residual(const Vec& x) const;
    bool contains(const Vec& x, double tol = 1e-8) const { return residual(x) <= tol; }
};

/**
 * Affine hull of the policy embeddings: all deterministic policies (guarded at
 * 2^20) plus sample_count seeded random stochastic policies, orthogonalized by
 * SVD with singular values below 1e-9 * max(1, sigma_max) treated as zero.
 * The dimension never exceeds |S||A| - 1 because total mass is fixed.
 */
AffineHull affine_hull_of_policies(const TabularMdp& mdp, int sample_count,
                                   std::uint64_t seed = 0);

/**
 * Maps an occupancy-space point back to a stationary policy by row
 * normalization: pi(a|s) = m(s, a) / sum_a m(s, a), uniform on zero-mass
 * states. Exact inverse of embed_policy on valid occupancies.
 */
StationaryPolicy policy_from_occupancy(const OccupancyVector& occ, int num_states,
                                       int num_actions);

/// Debug dump: one line per (state, action, mass), CSV with header.
void write_occupancy_csv(std::ostream& out, const OccupancyVector& occ, const TabularMdp& mdp);

} // namespace rewardlab
