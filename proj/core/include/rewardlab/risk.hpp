#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rewardlab/mdp.hpp"
#include "rewardlab/types.hpp"

namespace rewardlab {

enum class TransformKind { Exponential, Isoelastic, Logarithmic, Quadratic, Affine };

/**
 * A scalar transform of the return. apply_transform realizes the risk
 * families in their proved forms: Exponential maps g to -exp(alpha g),
 * Isoelastic to (g^(1-alpha) - 1)/(1-alpha) on g > 0, Logarithmic to ln g on
 * g > 0, Quadratic to g - alpha g^2 on g <= 1/(2 alpha), Affine to b g + a.
 */
struct UtilityTransform {
    TransformKind kind = TransformKind::Affine;
    double alpha = 1.0; // Exponential (> 0), Isoelastic (> 0, != 1), Quadratic (> 0)
    double b = 1.0;     // Affine slope, > 0
    double a = 0.0;     // Affine offset

    static UtilityTransform exponential(double alpha);
    static UtilityTransform isoelastic(double alpha);
    static UtilityTransform logarithmic();
    static UtilityTransform quadratic(double alpha);
    static UtilityTransform affine(double b, double a);

    // Parameter invariants; throws std::invalid_argument.
    void validate() const;
};

const char* transform_kind_name(TransformKind kind);
TransformKind transform_kind_from_name(const std::string& name);

/// Closed-form transform value; DomainError outside the kind's domain, with
/// the offending bound in the message.
double apply_transform(const UtilityTransform& t, double g);

/**
 * Greedy binary expansion of alpha in base 1/gamma, the constructive step
 * behind the affine-only result: digit k is 1 iff the remaining mass covers
 * gamma^k. Valid for gamma in [0.5, 1), where binary digits always suffice.
 * transition_one / transition_zero name the two sa_index slots a realized
 * trajectory visits on 1 / 0 digits; digits_base_inv_gamma leaves them unset.
 */
struct DigitTrajectory {
    double alpha = 0.0;
    std::vector<int> digits;
    int transition_one = -1;
    int transition_zero = -1;

    double partial_mass(double gamma) const; // sum of digit_k gamma^k
};

/**
 * Truncation horizon T = ceil(ln(eps (1 - gamma)) / ln gamma) (at least 1),
 * which bounds the dropped tail gamma^T / (1 - gamma) by eps. GuardError for
 * gamma < 0.5 or alpha outside [0, 1/(1-gamma)].
 */
DigitTrajectory digits_base_inv_gamma(double alpha, double gamma, double epsilon = 1e-9);

/// Realizes a digit sequence as a trajectory: step k visits transition_one on
/// digit 1 and transition_zero on digit 0, then repeats transition_zero
/// forever (one appended step plus a repeat tail).
Trajectory digit_trajectory_path(const DigitTrajectory& digit, int num_actions);

enum class FeasibilityOutcome { Realizable, Infeasible };

/**
 * Verdict of the fixed-reward feasibility system. Realizable carries an R2
 * matching the transformed return on all probes within 1e-7 (and a fresh
 * holdout within 1e-6); Infeasible carries a solver-independent lower bound
 * on the max violation any reward table could achieve, from the least-squares
 * residual: for every x, |A x - rhs|_inf >= |r|_2^2 / |r|_1.
 */
struct TransformFeasibility {
    FeasibilityOutcome outcome = FeasibilityOutcome::Infeasible;
    std::optional<RewardTable> reward;
    double residual = 0.0;         // max |A x - rhs| at the least-squares solution
    double certificate = 0.0;      // lower bound on the achievable max violation
    double holdout_residual = 0.0; // Realizable only
    bool outside_regime = false;   // gamma < 0.5: processed but outside the
                                   // affine-only result's stated hypothesis
    int probe_count = 0;
};

/**
 * Decides whether some reward table R2 realizes G2 = f(G1) over all
 * trajectories, by linear feasibility over probe trajectories: all constant
 * trajectories, pairwise digit trajectories at five interior alpha grid
 * values (skipped below gamma 0.5), and seeded random repeat-tail
 * trajectories. DomainError if f is undefined at some probe's G1, naming the
 * trajectory.
 */
TransformFeasibility check_transform_realizable(const TabularMdp& skeleton, const RewardTable& r1,
                                                const UtilityTransform& t, int probe_count,
                                                std::uint64_t seed);

/**
 * Scans probe trajectory pairs for order reversals between G1 and G2. With no
 * reversal found, fits G2 ~ b G1 + a by least squares; under the affine-only
 * result the residual vanishes when gamma >= 0.5.
 */
struct MonotoneScanReport {
    int probe_count = 0;
    int violations = 0;
    // First violating pair, when any: probe indices and their G values.
    int pair_a = -1, pair_b = -1;
    double g1_a = 0.0, g1_b = 0.0, g2_a = 0.0, g2_b = 0.0;
    // Affine fit, when no violations.
    double fitted_b = 0.0, fitted_a = 0.0;
    double residual = 0.0; // max |G2 - (b G1 + a)| over probes
};

MonotoneScanReport monotone_consistency_scan(const RewardTable& r1, const RewardTable& r2,
                                             double gamma, int probe_count, std::uint64_t seed);

/// Report JSON: {"outcome", "residual", ...} with certificate / fitted_affine
/// / violating_pair fields as applicable.
std::string feasibility_to_json(const TransformFeasibility& feasibility);
std::string scan_to_json(const MonotoneScanReport& report);

} // namespace rewardlab
