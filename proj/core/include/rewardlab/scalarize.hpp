#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rewardlab/mdp.hpp"
#include "rewardlab/objectives.hpp"
#include "rewardlab/types.hpp"

namespace rewardlab {

/// Verdict margins: a fitted weighting counts as strict only above this.
inline constexpr double kStrictMargin = 1e-7;
/// Band inside which a tied pair may move under the fitted weighting.
inline constexpr double kEqualityBand = 1e-7;

enum class PolicyOrigin { Deterministic, Mixture, Random, Enriched };

/**
 * A finite surrogate for the policy space: all deterministic policies when
 * they fit the budget, then pairwise 50/50 occupancy mixtures of them, then
 * seeded random stochastic policies up to the budget. J vectors come from
 * evaluate_policy, never from interpolation.
 */
struct PolicySample {
    std::vector<StationaryPolicy> policies;
    std::vector<PolicyOrigin> origins;
    Mat j; // k x N, column per policy

    int size() const { return static_cast<int>(policies.size()); }
};

PolicySample sample_policies(const Momdp& momdp, int budget, std::uint64_t seed);

/// One ordered pair the weighting must reproduce. diff = j_b - j_a.
struct OrderedPairConstraint {
    int a = 0;
    int b = 0;
    Ordering rel = Ordering::Equal;
    Vec diff;
};

/// Convex combination of witness rows certifying that no bounded weighting
/// attains the strict margin: any w with |w|_inf <= 1 that respects the tied
/// rows has min over strict rows of w . diff <= bound.
struct MarginCertificate {
    std::vector<double> strict_weights; // >= 0, sum 1, over the witness's strict rows
    std::vector<double> tied_weights;   // signed, over the witness's tied rows
    double bound = 0.0;
};

struct MarginFit {
    bool meets_margin = false;
    Vec x;            // weighting before normalization
    double margin = 0.0;
    Vec duals;        // one per constraint, complementary-slackness support
};

/**
 * Margin program shared by the scalarization and fixed-reward feasibility
 * checks: maximize e subject to w . diff >= e on strict rows,
 * |w . diff| <= band on tied rows and |w|_inf <= 1. Always feasible (w = 0);
 * the question is whether the optimum clears kStrictMargin.
 */
MarginFit fit_ordering_margin(const std::vector<OrderedPairConstraint>& constraints,
                              double band = kEqualityBand);

/**
 * Irreducible infeasible core of a below-margin constraint system: restrict to
 * the dual support of the margin program (sound by weak duality), then delete
 * greedily while the subsystem stays below margin. Returns constraint indices.
 */
std::vector<int> isolate_witness(const std::vector<OrderedPairConstraint>& constraints,
                                 const MarginFit& fit, double band = kEqualityBand);

/// Sharpest certificate for a witness subsystem, found by a small auxiliary
/// linear program over the combination weights.
MarginCertificate certificate_for(const std::vector<OrderedPairConstraint>& witness,
                                  double band = kEqualityBand);

/// Algebraic re-check of a certificate against its witness rows, independent
/// of any solver state.
bool certificate_valid(const std::vector<OrderedPairConstraint>& witness,
                       const MarginCertificate& cert, double band = kEqualityBand,
                       double tol = 1e-9);

enum class ScalarizationOutcome { Scalarizable, Unscalarizable };

struct DegenerateTag {
    std::string tag;
    int index = -1;              // reward index when the tag points at one
    bool versions_disagree = false; // constrained-kind detectors: the two
                                    // published condition sets differ here
};

struct WitnessPair {
    int a = 0;
    int b = 0;
    Ordering rel = Ordering::Equal;
    Vec j_a;
    Vec j_b;
};

struct ScalarizationVerdict {
    ScalarizationOutcome outcome = ScalarizationOutcome::Unscalarizable;
    Vec weights;                  // |.|_inf = 1 when a weighting exists and is nonzero
    double margin = 0.0;          // margin program optimum (pre-normalization)
    double equality_band = kEqualityBand; // band at the reported scale
    std::optional<DegenerateTag> degenerate_tag;
    std::vector<WitnessPair> witness;
    MarginCertificate certificate;
};

/**
 * Degenerate-case detectors, run before weight fitting. Sample-based versions
 * of the published escape hatches: LexMax collapses when every reward pair is
 * trivial/equivalent/opposite; MaxMin when one reward is uniformly minimal;
 * MaxSat when no reward crosses its threshold; ConSat when the rewards are
 * equivalent, no policy meets the constraint, or every policy does (the last
 * condition is absent from one published variant; versions_disagree marks
 * instances decided by it).
 */
std::optional<DegenerateTag> detect_degenerate(const Momdp& momdp, const ObjectiveSpec& spec,
                                               const PolicySample& sample);

/**
 * Fits a linear weighting reproducing the objective's ordering over the
 * sample via the margin program. For LexMax and ConSat the sample is first
 * enriched with deterministic tie and near-tie occupancy mixtures, and for
 * MaxMin with min-crossing kink mixtures, which is where those orderings
 * betray non-linearity at finite sample sizes. Returns
 * Scalarizable(w) above the strict margin; otherwise Unscalarizable with an
 * irreducible witness and its certificate. Degenerate detection runs first
 * and is attached as a tag.
 */
ScalarizationVerdict fit_weights(const Momdp& momdp, const ObjectiveSpec& spec,
                                 const PolicySample& sample);

/// The enrichment used by fit_weights, exposed so holdout verification can
/// apply the identical construction. Returns sample unchanged for kinds that
/// need no enrichment.
PolicySample enrich_sample(const Momdp& momdp, const ObjectiveSpec& spec,
                           const PolicySample& sample);

/// Weighted sum of the reward tables, for driving a scalar solver with a
/// fitted weighting.
RewardTable scalarized_reward(const Momdp& momdp, const Vec& weights);

struct VerificationReport {
    int holdout_pairs = 0;
    int disagreements = 0;
    std::vector<WitnessPair> disagreeing_pairs; // capped at 8
    bool witness_confirmed = false;             // only meaningful for Unscalarizable
    bool certificate_confirmed = false;
};

/**
 * Out-of-sample audit of a verdict. Scalarizable: fresh sample (new seed, same
 * construction and enrichment), every pair compared against sign(w . diff)
 * with the equality band. Unscalarizable: the witness subsystem is re-solved
 * in isolation and the certificate re-checked algebraically.
 */
VerificationReport verify_verdict(const Momdp& momdp, const ObjectiveSpec& spec,
                                  const ScalarizationVerdict& verdict, std::uint64_t holdout_seed,
                                  int holdout_budget);

/// Serialized verdict: outcome, weights, witness pairs, degenerate tag, margin.
std::string verdict_to_json(const ScalarizationVerdict& verdict);

} // namespace rewardlab
