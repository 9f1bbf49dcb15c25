#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rewardlab/mdp.hpp"
#include "rewardlab/objectives.hpp"
#include "rewardlab/risk.hpp"

namespace rewardlab {

enum class ExperimentKind { Scalarize, RiskTransform, ModalLearn, MorlSolve, CorollarySuite };

const char* experiment_kind_name(ExperimentKind kind);
ExperimentKind experiment_kind_from_name(const std::string& name);

/**
 * Parsed batch-run configuration. Config JSON carries {"experiment": kind,
 * "seed": int, "output": path} plus per-kind keys; the seed is mandatory so
 * no run depends on implicit randomness.
 *
 *   scalarize       {"momdp": path, "objective": path, "budget"?: int}
 *   risk_transform  {"momdp": path, "transform": path, "probes"?: int}
 *   modal_learn     {"affordance_mdp": path, "episodes"?: int}
 *   morl_solve      {"momdp": path, "objective": path, "steps"?, "restarts"?}
 *   corollary_suite {"count"?: int}, output names a directory
 */
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Scalarize;
    std::uint64_t seed = 0;
    std::string momdp_path;
    std::string objective_path;
    std::string transform_path;
    std::string affordance_path;
    int budget = 24;
    int probes = 40;
    int episodes = 50'000;
    int steps = 300;
    int restarts = 5;
    int count = 50;
    std::string output;

    /// Budgets positive, referenced files present; ParseError otherwise.
    void validate() const;
};

ExperimentConfig experiment_config_from_json(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);

/// Executes the configured experiment, writing JSON verdicts (and, for the
/// suite, a CSV table) atomically. Identical config + seed produce
/// byte-identical payloads. Errors propagate as the module exceptions the
/// CLI maps onto exit codes.
void run_experiment(const ExperimentConfig& config);

/**
 * Random-instance recipe. Sparsity is the fraction of successor entries
 * zeroed per (s, a) row; every row keeps at least one successor, so any
 * value below 1 is feasible and rows stay stochastic.
 */
struct RandomInstanceSpec {
    int states = 4;
    int actions = 2;
    int rewards = 2;
    double gamma_lo = 0.5;
    double gamma_hi = 0.95;
    double reward_lo = -1.0;
    double reward_hi = 1.0;
    double sparsity = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

RandomInstanceSpec instance_spec_from_json(const std::string& text);

/// Deterministic per seed; the emitted instance passes every constructor
/// invariant (rows normalized exactly, mu0 a distribution).
Momdp generate_random_instance(const RandomInstanceSpec& spec);

/**
 * A sampled (MOMDP, objective) pair for one of the ordering results. Rows:
 * "lexmax", "maxmin", "maxsat", "consat". With degenerate = false the
 * instance satisfies the result's non-degeneracy hypothesis (checked by
 * construction plus rejection sampling, never by running the verdict it is
 * meant to test); with degenerate = true it lands in the escape hatch
 * (dominated reward, equivalent rewards, uncrossed thresholds, vacuous
 * constraint) and should scalarize.
 */
struct OrderingInstance {
    Momdp momdp;
    ObjectiveSpec objective;
    int rejected = 0; // proposals discarded before this one
};

OrderingInstance generate_ordering_instance(const std::string& row, bool degenerate,
                                            std::uint64_t seed);

/// Instance for a transform row ("exponential", "isoelastic", "logarithmic",
/// "quadratic", "affine"): gamma >= 0.5, a nonconstant positive base reward
/// whose returns stay inside the transform's domain, and sampled parameters.
struct TransformInstance {
    TabularMdp mdp;
    RewardTable r1;
    UtilityTransform transform;
};

TransformInstance generate_transform_instance(const std::string& row, std::uint64_t seed);

/// One suite summary row; anomalies hold instance indices whose unexpected
/// verdict also failed re-verification.
struct SuiteRow {
    std::string name;
    int instances = 0;
    int hypothesis_satisfied = 0;
    int expected_verdicts = 0;
    int rejected = 0;
    std::vector<int> anomalies;
};

struct SuiteSummary {
    std::vector<SuiteRow> rows;
    std::string csv; // the summary table as written to summary.csv
};

/**
 * Runs the published-corollary battery: the four ordering rows (hypothesis
 * mode, expecting Unscalarizable with witness), their degenerate twins
 * (expecting Scalarizable), and the four transform rows (expecting
 * Infeasible). Per-instance verdict JSON plus summary.csv land in
 * output_dir. Unexpected ordering verdicts are re-verified with a triple
 * holdout and only counted as anomalies when that fails; unexpected
 * transform verdicts are re-checked at doubled probes. Instances compute in
 * parallel (LAB_THREADS bounds the pool, default hardware concurrency);
 * writes are sequential in index order, so payloads are a pure function of
 * (seed, count).
 */
SuiteSummary corollary_suite(std::uint64_t seed, int instance_count,
                             const std::string& output_dir);

} // namespace rewardlab
