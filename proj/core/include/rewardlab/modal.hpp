#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rewardlab/mdp.hpp"
#include "rewardlab/solvers.hpp"
#include "rewardlab/types.hpp"

namespace rewardlab {

/// A reward with its own discount; its optimal value function is the quantity
/// modal rewards consume. The discount is independent of the outer MDP's.
struct Affordance {
    RewardTable reward;
    double discount = 0.9;
};

enum class ModalRuleKind { Fixed, ReachabilityPenalty, AffordanceGate, AffordancePenalty };

/**
 * A reward rule over (state, action, transition kernel): a base table
 * composed with kernel-derived quantities.
 *
 *   Fixed                ignores the kernel entirely.
 *   ReachabilityPenalty  adds penalty at states that cannot reach the target
 *                        in the kernel's support graph (actions free).
 *   AffordanceGate       base(s,a) * E_{s'}[tanh V*(s')], V* the affordance's
 *                        optimal values under the kernel at its own discount.
 *   AffordancePenalty    base(s,a) - scale * E_{s'}[V*(s')].
 */
class ModalReward {
public:
    static ModalReward fixed(RewardTable base);
    static ModalReward reachability_penalty(RewardTable base, int target_state, double penalty);
    static ModalReward affordance_gate(RewardTable base, Affordance affordance);
    static ModalReward affordance_penalty(RewardTable base, Affordance affordance, double scale);

    ModalRuleKind kind() const { return kind_; }
    const RewardTable& base() const { return base_; }

    /// Pointwise evaluation under one kernel ((|S||A|) x |S| stochastic
    /// matrix). Total and deterministic; for table-at-once use
    /// realize_contingent, which derives the kernel quantities once.
    double evaluate(int s, int a, const Mat& tau) const;

private:
    ModalRuleKind kind_ = ModalRuleKind::Fixed;
    RewardTable base_;
    int target_state_ = 0;
    double penalty_ = 0.0;
    Affordance affordance_;
    double scale_ = 1.0;

    friend RewardTable realize_contingent(const ModalReward& modal, const TabularMdp& kernel);
};

/**
 * Projects a modal reward onto one transition kernel: the fixed table that
 * agrees with the modal rule pointwise under that kernel, hence induces the
 * same policy ordering there by construction.
 */
RewardTable realize_contingent(const ModalReward& modal, const TabularMdp& kernel);

/// States that can reach target in the support graph of the kernel (edges
/// s -> s' wherever some action moves s to s' with positive probability).
std::vector<bool> can_reach(const Mat& transition, int num_actions, int target_state);

/**
 * Family-relative vacuousness verdict. Vacuous: one fixed reward reproduced
 * every kernel's contingent policy ordering over the sampled policies, with a
 * strict margin. NonVacuous: the cross-kernel ordering system is infeasible;
 * tau_a / tau_b name two kernels whose joint orderings already clash, and
 * policy_1 / policy_2 a pair they order oppositely (when one exists).
 */
struct VacuousCheck {
    bool vacuous = true;
    Vec fixed_reward;  // sa_index order, vacuous verdicts only
    double margin = 0.0;
    int tau_a = -1;
    int tau_b = -1;
    int policy_1 = -1;
    int policy_2 = -1;
    std::vector<StationaryPolicy> policies; // the sampled policies, for audit
};

/**
 * Decides vacuousness over a finite kernel family by feasibility of one
 * unknown reward vector against all contingent orderings (margin machinery
 * over occupancy differences). NonVacuous is sound for the family;
 * Vacuous is relative to the family and the sampled policies. A family of
 * size one short-circuits to Vacuous via realize_contingent.
 *
 * base supplies names, initial distribution and discount; each family entry
 * replaces its kernel.
 */
VacuousCheck check_vacuous(const ModalReward& modal, const TabularMdp& base,
                           const std::vector<Mat>& tau_family, int sample_budget,
                           std::uint64_t seed);

enum class ModalFormKind { TanhGate, ValuePenalty, Fixed };

/**
 * The learnable modal form: a continuous function of (s, a, s') and the
 * affordances' optimal values at s'.
 *   TanhGate      base(s,a) * tanh(V_i(s'))
 *   ValuePenalty  base(s,a) - scale * V_i(s')
 *   Fixed         base(s,a)
 */
struct ModalForm {
    ModalFormKind kind = ModalFormKind::Fixed;
    RewardTable base_reward;
    int affordance_index = 0;
    double scale = 1.0;

    double value(int s, int a, int s_next, const std::vector<Vec>& affordance_values) const;
    // Same rule fed with the selected affordance's value at the successor.
    double value_at(int s, int a, double v_next) const;
};

const char* modal_form_kind_name(ModalFormKind kind);
ModalFormKind modal_form_kind_from_name(const std::string& name);

/// MDP whose reward is a modal form over k affordances' optimal values.
class AffordanceMdp {
public:
    AffordanceMdp(TabularMdp skeleton, std::vector<Affordance> affordances, ModalForm form);

    const TabularMdp& skeleton() const { return skeleton_; }
    const std::vector<Affordance>& affordances() const { return affordances_; }
    const ModalForm& form() const { return form_; }
    int num_affordances() const { return static_cast<int>(affordances_.size()); }

private:
    TabularMdp skeleton_;
    std::vector<Affordance> affordances_;
    ModalForm form_;
};

/// V_i* per affordance, by value iteration at the affordance's own discount
/// to residual 1e-10.
std::vector<Vec> affordance_optimal_values(const AffordanceMdp& amdp);

/// Oracle solution: resolve the modal form against the affordances' optimal
/// values (expectation over successors), then solve the induced MDP exactly.
struct ModalSolution {
    StationaryPolicy policy;
    ValueTables tables;
    RewardTable resolved_reward;
};

ModalSolution ground_truth_modal_solution(const AffordanceMdp& amdp);

struct LearnerConfig {
    int max_steps_per_episode = 40;
    double step_exponent = 0.8;         // learning rate 1/(1+visits)^exponent
    double min_exploration = 0.05;      // epsilon floor while training
    double exploration_exponent = 0.5;  // epsilon = max(floor, 1/(1+episode)^exponent)

    void validate() const; // positivity and diminishing-step conditions
};

/**
 * Tabular learner state: one Q-table per affordance plus one for the modal
 * reward, sharing per-(s,a) visit counts. Exploration anneals during
 * training; greedy_policy reads the trained modal table pure-greedily.
 */
struct LearnerState {
    Mat q_modal;
    std::vector<Mat> q_affordances;
    Eigen::MatrixXi visit_counts;
    int episodes_run = 0;

    StationaryPolicy greedy_policy() const;
    std::vector<Vec> affordance_value_estimates() const; // V_i = rowwise max
};

/**
 * Off-policy learner: behaves epsilon-greedily on the modal table; every
 * transition updates each affordance table toward its own-discount optimum
 * and the modal table with the reward estimate obtained by feeding the
 * current value estimates into the modal form. Deterministic given seed.
 */
LearnerState learn_affordance_mdp(const AffordanceMdp& amdp, int episodes,
                                  const LearnerConfig& config, std::uint64_t seed);

} // namespace rewardlab
