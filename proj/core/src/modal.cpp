#include "rewardlab/modal.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "rewardlab/errors.hpp"
#include "rewardlab/occupancy.hpp"
#include "rewardlab/random.hpp"
#include "rewardlab/scalarize.hpp"

namespace rewardlab {

ModalReward ModalReward::fixed(RewardTable base) {
    ModalReward m;
    m.kind_ = ModalRuleKind::Fixed;
    m.base_ = std::move(base);
    return m;
}

ModalReward ModalReward::reachability_penalty(RewardTable base, int target_state, double penalty) {
    if (target_state < 0 || target_state >= base.num_states())
        throw std::invalid_argument("reachability_penalty: target state out of range");
    ModalReward m;
    m.kind_ = ModalRuleKind::ReachabilityPenalty;
    m.base_ = std::move(base);
    m.target_state_ = target_state;
    m.penalty_ = penalty;
    return m;
}

ModalReward ModalReward::affordance_gate(RewardTable base, Affordance affordance) {
    if (affordance.reward.num_states() != base.num_states() ||
        affordance.reward.num_actions() != base.num_actions())
        throw std::invalid_argument("affordance_gate: affordance reward shape mismatch");
    if (!(affordance.discount > 0.0 && affordance.discount < 1.0))
        throw std::invalid_argument("affordance_gate: discount must lie in (0, 1)");
    ModalReward m;
    m.kind_ = ModalRuleKind::AffordanceGate;
    m.base_ = std::move(base);
    m.affordance_ = std::move(affordance);
    return m;
}

ModalReward ModalReward::affordance_penalty(RewardTable base, Affordance affordance, double scale) {
    ModalReward m = affordance_gate(std::move(base), std::move(affordance));
    m.kind_ = ModalRuleKind::AffordancePenalty;
    m.scale_ = scale;
    return m;
}

std::vector<bool> can_reach(const Mat& transition, int num_actions, int target_state) {
    const int num_states = static_cast<int>(transition.cols());
    // Reverse BFS from the target over the support graph.
    std::vector<std::vector<int>> predecessors(static_cast<std::size_t>(num_states));
    for (int s = 0; s < num_states; ++s)
        for (int a = 0; a < num_actions; ++a) {
            const auto row = transition.row(sa_index(s, a, num_actions));
            for (int s2 = 0; s2 < num_states; ++s2)
                if (row[s2] > 0.0) predecessors[static_cast<std::size_t>(s2)].push_back(s);
        }
    std::vector<bool> reach(static_cast<std::size_t>(num_states), false);
    std::deque<int> frontier{target_state};
    reach[static_cast<std::size_t>(target_state)] = true;
    while (!frontier.empty()) {
        const int s = frontier.front();
        frontier.pop_front();
        for (int p : predecessors[static_cast<std::size_t>(s)])
            if (!reach[static_cast<std::size_t>(p)]) {
                reach[static_cast<std::size_t>(p)] = true;
                frontier.push_back(p);
            }
    }
    return reach;
}

namespace {

// Wraps a bare kernel so the shared value-iteration solver can run on it; the
// initial distribution is irrelevant for optimal values.
TabularMdp wrap_kernel(const Mat& tau, int num_actions, double discount) {
    const int num_states = static_cast<int>(tau.cols());
    std::vector<std::string> states, actions;
    for (int s = 0; s < num_states; ++s) states.push_back("s" + std::to_string(s));
    for (int a = 0; a < num_actions; ++a) actions.push_back("a" + std::to_string(a));
    Vec initial = Vec::Constant(num_states, 1.0 / num_states);
    return TabularMdp(std::move(states), std::move(actions), tau, std::move(initial), discount);
}

} // namespace

double ModalReward::evaluate(int s, int a, const Mat& tau) const {
    const int num_actions = base_.num_actions();
    if (tau.cols() != base_.num_states() || tau.rows() != base_.num_states() * num_actions)
        throw std::invalid_argument("ModalReward::evaluate: kernel shape mismatch");
    switch (kind_) {
        case ModalRuleKind::Fixed: return base_(s, a);
        case ModalRuleKind::ReachabilityPenalty: {
            const std::vector<bool> reach = can_reach(tau, num_actions, target_state_);
            return base_(s, a) + (reach[static_cast<std::size_t>(s)] ? 0.0 : penalty_);
        }
        case ModalRuleKind::AffordanceGate:
        case ModalRuleKind::AffordancePenalty: {
            const Vec v =
                optimal_values(wrap_kernel(tau, num_actions, affordance_.discount), affordance_.reward)
                    .tables.v;
            const auto row = tau.row(sa_index(s, a, num_actions));
            double acc = 0.0;
            for (int s2 = 0; s2 < base_.num_states(); ++s2)
                acc += row[s2] * (kind_ == ModalRuleKind::AffordanceGate ? std::tanh(v[s2]) : v[s2]);
            return kind_ == ModalRuleKind::AffordanceGate ? base_(s, a) * acc
                                                          : base_(s, a) - scale_ * acc;
        }
    }
    return 0.0;
}

RewardTable realize_contingent(const ModalReward& modal, const TabularMdp& kernel) {
    const RewardTable& base = modal.base_;
    if (kernel.num_states() != base.num_states() || kernel.num_actions() != base.num_actions())
        throw std::invalid_argument("realize_contingent: kernel shape mismatch");
    const int ns = kernel.num_states();
    const int na = kernel.num_actions();
    Mat values(ns, na);

    switch (modal.kind_) {
        case ModalRuleKind::Fixed: values = base.values(); break;
        case ModalRuleKind::ReachabilityPenalty: {
            const std::vector<bool> reach =
                can_reach(kernel.transition(), na, modal.target_state_);
            for (int s = 0; s < ns; ++s)
                for (int a = 0; a < na; ++a)
                    values(s, a) =
                        base(s, a) + (reach[static_cast<std::size_t>(s)] ? 0.0 : modal.penalty_);
            break;
        }
        case ModalRuleKind::AffordanceGate:
        case ModalRuleKind::AffordancePenalty: {
            const Vec v =
                optimal_values(kernel.with_gamma(modal.affordance_.discount), modal.affordance_.reward)
                    .tables.v;
            for (int s = 0; s < ns; ++s)
                for (int a = 0; a < na; ++a) {
                    const auto row = kernel.successor_row(s, a);
                    double acc = 0.0;
                    for (int s2 = 0; s2 < ns; ++s2)
                        acc += row[s2] * (modal.kind_ == ModalRuleKind::AffordanceGate
                                              ? std::tanh(v[s2])
                                              : v[s2]);
                    values(s, a) = modal.kind_ == ModalRuleKind::AffordanceGate
                                       ? base(s, a) * acc
                                       : base(s, a) - modal.scale_ * acc;
                }
            break;
        }
    }
    return RewardTable(std::move(values));
}

VacuousCheck check_vacuous(const ModalReward& modal, const TabularMdp& base,
                           const std::vector<Mat>& tau_family, int sample_budget,
                           std::uint64_t seed) {
    if (tau_family.empty()) throw std::invalid_argument("check_vacuous: empty kernel family");
    const int ns = base.num_states();
    const int na = base.num_actions();

    VacuousCheck result;
    if (tau_family.size() == 1) {
        // One kernel always admits an exact fixed projection.
        result.vacuous = true;
        result.fixed_reward =
            realize_contingent(modal, base.with_transition(tau_family.front())).flat();
        return result;
    }

    // Shared policy sample across kernels.
    const double det_count = std::pow(static_cast<double>(na), ns);
    std::vector<StationaryPolicy> policies;
    if (det_count <= static_cast<double>(sample_budget))
        policies = enumerate_deterministic_policies(ns, na);
    RandomStream rng = RandomStream::derive(seed, "vacuous_sample", 0);
    while (static_cast<int>(policies.size()) < sample_budget) {
        Mat probs(ns, na);
        for (int s = 0; s < ns; ++s) {
            const std::vector<double> row = rng.dirichlet(na);
            for (int a = 0; a < na; ++a) probs(s, a) = row[static_cast<std::size_t>(a)];
        }
        policies.emplace_back(std::move(probs));
    }
    const int np = static_cast<int>(policies.size());
    const std::size_t constraint_total =
        tau_family.size() * static_cast<std::size_t>(np) * (np - 1) / 2;
    if (constraint_total > (1u << 20))
        throw GuardError("check_vacuous: sampled constraint system exceeds guard");

    std::vector<OrderedPairConstraint> constraints;
    std::vector<int> kernel_of;
    std::vector<std::pair<int, int>> pair_of;
    std::vector<Mat> relations(tau_family.size());
    for (std::size_t t = 0; t < tau_family.size(); ++t) {
        const TabularMdp mdp_t = base.with_transition(tau_family[t]);
        const RewardTable r_t = realize_contingent(modal, mdp_t);
        std::vector<double> j(static_cast<std::size_t>(np));
        std::vector<Vec> m(static_cast<std::size_t>(np));
        for (int i = 0; i < np; ++i) {
            j[static_cast<std::size_t>(i)] =
                evaluate_policy(mdp_t, r_t, policies[static_cast<std::size_t>(i)]).j;
            m[static_cast<std::size_t>(i)] = embed_policy(mdp_t, policies[static_cast<std::size_t>(i)]).mass;
        }
        relations[t] = Mat::Zero(np, np);
        for (int i = 0; i < np; ++i)
            for (int l = i + 1; l < np; ++l) {
                const double gap = j[static_cast<std::size_t>(l)] - j[static_cast<std::size_t>(i)];
                OrderedPairConstraint c;
                c.a = i;
                c.b = l;
                c.rel = gap > 1e-9 ? Ordering::Less : gap < -1e-9 ? Ordering::Greater : Ordering::Equal;
                c.diff = m[static_cast<std::size_t>(l)] - m[static_cast<std::size_t>(i)];
                relations[t](i, l) = c.rel == Ordering::Less ? 1.0 : c.rel == Ordering::Greater ? -1.0 : 0.0;
                constraints.push_back(std::move(c));
                kernel_of.push_back(static_cast<int>(t));
                pair_of.emplace_back(i, l);
            }
    }

    const MarginFit fit = fit_ordering_margin(constraints);
    result.margin = fit.margin;
    result.policies = policies;
    if (fit.meets_margin) {
        result.vacuous = true;
        result.fixed_reward = fit.x;
        return result;
    }

    result.vacuous = false;
    // Locate a two-kernel core: the smallest family slice whose joint
    // orderings already clash.
    for (std::size_t ta = 0; ta < tau_family.size() && result.tau_a < 0; ++ta)
        for (std::size_t tb = ta + 1; tb < tau_family.size() && result.tau_a < 0; ++tb) {
            std::vector<OrderedPairConstraint> slice;
            for (std::size_t c = 0; c < constraints.size(); ++c)
                if (kernel_of[c] == static_cast<int>(ta) || kernel_of[c] == static_cast<int>(tb))
                    slice.push_back(constraints[c]);
            if (!fit_ordering_margin(slice).meets_margin) {
                result.tau_a = static_cast<int>(ta);
                result.tau_b = static_cast<int>(tb);
                for (int i = 0; i < np && result.policy_1 < 0; ++i)
                    for (int l = i + 1; l < np; ++l)
                        if (relations[ta](i, l) * relations[tb](i, l) < 0.0) {
                            result.policy_1 = i;
                            result.policy_2 = l;
                            break;
                        }
            }
        }
    return result;
}

double ModalForm::value_at(int s, int a, double v_next) const {
    switch (kind) {
        case ModalFormKind::TanhGate: return base_reward(s, a) * std::tanh(v_next);
        case ModalFormKind::ValuePenalty: return base_reward(s, a) - scale * v_next;
        case ModalFormKind::Fixed: return base_reward(s, a);
    }
    return 0.0;
}

double ModalForm::value(int s, int a, int s_next, const std::vector<Vec>& affordance_values) const {
    if (kind == ModalFormKind::Fixed) return base_reward(s, a);
    if (affordance_index < 0 || affordance_index >= static_cast<int>(affordance_values.size()))
        throw std::invalid_argument("ModalForm::value: affordance index out of range");
    return value_at(s, a, affordance_values[static_cast<std::size_t>(affordance_index)][s_next]);
}

const char* modal_form_kind_name(ModalFormKind kind) {
    switch (kind) {
        case ModalFormKind::TanhGate: return "tanh_gate";
        case ModalFormKind::ValuePenalty: return "value_penalty";
        case ModalFormKind::Fixed: return "fixed";
    }
    return "fixed";
}

ModalFormKind modal_form_kind_from_name(const std::string& name) {
    if (name == "tanh_gate") return ModalFormKind::TanhGate;
    if (name == "value_penalty") return ModalFormKind::ValuePenalty;
    if (name == "fixed") return ModalFormKind::Fixed;
    throw ParseError("unknown modal form kind: " + name);
}

AffordanceMdp::AffordanceMdp(TabularMdp skeleton, std::vector<Affordance> affordances,
                             ModalForm form)
    : skeleton_(std::move(skeleton)), affordances_(std::move(affordances)), form_(std::move(form)) {
    for (const Affordance& aff : affordances_) {
        if (aff.reward.num_states() != skeleton_.num_states() ||
            aff.reward.num_actions() != skeleton_.num_actions())
            throw std::invalid_argument("AffordanceMdp: affordance reward shape mismatch");
        if (!(aff.discount > 0.0 && aff.discount < 1.0))
            throw std::invalid_argument("AffordanceMdp: affordance discount must lie in (0, 1)");
    }
    if (form_.base_reward.num_states() != skeleton_.num_states() ||
        form_.base_reward.num_actions() != skeleton_.num_actions())
        throw std::invalid_argument("AffordanceMdp: base reward shape mismatch");
    if (form_.kind != ModalFormKind::Fixed &&
        (form_.affordance_index < 0 ||
         form_.affordance_index >= static_cast<int>(affordances_.size())))
        throw std::invalid_argument("AffordanceMdp: modal form names a missing affordance");
}

std::vector<Vec> affordance_optimal_values(const AffordanceMdp& amdp) {
    std::vector<Vec> values;
    values.reserve(amdp.affordances().size());
    for (const Affordance& aff : amdp.affordances())
        values.push_back(optimal_values(amdp.skeleton().with_gamma(aff.discount), aff.reward).tables.v);
    return values;
}

ModalSolution ground_truth_modal_solution(const AffordanceMdp& amdp) {
    const std::vector<Vec> values = affordance_optimal_values(amdp);
    const TabularMdp& mdp = amdp.skeleton();
    Mat resolved(mdp.num_states(), mdp.num_actions());
    for (int s = 0; s < mdp.num_states(); ++s)
        for (int a = 0; a < mdp.num_actions(); ++a) {
            const auto row = mdp.successor_row(s, a);
            double acc = 0.0;
            for (int s2 = 0; s2 < mdp.num_states(); ++s2)
                acc += row[s2] * amdp.form().value(s, a, s2, values);
            resolved(s, a) = acc;
        }
    RewardTable table(std::move(resolved));
    OptimalSolution sol = optimal_values(mdp, table);
    return ModalSolution{std::move(sol.greedy), std::move(sol.tables), std::move(table)};
}

void LearnerConfig::validate() const {
    if (max_steps_per_episode < 1)
        throw std::invalid_argument("LearnerConfig: max_steps_per_episode must be >= 1");
    if (!(step_exponent > 0.5 && step_exponent <= 1.0))
        throw std::invalid_argument("LearnerConfig: step_exponent must lie in (0.5, 1]");
    if (!(min_exploration > 0.0 && min_exploration < 1.0))
        throw std::invalid_argument("LearnerConfig: min_exploration must lie in (0, 1)");
    if (!(exploration_exponent > 0.0 && exploration_exponent <= 1.0))
        throw std::invalid_argument("LearnerConfig: exploration_exponent must lie in (0, 1]");
}

StationaryPolicy LearnerState::greedy_policy() const {
    std::vector<int> actions(static_cast<std::size_t>(q_modal.rows()));
    for (int s = 0; s < q_modal.rows(); ++s) {
        int best = 0;
        for (int a = 1; a < q_modal.cols(); ++a)
            if (q_modal(s, a) > q_modal(s, best)) best = a;
        actions[static_cast<std::size_t>(s)] = best;
    }
    return StationaryPolicy::deterministic(actions, static_cast<int>(q_modal.cols()));
}

std::vector<Vec> LearnerState::affordance_value_estimates() const {
    std::vector<Vec> values;
    values.reserve(q_affordances.size());
    for (const Mat& q : q_affordances) values.push_back(q.rowwise().maxCoeff());
    return values;
}

namespace {

int sample_index(const Vec& distribution, RandomStream& rng) {
    double u = rng.next_double();
    for (int i = 0; i < distribution.size(); ++i) {
        u -= distribution[i];
        if (u < 0.0) return i;
    }
    return static_cast<int>(distribution.size()) - 1;
}

} // namespace

LearnerState learn_affordance_mdp(const AffordanceMdp& amdp, int episodes,
                                  const LearnerConfig& config, std::uint64_t seed) {
    config.validate();
    const TabularMdp& mdp = amdp.skeleton();
    const int ns = mdp.num_states();
    const int na = mdp.num_actions();
    const int k = amdp.num_affordances();

    LearnerState st;
    st.q_modal = Mat::Zero(ns, na);
    st.q_affordances.assign(static_cast<std::size_t>(k), Mat::Zero(ns, na));
    st.visit_counts = Eigen::MatrixXi::Zero(ns, na);

    RandomStream rng = RandomStream::derive(seed, "affordance_learner", 0);
    for (int episode = 0; episode < episodes; ++episode) {
        const double eps = std::max(config.min_exploration,
                                    1.0 / std::pow(1.0 + episode, config.exploration_exponent));
        int s = sample_index(mdp.initial(), rng);
        for (int step = 0; step < config.max_steps_per_episode; ++step) {
            int a;
            if (rng.next_double() < eps) {
                a = rng.next_int(na);
            } else {
                a = 0;
                for (int cand = 1; cand < na; ++cand)
                    if (st.q_modal(s, cand) > st.q_modal(s, a)) a = cand;
            }
            const int s2 = sample_index(Vec(mdp.successor_row(s, a).transpose()), rng);
            const double lr = 1.0 / std::pow(1.0 + st.visit_counts(s, a), config.step_exponent);
            ++st.visit_counts(s, a);

            // Affordance tables first: they learn at their own discounts and
            // are off-policy, so the shared behavior stream is fine.
            for (int i = 0; i < k; ++i) {
                Mat& q = st.q_affordances[static_cast<std::size_t>(i)];
                const Affordance& aff = amdp.affordances()[static_cast<std::size_t>(i)];
                const double target = aff.reward(s, a) + aff.discount * q.row(s2).maxCoeff();
                q(s, a) += lr * (target - q(s, a));
            }

            // Reward estimate from the current value estimates, then the
            // modal update at the outer discount.
            double rhat;
            if (amdp.form().kind == ModalFormKind::Fixed) {
                rhat = amdp.form().base_reward(s, a);
            } else {
                const double v_next = st.q_affordances[static_cast<std::size_t>(
                                                           amdp.form().affordance_index)]
                                          .row(s2)
                                          .maxCoeff();
                rhat = amdp.form().value_at(s, a, v_next);
            }
            const double target = rhat + mdp.gamma() * st.q_modal.row(s2).maxCoeff();
            st.q_modal(s, a) += lr * (target - st.q_modal(s, a));
            s = s2;
        }
    }
    st.episodes_run = episodes;
    return st;
}

} // namespace rewardlab
