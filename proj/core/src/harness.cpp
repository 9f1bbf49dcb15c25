#include "rewardlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json_detail.hpp"
#include "rewardlab/errors.hpp"
#include "rewardlab/io.hpp"
#include "rewardlab/modal.hpp"
#include "rewardlab/random.hpp"
#include "rewardlab/scalarize.hpp"
#include "rewardlab/solvers.hpp"

namespace rewardlab {

const char* experiment_kind_name(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::Scalarize: return "scalarize";
        case ExperimentKind::RiskTransform: return "risk_transform";
        case ExperimentKind::ModalLearn: return "modal_learn";
        case ExperimentKind::MorlSolve: return "morl_solve";
        case ExperimentKind::CorollarySuite: return "corollary_suite";
    }
    throw std::invalid_argument("experiment_kind_name: unknown kind");
}

ExperimentKind experiment_kind_from_name(const std::string& name) {
    if (name == "scalarize") return ExperimentKind::Scalarize;
    if (name == "risk_transform") return ExperimentKind::RiskTransform;
    if (name == "modal_learn") return ExperimentKind::ModalLearn;
    if (name == "morl_solve") return ExperimentKind::MorlSolve;
    if (name == "corollary_suite") return ExperimentKind::CorollarySuite;
    throw std::invalid_argument("unknown experiment kind: " + name);
}

namespace {

std::uint64_t seed_from(const nlohmann::json& value) {
    const nlohmann::json& seed = detail::require(value, "seed");
    if (!seed.is_number_integer() || (seed.is_number_integer() && seed.get<std::int64_t>() < 0 &&
                                      !seed.is_number_unsigned()))
        throw ParseError("seed must be a non-negative integer");
    return seed.get<std::uint64_t>();
}

int int_or(const nlohmann::json& value, const char* key, int fallback) {
    if (!value.contains(key)) return fallback;
    if (!value[key].is_number_integer()) throw ParseError(std::string(key) + " must be an integer");
    return value[key].get<int>();
}

std::string path_at(const nlohmann::json& value, const char* key) {
    const nlohmann::json& v = detail::require(value, key);
    if (!v.is_string()) throw ParseError(std::string(key) + " must be a path string");
    return v.get<std::string>();
}

void require_readable(const std::string& path, const char* key) {
    if (!std::filesystem::exists(path))
        throw ParseError(std::string(key) + " references a missing file: " + path);
}

} // namespace

void ExperimentConfig::validate() const {
    if (output.empty()) throw ParseError("experiment config: output path must be set");
    if (budget < 3) throw ParseError("experiment config: budget must be >= 3");
    if (probes < 1 || episodes < 1 || steps < 1 || restarts < 1 || count < 1)
        throw ParseError("experiment config: budgets must be positive");
    switch (kind) {
        case ExperimentKind::Scalarize:
            require_readable(momdp_path, "momdp");
            require_readable(objective_path, "objective");
            break;
        case ExperimentKind::RiskTransform:
            require_readable(momdp_path, "momdp");
            require_readable(transform_path, "transform");
            break;
        case ExperimentKind::ModalLearn: require_readable(affordance_path, "affordance_mdp"); break;
        case ExperimentKind::MorlSolve:
            require_readable(momdp_path, "momdp");
            require_readable(objective_path, "objective");
            break;
        case ExperimentKind::CorollarySuite: break;
    }
}

ExperimentConfig experiment_config_from_json(const std::string& text) {
    const nlohmann::json v = detail::parse_text(text);
    if (!v.is_object()) throw ParseError("experiment config must be a JSON object");
    ExperimentConfig config;
    const nlohmann::json& kind = detail::require(v, "experiment");
    if (!kind.is_string()) throw ParseError("experiment must be a string");
    try {
        config.kind = experiment_kind_from_name(kind.get<std::string>());
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
    }
    config.seed = seed_from(v);
    config.output = path_at(v, "output");
    switch (config.kind) {
        case ExperimentKind::Scalarize:
            config.momdp_path = path_at(v, "momdp");
            config.objective_path = path_at(v, "objective");
            config.budget = int_or(v, "budget", config.budget);
            break;
        case ExperimentKind::RiskTransform:
            config.momdp_path = path_at(v, "momdp");
            config.transform_path = path_at(v, "transform");
            config.probes = int_or(v, "probes", config.probes);
            break;
        case ExperimentKind::ModalLearn:
            config.affordance_path = path_at(v, "affordance_mdp");
            config.episodes = int_or(v, "episodes", config.episodes);
            break;
        case ExperimentKind::MorlSolve:
            config.momdp_path = path_at(v, "momdp");
            config.objective_path = path_at(v, "objective");
            config.steps = int_or(v, "steps", config.steps);
            config.restarts = int_or(v, "restarts", config.restarts);
            break;
        case ExperimentKind::CorollarySuite:
            config.count = int_or(v, "count", config.count);
            break;
    }
    // Referenced inputs must exist up front so a bad config fails before any
    // work (and before the output file is touched).
    for (const std::string* path :
         {&config.momdp_path, &config.objective_path, &config.transform_path,
          &config.affordance_path}) {
        if (!path->empty() && !std::filesystem::exists(*path))
            throw ParseError("referenced file not found: " + *path);
    }
    return config;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    return experiment_config_from_json(read_file(path));
}

namespace {

std::vector<double> as_list(const Vec& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

void run_scalarize(const ExperimentConfig& config) {
    const Momdp momdp = load_momdp(config.momdp_path);
    const ObjectiveSpec spec = objective_from_json(read_file(config.objective_path));
    try {
        spec.validate_for(momdp.num_rewards());
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
    }
    const PolicySample sample = sample_policies(momdp, config.budget, config.seed);
    const ScalarizationVerdict verdict = fit_weights(momdp, spec, sample);
    const VerificationReport check = verify_verdict(
        momdp, spec, verdict, RandomStream::derive(config.seed, "run_holdout", 0).next_u64(),
        config.budget);

    nlohmann::json out;
    out["experiment"] = "scalarize";
    out["seed"] = config.seed;
    out["objective"] = objective_kind_name(spec.kind);
    out["sample_size"] = sample.size();
    out["verdict"] = nlohmann::json::parse(verdict_to_json(verdict));
    out["verification"] = {{"holdout_pairs", check.holdout_pairs},
                           {"disagreements", check.disagreements},
                           {"witness_confirmed", check.witness_confirmed},
                           {"certificate_confirmed", check.certificate_confirmed}};
    write_file_atomic(config.output, out.dump(2) + "\n");
}

void run_risk_transform(const ExperimentConfig& config) {
    const Momdp momdp = load_momdp(config.momdp_path);
    const UtilityTransform transform = transform_from_json(read_file(config.transform_path));
    const RewardTable& r1 = momdp.rewards().front();
    const TransformFeasibility feasibility =
        check_transform_realizable(momdp.mdp(), r1, transform, config.probes, config.seed);

    nlohmann::json out;
    out["experiment"] = "risk_transform";
    out["seed"] = config.seed;
    out["transform"] = nlohmann::json::parse(transform_to_json(transform));
    out["feasibility"] = nlohmann::json::parse(feasibility_to_json(feasibility));
    if (feasibility.reward) {
        const MonotoneScanReport scan = monotone_consistency_scan(
            r1, *feasibility.reward, momdp.mdp().gamma(), config.probes,
            RandomStream::derive(config.seed, "run_scan", 0).next_u64());
        out["monotone"] = nlohmann::json::parse(scan_to_json(scan));
    }
    write_file_atomic(config.output, out.dump(2) + "\n");
}

void run_modal_learn(const ExperimentConfig& config) {
    const AffordanceMdp amdp = load_affordance_mdp(config.affordance_path);
    const LearnerConfig learner_config;
    const LearnerState state =
        learn_affordance_mdp(amdp, config.episodes, learner_config, config.seed);
    const ModalSolution truth = ground_truth_modal_solution(amdp);

    const Vec learned_v = state.q_modal.rowwise().maxCoeff();
    const double value_error = (learned_v - truth.tables.v).lpNorm<Eigen::Infinity>();
    const StationaryPolicy greedy = state.greedy_policy();
    std::vector<int> greedy_actions, truth_actions;
    int matches = 0;
    for (int s = 0; s < amdp.skeleton().num_states(); ++s) {
        int ga = 0, ta = 0;
        state.q_modal.row(s).maxCoeff(&ga);
        truth.tables.q.row(s).maxCoeff(&ta);
        greedy_actions.push_back(ga);
        truth_actions.push_back(ta);
        if (ga == ta) ++matches;
    }
    (void)greedy;

    nlohmann::json out;
    out["experiment"] = "modal_learn";
    out["seed"] = config.seed;
    out["episodes"] = state.episodes_run;
    out["value_error"] = value_error;
    out["greedy_actions"] = greedy_actions;
    out["oracle_actions"] = truth_actions;
    out["greedy_matches"] = matches;
    write_file_atomic(config.output, out.dump(2) + "\n");
}

void run_morl_solve(const ExperimentConfig& config) {
    const Momdp momdp = load_momdp(config.momdp_path);
    const ObjectiveSpec spec = objective_from_json(read_file(config.objective_path));
    try {
        spec.validate_for(momdp.num_rewards());
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
    }
    if (!is_differentiable(spec.kind))
        throw ParseError(std::string("morl_solve requires a differentiable objective, got ") +
                         objective_kind_name(spec.kind));
    const MorlSolution solution = solve_differentiable_morl_multistart(
        momdp, spec, config.restarts, config.steps, config.seed);

    nlohmann::json out;
    out["experiment"] = "morl_solve";
    out["seed"] = config.seed;
    out["objective"] = objective_kind_name(spec.kind);
    out["utility"] = solution.utility;
    out["j"] = as_list(solution.j);
    out["iterations"] = solution.report.iterations;
    // wall time deliberately omitted: payloads must be seed-deterministic
    write_file_atomic(config.output, out.dump(2) + "\n");
}

} // namespace

void run_experiment(const ExperimentConfig& config) {
    config.validate();
    switch (config.kind) {
        case ExperimentKind::Scalarize: run_scalarize(config); return;
        case ExperimentKind::RiskTransform: run_risk_transform(config); return;
        case ExperimentKind::ModalLearn: run_modal_learn(config); return;
        case ExperimentKind::MorlSolve: run_morl_solve(config); return;
        case ExperimentKind::CorollarySuite:
            corollary_suite(config.seed, config.count, config.output);
            return;
    }
}

void RandomInstanceSpec::validate() const {
    if (states < 1 || actions < 1 || rewards < 1)
        throw GuardError("RandomInstanceSpec: sizes must be >= 1");
    if (!(gamma_lo > 0.0 && gamma_lo <= gamma_hi && gamma_hi < 1.0))
        throw GuardError("RandomInstanceSpec: gamma range must sit inside (0, 1)");
    if (!(reward_lo <= reward_hi))
        throw GuardError("RandomInstanceSpec: reward range must be ordered");
    if (!(sparsity >= 0.0 && sparsity < 1.0))
        throw GuardError("RandomInstanceSpec: sparsity must lie in [0, 1) so rows stay stochastic");
}

RandomInstanceSpec instance_spec_from_json(const std::string& text) {
    const nlohmann::json v = detail::parse_text(text);
    if (!v.is_object()) throw ParseError("instance spec must be a JSON object");
    RandomInstanceSpec spec;
    spec.states = int_or(v, "states", spec.states);
    spec.actions = int_or(v, "actions", spec.actions);
    spec.rewards = int_or(v, "k", spec.rewards);
    if (v.contains("gamma_range")) {
        const auto& r = v["gamma_range"];
        if (!r.is_array() || r.size() != 2) throw ParseError("gamma_range must be [lo, hi]");
        spec.gamma_lo = r[0].get<double>();
        spec.gamma_hi = r[1].get<double>();
    }
    if (v.contains("reward_range")) {
        const auto& r = v["reward_range"];
        if (!r.is_array() || r.size() != 2) throw ParseError("reward_range must be [lo, hi]");
        spec.reward_lo = r[0].get<double>();
        spec.reward_hi = r[1].get<double>();
    }
    if (v.contains("sparsity")) spec.sparsity = v["sparsity"].get<double>();
    spec.seed = seed_from(v);
    try {
        spec.validate();
    } catch (const GuardError& e) {
        throw ParseError(e.what());
    }
    return spec;
}

namespace {

// Normalizes to an exact unit sum: divide through, then absorb the float
// residual into the largest entry so the constructor's row checks pass.
void normalize_exact(Vec& row) {
    row /= row.sum();
    int top = 0;
    row.maxCoeff(&top);
    row[top] += 1.0 - row.sum();
}

std::vector<std::string> indexed_names(const char* prefix, int n) {
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) names.push_back(prefix + std::to_string(i));
    return names;
}

} // namespace

Momdp generate_random_instance(const RandomInstanceSpec& spec) {
    spec.validate();
    RandomStream trans_rng = RandomStream::derive(spec.seed, "gen_transition", 0);
    RandomStream reward_rng = RandomStream::derive(spec.seed, "gen_reward", 0);
    RandomStream mu_rng = RandomStream::derive(spec.seed, "gen_mu0", 0);
    RandomStream gamma_rng = RandomStream::derive(spec.seed, "gen_gamma", 0);

    const int ns = spec.states;
    const int na = spec.actions;
    const int keep = std::max(1, static_cast<int>(std::lround((1.0 - spec.sparsity) * ns)));

    Mat kernel = Mat::Zero(ns * na, ns);
    std::vector<int> successors(static_cast<std::size_t>(ns));
    for (int s = 0; s < ns; ++s)
        for (int a = 0; a < na; ++a) {
            for (int i = 0; i < ns; ++i) successors[static_cast<std::size_t>(i)] = i;
            for (int i = 0; i < keep; ++i)
                std::swap(successors[static_cast<std::size_t>(i)],
                          successors[static_cast<std::size_t>(i + trans_rng.next_int(ns - i))]);
            Vec row = Vec::Zero(ns);
            for (int i = 0; i < keep; ++i)
                row[successors[static_cast<std::size_t>(i)]] = trans_rng.uniform(0.05, 1.0);
            normalize_exact(row);
            kernel.row(sa_index(s, a, na)) = row.transpose();
        }

    Vec mu0(ns);
    for (int s = 0; s < ns; ++s) mu0[s] = mu_rng.uniform(0.05, 1.0);
    normalize_exact(mu0);

    const double gamma = gamma_rng.uniform(spec.gamma_lo, spec.gamma_hi);
    TabularMdp mdp(indexed_names("s", ns), indexed_names("a", na), std::move(kernel), mu0, gamma);

    std::vector<RewardTable> rewards;
    for (int r = 0; r < spec.rewards; ++r) {
        Mat values(ns, na);
        for (int s = 0; s < ns; ++s)
            for (int a = 0; a < na; ++a)
                values(s, a) = reward_rng.uniform(spec.reward_lo, spec.reward_hi);
        rewards.emplace_back(std::move(values));
    }
    return Momdp(std::move(mdp), std::move(rewards));
}

namespace {

constexpr int kSuiteBudget = 24;      // all det pairs fit for the shapes below
constexpr int kMaxProposals = 400;
constexpr double kCross = 0.03;       // det-level crossing margin

// All (reward x deterministic policy) returns; shapes are kept small enough
// that every deterministic pair's mixture lands in the fitted sample.
Mat deterministic_j(const Momdp& momdp) {
    const auto dets =
        enumerate_deterministic_policies(momdp.mdp().num_states(), momdp.mdp().num_actions());
    Mat j(momdp.num_rewards(), static_cast<Eigen::Index>(dets.size()));
    for (std::size_t d = 0; d < dets.size(); ++d)
        for (int r = 0; r < momdp.num_rewards(); ++r)
            j(r, static_cast<Eigen::Index>(d)) =
                evaluate_policy(momdp.mdp(), momdp.rewards()[static_cast<std::size_t>(r)], dets[d])
                    .j;
    return j;
}

Momdp propose_momdp(std::uint64_t seed, int proposal) {
    RandomStream shape = RandomStream::derive(seed, "ordering_shape", proposal);
    const bool bandit = shape.next_double() < 0.6;
    RandomInstanceSpec spec;
    spec.states = bandit ? 1 : 2;
    spec.actions = bandit ? 3 + shape.next_int(4) : 2;
    spec.rewards = 2;
    spec.gamma_lo = 0.5;
    spec.gamma_hi = 0.9;
    spec.reward_lo = -1.0;
    spec.reward_hi = 1.0;
    spec.seed = RandomStream::derive(seed, "ordering_instance", proposal).next_u64();
    return generate_random_instance(spec);
}

double spread(const Mat& j, int row) { return j.row(row).maxCoeff() - j.row(row).minCoeff(); }

// Sign disagreement beyond a margin in both directions: the pair is neither
// equivalent nor opposite nor trivial over the deterministic policies.
bool unrelated_rewards(const Mat& j, double margin) {
    bool agree = false, disagree = false;
    for (int a = 0; a + 1 < j.cols(); ++a)
        for (int b = a + 1; b < j.cols(); ++b) {
            const double d1 = j(0, b) - j(0, a);
            const double d2 = j(1, b) - j(1, a);
            if (std::abs(d1) < margin || std::abs(d2) < margin) continue;
            if (d1 * d2 > 0) agree = true;
            else disagree = true;
            if (agree && disagree) return true;
        }
    return false;
}

// A pair of deterministic policies whose two returns order oppositely, each
// gap at least the margin; picks the pair maximizing the smaller gap.
struct CrossPair {
    int a = -1, b = -1;   // j(0, a) > j(0, b), j(1, b) > j(1, a)
    double gap = 0.0;
};

std::optional<CrossPair> crossing_pair(const Mat& j, double margin) {
    CrossPair best;
    for (int a = 0; a < j.cols(); ++a)
        for (int b = 0; b < j.cols(); ++b) {
            const double g1 = j(0, a) - j(0, b);
            const double g2 = j(1, b) - j(1, a);
            const double gap = std::min(g1, g2);
            if (gap > best.gap) best = CrossPair{a, b, gap};
        }
    if (best.gap < margin) return std::nullopt;
    return best;
}

OrderingInstance lexmax_like_instance(const std::string& row, std::uint64_t seed,
                                      ObjectiveKind kind) {
    for (int proposal = 0; proposal < kMaxProposals; ++proposal) {
        Momdp momdp = propose_momdp(seed, proposal);
        const Mat j = deterministic_j(momdp);
        if (spread(j, 0) < 0.05 || spread(j, 1) < 0.05) continue;
        if (!unrelated_rewards(j, kCross)) continue;
        if (kind == ObjectiveKind::ConSat) {
            RandomStream crng = RandomStream::derive(seed, "consat_level", proposal);
            const double lo = j.row(0).minCoeff();
            const double hi = j.row(0).maxCoeff();
            const double span = hi - lo;
            if (span < 0.1) continue;
            if (!crossing_pair(j, kCross)) continue;
            ObjectiveSpec spec = ObjectiveSpec::con_sat(0.0);
            bool placed = false;
            for (int attempt = 0; attempt < 8 && !placed; ++attempt) {
                const double c = lo + crng.uniform(0.4, 0.6) * span;
                double nearest = span;
                for (int col = 0; col < j.cols(); ++col)
                    nearest = std::min(nearest, std::abs(j(0, col) - c));
                if (nearest < 1e-3 * span) continue;
                spec.c = c;
                placed = true;
            }
            if (!placed) continue;
            return OrderingInstance{std::move(momdp), spec, proposal};
        }
        return OrderingInstance{std::move(momdp), ObjectiveSpec::lex_max(), proposal};
    }
    throw GuardError("rejection-sampling budget exhausted for row " + row);
}

OrderingInstance maxmin_instance(const std::string& row, std::uint64_t seed) {
    for (int proposal = 0; proposal < kMaxProposals; ++proposal) {
        Momdp momdp = propose_momdp(seed, proposal);
        const Mat j = deterministic_j(momdp);
        if (spread(j, 0) < 0.05 || spread(j, 1) < 0.05) continue;
        // Crossing min: neither reward is uniformly the smaller one.
        const Vec gap = j.row(0) - j.row(1);
        if (gap.maxCoeff() < kCross || gap.minCoeff() > -kCross) continue;
        return OrderingInstance{std::move(momdp), ObjectiveSpec::max_min(), proposal};
    }
    throw GuardError("rejection-sampling budget exhausted for row " + row);
}

OrderingInstance maxsat_instance(const std::string& row, std::uint64_t seed) {
    for (int proposal = 0; proposal < kMaxProposals; ++proposal) {
        Momdp momdp = propose_momdp(seed, proposal);
        const Mat j = deterministic_j(momdp);
        if (spread(j, 0) < 0.05 || spread(j, 1) < 0.05) continue;
        const auto cross = crossing_pair(j, kCross);
        if (!cross) continue;
        // Thresholds in the upper part of each crossing gap: the pair's 50/50
        // mixture then satisfies neither, while each endpoint satisfies one.
        bool placed = false;
        Vec thresholds(2);
        for (double frac : {0.75, 0.7, 0.65, 0.6}) {
            thresholds[0] = j(0, cross->b) + frac * (j(0, cross->a) - j(0, cross->b));
            thresholds[1] = j(1, cross->a) + frac * (j(1, cross->b) - j(1, cross->a));
            double nearest = 1.0;
            for (int col = 0; col < j.cols(); ++col)
                for (int r = 0; r < 2; ++r)
                    nearest = std::min(nearest, std::abs(j(r, col) - thresholds[r]));
            if (nearest > 1e-4) {
                placed = true;
                break;
            }
        }
        if (!placed) continue;
        return OrderingInstance{std::move(momdp), ObjectiveSpec::max_sat(thresholds), proposal};
    }
    throw GuardError("rejection-sampling budget exhausted for row " + row);
}

OrderingInstance degenerate_instance(const std::string& row, std::uint64_t seed) {
    Momdp base = propose_momdp(seed, 0);
    RandomStream rng = RandomStream::derive(seed, "degenerate_params", 0);
    const TabularMdp& mdp = base.mdp();
    const Mat& r0 = base.rewards()[0].values();

    if (row == "lexmax") {
        // Equivalent rewards: the order collapses to the primary one.
        const double b = rng.uniform(0.5, 2.0);
        const double a = rng.uniform(-0.5, 0.5);
        std::vector<RewardTable> rewards{base.rewards()[0],
                                         RewardTable(b * r0 + a * Mat::Ones(r0.rows(), r0.cols()))};
        return OrderingInstance{Momdp(mdp, std::move(rewards)), ObjectiveSpec::lex_max(), 0};
    }
    if (row == "maxmin") {
        // Reward 0 dominated entrywise: the min is always reward 0.
        Mat lower = r0;
        for (int s = 0; s < lower.rows(); ++s)
            for (int a = 0; a < lower.cols(); ++a) lower(s, a) -= rng.uniform(0.2, 0.6);
        std::vector<RewardTable> rewards{RewardTable(std::move(lower)), base.rewards()[0]};
        return OrderingInstance{Momdp(mdp, std::move(rewards)), ObjectiveSpec::max_min(), 0};
    }
    if (row == "maxsat") {
        // Unreachable thresholds: the satisfied count is constantly zero.
        const Mat j = deterministic_j(base);
        Vec thresholds(2);
        thresholds[0] = j.row(0).maxCoeff() + 1.0;
        thresholds[1] = j.row(1).maxCoeff() + 1.0;
        return OrderingInstance{std::move(base), ObjectiveSpec::max_sat(thresholds), 0};
    }
    if (row == "consat") {
        // Constraint nothing meets: the order collapses to the level axis.
        const Mat j = deterministic_j(base);
        return OrderingInstance{std::move(base), ObjectiveSpec::con_sat(j.row(0).maxCoeff() + 1.0),
                                0};
    }
    throw GuardError("unknown degenerate ordering row: " + row);
}

} // namespace

OrderingInstance generate_ordering_instance(const std::string& row, bool degenerate,
                                            std::uint64_t seed) {
    if (degenerate) return degenerate_instance(row, seed);
    if (row == "lexmax") return lexmax_like_instance(row, seed, ObjectiveKind::LexMax);
    if (row == "consat") return lexmax_like_instance(row, seed, ObjectiveKind::ConSat);
    if (row == "maxmin") return maxmin_instance(row, seed);
    if (row == "maxsat") return maxsat_instance(row, seed);
    throw GuardError("unknown ordering row: " + row);
}

TransformInstance generate_transform_instance(const std::string& row, std::uint64_t seed) {
    RandomStream rng = RandomStream::derive(seed, "transform_instance", 0);
    for (int proposal = 0; proposal < kMaxProposals; ++proposal) {
        RandomInstanceSpec spec;
        spec.states = 2 + rng.next_int(2);
        spec.actions = 2;
        spec.rewards = 1;
        spec.gamma_lo = 0.5;
        spec.gamma_hi = 0.95;
        spec.reward_lo = 0.2; // positive returns keep every family's domain open
        spec.reward_hi = 1.0;
        spec.seed = RandomStream::derive(seed, "transform_mdp", proposal).next_u64();
        Momdp momdp = generate_random_instance(spec);
        const Mat& values = momdp.rewards()[0].values();
        if (values.maxCoeff() - values.minCoeff() < 0.3) continue; // non-trivial r1

        const double gamma = momdp.mdp().gamma();
        const double g_max = values.maxCoeff() / (1.0 - gamma);
        UtilityTransform transform;
        if (row == "exponential") transform = UtilityTransform::exponential(rng.uniform(0.5, 2.0));
        else if (row == "isoelastic")
            transform = UtilityTransform::isoelastic(rng.next_double() < 0.5
                                                         ? rng.uniform(0.3, 0.8)
                                                         : rng.uniform(1.3, 2.5));
        else if (row == "logarithmic") transform = UtilityTransform::logarithmic();
        else if (row == "quadratic")
            // alpha keeps 2 alpha G below 1 over every realizable return
            transform = UtilityTransform::quadratic(rng.uniform(0.5, 0.9) * 0.5 / g_max);
        else if (row == "affine")
            transform = UtilityTransform::affine(rng.uniform(0.5, 2.0), rng.uniform(-1.0, 1.0));
        else throw GuardError("unknown transform row: " + row);

        return TransformInstance{momdp.mdp(), momdp.rewards()[0], transform};
    }
    throw GuardError("rejection-sampling budget exhausted for row " + row);
}

namespace {

enum class RowKind { Ordering, OrderingDegenerate, Transform };

struct RowPlan {
    std::string name;
    RowKind kind = RowKind::Ordering;
    std::string base;
};

struct InstanceOutcome {
    std::string payload;
    bool generated = false;
    bool expected = false;
    bool anomaly = false;
    int rejected = 0;
};

int suite_thread_count(int total) {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("LAB_THREADS")) {
        char* end = nullptr;
        const long parsed = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || parsed < 1)
            throw ParseError("LAB_THREADS must be a positive integer");
        n = static_cast<int>(std::min<long>(parsed, 256));
    }
    return std::max(1, std::min(n, total));
}

InstanceOutcome run_ordering_instance(const RowPlan& plan, int index, std::uint64_t suite_seed) {
    const bool degenerate = plan.kind == RowKind::OrderingDegenerate;
    const std::uint64_t seed =
        RandomStream::derive(suite_seed, "suite-" + plan.name, static_cast<std::uint64_t>(index))
            .next_u64();
    InstanceOutcome outcome;
    nlohmann::json payload;
    payload["row"] = plan.name;
    payload["index"] = index;
    payload["seed"] = seed;
    try {
        const OrderingInstance instance = generate_ordering_instance(plan.base, degenerate, seed);
        outcome.generated = true;
        outcome.rejected = instance.rejected;
        const PolicySample sample = sample_policies(
            instance.momdp, kSuiteBudget, RandomStream::derive(seed, "suite_sample", 0).next_u64());
        const ScalarizationVerdict verdict = fit_weights(instance.momdp, instance.objective, sample);

        outcome.expected = degenerate
                               ? verdict.outcome == ScalarizationOutcome::Scalarizable
                               : (verdict.outcome == ScalarizationOutcome::Unscalarizable &&
                                  !verdict.witness.empty());
        if (!outcome.expected) {
            if (degenerate) outcome.anomaly = true;
            else {
                // Exceptions only count as anomalies when a triple holdout
                // refutes the verdict they produced.
                bool refuted = false;
                for (std::uint64_t t = 0; t < 3; ++t) {
                    const VerificationReport report = verify_verdict(
                        instance.momdp, instance.objective, verdict,
                        RandomStream::derive(seed, "suite_holdout", t).next_u64(), kSuiteBudget);
                    if (verdict.outcome == ScalarizationOutcome::Scalarizable)
                        refuted = refuted || report.disagreements > 0;
                    else
                        refuted = refuted ||
                                  !(report.witness_confirmed && report.certificate_confirmed);
                }
                outcome.anomaly = refuted;
            }
        }
        payload["objective"] = objective_kind_name(instance.objective.kind);
        payload["rejected_proposals"] = instance.rejected;
        payload["verdict"] = nlohmann::json::parse(verdict_to_json(verdict));
        payload["expected"] = outcome.expected;
        payload["anomaly"] = outcome.anomaly;
    } catch (const std::exception& e) {
        // Generation exhaustion is reported per row; a checker failure after
        // a successful generation counts against the row as an anomaly.
        payload["error"] = e.what();
        payload["expected"] = false;
        outcome.expected = false;
        outcome.anomaly = outcome.generated;
        payload["anomaly"] = outcome.anomaly;
    }
    outcome.payload = payload.dump(2) + "\n";
    return outcome;
}

InstanceOutcome run_transform_instance(const RowPlan& plan, int index, std::uint64_t suite_seed) {
    const std::uint64_t seed =
        RandomStream::derive(suite_seed, "suite-" + plan.name, static_cast<std::uint64_t>(index))
            .next_u64();
    InstanceOutcome outcome;
    nlohmann::json payload;
    payload["row"] = plan.name;
    payload["index"] = index;
    payload["seed"] = seed;
    const bool expect_realizable = plan.base == "affine";
    try {
        const TransformInstance instance = generate_transform_instance(plan.base, seed);
        outcome.generated = true;
        const int probes = 40;
        const TransformFeasibility feasibility = check_transform_realizable(
            instance.mdp, instance.r1, instance.transform, probes,
            RandomStream::derive(seed, "suite_probes", 0).next_u64());

        auto is_expected = [&](const TransformFeasibility& f) {
            return expect_realizable ? f.outcome == FeasibilityOutcome::Realizable
                                     : (f.outcome == FeasibilityOutcome::Infeasible &&
                                        f.residual > 1e-5);
        };
        outcome.expected = is_expected(feasibility);
        if (!outcome.expected) {
            const TransformFeasibility recheck = check_transform_realizable(
                instance.mdp, instance.r1, instance.transform, 2 * probes,
                RandomStream::derive(seed, "suite_reprobe", 0).next_u64());
            outcome.anomaly = !is_expected(recheck);
        }
        payload["gamma"] = instance.mdp.gamma();
        payload["transform"] = nlohmann::json::parse(transform_to_json(instance.transform));
        payload["feasibility"] = nlohmann::json::parse(feasibility_to_json(feasibility));
        payload["expected"] = outcome.expected;
        payload["anomaly"] = outcome.anomaly;
    } catch (const std::exception& e) {
        payload["error"] = e.what();
        payload["expected"] = false;
        outcome.expected = false;
        outcome.anomaly = outcome.generated;
        payload["anomaly"] = outcome.anomaly;
    }
    outcome.payload = payload.dump(2) + "\n";
    return outcome;
}

std::string padded(int value) {
    std::string digits = std::to_string(value);
    while (digits.size() < 3) digits.insert(digits.begin(), '0');
    return digits;
}

} // namespace

SuiteSummary corollary_suite(std::uint64_t seed, int instance_count,
                             const std::string& output_dir) {
    if (instance_count < 1) throw GuardError("corollary_suite: instance_count must be >= 1");
    const std::vector<RowPlan> plans = {
        {"lexmax", RowKind::Ordering, "lexmax"},
        {"maxmin", RowKind::Ordering, "maxmin"},
        {"maxsat", RowKind::Ordering, "maxsat"},
        {"consat", RowKind::Ordering, "consat"},
        {"lexmax-degenerate", RowKind::OrderingDegenerate, "lexmax"},
        {"maxmin-degenerate", RowKind::OrderingDegenerate, "maxmin"},
        {"maxsat-degenerate", RowKind::OrderingDegenerate, "maxsat"},
        {"consat-degenerate", RowKind::OrderingDegenerate, "consat"},
        {"exponential", RowKind::Transform, "exponential"},
        {"isoelastic", RowKind::Transform, "isoelastic"},
        {"logarithmic", RowKind::Transform, "logarithmic"},
        {"quadratic", RowKind::Transform, "quadratic"},
        {"affine", RowKind::Transform, "affine"},
    };

    const int total = static_cast<int>(plans.size()) * instance_count;
    std::vector<InstanceOutcome> outcomes(static_cast<std::size_t>(total));
    std::atomic<int> cursor{0};
    auto worker = [&]() {
        for (int i = cursor.fetch_add(1); i < total; i = cursor.fetch_add(1)) {
            const RowPlan& plan = plans[static_cast<std::size_t>(i / instance_count)];
            const int index = i % instance_count;
            outcomes[static_cast<std::size_t>(i)] =
                plan.kind == RowKind::Transform ? run_transform_instance(plan, index, seed)
                                                : run_ordering_instance(plan, index, seed);
        }
    };

    const int threads = suite_thread_count(total);
    if (threads <= 1) worker();
    else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    // Writes stay sequential and index-ordered: payloads are pure functions
    // of (seed, count), so a rerun reproduces every byte.
    const std::filesystem::path dir(output_dir);
    std::filesystem::create_directories(dir);
    SuiteSummary summary;
    std::ostringstream csv;
    csv << "row,instances,hypothesis_satisfied,expected_verdicts,rejected_proposals,anomalies\n";
    for (std::size_t p = 0; p < plans.size(); ++p) {
        SuiteRow row;
        row.name = plans[p].name;
        row.instances = instance_count;
        for (int i = 0; i < instance_count; ++i) {
            const InstanceOutcome& outcome =
                outcomes[p * static_cast<std::size_t>(instance_count) + static_cast<std::size_t>(i)];
            write_file_atomic((dir / (row.name + "_" + padded(i) + ".json")).string(),
                              outcome.payload);
            if (outcome.generated) ++row.hypothesis_satisfied;
            if (outcome.expected) ++row.expected_verdicts;
            if (outcome.anomaly) row.anomalies.push_back(i);
            row.rejected += outcome.rejected;
        }
        csv << row.name << ',' << row.instances << ',' << row.hypothesis_satisfied << ','
            << row.expected_verdicts << ',' << row.rejected << ',';
        for (std::size_t a = 0; a < row.anomalies.size(); ++a) {
            if (a > 0) csv << ';';
            csv << row.anomalies[a];
        }
        csv << '\n';
        summary.rows.push_back(std::move(row));
    }
    summary.csv = csv.str();
    write_file_atomic((dir / "summary.csv").string(), summary.csv);
    return summary;
}

} // namespace rewardlab
