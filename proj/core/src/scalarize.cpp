#include "rewardlab/scalarize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "rewardlab/errors.hpp"
#include "rewardlab/lp.hpp"
#include "rewardlab/occupancy.hpp"
#include "rewardlab/random.hpp"

namespace rewardlab {

namespace {

constexpr double kCompareTol = 1e-9;

Vec j_vector_for(const Momdp& momdp, const StationaryPolicy& pi) {
    Vec j(momdp.num_rewards());
    for (int i = 0; i < momdp.num_rewards(); ++i)
        j[i] = evaluate_policy(momdp.mdp(), momdp.rewards()[static_cast<std::size_t>(i)], pi).j;
    return j;
}

void append_policy(PolicySample& sample, const Momdp& momdp, StationaryPolicy policy,
                   PolicyOrigin origin) {
    const Vec j = j_vector_for(momdp, policy);
    sample.policies.push_back(std::move(policy));
    sample.origins.push_back(origin);
    sample.j.conservativeResize(momdp.num_rewards(), sample.j.cols() + 1);
    sample.j.col(sample.j.cols() - 1) = j;
}

} // namespace

PolicySample sample_policies(const Momdp& momdp, int budget, std::uint64_t seed) {
    if (budget < 1) throw std::invalid_argument("sample_policies: budget must be positive");
    const TabularMdp& mdp = momdp.mdp();
    const int s_count = mdp.num_states();
    const int a_count = mdp.num_actions();

    PolicySample sample;
    sample.j = Mat(momdp.num_rewards(), 0);

    double det_count = std::pow(static_cast<double>(a_count), s_count);
    std::vector<StationaryPolicy> dets;
    if (det_count <= static_cast<double>(budget)) {
        dets = enumerate_deterministic_policies(s_count, a_count);
    } else {
        // Enumeration does not fit; fall back to seeded random deterministic picks.
        RandomStream rng = RandomStream::derive(seed, "sample_policies_det", 0);
        std::vector<int> choice(static_cast<std::size_t>(s_count));
        for (int i = 0; i < budget / 2; ++i) {
            for (int s = 0; s < s_count; ++s) choice[static_cast<std::size_t>(s)] = rng.next_int(a_count);
            dets.push_back(StationaryPolicy::deterministic(choice, a_count));
        }
    }
    for (const StationaryPolicy& p : dets) {
        if (sample.size() >= budget) break;
        append_policy(sample, momdp, p, PolicyOrigin::Deterministic);
    }

    // Pairwise 50/50 mixtures in occupancy space: the embedded mixture sits at
    // the exact midpoint of the two policy embeddings, so its J vector is the
    // average of theirs. That is where kinked orderings betray themselves.
    const int det_in_sample = sample.size();
    for (int i = 0; i < det_in_sample && sample.size() < budget; ++i)
        for (int l = i + 1; l < det_in_sample && sample.size() < budget; ++l) {
            const Vec m =
                0.5 * (embed_policy(mdp, sample.policies[static_cast<std::size_t>(i)]).mass +
                       embed_policy(mdp, sample.policies[static_cast<std::size_t>(l)]).mass);
            append_policy(sample, momdp, policy_from_occupancy({m, mdp.gamma()}, s_count, a_count),
                          PolicyOrigin::Mixture);
        }

    RandomStream rng = RandomStream::derive(seed, "sample_policies_random", 0);
    while (sample.size() < budget) {
        Mat probs(s_count, a_count);
        for (int s = 0; s < s_count; ++s) {
            std::vector<double> row = rng.dirichlet(a_count);
            for (int a = 0; a < a_count; ++a) probs(s, a) = row[static_cast<std::size_t>(a)];
        }
        append_policy(sample, momdp, StationaryPolicy(std::move(probs)), PolicyOrigin::Random);
    }
    return sample;
}

namespace {

std::vector<OrderedPairConstraint> build_constraints(const ObjectiveSpec& spec,
                                                     const PolicySample& sample) {
    std::vector<OrderedPairConstraint> out;
    const int n = sample.size();
    out.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            OrderedPairConstraint c;
            c.a = a;
            c.b = b;
            c.rel = compare(spec, sample.j.col(a), sample.j.col(b), kCompareTol);
            c.diff = sample.j.col(b) - sample.j.col(a);
            out.push_back(std::move(c));
        }
    return out;
}

// Strict rows oriented so the weighting must see them as positive.
Vec oriented_diff(const OrderedPairConstraint& c) {
    return c.rel == Ordering::Greater ? Vec(-c.diff) : c.diff;
}

} // namespace

MarginFit fit_ordering_margin(const std::vector<OrderedPairConstraint>& constraints, double band) {
    const int dim = constraints.empty() ? 0 : static_cast<int>(constraints.front().diff.size());
    MarginFit fit;
    fit.duals = Vec::Zero(static_cast<int>(constraints.size()));

    bool any_strict = false;
    double max_l1 = 0.0;
    for (const auto& c : constraints) {
        if (c.rel != Ordering::Equal) any_strict = true;
        max_l1 = std::max(max_l1, c.diff.lpNorm<1>());
    }
    if (!any_strict) {
        // Nothing to separate: the zero weighting reproduces an all-tied ordering.
        fit.meets_margin = true;
        fit.x = Vec::Zero(dim);
        fit.margin = 0.0;
        return fit;
    }

    // Variables: w = u - v with u, v in [0, 1]^dim, plus the margin e.
    const int nv = 2 * dim + 1;
    const int e_col = 2 * dim;
    std::vector<LpRow> rows;
    std::vector<int> strict_row_of(constraints.size(), -1);
    std::vector<int> tied_row_of(constraints.size(), -1);

    for (std::size_t i = 0; i < constraints.size(); ++i) {
        const auto& c = constraints[i];
        if (c.rel == Ordering::Equal) {
            LpRow pos{Vec::Zero(nv), LpRowType::LessEqual, band};
            pos.coeffs.head(dim) = c.diff;
            pos.coeffs.segment(dim, dim) = -c.diff;
            LpRow neg{Vec::Zero(nv), LpRowType::LessEqual, band};
            neg.coeffs.head(dim) = -c.diff;
            neg.coeffs.segment(dim, dim) = c.diff;
            tied_row_of[i] = static_cast<int>(rows.size());
            rows.push_back(std::move(pos));
            rows.push_back(std::move(neg));
        } else {
            const Vec d = oriented_diff(c);
            LpRow row{Vec::Zero(nv), LpRowType::LessEqual, 0.0};
            row.coeffs.head(dim) = -d;
            row.coeffs.segment(dim, dim) = d;
            row.coeffs[e_col] = 1.0;
            strict_row_of[i] = static_cast<int>(rows.size());
            rows.push_back(std::move(row));
        }
    }
    for (int j = 0; j < 2 * dim; ++j) {
        LpRow box{Vec::Zero(nv), LpRowType::LessEqual, 1.0};
        box.coeffs[j] = 1.0;
        rows.push_back(std::move(box));
    }
    LpRow cap{Vec::Zero(nv), LpRowType::LessEqual, 1.0 + max_l1};
    cap.coeffs[e_col] = 1.0;
    rows.push_back(std::move(cap));

    Vec objective = Vec::Zero(nv);
    objective[e_col] = 1.0;
    const LpResult lp = solve_lp(objective, rows);
    if (lp.status != LpStatus::Optimal)
        throw SolverError("fit_ordering_margin: margin program did not reach an optimum");

    fit.margin = lp.value;
    fit.x = lp.x.head(dim) - lp.x.segment(dim, dim);
    fit.meets_margin = fit.margin > kStrictMargin;
    for (std::size_t i = 0; i < constraints.size(); ++i) {
        if (strict_row_of[i] >= 0) fit.duals[static_cast<int>(i)] = lp.duals[strict_row_of[i]];
        if (tied_row_of[i] >= 0)
            fit.duals[static_cast<int>(i)] =
                std::abs(lp.duals[tied_row_of[i]]) + std::abs(lp.duals[tied_row_of[i] + 1]);
    }
    return fit;
}

namespace {

std::vector<OrderedPairConstraint> subset_of(const std::vector<OrderedPairConstraint>& constraints,
                                             const std::vector<int>& indices) {
    std::vector<OrderedPairConstraint> out;
    out.reserve(indices.size());
    for (int i : indices) out.push_back(constraints[static_cast<std::size_t>(i)]);
    return out;
}

/**
 * Reporting refinement for consistent systems. The margin program optimum is
 * a vertex of the consistent-weighting cone and binds on the smallest return
 * differences, which can leave the reported direction at an extreme of the
 * cone where fresh pairs get misordered. Re-solving with strict rows scaled
 * to unit length maximizes the geometric margin instead, i.e. centers the
 * weighting inside the cone. The Scalarizable decision itself always comes
 * from the unscaled program; on any failure here the vertex is kept.
 */
Vec recenter_weights(const std::vector<OrderedPairConstraint>& constraints, const Vec& fallback,
                     double band) {
    const int dim = static_cast<int>(fallback.size());
    if (dim == 0) return fallback;
    const int nv = 2 * dim + 1;
    const int t_col = 2 * dim;
    std::vector<LpRow> rows;
    for (const auto& c : constraints) {
        if (c.rel == Ordering::Equal) {
            LpRow pos{Vec::Zero(nv), LpRowType::LessEqual, band};
            pos.coeffs.head(dim) = c.diff;
            pos.coeffs.segment(dim, dim) = -c.diff;
            LpRow neg{Vec::Zero(nv), LpRowType::LessEqual, band};
            neg.coeffs.head(dim) = -c.diff;
            neg.coeffs.segment(dim, dim) = c.diff;
            rows.push_back(std::move(pos));
            rows.push_back(std::move(neg));
        } else {
            const Vec d = oriented_diff(c);
            const double norm = d.norm();
            if (norm < 1e-12) continue;
            LpRow row{Vec::Zero(nv), LpRowType::LessEqual, 0.0};
            row.coeffs.head(dim) = -d / norm;
            row.coeffs.segment(dim, dim) = d / norm;
            row.coeffs[t_col] = 1.0;
            rows.push_back(std::move(row));
        }
    }
    for (int j = 0; j < 2 * dim; ++j) {
        LpRow box{Vec::Zero(nv), LpRowType::LessEqual, 1.0};
        box.coeffs[j] = 1.0;
        rows.push_back(std::move(box));
    }
    // |w . unit| <= |w|_2 <= sqrt(dim), so this cap never binds at an optimum.
    LpRow cap{Vec::Zero(nv), LpRowType::LessEqual, std::sqrt(static_cast<double>(dim)) + 1.0};
    cap.coeffs[t_col] = 1.0;
    rows.push_back(std::move(cap));

    Vec objective = Vec::Zero(nv);
    objective[t_col] = 1.0;
    const LpResult lp = solve_lp(objective, rows);
    if (lp.status != LpStatus::Optimal || lp.value <= 0.0) return fallback;
    return Vec(lp.x.head(dim) - lp.x.segment(dim, dim));
}

// Smallest oriented strict-row margin achieved by a concrete weighting.
double achieved_margin(const std::vector<OrderedPairConstraint>& constraints, const Vec& w) {
    double margin = std::numeric_limits<double>::infinity();
    for (const auto& c : constraints)
        if (c.rel != Ordering::Equal) margin = std::min(margin, w.dot(oriented_diff(c)));
    return std::isfinite(margin) ? margin : 0.0;
}

} // namespace

std::vector<int> isolate_witness(const std::vector<OrderedPairConstraint>& constraints,
                                 const MarginFit& fit, double band) {
    std::vector<int> keep;
    for (int i = 0; i < fit.duals.size(); ++i)
        if (std::abs(fit.duals[i]) > 1e-9) keep.push_back(i);

    // The dual support certifies the same margin bound by weak duality; fall
    // back to the full system only if numerics disagree.
    if (keep.empty() || fit_ordering_margin(subset_of(constraints, keep), band).meets_margin) {
        keep.resize(constraints.size());
        std::iota(keep.begin(), keep.end(), 0);
    }

    // Deletion filter: drop any constraint whose removal keeps the subsystem
    // below the strict margin (meets_margin also rules out degenerating to an
    // all-tied subsystem). What survives is irreducible.
    for (std::size_t pos = 0; pos < keep.size();) {
        if (keep.size() == 1) break;
        std::vector<int> trial = keep;
        trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(pos));
        if (!fit_ordering_margin(subset_of(constraints, trial), band).meets_margin)
            keep = std::move(trial);
        else
            ++pos;
    }
    return keep;
}

MarginCertificate certificate_for(const std::vector<OrderedPairConstraint>& witness, double band) {
    std::vector<int> strict_idx, tied_idx;
    for (std::size_t i = 0; i < witness.size(); ++i)
        (witness[i].rel == Ordering::Equal ? tied_idx : strict_idx).push_back(static_cast<int>(i));
    if (strict_idx.empty())
        throw std::invalid_argument("certificate_for: witness has no strict rows");
    const int dim = static_cast<int>(witness.front().diff.size());
    const int ns = static_cast<int>(strict_idx.size());
    const int ne = static_cast<int>(tied_idx.size());

    // Variables: y (ns), eta+ (ne), eta- (ne), s (dim).
    const int nv = ns + 2 * ne + dim;
    auto y_col = [](int i) { return i; };
    auto ep_col = [ns](int j) { return ns + j; };
    auto en_col = [ns, ne](int j) { return ns + ne + j; };
    auto s_col = [ns, ne](int c) { return ns + 2 * ne + c; };

    std::vector<LpRow> rows;
    for (int c = 0; c < dim; ++c) {
        LpRow pos{Vec::Zero(nv), LpRowType::LessEqual, 0.0};
        LpRow neg{Vec::Zero(nv), LpRowType::LessEqual, 0.0};
        for (int i = 0; i < ns; ++i) {
            const double d = oriented_diff(witness[static_cast<std::size_t>(strict_idx[i])])[c];
            pos.coeffs[y_col(i)] = d;
            neg.coeffs[y_col(i)] = -d;
        }
        for (int j = 0; j < ne; ++j) {
            const double d = witness[static_cast<std::size_t>(tied_idx[j])].diff[c];
            pos.coeffs[ep_col(j)] = -d;
            pos.coeffs[en_col(j)] = d;
            neg.coeffs[ep_col(j)] = d;
            neg.coeffs[en_col(j)] = -d;
        }
        pos.coeffs[s_col(c)] = -1.0;
        neg.coeffs[s_col(c)] = -1.0;
        rows.push_back(std::move(pos));
        rows.push_back(std::move(neg));
    }
    LpRow simplex{Vec::Zero(nv), LpRowType::Equal, 1.0};
    for (int i = 0; i < ns; ++i) simplex.coeffs[y_col(i)] = 1.0;
    rows.push_back(std::move(simplex));

    Vec objective = Vec::Zero(nv);
    for (int c = 0; c < dim; ++c) objective[s_col(c)] = -1.0;
    for (int j = 0; j < ne; ++j) {
        objective[ep_col(j)] = -band;
        objective[en_col(j)] = -band;
    }
    const LpResult lp = solve_lp(objective, rows);
    if (lp.status != LpStatus::Optimal)
        throw SolverError("certificate_for: certificate program did not reach an optimum");

    MarginCertificate cert;
    cert.bound = -lp.value;
    cert.strict_weights.resize(static_cast<std::size_t>(witness.size()), 0.0);
    cert.tied_weights.resize(static_cast<std::size_t>(witness.size()), 0.0);
    for (int i = 0; i < ns; ++i)
        cert.strict_weights[static_cast<std::size_t>(strict_idx[i])] = lp.x[y_col(i)];
    for (int j = 0; j < ne; ++j)
        cert.tied_weights[static_cast<std::size_t>(tied_idx[j])] = lp.x[ep_col(j)] - lp.x[en_col(j)];
    return cert;
}

bool certificate_valid(const std::vector<OrderedPairConstraint>& witness,
                       const MarginCertificate& cert, double band, double tol) {
    if (witness.empty() || cert.strict_weights.size() != witness.size() ||
        cert.tied_weights.size() != witness.size())
        return false;
    const int dim = static_cast<int>(witness.front().diff.size());
    Vec combo = Vec::Zero(dim);
    double y_total = 0.0;
    double eta_total = 0.0;
    for (std::size_t i = 0; i < witness.size(); ++i) {
        if (witness[i].rel == Ordering::Equal) {
            combo -= cert.tied_weights[i] * witness[i].diff;
            eta_total += std::abs(cert.tied_weights[i]);
        } else {
            const double y = cert.strict_weights[i];
            if (y < -tol) return false;
            combo += y * oriented_diff(witness[i]);
            y_total += y;
        }
    }
    if (std::abs(y_total - 1.0) > 1e-6) return false;
    const double realized = combo.lpNorm<1>() + band * eta_total;
    if (realized > cert.bound + 1e-6) return false;
    return cert.bound <= kStrictMargin + tol;
}

namespace {

bool reward_trivial(const Mat& j, int i) {
    return j.row(i).maxCoeff() - j.row(i).minCoeff() <= kCompareTol;
}

// Sample-based ordering relation between two reward rows.
enum class PairRelation { Equivalent, Opposite, Neither };

PairRelation pair_relation(const Mat& j, int i, int l) {
    bool equivalent = true, opposite = true;
    auto sign_of = [](double a, double b) {
        if (b - a > kCompareTol) return 1;
        if (a - b > kCompareTol) return -1;
        return 0;
    };
    for (int a = 0; a + 1 < j.cols() && (equivalent || opposite); ++a)
        for (int b = a + 1; b < j.cols(); ++b) {
            const int s1 = sign_of(j(i, a), j(i, b));
            const int s2 = sign_of(j(l, a), j(l, b));
            if (s1 != s2) equivalent = false;
            if (s1 != -s2) opposite = false;
            if (!equivalent && !opposite) break;
        }
    if (equivalent) return PairRelation::Equivalent;
    if (opposite) return PairRelation::Opposite;
    return PairRelation::Neither;
}

} // namespace

std::optional<DegenerateTag> detect_degenerate(const Momdp& momdp, const ObjectiveSpec& spec,
                                               const PolicySample& sample) {
    spec.validate_for(momdp.num_rewards());
    const Mat& j = sample.j;
    const int k = static_cast<int>(j.rows());

    switch (spec.kind) {
        case ObjectiveKind::LexMax: {
            std::vector<int> live;
            for (int i = 0; i < k; ++i)
                if (!reward_trivial(j, i)) live.push_back(i);
            if (live.size() < 2) return DegenerateTag{"trivial-rewards", -1, false};
            bool any_equivalent = false;
            for (std::size_t a = 0; a + 1 < live.size(); ++a)
                for (std::size_t b = a + 1; b < live.size(); ++b) {
                    switch (pair_relation(j, live[a], live[b])) {
                        case PairRelation::Neither: return std::nullopt;
                        case PairRelation::Equivalent: any_equivalent = true; break;
                        case PairRelation::Opposite: break;
                    }
                }
            return DegenerateTag{any_equivalent ? "equivalent-rewards" : "opposite-rewards", -1,
                                 false};
        }
        case ObjectiveKind::MaxMin: {
            for (int i = 0; i < k; ++i) {
                bool dominated = true;
                for (int l = 0; l < k && dominated; ++l) {
                    if (l == i) continue;
                    for (int col = 0; col < j.cols(); ++col)
                        if (j(i, col) > j(l, col) + kCompareTol) {
                            dominated = false;
                            break;
                        }
                }
                if (dominated) return DegenerateTag{"dominated-reward", i, false};
            }
            return std::nullopt;
        }
        case ObjectiveKind::MaxSat: {
            for (int i = 0; i < k; ++i) {
                bool above = false, below = false;
                for (int col = 0; col < j.cols(); ++col) {
                    if (j(i, col) >= spec.thresholds[i] - kCompareTol) above = true;
                    else below = true;
                }
                if (above && below) return std::nullopt;
            }
            return DegenerateTag{"maxsat-constant-count", -1, false};
        }
        case ObjectiveKind::ConSat: {
            if (pair_relation(j, 0, 1) == PairRelation::Equivalent)
                return DegenerateTag{"equivalent-rewards", -1, false};
            const double lo = j.row(0).minCoeff();
            const double hi = j.row(0).maxCoeff();
            if (hi < spec.c - kCompareTol) return DegenerateTag{"consat-none-satisfy", -1, false};
            if (lo >= spec.c - kCompareTol)
                // The all-satisfy escape hatch exists in only one of the two
                // published condition sets; mark the disagreement.
                return DegenerateTag{"consat-all-satisfy", -1, true};
            return std::nullopt;
        }
        default:
            return std::nullopt;
    }
}

namespace {

struct MixRecipe {
    int lo = -1;
    int hi = -1;
    double target = 0.0;
};

// Occupancy mixture of two sampled policies hitting jp = target on axis p.
std::optional<StationaryPolicy> mix_to_target(const Momdp& momdp, const PolicySample& sample,
                                              int axis, const MixRecipe& recipe) {
    const double jlo = sample.j(axis, recipe.lo);
    const double jhi = sample.j(axis, recipe.hi);
    if (std::abs(jhi - jlo) < 1e-12) return std::nullopt;
    const double lambda = (recipe.target - jlo) / (jhi - jlo);
    if (!(lambda > 0.0 && lambda < 1.0)) return std::nullopt;
    const TabularMdp& mdp = momdp.mdp();
    const Vec m =
        (1.0 - lambda) *
            embed_policy(mdp, sample.policies[static_cast<std::size_t>(recipe.lo)]).mass +
        lambda * embed_policy(mdp, sample.policies[static_cast<std::size_t>(recipe.hi)]).mass;
    return policy_from_occupancy({m, mdp.gamma()}, mdp.num_states(), mdp.num_actions());
}

// Base-pair selection: among below/above-target policies pick the secondary
// extreme, so mixtures at equal primary level spread on the secondary axis.
std::optional<MixRecipe> pick_pair(const PolicySample& sample, int axis, int sec, double target,
                                   double gap, bool high_secondary) {
    int lo = -1, hi = -1;
    for (int i = 0; i < sample.size(); ++i) {
        const double jp = sample.j(axis, i);
        if (jp < target - gap) {
            if (lo < 0 || (high_secondary ? sample.j(sec, i) > sample.j(sec, lo)
                                          : sample.j(sec, i) < sample.j(sec, lo)))
                lo = i;
        } else if (jp > target + gap) {
            if (hi < 0 || (high_secondary ? sample.j(sec, i) > sample.j(sec, hi)
                                          : sample.j(sec, i) < sample.j(sec, hi)))
                hi = i;
        }
    }
    if (lo < 0 || hi < 0) return std::nullopt;
    return MixRecipe{lo, hi, target};
}

void add_mix(PolicySample& sample, const Momdp& momdp, int axis,
             const std::optional<MixRecipe>& recipe) {
    if (!recipe) return;
    if (auto pol = mix_to_target(momdp, sample, axis, *recipe))
        append_policy(sample, momdp, std::move(*pol), PolicyOrigin::Enriched);
}

} // namespace

PolicySample enrich_sample(const Momdp& momdp, const ObjectiveSpec& spec,
                           const PolicySample& sample) {
    if (spec.kind != ObjectiveKind::LexMax && spec.kind != ObjectiveKind::ConSat &&
        spec.kind != ObjectiveKind::MaxMin)
        return sample;
    if (momdp.num_rewards() < 2 || sample.size() < 3) return sample;

    PolicySample enriched = sample;
    const Mat& j = sample.j;
    constexpr double kNearTie = 2e-8;

    if (spec.kind == ObjectiveKind::MaxMin) {
        // Min-crossing kinks: where two coordinates swap the argmin along the
        // segment between two sampled policies, the mixture at the crossing
        // beats both endpoints on the min. A linear weighting scores the
        // mixture between its endpoints, so these policies are where MaxMin
        // betrays non-linearity; random samples can miss the kink entirely
        // when it sits near a face of the policy simplex.
        const int k = static_cast<int>(j.rows());
        const TabularMdp& mdp = momdp.mdp();
        for (int r = 0; r < k; ++r)
            for (int s = r + 1; s < k; ++s) {
                int best_a = -1, best_b = -1;
                double best_prominence = 1e-6;
                double best_lambda = 0.0;
                for (int a = 0; a < sample.size(); ++a)
                    for (int b = 0; b < sample.size(); ++b) {
                        const double da = j(r, a) - j(s, a);
                        const double db = j(r, b) - j(s, b);
                        if (!(da > 0.0 && db < 0.0)) continue;
                        // The crossing coordinates must be the global min at
                        // their own endpoint for the kink to lift the utility.
                        if (j.col(a).minCoeff() < j(s, a) - 1e-9) continue;
                        if (j.col(b).minCoeff() < j(r, b) - 1e-9) continue;
                        const double lambda = da / (da - db);
                        const Vec at_kink = (1.0 - lambda) * j.col(a) + lambda * j.col(b);
                        if (at_kink.minCoeff() < at_kink[r] - 1e-9) continue;
                        const double prominence =
                            std::min(at_kink[r] - j.col(a).minCoeff(),
                                     at_kink[r] - j.col(b).minCoeff());
                        if (prominence > best_prominence) {
                            best_prominence = prominence;
                            best_a = a;
                            best_b = b;
                            best_lambda = lambda;
                        }
                    }
                if (best_a < 0) continue;
                const Vec m =
                    (1.0 - best_lambda) *
                        embed_policy(mdp, sample.policies[static_cast<std::size_t>(best_a)]).mass +
                    best_lambda *
                        embed_policy(mdp, sample.policies[static_cast<std::size_t>(best_b)]).mass;
                append_policy(enriched, momdp,
                              policy_from_occupancy({m, mdp.gamma()}, mdp.num_states(),
                                                    mdp.num_actions()),
                              PolicyOrigin::Enriched);
            }
        return enriched;
    }

    if (spec.kind == ObjectiveKind::LexMax) {
        int axis = -1;
        for (int i = 0; i < j.rows(); ++i)
            if (j.row(i).maxCoeff() - j.row(i).minCoeff() > 1e-6) {
                axis = i;
                break;
            }
        if (axis < 0) return enriched;
        int sec = -1;
        for (int i = 0; i < j.rows(); ++i)
            if (i != axis && j.row(i).maxCoeff() - j.row(i).minCoeff() > 1e-6) {
                sec = i;
                break;
            }
        if (sec < 0) return enriched;

        const double lo = j.row(axis).minCoeff();
        const double hi = j.row(axis).maxCoeff();
        const double gap = 1e-6 * (1.0 + hi - lo);
        for (double frac : {0.35, 0.5, 0.65}) {
            const double t = lo + frac * (hi - lo);
            // Equal-primary mixtures with spread secondaries pin the secondary
            // weight; the near-tie shifted copies then overload the primary one.
            add_mix(enriched, momdp, axis, pick_pair(sample, axis, sec, t, gap, true));
            add_mix(enriched, momdp, axis, pick_pair(sample, axis, sec, t, gap, false));
            add_mix(enriched, momdp, axis, pick_pair(sample, axis, sec, t + kNearTie, gap, false));
            add_mix(enriched, momdp, axis, pick_pair(sample, axis, sec, t - kNearTie, gap, true));
        }
        return enriched;
    }

    // ConSat: primary axis 0 carries the constraint level c, axis 1 the payoff.
    const int axis = 0, sec = 1;
    const double lo = j.row(axis).minCoeff();
    const double hi = j.row(axis).maxCoeff();
    const double span = hi - lo;
    if (span < 1e-6) return enriched;
    const double gap = 1e-6 * (1.0 + span);
    if (!(lo < spec.c - 1e-3 * span && hi > spec.c + 1e-3 * span)) return enriched;

    const double below = spec.c - 0.25 * (spec.c - lo);
    const double below2 = spec.c - 0.5 * (spec.c - lo);
    const double above1 = spec.c + 0.3 * (hi - spec.c);
    const double above2 = spec.c + 0.6 * (hi - spec.c);
    constexpr double kNudge = 1e-8;

    // Below the constraint the payoff axis is ignored, so equal-level mixtures
    // with spread payoffs become tied rows; the straddle pair and the above
    // cross pair then squeeze the level weight from both sides.
    add_mix(enriched, momdp, axis, pick_pair(sample, axis, sec, below, gap, true));
    add_mix(enriched, momdp, axis, pick_pair(sample, axis, sec, below, gap, false));
    add_mix(enriched, momdp, axis, pick_pair(sample, axis, sec, below2, gap, false));
    add_mix(enriched, momdp, axis, pick_pair(sample, axis, sec, above1, gap, true));
    add_mix(enriched, momdp, axis, pick_pair(sample, axis, sec, above2, gap, false));
    add_mix(enriched, momdp, axis, pick_pair(sample, axis, sec, spec.c - kNudge, gap, false));
    add_mix(enriched, momdp, axis, pick_pair(sample, axis, sec, spec.c + kNudge, gap, false));
    return enriched;
}

RewardTable scalarized_reward(const Momdp& momdp, const Vec& weights) {
    if (weights.size() != momdp.num_rewards())
        throw std::invalid_argument("scalarized_reward: weight length mismatch");
    Mat values = Mat::Zero(momdp.mdp().num_states(), momdp.mdp().num_actions());
    for (int i = 0; i < momdp.num_rewards(); ++i)
        values += weights[i] * momdp.rewards()[static_cast<std::size_t>(i)].values();
    return RewardTable(std::move(values));
}

ScalarizationVerdict fit_weights(const Momdp& momdp, const ObjectiveSpec& spec,
                                 const PolicySample& sample) {
    spec.validate_for(momdp.num_rewards());
    ScalarizationVerdict verdict;
    verdict.degenerate_tag = detect_degenerate(momdp, spec, sample);

    // A tagged instance provably collapses to a single linear criterion, where
    // the near-tie probes would only poison the margin; enrich the rest.
    const PolicySample enriched =
        verdict.degenerate_tag ? sample : enrich_sample(momdp, spec, sample);
    const std::vector<OrderedPairConstraint> constraints = build_constraints(spec, enriched);
    const MarginFit fit = fit_ordering_margin(constraints);

    if (fit.meets_margin) {
        verdict.outcome = ScalarizationOutcome::Scalarizable;
        const Vec centered = recenter_weights(constraints, fit.x, kEqualityBand);
        const double scale = centered.size() > 0 ? centered.lpNorm<Eigen::Infinity>() : 0.0;
        if (scale > 0.0) {
            verdict.weights = centered / scale;
            verdict.margin = achieved_margin(constraints, centered) / scale;
            verdict.equality_band = kEqualityBand / scale;
        } else {
            verdict.weights = Vec::Zero(momdp.num_rewards());
            verdict.margin = 0.0;
            verdict.equality_band = kEqualityBand;
        }
        return verdict;
    }

    verdict.outcome = ScalarizationOutcome::Unscalarizable;
    verdict.margin = fit.margin;
    const std::vector<int> witness_idx = isolate_witness(constraints, fit);
    std::vector<OrderedPairConstraint> witness_rows = subset_of(constraints, witness_idx);
    verdict.certificate = certificate_for(witness_rows);
    for (const auto& c : witness_rows) {
        WitnessPair wp;
        wp.a = c.a;
        wp.b = c.b;
        wp.rel = c.rel;
        wp.j_a = enriched.j.col(c.a);
        wp.j_b = enriched.j.col(c.b);
        verdict.witness.push_back(std::move(wp));
    }
    return verdict;
}

namespace {

std::vector<OrderedPairConstraint> witness_constraints(const ScalarizationVerdict& verdict) {
    std::vector<OrderedPairConstraint> rows;
    rows.reserve(verdict.witness.size());
    for (const auto& wp : verdict.witness) {
        OrderedPairConstraint c;
        c.a = wp.a;
        c.b = wp.b;
        c.rel = wp.rel;
        c.diff = wp.j_b - wp.j_a;
        rows.push_back(std::move(c));
    }
    return rows;
}

} // namespace

VerificationReport verify_verdict(const Momdp& momdp, const ObjectiveSpec& spec,
                                  const ScalarizationVerdict& verdict, std::uint64_t holdout_seed,
                                  int holdout_budget) {
    VerificationReport report;
    if (verdict.outcome == ScalarizationOutcome::Unscalarizable) {
        const std::vector<OrderedPairConstraint> rows = witness_constraints(verdict);
        report.witness_confirmed = !fit_ordering_margin(rows).meets_margin;
        report.certificate_confirmed = certificate_valid(rows, verdict.certificate);
        return report;
    }

    const PolicySample holdout =
        enrich_sample(momdp, spec, sample_policies(momdp, holdout_budget, holdout_seed));
    const std::vector<OrderedPairConstraint> constraints = build_constraints(spec, holdout);
    report.holdout_pairs = static_cast<int>(constraints.size());
    const double band = verdict.equality_band;
    for (const auto& c : constraints) {
        const double dot = verdict.weights.dot(c.diff);
        bool disagree = false;
        switch (c.rel) {
            case Ordering::Less: disagree = dot <= -band; break;
            case Ordering::Greater: disagree = dot >= band; break;
            case Ordering::Equal: disagree = std::abs(dot) > band; break;
        }
        if (disagree) {
            ++report.disagreements;
            if (report.disagreeing_pairs.size() < 8) {
                WitnessPair wp;
                wp.a = c.a;
                wp.b = c.b;
                wp.rel = c.rel;
                wp.j_a = holdout.j.col(c.a);
                wp.j_b = holdout.j.col(c.b);
                report.disagreeing_pairs.push_back(std::move(wp));
            }
        }
    }
    return report;
}

std::string verdict_to_json(const ScalarizationVerdict& verdict) {
    nlohmann::json out;
    out["outcome"] =
        verdict.outcome == ScalarizationOutcome::Scalarizable ? "Scalarizable" : "Unscalarizable";
    out["margin"] = verdict.margin;
    if (verdict.outcome == ScalarizationOutcome::Scalarizable) {
        out["weights"] = std::vector<double>(verdict.weights.data(),
                                             verdict.weights.data() + verdict.weights.size());
        out["equality_band"] = verdict.equality_band;
    }
    if (verdict.degenerate_tag) {
        out["degenerate_tag"] = verdict.degenerate_tag->tag;
        if (verdict.degenerate_tag->index >= 0)
            out["degenerate_index"] = verdict.degenerate_tag->index;
        if (verdict.degenerate_tag->versions_disagree) out["versions_disagree"] = true;
    }
    if (!verdict.witness.empty()) {
        nlohmann::json pairs = nlohmann::json::array();
        for (const auto& wp : verdict.witness) {
            nlohmann::json p;
            p["a"] = wp.a;
            p["b"] = wp.b;
            p["relation"] = wp.rel == Ordering::Less    ? "Less"
                            : wp.rel == Ordering::Equal ? "Equal"
                                                        : "Greater";
            p["j_a"] = std::vector<double>(wp.j_a.data(), wp.j_a.data() + wp.j_a.size());
            p["j_b"] = std::vector<double>(wp.j_b.data(), wp.j_b.data() + wp.j_b.size());
            pairs.push_back(std::move(p));
        }
        out["witness_pairs"] = std::move(pairs);
        out["certificate"] = {{"strict_weights", verdict.certificate.strict_weights},
                              {"tied_weights", verdict.certificate.tied_weights},
                              {"bound", verdict.certificate.bound}};
    }
    return out.dump(2);
}

} // namespace rewardlab
