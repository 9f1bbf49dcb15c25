#include "rewardlab/objectives.hpp"

#include <cmath>
#include <stdexcept>

namespace rewardlab {

namespace {

double stable_sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// Boltzmann-weighted average of j with exponent sign_alpha * j, max-subtracted.
double boltzmann_average(const Vec& j, double signed_alpha) {
    const double shift = (signed_alpha * j.array()).maxCoeff();
    double num = 0.0, den = 0.0;
    for (Eigen::Index i = 0; i < j.size(); ++i) {
        const double w = std::exp(signed_alpha * j[i] - shift);
        num += j[i] * w;
        den += w;
    }
    return num / den;
}

int satisfied_count(const Vec& j, const Vec& thresholds, double tol) {
    int count = 0;
    for (Eigen::Index i = 0; i < j.size(); ++i)
        if (j[i] >= thresholds[i] - tol) ++count;
    return count;
}

Ordering from_scalars(double u1, double u2, double tol) {
    if (u2 - u1 > tol) return Ordering::Less;
    if (u1 - u2 > tol) return Ordering::Greater;
    return Ordering::Equal;
}

} // namespace

void ObjectiveSpec::validate_for(int k) const {
    if (k < 1) throw std::invalid_argument("ObjectiveSpec: k must be positive");
    switch (kind) {
        case ObjectiveKind::MaxSat:
        case ObjectiveKind::SoftMaxSat:
            if (thresholds.size() != k)
                throw std::invalid_argument("ObjectiveSpec: thresholds length must equal k");
            break;
        case ObjectiveKind::ConSat:
            if (k != 2) throw std::invalid_argument("ObjectiveSpec: ConSat requires k = 2");
            break;
        case ObjectiveKind::LinearWeights:
            if (weights.size() != k)
                throw std::invalid_argument("ObjectiveSpec: weights length must equal k");
            break;
        default:
            break;
    }
    switch (kind) {
        case ObjectiveKind::SoftMaxMax:
        case ObjectiveKind::SoftMaxMin:
        case ObjectiveKind::SoftMaxSat:
            if (!(alpha >= 0.0) || !std::isfinite(alpha))
                throw std::invalid_argument("ObjectiveSpec: alpha must be finite and >= 0");
            break;
        default:
            break;
    }
}

ObjectiveSpec ObjectiveSpec::lex_max() { return {ObjectiveKind::LexMax, {}, 0.0, 1.0, {}}; }
ObjectiveSpec ObjectiveSpec::max_min() { return {ObjectiveKind::MaxMin, {}, 0.0, 1.0, {}}; }
ObjectiveSpec ObjectiveSpec::max_max() { return {ObjectiveKind::MaxMax, {}, 0.0, 1.0, {}}; }
ObjectiveSpec ObjectiveSpec::max_sat(Vec thresholds) {
    return {ObjectiveKind::MaxSat, std::move(thresholds), 0.0, 1.0, {}};
}
ObjectiveSpec ObjectiveSpec::con_sat(double c) { return {ObjectiveKind::ConSat, {}, c, 1.0, {}}; }
ObjectiveSpec ObjectiveSpec::soft_max_max(double alpha) {
    return {ObjectiveKind::SoftMaxMax, {}, 0.0, alpha, {}};
}
ObjectiveSpec ObjectiveSpec::soft_max_min(double alpha) {
    return {ObjectiveKind::SoftMaxMin, {}, 0.0, alpha, {}};
}
ObjectiveSpec ObjectiveSpec::soft_max_sat(double alpha, Vec thresholds) {
    return {ObjectiveKind::SoftMaxSat, std::move(thresholds), 0.0, alpha, {}};
}
ObjectiveSpec ObjectiveSpec::linear(Vec weights) {
    return {ObjectiveKind::LinearWeights, {}, 0.0, 1.0, std::move(weights)};
}

const char* objective_kind_name(ObjectiveKind kind) {
    switch (kind) {
        case ObjectiveKind::LexMax: return "LexMax";
        case ObjectiveKind::MaxMin: return "MaxMin";
        case ObjectiveKind::MaxMax: return "MaxMax";
        case ObjectiveKind::MaxSat: return "MaxSat";
        case ObjectiveKind::ConSat: return "ConSat";
        case ObjectiveKind::SoftMaxMax: return "SoftMaxMax";
        case ObjectiveKind::SoftMaxMin: return "SoftMaxMin";
        case ObjectiveKind::SoftMaxSat: return "SoftMaxSat";
        case ObjectiveKind::LinearWeights: return "LinearWeights";
    }
    throw std::invalid_argument("objective_kind_name: unknown kind");
}

ObjectiveKind objective_kind_from_name(const std::string& name) {
    if (name == "LexMax") return ObjectiveKind::LexMax;
    if (name == "MaxMin") return ObjectiveKind::MaxMin;
    if (name == "MaxMax") return ObjectiveKind::MaxMax;
    if (name == "MaxSat") return ObjectiveKind::MaxSat;
    if (name == "ConSat") return ObjectiveKind::ConSat;
    if (name == "SoftMaxMax") return ObjectiveKind::SoftMaxMax;
    if (name == "SoftMaxMin") return ObjectiveKind::SoftMaxMin;
    if (name == "SoftMaxSat") return ObjectiveKind::SoftMaxSat;
    if (name == "LinearWeights") return ObjectiveKind::LinearWeights;
    throw std::invalid_argument("unknown objective kind: " + name);
}

bool has_utility(ObjectiveKind kind) {
    return kind != ObjectiveKind::LexMax && kind != ObjectiveKind::ConSat;
}

bool is_differentiable(ObjectiveKind kind) {
    switch (kind) {
        case ObjectiveKind::LinearWeights:
        case ObjectiveKind::SoftMaxMax:
        case ObjectiveKind::SoftMaxMin:
        case ObjectiveKind::SoftMaxSat:
            return true;
        default:
            return false;
    }
}

Ordering compare(const ObjectiveSpec& spec, const Vec& j1, const Vec& j2, double tol) {
    if (j1.size() != j2.size()) throw std::invalid_argument("compare: dimension mismatch");
    spec.validate_for(static_cast<int>(j1.size()));
    switch (spec.kind) {
        case ObjectiveKind::LexMax: {
            for (Eigen::Index i = 0; i < j1.size(); ++i) {
                const Ordering o = from_scalars(j1[i], j2[i], tol);
                if (o != Ordering::Equal) return o;
            }
            return Ordering::Equal;
        }
        case ObjectiveKind::MaxMin:
            return from_scalars(j1.minCoeff(), j2.minCoeff(), tol);
        case ObjectiveKind::MaxMax:
            return from_scalars(j1.maxCoeff(), j2.maxCoeff(), tol);
        case ObjectiveKind::MaxSat: {
            const int c1 = satisfied_count(j1, spec.thresholds, tol);
            const int c2 = satisfied_count(j2, spec.thresholds, tol);
            if (c1 < c2) return Ordering::Less;
            if (c1 > c2) return Ordering::Greater;
            return Ordering::Equal;
        }
        case ObjectiveKind::ConSat: {
            // Below the constraint, lower J_1 is worse; once both meet it,
            // J_2 decides. The tie band makes the two branch tests mutually
            // exclusive, so the relation stays antisymmetric.
            auto meets = [&](const Vec& j) { return j[0] >= spec.c - tol; };
            auto strictly_less = [&](const Vec& a, const Vec& b) {
                if (!meets(a) && a[0] < b[0] - tol) return true;
                return meets(a) && meets(b) && a[1] < b[1] - tol;
            };
            const bool l12 = strictly_less(j1, j2);
            const bool l21 = strictly_less(j2, j1);
            if (l12 && !l21) return Ordering::Less;
            if (l21 && !l12) return Ordering::Greater;
            return Ordering::Equal;
        }
        default:
            return from_scalars(utility(spec, j1), utility(spec, j2), tol);
    }
}

double utility(const ObjectiveSpec& spec, const Vec& j) {
    spec.validate_for(static_cast<int>(j.size()));
    switch (spec.kind) {
        case ObjectiveKind::MaxMin: return j.minCoeff();
        case ObjectiveKind::MaxMax: return j.maxCoeff();
        case ObjectiveKind::MaxSat: return satisfied_count(j, spec.thresholds, 1e-9);
        case ObjectiveKind::SoftMaxMax: return boltzmann_average(j, spec.alpha);
        case ObjectiveKind::SoftMaxMin: return boltzmann_average(j, -spec.alpha);
        case ObjectiveKind::SoftMaxSat: {
            double total = 0.0;
            for (Eigen::Index i = 0; i < j.size(); ++i)
                total += stable_sigmoid(spec.alpha * (j[i] - spec.thresholds[i]));
            return total;
        }
        case ObjectiveKind::LinearWeights: return spec.weights.dot(j);
        default:
            throw std::invalid_argument("utility: objective kind has no utility representation");
    }
}

Vec utility_gradient(const ObjectiveSpec& spec, const Vec& j) {
    spec.validate_for(static_cast<int>(j.size()));
    Vec g(j.size());
    switch (spec.kind) {
        case ObjectiveKind::LinearWeights:
            return spec.weights;
        case ObjectiveKind::SoftMaxMax:
        case ObjectiveKind::SoftMaxMin: {
            const double sa = spec.kind == ObjectiveKind::SoftMaxMax ? spec.alpha : -spec.alpha;
            const double u = boltzmann_average(j, sa);
            const double shift = (sa * j.array()).maxCoeff();
            Vec w(j.size());
            for (Eigen::Index i = 0; i < j.size(); ++i) w[i] = std::exp(sa * j[i] - shift);
            w /= w.sum();
            for (Eigen::Index i = 0; i < j.size(); ++i) g[i] = w[i] * (1.0 + sa * (j[i] - u));
            return g;
        }
        case ObjectiveKind::SoftMaxSat: {
            for (Eigen::Index i = 0; i < j.size(); ++i) {
                const double s = stable_sigmoid(spec.alpha * (j[i] - spec.thresholds[i]));
                g[i] = spec.alpha * s * (1.0 - s);
            }
            return g;
        }
        default:
            throw std::invalid_argument("utility_gradient: objective kind is not differentiable");
    }
}

} // namespace rewardlab
