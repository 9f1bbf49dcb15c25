#pragma once

#include <string>

#include "rewardlab/types.hpp"

namespace rewardlab {

enum class ObjectiveKind {
    LexMax,        // lexicographic, reward order = priority order
    MaxMin,        // worst component
    MaxMax,        // best component
    MaxSat,        // count of satisfied thresholds (more satisfied = better)
    ConSat,        // k = 2: constrain J_1 >= c, then maximize J_2
    SoftMaxMax,    // Boltzmann-weighted average, weight exp(+alpha J)
    SoftMaxMin,    // Boltzmann-weighted average, weight exp(-alpha J)
    SoftMaxSat,    // sum of sigmoids of alpha (J_i - c_i)
    LinearWeights, // w . J
};

enum class Ordering { Less, Equal, Greater };

/**
 * A multi-objective comparison rule over k-dimensional return vectors.
 *
 * Fields are kind-specific: thresholds for MaxSat/SoftMaxSat (length k), c for
 * ConSat, alpha >= 0 for the soft kinds (alpha = 0 degenerates to the
 * arithmetic mean), weights for LinearWeights (length k). validate_for checks
 * presence and shape against k and throws std::invalid_argument otherwise.
 */
struct ObjectiveSpec {
    ObjectiveKind kind = ObjectiveKind::LinearWeights;
    Vec thresholds;
    double c = 0.0;
    double alpha = 1.0;
    Vec weights;

    void validate_for(int k) const;

    static ObjectiveSpec lex_max();
    static ObjectiveSpec max_min();
    static ObjectiveSpec max_max();
    static ObjectiveSpec max_sat(Vec thresholds);
    static ObjectiveSpec con_sat(double c);
    static ObjectiveSpec soft_max_max(double alpha);
    static ObjectiveSpec soft_max_min(double alpha);
    static ObjectiveSpec soft_max_sat(double alpha, Vec thresholds);
    static ObjectiveSpec linear(Vec weights);
};

const char* objective_kind_name(ObjectiveKind kind);
ObjectiveKind objective_kind_from_name(const std::string& name);

/**
 * Total-preorder comparison of two return vectors under the objective, with a
 * 1e-9 tie band on every scalar test. Antisymmetric by construction: swapping
 * the arguments flips Less and Greater.
 */
Ordering compare(const ObjectiveSpec& spec, const Vec& j1, const Vec& j2, double tol = 1e-9);

/**
 * Scalar utility for the utility-representable kinds (everything except LexMax
 * and ConSat, which throw). The Boltzmann kinds subtract the max exponent
 * before exponentiating; SoftMaxSat uses the sign-split stable sigmoid.
 */
double utility(const ObjectiveSpec& spec, const Vec& j);

/// Closed-form gradient of utility for the differentiable kinds
/// (LinearWeights and the three soft kinds); others throw.
Vec utility_gradient(const ObjectiveSpec& spec, const Vec& j);

/// True for kinds with a well-defined utility.
bool has_utility(ObjectiveKind kind);
/// True for kinds with a well-defined utility gradient.
bool is_differentiable(ObjectiveKind kind);

} // namespace rewardlab
