#pragma once

#include <vector>

#include "rewardlab/types.hpp"

namespace rewardlab {

enum class LpStatus { Optimal, Infeasible, Unbounded };
enum class LpRowType { LessEqual, GreaterEqual, Equal };

struct LpRow {
    Vec coeffs;
    LpRowType type = LpRowType::LessEqual;
    double rhs = 0.0;
};

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    Vec x;
    double value = 0.0;
    // Row multipliers at the optimum. The sign convention is fixed for
    // LessEqual rows (duals >= 0, value = sum y_i b_i for a fully bounded
    // optimum); that is the only row type whose duals this project consumes.
    Vec duals;
    int iterations = 0;
};

/**
 * Dense two-phase primal simplex: maximize objective . x subject to the rows
 * and x >= 0. Dantzig pricing with a lowest-index tie-break, switching to
 * Bland's rule after a stall, so runs are deterministic and cycling-free.
 * Throws SolverError if the iteration cap is hit.
 */
LpResult solve_lp(const Vec& objective, const std::vector<LpRow>& rows,
                  int max_iterations = 200000);

} // namespace rewardlab
