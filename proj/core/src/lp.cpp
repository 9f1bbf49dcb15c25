#include "rewardlab/lp.hpp"

#include <cmath>
#include <limits>

#include "rewardlab/errors.hpp"

namespace rewardlab {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-9;

struct Tableau {
    Mat a;                  // m x cols
    Vec b;                  // m
    Vec cost;               // reduced costs c_j - z_j, length cols
    double value = 0.0;     // current objective value
    std::vector<int> basis; // column basic in each row

    void pivot(int r, int c) {
        const double piv = a(r, c);
        a.row(r) /= piv;
        b[r] /= piv;
        for (int i = 0; i < a.rows(); ++i) {
            if (i == r) continue;
            const double f = a(i, c);
            if (f == 0.0) continue;
            a.row(i) -= f * a.row(r);
            b[i] -= f * b[r];
        }
        const double cf = cost[c];
        if (cf != 0.0) {
            cost -= cf * a.row(r).transpose();
            value += cf * b[r];
        }
        basis[static_cast<std::size_t>(r)] = c;
    }
};

// Runs simplex on the current cost row. allowed[j] = false bars a column from
// entering. Returns false when unbounded. never_unbounded marks objectives
// that are bounded by construction (phase 1): there a nonpositive entering
// column can only be accumulated rounding error, so the column is barred and
// the walk continues instead of failing.
bool run_simplex(Tableau& t, const std::vector<bool>& allowed, bool never_unbounded,
                 int max_iterations, int& iterations) {
    const int cols = static_cast<int>(t.a.cols());
    bool bland = false;
    int stall = 0;
    double last_value = t.value;
    std::vector<bool> barred(static_cast<std::size_t>(cols), false);
    while (true) {
        if (++iterations > max_iterations)
            throw SolverError("solve_lp: simplex iteration cap reached");

        int entering = -1;
        if (bland) {
            for (int j = 0; j < cols; ++j)
                if (allowed[static_cast<std::size_t>(j)] && !barred[static_cast<std::size_t>(j)] &&
                    t.cost[j] > kCostTol) {
                    entering = j;
                    break;
                }
        } else {
            double best = kCostTol;
            for (int j = 0; j < cols; ++j)
                if (allowed[static_cast<std::size_t>(j)] && !barred[static_cast<std::size_t>(j)] &&
                    t.cost[j] > best) {
                    best = t.cost[j];
                    entering = j;
                }
        }
        if (entering < 0) return true; // optimal

        // Two-pass ratio test: find the tightest ratio, then pivot on the
        // largest-magnitude coefficient within tolerance of it (Bland mode
        // keeps the lowest basis index for the anti-cycling guarantee).
        double best_ratio = std::numeric_limits<double>::infinity();
        for (int i = 0; i < t.a.rows(); ++i) {
            const double coef = t.a(i, entering);
            if (coef <= kPivotTol) continue;
            best_ratio = std::min(best_ratio, std::max(t.b[i], 0.0) / coef);
        }
        int leaving = -1;
        if (std::isfinite(best_ratio)) {
            const double slack = 1e-9 * (1.0 + std::abs(best_ratio));
            for (int i = 0; i < t.a.rows(); ++i) {
                const double coef = t.a(i, entering);
                if (coef <= kPivotTol) continue;
                if (std::max(t.b[i], 0.0) / coef > best_ratio + slack) continue;
                const bool better =
                    leaving < 0 ||
                    (bland ? t.basis[static_cast<std::size_t>(i)] <
                                 t.basis[static_cast<std::size_t>(leaving)]
                           : coef > t.a(leaving, entering));
                if (better) leaving = i;
            }
        }
        if (leaving < 0) {
            // A nonpositive column certifies an unbounded ray only when the
            // objective can actually be unbounded; otherwise (and for columns
            // eroded to numerical zero) the positive cost is noise.
            if (!never_unbounded && t.a.col(entering).cwiseAbs().maxCoeff() > 1e-7) return false;
            barred[static_cast<std::size_t>(entering)] = true;
            continue;
        }

        t.pivot(leaving, entering);

        if (t.value > last_value + 1e-12) {
            last_value = t.value;
            stall = 0;
        } else if (++stall > 2 * (static_cast<int>(t.a.rows()) + cols)) {
            bland = true; // degenerate cycling suspected
        }
    }
}

} // namespace

LpResult solve_lp(const Vec& objective, const std::vector<LpRow>& rows, int max_iterations) {
    const int n = static_cast<int>(objective.size());
    const int m = static_cast<int>(rows.size());

    // Column layout: structural | slack/surplus | artificial.
    int num_slack = 0, num_art = 0;
    std::vector<int> slack_col(static_cast<std::size_t>(m), -1);
    std::vector<int> art_col(static_cast<std::size_t>(m), -1);
    std::vector<double> row_sign(static_cast<std::size_t>(m), 1.0);
    std::vector<LpRowType> row_type(static_cast<std::size_t>(m));

    for (int i = 0; i < m; ++i) {
        if (rows[static_cast<std::size_t>(i)].coeffs.size() != n)
            throw std::invalid_argument("solve_lp: row width mismatch");
        LpRowType type = rows[static_cast<std::size_t>(i)].type;
        double sign = 1.0;
        if (rows[static_cast<std::size_t>(i)].rhs < 0.0) {
            sign = -1.0;
            if (type == LpRowType::LessEqual) type = LpRowType::GreaterEqual;
            else if (type == LpRowType::GreaterEqual) type = LpRowType::LessEqual;
        }
        row_sign[static_cast<std::size_t>(i)] = sign;
        row_type[static_cast<std::size_t>(i)] = type;
        if (type != LpRowType::Equal) ++num_slack;
        if (type != LpRowType::LessEqual) ++num_art;
    }

    const int cols = n + num_slack + num_art;
    Tableau t;
    t.a = Mat::Zero(m, cols);
    t.b = Vec::Zero(m);
    t.basis.resize(static_cast<std::size_t>(m));

    int next_slack = n;
    int next_art = n + num_slack;
    for (int i = 0; i < m; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        t.a.row(i).head(n) = row_sign[static_cast<std::size_t>(i)] * row.coeffs.transpose();
        t.b[i] = row_sign[static_cast<std::size_t>(i)] * row.rhs;
        switch (row_type[static_cast<std::size_t>(i)]) {
            case LpRowType::LessEqual:
                slack_col[static_cast<std::size_t>(i)] = next_slack;
                t.a(i, next_slack) = 1.0;
                t.basis[static_cast<std::size_t>(i)] = next_slack++;
                break;
            case LpRowType::GreaterEqual:
                slack_col[static_cast<std::size_t>(i)] = next_slack;
                t.a(i, next_slack++) = -1.0;
                art_col[static_cast<std::size_t>(i)] = next_art;
                t.a(i, next_art) = 1.0;
                t.basis[static_cast<std::size_t>(i)] = next_art++;
                break;
            case LpRowType::Equal:
                art_col[static_cast<std::size_t>(i)] = next_art;
                t.a(i, next_art) = 1.0;
                t.basis[static_cast<std::size_t>(i)] = next_art++;
                break;
        }
    }

    std::vector<bool> allowed(static_cast<std::size_t>(cols), true);
    LpResult result;
    result.iterations = 0;

    // Phase 2 cost row, priced out lazily after phase 1 below.
    Vec real_cost = Vec::Zero(cols);
    real_cost.head(n) = objective;

    if (num_art > 0) {
        // Phase 1: maximize -(sum of artificials); feasible iff the optimum is 0.
        t.cost = Vec::Zero(cols);
        t.value = 0.0;
        for (int i = 0; i < m; ++i) {
            if (art_col[static_cast<std::size_t>(i)] < 0) continue;
            // Price out the basic artificial (cost -1).
            t.cost += t.a.row(i).transpose();
            t.value -= t.b[i];
            t.cost[art_col[static_cast<std::size_t>(i)]] -= 1.0; // its own cost column
        }
        // Artificial columns carry cost -1; the loop above added +1 via their
        // own unit entries, so subtracting 1 restores c_j - z_j = 0 for them.
        if (!run_simplex(t, allowed, /*never_unbounded=*/true, max_iterations, result.iterations))
            throw SolverError("solve_lp: phase 1 unbounded (internal error)");
        if (t.value < -1e-7) {
            result.status = LpStatus::Infeasible;
            return result;
        }
        // Drive surviving artificials out of the basis where possible.
        for (int i = 0; i < m; ++i) {
            const int bcol = t.basis[static_cast<std::size_t>(i)];
            if (bcol < n + num_slack) continue;
            int pivot_col = -1;
            for (int j = 0; j < n + num_slack; ++j)
                if (std::abs(t.a(i, j)) > kPivotTol) {
                    pivot_col = j;
                    break;
                }
            if (pivot_col >= 0) t.pivot(i, pivot_col);
        }
        for (int j = n + num_slack; j < cols; ++j) allowed[static_cast<std::size_t>(j)] = false;
    }

    // Phase 2: price the real objective against the current basis.
    t.cost = real_cost;
    t.value = 0.0;
    for (int i = 0; i < m; ++i) {
        const int bcol = t.basis[static_cast<std::size_t>(i)];
        const double cb = real_cost[bcol];
        if (cb == 0.0) continue;
        t.cost -= cb * t.a.row(i).transpose();
        t.value += cb * t.b[i];
    }
    if (!run_simplex(t, allowed, /*never_unbounded=*/false, max_iterations, result.iterations)) {
        result.status = LpStatus::Unbounded;
        return result;
    }

    result.status = LpStatus::Optimal;
    result.value = t.value;
    result.x = Vec::Zero(n);
    for (int i = 0; i < m; ++i)
        if (t.basis[static_cast<std::size_t>(i)] < n)
            result.x[t.basis[static_cast<std::size_t>(i)]] = t.b[i];

    // Duals from the reduced costs of each row's slack (or artificial) column.
    result.duals = Vec::Zero(m);
    for (int i = 0; i < m; ++i) {
        double y;
        if (row_type[static_cast<std::size_t>(i)] == LpRowType::LessEqual)
            y = -t.cost[slack_col[static_cast<std::size_t>(i)]];
        else if (row_type[static_cast<std::size_t>(i)] == LpRowType::GreaterEqual)
            y = t.cost[slack_col[static_cast<std::size_t>(i)]];
        else
            y = -t.cost[art_col[static_cast<std::size_t>(i)]];
        result.duals[i] = row_sign[static_cast<std::size_t>(i)] * y;
    }
    return result;
}

} // namespace rewardlab
