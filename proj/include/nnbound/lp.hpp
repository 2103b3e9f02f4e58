#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nnbound {

enum class Sense { Minimize, Maximize };

inline const char* to_string(Sense s) { return s == Sense::Minimize ? "minimize" : "maximize"; }

enum class Relation { LessEq, GreaterEq, Equal };

struct LinearConstraint {
    Eigen::VectorXd coeffs;
    Relation relation = Relation::LessEq;
    double rhs = 0.0;
};

/**
 * objective . x + constant subject to linear constraints and a finite box.
 */
struct LinearProgram {
    Eigen::VectorXd objective;
    double constant = 0.0;
    Sense sense = Sense::Minimize;
    std::vector<LinearConstraint> constraints;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    Eigen::Index dim() const { return objective.size(); }
    void add(Eigen::VectorXd coeffs, Relation rel, double rhs) {
        constraints.push_back({std::move(coeffs), rel, rhs});
    }
};

enum class LpStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

const char* to_string(LpStatus status);

struct LpResult {
    LpStatus status = LpStatus::NumericalFailure;
    double value = 0.0;
    Eigen::VectorXd point;
    int iterations = 0;
};

struct LpOptions {
    double pivot_tolerance = 1e-9;
    /** Phase-one residual (relative to the right-hand side scale) still accepted as feasible. */
    double feasibility_tolerance = 1e-9;
    int max_iterations = 50000;
};

/**
 * Two-phase bounded-variable primal simplex on a dense tableau. Variable
 * bounds are handled implicitly (bound flips); Bland's rule on entering and
 * leaving choices prevents cycling. The returned point is checked against
 * the original constraints, and a failed check is reported as
 * NumericalFailure rather than Optimal.
 */
LpResult solve_lp(const LinearProgram& lp, const LpOptions& options = {});

}  // namespace nnbound
