#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nnbound/lp.hpp"

namespace nnbound {

/** weight * ReLU(coeffs . v + constant) */
struct ReluTerm {
    double weight = 0.0;
    Eigen::VectorXd coeffs;
    double constant = 0.0;
};

/**
 * Optimization of  linear . v + constant + sum_j w_j ReLU(a_j . v + b_j)
 * over a box. One ReLU deep: this is the problem class produced by error
 * terms and by direct first-layer queries.
 */
struct ShallowReluProblem {
    Eigen::VectorXd box_lower;
    Eigen::VectorXd box_upper;
    Eigen::VectorXd linear;
    double constant = 0.0;
    std::vector<ReluTerm> terms;
    Sense sense = Sense::Minimize;

    Eigen::Index dim() const { return linear.size(); }
    double evaluate(const Eigen::VectorXd& v) const;
    /** Interval of term j's ReLU argument over the box. */
    std::pair<double, double> argument_range(std::size_t j) const;
    /** Throws std::invalid_argument when shapes or the box are inconsistent. */
    void validate() const;
    /** Copy with zero-coefficient terms folded into the constant and zero-weight terms dropped. */
    ShallowReluProblem folded() const;
};

enum class OptStatus { Optimal, BudgetExhausted };

const char* to_string(OptStatus status);

struct OptResult {
    /** Lower bound on the optimum when minimizing, upper bound when maximizing. */
    double certified_bound = 0.0;
    double incumbent_value = 0.0;
    Eigen::VectorXd incumbent_point;
    OptStatus status = OptStatus::Optimal;
    std::size_t nodes_explored = 0;
    std::size_t lp_solves = 0;
};

struct MipOptions {
    std::chrono::milliseconds budget{500};
    /** Hard stop shared with a caller, e.g. a per-query timeout. */
    std::optional<std::chrono::steady_clock::time_point> deadline;
    /** 0 means unlimited. */
    std::size_t max_nodes = 0;
    double relative_gap = 1e-8;
    LpOptions lp;
};

/**
 * Exact branch-and-bound over ReLU phases. Each node fixes some terms
 * active or inactive and relaxes the rest by their triangle hull; leaves are
 * exact LPs. Best-bound-first, branching on the unfixed term with the
 * largest |w| * min(U, -L) among those the node LP leaves inexact.
 */
OptResult solve_shallow(const ShallowReluProblem& problem, const MipOptions& options = {});

}  // namespace nnbound
