#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nnbound/lp.hpp"
#include "nnbound/shallow.hpp"

namespace nnbound {

/**
 * Writes a shallow problem as a mixed-integer program in LP text format,
 * big-M encoded: per ReLU term an auxiliary y_j >= 0 and a binary z_j with
 *
 *   y_j >= a_j.v + b_j,  y_j <= a_j.v + b_j - L_j (1 - z_j),  y_j <= U_j z_j
 *
 * where [L_j, U_j] is the interval of a_j.v + b_j over the box. Variables
 * are named v0.., y0.., z0..; numbers carry 17 significant digits.
 */
std::string export_lp_text(const ShallowReluProblem& problem);

/** A parsed LP-format model. Coefficients are keyed by variable name. */
struct MilpModel {
    struct Row {
        std::string name;
        std::map<std::string, double> coeffs;
        Relation relation = Relation::LessEq;
        double rhs = 0.0;
    };

    Sense sense = Sense::Minimize;
    std::map<std::string, double> objective;
    double objective_constant = 0.0;
    std::vector<Row> rows;
    /** Variables in order of first appearance. */
    std::vector<std::string> variables;
    std::map<std::string, std::pair<double, double>> bounds;
    std::vector<std::string> binaries;

    std::pair<double, double> bounds_of(const std::string& var) const;
};

/** Parses the LP-format subset used by export_lp_text; throws ParseError with a line number. */
MilpModel parse_lp_text(const std::string& text);

/**
 * Optimum of a parsed model with few binaries by fixing every binary
 * assignment and solving the remaining LP. Continuous variables must have
 * finite bounds. Returns nullopt when every assignment is infeasible.
 */
std::optional<double> solve_milp_by_enumeration(const MilpModel& model, std::size_t max_binaries = 16);

}  // namespace nnbound
