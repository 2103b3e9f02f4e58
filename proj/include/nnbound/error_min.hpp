#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "nnbound/bounds.hpp"
#include "nnbound/shallow.hpp"

namespace nnbound {

/**
 * Over-approximation error introduced when the ReLUs of layer t are replaced
 * by their triangle edges in one substitution step:
 *
 *   E(v) = relaxed(v) - sum_j omega_j ReLU(W_j v + b_j)
 *
 * where v ranges over the post-activations of layer t - 1 and omega is the
 * form's coefficient row over layer t. E >= 0 for upper-side steps and
 * E <= 0 for lower-side steps.
 */
struct ErrorTerm {
    std::size_t layer_index = 0;
    Side side = Side::Upper;
    Eigen::VectorXd outer_coeffs;
    ReluRelaxation relaxation;
    /** Minimized for Upper, maximized for Lower. */
    ShallowReluProblem problem;

    double evaluate(const Eigen::VectorXd& previous_post) const { return problem.evaluate(previous_post); }
};

/**
 * Builds the error term of the step `form -> step.form`. The box is the
 * concrete post-activation box of layer t - 1 (the input box when t = 1).
 */
ErrorTerm assemble_error_term(const SymbolicLinearForm& form, const SubstitutionStep& step, const Network& net,
                              const LayerBounds& bounds, Side side);

/** A bound obtained from the MIP backend with bookkeeping for reports. */
struct MipBound {
    double value = 0.0;
    bool exhausted = false;
    std::size_t nodes = 0;
};

/**
 * Certified extremum of the error: a lower bound on min E (never below 0)
 * for Upper terms, an upper bound on max E (never above 0) for Lower terms.
 */
MipBound minimize_error(const ErrorTerm& term, const MipOptions& options);

/**
 * The shallow problem  c + sum_j omega_j ReLU(W_j v + b_j)  for a form over
 * the post-activations of ReLU layer p, with v boxed by layer p - 1's post
 * bounds. Maximized for Upper, minimized for Lower.
 */
ShallowReluProblem form_as_shallow_problem(const SymbolicLinearForm& form, const Network& net,
                                           const LayerBounds& bounds, Side side);

/**
 * Side-bound of a form over layer p's post-activations, solved one ReLU
 * deep over layer p - 1's box. On budget exhaustion the certified MIP bound
 * is combined with the box concretization of the form and `exhausted` is set.
 */
MipBound concretize_partial_mip(const SymbolicLinearForm& form, const Network& net, const LayerBounds& bounds,
                                Side side, const MipOptions& options);

/** concretize_partial_mip for a form over layer 1, i.e. directly over the input box. */
MipBound direct_first_layer_bound(const SymbolicLinearForm& form, const Network& net, const BoxDomain& dom,
                                  Side side, const MipOptions& options);

}  // namespace nnbound
