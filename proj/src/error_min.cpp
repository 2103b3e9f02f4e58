#include "nnbound/error_min.hpp"

#include <algorithm>

namespace nnbound {

namespace {

void check_relu_layer(const Network& net, std::size_t p) {
    if (p == 0 || p >= net.depth() || net.layer(p - 1).activation != Activation::ReLU)
        throw ShapeError(p, "expected a form over a hidden ReLU layer");
}

ShallowReluProblem relu_sum_problem(const SymbolicLinearForm& form, const Network& net, const Eigen::VectorXd& lo,
                                    const Eigen::VectorXd& hi, double relu_sign) {
    const std::size_t p = form.layer_index;
    const auto& W = net.weights_into(p);
    const auto& b = net.bias_into(p);
    ShallowReluProblem prob;
    prob.box_lower = lo;
    prob.box_upper = hi;
    prob.linear = Eigen::VectorXd::Zero(W.cols());
    for (Eigen::Index j = 0; j < W.rows(); ++j) {
        if (form.coeffs(j) == 0.0) continue;
        prob.terms.push_back({relu_sign * form.coeffs(j), W.row(j).transpose(), b(j)});
    }
    return prob;
}

}  // namespace

ErrorTerm assemble_error_term(const SymbolicLinearForm& form, const SubstitutionStep& step, const Network& net,
                              const LayerBounds& bounds, Side side) {
    const std::size_t t = form.layer_index;
    check_relu_layer(net, t);
    if (!bounds.has_layer(t) || step.form.layer_index + 1 != t)
        throw ShapeError(t, "error term needs the substitution step of this layer and its bounds");
    ErrorTerm term;
    term.layer_index = t;
    term.side = side;
    term.outer_coeffs = form.coeffs;
    term.relaxation = step.relaxation;
    term.problem = relu_sum_problem(form, net, bounds.post_lower[t - 1], bounds.post_upper[t - 1], -1.0);
    term.problem.linear = step.form.coeffs;
    term.problem.constant = step.form.constant - form.constant;
    term.problem.sense = side == Side::Upper ? Sense::Minimize : Sense::Maximize;
    return term;
}

MipBound minimize_error(const ErrorTerm& term, const MipOptions& options) {
    auto res = solve_shallow(term.problem, options);
    MipBound out;
    out.exhausted = res.status == OptStatus::BudgetExhausted;
    out.nodes = res.nodes_explored;
    out.value = term.side == Side::Upper ? std::max(res.certified_bound, 0.0) : std::min(res.certified_bound, 0.0);
    return out;
}

ShallowReluProblem form_as_shallow_problem(const SymbolicLinearForm& form, const Network& net,
                                           const LayerBounds& bounds, Side side) {
    const std::size_t p = form.layer_index;
    check_relu_layer(net, p);
    if (!bounds.has_layer(p - 1)) throw ShapeError(p, "missing bounds of the preceding layer");
    auto prob = relu_sum_problem(form, net, bounds.post_lower[p - 1], bounds.post_upper[p - 1], 1.0);
    prob.constant = form.constant;
    prob.sense = side == Side::Upper ? Sense::Maximize : Sense::Minimize;
    return prob;
}

MipBound concretize_partial_mip(const SymbolicLinearForm& form, const Network& net, const LayerBounds& bounds,
                                Side side, const MipOptions& options) {
    auto prob = form_as_shallow_problem(form, net, bounds, side);
    auto res = solve_shallow(prob, options);
    MipBound out;
    out.value = res.certified_bound;
    out.nodes = res.nodes_explored;
    if (res.status == OptStatus::BudgetExhausted) {
        out.exhausted = true;
        if (bounds.has_layer(form.layer_index)) {
            double box = concretize_box(form, bounds.post_lower[form.layer_index],
                                        bounds.post_upper[form.layer_index], side);
            out.value = side == Side::Upper ? std::min(out.value, box) : std::max(out.value, box);
        }
    }
    return out;
}

MipBound direct_first_layer_bound(const SymbolicLinearForm& form, const Network& net, const BoxDomain& dom,
                                  Side side, const MipOptions& options) {
    if (form.layer_index != 1) throw ShapeError(form.layer_index, "direct query needs a form over layer 1");
    LayerBounds bounds;
    bounds.push_input(dom);
    const auto& layer = net.layer(0);
    Eigen::MatrixXd pos = layer.weights.cwiseMax(0.0), neg = layer.weights.cwiseMin(0.0);
    bounds.push_layer(pos * dom.lower + neg * dom.upper + layer.bias, pos * dom.upper + neg * dom.lower + layer.bias,
                      layer.activation);
    return concretize_partial_mip(form, net, bounds, side, options);
}

}  // namespace nnbound
