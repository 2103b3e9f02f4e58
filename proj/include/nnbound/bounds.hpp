#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nnbound/network.hpp"

namespace nnbound {

enum class Side { Upper, Lower };
enum class VarKind { PreActivation, PostActivation };

inline const char* to_string(Side side) { return side == Side::Upper ? "upper" : "lower"; }

/** Raised for inconsistent engine configuration, e.g. an incomplete alpha map. */
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/**
 * Concrete per-neuron intervals for every neuron layer. Index 0 holds the
 * input box (pre == post there).
 */
template <typename Scalar>
struct LayerBoundsT {
    std::vector<VectorX<Scalar>> pre_lower, pre_upper;
    std::vector<VectorX<Scalar>> post_lower, post_upper;

    std::size_t layer_count() const { return pre_lower.size(); }
    bool has_layer(std::size_t i) const { return i < pre_lower.size(); }

    void push_input(const BoxDomainT<Scalar>& dom) {
        pre_lower.push_back(dom.lower);
        pre_upper.push_back(dom.upper);
        post_lower.push_back(dom.lower);
        post_upper.push_back(dom.upper);
    }

    /** Appends a layer's pre-activation bounds and derives its post bounds. */
    void push_layer(VectorX<Scalar> lo, VectorX<Scalar> hi, Activation act) {
        if (act == Activation::ReLU) {
            post_lower.push_back(VectorX<Scalar>(relu(lo)));
            post_upper.push_back(VectorX<Scalar>(relu(hi)));
        } else {
            post_lower.push_back(lo);
            post_upper.push_back(hi);
        }
        pre_lower.push_back(std::move(lo));
        pre_upper.push_back(std::move(hi));
    }
};

/**
 * Interval arithmetic through every layer: each affine map is bounded by
 * splitting its coefficients by sign, ReLU clamps at zero.
 */
template <typename Scalar>
LayerBoundsT<Scalar> interval_propagate(const NetworkT<Scalar>& net, const BoxDomainT<Scalar>& dom) {
    if (std::size_t(dom.size()) != net.input_dim())
        throw ShapeError(0, "domain has dimension " + std::to_string(dom.size()) + ", expected " +
                                std::to_string(net.input_dim()));
    LayerBoundsT<Scalar> bounds;
    bounds.push_input(dom);
    for (const auto& layer : net.layers()) {
        const auto& lo = bounds.post_lower.back();
        const auto& hi = bounds.post_upper.back();
        MatrixX<Scalar> pos = layer.weights.cwiseMax(Scalar(0));
        MatrixX<Scalar> neg = layer.weights.cwiseMin(Scalar(0));
        VectorX<Scalar> new_lo = pos * lo + neg * hi + layer.bias;
        VectorX<Scalar> new_hi = pos * hi + neg * lo + layer.bias;
        bounds.push_layer(std::move(new_lo), std::move(new_hi), layer.activation);
    }
    return bounds;
}

/**
 * How the lower (alpha) edge of an unstable ReLU is chosen.
 */
struct AlphaPolicy {
    enum class Kind { CrownHeuristic, FixedZero, FixedOne, Explicit };

    Kind kind = Kind::CrownHeuristic;
    /** Explicit values keyed by neuron layer index, one entry per neuron. */
    std::map<std::size_t, std::vector<double>> values;

    static AlphaPolicy crown() { return {}; }
    static AlphaPolicy zero() { return {Kind::FixedZero, {}}; }
    static AlphaPolicy one() { return {Kind::FixedOne, {}}; }
    static AlphaPolicy explicit_values(std::map<std::size_t, std::vector<double>> values) {
        for (const auto& [layer, row] : values)
            for (double a : row)
                if (!(a >= 0.0 && a <= 1.0))
                    throw ConfigError("alpha for layer " + std::to_string(layer) +
                                      " outside [0, 1]");
        return {Kind::Explicit, std::move(values)};
    }
    /** Every neuron of every hidden layer set to the same value. */
    template <typename Scalar>
    static AlphaPolicy uniform(const NetworkT<Scalar>& net, double alpha) {
        std::map<std::size_t, std::vector<double>> values;
        for (std::size_t i = 1; i < net.depth(); ++i) values[i] = std::vector<double>(net.width(i), alpha);
        return explicit_values(std::move(values));
    }
};

std::string to_string(const AlphaPolicy& policy);

/**
 * Alpha for the lower edge of an unstable neuron (l < 0 < u). The CROWN
 * heuristic keeps the identity edge when the positive side dominates;
 * ties go to zero.
 */
template <typename Scalar>
Scalar choose_alpha(Scalar l, Scalar u, const AlphaPolicy& policy, std::size_t layer = 0,
                    std::size_t neuron = 0) {
    switch (policy.kind) {
        case AlphaPolicy::Kind::CrownHeuristic: return u > -l ? Scalar(1) : Scalar(0);
        case AlphaPolicy::Kind::FixedZero: return Scalar(0);
        case AlphaPolicy::Kind::FixedOne: return Scalar(1);
        case AlphaPolicy::Kind::Explicit: {
            auto it = policy.values.find(layer);
            if (it == policy.values.end() || neuron >= it->second.size())
                throw ConfigError("explicit alpha policy has no value for layer " +
                                  std::to_string(layer) + " neuron " + std::to_string(neuron));
            return Scalar(it->second[neuron]);
        }
    }
    return Scalar(0);
}

template <typename Scalar>
struct RelaxationEntry {
    Scalar slope;
    Scalar intercept;
};

/**
 * One diagonal entry of the relaxation matrix plus its constant-term
 * contribution. Stable neurons (l >= 0 or u <= 0, including l == u) are
 * exact. For unstable neurons the chord is the upper edge and alpha * t the
 * lower edge; which one is used depends on the side being bounded and the
 * sign of the neuron's coefficient (zero counts as non-negative).
 */
template <typename Scalar>
RelaxationEntry<Scalar> relaxation_entry(Scalar l, Scalar u, Scalar alpha, bool coeff_nonneg, Side side) {
    if (l >= Scalar(0)) return {Scalar(1), Scalar(0)};
    if (u <= Scalar(0)) return {Scalar(0), Scalar(0)};
    bool use_chord = (side == Side::Upper) == coeff_nonneg;
    if (use_chord) {
        Scalar slope = u / (u - l);
        return {slope, -slope * l};
    }
    return {alpha, Scalar(0)};
}

/**
 * A linear bound c + sum_j coeffs_j * v_j over the neurons v of one layer.
 */
template <typename Scalar>
struct SymbolicLinearFormT {
    std::size_t layer_index = 0;
    VarKind var_kind = VarKind::PostActivation;
    VectorX<Scalar> coeffs;
    Scalar constant = Scalar(0);

    Scalar evaluate(const VectorX<Scalar>& values) const {
        Scalar acc = constant;
        for (Eigen::Index j = 0; j < coeffs.size(); ++j) acc += coeffs(j) * values(j);
        return acc;
    }
};

/**
 * Exact optimum of a linear form over a box: the maximum for Upper, the
 * minimum for Lower.
 */
template <typename Scalar>
Scalar concretize_box(const SymbolicLinearFormT<Scalar>& form, const VectorX<Scalar>& lower,
                      const VectorX<Scalar>& upper, Side side) {
    if (lower.size() != form.coeffs.size() || upper.size() != form.coeffs.size())
        throw ShapeError(form.layer_index, "concretization box does not match form width");
    Scalar acc = form.constant;
    for (Eigen::Index j = 0; j < form.coeffs.size(); ++j) {
        Scalar w = form.coeffs(j);
        bool take_upper = (w >= Scalar(0)) == (side == Side::Upper);
        acc += w * (take_upper ? upper(j) : lower(j));
    }
    return acc;
}

/** The relaxation chosen for every ReLU of one layer during a substitution. */
template <typename Scalar>
struct ReluRelaxationT {
    std::size_t layer_index = 0;
    VectorX<Scalar> slope;
    VectorX<Scalar> intercept;
    VectorX<Scalar> alpha;
};

template <typename Scalar>
struct SubstitutionStepT {
    SymbolicLinearFormT<Scalar> form;
    ReluRelaxationT<Scalar> relaxation;
};

/**
 * Rewrites a side-bound over the post-activations of layer p as a bound over
 * the post-activations of layer p - 1, relaxing each ReLU of layer p by its
 * triangle edge and substituting the affine map. Also returns the
 * relaxation used, which determines the error term of this step.
 */
template <typename Scalar>
SubstitutionStepT<Scalar> substitute_with_relaxation(const SymbolicLinearFormT<Scalar>& form,
                                                      const NetworkT<Scalar>& net,
                                                      const LayerBoundsT<Scalar>& bounds,
                                                      const AlphaPolicy& policy, Side side) {
    const std::size_t p = form.layer_index;
    if (p == 0)
        throw ShapeError(0, "cannot substitute past the input layer");
    if (!bounds.has_layer(p))
        throw ShapeError(p, "missing concrete bounds for substitution");
    if (std::size_t(form.coeffs.size()) != net.width(p))
        throw ShapeError(p, "form width does not match layer");
    const auto& lo = bounds.pre_lower[p];
    const auto& hi = bounds.pre_upper[p];
    const bool is_relu = net.layer(p - 1).activation == Activation::ReLU;
    const Eigen::Index n = form.coeffs.size();

    ReluRelaxationT<Scalar> relax;
    relax.layer_index = p;
    relax.slope.resize(n);
    relax.intercept.resize(n);
    relax.alpha = VectorX<Scalar>::Zero(n);
    Scalar constant = form.constant;
    for (Eigen::Index j = 0; j < n; ++j) {
        if (!is_relu) {
            relax.slope(j) = Scalar(1);
            relax.intercept(j) = Scalar(0);
            continue;
        }
        Scalar l = lo(j), u = hi(j);
        Scalar alpha(0);
        if (l < Scalar(0) && u > Scalar(0))
            alpha = choose_alpha(l, u, policy, p, std::size_t(j));
        auto entry = relaxation_entry(l, u, alpha, form.coeffs(j) >= Scalar(0), side);
        relax.slope(j) = entry.slope;
        relax.intercept(j) = entry.intercept;
        relax.alpha(j) = alpha;
        constant += form.coeffs(j) * entry.intercept;
    }
    VectorX<Scalar> scaled = form.coeffs.cwiseProduct(relax.slope);
    const auto& W = net.weights_into(p);
    const auto& b = net.bias_into(p);

    SymbolicLinearFormT<Scalar> out;
    out.layer_index = p - 1;
    out.var_kind = VarKind::PostActivation;
    out.coeffs = VectorX<Scalar>::Zero(W.cols());
    for (Eigen::Index c = 0; c < W.cols(); ++c) {
        Scalar acc(0);
        for (Eigen::Index r = 0; r < n; ++r) acc += scaled(r) * W(r, c);
        out.coeffs(c) = acc;
    }
    for (Eigen::Index r = 0; r < n; ++r) constant += scaled(r) * b(r);
    out.constant = constant;
    return {std::move(out), std::move(relax)};
}

template <typename Scalar>
SymbolicLinearFormT<Scalar> substitute_previous_layer(const SymbolicLinearFormT<Scalar>& form,
                                                      const NetworkT<Scalar>& net,
                                                      const LayerBoundsT<Scalar>& bounds,
                                                      const AlphaPolicy& policy, Side side) {
    return substitute_with_relaxation(form, net, bounds, policy, side).form;
}

/**
 * The defining affine form of neuron `neuron` of layer i, expressed over the
 * post-activations of layer i - 1.
 */
template <typename Scalar>
SymbolicLinearFormT<Scalar> neuron_form(const NetworkT<Scalar>& net, std::size_t i, std::size_t neuron) {
    SymbolicLinearFormT<Scalar> form;
    form.layer_index = i - 1;
    form.coeffs = net.weights_into(i).row(Eigen::Index(neuron)).transpose();
    form.constant = net.bias_into(i)(Eigen::Index(neuron));
    return form;
}

using LayerBounds = LayerBoundsT<double>;
using SymbolicLinearForm = SymbolicLinearFormT<double>;
using ReluRelaxation = ReluRelaxationT<double>;
using SubstitutionStep = SubstitutionStepT<double>;

}  // namespace nnbound
