#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

namespace nnbound {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/** Raised for malformed network, query or dataset files. */
class ParseError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/** Raised when layer dimensions do not line up. */
class ShapeError : public std::runtime_error {
  public:
    ShapeError(std::size_t layer, const std::string& what)
        : std::runtime_error("layer " + std::to_string(layer) + ": " + what), layer_(layer) {}

    std::size_t layer() const { return layer_; }

  private:
    std::size_t layer_;
};

/** Raised for non-finite weights, inverted boxes and similar value problems. */
class ValueError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class Activation { ReLU, Identity };

template <typename Scalar>
    requires std::is_arithmetic_v<Scalar>
inline Scalar relu(Scalar x) {
    return x > Scalar(0) ? x : Scalar(0);
}

template <typename Derived>
auto relu(const Eigen::MatrixBase<Derived>& x) {
    return x.cwiseMax(typename Derived::Scalar(0));
}

/**
 * One fully-connected layer: rows are output neurons, columns input neurons.
 */
template <typename Scalar>
struct AffineLayerT {
    MatrixX<Scalar> weights;
    VectorX<Scalar> bias;
    Activation activation = Activation::ReLU;

    Eigen::Index input_width() const { return weights.cols(); }
    Eigen::Index output_width() const { return weights.rows(); }
};

/**
 * Axis-aligned input region.
 */
template <typename Scalar>
struct BoxDomainT {
    VectorX<Scalar> lower;
    VectorX<Scalar> upper;

    BoxDomainT() = default;
    BoxDomainT(VectorX<Scalar> lo, VectorX<Scalar> hi) : lower(std::move(lo)), upper(std::move(hi)) {
        if (lower.size() != upper.size())
            throw ValueError("box lower/upper length mismatch");
        for (Eigen::Index j = 0; j < lower.size(); ++j) {
            if (!std::isfinite(double(lower(j))) || !std::isfinite(double(upper(j))))
                throw ValueError("box bounds must be finite");
            if (lower(j) > upper(j))
                throw ValueError("box lower exceeds upper at coordinate " + std::to_string(j));
        }
    }

    /** [center - eps, center + eps] per coordinate. */
    static BoxDomainT around(const VectorX<Scalar>& center, Scalar eps) {
        if (eps < Scalar(0))
            throw ValueError("epsilon must be non-negative");
        return BoxDomainT((center.array() - eps).matrix(), (center.array() + eps).matrix());
    }

    Eigen::Index size() const { return lower.size(); }
    bool contains(const VectorX<Scalar>& x, Scalar tol = Scalar(0)) const {
        return x.size() == size() && (x.array() >= lower.array() - tol).all() &&
               (x.array() <= upper.array() + tol).all();
    }
};

/** Pre- and post-activation values of every layer, index 0 being the input. */
template <typename Scalar>
struct ForwardTraceT {
    std::vector<VectorX<Scalar>> pre;
    std::vector<VectorX<Scalar>> post;

    const VectorX<Scalar>& output() const { return post.back(); }
};

/**
 * A feed-forward ReLU network. Hidden layers apply ReLU, the last layer is
 * affine only. Immutable once validated.
 *
 * Layer numbering follows the neuron layers: neuron layer 0 is the input,
 * neuron layer i (1 <= i <= depth()) is the output of affine layer i - 1.
 */
template <typename Scalar>
class NetworkT {
  public:
    NetworkT() = default;
    NetworkT(std::size_t input_dim, std::vector<AffineLayerT<Scalar>> layers)
        : input_dim_(input_dim), layers_(std::move(layers)) {
        validate();
    }

    std::size_t input_dim() const { return input_dim_; }
    std::size_t output_dim() const { return std::size_t(layers_.back().output_width()); }
    /** Number of affine layers, i.e. the index of the output neuron layer. */
    std::size_t depth() const { return layers_.size(); }
    const std::vector<AffineLayerT<Scalar>>& layers() const { return layers_; }
    const AffineLayerT<Scalar>& layer(std::size_t i) const { return layers_.at(i); }

    /** Width of neuron layer i (0 = input). */
    std::size_t width(std::size_t i) const {
        return i == 0 ? input_dim_ : std::size_t(layers_.at(i - 1).output_width());
    }

    /** Affine map producing neuron layer i from neuron layer i - 1. */
    const MatrixX<Scalar>& weights_into(std::size_t i) const { return layers_.at(i - 1).weights; }
    const VectorX<Scalar>& bias_into(std::size_t i) const { return layers_.at(i - 1).bias; }

    std::size_t hidden_neuron_count() const {
        std::size_t n = 0;
        for (std::size_t i = 1; i < depth(); ++i) n += width(i);
        return n;
    }

  private:
    void validate() const {
        if (input_dim_ == 0)
            throw ValueError("input_dim must be positive");
        if (layers_.empty())
            throw ValueError("network has no layers");
        Eigen::Index expected = Eigen::Index(input_dim_);
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            const auto& layer = layers_[i];
            if (layer.weights.rows() == 0)
                throw ShapeError(i, "layer has no neurons");
            if (layer.weights.cols() != expected)
                throw ShapeError(i, "weights have " + std::to_string(layer.weights.cols()) +
                                        " columns, expected " + std::to_string(expected));
            if (layer.bias.size() != layer.weights.rows())
                throw ShapeError(i, "bias length " + std::to_string(layer.bias.size()) +
                                        " does not match " + std::to_string(layer.weights.rows()) +
                                        " rows");
            bool last = i + 1 == layers_.size();
            if (last && layer.activation != Activation::Identity)
                throw ShapeError(i, "output layer must have identity activation");
            if (!last && layer.activation != Activation::ReLU)
                throw ShapeError(i, "hidden layers must use relu");
            if (!layer.weights.allFinite() || !layer.bias.allFinite())
                throw ValueError("layer " + std::to_string(i) + ": non-finite weight or bias");
            expected = layer.weights.rows();
        }
    }

    std::size_t input_dim_ = 0;
    std::vector<AffineLayerT<Scalar>> layers_;
};

/** Exact evaluation keeping every intermediate value. */
template <typename Scalar>
ForwardTraceT<Scalar> forward_trace(const NetworkT<Scalar>& net, const VectorX<Scalar>& point) {
    if (std::size_t(point.size()) != net.input_dim())
        throw ShapeError(0, "point has length " + std::to_string(point.size()) + ", expected " +
                                std::to_string(net.input_dim()));
    ForwardTraceT<Scalar> trace;
    trace.pre.push_back(point);
    trace.post.push_back(point);
    for (const auto& layer : net.layers()) {
        VectorX<Scalar> x = layer.weights * trace.post.back() + layer.bias;
        VectorX<Scalar> y = layer.activation == Activation::ReLU ? VectorX<Scalar>(relu(x)) : x;
        trace.pre.push_back(std::move(x));
        trace.post.push_back(std::move(y));
    }
    return trace;
}

template <typename Scalar>
VectorX<Scalar> forward_eval(const NetworkT<Scalar>& net, const VectorX<Scalar>& point) {
    return forward_trace(net, point).output();
}

using AffineLayer = AffineLayerT<double>;
using BoxDomain = BoxDomainT<double>;
using Network = NetworkT<double>;
using ForwardTrace = ForwardTraceT<double>;

/** Parses the JSON network format. Throws ParseError, ShapeError or ValueError. */
Network load_network(const std::string& text);
Network load_network_file(const std::string& path);
std::string serialize_network(const Network& net);

}  // namespace nnbound
