#pragma once

#include <random>
#include <vector>

#include "nnbound/network.hpp"
#include "nnbound/shallow.hpp"

namespace fixtures {

using nnbound::Activation;
using nnbound::AffineLayer;
using nnbound::Network;

inline Eigen::MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
    Eigen::MatrixXd m(Eigen::Index(rows.size()), Eigen::Index(rows.begin()->size()));
    Eigen::Index r = 0;
    for (auto& row : rows) {
        Eigen::Index c = 0;
        for (double v : row) m(r, c++) = v;
        ++r;
    }
    return m;
}

inline Eigen::VectorXd vec(std::initializer_list<double> xs) {
    Eigen::VectorXd v(Eigen::Index(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

/** The three-input running example: 3 -> 3 -> 3 -> 1. */
inline Network fig1() {
    std::vector<AffineLayer> layers;
    layers.push_back({mat({{1, 1, 0}, {1, -1, 0}, {0, 0, 1}}), Eigen::VectorXd::Zero(3), Activation::ReLU});
    layers.push_back({mat({{1, 1, 0}, {-1, 1, 1}, {-1, 1, -1}}), Eigen::VectorXd::Zero(3), Activation::ReLU});
    layers.push_back({mat({{1, 1, 1}}), Eigen::VectorXd::Zero(1), Activation::Identity});
    return Network(3, std::move(layers));
}

inline nnbound::BoxDomain unit_box(Eigen::Index n) {
    return nnbound::BoxDomain(Eigen::VectorXd::Constant(n, -1.0), Eigen::VectorXd::Constant(n, 1.0));
}

/** x + 2 - relu(x + y) - relu(x - y) over [-1,1]^2; minimum 1. */
inline nnbound::ShallowReluProblem detached_fixture() {
    nnbound::ShallowReluProblem p;
    p.box_lower = vec({-1, -1});
    p.box_upper = vec({1, 1});
    p.linear = vec({1, 0});
    p.constant = 2.0;
    p.terms = {{-1.0, vec({1, 1}), 0.0}, {-1.0, vec({1, -1}), 0.0}};
    p.sense = nnbound::Sense::Minimize;
    return p;
}

/** Second-layer error term of the running example's output upper bound; minimum 0.4. */
inline nnbound::ShallowReluProblem layer2_error_fixture() {
    nnbound::ShallowReluProblem p;
    p.box_lower = vec({0, 0, 0});
    p.box_upper = vec({2, 2, 1});
    p.linear = vec({0, 2, 0.2});
    p.constant = 2.4;
    p.terms = {{-1.0, vec({1, 1, 0}), 0.0}, {-1.0, vec({-1, 1, 1}), 0.0}, {-1.0, vec({-1, 1, -1}), 0.0}};
    p.sense = nnbound::Sense::Minimize;
    return p;
}

inline Network random_network(std::mt19937_64& rng, std::size_t max_in, std::size_t max_hidden_layers,
                              std::size_t max_width, double wscale = 1.0) {
    std::uniform_int_distribution<std::size_t> in_d(1, max_in), depth_d(1, max_hidden_layers), width_d(1, max_width);
    std::uniform_real_distribution<double> w(-wscale, wscale), b(-0.5, 0.5);
    const std::size_t in = in_d(rng);
    const std::size_t hidden = depth_d(rng);
    std::vector<AffineLayer> layers;
    std::size_t prev = in;
    for (std::size_t l = 0; l <= hidden; ++l) {
        const bool last = l == hidden;
        const std::size_t width = last ? 1 : width_d(rng);
        AffineLayer layer;
        layer.weights.resize(Eigen::Index(width), Eigen::Index(prev));
        layer.bias.resize(Eigen::Index(width));
        for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
            for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = w(rng);
            layer.bias(r) = b(rng);
        }
        layer.activation = last ? Activation::Identity : Activation::ReLU;
        layers.push_back(std::move(layer));
        prev = width;
    }
    return Network(in, std::move(layers));
}

inline nnbound::BoxDomain random_box(std::mt19937_64& rng, std::size_t dim) {
    std::uniform_real_distribution<double> c(-1.0, 1.0), r(0.05, 1.0);
    Eigen::VectorXd lo = Eigen::VectorXd::Zero(Eigen::Index(dim)), hi = lo;
    for (Eigen::Index i = 0; i < lo.size(); ++i) {
        double center = c(rng), radius = r(rng);
        lo(i) = center - radius;
        hi(i) = center + radius;
    }
    return nnbound::BoxDomain(lo, hi);
}

inline nnbound::ShallowReluProblem random_shallow(std::mt19937_64& rng, std::size_t max_vars, std::size_t max_terms) {
    std::uniform_int_distribution<std::size_t> nv(1, max_vars), nt(0, max_terms);
    std::uniform_real_distribution<double> w(-2.0, 2.0), lo(-2.0, 0.5), width(0.1, 2.0);
    std::bernoulli_distribution coin(0.5);
    nnbound::ShallowReluProblem p;
    const auto n = Eigen::Index(nv(rng));
    p.box_lower.resize(n);
    p.box_upper.resize(n);
    p.linear.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        p.box_lower(i) = lo(rng);
        p.box_upper(i) = p.box_lower(i) + width(rng);
        p.linear(i) = w(rng);
    }
    p.constant = w(rng);
    const std::size_t k = nt(rng);
    for (std::size_t j = 0; j < k; ++j) {
        nnbound::ReluTerm t;
        t.weight = w(rng);
        t.coeffs.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) t.coeffs(i) = w(rng);
        t.constant = w(rng);
        p.terms.push_back(std::move(t));
    }
    p.sense = coin(rng) ? nnbound::Sense::Minimize : nnbound::Sense::Maximize;
    return p;
}

}  // namespace fixtures
