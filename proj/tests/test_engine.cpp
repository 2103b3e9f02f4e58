#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "nnbound/engine.hpp"
#include "nnbound/oracle.hpp"

using namespace nnbound;
using fixtures::vec;

namespace {

constexpr Mode kModes[] = {Mode::Interval, Mode::Symbolic, Mode::MiniMIP, Mode::DeepMIP};

EngineConfig config(Mode m) {
    EngineConfig cfg;
    cfg.mode = m;
    cfg.mip_budget = std::chrono::milliseconds(5000);
    return cfg;
}

}  // namespace

TEST_CASE("parse_mode") {
    CHECK(parse_mode("deepmip") == Mode::DeepMIP);
    CHECK(parse_mode("interval") == Mode::Interval);
    CHECK(std::string(to_string(Mode::MiniMIP)) == "minimip");
    CHECK_THROWS_AS(parse_mode("exact"), ConfigError);
    CHECK(cheaper_mode(Mode::DeepMIP) == Mode::MiniMIP);
    CHECK_FALSE(cheaper_mode(Mode::Interval).has_value());
}

TEST_CASE("every mode is sound against sampled forward passes") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int it = 0; it < 40; ++it) {
        auto net = fixtures::random_network(rng, 4, 3, 5);
        auto dom = fixtures::random_box(rng, net.input_dim());
        std::vector<ForwardTrace> traces;
        for (int s = 0; s < 300; ++s) {
            Eigen::VectorXd x(dom.size());
            for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = dom.lower(i) + (dom.upper(i) - dom.lower(i)) * u(rng);
            traces.push_back(forward_trace(net, x));
        }
        auto range = enumerate_network_extremes(net, dom, 0);
        for (Mode m : kModes) {
            auto r = compute_all_bounds(net, dom, config(m));
            for (const auto& t : traces)
                for (std::size_t i = 1; i <= net.depth(); ++i) {
                    CHECK((t.pre[i].array() >= r.bounds.pre_lower[i].array() - 1e-9).all());
                    CHECK((t.pre[i].array() <= r.bounds.pre_upper[i].array() + 1e-9).all());
                }
            CHECK(r.bounds.pre_upper[net.depth()](0) >= range.max - 1e-8);
            CHECK(r.bounds.pre_lower[net.depth()](0) <= range.min + 1e-8);
        }
    }
}

TEST_CASE("modes are ordered neuron by neuron") {
    std::mt19937_64 rng(43);
    for (int it = 0; it < 40; ++it) {
        auto net = fixtures::random_network(rng, 4, 3, 5);
        auto dom = fixtures::random_box(rng, net.input_dim());
        std::vector<LayerBounds> all;
        for (Mode m : kModes) all.push_back(compute_all_bounds(net, dom, config(m)).bounds);
        for (std::size_t k = 1; k < all.size(); ++k)
            for (std::size_t i = 1; i <= net.depth(); ++i) {
                CHECK((all[k].pre_upper[i].array() <= all[k - 1].pre_upper[i].array() + 1e-9).all());
                CHECK((all[k].pre_lower[i].array() >= all[k - 1].pre_lower[i].array() - 1e-9).all());
            }
    }
}

TEST_CASE("stable networks are bounded exactly") {
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int checked = 0;
    for (int it = 0; it < 500 && checked < 20; ++it) {
        auto net = fixtures::random_network(rng, 3, 2, 4);
        Eigen::VectorXd c(Eigen::Index(net.input_dim()));
        for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = u(rng);
        BoxDomain dom((c.array() - 0.01).matrix(), (c.array() + 0.01).matrix());
        auto iv = interval_propagate(net, dom);
        bool stable = true;
        for (std::size_t i = 1; i < net.depth(); ++i)
            stable = stable && (iv.pre_lower[i].array() >= 0.0 || iv.pre_upper[i].array() <= 0.0).all();
        if (!stable) continue;
        auto range = enumerate_network_extremes(net, dom, 0);
        for (Mode m : {Mode::Symbolic, Mode::MiniMIP, Mode::DeepMIP}) {
            auto r = compute_all_bounds(net, dom, config(m));
            CHECK(r.bounds.pre_upper[net.depth()](0) == doctest::Approx(range.max).epsilon(1e-8).scale(1.0));
            CHECK(r.bounds.pre_lower[net.depth()](0) == doctest::Approx(range.min).epsilon(1e-8).scale(1.0));
        }
        ++checked;
    }
    CHECK(checked == 20);
}

TEST_CASE("bounds do not depend on the worker count") {
    std::mt19937_64 rng(53);
    for (int it = 0; it < 10; ++it) {
        auto net = fixtures::random_network(rng, 4, 3, 6);
        auto dom = fixtures::random_box(rng, net.input_dim());
        auto one = config(Mode::DeepMIP);
        auto four = one;
        four.workers = 4;
        auto a = compute_all_bounds(net, dom, one).bounds;
        auto b = compute_all_bounds(net, dom, four).bounds;
        for (std::size_t i = 1; i <= net.depth(); ++i) {
            CHECK(a.pre_lower[i] == b.pre_lower[i]);
            CHECK(a.pre_upper[i] == b.pre_upper[i]);
        }
    }
}

TEST_CASE("raw modes without nesting stay sound") {
    std::mt19937_64 rng(59);
    for (int it = 0; it < 20; ++it) {
        auto net = fixtures::random_network(rng, 3, 3, 4);
        auto dom = fixtures::random_box(rng, net.input_dim());
        auto range = enumerate_network_extremes(net, dom, 0);
        for (Mode m : kModes) {
            auto cfg = config(m);
            cfg.nested = false;
            auto r = compute_all_bounds(net, dom, cfg);
            CHECK(r.bounds.pre_upper[net.depth()](0) >= range.max - 1e-8);
            CHECK(r.bounds.pre_lower[net.depth()](0) <= range.min + 1e-8);
        }
    }
}

TEST_CASE("objective bounds and the shallow-MIP concretization") {
    auto net = fixtures::fig1();
    auto cfg = config(Mode::DeepMIP);
    cfg.alpha = AlphaPolicy::uniform(net, 0.0);
    auto b = compute_all_bounds(net, fixtures::unit_box(3), cfg).bounds;
    auto obj = bound_objective(net, b, vec({1.0}), 0.0, cfg);
    CHECK(obj.upper <= 6.2 + 1e-9);
    CHECK(obj.upper >= 6.0 - 1e-9);
    cfg.concretization = Concretization::ShallowMip;
    auto deeper = bound_objective(net, b, vec({1.0}), 0.0, cfg);
    CHECK(deeper.upper <= obj.upper + 1e-9);
    CHECK(deeper.upper >= 6.0 - 1e-9);
    CHECK_THROWS_AS(bound_objective(net, b, vec({1.0, 2.0}), 0.0, cfg), ShapeError);
}

TEST_CASE("point domains give point bounds in every mode") {
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int it = 0; it < 50; ++it) {
        auto net = fixtures::random_network(rng, 6, 3, 8);
        Eigen::VectorXd x(Eigen::Index(net.input_dim()));
        for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = u(rng);
        const double y = forward_eval(net, x)(0);
        for (Mode m : kModes) {
            auto r = compute_all_bounds(net, BoxDomain(x, x), config(m));
            CHECK(r.bounds.pre_lower[net.depth()](0) == doctest::Approx(y).epsilon(1e-9).scale(1.0));
            CHECK(r.bounds.pre_upper[net.depth()](0) == doctest::Approx(y).epsilon(1e-9).scale(1.0));
        }
    }
}
