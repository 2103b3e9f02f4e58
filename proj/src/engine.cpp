#include "nnbound/engine.hpp"

#include <algorithm>
#include <limits>
#include <sstream>
#include <thread>

namespace nnbound {

const char* to_string(Mode mode) {
    switch (mode) {
        case Mode::Interval: return "interval";
        case Mode::Symbolic: return "symbolic";
        case Mode::MiniMIP: return "minimip";
        case Mode::DeepMIP: return "deepmip";
    }
    return "unknown";
}

Mode parse_mode(const std::string& name) {
    for (Mode m : {Mode::Interval, Mode::Symbolic, Mode::MiniMIP, Mode::DeepMIP})
        if (name == to_string(m)) return m;
    throw ConfigError("unknown mode '" + name + "'");
}

const char* to_string(Concretization c) { return c == Concretization::Box ? "box" : "mip"; }

std::string to_string(const AlphaPolicy& policy) {
    switch (policy.kind) {
        case AlphaPolicy::Kind::CrownHeuristic: return "crown";
        case AlphaPolicy::Kind::FixedZero: return "zero";
        case AlphaPolicy::Kind::FixedOne: return "one";
        case AlphaPolicy::Kind::Explicit: return "explicit";
    }
    return "unknown";
}

MipOptions EngineConfig::mip_options() const {
    MipOptions opt;
    opt.budget = mip_budget;
    opt.deadline = deadline;
    opt.relative_gap = tolerance;
    return opt;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double tighter(Side side, double a, double b) { return side == Side::Upper ? std::min(a, b) : std::max(a, b); }

void account(NeuronBound& out, const MipBound& m) {
    ++out.stats.solves;
    out.stats.nodes += m.nodes;
    if (m.exhausted) {
        ++out.stats.exhausted;
        out.fallback = true;
    }
}

}  // namespace

NeuronBound back_substitute(const SymbolicLinearForm& initial, const Network& net, const LayerBounds& bounds,
                            Side side, const EngineConfig& cfg) {
    NeuronBound out;
    out.value = side == Side::Upper ? kInf : -kInf;
    const MipOptions mip = cfg.mip_options();
    const bool use_mip = cfg.mode == Mode::MiniMIP || cfg.mode == Mode::DeepMIP;
    // Sum of certified error extrema of the steps taken so far.
    double correction = 0.0;
    SymbolicLinearForm form = initial;
    for (;;) {
        const std::size_t p = form.layer_index;
        double cand = concretize_box(form, bounds.post_lower[p], bounds.post_upper[p], side) - correction;
        out.value = tighter(side, out.value, cand);
        if (p == 0 || cfg.mode == Mode::Interval) break;

        if (use_mip && p == 1) {
            BoxDomain dom(bounds.post_lower[0], bounds.post_upper[0]);
            auto m = direct_first_layer_bound(form, net, dom, side, mip);
            account(out, m);
            out.value = tighter(side, out.value, m.value - correction);
        } else if (cfg.mode == Mode::DeepMIP && cfg.concretization == Concretization::ShallowMip) {
            auto m = concretize_partial_mip(form, net, bounds, side, mip);
            account(out, m);
            out.value = tighter(side, out.value, m.value - correction);
        }

        auto step = substitute_with_relaxation(form, net, bounds, cfg.alpha, side);
        if (cfg.mode == Mode::DeepMIP) {
            auto term = assemble_error_term(form, step, net, bounds, side);
            auto m = minimize_error(term, mip);
            account(out, m);
            correction += m.value;
        }
        form = std::move(step.form);
    }
    return out;
}

NeuronBound back_substitute_neuron(const Network& net, const LayerBounds& bounds, std::size_t i, std::size_t j,
                                   Side side, const EngineConfig& cfg) {
    return back_substitute(neuron_form(net, i, j), net, bounds, side, cfg);
}

std::optional<Mode> cheaper_mode(Mode mode) {
    switch (mode) {
        case Mode::Interval: return std::nullopt;
        case Mode::Symbolic: return Mode::Interval;
        case Mode::MiniMIP: return Mode::Symbolic;
        case Mode::DeepMIP: return Mode::MiniMIP;
    }
    return std::nullopt;
}

BoundReport compute_all_bounds(const Network& net, const BoxDomain& dom, const EngineConfig& cfg,
                               const LayerBounds* floor) {
    BoundReport report;
    if (cfg.mode == Mode::Interval) {
        report.bounds = interval_propagate(net, dom);
        return report;
    }
    if (std::size_t(dom.size()) != net.input_dim())
        throw ShapeError(0, "domain has dimension " + std::to_string(dom.size()) + ", expected " +
                                std::to_string(net.input_dim()));
    BoundReport cheaper;
    if (!floor && cfg.nested) {
        EngineConfig sub = cfg;
        sub.mode = *cheaper_mode(cfg.mode);
        cheaper = compute_all_bounds(net, dom, sub);
        report.stats = cheaper.stats;
        report.fallbacks = cheaper.fallbacks;
        floor = &cheaper.bounds;
    }
    report.bounds.push_input(dom);
    for (std::size_t i = 1; i <= net.depth(); ++i) {
        const std::size_t width = net.width(i);
        std::vector<NeuronBound> lower(width), upper(width);
        auto work = [&](std::size_t begin, std::size_t stride) {
            for (std::size_t j = begin; j < width; j += stride) {
                lower[j] = back_substitute_neuron(net, report.bounds, i, j, Side::Lower, cfg);
                upper[j] = back_substitute_neuron(net, report.bounds, i, j, Side::Upper, cfg);
            }
        };
        const std::size_t workers = std::max<std::size_t>(1, std::min(cfg.workers, width));
        if (workers == 1) {
            work(0, 1);
        } else {
            std::vector<std::thread> pool;
            for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
            for (auto& t : pool) t.join();
        }
        Eigen::VectorXd lo = Eigen::VectorXd::Zero(Eigen::Index(width)), hi = Eigen::VectorXd::Zero(Eigen::Index(width));
        for (std::size_t j = 0; j < width; ++j) {
            double l = lower[j].value, u = upper[j].value;
            // Both are valid up to rounding; an inversion can only be rounding noise.
            if (l > u) std::swap(l, u);
            if (floor) {
                l = std::max(l, floor->pre_lower[i](Eigen::Index(j)));
                u = std::min(u, floor->pre_upper[i](Eigen::Index(j)));
                // Two sound intervals around a point can cross by rounding.
                if (l > u) std::swap(l, u);
            }
            lo(Eigen::Index(j)) = l;
            hi(Eigen::Index(j)) = u;
            report.stats += lower[j].stats;
            report.stats += upper[j].stats;
            if (lower[j].fallback) report.fallbacks.push_back({i, j, Side::Lower});
            if (upper[j].fallback) report.fallbacks.push_back({i, j, Side::Upper});
        }
        report.bounds.push_layer(std::move(lo), std::move(hi), net.layer(i - 1).activation);
    }
    return report;
}

SymbolicLinearForm objective_form(const Network& net, const Eigen::VectorXd& coeffs, double constant) {
    if (std::size_t(coeffs.size()) != net.output_dim())
        throw ShapeError(net.depth() - 1, "objective has " + std::to_string(coeffs.size()) +
                                              " coefficients, network has " + std::to_string(net.output_dim()) +
                                              " outputs");
    const std::size_t k = net.depth();
    SymbolicLinearForm form;
    form.layer_index = k - 1;
    form.coeffs = (coeffs.transpose() * net.weights_into(k)).transpose();
    form.constant = coeffs.dot(net.bias_into(k)) + constant;
    return form;
}

ObjectiveBounds bound_objective(const Network& net, const LayerBounds& bounds, const Eigen::VectorXd& coeffs,
                                double constant, const EngineConfig& cfg) {
    const auto form = objective_form(net, coeffs, constant);
    ObjectiveBounds out;
    auto lo = back_substitute(form, net, bounds, Side::Lower, cfg);
    auto hi = back_substitute(form, net, bounds, Side::Upper, cfg);
    out.lower = lo.value;
    out.upper = hi.value;
    out.stats += lo.stats;
    out.stats += hi.stats;
    out.fallback = lo.fallback || hi.fallback;
    return out;
}

BackSubstitutionTrace trace_back_substitution(const SymbolicLinearForm& form, const Network& net,
                                              const LayerBounds& bounds, const AlphaPolicy& policy, Side side) {
    BackSubstitutionTrace trace;
    trace.forms.push_back(form);
    while (trace.forms.back().layer_index > 0) {
        const auto& current = trace.forms.back();
        auto step = substitute_with_relaxation(current, net, bounds, policy, side);
        trace.errors.push_back(assemble_error_term(current, step, net, bounds, side));
        trace.forms.push_back(std::move(step.form));
    }
    return trace;
}

}  // namespace nnbound
