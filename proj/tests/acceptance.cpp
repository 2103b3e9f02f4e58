// Prints one PASS/FAIL line per acceptance criterion. Exit status is the
// number of failed criteria not named in --allow-fail.
//
// Usage: nnbound_acceptance [--allow-fail N[,N...]] [path-to-nnbound-cli]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "nnbound/engine.hpp"
#include "nnbound/lp_format.hpp"
#include "nnbound/oracle.hpp"
#include "nnbound/verifier.hpp"

using namespace nnbound;
using fixtures::vec;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    void expect(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << "    mismatch: " << what << "\n";
        }
    }
};

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

std::string interval(double l, double u) {
    std::ostringstream s;
    s << "[" << l << "," << u << "]";
    return s.str();
}

EngineConfig fig1_config(Mode m) {
    EngineConfig cfg;
    cfg.mode = m;
    cfg.alpha = AlphaPolicy::uniform(fixtures::fig1(), 0.0);
    cfg.mip_budget = std::chrono::milliseconds(10000);
    return cfg;
}

EngineConfig sweep_config(Mode m) {
    EngineConfig cfg;
    cfg.mode = m;
    cfg.mip_budget = std::chrono::milliseconds(10000);
    return cfg;
}

void check_layer(Outcome& o, const char* what, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                 std::initializer_list<std::pair<double, double>> want) {
    Eigen::Index j = 0;
    for (auto [l, u] : want) {
        std::ostringstream s;
        s << what << "_" << j << " = " << interval(lo(j), hi(j)) << ", expected " << interval(l, u);
        o.expect(near(lo(j), l, 1e-6) && near(hi(j), u, 1e-6), s.str());
        ++j;
    }
}

Outcome criterion1() {
    Outcome o;
    auto net = fixtures::fig1();
    auto dom = fixtures::unit_box(3);
    auto iv = compute_all_bounds(net, dom, fig1_config(Mode::Interval)).bounds;
    check_layer(o, "interval x^1", iv.pre_lower[1], iv.pre_upper[1], {{-2, 2}, {-2, 2}, {-1, 1}});
    check_layer(o, "interval x^2", iv.pre_lower[2], iv.pre_upper[2], {{0, 4}, {-2, 4}, {-4, 2}});

    auto sym = compute_all_bounds(net, dom, fig1_config(Mode::Symbolic)).bounds;
    check_layer(o, "symbolic x^2", sym.pre_lower[2], sym.pre_upper[2], {{0, 3}, {-2, 3}, {-3, 2}});
    auto out = [&](Mode m) { return compute_all_bounds(net, dom, fig1_config(m)).bounds.pre_upper[3](0); };
    auto report = [&](const char* name, double got, double want) {
        std::ostringstream s;
        s << name << " output upper = " << got << ", expected " << want;
        o.expect(near(got, want, 1e-6), s.str());
    };
    report("symbolic", out(Mode::Symbolic), 6.6);
    report("minimip", out(Mode::MiniMIP), 6.4);
    auto trace = trace_back_substitution(neuron_form(net, 3, 0), net, sym, fig1_config(Mode::DeepMIP).alpha,
                                         Side::Upper);
    report("deepmip min(E^2_U)", minimize_error(trace.errors.at(0), fig1_config(Mode::DeepMIP).mip_options()).value,
           0.4);
    report("deepmip", out(Mode::DeepMIP), 6.0);
    auto range = enumerate_network_extremes(net, dom, 0);
    o.detail << "    exact output range (oracle): " << interval(range.min, range.max) << "\n";
    return o;
}

Outcome criterion2() {
    Outcome o;
    auto p = fixtures::detached_fixture();
    double mip = solve_shallow(p).certified_bound, en = enumerate_shallow(p);
    o.detail << "    solve_shallow " << mip << ", enumerate_shallow " << en << "\n";
    o.expect(near(mip, 1.0, 1e-8), "solve_shallow");
    o.expect(near(en, 1.0, 1e-8), "enumerate_shallow");
    return o;
}

Outcome criterion3() {
    Outcome o;
    std::mt19937_64 rng(3);
    double worst = 0.0;
    std::size_t max_terms = 0, optimal = 0;
    for (int it = 0; it < 300; ++it) {
        auto p = fixtures::random_shallow(rng, 6, 12);
        max_terms = std::max(max_terms, p.terms.size());
        MipOptions opt;
        opt.budget = std::chrono::milliseconds(60000);
        auto r = solve_shallow(p, opt);
        if (r.status != OptStatus::Optimal) {
            o.expect(false, "instance " + std::to_string(it) + " not solved to optimality");
            continue;
        }
        ++optimal;
        double err = std::abs(r.certified_bound - enumerate_shallow(p));
        worst = std::max(worst, err);
        if (err > 1e-8) o.expect(false, "instance " + std::to_string(it) + " differs by " + std::to_string(err));
    }
    o.detail << "    " << optimal << "/300 optimal, worst |mip - oracle| = " << worst << ", up to " << max_terms
             << " terms\n";
    return o;
}

struct Instance {
    Network net;
    BoxDomain dom;
};

std::vector<Instance> sweep_instances() {
    std::mt19937_64 rng(4);
    std::vector<Instance> out;
    for (int it = 0; it < 200; ++it) {
        auto net = fixtures::random_network(rng, 4, 3, 6);
        auto dom = fixtures::random_box(rng, net.input_dim());
        out.push_back({std::move(net), std::move(dom)});
    }
    return out;
}

constexpr Mode kModes[] = {Mode::Interval, Mode::Symbolic, Mode::MiniMIP, Mode::DeepMIP};

Outcome criterion4(const std::vector<Instance>& suite, std::vector<std::vector<LayerBounds>>& all) {
    Outcome o;
    double worst = 1e300;
    double tightness[4] = {0, 0, 0, 0};
    for (std::size_t k = 0; k < suite.size(); ++k) {
        const auto& [net, dom] = suite[k];
        auto range = enumerate_network_extremes(net, dom, 0);
        std::vector<LayerBounds> per_mode;
        for (std::size_t m = 0; m < 4; ++m) {
            auto b = compute_all_bounds(net, dom, sweep_config(kModes[m])).bounds;
            double lo = b.pre_lower[net.depth()](0), hi = b.pre_upper[net.depth()](0);
            double slack = std::min(range.min - lo, hi - range.max);
            worst = std::min(worst, slack);
            tightness[m] += hi - lo;
            if (slack < -1e-7)
                o.expect(false, std::string(to_string(kModes[m])) + " on network " + std::to_string(k) +
                                    " misses the range by " + std::to_string(-slack));
            per_mode.push_back(std::move(b));
        }
        all.push_back(std::move(per_mode));
    }
    o.detail << "    worst slack " << worst << "; mean output width";
    for (std::size_t m = 0; m < 4; ++m) o.detail << " " << to_string(kModes[m]) << " " << tightness[m] / 200.0;
    o.detail << "\n";
    return o;
}

Outcome criterion5(const std::vector<Instance>& suite, const std::vector<std::vector<LayerBounds>>& all) {
    Outcome o;
    std::size_t pairs = 0, violations = 0;
    for (std::size_t k = 0; k < suite.size(); ++k)
        for (std::size_t m = 1; m < 4; ++m)
            for (std::size_t i = 1; i <= suite[k].net.depth(); ++i)
                for (Eigen::Index j = 0; j < all[k][m].pre_upper[i].size(); ++j) {
                    ++pairs;
                    bool ok = all[k][m].pre_upper[i](j) <= all[k][m - 1].pre_upper[i](j) + 1e-9 &&
                              all[k][m].pre_lower[i](j) >= all[k][m - 1].pre_lower[i](j) - 1e-9;
                    if (!ok) ++violations;
                }
    o.detail << "    " << violations << " violations over " << pairs << " neuron/mode pairs\n";
    o.expect(violations == 0, "ordering violated");
    return o;
}

Outcome criterion6() {
    Outcome o;
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int it = 0; it < 50; ++it) {
        auto net = fixtures::random_network(rng, 4, 3, 5);
        auto dom = fixtures::random_box(rng, net.input_dim());
        auto b = compute_all_bounds(net, dom, sweep_config(Mode::Symbolic)).bounds;
        for (Side side : {Side::Upper, Side::Lower}) {
            auto form = objective_form(net, vec({1.0}), 0.0);
            auto tr = trace_back_substitution(form, net, b, AlphaPolicy::crown(), side);
            for (int s = 0; s < 200; ++s) {
                Eigen::VectorXd x(dom.size());
                for (Eigen::Index i = 0; i < x.size(); ++i)
                    x(i) = dom.lower(i) + (dom.upper(i) - dom.lower(i)) * u(rng);
                auto ft = forward_trace(net, x);
                double gap = tr.forms.back().evaluate(x) - form.evaluate(ft.post[form.layer_index]);
                double sum = 0.0;
                for (const auto& e : tr.errors) sum += e.evaluate(ft.post[e.layer_index - 1]);
                worst = std::max(worst, std::abs(gap - sum));
            }
        }
    }
    o.detail << "    worst |(relaxed - true) - sum E| = " << worst << "\n";
    o.expect(worst <= 1e-8, "identity violated");
    return o;
}

Outcome criterion7() {
    Outcome o;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> mag(1e-3, 10.0), unit(0.0, 1.0);
    double worst_valid = 0.0, worst_touch = 0.0;
    for (int it = 0; it < 10000; ++it) {
        double l = -mag(rng), u = mag(rng), alpha = unit(rng);
        auto chord = relaxation_entry(l, u, alpha, true, Side::Upper);
        auto edge = relaxation_entry(l, u, alpha, true, Side::Lower);
        for (int k = 0; k < 20; ++k) {
            double t = l + (u - l) * unit(rng), r = std::max(t, 0.0);
            worst_valid = std::max(worst_valid, r - (chord.slope * t + chord.intercept));
            worst_valid = std::max(worst_valid, (edge.slope * t + edge.intercept) - r);
        }
        worst_touch = std::max(worst_touch, std::abs(chord.slope * l + chord.intercept));
        worst_touch = std::max(worst_touch, std::abs(chord.slope * u + chord.intercept - u));
        worst_touch = std::max(worst_touch, std::abs(edge.intercept));
        worst_touch = std::max(worst_touch, std::abs(edge.slope - alpha));
    }
    o.detail << "    worst validity excess " << worst_valid << ", worst touch-point error " << worst_touch << "\n";
    o.expect(worst_valid <= 1e-9, "edge crosses ReLU");
    o.expect(worst_touch <= 1e-9, "edge misses a touch point");
    return o;
}

Outcome criterion8() {
    Outcome o;
    auto net = load_network_file(NNBOUND_DATA_DIR "/toy_net.json");
    auto data = load_dataset_file(NNBOUND_DATA_DIR "/toy_points.json");
    EngineConfig cfg;
    cfg.mip_budget = std::chrono::milliseconds(500);
    SuiteOptions opt;
    opt.workers = 4;
    const double eps = 0.1;
    auto s = run_robustness_suite(net, data, eps, cfg, opt);
    o.detail << "    epsilon " << eps << ", " << s.points - s.skipped << " points evaluated\n";
    for (const auto& m : s.modes)
        o.detail << "    " << to_string(m.mode) << ": solved " << m.solved << ", mean " << m.mean_seconds * 1e3
                 << " ms\n";
    const auto& m = s.modes;
    o.expect(m[3].solved >= m[2].solved && m[2].solved >= m[1].solved && m[1].solved >= m[0].solved,
             "solved counts out of order");
    o.expect(m[0].mean_seconds < m[1].mean_seconds && m[1].mean_seconds < m[2].mean_seconds &&
                 m[2].mean_seconds <= m[3].mean_seconds,
             "mean times out of order");
    return o;
}

Outcome criterion9(const char* cli) {
    Outcome o;
    struct Case {
        const char* name;
        ShallowReluProblem problem;
        double want;
    };
    for (const auto& c : {Case{"E^2_U", fixtures::layer2_error_fixture(), 0.4},
                          Case{"E_total", fixtures::detached_fixture(), 1.0}}) {
        auto model = parse_lp_text(export_lp_text(c.problem));
        auto v = solve_milp_by_enumeration(model);
        o.detail << "    " << c.name << ": re-parsed, " << model.binaries.size() << " binaries, " << model.rows.size()
                 << " rows, optimum " << (v ? *v : NAN) << "\n";
        o.expect(v && near(*v, c.want, 1e-8), std::string(c.name) + " optimum");
    }
    if (cli) {
        std::string cmd = std::string("python3 ") + NNBOUND_TOOLS_DIR + "/check_lp_external.py " + cli + " " +
                          NNBOUND_DATA_DIR + " 2>&1";
        std::FILE* pipe = popen(cmd.c_str(), "r");
        std::string out;
        char buf[256];
        while (pipe && std::fgets(buf, sizeof buf, pipe)) out += buf;
        int status = pipe ? pclose(pipe) : -1;
        int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        std::istringstream lines(out);
        for (std::string line; std::getline(lines, line);) o.detail << "    external: " << line << "\n";
        if (code != 77) o.expect(code == 0, "external solver disagrees");
    } else {
        o.detail << "    external solver step skipped (no CLI path given)\n";
    }
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    const char* cli = nullptr;
    std::set<int> allowed;
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg == "--allow-fail" && i + 1 < argc) {
            std::istringstream list(argv[++i]);
            for (std::string id; std::getline(list, id, ',');) allowed.insert(std::stoi(id));
        } else {
            cli = argv[i];
        }
    }
    int failed = 0, blocking = 0;
    auto run = [&](int id, const std::function<Outcome()>& f) {
        auto t0 = Clock::now();
        Outcome o = f();
        double s = std::chrono::duration<double>(Clock::now() - t0).count();
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << s << " s)\n" << o.detail.str();
        std::cout.flush();
        if (!o.pass) {
            ++failed;
            if (!allowed.count(id)) ++blocking;
        }
    };
    run(1, criterion1);
    run(2, criterion2);
    run(3, criterion3);
    auto suite = sweep_instances();
    std::vector<std::vector<LayerBounds>> all;
    run(4, [&] { return criterion4(suite, all); });
    run(5, [&] { return criterion5(suite, all); });
    run(6, criterion6);
    run(7, criterion7);
    run(8, criterion8);
    run(9, [&] { return criterion9(cli); });
    std::cout << (9 - failed) << "/9 criteria pass\n";
    return blocking;
}
