#include "nnbound/verifier.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "nnbound/json_io.hpp"
#include "nnbound/oracle.hpp"

namespace nnbound {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(what + ": " + e.what());
    } catch (const json::out_of_range& e) {
        throw ValueError(what + ": non-finite number: " + e.what());
    }
}

std::optional<Eigen::VectorXd> optional_vector(const json& j, const char* key) {
    if (!j.contains(key)) return std::nullopt;
    return json_vector(j.at(key), key);
}

void check_width(const Eigen::VectorXd& v, std::size_t n, const std::string& what) {
    if (std::size_t(v.size()) != n)
        throw ParseError(what + " has " + std::to_string(v.size()) + " entries, expected " + std::to_string(n));
}

}  // namespace

BoxDomain robustness_box(const Eigen::VectorXd& center, double epsilon, const std::optional<Eigen::VectorXd>& valid_lower,
                         const std::optional<Eigen::VectorXd>& valid_upper) {
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ValueError("epsilon must be a finite value >= 0");
    Eigen::VectorXd lo = (center.array() - epsilon).matrix();
    Eigen::VectorXd hi = (center.array() + epsilon).matrix();
    if (valid_lower) {
        check_width(*valid_lower, std::size_t(center.size()), "valid_lower");
        lo = lo.cwiseMax(*valid_lower);
        hi = hi.cwiseMax(*valid_lower);
    }
    if (valid_upper) {
        check_width(*valid_upper, std::size_t(center.size()), "valid_upper");
        hi = hi.cwiseMin(*valid_upper);
        lo = lo.cwiseMin(*valid_upper);
    }
    return BoxDomain(lo, hi);
}

Query load_query(const std::string& text, const Network& net) {
    const json doc = parse_json(text, "query file");
    if (!doc.is_object() || !doc.contains("domain")) throw ParseError("query file needs a 'domain' object");
    const json& d = doc.at("domain");
    Query q{BoxDomain(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1)), {}, 0.0, std::nullopt};
    if (d.contains("lower") || d.contains("upper")) {
        if (!d.contains("lower") || !d.contains("upper")) throw ParseError("domain needs both 'lower' and 'upper'");
        auto lo = json_vector(d.at("lower"), "domain.lower");
        auto hi = json_vector(d.at("upper"), "domain.upper");
        check_width(lo, net.input_dim(), "domain.lower");
        check_width(hi, net.input_dim(), "domain.upper");
        q.domain = BoxDomain(lo, hi);
    } else if (d.contains("center")) {
        auto c = json_vector(d.at("center"), "domain.center");
        check_width(c, net.input_dim(), "domain.center");
        if (!d.contains("epsilon")) throw ParseError("robustness domain needs 'epsilon'");
        q.domain = robustness_box(c, json_number(d.at("epsilon"), "domain.epsilon"), optional_vector(d, "valid_lower"),
                                  optional_vector(d, "valid_upper"));
    } else {
        throw ParseError("domain must give 'lower'/'upper' or 'center'/'epsilon'");
    }

    if (doc.contains("objective")) {
        const json& o = doc.at("objective");
        if (!o.contains("coeffs")) throw ParseError("objective needs 'coeffs'");
        q.coeffs = json_vector(o.at("coeffs"), "objective.coeffs");
        check_width(q.coeffs, net.output_dim(), "objective.coeffs");
        if (o.contains("constant")) q.constant = json_number(o.at("constant"), "objective.constant");
    } else {
        if (net.output_dim() != 1) throw ParseError("objective is required for a network with several outputs");
        q.coeffs = Eigen::VectorXd::Ones(1);
    }

    if (doc.contains("property") && !doc.at("property").is_null()) {
        const json& p = doc.at("property");
        if (!p.contains("kind") || !p.at("kind").is_string() || !p.contains("threshold"))
            throw ParseError("property needs a string 'kind' and a 'threshold'");
        const auto kind = p.at("kind").get<std::string>();
        Property prop;
        if (kind == "max_leq") prop.kind = PropertyKind::MaxLeq;
        else if (kind == "min_geq") prop.kind = PropertyKind::MinGeq;
        else throw ParseError("unknown property kind '" + kind + "'");
        prop.threshold = json_number(p.at("threshold"), "property.threshold");
        q.property = prop;
    }
    return q;
}

Query load_query_file(const std::string& path, const Network& net) { return load_query(read_text_file(path), net); }

const char* to_string(Verdict v) { return v == Verdict::Holds ? "holds" : "unknown"; }

namespace {

std::optional<Verdict> decide(const std::optional<Property>& p, double lower, double upper) {
    if (!p) return std::nullopt;
    bool holds = p->kind == PropertyKind::MaxLeq ? upper <= p->threshold : lower >= p->threshold;
    return holds ? Verdict::Holds : Verdict::Unknown;
}

}  // namespace

StageResult run_stage(const Network& net, const Query& query, const EngineConfig& cfg, const StageResult* floor) {
    StageResult st;
    st.mode = cfg.mode;
    auto t0 = Clock::now();
    auto rep = compute_all_bounds(net, query.domain, cfg, floor && cfg.nested ? &floor->bounds : nullptr);
    st.bounds_seconds = seconds_since(t0);
    st.bounds = std::move(rep.bounds);
    st.stats = rep.stats;
    st.fallbacks = std::move(rep.fallbacks);

    t0 = Clock::now();
    auto obj = bound_objective(net, st.bounds, query.coeffs, query.constant, cfg);
    st.objective_seconds = seconds_since(t0);
    st.lower = obj.lower;
    st.upper = obj.upper;
    if (floor && cfg.nested) {
        st.lower = std::max(st.lower, floor->lower);
        st.upper = std::min(st.upper, floor->upper);
        if (st.lower > st.upper) std::swap(st.lower, st.upper);
    }
    st.stats += obj.stats;
    if (obj.fallback) st.fallbacks.push_back({net.depth(), 0, Side::Upper});
    st.verdict = decide(query.property, st.lower, st.upper);
    return st;
}

Report run_query(const Network& net, const Query& query, const EngineConfig& cfg, const RunOptions& options) {
    Report report;
    report.config = cfg;
    report.options = options;
    report.query = query;
    const auto t0 = Clock::now();

    std::vector<Mode> chain;
    if (options.kind == RunKind::Single && !cfg.nested) {
        chain = {cfg.mode};
    } else {
        const Mode last = options.kind == RunKind::Single ? cfg.mode : Mode::DeepMIP;
        for (Mode m : {Mode::Interval, Mode::Symbolic, Mode::MiniMIP, Mode::DeepMIP}) {
            chain.push_back(m);
            if (m == last) break;
        }
    }
    for (Mode m : chain) {
        EngineConfig stage_cfg = cfg;
        stage_cfg.mode = m;
        const StageResult* floor = report.stages.empty() ? nullptr : &report.stages.back();
        report.stages.push_back(run_stage(net, query, stage_cfg, floor));
        const auto& st = report.stages.back();
        if (options.kind == RunKind::Cascade && st.verdict == Verdict::Holds) {
            report.decided_by = m;
            break;
        }
    }

    const auto& last = report.stages.back();
    report.verdict = last.verdict.value_or(Verdict::Unknown);
    if (options.kind == RunKind::Compare) {
        // Best verdict over the compared modes; nesting makes it the last one.
        for (const auto& st : report.stages)
            if (st.verdict == Verdict::Holds && !report.decided_by) report.decided_by = st.mode;
        report.verdict = report.decided_by ? Verdict::Holds : Verdict::Unknown;
    } else if (options.kind == RunKind::Single && report.verdict == Verdict::Holds) {
        report.decided_by = cfg.mode;
    }

    if (query.property && report.verdict == Verdict::Unknown && options.samples > 0) {
        OutputObjective obj{query.coeffs, query.constant};
        auto s = sample_extremes(net, query.domain, obj, options.samples, options.seed);
        const auto& p = *query.property;
        if (p.kind == PropertyKind::MaxLeq && s.max_seen > p.threshold) report.witness = Witness{s.argmax, s.max_seen};
        if (p.kind == PropertyKind::MinGeq && s.min_seen < p.threshold) report.witness = Witness{s.argmin, s.min_seen};
    }
    report.total_seconds = seconds_since(t0);
    return report;
}

namespace {

json layers_json(const LayerBounds& b) {
    json layers = json::array();
    for (std::size_t i = 0; i < b.layer_count(); ++i)
        layers.push_back({{"layer", i},
                          {"pre_lower", to_json_array(b.pre_lower[i])},
                          {"pre_upper", to_json_array(b.pre_upper[i])},
                          {"post_lower", to_json_array(b.post_lower[i])},
                          {"post_upper", to_json_array(b.post_upper[i])}});
    return layers;
}

const char* run_kind_name(const Report& r) {
    switch (r.options.kind) {
        case RunKind::Single: return to_string(r.config.mode);
        case RunKind::Compare: return "compare";
        case RunKind::Cascade: return "cascade";
    }
    return "unknown";
}

}  // namespace

std::string render_report(const Report& r) {
    json doc;
    doc["tool"] = {{"name", "nnbound"}, {"version", kToolVersion}};
    doc["config"] = {{"mode", run_kind_name(r)},
                     {"alpha", to_string(r.config.alpha)},
                     {"mip_budget_ms", r.config.mip_budget.count()},
                     {"concretization", to_string(r.config.concretization)},
                     {"tolerance", r.config.tolerance},
                     {"nested", r.config.nested},
                     {"workers", r.config.workers},
                     {"samples", r.options.samples},
                     {"seed", r.options.seed}};
    json query = {{"domain", {{"lower", to_json_array(r.query.domain.lower)},
                              {"upper", to_json_array(r.query.domain.upper)}}},
                  {"objective", {{"coeffs", to_json_array(r.query.coeffs)}, {"constant", r.query.constant}}}};
    if (r.query.property)
        query["property"] = {{"kind", r.query.property->kind == PropertyKind::MaxLeq ? "max_leq" : "min_geq"},
                             {"threshold", r.query.property->threshold}};
    else
        query["property"] = nullptr;
    doc["query"] = query;

    json stages = json::array();
    json timing_stages = json::array();
    for (const auto& st : r.stages) {
        json fallbacks = json::array();
        for (const auto& f : st.fallbacks)
            fallbacks.push_back({{"layer", f.layer}, {"neuron", f.neuron}, {"side", to_string(f.side)}});
        json s = {{"mode", to_string(st.mode)},
                  {"lower", st.lower},
                  {"upper", st.upper},
                  {"verdict", st.verdict ? json(to_string(*st.verdict)) : json(nullptr)},
                  {"mip", {{"solves", st.stats.solves},
                           {"exhausted", st.stats.exhausted},
                           {"nodes", st.stats.nodes},
                           {"fallbacks", fallbacks}}}};
        if (r.options.include_layers) s["layers"] = layers_json(st.bounds);
        stages.push_back(std::move(s));
        timing_stages.push_back({{"mode", to_string(st.mode)},
                                 {"bounds_ms", 1e3 * st.bounds_seconds},
                                 {"objective_ms", 1e3 * st.objective_seconds}});
    }
    doc["stages"] = stages;
    doc["lower"] = r.final_stage().lower;
    doc["upper"] = r.final_stage().upper;
    doc["verdict"] = to_string(r.verdict);
    doc["decided_by"] = r.decided_by ? json(to_string(*r.decided_by)) : json(nullptr);
    doc["witness"] = r.witness ? json{{"point", to_json_array(r.witness->point)}, {"value", r.witness->value}}
                               : json(nullptr);
    doc["timing"] = {{"total_ms", 1e3 * r.total_seconds}, {"stages", timing_stages}};
    return doc.dump(2) + "\n";
}

std::string render_compare_table(const Report& r) {
    std::ostringstream os;
    os << std::left << std::setw(10) << "mode" << std::right << std::setw(16) << "lower" << std::setw(16) << "upper"
       << std::setw(10) << "verdict" << std::setw(12) << "time_ms" << std::setw(8) << "mips" << "\n";
    for (const auto& st : r.stages) {
        char lo[32], hi[32];
        std::snprintf(lo, sizeof lo, "%.9g", st.lower);
        std::snprintf(hi, sizeof hi, "%.9g", st.upper);
        char ms[32];
        std::snprintf(ms, sizeof ms, "%.2f", 1e3 * (st.bounds_seconds + st.objective_seconds));
        os << std::left << std::setw(10) << to_string(st.mode) << std::right << std::setw(16) << lo << std::setw(16)
           << hi << std::setw(10) << (st.verdict ? to_string(*st.verdict) : "-") << std::setw(12) << ms
           << std::setw(8) << st.stats.solves << "\n";
    }
    return os.str();
}

int exit_code(const Report& report) { return report.verdict == Verdict::Holds ? 0 : 1; }

Dataset load_dataset(const std::string& text) {
    const json doc = parse_json(text, "dataset file");
    if (!doc.is_object() || !doc.contains("points") || !doc.at("points").is_array())
        throw ParseError("dataset file needs a 'points' array");
    Dataset data;
    for (std::size_t i = 0; i < doc.at("points").size(); ++i) {
        const json& p = doc.at("points")[i];
        if (!p.is_object() || !p.contains("x") || !p.contains("label"))
            throw ParseError("dataset point " + std::to_string(i) + " needs 'x' and 'label'");
        if (!p.at("label").is_number_integer() || p.at("label").get<long long>() < 0)
            throw ParseError("dataset point " + std::to_string(i) + ": label must be a non-negative integer");
        data.points.push_back({json_vector(p.at("x"), "x"), p.at("label").get<std::size_t>()});
    }
    data.valid_lower = optional_vector(doc, "valid_lower");
    data.valid_upper = optional_vector(doc, "valid_upper");
    return data;
}

Dataset load_dataset_file(const std::string& path) { return load_dataset(read_text_file(path)); }

SuiteSummary run_robustness_suite(const Network& net, const Dataset& data, double epsilon, const EngineConfig& cfg,
                                  const SuiteOptions& options) {
    if (net.output_dim() < 2) throw ShapeError(net.depth() - 1, "robustness suite needs a network with several outputs");
    if (options.modes.empty()) throw ConfigError("suite needs at least one mode");
    SuiteSummary summary;
    summary.epsilon = epsilon;
    summary.points = data.points.size();
    summary.details.resize(data.points.size());
    const Mode deepest = *std::max_element(options.modes.begin(), options.modes.end());

    auto evaluate = [&](std::size_t idx) {
        const auto& pt = data.points[idx];
        SuitePointResult res;
        res.index = idx;
        check_width(pt.x, net.input_dim(), "dataset point " + std::to_string(idx));
        Eigen::VectorXd out = forward_eval(net, pt.x);
        Eigen::Index predicted = 0;
        out.maxCoeff(&predicted);
        if (pt.label >= net.output_dim() || std::size_t(predicted) != pt.label) {
            res.skipped = true;
            return res;
        }
        BoxDomain dom = robustness_box(pt.x, epsilon, data.valid_lower, data.valid_upper);
        std::vector<Query> queries;
        for (std::size_t other = 0; other < net.output_dim(); ++other) {
            if (other == pt.label) continue;
            Query q{dom, Eigen::VectorXd::Zero(Eigen::Index(net.output_dim())), 0.0,
                    Property{PropertyKind::MinGeq, 0.0}};
            q.coeffs(Eigen::Index(pt.label)) = 1.0;
            q.coeffs(Eigen::Index(other)) = -1.0;
            queries.push_back(std::move(q));
        }
        // Stages share layer bounds across competing labels; each mode's
        // time is the cumulative time of the nested chain up to it.
        std::vector<std::pair<Mode, std::pair<bool, double>>> per_mode;
        std::vector<StageResult> floors(queries.size());
        double cumulative = 0.0;
        std::optional<LayerBounds> floor_bounds;
        for (Mode m : {Mode::Interval, Mode::Symbolic, Mode::MiniMIP, Mode::DeepMIP}) {
            EngineConfig stage_cfg = cfg;
            stage_cfg.mode = m;
            if (options.timeout) stage_cfg.deadline = Clock::now() + *options.timeout;
            auto t0 = Clock::now();
            auto rep = compute_all_bounds(net, dom, stage_cfg, floor_bounds && cfg.nested ? &*floor_bounds : nullptr);
            bool all_hold = true;
            for (std::size_t qi = 0; qi < queries.size(); ++qi) {
                auto obj = bound_objective(net, rep.bounds, queries[qi].coeffs, 0.0, stage_cfg);
                double lower = obj.lower;
                if (m != Mode::Interval && cfg.nested) lower = std::max(lower, floors[qi].lower);
                floors[qi].lower = lower;
                if (!(lower >= 0.0)) all_hold = false;
            }
            cumulative += seconds_since(t0);
            bool timed_out = stage_cfg.deadline && Clock::now() > *stage_cfg.deadline;
            per_mode.push_back({m, {all_hold, timed_out ? -cumulative : cumulative}});
            floor_bounds = std::move(rep.bounds);
            if (m == deepest) break;
        }
        for (Mode m : options.modes) {
            for (const auto& [pm, r] : per_mode) {
                if (pm != m) continue;
                res.solved.push_back(r.first);
                res.seconds.push_back(r.second);
            }
        }
        return res;
    };

    const std::size_t workers = std::max<std::size_t>(1, std::min(options.workers, data.points.size()));
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= data.points.size()) return;
            try {
                summary.details[i] = evaluate(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);

    for (std::size_t k = 0; k < options.modes.size(); ++k) {
        SuiteModeSummary ms;
        ms.mode = options.modes[k];
        double total = 0.0;
        std::size_t evaluated = 0;
        for (const auto& d : summary.details) {
            if (d.skipped) continue;
            ++evaluated;
            if (d.solved[k]) ++ms.solved;
            double s = d.seconds[k];
            if (s < 0.0) {
                ++ms.timeouts;
                s = -s;
            }
            total += s;
        }
        ms.mean_seconds = evaluated ? total / double(evaluated) : 0.0;
        summary.modes.push_back(ms);
    }
    for (const auto& d : summary.details) {
        if (!d.skipped) continue;
        ++summary.skipped;
        summary.notes.push_back("point " + std::to_string(d.index) + " skipped: misclassified");
    }
    return summary;
}

std::string render_suite_table(const SuiteSummary& s) {
    std::ostringstream os;
    os << "epsilon " << s.epsilon << ": " << s.points << " points, " << s.skipped << " skipped (misclassified)\n";
    os << std::left << std::setw(10) << "mode" << std::right << std::setw(8) << "solved" << std::setw(14)
       << "mean_time_s" << std::setw(10) << "timeouts" << "\n";
    for (const auto& m : s.modes) {
        char t[32];
        std::snprintf(t, sizeof t, "%.4f", m.mean_seconds);
        os << std::left << std::setw(10) << to_string(m.mode) << std::right << std::setw(8) << m.solved
           << std::setw(14) << t << std::setw(10) << m.timeouts << "\n";
    }
    return os.str();
}

std::string render_suite_json(const SuiteSummary& s) {
    json modes = json::array();
    for (const auto& m : s.modes)
        modes.push_back({{"mode", to_string(m.mode)}, {"solved", m.solved}, {"timeouts", m.timeouts}});
    json timing = json::array();
    for (const auto& m : s.modes) timing.push_back({{"mode", to_string(m.mode)}, {"mean_s", m.mean_seconds}});
    json doc = {{"tool", {{"name", "nnbound"}, {"version", kToolVersion}}},
                {"epsilon", s.epsilon},
                {"points", s.points},
                {"skipped", s.skipped},
                {"modes", modes},
                {"notes", s.notes},
                {"timing", timing}};
    return doc.dump(2) + "\n";
}

}  // namespace nnbound
