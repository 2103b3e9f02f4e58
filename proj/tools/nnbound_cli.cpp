// Command-line front end: verify, suite, export-mip and a hidden oracle command.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "nnbound/engine.hpp"
#include "nnbound/json_io.hpp"
#include "nnbound/lp_format.hpp"
#include "nnbound/oracle.hpp"
#include "nnbound/verifier.hpp"

using namespace nnbound;

namespace {

constexpr int kInputError = 2;
constexpr int kInternalError = 3;

struct CommonFlags {
    std::string network;
    std::string mode = "symbolic";
    std::string alpha = "crown";
    std::optional<long long> mip_budget_ms;
    std::string concretization = "box";
    double tolerance = 1e-8;
    std::size_t workers = 1;
    bool no_nested = false;
    std::optional<long long> timeout_ms;
};

void add_engine_flags(CLI::App* cmd, CommonFlags& f, bool with_mode) {
    cmd->add_option("--network", f.network, "network file")->required();
    if (with_mode)
        cmd->add_option("--mode", f.mode, "interval|symbolic|minimip|deepmip (verify also accepts cascade)");
    cmd->add_option("--alpha", f.alpha, "crown|zero|one|file:PATH");
    cmd->add_option("--mip-budget-ms", f.mip_budget_ms, "time budget per MIP solve (ms)");
    cmd->add_option("--concretization", f.concretization, "box|mip");
    cmd->add_option("--tolerance", f.tolerance, "relative MIP optimality gap");
    cmd->add_option("--workers", f.workers, "worker threads");
    cmd->add_flag("--no-nested", f.no_nested, "do not intersect a mode's bounds with the cheaper mode's");
    cmd->add_option("--timeout-ms", f.timeout_ms, "per-query wall-clock limit (ms)");
}

AlphaPolicy parse_alpha(const std::string& spec) {
    if (spec == "crown") return AlphaPolicy::crown();
    if (spec == "zero") return AlphaPolicy::zero();
    if (spec == "one") return AlphaPolicy::one();
    if (spec.rfind("file:", 0) == 0) {
        // {"1": [a, b, ...], "2": [...]}: per hidden neuron layer.
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(read_text_file(spec.substr(5)));
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(std::string("alpha file: ") + e.what());
        }
        if (!doc.is_object()) throw ParseError("alpha file must map layer indices to arrays");
        std::map<std::size_t, std::vector<double>> values;
        for (const auto& [key, row] : doc.items()) {
            std::size_t layer = 0;
            try {
                layer = std::stoul(key);
            } catch (const std::exception&) {
                throw ParseError("alpha file: layer key '" + key + "' is not an integer");
            }
            auto v = json_vector(row, "alpha layer " + key);
            values[layer] = std::vector<double>(v.data(), v.data() + v.size());
        }
        return AlphaPolicy::explicit_values(std::move(values));
    }
    throw ConfigError("unknown alpha policy '" + spec + "'");
}

/** Flags, then the environment, then built-in defaults. */
std::chrono::milliseconds resolve_budget(const std::optional<long long>& flag) {
    long long ms = 500;
    if (const char* env = std::getenv("NNBOUND_MIP_BUDGET_MS")) {
        try {
            ms = std::stoll(env);
        } catch (const std::exception&) {
            throw ConfigError(std::string("NNBOUND_MIP_BUDGET_MS is not an integer: '") + env + "'");
        }
    }
    if (flag) ms = *flag;
    if (ms <= 0) throw ConfigError("MIP budget must be positive");
    return std::chrono::milliseconds(ms);
}

EngineConfig make_config(const CommonFlags& f, Mode mode) {
    EngineConfig cfg;
    cfg.mode = mode;
    cfg.alpha = parse_alpha(f.alpha);
    cfg.mip_budget = resolve_budget(f.mip_budget_ms);
    if (f.concretization == "box") cfg.concretization = Concretization::Box;
    else if (f.concretization == "mip") cfg.concretization = Concretization::ShallowMip;
    else throw ConfigError("unknown concretization '" + f.concretization + "'");
    if (!(f.tolerance > 0.0)) throw ConfigError("tolerance must be positive");
    cfg.tolerance = f.tolerance;
    cfg.workers = std::max<std::size_t>(1, f.workers);
    cfg.nested = !f.no_nested;
    return cfg;
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    // Write then rename so readers never see a partial report.
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw ParseError("cannot write '" + path + "'");
        out << text;
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) throw ParseError("cannot write '" + path + "'");
}

int run_verify(const CommonFlags& f, const std::string& query_path, bool compare, const std::string& report_path,
               bool layers, std::uint64_t seed, std::size_t samples) {
    auto net = load_network_file(f.network);
    auto query = load_query_file(query_path, net);
    RunOptions opt;
    opt.seed = seed;
    opt.samples = samples;
    opt.include_layers = layers;
    Mode mode = Mode::DeepMIP;
    if (compare) {
        opt.kind = RunKind::Compare;
    } else if (f.mode == "cascade") {
        opt.kind = RunKind::Cascade;
    } else {
        mode = parse_mode(f.mode);
    }
    auto cfg = make_config(f, mode);
    if (f.timeout_ms) cfg.deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(*f.timeout_ms);
    auto report = run_query(net, query, cfg, opt);
    if (!report_path.empty()) write_output(report_path, render_report(report));
    if (compare) std::cout << render_compare_table(report);
    const auto& st = report.final_stage();
    std::cout << "bounds [" << st.lower << ", " << st.upper << "] verdict " << to_string(report.verdict);
    if (report.decided_by) std::cout << " (decided by " << to_string(*report.decided_by) << ")";
    std::cout << "\n";
    if (report.witness) std::cout << "sampled counterexample value " << report.witness->value << "\n";
    if (report_path.empty() && !compare) std::cout << render_report(report);
    return exit_code(report);
}

std::vector<Mode> parse_modes(const std::string& list) {
    std::vector<Mode> modes;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) modes.push_back(parse_mode(item));
    return modes;
}

int run_suite(const CommonFlags& f, const std::string& data_path, double epsilon, const std::string& modes,
              const std::string& json_path) {
    auto net = load_network_file(f.network);
    auto data = load_dataset_file(data_path);
    auto cfg = make_config(f, Mode::DeepMIP);
    cfg.workers = 1;
    SuiteOptions opt;
    opt.modes = parse_modes(modes);
    opt.workers = std::max<std::size_t>(1, f.workers);
    if (f.timeout_ms) opt.timeout = std::chrono::milliseconds(*f.timeout_ms);
    auto summary = run_robustness_suite(net, data, epsilon, cfg, opt);
    std::cout << render_suite_table(summary);
    if (!json_path.empty()) write_output(json_path, render_suite_json(summary));
    return 0;
}

int run_export(const CommonFlags& f, const std::string& query_path, std::size_t layer, const std::string& side_name,
               const std::string& out_path) {
    auto net = load_network_file(f.network);
    auto query = load_query_file(query_path, net);
    auto cfg = make_config(f, parse_mode(f.mode));
    Side side = Side::Upper;
    if (side_name == "lower") side = Side::Lower;
    else if (side_name == "auto")
        side = query.property && query.property->kind == PropertyKind::MinGeq ? Side::Lower : Side::Upper;
    else if (side_name != "upper") throw ConfigError("side must be upper, lower or auto");

    auto bounds = compute_all_bounds(net, query.domain, cfg).bounds;
    auto trace = trace_back_substitution(objective_form(net, query.coeffs, query.constant), net, bounds, cfg.alpha,
                                         side);
    ShallowReluProblem problem;
    if (layer == 0) {
        // Direct query: the form over the first hidden layer, over the input box.
        auto it = std::find_if(trace.forms.begin(), trace.forms.end(),
                               [](const SymbolicLinearForm& s) { return s.layer_index == 1; });
        if (it == trace.forms.end()) throw ConfigError("network has no hidden layer for a direct query");
        problem = form_as_shallow_problem(*it, net, bounds, side);
    } else {
        auto it = std::find_if(trace.errors.begin(), trace.errors.end(),
                               [&](const ErrorTerm& e) { return e.layer_index == layer; });
        if (it == trace.errors.end())
            throw ConfigError("no error term for layer " + std::to_string(layer) + "; valid layers are 1.." +
                              std::to_string(net.depth() - 1) + " (0 = direct first-layer query)");
        problem = it->problem;
    }
    write_output(out_path, export_lp_text(problem));
    return 0;
}

int run_oracle(const std::string& network, const std::string& query_path, std::size_t samples, std::uint64_t seed) {
    auto net = load_network_file(network);
    auto query = load_query_file(query_path, net);
    OutputObjective obj{query.coeffs, query.constant};
    auto range = enumerate_network_extremes(net, query.domain, obj);
    auto s = sample_extremes(net, query.domain, obj, samples, seed);
    std::cout << "exact [" << range.min << ", " << range.max << "]\n"
              << "sampled [" << s.min_seen << ", " << s.max_seen << "] over " << samples << " points\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bound propagation and robustness verification for ReLU networks"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    CommonFlags vf;
    std::string query, report;
    bool compare = false, layers = false;
    std::uint64_t seed = 0;
    std::size_t samples = 1000;
    auto* verify = app.add_subcommand("verify", "bound an objective and decide its property");
    add_engine_flags(verify, vf, true);
    verify->add_option("--query", query, "query file")->required();
    verify->add_flag("--compare", compare, "run every mode and print a comparison table");
    verify->add_option("--report", report, "write the structured report here");
    verify->add_flag("--layers", layers, "include per-layer bounds in the report");
    verify->add_option("--seed", seed, "seed for counterexample sampling");
    verify->add_option("--samples", samples, "samples drawn when the verdict is unknown");

    CommonFlags sf;
    std::string data, modes = "interval,symbolic,minimip,deepmip", suite_json;
    double epsilon = 0.0;
    auto* suite = app.add_subcommand("suite", "robustness of every point of a labelled dataset");
    add_engine_flags(suite, sf, false);
    suite->add_option("--data", data, "dataset file")->required();
    suite->add_option("--epsilon", epsilon, "box radius around each point")->required();
    suite->add_option("--modes", modes, "comma-separated modes");
    suite->add_option("--json", suite_json, "write the summary as structured text");

    CommonFlags ef;
    std::string equery, out = "-", side = "auto";
    std::size_t layer = 1;
    auto* exp = app.add_subcommand("export-mip", "write an error-term or direct MIP as LP text");
    add_engine_flags(exp, ef, true);
    exp->add_option("--query", equery, "query file")->required();
    exp->add_option("--layer", layer, "error-term layer (0: direct first-layer query)");
    exp->add_option("--side", side, "upper|lower|auto");
    exp->add_option("--out", out, "output file (default stdout)");

    std::string onet, oquery;
    std::size_t osamples = 100000;
    std::uint64_t oseed = 0;
    auto* oracle = app.add_subcommand("oracle", "");
    oracle->group("");
    oracle->add_option("--network", onet)->required();
    oracle->add_option("--query", oquery)->required();
    oracle->add_option("--samples", osamples);
    oracle->add_option("--seed", oseed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kInputError;
    }

    try {
        if (*verify) return run_verify(vf, query, compare, report, layers, seed, samples);
        if (*suite) return run_suite(sf, data, epsilon, modes, suite_json);
        if (*exp) return run_export(ef, equery, layer, side, out);
        if (*oracle) return run_oracle(onet, oquery, osamples, oseed);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const ShapeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const ValueError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const OracleCapError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kInternalError;
    }
    return kInputError;
}
