#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nnbound/engine.hpp"

namespace nnbound {

inline constexpr const char* kToolVersion = "0.1.0";

enum class PropertyKind { MaxLeq, MinGeq };

struct Property {
    PropertyKind kind = PropertyKind::MaxLeq;
    double threshold = 0.0;
};

/** A box, a linear objective over the outputs, and an optional threshold property. */
struct Query {
    BoxDomain domain;
    Eigen::VectorXd coeffs;
    double constant = 0.0;
    std::optional<Property> property;
};

/**
 * Query file: {"domain": {"lower", "upper"} | {"center", "epsilon",
 * "valid_lower"?, "valid_upper"?}, "objective"?: {"coeffs", "constant"?},
 * "property"?: {"kind": "max_leq" | "min_geq", "threshold"}}. The objective
 * defaults to the single output of a one-output network.
 */
Query load_query(const std::string& text, const Network& net);
Query load_query_file(const std::string& path, const Network& net);

/** [center - eps, center + eps] clamped to the optional valid range. */
BoxDomain robustness_box(const Eigen::VectorXd& center, double epsilon,
                         const std::optional<Eigen::VectorXd>& valid_lower = std::nullopt,
                         const std::optional<Eigen::VectorXd>& valid_upper = std::nullopt);

enum class Verdict { Holds, Unknown };
const char* to_string(Verdict v);

struct StageResult {
    Mode mode = Mode::Interval;
    double lower = 0.0;
    double upper = 0.0;
    MipStats stats;
    std::vector<Fallback> fallbacks;
    std::optional<Verdict> verdict;
    LayerBounds bounds;
    double bounds_seconds = 0.0;
    double objective_seconds = 0.0;
};

struct Witness {
    Eigen::VectorXd point;
    double value = 0.0;
};

enum class RunKind { Single, Compare, Cascade };

struct RunOptions {
    RunKind kind = RunKind::Single;
    bool include_layers = false;
    /** Samples drawn to look for a counterexample when the verdict is Unknown. */
    std::size_t samples = 1000;
    std::uint64_t seed = 0;
};

struct Report {
    EngineConfig config;
    RunOptions options;
    Query query;
    /** Stages in the order they ran; the last one carries the reported bounds. */
    std::vector<StageResult> stages;
    Verdict verdict = Verdict::Unknown;
    std::optional<Mode> decided_by;
    std::optional<Witness> witness;
    double total_seconds = 0.0;

    const StageResult& final_stage() const { return stages.back(); }
};

/**
 * Runs one stage on top of an optional cheaper stage: all-layer bounds,
 * then the objective bounds, each intersected with the floor's when
 * cfg.nested is set.
 */
StageResult run_stage(const Network& net, const Query& query, const EngineConfig& cfg, const StageResult* floor);

/**
 * Single: stages up to cfg.mode, reporting only that mode (all of them with
 * nested off skips the cheaper ones). Compare: all four modes. Cascade: all
 * four, stopping at the first that decides the property.
 */
Report run_query(const Network& net, const Query& query, const EngineConfig& cfg, const RunOptions& options = {});

/** Structured report text; wall-clock fields are isolated under "timing". */
std::string render_report(const Report& report);

/** Bound-comparison table for a compare run. */
std::string render_compare_table(const Report& report);

/** 0 when the property holds, 1 otherwise. Input errors map to 2 in the CLI. */
int exit_code(const Report& report);

struct DatasetPoint {
    Eigen::VectorXd x;
    std::size_t label = 0;
};

/** {"points": [{"x": [...], "label": n}, ...], "valid_lower"?: [...], "valid_upper"?: [...]} */
struct Dataset {
    std::vector<DatasetPoint> points;
    std::optional<Eigen::VectorXd> valid_lower;
    std::optional<Eigen::VectorXd> valid_upper;
};

Dataset load_dataset(const std::string& text);
Dataset load_dataset_file(const std::string& path);

struct SuiteOptions {
    std::vector<Mode> modes{Mode::Interval, Mode::Symbolic, Mode::MiniMIP, Mode::DeepMIP};
    /** Points processed concurrently. */
    std::size_t workers = 1;
    /** Per query (point and mode) wall-clock limit; MIP work stops at it. */
    std::optional<std::chrono::milliseconds> timeout;
};

struct SuiteModeSummary {
    Mode mode = Mode::Interval;
    std::size_t solved = 0;
    double mean_seconds = 0.0;
    std::size_t timeouts = 0;
};

struct SuitePointResult {
    std::size_t index = 0;
    bool skipped = false;
    /** Per mode in SuiteOptions::modes order. */
    std::vector<bool> solved;
    std::vector<double> seconds;
};

struct SuiteSummary {
    double epsilon = 0.0;
    std::size_t points = 0;
    std::size_t skipped = 0;
    std::vector<SuiteModeSummary> modes;
    std::vector<SuitePointResult> details;
    std::vector<std::string> notes;
};

/**
 * Robustness of every correctly classified point: one query per competing
 * label (objective logit_true - logit_other, property min >= 0) over the
 * epsilon box. A point counts as solved by a mode when every query holds.
 * Modes are evaluated as nested stages, so a mode's time includes the
 * cheaper stages it builds on.
 */
SuiteSummary run_robustness_suite(const Network& net, const Dataset& data, double epsilon, const EngineConfig& cfg,
                                  const SuiteOptions& options = {});

std::string render_suite_table(const SuiteSummary& summary);
std::string render_suite_json(const SuiteSummary& summary);

}  // namespace nnbound
