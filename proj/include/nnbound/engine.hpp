#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "nnbound/bounds.hpp"
#include "nnbound/error_min.hpp"

namespace nnbound {

/**
 * Interval: interval arithmetic only.
 * Symbolic: back-substitution with triangle relaxation, box concretization at every depth.
 * MiniMIP: Symbolic plus one exact shallow query once the form reaches layer 1.
 * DeepMIP: MiniMIP plus subtraction of each substitution step's minimized error.
 */
enum class Mode { Interval, Symbolic, MiniMIP, DeepMIP };

/** Box: closed-form concretization. ShallowMip: DeepMIP also solves every depth one ReLU deep. */
enum class Concretization { Box, ShallowMip };

const char* to_string(Mode mode);
Mode parse_mode(const std::string& name);
const char* to_string(Concretization c);

struct EngineConfig {
    Mode mode = Mode::Symbolic;
    AlphaPolicy alpha;
    std::chrono::milliseconds mip_budget{500};
    Concretization concretization = Concretization::Box;
    /** Relative optimality gap for MIP solves. */
    double tolerance = 1e-8;
    std::size_t workers = 1;
    /**
     * Intersect every neuron's bounds with those of the next cheaper mode
     * (Interval < Symbolic < MiniMIP < DeepMIP), so a costlier mode is never
     * looser than a cheaper one.
     */
    bool nested = true;
    /** Overall stop time; MIP solves started after it return their trivial certificate. */
    std::optional<std::chrono::steady_clock::time_point> deadline;

    MipOptions mip_options() const;
};

struct MipStats {
    std::size_t solves = 0;
    std::size_t exhausted = 0;
    std::size_t nodes = 0;

    MipStats& operator+=(const MipStats& o) {
        solves += o.solves;
        exhausted += o.exhausted;
        nodes += o.nodes;
        return *this;
    }
};

/** A neuron whose MIP work hit the budget; its bound is the certified fallback. */
struct Fallback {
    std::size_t layer = 0;
    std::size_t neuron = 0;
    Side side = Side::Upper;
};

struct BoundReport {
    LayerBounds bounds;
    MipStats stats;
    std::vector<Fallback> fallbacks;
};

struct NeuronBound {
    double value = 0.0;
    MipStats stats;
    bool fallback = false;
};

/**
 * Concrete side-bound of a form over the post-activations of some layer,
 * given complete bounds for that layer and all earlier ones. Keeps the
 * tightest candidate over all concretization depths.
 */
NeuronBound back_substitute(const SymbolicLinearForm& form, const Network& net, const LayerBounds& bounds,
                            Side side, const EngineConfig& cfg);

/** back_substitute for the pre-activation of neuron j in layer i. */
NeuronBound back_substitute_neuron(const Network& net, const LayerBounds& bounds, std::size_t i, std::size_t j,
                                   Side side, const EngineConfig& cfg);

/**
 * Layer-by-layer bounds for every neuron in the configured mode. With
 * `floor`, each neuron's interval is intersected with the floor's before
 * later layers use it. With cfg.nested and no floor, the cheaper mode is
 * computed first and used as the floor.
 */
BoundReport compute_all_bounds(const Network& net, const BoxDomain& dom, const EngineConfig& cfg,
                               const LayerBounds* floor = nullptr);

/** The mode one step cheaper, or nullopt for Interval. */
std::optional<Mode> cheaper_mode(Mode mode);

/**
 * Bounds of the objective c . output + d given bounds for every layer:
 * back-substitution from the last hidden layer in the configured mode.
 */
struct ObjectiveBounds {
    double lower = 0.0;
    double upper = 0.0;
    MipStats stats;
    bool fallback = false;
};

/** c . output + d as a form over the last hidden layer (the input when there is none). */
SymbolicLinearForm objective_form(const Network& net, const Eigen::VectorXd& coeffs, double constant);

ObjectiveBounds bound_objective(const Network& net, const LayerBounds& bounds, const Eigen::VectorXd& coeffs,
                                double constant, const EngineConfig& cfg);

/** Every form visited by a back-substitution and the error term of each step. */
struct BackSubstitutionTrace {
    std::vector<SymbolicLinearForm> forms;
    /** errors[k] belongs to the step forms[k] -> forms[k + 1]. */
    std::vector<ErrorTerm> errors;
};

BackSubstitutionTrace trace_back_substitution(const SymbolicLinearForm& form, const Network& net,
                                              const LayerBounds& bounds, const AlphaPolicy& policy, Side side);

}  // namespace nnbound
