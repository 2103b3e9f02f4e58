#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>

#include <Eigen/Dense>

#include "nnbound/network.hpp"
#include "nnbound/shallow.hpp"

namespace nnbound {

/** Raised when an exhaustive oracle would exceed its enumeration cap. */
class OracleCapError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/**
 * True optimum of a shallow problem by enumerating ReLU phase patterns, one
 * LP per consistent pattern. Patterns are explored depth-first and
 * abandoned as soon as a prefix is infeasible.
 */
double enumerate_shallow(const ShallowReluProblem& problem, std::size_t max_terms = 20);

/** A linear functional over network outputs. */
struct OutputObjective {
    Eigen::VectorXd coeffs;
    double constant = 0.0;

    static OutputObjective unit(std::size_t width, std::size_t index) {
        OutputObjective o;
        o.coeffs = Eigen::VectorXd::Zero(Eigen::Index(width));
        o.coeffs(Eigen::Index(index)) = 1.0;
        return o;
    }
    double apply(const Eigen::VectorXd& output) const { return coeffs.dot(output) + constant; }
};

struct Range {
    double min = 0.0;
    double max = 0.0;
};

/**
 * Exact range of an output functional over a box by joint phase
 * enumeration of every hidden ReLU. Throws OracleCapError when interval
 * propagation reports more than `max_unstable` unstable neurons.
 */
Range enumerate_network_extremes(const Network& net, const BoxDomain& dom, const OutputObjective& objective,
                                 std::size_t max_unstable = 20);
Range enumerate_network_extremes(const Network& net, const BoxDomain& dom, std::size_t out_index,
                                 std::size_t max_unstable = 20);

struct SampledRange {
    double min_seen = 0.0;
    double max_seen = 0.0;
    Eigen::VectorXd argmin;
    Eigen::VectorXd argmax;
};

/**
 * Inner estimate of the output range: the box center first, then every
 * vertex when the dimension is at most 12, then uniform samples from a
 * seeded generator, n evaluations in total.
 */
SampledRange sample_extremes(const Network& net, const BoxDomain& dom, const OutputObjective& objective,
                             std::size_t n, std::uint64_t seed);

}  // namespace nnbound
