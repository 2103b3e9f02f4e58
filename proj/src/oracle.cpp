#include "nnbound/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "nnbound/bounds.hpp"
#include "nnbound/lp.hpp"

namespace nnbound {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool feasible(const LinearProgram& base, Eigen::VectorXd* point) {
    LinearProgram lp = base;
    lp.objective = Eigen::VectorXd::Zero(base.dim());
    lp.constant = 0.0;
    auto res = solve_lp(lp);
    if (res.status == LpStatus::Optimal && point) *point = res.point;
    return res.status == LpStatus::Optimal;
}

class ShallowEnumerator {
  public:
    explicit ShallowEnumerator(const ShallowReluProblem& p) : p_(p) {
        best_ = p.sense == Sense::Minimize ? kInf : -kInf;
        lp_.lower = p.box_lower;
        lp_.upper = p.box_upper;
        lp_.sense = p.sense;
        lp_.objective = Eigen::VectorXd::Zero(p.dim());
    }

    double run() {
        visit(0, p_.linear, p_.constant);
        return best_;
    }

  private:
    void visit(std::size_t k, const Eigen::VectorXd& obj, double constant) {
        if (k == p_.terms.size()) {
            LinearProgram lp = lp_;
            lp.objective = obj;
            lp.constant = constant;
            auto res = solve_lp(lp);
            if (res.status != LpStatus::Optimal) return;
            best_ = p_.sense == Sense::Minimize ? std::min(best_, res.value) : std::max(best_, res.value);
            return;
        }
        const auto& t = p_.terms[k];
        // active: argument >= 0, term contributes w * (a.v + b)
        lp_.add(t.coeffs, Relation::GreaterEq, -t.constant);
        if (feasible(lp_, nullptr)) visit(k + 1, obj + t.weight * t.coeffs, constant + t.weight * t.constant);
        lp_.constraints.pop_back();
        // inactive: argument <= 0, term vanishes
        lp_.add(t.coeffs, Relation::LessEq, -t.constant);
        if (feasible(lp_, nullptr)) visit(k + 1, obj, constant);
        lp_.constraints.pop_back();
    }

    const ShallowReluProblem& p_;
    LinearProgram lp_;
    double best_;
};

/**
 * Depth-first walk over hidden neurons in layer order. Post-activations of
 * the layer being built are affine in the input once phases are fixed.
 */
class NetworkEnumerator {
  public:
    NetworkEnumerator(const Network& net, const BoxDomain& dom, const OutputObjective& objective)
        : net_(net), objective_(objective) {
        lp_.lower = dom.lower;
        lp_.upper = dom.upper;
        lp_.objective = Eigen::VectorXd::Zero(dom.size());
        for (std::size_t i = 1; i < net.depth(); ++i)
            for (std::size_t j = 0; j < net.width(i); ++j) order_.emplace_back(i, j);
    }

    Range run() {
        const Eigen::Index n = Eigen::Index(net_.input_dim());
        Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n);
        Eigen::VectorXd q = Eigen::VectorXd::Zero(n);
        Eigen::VectorXd start = 0.5 * (lp_.lower + lp_.upper);
        visit(0, P, q, Eigen::MatrixXd(0, n), Eigen::VectorXd(0), start);
        return range_;
    }

  private:
    // (P, q): affine post-activations of layer i-1; (R, r): rows of layer i built so far.
    void visit(std::size_t k, const Eigen::MatrixXd& P, const Eigen::VectorXd& q, const Eigen::MatrixXd& R,
               const Eigen::VectorXd& r, const Eigen::VectorXd& witness) {
        if (k == order_.size()) {
            finish(R.rows() ? R : P, R.rows() ? r : q);
            return;
        }
        auto [layer, neuron] = order_[k];
        const Eigen::MatrixXd* prevP = &P;
        const Eigen::VectorXd* prevq = &q;
        Eigen::MatrixXd curR = R;
        Eigen::VectorXd curr = r;
        if (neuron == 0 && layer > 1) {
            // layer - 1 complete: it becomes the previous layer.
            prevP = &R;
            prevq = &r;
            curR.resize(0, P.cols());
            curr.resize(0);
        }
        const auto& W = net_.weights_into(layer);
        const auto& b = net_.bias_into(layer);
        Eigen::VectorXd a = (W.row(Eigen::Index(neuron)) * (*prevP)).transpose();
        double c = W.row(Eigen::Index(neuron)).dot(*prevq) + b(Eigen::Index(neuron));

        const double at_witness = a.dot(witness) + c;
        for (int phase : {+1, -1}) {
            bool witness_ok = phase > 0 ? at_witness >= 0.0 : at_witness <= 0.0;
            lp_.add(a, phase > 0 ? Relation::GreaterEq : Relation::LessEq, -c);
            Eigen::VectorXd next_witness = witness;
            if (witness_ok || feasible(lp_, &next_witness)) {
                Eigen::MatrixXd nextR(curR.rows() + 1, P.cols());
                Eigen::VectorXd nextr(curr.size() + 1);
                nextR.topRows(curR.rows()) = curR;
                nextr.head(curr.size()) = curr;
                if (phase > 0) {
                    nextR.row(curR.rows()) = a.transpose();
                    nextr(curr.size()) = c;
                } else {
                    nextR.row(curR.rows()).setZero();
                    nextr(curr.size()) = 0.0;
                }
                visit(k + 1, *prevP, *prevq, nextR, nextr, next_witness);
            }
            lp_.constraints.pop_back();
        }
    }

    void finish(const Eigen::MatrixXd& P, const Eigen::VectorXd& q) {
        const auto& W = net_.weights_into(net_.depth());
        const auto& b = net_.bias_into(net_.depth());
        Eigen::VectorXd row = (objective_.coeffs.transpose() * W * P).transpose();
        double c = objective_.coeffs.dot(W * q + b) + objective_.constant;
        for (Sense s : {Sense::Minimize, Sense::Maximize}) {
            LinearProgram lp = lp_;
            lp.objective = row;
            lp.constant = c;
            lp.sense = s;
            auto res = solve_lp(lp);
            if (res.status != LpStatus::Optimal) continue;
            if (s == Sense::Minimize)
                range_.min = std::min(range_.min, res.value);
            else
                range_.max = std::max(range_.max, res.value);
        }
    }

    const Network& net_;
    const OutputObjective& objective_;
    std::vector<std::pair<std::size_t, std::size_t>> order_;
    LinearProgram lp_;
    Range range_{kInf, -kInf};
};

}  // namespace

double enumerate_shallow(const ShallowReluProblem& problem, std::size_t max_terms) {
    problem.validate();
    if (problem.terms.size() > max_terms)
        throw OracleCapError("shallow oracle: " + std::to_string(problem.terms.size()) +
                             " terms exceed the cap of " + std::to_string(max_terms));
    return ShallowEnumerator(problem).run();
}

Range enumerate_network_extremes(const Network& net, const BoxDomain& dom, const OutputObjective& objective,
                                 std::size_t max_unstable) {
    if (std::size_t(objective.coeffs.size()) != net.output_dim())
        throw ShapeError(net.depth(), "objective width does not match network output");
    auto bounds = interval_propagate(net, dom);
    std::size_t unstable = 0;
    for (std::size_t i = 1; i < net.depth(); ++i)
        for (Eigen::Index j = 0; j < bounds.pre_lower[i].size(); ++j)
            if (bounds.pre_lower[i](j) < 0.0 && bounds.pre_upper[i](j) > 0.0) ++unstable;
    if (unstable > max_unstable)
        throw OracleCapError("network oracle: " + std::to_string(unstable) +
                             " unstable neurons exceed the cap of " + std::to_string(max_unstable));
    return NetworkEnumerator(net, dom, objective).run();
}

Range enumerate_network_extremes(const Network& net, const BoxDomain& dom, std::size_t out_index,
                                 std::size_t max_unstable) {
    return enumerate_network_extremes(net, dom, OutputObjective::unit(net.output_dim(), out_index), max_unstable);
}

SampledRange sample_extremes(const Network& net, const BoxDomain& dom, const OutputObjective& objective,
                             std::size_t n, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("sample_extremes: need at least one sample");
    SampledRange out{kInf, -kInf, {}, {}};
    auto consider = [&](const Eigen::VectorXd& x) {
        double v = objective.apply(forward_eval(net, x));
        if (v < out.min_seen) {
            out.min_seen = v;
            out.argmin = x;
        }
        if (v > out.max_seen) {
            out.max_seen = v;
            out.argmax = x;
        }
    };
    const Eigen::Index dim = dom.size();
    std::size_t taken = 0;
    consider(0.5 * (dom.lower + dom.upper));
    ++taken;
    if (dim <= 12) {
        const std::size_t vertices = std::size_t(1) << dim;
        for (std::size_t mask = 0; mask < vertices && taken < n; ++mask, ++taken) {
            Eigen::VectorXd x(dim);
            for (Eigen::Index i = 0; i < dim; ++i) x(i) = (mask >> i) & 1 ? dom.upper(i) : dom.lower(i);
            consider(x);
        }
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::VectorXd x(dim);
    for (; taken < n; ++taken) {
        for (Eigen::Index i = 0; i < dim; ++i) x(i) = dom.lower(i) + unit(rng) * (dom.upper(i) - dom.lower(i));
        consider(x);
    }
    return out;
}

}  // namespace nnbound
