#include "nnbound/shallow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <stdexcept>

#include "nnbound/network.hpp"

namespace nnbound {

const char* to_string(OptStatus status) {
    return status == OptStatus::Optimal ? "optimal" : "budget_exhausted";
}

double ShallowReluProblem::evaluate(const Eigen::VectorXd& v) const {
    double acc = constant;
    for (Eigen::Index i = 0; i < linear.size(); ++i) acc += linear(i) * v(i);
    for (const auto& t : terms) {
        double arg = t.constant;
        for (Eigen::Index i = 0; i < t.coeffs.size(); ++i) arg += t.coeffs(i) * v(i);
        acc += t.weight * relu(arg);
    }
    return acc;
}

std::pair<double, double> ShallowReluProblem::argument_range(std::size_t j) const {
    const auto& t = terms.at(j);
    double lo = t.constant, hi = t.constant;
    for (Eigen::Index i = 0; i < t.coeffs.size(); ++i) {
        double a = t.coeffs(i);
        lo += a * (a >= 0.0 ? box_lower(i) : box_upper(i));
        hi += a * (a >= 0.0 ? box_upper(i) : box_lower(i));
    }
    return {lo, hi};
}

void ShallowReluProblem::validate() const {
    const Eigen::Index n = linear.size();
    if (box_lower.size() != n || box_upper.size() != n)
        throw std::invalid_argument("shallow problem: box does not match variable count");
    if (!box_lower.allFinite() || !box_upper.allFinite())
        throw std::invalid_argument("shallow problem: box must be finite");
    if ((box_lower.array() > box_upper.array()).any())
        throw std::invalid_argument("shallow problem: box lower exceeds upper");
    for (const auto& t : terms)
        if (t.coeffs.size() != n)
            throw std::invalid_argument("shallow problem: relu term width mismatch");
}

ShallowReluProblem ShallowReluProblem::folded() const {
    ShallowReluProblem out = *this;
    out.terms.clear();
    for (const auto& t : terms) {
        if (t.weight == 0.0) continue;
        if ((t.coeffs.array() == 0.0).all())
            out.constant += t.weight * relu(t.constant);
        else
            out.terms.push_back(t);
    }
    return out;
}

namespace {

struct Node {
    std::vector<std::int8_t> phase;  // 0 unfixed, +1 active, -1 inactive
    double bound;
    std::size_t seq;
};

struct NodeOrder {
    bool operator()(const Node& a, const Node& b) const {
        if (a.bound != b.bound) return a.bound > b.bound;
        return a.seq > b.seq;
    }
};

struct UnstableTerm {
    double weight;  // already multiplied by the sense sign
    const ReluTerm* term;
    double lo, hi;
};

/** Minimization form of a shallow problem with stable terms eliminated. */
class BranchAndBound {
  public:
    BranchAndBound(const ShallowReluProblem& p, const MipOptions& opt) : problem_(p), opt_(opt) {
        sign_ = p.sense == Sense::Maximize ? -1.0 : 1.0;
        const Eigen::Index n = p.dim();
        base_linear_ = sign_ * p.linear;
        base_constant_ = sign_ * p.constant;
        trivial_bound_ = 0.0;
        for (std::size_t j = 0; j < p.terms.size(); ++j) {
            auto [lo, hi] = p.argument_range(j);
            const double w = sign_ * p.terms[j].weight;
            trivial_bound_ += std::min(w * relu(lo), w * relu(hi));
            if (hi <= 0.0) continue;
            if (lo >= 0.0) {
                base_linear_ += w * p.terms[j].coeffs;
                base_constant_ += w * p.terms[j].constant;
                continue;
            }
            unstable_.push_back({w, &p.terms[j], lo, hi});
        }
        for (Eigen::Index i = 0; i < n; ++i)
            trivial_bound_ += sign_ * p.linear(i) * (sign_ * p.linear(i) >= 0.0 ? p.box_lower(i) : p.box_upper(i));
        trivial_bound_ += sign_ * p.constant;
    }

    OptResult run() {
        using clock = std::chrono::steady_clock;
        auto deadline = clock::now() + opt_.budget;
        if (opt_.deadline && *opt_.deadline < deadline) deadline = *opt_.deadline;

        const double inf = std::numeric_limits<double>::infinity();
        double incumbent = inf;
        Eigen::VectorXd incumbent_point = 0.5 * (problem_.box_lower + problem_.box_upper);
        incumbent = sign_ * problem_.evaluate(incumbent_point);
        double settled = inf;  // min bound over nodes closed without reaching the incumbent
        std::size_t seq = 0;
        std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
        open.push({std::vector<std::int8_t>(unstable_.size(), 0), trivial_bound_, seq++});

        OptResult out;
        bool exhausted = false;
        while (!open.empty()) {
            const Node& top = open.top();
            if (top.bound >= incumbent - gap_tolerance(incumbent)) break;
            if (out.nodes_explored > 0 &&
                (clock::now() >= deadline || (opt_.max_nodes && out.nodes_explored >= opt_.max_nodes))) {
                exhausted = true;
                break;
            }
            Node node = top;
            open.pop();
            ++out.nodes_explored;

            LinearProgram lp = node_lp(node);
            LpResult res = solve_lp(lp, opt_.lp);
            ++out.lp_solves;
            if (res.status == LpStatus::Infeasible) continue;
            if (res.status != LpStatus::Optimal) {
                settled = std::min(settled, node.bound);
                continue;
            }
            const Eigen::Index n = problem_.dim();
            Eigen::VectorXd v = res.point.head(n);
            double fv = sign_ * problem_.evaluate(v);
            if (fv < incumbent) {
                incumbent = fv;
                incumbent_point = v;
            }
            double bound = std::max(node.bound, res.value);
            if (bound >= incumbent - gap_tolerance(incumbent)) {
                settled = std::min(settled, bound);
                continue;
            }
            int pick = branch_choice(node, res.point);
            if (pick < 0) {
                settled = std::min(settled, bound);
                continue;
            }
            for (std::int8_t phase : {std::int8_t(1), std::int8_t(-1)}) {
                Node child{node.phase, bound, seq++};
                child.phase[std::size_t(pick)] = phase;
                open.push(std::move(child));
            }
        }
        double certified = std::min(incumbent, settled);
        if (!open.empty()) certified = std::min(certified, open.top().bound);
        certified = std::max(certified, trivial_bound_);

        out.status = (!exhausted && incumbent - certified <= gap_tolerance(incumbent)) ? OptStatus::Optimal
                                                                                      : OptStatus::BudgetExhausted;
        out.incumbent_point = incumbent_point;
        out.incumbent_value = problem_.evaluate(incumbent_point);
        out.certified_bound = sign_ * std::min(certified, incumbent);
        return out;
    }

  private:
    double gap_tolerance(double incumbent) const {
        return opt_.relative_gap * std::max(1.0, std::abs(incumbent));
    }

    LinearProgram node_lp(const Node& node) const {
        const Eigen::Index n = problem_.dim();
        Eigen::Index n_aux = 0;
        for (auto ph : node.phase)
            if (ph == 0) ++n_aux;
        LinearProgram lp;
        lp.sense = Sense::Minimize;
        lp.objective = Eigen::VectorXd::Zero(n + n_aux);
        lp.objective.head(n) = base_linear_;
        lp.constant = base_constant_;
        lp.lower.resize(n + n_aux);
        lp.upper.resize(n + n_aux);
        lp.lower.head(n) = problem_.box_lower;
        lp.upper.head(n) = problem_.box_upper;
        Eigen::Index aux = n;
        for (std::size_t k = 0; k < unstable_.size(); ++k) {
            const auto& u = unstable_[k];
            const auto& a = u.term->coeffs;
            const double b = u.term->constant;
            Eigen::VectorXd row = Eigen::VectorXd::Zero(n + n_aux);
            row.head(n) = a;
            if (node.phase[k] > 0) {
                lp.objective.head(n) += u.weight * a;
                lp.constant += u.weight * b;
                lp.add(row, Relation::GreaterEq, -b);
            } else if (node.phase[k] < 0) {
                lp.add(row, Relation::LessEq, -b);
            } else {
                lp.objective(aux) = u.weight;
                lp.lower(aux) = 0.0;
                lp.upper(aux) = u.hi;
                // s >= a.v + b
                row(aux) = -1.0;
                lp.add(row, Relation::LessEq, -b);
                // s <= lambda (a.v + b - L)
                const double lambda = u.hi / (u.hi - u.lo);
                Eigen::VectorXd chord = Eigen::VectorXd::Zero(n + n_aux);
                chord.head(n) = -lambda * a;
                chord(aux) = 1.0;
                lp.add(std::move(chord), Relation::LessEq, lambda * (b - u.lo));
                ++aux;
            }
        }
        return lp;
    }

    /** Unfixed term to split, or -1 when the node relaxation is exact. */
    int branch_choice(const Node& node, const Eigen::VectorXd& lp_point) const {
        const Eigen::Index n = problem_.dim();
        int best = -1, fallback = -1;
        double best_score = -1.0, fallback_score = -1.0;
        Eigen::Index aux = n;
        for (std::size_t k = 0; k < unstable_.size(); ++k) {
            if (node.phase[k] != 0) continue;
            const auto& u = unstable_[k];
            double score = std::abs(u.weight) * std::min(u.hi, -u.lo);
            double arg = u.term->constant + u.term->coeffs.dot(lp_point.head(n));
            double gap = std::abs(lp_point(aux) - relu(arg));
            ++aux;
            if (score > fallback_score) {
                fallback_score = score;
                fallback = int(k);
            }
            if (gap > 1e-9 * (1.0 + std::abs(arg)) && score > best_score) {
                best_score = score;
                best = int(k);
            }
        }
        return best >= 0 ? best : fallback;
    }

    const ShallowReluProblem& problem_;
    const MipOptions& opt_;
    double sign_ = 1.0;
    Eigen::VectorXd base_linear_;
    double base_constant_ = 0.0;
    double trivial_bound_ = 0.0;
    std::vector<UnstableTerm> unstable_;
};

}  // namespace

OptResult solve_shallow(const ShallowReluProblem& problem, const MipOptions& options) {
    problem.validate();
    ShallowReluProblem folded = problem.folded();
    return BranchAndBound(folded, options).run();
}

}  // namespace nnbound
