#include "nnbound/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nnbound {

const char* to_string(LpStatus status) {
    switch (status) {
        case LpStatus::Optimal: return "optimal";
        case LpStatus::Infeasible: return "infeasible";
        case LpStatus::Unbounded: return "unbounded";
        case LpStatus::NumericalFailure: return "numerical_failure";
    }
    return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/**
 * Tableau state for  T [y s a]^T = rhs  with y in [0, ub], s, a >= 0.
 * Columns: structural (n), slack (m), artificial (k); last column is rhs.
 */
class Tableau {
  public:
    Tableau(Eigen::MatrixXd tab, std::vector<double> ub, std::vector<int> basis, const LpOptions& opt)
        : tab_(std::move(tab)), ub_(std::move(ub)), basis_(std::move(basis)), opt_(opt) {
        cols_ = tab_.cols() - 1;
        is_basic_.assign(std::size_t(cols_), false);
        at_upper_.assign(std::size_t(cols_), false);
        for (int b : basis_) is_basic_[std::size_t(b)] = true;
    }

    Eigen::Index rows() const { return tab_.rows(); }
    Eigen::Index cols() const { return cols_; }
    int iterations() const { return iterations_; }

    double nonbasic_value(Eigen::Index j) const { return at_upper_[std::size_t(j)] ? ub_[std::size_t(j)] : 0.0; }

    Eigen::VectorXd basic_values() const {
        Eigen::VectorXd x = tab_.col(cols_);
        for (Eigen::Index j = 0; j < cols_; ++j)
            if (!is_basic_[std::size_t(j)] && at_upper_[std::size_t(j)]) x -= tab_.col(j) * ub_[std::size_t(j)];
        return x;
    }

    Eigen::VectorXd values() const {
        Eigen::VectorXd all(cols_);
        for (Eigen::Index j = 0; j < cols_; ++j) all(j) = is_basic_[std::size_t(j)] ? 0.0 : nonbasic_value(j);
        Eigen::VectorXd xb = basic_values();
        for (Eigen::Index i = 0; i < rows(); ++i) all(basis_[std::size_t(i)]) = xb(i);
        return all;
    }

    enum class Outcome { Optimal, Unbounded, IterationLimit };

    /** Minimizes cost . x from the current basis. */
    Outcome optimize(const Eigen::VectorXd& cost) {
        const double tol = opt_.pivot_tolerance;
        for (;;) {
            if (iterations_ >= opt_.max_iterations) return Outcome::IterationLimit;
            Eigen::VectorXd xb = basic_values();
            Eigen::Index entering = -1;
            for (Eigen::Index j = 0; j < cols_; ++j) {
                if (is_basic_[std::size_t(j)] || ub_[std::size_t(j)] <= tol) continue;
                double d = cost(j);
                for (Eigen::Index i = 0; i < rows(); ++i) d -= cost(basis_[std::size_t(i)]) * tab_(i, j);
                bool up = at_upper_[std::size_t(j)];
                if ((!up && d < -tol) || (up && d > tol)) {
                    entering = j;
                    break;
                }
            }
            if (entering < 0) return Outcome::Optimal;

            const double dir = at_upper_[std::size_t(entering)] ? -1.0 : 1.0;
            double step = ub_[std::size_t(entering)];
            Eigen::Index leave = -1;
            bool leave_to_upper = false;
            for (Eigen::Index i = 0; i < rows(); ++i) {
                double g = -dir * tab_(i, entering);
                double t;
                bool to_upper;
                const double ubi = ub_[std::size_t(basis_[std::size_t(i)])];
                if (g < -tol) {
                    t = std::max(xb(i), 0.0) / -g;
                    to_upper = false;
                } else if (g > tol && std::isfinite(ubi)) {
                    t = std::max(ubi - xb(i), 0.0) / g;
                    to_upper = true;
                } else {
                    continue;
                }
                const double eps = std::isfinite(step) ? 1e-12 * (1.0 + std::abs(step)) : 0.0;
                bool better = t < step - eps;
                bool tie = !better && leave >= 0 && t <= step + eps &&
                           basis_[std::size_t(i)] < basis_[std::size_t(leave)];
                if (better || tie) {
                    step = t;
                    leave = i;
                    leave_to_upper = to_upper;
                }
            }
            ++iterations_;
            if (leave < 0) {
                if (!std::isfinite(step)) return Outcome::Unbounded;
                at_upper_[std::size_t(entering)] = !at_upper_[std::size_t(entering)];
                continue;
            }
            const int leaving = basis_[std::size_t(leave)];
            pivot(leave, entering);
            at_upper_[std::size_t(leaving)] = leave_to_upper;
        }
    }

    void pivot(Eigen::Index r, Eigen::Index c) {
        const int leaving = basis_[std::size_t(r)];
        tab_.row(r) /= tab_(r, c);
        for (Eigen::Index i = 0; i < rows(); ++i) {
            if (i == r) continue;
            double f = tab_(i, c);
            if (f != 0.0) tab_.row(i) -= f * tab_.row(r);
        }
        is_basic_[std::size_t(leaving)] = false;
        is_basic_[std::size_t(c)] = true;
        at_upper_[std::size_t(c)] = false;
        basis_[std::size_t(r)] = int(c);
    }

    /** Moves basic artificial columns (>= first_artificial) out of the basis where possible. */
    void expel_artificials(Eigen::Index first_artificial) {
        for (Eigen::Index i = 0; i < rows(); ++i) {
            if (basis_[std::size_t(i)] < first_artificial) continue;
            Eigen::Index best = -1;
            double best_abs = 1e-9;
            for (Eigen::Index j = 0; j < first_artificial; ++j) {
                if (is_basic_[std::size_t(j)]) continue;
                if (std::abs(tab_(i, j)) > best_abs) {
                    best_abs = std::abs(tab_(i, j));
                    best = j;
                }
            }
            if (best >= 0) {
                // Degenerate pivot: the artificial sits at zero.
                const int leaving = basis_[std::size_t(i)];
                pivot(i, best);
                at_upper_[std::size_t(leaving)] = false;
            }
        }
        for (Eigen::Index j = first_artificial; j < cols_; ++j) ub_[std::size_t(j)] = 0.0;
    }

  private:
    Eigen::MatrixXd tab_;
    std::vector<double> ub_;
    std::vector<int> basis_;
    std::vector<bool> is_basic_;
    std::vector<bool> at_upper_;
    Eigen::Index cols_ = 0;
    LpOptions opt_;
    int iterations_ = 0;
};

}  // namespace

LpResult solve_lp(const LinearProgram& lp, const LpOptions& options) {
    const Eigen::Index n = lp.dim();
    if (lp.lower.size() != n || lp.upper.size() != n)
        throw std::invalid_argument("solve_lp: bound vectors do not match objective length");
    if (!lp.lower.allFinite() || !lp.upper.allFinite())
        throw std::invalid_argument("solve_lp: variable bounds must be finite");
    LpResult result;
    for (Eigen::Index j = 0; j < n; ++j) {
        if (lp.lower(j) > lp.upper(j)) {
            result.status = LpStatus::Infeasible;
            return result;
        }
    }

    // Everything as  a . x <= rhs.
    std::vector<std::pair<Eigen::VectorXd, double>> rows;
    for (const auto& c : lp.constraints) {
        if (c.coeffs.size() != n) throw std::invalid_argument("solve_lp: constraint width mismatch");
        if (c.relation != Relation::GreaterEq) rows.emplace_back(c.coeffs, c.rhs);
        if (c.relation != Relation::LessEq) rows.emplace_back(-c.coeffs, -c.rhs);
    }
    const Eigen::Index m = Eigen::Index(rows.size());

    Eigen::VectorXd shifted_rhs(m);
    for (Eigen::Index i = 0; i < m; ++i) shifted_rhs(i) = rows[std::size_t(i)].second - rows[std::size_t(i)].first.dot(lp.lower);
    Eigen::Index n_art = 0;
    for (Eigen::Index i = 0; i < m; ++i)
        if (shifted_rhs(i) < 0.0) ++n_art;

    const Eigen::Index cols = n + m + n_art;
    Eigen::MatrixXd tab = Eigen::MatrixXd::Zero(m, cols + 1);
    std::vector<double> ub(std::size_t(cols), kInf);
    for (Eigen::Index j = 0; j < n; ++j) ub[std::size_t(j)] = lp.upper(j) - lp.lower(j);
    std::vector<int> basis(static_cast<std::size_t>(m));
    Eigen::Index art = n + m;
    for (Eigen::Index i = 0; i < m; ++i) {
        double sign = shifted_rhs(i) < 0.0 ? -1.0 : 1.0;
        tab.row(i).head(n) = sign * rows[std::size_t(i)].first.transpose();
        tab(i, n + i) = sign;
        tab(i, cols) = sign * shifted_rhs(i);
        if (sign < 0.0) {
            tab(i, art) = 1.0;
            basis[std::size_t(i)] = int(art++);
        } else {
            basis[std::size_t(i)] = int(n + i);
        }
    }

    Tableau tableau(std::move(tab), std::move(ub), std::move(basis), options);
    if (n_art > 0) {
        Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(cols);
        phase1.tail(n_art).setOnes();
        if (tableau.optimize(phase1) != Tableau::Outcome::Optimal) {
            result.status = LpStatus::NumericalFailure;
            result.iterations = tableau.iterations();
            return result;
        }
        double residual = tableau.values().tail(n_art).sum();
        double scale = 1.0 + shifted_rhs.cwiseAbs().maxCoeff();
        if (residual > options.feasibility_tolerance * scale) {
            result.status = LpStatus::Infeasible;
            result.iterations = tableau.iterations();
            return result;
        }
        tableau.expel_artificials(n + m);
    }

    Eigen::VectorXd cost = Eigen::VectorXd::Zero(cols);
    cost.head(n) = lp.sense == Sense::Minimize ? lp.objective : Eigen::VectorXd(-lp.objective);
    auto outcome = tableau.optimize(cost);
    result.iterations = tableau.iterations();
    if (outcome == Tableau::Outcome::Unbounded) {
        result.status = LpStatus::Unbounded;
        return result;
    }
    if (outcome == Tableau::Outcome::IterationLimit) {
        result.status = LpStatus::NumericalFailure;
        return result;
    }

    Eigen::VectorXd x = lp.lower + tableau.values().head(n);
    x = x.cwiseMax(lp.lower).cwiseMin(lp.upper);
    for (const auto& [a, rhs] : rows) {
        double slack_tol = 1e-6 * (1.0 + std::abs(rhs) + a.cwiseAbs().sum() * (1.0 + x.cwiseAbs().maxCoeff()));
        if (a.dot(x) > rhs + slack_tol) {
            result.status = LpStatus::NumericalFailure;
            return result;
        }
    }
    result.status = LpStatus::Optimal;
    result.point = x;
    result.value = lp.objective.dot(x) + lp.constant;
    return result;
}

}  // namespace nnbound
