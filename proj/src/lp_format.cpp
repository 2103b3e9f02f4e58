#include "nnbound/lp_format.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>

#include "nnbound/network.hpp"

namespace nnbound {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/** Accumulates " + c name" terms, skipping zeros. */
class Expr {
  public:
    void add(double c, const std::string& var) {
        if (c == 0.0) return;
        out_ << (c < 0.0 ? " - " : (empty_ ? " " : " + ")) << num(std::abs(c)) << ' ' << var;
        empty_ = false;
    }
    std::string str(const std::string& placeholder) const { return empty_ ? " 0 " + placeholder : out_.str(); }

  private:
    std::ostringstream out_;
    bool empty_ = true;
};

std::string v(Eigen::Index i) { return "v" + std::to_string(i); }
std::string y(std::size_t j) { return "y" + std::to_string(j); }
std::string z(std::size_t j) { return "z" + std::to_string(j); }

}  // namespace

std::string export_lp_text(const ShallowReluProblem& input) {
    input.validate();
    const ShallowReluProblem p = input.folded();
    const Eigen::Index n = p.dim();
    std::ostringstream os;
    os << "\\ shallow relu problem: " << n << " variables, " << p.terms.size() << " relu terms\n";
    os << (p.sense == Sense::Minimize ? "Minimize\n" : "Maximize\n");
    Expr obj;
    for (Eigen::Index i = 0; i < n; ++i) obj.add(p.linear(i), v(i));
    for (std::size_t j = 0; j < p.terms.size(); ++j) obj.add(p.terms[j].weight, y(j));
    os << " obj:" << obj.str(n > 0 ? v(0) : "v0");
    if (p.constant != 0.0) os << (p.constant < 0.0 ? " - " : " + ") << num(std::abs(p.constant));
    os << "\n";

    os << "Subject To\n";
    std::vector<std::pair<double, double>> ranges;
    for (std::size_t j = 0; j < p.terms.size(); ++j) {
        const auto& t = p.terms[j];
        auto [lo, hi] = p.argument_range(j);
        ranges.emplace_back(lo, hi);
        // y >= 0
        os << " r" << j << "_nonneg: 1 " << y(j) << " >= 0\n";
        // y - a.v >= b
        Expr ge;
        ge.add(1.0, y(j));
        for (Eigen::Index i = 0; i < n; ++i) ge.add(-t.coeffs(i), v(i));
        os << " r" << j << "_arg:" << ge.str(y(j)) << " >= " << num(t.constant) << "\n";
        // y - a.v - L z <= b - L
        Expr act;
        act.add(1.0, y(j));
        for (Eigen::Index i = 0; i < n; ++i) act.add(-t.coeffs(i), v(i));
        act.add(-lo, z(j));
        os << " r" << j << "_active:" << act.str(y(j)) << " <= " << num(t.constant - lo) << "\n";
        // y - U z <= 0
        Expr off;
        off.add(1.0, y(j));
        off.add(-hi, z(j));
        os << " r" << j << "_inactive:" << off.str(y(j)) << " <= 0\n";
    }
    os << "Bounds\n";
    for (Eigen::Index i = 0; i < n; ++i)
        os << " " << num(p.box_lower(i)) << " <= " << v(i) << " <= " << num(p.box_upper(i)) << "\n";
    for (std::size_t j = 0; j < p.terms.size(); ++j)
        os << " 0 <= " << y(j) << " <= " << num(std::max(ranges[j].second, 0.0)) << "\n";
    if (!p.terms.empty()) {
        os << "Binary\n";
        for (std::size_t j = 0; j < p.terms.size(); ++j) os << " " << z(j) << "\n";
    }
    os << "End\n";
    return os.str();
}

std::pair<double, double> MilpModel::bounds_of(const std::string& var) const {
    if (std::find(binaries.begin(), binaries.end(), var) != binaries.end()) return {0.0, 1.0};
    auto it = bounds.find(var);
    return it == bounds.end() ? std::make_pair(0.0, kInf) : it->second;
}

namespace {

enum class Section { None, Objective, Constraints, Bounds, Binary, General, End };

std::string lower(std::string s) {
    for (auto& c : s) c = char(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

struct Token {
    enum Kind { Number, Name, Plus, Minus, Colon, Le, Ge, Eq } kind;
    std::string text;
    double value = 0.0;
    int line = 0;
};

bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || std::string("_.!\"#$%&()/,;?@'`{}|~[]").find(c) != std::string::npos;
}

std::vector<Token> tokenize(const std::string& text, int line) {
    std::vector<Token> out;
    std::size_t i = 0;
    auto fail = [&](const std::string& what) {
        throw ParseError("lp text line " + std::to_string(line) + ": " + what);
    };
    while (i < text.size()) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == '+') {
            out.push_back({Token::Plus, "+", 0, line});
            ++i;
        } else if (c == '-') {
            out.push_back({Token::Minus, "-", 0, line});
            ++i;
        } else if (c == ':') {
            out.push_back({Token::Colon, ":", 0, line});
            ++i;
        } else if (c == '<' || c == '>' || c == '=') {
            std::size_t j = i + 1;
            if (j < text.size() && (text[j] == '=' || text[j] == '<' || text[j] == '>')) ++j;
            std::string op = text.substr(i, j - i);
            Token::Kind k = Token::Eq;
            if (op.find('<') != std::string::npos) k = Token::Le;
            else if (op.find('>') != std::string::npos) k = Token::Ge;
            out.push_back({k, op, 0, line});
            i = j;
        } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* start = text.c_str() + i;
            char* end = nullptr;
            double value = std::strtod(start, &end);
            if (end == start) fail("bad number");
            out.push_back({Token::Number, std::string(start, std::size_t(end - start)), value, line});
            i += std::size_t(end - start);
        } else if (is_name_char(c)) {
            std::size_t j = i;
            while (j < text.size() && is_name_char(text[j])) ++j;
            std::string name = text.substr(i, j - i);
            std::string l = lower(name);
            if (l == "inf" || l == "infinity")
                out.push_back({Token::Number, name, kInf, line});
            else
                out.push_back({Token::Name, name, 0, line});
            i = j;
        } else {
            fail(std::string("unexpected character '") + c + "'");
        }
    }
    return out;
}

class Parser {
  public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    bool done() const { return pos_ >= toks_.size(); }
    const Token& peek(std::size_t ahead = 0) const { return toks_.at(pos_ + ahead); }
    bool has(std::size_t ahead = 0) const { return pos_ + ahead < toks_.size(); }

    [[noreturn]] void fail(const std::string& what) const {
        int line = done() ? (toks_.empty() ? 0 : toks_.back().line) : peek().line;
        throw ParseError("lp text line " + std::to_string(line) + ": " + what);
    }

    /** Optional "name :" prefix. */
    std::string label() {
        if (has(1) && peek().kind == Token::Name && peek(1).kind == Token::Colon) {
            std::string name = peek().text;
            pos_ += 2;
            return name;
        }
        return {};
    }

    /**
     * Linear expression up to (not including) a relation or the end; a
     * trailing bare number is an additive constant.
     */
    void expression(std::map<std::string, double>& coeffs, double& constant, std::vector<std::string>& order) {
        bool any = false;
        while (!done() && peek().kind != Token::Le && peek().kind != Token::Ge && peek().kind != Token::Eq) {
            // A new labelled row starts: stop.
            if (any && has(1) && peek().kind == Token::Name && peek(1).kind == Token::Colon) break;
            double sign = 1.0;
            bool signed_term = false;
            while (!done() && (peek().kind == Token::Plus || peek().kind == Token::Minus)) {
                if (peek().kind == Token::Minus) sign = -sign;
                signed_term = true;
                ++pos_;
            }
            if (any && !signed_term) fail("expected '+' or '-' between terms");
            if (done()) fail("dangling sign");
            double coef = 1.0;
            bool have_number = false;
            if (peek().kind == Token::Number) {
                coef = peek().value;
                have_number = true;
                ++pos_;
            }
            if (!done() && peek().kind == Token::Name && !(has(1) && peek(1).kind == Token::Colon)) {
                const std::string& name = peek().text;
                if (!coeffs.count(name)) order.push_back(name);
                coeffs[name] += sign * coef;
                ++pos_;
            } else if (have_number) {
                constant += sign * coef;
            } else {
                fail("expected a term");
            }
            any = true;
        }
        if (!any) fail("empty expression");
    }

    Relation relation() {
        if (done()) fail("expected a relation");
        auto k = peek().kind;
        ++pos_;
        if (k == Token::Le) return Relation::LessEq;
        if (k == Token::Ge) return Relation::GreaterEq;
        if (k == Token::Eq) return Relation::Equal;
        fail("expected a relation");
    }

    double signed_number() {
        double sign = 1.0;
        while (!done() && (peek().kind == Token::Plus || peek().kind == Token::Minus)) {
            if (peek().kind == Token::Minus) sign = -sign;
            ++pos_;
        }
        if (done() || peek().kind != Token::Number) fail("expected a number");
        double v = peek().value;
        ++pos_;
        return sign * v;
    }

    std::string name() {
        if (done() || peek().kind != Token::Name) fail("expected a variable name");
        return toks_[pos_++].text;
    }

  private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

void note_variable(MilpModel& m, const std::string& name) {
    if (std::find(m.variables.begin(), m.variables.end(), name) == m.variables.end()) m.variables.push_back(name);
}

}  // namespace

MilpModel parse_lp_text(const std::string& text) {
    MilpModel model;
    std::map<Section, std::vector<Token>> sections;
    Section current = Section::None;
    bool saw_objective = false, saw_end = false;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        auto cut = raw.find('\\');
        std::string line = cut == std::string::npos ? raw : raw.substr(0, cut);
        std::string key = lower(line);
        key.erase(0, key.find_first_not_of(" \t\r"));
        key.erase(key.find_last_not_of(" \t\r") + 1);
        if (key.empty()) continue;
        if (saw_end) throw ParseError("lp text line " + std::to_string(line_no) + ": content after End");
        if (key == "minimize" || key == "minimum" || key == "min" || key == "maximize" || key == "maximum" ||
            key == "max") {
            if (saw_objective) throw ParseError("lp text line " + std::to_string(line_no) + ": second objective");
            model.sense = key.rfind("min", 0) == 0 ? Sense::Minimize : Sense::Maximize;
            current = Section::Objective;
            saw_objective = true;
            continue;
        }
        if (key == "subject to" || key == "such that" || key == "st" || key == "s.t." || key == "st.") {
            current = Section::Constraints;
            continue;
        }
        if (key == "bounds" || key == "bound") {
            current = Section::Bounds;
            continue;
        }
        if (key == "binary" || key == "binaries" || key == "bin") {
            current = Section::Binary;
            continue;
        }
        if (key == "general" || key == "generals" || key == "gen") {
            current = Section::General;
            continue;
        }
        if (key == "end") {
            saw_end = true;
            continue;
        }
        if (current == Section::None)
            throw ParseError("lp text line " + std::to_string(line_no) + ": content before the objective section");
        auto toks = tokenize(line, line_no);
        if (current == Section::Bounds || current == Section::Binary || current == Section::General) {
            // one declaration per line; keep a line marker by storing each line separately
            Parser p(toks);
            if (current == Section::Binary || current == Section::General) {
                while (!p.done()) {
                    auto name = p.name();
                    note_variable(model, name);
                    if (current == Section::Binary) model.binaries.push_back(name);
                }
                continue;
            }
            // Bounds: "a <= x <= b", "x >= a", "x <= b", "x = a", "x free"
            if (toks.size() == 2 && toks[0].kind == Token::Name && toks[1].kind == Token::Name &&
                lower(toks[1].text) == "free") {
                note_variable(model, toks[0].text);
                model.bounds[toks[0].text] = {-kInf, kInf};
                continue;
            }
            if (!toks.empty() && toks[0].kind == Token::Name) {
                auto name = p.name();
                note_variable(model, name);
                auto rel = p.relation();
                double value = p.signed_number();
                auto b = model.bounds_of(name);
                if (rel == Relation::LessEq) b.second = value;
                else if (rel == Relation::GreaterEq) b.first = value;
                else b = {value, value};
                model.bounds[name] = b;
            } else {
                double lo = p.signed_number();
                if (p.relation() != Relation::LessEq) p.fail("expected '<=' in a range bound");
                auto name = p.name();
                note_variable(model, name);
                double hi = kInf;
                if (!p.done()) {
                    if (p.relation() != Relation::LessEq) p.fail("expected '<=' in a range bound");
                    hi = p.signed_number();
                }
                model.bounds[name] = {lo, hi};
            }
            if (!p.done()) p.fail("trailing tokens in bound");
            continue;
        }
        auto& bucket = sections[current];
        bucket.insert(bucket.end(), toks.begin(), toks.end());
    }
    if (!saw_objective) throw ParseError("lp text: missing objective section");
    if (!saw_end) throw ParseError("lp text: missing End");

    {
        Parser p(sections[Section::Objective]);
        if (!p.done()) {
            p.label();
            std::vector<std::string> order;
            p.expression(model.objective, model.objective_constant, order);
            for (auto& name : order) note_variable(model, name);
            if (!p.done()) p.fail("trailing tokens in objective");
        }
    }
    {
        Parser p(sections[Section::Constraints]);
        std::size_t auto_name = 0;
        while (!p.done()) {
            MilpModel::Row row;
            row.name = p.label();
            if (row.name.empty()) row.name = "c" + std::to_string(auto_name++);
            double constant = 0.0;
            std::vector<std::string> order;
            p.expression(row.coeffs, constant, order);
            for (auto& name : order) note_variable(model, name);
            row.relation = p.relation();
            row.rhs = p.signed_number() - constant;
            model.rows.push_back(std::move(row));
        }
    }
    for (const auto& [name, b] : model.bounds)
        if (b.first > b.second) throw ParseError("lp text: empty bound range for " + name);
    return model;
}

std::optional<double> solve_milp_by_enumeration(const MilpModel& model, std::size_t max_binaries) {
    if (model.binaries.size() > max_binaries)
        throw std::invalid_argument("solve_milp_by_enumeration: too many binaries");
    std::map<std::string, Eigen::Index> index;
    for (const auto& name : model.variables) index.emplace(name, Eigen::Index(index.size()));
    const Eigen::Index n = Eigen::Index(index.size());
    LinearProgram base;
    base.sense = model.sense;
    base.objective = Eigen::VectorXd::Zero(n);
    base.constant = model.objective_constant;
    base.lower.resize(n);
    base.upper.resize(n);
    for (const auto& [name, c] : model.objective) base.objective(index.at(name)) = c;
    for (const auto& [name, i] : index) {
        auto [lo, hi] = model.bounds_of(name);
        if (!std::isfinite(lo) || !std::isfinite(hi))
            throw std::invalid_argument("solve_milp_by_enumeration: variable " + name + " is unbounded");
        base.lower(i) = lo;
        base.upper(i) = hi;
    }
    for (const auto& row : model.rows) {
        Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
        for (const auto& [name, c] : row.coeffs) a(index.at(name)) = c;
        base.add(std::move(a), row.relation, row.rhs);
    }
    std::optional<double> best;
    const std::size_t k = model.binaries.size();
    for (std::size_t mask = 0; mask < (std::size_t(1) << k); ++mask) {
        LinearProgram lp = base;
        for (std::size_t b = 0; b < k; ++b) {
            double val = (mask >> b) & 1 ? 1.0 : 0.0;
            auto i = index.at(model.binaries[b]);
            lp.lower(i) = lp.upper(i) = val;
        }
        auto res = solve_lp(lp);
        if (res.status != LpStatus::Optimal) continue;
        if (!best || (model.sense == Sense::Minimize ? res.value < *best : res.value > *best)) best = res.value;
    }
    return best;
}

}  // namespace nnbound
