#include "colombeau/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace colombeau {

namespace {
constexpr double kSmoothAbsDelta = 1e-8;
constexpr double kPi = 3.14159265358979323846;
} // namespace

VarTable::VarTable(std::vector<std::string> names) : names_(std::move(names)) {
    for (std::size_t i = 0; i < names_.size(); ++i) {
        if (names_[i] == "eps" || names_[i] == "pi")
            throw std::invalid_argument("'" + names_[i] + "' is reserved and cannot be a variable name");
        for (std::size_t j = i + 1; j < names_.size(); ++j)
            if (names_[i] == names_[j])
                throw std::invalid_argument("duplicate variable name '" + names_[i] + "'");
    }
}

std::optional<int> VarTable::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return static_cast<int>(i);
    return std::nullopt;
}

Expr Expr::make(ExprNode n) { return Expr(std::make_shared<const ExprNode>(std::move(n))); }

Expr Expr::constant(double c) { return make({ExprKind::Constant, c, -1, {}, {}}); }

Expr Expr::variable(int index, std::string name) {
    return make({ExprKind::Var, 0.0, index, std::move(name), {}});
}

Expr Expr::epsilon() { return make({ExprKind::Epsilon, 0.0, -1, {}, {}}); }

Expr Expr::neg(Expr a) {
    if (a.kind() == ExprKind::Constant) return constant(-a.value());
    if (a.kind() == ExprKind::Neg) return a.kids()[0];
    return make({ExprKind::Neg, 0.0, -1, {}, {std::move(a)}});
}

Expr Expr::sin(Expr a) {
    if (a.kind() == ExprKind::Constant) return constant(std::sin(a.value()));
    return make({ExprKind::Sin, 0.0, -1, {}, {std::move(a)}});
}

Expr Expr::cos(Expr a) {
    if (a.kind() == ExprKind::Constant) return constant(std::cos(a.value()));
    return make({ExprKind::Cos, 0.0, -1, {}, {std::move(a)}});
}

Expr Expr::exp(Expr a) {
    if (a.kind() == ExprKind::Constant) return constant(std::exp(a.value()));
    return make({ExprKind::Exp, 0.0, -1, {}, {std::move(a)}});
}

Expr Expr::log(Expr a) {
    return make({ExprKind::Log, 0.0, -1, {}, {std::move(a)}});
}

Expr Expr::sqrt(Expr a) {
    return make({ExprKind::Sqrt, 0.0, -1, {}, {std::move(a)}});
}

Expr Expr::smooth_abs(Expr a) {
    if (a.kind() == ExprKind::Constant)
        return constant(std::sqrt(a.value() * a.value() + kSmoothAbsDelta * kSmoothAbsDelta));
    return make({ExprKind::SmoothAbs, 0.0, -1, {}, {std::move(a)}});
}

Expr Expr::add(Expr a, Expr b) {
    if (a.kind() == ExprKind::Constant && b.kind() == ExprKind::Constant)
        return constant(a.value() + b.value());
    if (a.is_constant(0.0)) return b;
    if (b.is_constant(0.0)) return a;
    return make({ExprKind::Add, 0.0, -1, {}, {std::move(a), std::move(b)}});
}

Expr Expr::sub(Expr a, Expr b) {
    if (a.kind() == ExprKind::Constant && b.kind() == ExprKind::Constant)
        return constant(a.value() - b.value());
    if (b.is_constant(0.0)) return a;
    if (a.is_constant(0.0)) return neg(std::move(b));
    return make({ExprKind::Sub, 0.0, -1, {}, {std::move(a), std::move(b)}});
}

Expr Expr::mul(Expr a, Expr b) {
    if (a.kind() == ExprKind::Constant && b.kind() == ExprKind::Constant)
        return constant(a.value() * b.value());
    if (a.is_constant(0.0) || b.is_constant(0.0)) return constant(0.0);
    if (a.is_constant(1.0)) return b;
    if (b.is_constant(1.0)) return a;
    return make({ExprKind::Mul, 0.0, -1, {}, {std::move(a), std::move(b)}});
}

Expr Expr::div(Expr a, Expr b) {
    if (a.kind() == ExprKind::Constant && b.kind() == ExprKind::Constant && b.value() != 0.0)
        return constant(a.value() / b.value());
    if (a.is_constant(0.0)) return constant(0.0);
    if (b.is_constant(1.0)) return a;
    return make({ExprKind::Div, 0.0, -1, {}, {std::move(a), std::move(b)}});
}

Expr Expr::pow(Expr a, Expr b) {
    if (b.is_constant(1.0)) return a;
    if (b.is_constant(0.0)) return constant(1.0);
    if (a.kind() == ExprKind::Constant && b.kind() == ExprKind::Constant) {
        double base = a.value(), ex = b.value();
        bool ok = base > 0.0 || (base == 0.0 && ex > 0.0) ||
                  (base < 0.0 && ex == std::nearbyint(ex));
        if (ok) return constant(std::pow(base, ex));
    }
    return make({ExprKind::Pow, 0.0, -1, {}, {std::move(a), std::move(b)}});
}

Expr Expr::smooth_cases(Expr gate, Expr inside) {
    return make({ExprKind::SmoothCases, 0.0, -1, {}, {std::move(gate), std::move(inside)}});
}

// ---------------------------------------------------------------------------
// parser
// ---------------------------------------------------------------------------

namespace {

struct Parser {
    const std::string& s;
    const VarTable& vars;
    std::size_t at = 0;

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, at); }

    void skip_ws() {
        while (at < s.size() && std::isspace(static_cast<unsigned char>(s[at]))) ++at;
    }

    char peek() {
        skip_ws();
        return at < s.size() ? s[at] : '\0';
    }

    bool eat(char c) {
        if (peek() == c) {
            ++at;
            return true;
        }
        return false;
    }

    Expr parse_expr() {
        Expr a = parse_term();
        for (;;) {
            char c = peek();
            if (c == '+') {
                ++at;
                a = Expr::add(a, parse_term());
            } else if (c == '-') {
                ++at;
                a = Expr::sub(a, parse_term());
            } else {
                return a;
            }
        }
    }

    Expr parse_term() {
        Expr a = parse_unary();
        for (;;) {
            char c = peek();
            if (c == '*') {
                ++at;
                a = Expr::mul(a, parse_unary());
            } else if (c == '/') {
                ++at;
                a = Expr::div(a, parse_unary());
            } else {
                return a;
            }
        }
    }

    Expr parse_unary() {
        if (peek() == '-') {
            ++at;
            return Expr::neg(parse_unary());
        }
        return parse_power();
    }

    // `^` binds tighter than unary minus and is right-associative; the
    // exponent position accepts a sign, so eps^-2 parses as eps^(-2).
    Expr parse_power() {
        Expr a = parse_atom();
        if (peek() == '^') {
            ++at;
            Expr e = peek() == '-' ? (++at, Expr::neg(parse_power_operand())) : parse_power_operand();
            return Expr::pow(a, e);
        }
        return a;
    }

    Expr parse_power_operand() {
        Expr a = parse_atom();
        if (peek() == '^') {
            ++at;
            Expr e = peek() == '-' ? (++at, Expr::neg(parse_power_operand())) : parse_power_operand();
            return Expr::pow(a, e);
        }
        return a;
    }

    Expr parse_atom() {
        char c = peek();
        if (c == '(') {
            ++at;
            Expr e = parse_expr();
            if (!eat(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_symbol();
        if (c == '\0') fail("unexpected end of input");
        fail(std::string("unexpected character '") + c + "'");
    }

    Expr parse_number() {
        skip_ws();
        std::size_t start = at;
        while (at < s.size() && (std::isdigit(static_cast<unsigned char>(s[at])) || s[at] == '.')) ++at;
        if (at < s.size() && (s[at] == 'e' || s[at] == 'E')) {
            std::size_t save = at;
            ++at;
            if (at < s.size() && (s[at] == '+' || s[at] == '-')) ++at;
            if (at < s.size() && std::isdigit(static_cast<unsigned char>(s[at]))) {
                while (at < s.size() && std::isdigit(static_cast<unsigned char>(s[at]))) ++at;
            } else {
                at = save; // 'e' belongs to a following symbol, not this literal
            }
        }
        try {
            return Expr::constant(std::stod(s.substr(start, at - start)));
        } catch (const std::exception&) {
            at = start;
            fail("malformed number");
        }
    }

    Expr parse_symbol() {
        skip_ws();
        std::size_t start = at;
        while (at < s.size() &&
               (std::isalnum(static_cast<unsigned char>(s[at])) || s[at] == '_'))
            ++at;
        std::string name = s.substr(start, at - start);
        if (peek() == '(') return parse_call(name, start);
        if (name == "eps") return Expr::epsilon();
        if (name == "pi") return Expr::constant(kPi);
        if (auto idx = vars.index_of(name)) return Expr::variable(*idx, name);
        at = start;
        fail("unknown symbol '" + name + "'");
    }

    Expr parse_call(const std::string& name, std::size_t name_pos) {
        if (!eat('(')) fail("expected '('");
        std::vector<Expr> args;
        if (peek() != ')') {
            args.push_back(parse_expr());
            while (eat(',')) args.push_back(parse_expr());
        }
        if (!eat(')')) fail("expected ')'");
        auto arity = [&](std::size_t n) {
            if (args.size() != n) {
                at = name_pos;
                fail("'" + name + "' expects " + std::to_string(n) + " argument(s)");
            }
        };
        if (name == "sin") { arity(1); return Expr::sin(args[0]); }
        if (name == "cos") { arity(1); return Expr::cos(args[0]); }
        if (name == "exp") { arity(1); return Expr::exp(args[0]); }
        if (name == "log") { arity(1); return Expr::log(args[0]); }
        if (name == "sqrt") { arity(1); return Expr::sqrt(args[0]); }
        if (name == "sabs") { arity(1); return Expr::smooth_abs(args[0]); }
        if (name == "gauss") {
            arity(1);
            return Expr::exp(Expr::neg(Expr::mul(args[0], args[0])));
        }
        if (name == "bump") {
            arity(1);
            const Expr& r = args[0];
            Expr inside = Expr::exp(Expr::neg(
                Expr::div(Expr::constant(1.0), Expr::sub(Expr::constant(1.0), Expr::mul(r, r)))));
            return Expr::smooth_cases(r, inside);
        }
        if (name == "cases") { arity(2); return Expr::smooth_cases(args[0], args[1]); }
        at = name_pos;
        fail("unknown function '" + name + "'");
    }
};

} // namespace

Expr parse(const std::string& text, const VarTable& vars) {
    Parser p{text, vars};
    Expr e = p.parse_expr();
    p.skip_ws();
    if (p.at != text.size()) p.fail("trailing input");
    return e;
}

// ---------------------------------------------------------------------------
// printing
// ---------------------------------------------------------------------------

namespace {

void print_to(const Expr& e, std::string& out) {
    switch (e.kind()) {
        case ExprKind::Constant: {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", e.value());
            out += buf;
            break;
        }
        case ExprKind::Var: out += e.var_name(); break;
        case ExprKind::Epsilon: out += "eps"; break;
        case ExprKind::Neg:
            out += "(-";
            print_to(e.kids()[0], out);
            out += ')';
            break;
        case ExprKind::Sin:
        case ExprKind::Cos:
        case ExprKind::Exp:
        case ExprKind::Log:
        case ExprKind::Sqrt:
        case ExprKind::SmoothAbs: {
            const char* fn = e.kind() == ExprKind::Sin   ? "sin"
                             : e.kind() == ExprKind::Cos ? "cos"
                             : e.kind() == ExprKind::Exp ? "exp"
                             : e.kind() == ExprKind::Log ? "log"
                             : e.kind() == ExprKind::Sqrt ? "sqrt"
                                                          : "sabs";
            out += fn;
            out += '(';
            print_to(e.kids()[0], out);
            out += ')';
            break;
        }
        case ExprKind::Add:
        case ExprKind::Sub:
        case ExprKind::Mul:
        case ExprKind::Div:
        case ExprKind::Pow: {
            char op = e.kind() == ExprKind::Add   ? '+'
                      : e.kind() == ExprKind::Sub ? '-'
                      : e.kind() == ExprKind::Mul ? '*'
                      : e.kind() == ExprKind::Div ? '/'
                                                  : '^';
            out += '(';
            print_to(e.kids()[0], out);
            out += op;
            print_to(e.kids()[1], out);
            out += ')';
            break;
        }
        case ExprKind::SmoothCases:
            out += "cases(";
            print_to(e.kids()[0], out);
            out += ',';
            print_to(e.kids()[1], out);
            out += ')';
            break;
    }
}

} // namespace

std::string print(const Expr& e) {
    std::string out;
    print_to(e, out);
    return out;
}

// ---------------------------------------------------------------------------
// evaluation
// ---------------------------------------------------------------------------

double evaluate(const Expr& e, double eps, std::span<const double> point) {
    switch (e.kind()) {
        case ExprKind::Constant: return e.value();
        case ExprKind::Var: {
            int i = e.var();
            if (i < 0 || i >= static_cast<int>(point.size()))
                throw EvalError("variable '" + e.var_name() + "' has no value at evaluation point");
            return point[i];
        }
        case ExprKind::Epsilon: return eps;
        case ExprKind::Neg: return -evaluate(e.kids()[0], eps, point);
        case ExprKind::Sin: return std::sin(evaluate(e.kids()[0], eps, point));
        case ExprKind::Cos: return std::cos(evaluate(e.kids()[0], eps, point));
        case ExprKind::Exp: return std::exp(evaluate(e.kids()[0], eps, point));
        case ExprKind::Log: {
            double v = evaluate(e.kids()[0], eps, point);
            if (v <= 0.0) throw EvalError("log of nonpositive value " + std::to_string(v));
            return std::log(v);
        }
        case ExprKind::Sqrt: {
            double v = evaluate(e.kids()[0], eps, point);
            if (v < 0.0) throw EvalError("sqrt of negative value " + std::to_string(v));
            return std::sqrt(v);
        }
        case ExprKind::SmoothAbs: {
            double v = evaluate(e.kids()[0], eps, point);
            return std::sqrt(v * v + kSmoothAbsDelta * kSmoothAbsDelta);
        }
        case ExprKind::Add:
            return evaluate(e.kids()[0], eps, point) + evaluate(e.kids()[1], eps, point);
        case ExprKind::Sub:
            return evaluate(e.kids()[0], eps, point) - evaluate(e.kids()[1], eps, point);
        case ExprKind::Mul:
            return evaluate(e.kids()[0], eps, point) * evaluate(e.kids()[1], eps, point);
        case ExprKind::Div: {
            double num = evaluate(e.kids()[0], eps, point);
            double den = evaluate(e.kids()[1], eps, point);
            if (den == 0.0) throw EvalError("division by zero");
            return num / den;
        }
        case ExprKind::Pow: {
            double base = evaluate(e.kids()[0], eps, point);
            double ex = evaluate(e.kids()[1], eps, point);
            if (base == 0.0 && ex < 0.0) throw EvalError("zero raised to negative power");
            if (base < 0.0 && ex != std::nearbyint(ex))
                throw EvalError("fractional power of negative base");
            return std::pow(base, ex);
        }
        case ExprKind::SmoothCases: {
            double g = evaluate(e.kids()[0], eps, point);
            if (std::fabs(g) < 1.0) return evaluate(e.kids()[1], eps, point);
            return 0.0;
        }
    }
    throw EvalError("corrupt expression node");
}

// ---------------------------------------------------------------------------
// differentiation
// ---------------------------------------------------------------------------

Expr differentiate(const Expr& e, int var) {
    using E = Expr;
    switch (e.kind()) {
        case ExprKind::Constant:
        case ExprKind::Epsilon: return E::constant(0.0);
        case ExprKind::Var: return E::constant(e.var() == var ? 1.0 : 0.0);
        case ExprKind::Neg: return E::neg(differentiate(e.kids()[0], var));
        case ExprKind::Sin:
            return E::mul(E::cos(e.kids()[0]), differentiate(e.kids()[0], var));
        case ExprKind::Cos:
            return E::mul(E::neg(E::sin(e.kids()[0])), differentiate(e.kids()[0], var));
        case ExprKind::Exp: return E::mul(e, differentiate(e.kids()[0], var));
        case ExprKind::Log: return E::div(differentiate(e.kids()[0], var), e.kids()[0]);
        case ExprKind::Sqrt:
            return E::div(differentiate(e.kids()[0], var), E::mul(E::constant(2.0), e));
        case ExprKind::SmoothAbs:
            // d sabs(u) = u/sabs(u) * u'
            return E::mul(E::div(e.kids()[0], e), differentiate(e.kids()[0], var));
        case ExprKind::Add:
            return E::add(differentiate(e.kids()[0], var), differentiate(e.kids()[1], var));
        case ExprKind::Sub:
            return E::sub(differentiate(e.kids()[0], var), differentiate(e.kids()[1], var));
        case ExprKind::Mul:
            return E::add(E::mul(differentiate(e.kids()[0], var), e.kids()[1]),
                          E::mul(e.kids()[0], differentiate(e.kids()[1], var)));
        case ExprKind::Div: {
            const Expr& a = e.kids()[0];
            const Expr& b = e.kids()[1];
            return E::div(E::sub(E::mul(differentiate(a, var), b), E::mul(a, differentiate(b, var))),
                          E::mul(b, b));
        }
        case ExprKind::Pow: {
            const Expr& a = e.kids()[0];
            const Expr& b = e.kids()[1];
            Expr da = differentiate(a, var);
            Expr db = differentiate(b, var);
            if (b.kind() == ExprKind::Constant)
                return E::mul(E::mul(b, E::pow(a, E::constant(b.value() - 1.0))), da);
            if (db.is_constant(0.0))
                return E::mul(E::mul(b, E::pow(a, E::sub(b, E::constant(1.0)))), da);
            // general a^b: a^b * (b' log a + b a'/a)
            return E::mul(e, E::add(E::mul(db, E::log(a)), E::mul(b, E::div(da, a))));
        }
        case ExprKind::SmoothCases:
            // valid because the inside factors through the bump ideal: it and
            // all its derivatives vanish when |gate| -> 1
            return E::smooth_cases(e.kids()[0], differentiate(e.kids()[1], var));
    }
    throw EvalError("corrupt expression node");
}

Expr differentiate(const Expr& e, const std::string& var, const VarTable& vars) {
    auto idx = vars.index_of(var);
    if (!idx) throw EvalError("cannot differentiate with respect to undeclared variable '" + var + "'");
    return differentiate(e, *idx);
}

Expr substitute(const Expr& e, const std::map<int, Expr>& replacements) {
    using E = Expr;
    switch (e.kind()) {
        case ExprKind::Constant:
        case ExprKind::Epsilon: return e;
        case ExprKind::Var: {
            auto it = replacements.find(e.var());
            return it == replacements.end() ? e : it->second;
        }
        default: break;
    }
    std::vector<Expr> ks;
    ks.reserve(e.kids().size());
    for (const Expr& k : e.kids()) ks.push_back(substitute(k, replacements));
    switch (e.kind()) {
        case ExprKind::Neg: return E::neg(ks[0]);
        case ExprKind::Sin: return E::sin(ks[0]);
        case ExprKind::Cos: return E::cos(ks[0]);
        case ExprKind::Exp: return E::exp(ks[0]);
        case ExprKind::Log: return E::log(ks[0]);
        case ExprKind::Sqrt: return E::sqrt(ks[0]);
        case ExprKind::SmoothAbs: return E::smooth_abs(ks[0]);
        case ExprKind::Add: return E::add(ks[0], ks[1]);
        case ExprKind::Sub: return E::sub(ks[0], ks[1]);
        case ExprKind::Mul: return E::mul(ks[0], ks[1]);
        case ExprKind::Div: return E::div(ks[0], ks[1]);
        case ExprKind::Pow: return E::pow(ks[0], ks[1]);
        case ExprKind::SmoothCases: return E::smooth_cases(ks[0], ks[1]);
        default: break;
    }
    throw EvalError("corrupt expression node");
}

bool structurally_equal(const Expr& a, const Expr& b) {
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
        case ExprKind::Constant: return a.value() == b.value();
        case ExprKind::Var: return a.var() == b.var() && a.var_name() == b.var_name();
        default: break;
    }
    if (a.kids().size() != b.kids().size()) return false;
    for (std::size_t i = 0; i < a.kids().size(); ++i)
        if (!structurally_equal(a.kids()[i], b.kids()[i])) return false;
    return true;
}

namespace {
void collect_vars(const Expr& e, std::set<int>& out) {
    if (e.kind() == ExprKind::Var) out.insert(e.var());
    for (const Expr& k : e.kids()) collect_vars(k, out);
}
} // namespace

std::set<int> referenced_vars(const Expr& e) {
    std::set<int> out;
    collect_vars(e, out);
    return out;
}

bool references_eps(const Expr& e) {
    if (e.kind() == ExprKind::Epsilon) return true;
    for (const Expr& k : e.kids())
        if (references_eps(k)) return true;
    return false;
}

} // namespace colombeau
