#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "colombeau/errors.hpp"

namespace colombeau {

/// Ordered table of variable names. Order fixes coordinate indices everywhere
/// downstream, so it never changes after construction. `eps` is reserved and
/// never appears here.
class VarTable {
public:
    VarTable() = default;
    explicit VarTable(std::vector<std::string> names);

    int size() const { return static_cast<int>(names_.size()); }
    const std::string& name(int i) const { return names_[i]; }
    const std::vector<std::string>& names() const { return names_; }
    std::optional<int> index_of(const std::string& name) const;

private:
    std::vector<std::string> names_;
};

enum class ExprKind {
    Constant,
    Var,
    Epsilon,
    Neg,
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    SmoothAbs,   // sabs(x) = sqrt(x^2 + delta^2), delta = 1e-8
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    SmoothCases, // cases(g, e): e where |g| < 1, 0 elsewhere (bump-type node)
};

class Expr;

struct ExprNode {
    ExprKind kind;
    double value = 0.0; // Constant
    int var = -1;       // Var index
    std::string var_name;
    std::vector<Expr> kids;
};

/// Immutable expression tree. Copy is a cheap shared reference.
class Expr {
public:
    Expr() = default; // empty; never produced by the factories

    ExprKind kind() const { return node_->kind; }
    double value() const { return node_->value; }
    int var() const { return node_->var; }
    const std::string& var_name() const { return node_->var_name; }
    const std::vector<Expr>& kids() const { return node_->kids; }
    bool valid() const { return node_ != nullptr; }

    // factories (with constant folding and 0/1 absorption)
    static Expr constant(double c);
    static Expr variable(int index, std::string name);
    static Expr epsilon();
    static Expr neg(Expr a);
    static Expr sin(Expr a);
    static Expr cos(Expr a);
    static Expr exp(Expr a);
    static Expr log(Expr a);
    static Expr sqrt(Expr a);
    static Expr smooth_abs(Expr a);
    static Expr add(Expr a, Expr b);
    static Expr sub(Expr a, Expr b);
    static Expr mul(Expr a, Expr b);
    static Expr div(Expr a, Expr b);
    static Expr pow(Expr a, Expr b);
    static Expr smooth_cases(Expr gate, Expr inside);

    bool is_constant(double c) const {
        return kind() == ExprKind::Constant && value() == c;
    }

private:
    explicit Expr(std::shared_ptr<const ExprNode> n) : node_(std::move(n)) {}
    static Expr make(ExprNode n);
    std::shared_ptr<const ExprNode> node_;
};

/// Parse `text` against the documented grammar (docs/grammar.md). Free symbols
/// must resolve in `vars` or be `eps`/`pi`/a builtin function name.
Expr parse(const std::string& text, const VarTable& vars);

/// Deterministic fully-parenthesized rendering; reparsing yields a structurally
/// equal tree.
std::string print(const Expr& e);

/// IEEE double evaluation. Domain errors (log of nonpositive, division by
/// zero, fractional power of a negative) throw EvalError; overflow to +/-inf
/// is permitted.
double evaluate(const Expr& e, double eps, std::span<const double> point);

/// Exact symbolic partial derivative with respect to the variable at `var`.
Expr differentiate(const Expr& e, int var);
Expr differentiate(const Expr& e, const std::string& var, const VarTable& vars);

/// Replace occurrences of the given variables by expressions (indices refer to
/// the table the expression was built against).
Expr substitute(const Expr& e, const std::map<int, Expr>& replacements);

bool structurally_equal(const Expr& a, const Expr& b);

/// Variable indices referenced anywhere in the tree.
std::set<int> referenced_vars(const Expr& e);
bool references_eps(const Expr& e);

} // namespace colombeau
