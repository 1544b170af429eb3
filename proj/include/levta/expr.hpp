// ============================================================================
// levta/expr.hpp — expression language for vector fields and partitioning
// functions: parsing, evaluation, symbolic differentiation, Lie derivatives
// ============================================================================

#ifndef LEVTA_EXPR_HPP
#define LEVTA_EXPR_HPP

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace levta {

// ── Errors ──────────────────────────────────────────────────────────────────

/// Syntax or semantic error while parsing an expression.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, std::size_t position);
    /// 0-based character offset into the source text.
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

/// Domain violation during evaluation (log of a nonpositive number,
/// square root of a negative number, division by zero).
class EvalError : public std::runtime_error {
public:
    EvalError(const std::string& msg, const std::string& subexpression);
    /// Printed form of the offending subexpression.
    const std::string& subexpression() const { return subexpression_; }

private:
    std::string subexpression_;
};

// ── Expr ────────────────────────────────────────────────────────────────────

enum class ExprKind {
    Constant,  // real literal
    Var,       // x<i>, 1-based index
    Neg,
    Add,
    Sub,
    Mul,
    Div,
    Pow,       // base ^ constant exponent
    Call,      // unary builtin
    IfPos      // ifpos(cond, then, else): then iff cond > 0
};

enum class UnaryFn { Sin, Cos, Exp, Ln, Sqrt, Tanh };

/// Immutable expression tree with value semantics. Copies share nodes;
/// all operations are const and safe to call concurrently.
class Expr {
public:
    /// Default-constructed expression is the constant 0.
    Expr();

    static Expr constant(double value);
    static Expr var(int index);  // 1-based
    static Expr neg(Expr e);
    static Expr add(Expr lhs, Expr rhs);
    static Expr sub(Expr lhs, Expr rhs);
    static Expr mul(Expr lhs, Expr rhs);
    static Expr div(Expr lhs, Expr rhs);
    static Expr pow(Expr base, double exponent);
    static Expr call(UnaryFn fn, Expr arg);
    static Expr if_pos(Expr cond, Expr then_branch, Expr else_branch);

    ExprKind kind() const;
    double constant_value() const;  // Constant nodes
    int var_index() const;          // Var nodes
    double exponent() const;        // Pow nodes
    UnaryFn fn() const;             // Call nodes
    int child_count() const;
    Expr child(int i) const;

    /// Largest variable index referenced (0 for constant expressions).
    int max_var_index() const;

    /// Evaluate at a point. point[i] is the value of x<i+1>.
    /// Throws EvalError on domain violations.
    double eval(std::span<const double> point) const;

    /// Symbolic partial derivative with respect to x<var_index>.
    /// IfPos differentiates branch-wise (valid away from the switching
    /// surface).
    Expr derivative(int var_index) const;

    /// Infix form, reparseable by parse_expr.
    std::string str() const;

private:
    struct Node;
    explicit Expr(std::shared_ptr<const Node> node);
    std::shared_ptr<const Node> node_;
};

// ── Free functions ──────────────────────────────────────────────────────────

/// Parse the expression grammar:
///   expr   := term (("+"|"-") term)*
///   term   := factor (("*"|"/") factor)*
///   factor := ("-")? atom ("^" number)?
///   atom   := number | ident | fn "(" expr ")"
///           | "ifpos" "(" expr "," expr "," expr ")" | "(" expr ")"
///   ident  := "x" digit+
///   fn     := "sin"|"cos"|"exp"|"ln"|"sqrt"|"tanh"
/// Variable indices are checked against dim. Throws ParseError.
Expr parse_expr(std::string_view source, int dim);

/// (d/dx1 phi, ..., d/dxn phi)
std::vector<Expr> gradient(const Expr& phi, int dim);

/// Lie derivative psi = sum_j (d phi / d x_j) * f_j.
Expr lie_derivative(const Expr& phi, std::span<const Expr> field);

const char* fn_name(UnaryFn fn);

}  // namespace levta

#endif  // LEVTA_EXPR_HPP
