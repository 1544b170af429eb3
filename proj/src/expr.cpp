#include "levta/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <sstream>

namespace levta {

ParseError::ParseError(const std::string& msg, std::size_t position)
    : std::runtime_error(msg + " (at position " + std::to_string(position) + ")"),
      position_(position) {}

EvalError::EvalError(const std::string& msg, const std::string& subexpression)
    : std::runtime_error(msg + " in '" + subexpression + "'"),
      subexpression_(subexpression) {}

// ── Node ────────────────────────────────────────────────────────────────────

struct Expr::Node {
    ExprKind kind;
    double value = 0.0;    // Constant value or Pow exponent
    int var = 0;           // Var index
    UnaryFn fn = UnaryFn::Sin;
    std::shared_ptr<const Node> a, b, c;
};

namespace {

bool is_const(const Expr& e, double v) {
    return e.kind() == ExprKind::Constant && e.constant_value() == v;
}

}  // namespace

Expr::Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Expr::Expr() : Expr(constant(0.0)) {}

Expr Expr::constant(double value) {
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::Constant;
    n->value = value;
    return Expr(std::move(n));
}

Expr Expr::var(int index) {
    if (index < 1) throw std::invalid_argument("variable index must be >= 1");
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::Var;
    n->var = index;
    return Expr(std::move(n));
}

Expr Expr::neg(Expr e) {
    if (e.node_->kind == ExprKind::Constant) return constant(-e.node_->value);
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::Neg;
    n->a = e.node_;
    return Expr(std::move(n));
}

Expr Expr::add(Expr lhs, Expr rhs) {
    if (lhs.node_->kind == ExprKind::Constant && rhs.node_->kind == ExprKind::Constant)
        return constant(lhs.node_->value + rhs.node_->value);
    if (is_const(lhs, 0.0)) return rhs;
    if (is_const(rhs, 0.0)) return lhs;
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::Add;
    n->a = lhs.node_;
    n->b = rhs.node_;
    return Expr(std::move(n));
}

Expr Expr::sub(Expr lhs, Expr rhs) {
    if (lhs.node_->kind == ExprKind::Constant && rhs.node_->kind == ExprKind::Constant)
        return constant(lhs.node_->value - rhs.node_->value);
    if (is_const(rhs, 0.0)) return lhs;
    if (is_const(lhs, 0.0)) return neg(rhs);
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::Sub;
    n->a = lhs.node_;
    n->b = rhs.node_;
    return Expr(std::move(n));
}

Expr Expr::mul(Expr lhs, Expr rhs) {
    if (lhs.node_->kind == ExprKind::Constant && rhs.node_->kind == ExprKind::Constant)
        return constant(lhs.node_->value * rhs.node_->value);
    if (is_const(lhs, 0.0) || is_const(rhs, 0.0)) return constant(0.0);
    if (is_const(lhs, 1.0)) return rhs;
    if (is_const(rhs, 1.0)) return lhs;
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::Mul;
    n->a = lhs.node_;
    n->b = rhs.node_;
    return Expr(std::move(n));
}

Expr Expr::div(Expr lhs, Expr rhs) {
    if (lhs.node_->kind == ExprKind::Constant && rhs.node_->kind == ExprKind::Constant &&
        rhs.node_->value != 0.0)
        return constant(lhs.node_->value / rhs.node_->value);
    if (is_const(rhs, 1.0)) return lhs;
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::Div;
    n->a = lhs.node_;
    n->b = rhs.node_;
    return Expr(std::move(n));
}

Expr Expr::pow(Expr base, double exponent) {
    // The grammar has no negative exponents; represent them as divisions.
    if (exponent < 0.0) return div(constant(1.0), pow(std::move(base), -exponent));
    if (exponent == 0.0) return constant(1.0);
    if (exponent == 1.0) return base;
    if (base.node_->kind == ExprKind::Constant)
        return constant(std::pow(base.node_->value, exponent));
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::Pow;
    n->value = exponent;
    n->a = base.node_;
    return Expr(std::move(n));
}

Expr Expr::call(UnaryFn fn, Expr arg) {
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::Call;
    n->fn = fn;
    n->a = arg.node_;
    return Expr(std::move(n));
}

Expr Expr::if_pos(Expr cond, Expr then_branch, Expr else_branch) {
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::IfPos;
    n->a = cond.node_;
    n->b = then_branch.node_;
    n->c = else_branch.node_;
    return Expr(std::move(n));
}

ExprKind Expr::kind() const { return node_->kind; }
double Expr::constant_value() const { return node_->value; }
int Expr::var_index() const { return node_->var; }
double Expr::exponent() const { return node_->value; }
UnaryFn Expr::fn() const { return node_->fn; }

int Expr::child_count() const {
    if (node_->c) return 3;
    if (node_->b) return 2;
    if (node_->a) return 1;
    return 0;
}

Expr Expr::child(int i) const {
    switch (i) {
        case 0: return Expr(node_->a);
        case 1: return Expr(node_->b);
        case 2: return Expr(node_->c);
        default: throw std::out_of_range("Expr::child");
    }
}

int Expr::max_var_index() const {
    int m = node_->kind == ExprKind::Var ? node_->var : 0;
    for (const auto& ch : {node_->a, node_->b, node_->c})
        if (ch) m = std::max(m, Expr(ch).max_var_index());
    return m;
}

// ── Evaluation ──────────────────────────────────────────────────────────────

double Expr::eval(std::span<const double> point) const {
    const Node& n = *node_;
    switch (n.kind) {
        case ExprKind::Constant:
            return n.value;
        case ExprKind::Var:
            if (n.var > static_cast<int>(point.size()))
                throw EvalError("point dimension too small", str());
            return point[static_cast<std::size_t>(n.var - 1)];
        case ExprKind::Neg:
            return -Expr(n.a).eval(point);
        case ExprKind::Add:
            return Expr(n.a).eval(point) + Expr(n.b).eval(point);
        case ExprKind::Sub:
            return Expr(n.a).eval(point) - Expr(n.b).eval(point);
        case ExprKind::Mul:
            return Expr(n.a).eval(point) * Expr(n.b).eval(point);
        case ExprKind::Div: {
            double num = Expr(n.a).eval(point);
            double den = Expr(n.b).eval(point);
            if (den == 0.0) throw EvalError("division by zero", str());
            return num / den;
        }
        case ExprKind::Pow: {
            double base = Expr(n.a).eval(point);
            if (base < 0.0 && n.value != std::floor(n.value))
                throw EvalError("fractional power of a negative base", str());
            return std::pow(base, n.value);
        }
        case ExprKind::Call: {
            double a = Expr(n.a).eval(point);
            switch (n.fn) {
                case UnaryFn::Sin: return std::sin(a);
                case UnaryFn::Cos: return std::cos(a);
                case UnaryFn::Exp: return std::exp(a);
                case UnaryFn::Ln:
                    if (a <= 0.0) throw EvalError("log of a nonpositive number", str());
                    return std::log(a);
                case UnaryFn::Sqrt:
                    if (a < 0.0) throw EvalError("square root of a negative number", str());
                    return std::sqrt(a);
                case UnaryFn::Tanh: return std::tanh(a);
            }
            throw EvalError("unknown function", str());
        }
        case ExprKind::IfPos:
            // Lazy: only the taken branch is evaluated.
            return Expr(n.a).eval(point) > 0.0 ? Expr(n.b).eval(point)
                                               : Expr(n.c).eval(point);
    }
    throw EvalError("corrupt expression node", "?");
}

// ── Differentiation ─────────────────────────────────────────────────────────

Expr Expr::derivative(int var_index) const {
    if (var_index < 1) throw std::invalid_argument("variable index must be >= 1");
    const Node& n = *node_;
    auto d = [var_index](const std::shared_ptr<const Node>& p) { return Expr(p).derivative(var_index); };
    switch (n.kind) {
        case ExprKind::Constant:
            return constant(0.0);
        case ExprKind::Var:
            return constant(n.var == var_index ? 1.0 : 0.0);
        case ExprKind::Neg:
            return neg(d(n.a));
        case ExprKind::Add:
            return add(d(n.a), d(n.b));
        case ExprKind::Sub:
            return sub(d(n.a), d(n.b));
        case ExprKind::Mul:
            return add(mul(d(n.a), Expr(n.b)), mul(Expr(n.a), d(n.b)));
        case ExprKind::Div:
            return div(sub(mul(d(n.a), Expr(n.b)), mul(Expr(n.a), d(n.b))),
                       pow(Expr(n.b), 2.0));
        case ExprKind::Pow:
            // d/dx u^c = c * u^(c-1) * u'
            return mul(mul(constant(n.value), pow(Expr(n.a), n.value - 1.0)), d(n.a));
        case ExprKind::Call: {
            Expr u(n.a);
            Expr du = d(n.a);
            switch (n.fn) {
                case UnaryFn::Sin: return mul(call(UnaryFn::Cos, u), du);
                case UnaryFn::Cos: return neg(mul(call(UnaryFn::Sin, u), du));
                case UnaryFn::Exp: return mul(call(UnaryFn::Exp, u), du);
                case UnaryFn::Ln: return div(du, u);
                case UnaryFn::Sqrt:
                    return div(du, mul(constant(2.0), call(UnaryFn::Sqrt, u)));
                case UnaryFn::Tanh:
                    return mul(sub(constant(1.0), pow(call(UnaryFn::Tanh, u), 2.0)), du);
            }
            throw std::logic_error("unknown function");
        }
        case ExprKind::IfPos:
            // Branch-wise; valid away from the switching surface cond = 0.
            return if_pos(Expr(n.a), d(n.b), d(n.c));
    }
    throw std::logic_error("corrupt expression node");
}

// ── Printing ────────────────────────────────────────────────────────────────

const char* fn_name(UnaryFn fn) {
    switch (fn) {
        case UnaryFn::Sin: return "sin";
        case UnaryFn::Cos: return "cos";
        case UnaryFn::Exp: return "exp";
        case UnaryFn::Ln: return "ln";
        case UnaryFn::Sqrt: return "sqrt";
        case UnaryFn::Tanh: return "tanh";
    }
    return "?";
}

namespace {

/// Shortest decimal string that parses back to exactly v.
std::string format_double(double v) {
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        double back = 0.0;
        auto [p, ec] = std::from_chars(buf, buf + std::strlen(buf), back);
        (void)p;
        if (ec == std::errc() && back == v) break;
    }
    return buf;
}

int precedence(ExprKind k) {
    switch (k) {
        case ExprKind::Add:
        case ExprKind::Sub: return 1;
        case ExprKind::Mul:
        case ExprKind::Div: return 2;
        case ExprKind::Neg: return 3;
        case ExprKind::Pow: return 4;
        default: return 5;
    }
}

void print_node(const Expr& e, std::ostringstream& out, int parent_prec) {
    int prec = precedence(e.kind());
    bool parens = prec < parent_prec;
    if (parens) out << '(';
    switch (e.kind()) {
        case ExprKind::Constant: {
            double v = e.constant_value();
            if (v < 0.0) {
                // Negative literals are not in the grammar; print as negation.
                if (!parens && parent_prec > 3) out << '(';
                out << '-' << format_double(-v);
                if (!parens && parent_prec > 3) out << ')';
            } else {
                out << format_double(v);
            }
            break;
        }
        case ExprKind::Var:
            out << 'x' << e.var_index();
            break;
        case ExprKind::Neg:
            out << '-';
            print_node(e.child(0), out, 4);
            break;
        case ExprKind::Add:
            print_node(e.child(0), out, 1);
            out << " + ";
            print_node(e.child(1), out, 2);
            break;
        case ExprKind::Sub:
            print_node(e.child(0), out, 1);
            out << " - ";
            print_node(e.child(1), out, 2);
            break;
        case ExprKind::Mul:
            print_node(e.child(0), out, 2);
            out << "*";
            print_node(e.child(1), out, 3);
            break;
        case ExprKind::Div:
            print_node(e.child(0), out, 2);
            out << "/";
            print_node(e.child(1), out, 3);
            break;
        case ExprKind::Pow:
            print_node(e.child(0), out, 5);
            out << '^' << format_double(e.exponent());
            break;
        case ExprKind::Call:
            out << fn_name(e.fn()) << '(';
            print_node(e.child(0), out, 0);
            out << ')';
            break;
        case ExprKind::IfPos:
            out << "ifpos(";
            print_node(e.child(0), out, 0);
            out << ", ";
            print_node(e.child(1), out, 0);
            out << ", ";
            print_node(e.child(2), out, 0);
            out << ')';
            break;
    }
    if (parens) out << ')';
}

}  // namespace

std::string Expr::str() const {
    std::ostringstream out;
    print_node(*this, out, 0);
    return out.str();
}

// ── Parser ──────────────────────────────────────────────────────────────────

namespace {

class Parser {
public:
    Parser(std::string_view src, int dim) : src_(src), dim_(dim) {}

    Expr parse() {
        Expr e = expr();
        skip_ws();
        if (pos_ != src_.size())
            throw ParseError("unexpected trailing input", pos_);
        return e;
    }

private:
    std::string_view src_;
    int dim_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
            ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    Expr expr() {
        Expr e = term();
        for (;;) {
            if (eat('+')) e = Expr::add(e, term());
            else if (eat('-')) e = Expr::sub(e, term());
            else return e;
        }
    }

    Expr term() {
        Expr e = factor();
        for (;;) {
            if (eat('*')) e = Expr::mul(e, factor());
            else if (eat('/')) e = Expr::div(e, factor());
            else return e;
        }
    }

    Expr factor() {
        bool negate = eat('-');
        Expr e = atom();
        if (eat('^')) {
            skip_ws();
            std::size_t at = pos_;
            if (pos_ >= src_.size() ||
                !(std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
                throw ParseError("exponent must be a numeric constant", at);
            e = Expr::pow(e, number());
        }
        return negate ? Expr::neg(e) : e;
    }

    double number() {
        skip_ws();
        double value = 0.0;
        auto [p, ec] = std::from_chars(src_.data() + pos_, src_.data() + src_.size(), value);
        if (ec != std::errc() || p == src_.data() + pos_)
            throw ParseError("expected a number", pos_);
        pos_ = static_cast<std::size_t>(p - src_.data());
        return value;
    }

    std::string ident() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        return std::string(src_.substr(start, pos_ - start));
    }

    Expr atom() {
        skip_ws();
        if (pos_ >= src_.size()) throw ParseError("unexpected end of input", pos_);
        char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return Expr::constant(number());
        if (c == '(') {
            ++pos_;
            Expr e = expr();
            if (!eat(')')) throw ParseError("expected ')'", pos_);
            return e;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t at = pos_;
            std::string name = ident();
            if (name.size() >= 2 && name[0] == 'x' &&
                std::all_of(name.begin() + 1, name.end(),
                            [](char d) { return std::isdigit(static_cast<unsigned char>(d)); })) {
                int index = std::stoi(name.substr(1));
                if (index < 1 || index > dim_)
                    throw ParseError("variable " + name + " out of range for dimension " +
                                         std::to_string(dim_),
                                     at);
                return Expr::var(index);
            }
            if (name == "ifpos") {
                if (!eat('(')) throw ParseError("expected '(' after ifpos", pos_);
                Expr cond = expr();
                if (!eat(',')) throw ParseError("expected ',' in ifpos", pos_);
                Expr then_b = expr();
                if (!eat(',')) throw ParseError("expected ',' in ifpos", pos_);
                Expr else_b = expr();
                if (!eat(')')) throw ParseError("expected ')' after ifpos", pos_);
                return Expr::if_pos(cond, then_b, else_b);
            }
            for (UnaryFn fn : {UnaryFn::Sin, UnaryFn::Cos, UnaryFn::Exp, UnaryFn::Ln,
                               UnaryFn::Sqrt, UnaryFn::Tanh}) {
                if (name == fn_name(fn)) {
                    if (!eat('(')) throw ParseError("expected '(' after " + name, pos_);
                    Expr arg = expr();
                    if (!eat(')')) throw ParseError("expected ')'", pos_);
                    return Expr::call(fn, arg);
                }
            }
            throw ParseError("unknown identifier '" + name + "'", at);
        }
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }
};

}  // namespace

Expr parse_expr(std::string_view source, int dim) {
    if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
    return Parser(source, dim).parse();
}

std::vector<Expr> gradient(const Expr& phi, int dim) {
    std::vector<Expr> g;
    g.reserve(static_cast<std::size_t>(dim));
    for (int i = 1; i <= dim; ++i) g.push_back(phi.derivative(i));
    return g;
}

Expr lie_derivative(const Expr& phi, std::span<const Expr> field) {
    Expr psi = Expr::constant(0.0);
    for (std::size_t j = 0; j < field.size(); ++j)
        psi = Expr::add(psi, Expr::mul(phi.derivative(static_cast<int>(j) + 1), field[j]));
    return psi;
}

}  // namespace levta
