#ifndef FITK_EXPR_HPP
#define FITK_EXPR_HPP

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fitk/rational.hpp"

namespace fitk {

enum class NodeType : unsigned char { Number, Symbol, Add, Mul, Pow, Call };
enum class Func : unsigned char { Exp, Ln, Sin, Cos };

struct ExprNode;

// Immutable symbolic expression. Construction always canonicalizes:
// constants fold exactly, add/mul flatten and collect like terms, powers of a
// common base merge. A default-constructed Expr is the constant 0.
class Expr {
public:
    Expr();

    static Expr number(const Rational& r);
    static Expr number(long long n) { return number(Rational(n)); }
    static Expr number(double v);  // non-exact literal
    static Expr symbol(const std::string& name);

    static Expr add(std::vector<Expr> ops);
    static Expr mul(std::vector<Expr> ops);
    static Expr pow(const Expr& base, const Rational& exponent);
    static Expr call(Func f, const Expr& arg);

    friend Expr operator+(const Expr& a, const Expr& b) { return add({a, b}); }
    friend Expr operator-(const Expr& a, const Expr& b);
    friend Expr operator*(const Expr& a, const Expr& b) { return mul({a, b}); }
    friend Expr operator/(const Expr& a, const Expr& b);
    Expr operator-() const;

    const ExprNode& node() const { return *p_; }
    NodeType type() const;
    bool is_zero() const;
    bool is_one() const;
    bool is_number() const { return type() == NodeType::Number; }
    // Exact rational value if this is an exact Number node.
    std::optional<Rational> exact_value() const;
    std::optional<double> numeric_value() const;

    std::size_t hash() const;
    bool same(const Expr& o) const;           // structural equality
    static int compare(const Expr& a, const Expr& b);  // total order

    std::string str() const;

private:
    explicit Expr(std::shared_ptr<const ExprNode> p) : p_(std::move(p)) {}
    std::shared_ptr<const ExprNode> p_;
    friend struct ExprFactory;
};

struct ExprNode {
    NodeType type;
    Func func = Func::Exp;     // Call
    bool exact = false;        // Number
    Rational rat;              // Number (exact) / Pow exponent
    double num = 0.0;          // Number cached double
    std::string name;          // Symbol
    std::vector<Expr> kids;    // Add/Mul operands, Pow base, Call arg
    std::size_t hash = 0;
};

// -- Convenience builders ----------------------------------------------------

inline Expr exp_of(const Expr& e) { return Expr::call(Func::Exp, e); }
inline Expr ln_of(const Expr& e) { return Expr::call(Func::Ln, e); }
inline Expr sin_of(const Expr& e) { return Expr::call(Func::Sin, e); }
inline Expr cos_of(const Expr& e) { return Expr::call(Func::Cos, e); }
inline Expr sqrt_of(const Expr& e) { return Expr::pow(e, Rational(1, 2)); }

// -- Errors -------------------------------------------------------------------

struct EvalError : std::runtime_error {
    EvalError(const std::string& what, const std::string& subtree)
        : std::runtime_error(what + " in `" + subtree + "`"), subtree(subtree) {}
    std::string subtree;
};

// -- Core operations ----------------------------------------------------------

using Binding = std::map<std::string, double>;

// Recursive evaluation; throws EvalError on unbound symbols, division by zero,
// and domain errors, naming the offending subtree.
double eval(const Expr& e, const Binding& b);

// Exact partial derivative with respect to `var`; any other symbol is constant.
Expr diff(const Expr& e, const std::string& var);

// Re-canonicalizes bottom-up. Construction already canonicalizes, so this is a
// fixed point: simplify(simplify(e)) == simplify(e) structurally.
Expr simplify(const Expr& e);

Expr substitute(const Expr& e, const std::map<std::string, Expr>& repl);

void collect_symbols(const Expr& e, std::set<std::string>& out);
std::set<std::string> free_symbols(const Expr& e);

// Sum of absolute values of all additive constituents at a point; used as the
// cancellation-magnitude scale for thresholded zero tests.
double magnitude_scale(const Expr& e, const Binding& b);

// -- Compiled evaluation ------------------------------------------------------

// Flat postfix program over a caller-owned slot vector; slot i holds the value
// of symbols[i]. Much cheaper than tree-walking in the integrator loop.
class CompiledExpr {
public:
    CompiledExpr() = default;
    static CompiledExpr compile(const Expr& e, const std::vector<std::string>& symbols);
    double eval(std::span<const double> slots) const;

private:
    enum class OpCode : unsigned char {
        PushConst, PushSlot, AddN, MulN, PowInt, PowReal, CallExp, CallLn, CallSin, CallCos
    };
    struct Ins {
        OpCode op;
        int arg = 0;
        double cst = 0.0;
    };
    std::vector<Ins> prog_;
    mutable std::vector<double> stack_;
};

}  // namespace fitk

#endif
