#ifndef FITK_POLYNOMIAL_HPP
#define FITK_POLYNOMIAL_HPP

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fitk/expr.hpp"

namespace fitk {

// Exponent vector over a fixed, externally owned variable list.
using Monomial = std::vector<unsigned>;

// Sparse multivariate polynomial with exact rational coefficients.
// Invariants: no zero coefficients stored; every key has nvars entries.
class Polynomial {
public:
    explicit Polynomial(std::size_t nvars) : nvars_(nvars) {}
    static Polynomial constant(std::size_t nvars, const Rational& c);
    static Polynomial variable(std::size_t nvars, std::size_t index);

    std::size_t nvars() const { return nvars_; }
    bool is_zero() const { return terms_.empty(); }
    const std::map<Monomial, Rational>& terms() const { return terms_; }

    void add_term(const Monomial& m, const Rational& c);

    Polynomial operator+(const Polynomial& o) const;
    Polynomial operator-(const Polynomial& o) const;
    Polynomial operator*(const Polynomial& o) const;
    Polynomial operator-() const;
    Polynomial pow_int(unsigned e) const;
    Polynomial scaled(const Rational& c) const;

    // GCD of coefficient absolute values divided by their LCM of denominators,
    // signed so that poly/content() has integer coefficients and a positive
    // leading (lexicographically largest monomial) coefficient.
    Rational content() const;

    double eval(const std::vector<double>& point) const;
    Expr to_expr(const std::vector<std::string>& vars) const;
    std::string str(const std::vector<std::string>& vars) const;

private:
    std::size_t nvars_;
    std::map<Monomial, Rational> terms_;
};

// num/den pair; den never zero. Kept lightly normalized: shared monomial
// factors and rational content are cancelled, full polynomial GCD is not
// attempted.
struct RatFun {
    Polynomial num, den;
    RatFun(Polynomial n, Polynomial d);
    RatFun operator+(const RatFun& o) const;
    RatFun operator*(const RatFun& o) const;
    RatFun operator-() const;
    RatFun pow_int(long long e) const;
};

struct NonRationalError : std::runtime_error {
    explicit NonRationalError(const std::string& node)
        : std::runtime_error("non-rational content: " + node), offending(node) {}
    std::string offending;
};

// Rational normal form of `e` over exactly the listed variables. Throws
// NonRationalError naming the offending subtree on exp/ln/sin/cos, fractional
// powers, or symbols outside `vars`.
RatFun to_rational_function(const Expr& e, const std::vector<std::string>& vars);

// Like the above, but transcendental subtrees become opaque atoms appended to
// the variable list (structurally identical subtrees unify). A zero numerator
// still proves the expression is identically zero; a nonzero numerator proves
// nothing once atoms are present.
struct ExtendedRatFun {
    RatFun fun;
    std::vector<std::string> vars;  // original vars then synthesized atom names
    std::vector<Expr> atoms;
    bool used_atoms() const { return !atoms.empty(); }
};
ExtendedRatFun to_rational_function_extended(const Expr& e, const std::vector<std::string>& vars);

// Exact conversion; every finite double is a dyadic rational.
Rational rational_from_double(double v);

}  // namespace fitk

#endif
