#include <doctest.h>

#include <cmath>
#include <random>

#include "fitk/parser.hpp"
#include "fitk/zerotest.hpp"

using namespace fitk;

namespace {

const std::set<std::string> kNames{"x", "y", "u", "w", "b", "k", "p", "beta"};

double fd_derivative(const Expr& e, const std::string& var, Binding at, double h = 1e-5) {
    Binding lo = at, hi = at;
    lo[var] -= h;
    hi[var] += h;
    return (eval(e, hi) - eval(e, lo)) / (2 * h);
}

SampleDomain unit_domain(unsigned seed = 7) {
    SampleDomain d;
    d.seed = seed;
    for (const auto& n : kNames) d.boxes[n] = {0.5, 1.5};
    return d;
}

}  // namespace

TEST_CASE("parse: grammar and shapes") {
    Expr e1 = parse_expr("-8*b*w/u^3", kNames);
    CHECK(eval(e1, {{"b", 2}, {"w", 3}, {"u", 2}}) == doctest::Approx(-8.0 * 2 * 3 / 8));
    CHECK(parse_expr("0", kNames).is_zero());

    Expr e3 = parse_expr("k*x - p*y", kNames);
    CHECK(e3.type() == NodeType::Add);
    CHECK(e3.same(Expr::symbol("k") * Expr::symbol("x") - Expr::symbol("p") * Expr::symbol("y")));

    // right-associative exponent with unary minus
    Expr e4 = parse_expr("x^-2", kNames);
    CHECK(eval(e4, {{"x", 2.0}}) == doctest::Approx(0.25));
}

TEST_CASE("parse: errors carry positions") {
    CHECK_THROWS_AS(parse_expr("x + ", kNames), ParseError);
    CHECK_THROWS_AS(parse_expr("q + 1", kNames), ParseError);  // unknown identifier
    CHECK_THROWS_AS(parse_expr("x ^ y", kNames), ParseError);  // non-constant exponent
    try {
        parse_expr("x + #", kNames);
        CHECK(false);
    } catch (const ParseError& err) {
        CHECK(err.position == 4);
    }
}

TEST_CASE("eval: direct arithmetic and error reporting") {
    Expr g = parse_expr("p/(k*y+p*x)", kNames);
    CHECK(eval(g, {{"k", 1}, {"p", 1}, {"x", 1}, {"y", 1}}) == doctest::Approx(0.5));

    Expr h = parse_expr("exp(12*beta*w/u^2)", kNames);
    CHECK(eval(h, {{"beta", 1}, {"w", 0}, {"u", 2}}) == doctest::Approx(1.0));

    CHECK_THROWS_AS(eval(parse_expr("1/u^2", kNames), {{"u", 0.0}}), EvalError);
    CHECK_THROWS_AS(eval(parse_expr("ln(x)", kNames), {{"x", -1.0}}), EvalError);
    CHECK_THROWS_AS(eval(parse_expr("sqrt(x)", kNames), {{"x", -4.0}}), EvalError);
    CHECK_THROWS_AS(eval(Expr::symbol("zz"), {}), EvalError);
}

TEST_CASE("diff: exact rules") {
    CHECK(diff(parse_expr("k*x - p*y", kNames), "x").same(Expr::symbol("k")));

    Expr h = parse_expr("exp(12*b*w/u^2)", kNames);
    Expr dh = diff(h, "u");
    Expr expected = parse_expr("-24*b*w/u^3*exp(12*b*w/u^2)", kNames);
    CHECK(dh.same(simplify(expected)));

    // parameters differentiate to zero
    CHECK(diff(parse_expr("k*p + b", kNames), "x").is_zero());
}

TEST_CASE("diff: agrees with central finite differences at random points") {
    Expr f = parse_expr("k*x/(y^2*sqrt(x^2+y^2))", kNames);
    Expr df = diff(f, "y");
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> pick(0.4, 1.7);
    for (int i = 0; i < 20; ++i) {
        Binding at{{"k", 0.7}, {"x", pick(rng)}, {"y", pick(rng)}};
        double sym = eval(df, at);
        double num = fd_derivative(f, "y", at);
        CHECK(std::abs(sym - num) <= 1e-6 * (1 + std::abs(sym)));
    }
}

TEST_CASE("simplify: identities and idempotence") {
    CHECK(parse_expr("0*x + 1*y", kNames).same(Expr::symbol("y")));
    CHECK(parse_expr("x - x", kNames).is_zero());
    Expr half_u = parse_expr("(2/4)*u", kNames);
    CHECK(half_u.same(Expr::number(Rational(1, 2)) * Expr::symbol("u")));

    for (const char* s : {"-8*b*w/u^3", "k*x - p*y + x*y^2", "exp(12*b*w/u^2)*(x - y)",
                          "sin(x)*cos(y) + sqrt(x^2+y^2)^3"}) {
        Expr e = parse_expr(s, kNames);
        CHECK(simplify(e).same(e));
        CHECK(simplify(simplify(e)).same(simplify(e)));
    }
}

TEST_CASE("print/parse round trip equals simplified tree") {
    for (const char* s :
         {"-8*b*w/u^3", "k*x - p*y", "exp(12*beta*w/u^2)*(x_dot + 1/2)", "p/(k*y+p*x)",
          "sqrt(x^2+y^2)", "x^(-3) + x^(3/2)", "-x - y", "2.5*x", "(x+y)^2/(x-y)",
          "sin(x)*cos(y) - ln(u)"}) {
        std::set<std::string> names = kNames;
        names.insert("x_dot");
        Expr e = parse_expr(s, names);
        Expr back = parse_expr(e.str(), names);
        CHECK_MESSAGE(back.same(e), "round trip failed for ", s, " printed as ", e.str());
    }
}

TEST_CASE("diff is linear over random rational weights") {
    std::mt19937 rng(1234);
    std::uniform_int_distribution<int> num(-6, 6);
    Expr e1 = parse_expr("x^3*y - sin(x)*y^2", kNames);
    Expr e2 = parse_expr("exp(x*y)/(1+x^2)", kNames);
    SampleDomain dom = unit_domain();
    for (int i = 0; i < 8; ++i) {
        Rational a(num(rng), 7), b(num(rng), 5);
        Expr lhs = diff(Expr::number(a) * e1 + Expr::number(b) * e2, "x");
        Expr rhs = Expr::number(a) * diff(e1, "x") + Expr::number(b) * diff(e2, "x");
        CHECK(is_identically_zero(lhs - rhs, dom).verdict == ZeroVerdict::ExactZero);
    }
}

TEST_CASE("mixed partials commute on smooth expressions") {
    SampleDomain dom = unit_domain();
    for (const char* s : {"k*x/(y^2*sqrt(x^2+y^2))", "exp(12*b*w/u^2)*x*y", "sin(x*y)/u"}) {
        Expr e = parse_expr(s, kNames);
        Expr d1 = diff(diff(e, "x"), "y");
        Expr d2 = diff(diff(e, "y"), "x");
        CHECK(is_identically_zero(d1 - d2, dom).pass());
    }
}

TEST_CASE("to_polynomial: rational normal forms") {
    std::vector<std::string> vars{"b", "u", "w"};
    RatFun f = to_rational_function(parse_expr("-8*b*w/u^3", kNames), vars);
    // numerator -8 b w, denominator u^3
    CHECK(f.num.terms().size() == 1);
    CHECK(f.den.terms().size() == 1);
    CHECK(f.num.terms().begin()->second == Rational(-8));
    CHECK(f.den.terms().begin()->first == Monomial{0, 3, 0});

    CHECK_THROWS_AS(to_rational_function(parse_expr("exp(u)", kNames), vars), NonRationalError);

    RatFun g = to_rational_function(parse_expr("(x^2-y^2)/1", kNames), {"x", "y"});
    CHECK(g.den.terms().size() == 1);
    CHECK(g.den.terms().begin()->second == Rational(1));
    CHECK(g.num.terms().size() == 2);
}

TEST_CASE("to_polynomial re-evaluates equal to the original") {
    std::vector<std::string> vars{"x", "y"};
    Expr e = parse_expr("(x^2 - y^2)/(x*y + 2) + (x - 1/3)^3/(y^2)", kNames);
    RatFun f = to_rational_function(e, vars);
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> pick(0.3, 1.9);
    for (int i = 0; i < 50; ++i) {
        std::vector<double> p{pick(rng), pick(rng)};
        double direct = eval(e, {{"x", p[0]}, {"y", p[1]}});
        double viapoly = f.num.eval(p) / f.den.eval(p);
        CHECK(std::abs(direct - viapoly) <= 1e-12 * (1 + std::abs(direct)));
    }
}

TEST_CASE("is_identically_zero: exact, probabilistic, and witness paths") {
    SampleDomain dom = unit_domain();
    CHECK(is_identically_zero(parse_expr("x - x", kNames), dom).verdict ==
          ZeroVerdict::ExactZero);

    // integrability of the (1/x, 1/y) pair
    Expr lhs = diff(parse_expr("1/x", kNames), "y") - diff(parse_expr("1/y", kNames), "x");
    CHECK(is_identically_zero(lhs, dom).verdict == ZeroVerdict::ExactZero);

    // witness for the damped-oscillator pair at k=2, p=1
    SampleDomain d2 = unit_domain();
    d2.fixed = {{"k", 2}, {"p", 1}};
    Expr crit = diff(parse_expr("p/(k*y+p*x)", kNames), "y") -
                diff(parse_expr("p/(p*y-k*x)", kNames), "x");
    d2.singular_guards = {parse_expr("k*y+p*x", kNames), parse_expr("p*y-k*x", kNames)};
    auto z = is_identically_zero(crit, d2);
    REQUIRE(z.verdict == ZeroVerdict::NonZero);
    REQUIRE(z.witness.has_value());
    CHECK(std::abs(eval(crit, z.witness->point)) > 0);

    // transcendental-atom cancellation stays exact
    Expr E = parse_expr("exp(12*b*w/u^2)", kNames);
    Expr combo = E * parse_expr("x", kNames) -
                 Expr::number(Rational(1, 2)) * E * parse_expr("2*x", kNames);
    CHECK(is_identically_zero(combo, dom).verdict == ZeroVerdict::ExactZero);

    // sampled-only verdict for a transcendental identity
    Expr trig = parse_expr("sin(x)^2 + cos(x)^2 - 1", kNames);
    CHECK(is_identically_zero(trig, dom).verdict == ZeroVerdict::ProbablyZero);
}

TEST_CASE("is_identically_zero: all-singular sampling raises") {
    SampleDomain dom;
    dom.boxes["x"] = {0.5, 1.5};
    dom.singular_guards = {Expr::symbol("x")};
    dom.guard_margin = 10.0;  // everything counts as singular
    CHECK_THROWS_AS(is_identically_zero(parse_expr("1/x", kNames), dom), ZeroTestError);
}

TEST_CASE("halton points are deterministic and in range") {
    auto p1 = halton_point(37, 4);
    auto p2 = halton_point(37, 4);
    CHECK(p1 == p2);
    for (double v : p1) {
        CHECK(v >= 0.0);
        CHECK(v < 1.0);
    }
}

TEST_CASE("compiled evaluation matches the interpreter") {
    std::set<std::string> names = kNames;
    Expr e = parse_expr("exp(x*y)/(1 + x^2) - sin(y)*sqrt(x^2+y^2) + x^(-2)", names);
    std::vector<std::string> slots{"x", "y"};
    CompiledExpr c = CompiledExpr::compile(e, slots);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> pick(0.2, 2.0);
    for (int i = 0; i < 25; ++i) {
        double x = pick(rng), y = pick(rng);
        std::vector<double> vals{x, y};
        CHECK(c.eval(vals) == doctest::Approx(eval(e, {{"x", x}, {"y", y}})).epsilon(1e-12));
    }
}
