#include <doctest.h>

#include "fitk/parser.hpp"
#include "fitk/tensor.hpp"
#include "fitk/zerotest.hpp"

using namespace fitk;

namespace {

const std::set<std::string> kNames{"x", "y", "u", "w", "k", "p", "beta"};

SampleDomain box2(std::initializer_list<std::pair<const std::string, std::pair<double, double>>> b,
                  Binding fixed = {}) {
    SampleDomain d;
    d.boxes = b;
    d.fixed = std::move(fixed);
    return d;
}

bool field_zero(const SymTensor& t, const SampleDomain& dom) {
    for (const auto& idx : t.index_list())
        if (!is_identically_zero(t.at(idx), dom).pass()) return false;
    return true;
}

Connection coupled_connection() {
    Connection conn(2, {"x", "y"});
    conn.set_gamma(0, 0, 0, parse_expr("p/(k*y+p*x)", kNames));
    conn.set_gamma(1, 1, 1, parse_expr("p/(p*y-k*x)", kNames));
    return conn;
}

Connection beta_connection() {
    Connection conn(2, {"u", "w"});
    conn.set_gamma(0, 0, 0, parse_expr("-8*beta*w/u^3", kNames));
    conn.set_gamma(0, 0, 1, parse_expr("4*beta/u^2", kNames));
    conn.set_gamma(1, 0, 1, parse_expr("-8*beta*w/u^3", kNames));
    conn.set_gamma(1, 1, 1, parse_expr("4*beta/u^2", kNames));
    return conn;
}

}  // namespace

TEST_CASE("component access is permutation invariant and checked") {
    SymTensor c(2, 2);
    Expr e = parse_expr("k*exp(12*beta*w/u^2)", kNames);
    c.set({0, 1}, e);
    CHECK(c.at({1, 0}).same(e));
    CHECK(c.at({0, 1}).same(e));
    CHECK(c.at({0, 0}).is_zero());

    SymTensor s = SymTensor::scalar(2, Expr::symbol("u"));
    CHECK(s.at(std::initializer_list<int>{}).same(Expr::symbol("u")));

    CHECK_THROWS_AS(c.at({0, 1, 1}), std::invalid_argument);  // arity
    CHECK_THROWS_AS(c.at({0, 5}), std::out_of_range);

    // storage round trip through every permutation of a rank-3 index
    SymTensor t(3, 3);
    t.set({2, 0, 1}, Expr::symbol("x"));
    CHECK(t.at({0, 1, 2}).same(Expr::symbol("x")));
    CHECK(t.at({1, 2, 0}).same(Expr::symbol("x")));
    CHECK(t.component_count() == SymTensor::count_components(3, 3));
}

TEST_CASE("symmetrize: projection, averaging, annihilation") {
    Expr a = Expr::symbol("x"), b = Expr::symbol("y");

    // already symmetric object is unchanged
    SymTensor sym(2, 2);
    sym.set({0, 0}, a);
    sym.set({0, 1}, b);
    SymTensor again = symmetrize(2, 2, [&](const std::vector<int>& idx) {
        return sym.at(idx);
    });
    for (const auto& idx : sym.index_list()) CHECK(again.at(idx).same(sym.at(idx)));

    // A(1,2)=a, A(2,1)=b, else 0 -> component(1,2) = (a+b)/2
    SymTensor avg = symmetrize(2, 2, [&](const std::vector<int>& idx) {
        if (idx == std::vector<int>{0, 1}) return a;
        if (idx == std::vector<int>{1, 0}) return b;
        return Expr();
    });
    CHECK(avg.at({0, 1}).same(simplify((a + b) / Expr::number(2ll))));
    CHECK(avg.at({0, 0}).is_zero());

    // antisymmetric input annihilates
    SymTensor anti = symmetrize(2, 2, [&](const std::vector<int>& idx) {
        if (idx == std::vector<int>{0, 1}) return a;
        if (idx == std::vector<int>{1, 0}) return -a;
        return Expr();
    });
    CHECK(anti.is_structurally_zero());
}

TEST_CASE("covariant derivative: flat and scalar special cases") {
    Connection flat = Connection::zero(2, {"x", "y"});
    SymTensor t(2, 2);
    t.set({0, 0}, parse_expr("x^2*y", kNames));
    t.set({0, 1}, parse_expr("x - y", kNames));
    auto d = cov_derivative(t, flat);
    CHECK(d[0].at({0, 0}).same(simplify(parse_expr("2*x*y", kNames))));
    CHECK(d[1].at({0, 1}).same(simplify(parse_expr("-1", kNames))));

    SymTensor g = SymTensor::scalar(2, parse_expr("x^2 + y", kNames));
    auto dg = cov_derivative(g, coupled_connection());
    CHECK(dg[0].at(std::initializer_list<int>{}).same(simplify(parse_expr("2*x", kNames))));
    CHECK(dg[1].at(std::initializer_list<int>{}).same(simplify(parse_expr("1", kNames))));
}

TEST_CASE("metric of the offdiagonal family is covariantly constant") {
    // gamma_ab = F * offdiag(1,1) with the log-derivative connection of F
    Expr F = parse_expr("x*y", kNames);
    Connection conn(2, {"x", "y"});
    conn.set_gamma(0, 0, 0, simplify(diff(F, "x") / F));
    conn.set_gamma(1, 1, 1, simplify(diff(F, "y") / F));
    SymTensor metric(2, 2);
    metric.set({0, 1}, F);
    auto resid = cov_derivative(metric, conn);
    SampleDomain dom = box2({{"x", {0.5, 1.5}}, {"y", {0.5, 1.5}}});
    for (const auto& d : resid) CHECK(field_zero(d, dom));
}

TEST_CASE("sym_cov_derivative: generalized symmetry residuals vanish") {
    SampleDomain dom = box2({{"x", {0.5, 1.0}}, {"y", {2.5, 3.5}}}, {{"k", 2}, {"p", 1}});
    dom.singular_guards = {parse_expr("k*y+p*x", kNames), parse_expr("p*y-k*x", kNames)};

    // the coupled-oscillator vector is a generalized Killing vector
    SymTensor L(2, 1);
    L.set({0}, parse_expr("k*y+p*x", kNames));
    L.set({1}, parse_expr("p*y-k*x", kNames));
    CHECK(field_zero(sym_cov_derivative(L, coupled_connection()), dom));

    // constants over a flat connection
    Connection flat = Connection::zero(2, {"x", "y"});
    SymTensor c(2, 2);
    c.set({0, 0}, Expr::number(3ll));
    c.set({1, 1}, Expr::number(Rational(-1, 2)));
    CHECK(sym_cov_derivative(c, flat).is_structurally_zero());

    // the exponential order-2 symmetry of the quadratic-velocity system
    SampleDomain bdom = box2({{"u", {0.8, 1.6}}, {"w", {-0.5, 0.5}}}, {{"beta", 0.5}});
    bdom.singular_guards = {Expr::symbol("u")};
    SymTensor C(2, 2);
    C.set({0, 1}, parse_expr("exp(12*beta*w/u^2)", kNames));
    SymTensor resid = sym_cov_derivative(C, beta_connection());
    for (const auto& idx : resid.index_list())
        CHECK(is_identically_zero(resid.at(idx), bdom).verdict == ZeroVerdict::ExactZero);
}

TEST_CASE("sym_cov_derivative of a scalar equals its gradient") {
    Expr g = parse_expr("x^3 - x*y", kNames);
    SymTensor grad = sym_cov_derivative(SymTensor::scalar(2, g), coupled_connection());
    CHECK(grad.at({0}).same(simplify(diff(g, "x"))));
    CHECK(grad.at({1}).same(simplify(diff(g, "y"))));
}

TEST_CASE("flat polynomial fields: symmetrized derivative is the symmetrized partial") {
    Connection flat = Connection::zero(2, {"x", "y"});
    SymTensor t(2, 2);
    t.set({0, 0}, parse_expr("x*y^2", kNames));
    t.set({0, 1}, parse_expr("y^3", kNames));
    t.set({1, 1}, parse_expr("x^2", kNames));
    SymTensor got = sym_cov_derivative(t, flat);
    SymTensor expect = symmetrize(2, 3, [&](const std::vector<int>& idx) {
        std::vector<int> head(idx.begin(), idx.end() - 1);
        return diff(t.at(head), flat.coords()[static_cast<std::size_t>(idx.back())]);
    });
    for (const auto& idx : got.index_list()) {
        Expr delta = simplify(got.at(idx) - expect.at(idx));
        CHECK(delta.is_zero());
    }
}

TEST_CASE("contract_last sums the trailing slot against an upper vector") {
    SymTensor t(2, 2);
    t.set({0, 0}, Expr::symbol("x"));
    t.set({0, 1}, Expr::symbol("y"));
    std::vector<Expr> q{Expr::number(2ll), Expr::symbol("x")};
    SymTensor c = contract_last(t, q);
    CHECK(c.at({0}).same(simplify(Expr::number(2ll) * Expr::symbol("x") +
                                  Expr::symbol("x") * Expr::symbol("y"))));
    CHECK(c.at({1}).same(simplify(Expr::number(2ll) * Expr::symbol("y"))));
}
