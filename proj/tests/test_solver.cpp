#include <doctest.h>

#include "fitk/parser.hpp"
#include "fitk/solver.hpp"

using namespace fitk;

namespace {

LinearSystem dense(std::size_t ncols, const std::vector<std::vector<long long>>& rows) {
    LinearSystem s;
    s.ncols = ncols;
    for (const auto& r : rows) {
        std::map<std::size_t, Rational> row;
        for (std::size_t j = 0; j < r.size(); ++j)
            if (r[j]) row[j] = Rational(r[j]);
        s.add_row(std::move(row), "r");
    }
    return s;
}

Connection beta_connection() {
    std::set<std::string> names{"u", "w", "beta"};
    Connection conn(2, {"u", "w"});
    conn.set_gamma(0, 0, 0, parse_expr("-8*beta*w/u^3", names));
    conn.set_gamma(0, 0, 1, parse_expr("4*beta/u^2", names));
    conn.set_gamma(1, 0, 1, parse_expr("-8*beta*w/u^3", names));
    conn.set_gamma(1, 1, 1, parse_expr("4*beta/u^2", names));
    return conn;
}

// membership of a vector field in the span of a returned basis, checked by an
// exact rank comparison of coefficient matrices
bool in_span(const std::vector<SymTensor>& basis, const SymTensor& t,
             const std::vector<std::string>& coords) {
    std::vector<std::string> vars = coords;
    auto coeffs = [&](const SymTensor& f) {
        std::map<std::pair<std::size_t, Monomial>, Rational> out;
        for (std::size_t ci = 0; ci < f.index_list().size(); ++ci) {
            Expr comp = simplify(f.components()[ci]);
            if (comp.is_zero()) continue;
            RatFun rf = to_rational_function(comp, vars);
            for (const auto& [m, c] : rf.num.terms()) out[{ci, m}] = c;
        }
        return out;
    };
    std::map<std::pair<std::size_t, Monomial>, std::size_t> col_of;
    std::vector<std::map<std::size_t, Rational>> vecs;
    for (const auto& b : basis) vecs.push_back({});
    vecs.push_back({});
    auto fill = [&](const SymTensor& f, std::size_t slot) {
        for (const auto& [key, c] : coeffs(f)) {
            auto it = col_of.find(key);
            if (it == col_of.end()) it = col_of.emplace(key, col_of.size()).first;
            vecs[slot][it->second] = c;
        }
    };
    for (std::size_t i = 0; i < basis.size(); ++i) fill(basis[i], i);
    fill(t, basis.size());
    LinearSystem without;
    without.ncols = col_of.size();
    for (std::size_t i = 0; i < basis.size(); ++i) without.add_row(vecs[i], "b");
    LinearSystem with = without;
    with.add_row(vecs.back(), "t");
    return exact_rank(with) == exact_rank(without);
}

}  // namespace

TEST_CASE("nullspace: reference kernels") {
    CHECK(nullspace(dense(3, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}})).empty());

    auto zero = nullspace(dense(4, {}));
    REQUIRE(zero.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j)
            CHECK(zero[i][j] == (i == j ? Rational(1) : Rational(0)));
    }

    auto one = nullspace(dense(3, {{1, 1, 0}, {0, 0, 1}}));
    REQUIRE(one.size() == 1);
    CHECK(one[0][0] == Rational(1));
    CHECK(one[0][1] == Rational(-1));
    CHECK(one[0][2] == Rational(0));
}

TEST_CASE("nullspace vectors have integer entries with unit content") {
    auto ns = nullspace(dense(3, {{2, 4, 6}}));
    for (const auto& v : ns) {
        BigInt g(0);
        for (const auto& c : v) {
            CHECK(c.is_integer());
            g = BigInt::gcd(g, c.num());
        }
        CHECK(g == BigInt(1));
    }
}

TEST_CASE("flat plane: Killing vector space is exactly three-dimensional") {
    Connection flat = Connection::zero(2, {"x", "y"});
    auto basis = find_generalized_kts(flat, {}, {1, 1});
    CHECK(basis.size() == 3);

    // the three expected vectors all lie in the span
    auto mk = [&](const char* a, const char* b) {
        SymTensor t(2, 1);
        t.set({0}, parse_expr(a, {"x", "y"}));
        t.set({1}, parse_expr(b, {"x", "y"}));
        return t;
    };
    CHECK(in_span(basis, mk("1", "0"), {"x", "y"}));
    CHECK(in_span(basis, mk("0", "1"), {"x", "y"}));
    CHECK(in_span(basis, mk("-y", "x"), {"x", "y"}));
    CHECK_FALSE(in_span(basis, mk("x", "0"), {"x", "y"}));

    // raising the degree does not add linear Killing vectors
    CHECK(find_generalized_kts(flat, {}, {1, 2}).size() == 3);
    CHECK(find_generalized_kts(flat, {}, {1, 3}).size() == 3);
}

TEST_CASE("flat plane: order-2 Killing tensor space at degree 2 is six-dimensional") {
    Connection flat = Connection::zero(2, {"x", "y"});
    LinearSystem sys = build_kt_system(flat, {}, {2, 2});
    CHECK(exact_rank(sys) == float_svd_rank(sys));
    auto basis = find_generalized_kts(flat, {}, {2, 2});
    CHECK(basis.size() == 6);
    // dimension is monotone in the degree
    CHECK(find_generalized_kts(flat, {}, {2, 1}).size() <= 6);
}

TEST_CASE("quadratic-velocity system admits no polynomial Killing vectors") {
    Connection conn = beta_connection();
    std::map<std::string, Rational> params{{"beta", Rational(1, 2)}};
    CHECK(find_generalized_kts(conn, params, {1, 2}).empty());
    LinearSystem sys = build_kt_system(conn, params, {1, 2});
    CHECK(exact_rank(sys) == float_svd_rank(sys));
}

TEST_CASE("reducible generators: flat plane reference cases") {
    Connection flat = Connection::zero(2, {"x", "y"});
    // degree 0: constants are Killing vectors, the quotient is empty
    CHECK(find_reducible_kt_generators(flat, {}, 0).empty());
    // degree 1: the dilation vector (x, y) generates the identity tensor
    auto gens = find_reducible_kt_generators(flat, {}, 1);
    CHECK(!gens.empty());
    bool has_dilation_direction = false;
    for (const auto& g : gens) {
        Expr d = simplify(diff(g[0], "x") + diff(g[1], "y"));
        if (!d.is_zero()) has_dilation_direction = true;
    }
    CHECK(has_dilation_direction);
}

TEST_CASE("solver rejects transcendental connections and oversized ansatz") {
    Connection conn(2, {"x", "y"});
    conn.set_gamma(0, 0, 0, exp_of(Expr::symbol("x")));
    CHECK_THROWS_AS(find_generalized_kts(conn, {}, {1, 1}), NonRationalConnection);

    Connection flat = Connection::zero(2, {"x", "y"});
    SolverCaps caps;
    caps.max_degree = 2;
    CHECK_THROWS_AS(find_generalized_kts(flat, {}, {1, 3}, caps), std::length_error);
    caps.max_degree = 6;
    caps.max_unknowns = 2;
    CHECK_THROWS_AS(find_generalized_kts(flat, {}, {1, 3}, caps), std::length_error);
}

TEST_CASE("returned tensors satisfy their defining condition exactly") {
    Connection flat = Connection::zero(2, {"x", "y"});
    for (const auto& t : find_generalized_kts(flat, {}, {2, 2})) {
        SymTensor resid = sym_cov_derivative(t, flat);
        for (const auto& idx : resid.index_list()) CHECK(simplify(resid.at(idx)).is_zero());
    }
}
