#include <doctest.h>

#include <random>

#include "fitk/polynomial.hpp"
#include "fitk/rational.hpp"

using namespace fitk;

TEST_CASE("bigint: arithmetic against native integers") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<long long> pick(-1000000, 1000000);
    for (int i = 0; i < 200; ++i) {
        long long a = pick(rng), b = pick(rng);
        CHECK((BigInt(a) + BigInt(b)).to_ll() == a + b);
        CHECK((BigInt(a) - BigInt(b)).to_ll() == a - b);
        CHECK((BigInt(a) * BigInt(b)).to_ll() == a * b);
        if (b != 0) {
            CHECK((BigInt(a) / BigInt(b)).to_ll() == a / b);
            CHECK((BigInt(a) % BigInt(b)).to_ll() == a % b);
        }
    }
    CHECK_THROWS_AS(BigInt(1) / BigInt(0), std::domain_error);
}

TEST_CASE("bigint: growth beyond 64 bits and decimal round trip") {
    BigInt v(1);
    for (int i = 0; i < 40; ++i) v *= BigInt(7);  // 7^40 ~ 1e33
    CHECK(v.to_string() == "6366805760909027985741435139224001");
    CHECK_FALSE(v.fits_ll());
    CHECK(BigInt(v.to_string()) == v);
    CHECK((v - v).is_zero());
    CHECK(BigInt::gcd(v, v * BigInt(3)) == v);
    CHECK((-v).to_string() == "-" + v.to_string());
}

TEST_CASE("rational: normalization, ordering, parsing") {
    CHECK(Rational(2, 4) == Rational(1, 2));
    CHECK(Rational(-2, -4) == Rational(1, 2));
    CHECK(Rational(2, -4) == Rational(-1, 2));
    CHECK(Rational(1, 3) + Rational(1, 6) == Rational(1, 2));
    CHECK(Rational(1, 3) < Rational(1, 2));
    CHECK(Rational(-7).abs() == Rational(7));
    CHECK(Rational(2, 3).pow_int(-2) == Rational(9, 4));
    CHECK_THROWS_AS(Rational(1, 0), std::domain_error);

    CHECK(Rational::parse("3/4") == Rational(3, 4));
    CHECK(Rational::parse("1.25") == Rational(5, 4));
    CHECK(Rational::parse("2e-3") == Rational(1, 500));
    CHECK(Rational::parse("-0.5") == Rational(-1, 2));
}

TEST_CASE("rational_from_double is exact") {
    for (double v : {0.5, -0.125, 3.0, 0.1, 1e-30, 12345.6789}) {
        CHECK(rational_from_double(v).to_double() == v);
    }
    CHECK(rational_from_double(0.0) == Rational(0));
}

TEST_CASE("polynomial: exact arithmetic and content") {
    // (x + y)^2 = x^2 + 2xy + y^2 over two variables
    Polynomial x = Polynomial::variable(2, 0), y = Polynomial::variable(2, 1);
    Polynomial sq = (x + y).pow_int(2);
    CHECK(sq.terms().size() == 3);
    CHECK(sq.terms().at(Monomial{1, 1}) == Rational(2));
    CHECK((sq - sq).is_zero());

    Polynomial p(1);
    p.add_term({1}, Rational(4, 6));
    p.add_term({0}, Rational(-2, 3));
    CHECK(p.content() == Rational(2, 3));
    Polynomial q = p.scaled(p.content().reciprocal());
    for (const auto& [m, c] : q.terms()) CHECK(c.is_integer());
}
