#ifndef FITK_RATIONAL_HPP
#define FITK_RATIONAL_HPP

#include <string>

#include "fitk/bigint.hpp"

namespace fitk {

// Exact rational number, always normalized (gcd 1, positive denominator).
class Rational {
public:
    Rational() : num_(0), den_(1) {}
    Rational(long long n) : num_(n), den_(1) {}
    Rational(long long n, long long d) : num_(n), den_(d) { normalize(); }
    Rational(BigInt n, BigInt d) : num_(std::move(n)), den_(std::move(d)) { normalize(); }
    explicit Rational(BigInt n) : num_(std::move(n)), den_(1) {}

    // Parses "p/q", integers, and plain decimals ("1.25" -> 5/4, "2e-3" -> 1/500).
    static Rational parse(const std::string& s);

    const BigInt& num() const { return num_; }
    const BigInt& den() const { return den_; }
    bool is_zero() const { return num_.is_zero(); }
    bool is_one() const { return den_ == BigInt(1) && num_ == BigInt(1); }
    bool is_integer() const { return den_ == BigInt(1); }
    bool is_negative() const { return num_.is_negative(); }
    int sign() const { return num_.sign(); }

    Rational operator-() const;
    Rational operator+(const Rational& o) const;
    Rational operator-(const Rational& o) const;
    Rational operator*(const Rational& o) const;
    Rational operator/(const Rational& o) const;
    Rational& operator+=(const Rational& o) { *this = *this + o; return *this; }
    Rational& operator-=(const Rational& o) { *this = *this - o; return *this; }
    Rational& operator*=(const Rational& o) { *this = *this * o; return *this; }
    Rational& operator/=(const Rational& o) { *this = *this / o; return *this; }

    bool operator==(const Rational& o) const { return num_ == o.num_ && den_ == o.den_; }
    bool operator!=(const Rational& o) const { return !(*this == o); }
    bool operator<(const Rational& o) const { return (*this - o).is_negative(); }
    bool operator>(const Rational& o) const { return o < *this; }

    Rational abs() const { return is_negative() ? -*this : *this; }
    // Integer power; negative exponents invert (throws on zero base).
    Rational pow_int(long long e) const;
    Rational reciprocal() const;

    double to_double() const;
    std::string to_string() const;
    std::size_t hash() const;

private:
    BigInt num_, den_;
    void normalize();
};

}  // namespace fitk

#endif
