#include "fitk/rational.hpp"

#include <stdexcept>

namespace fitk {

void Rational::normalize() {
    if (den_.is_zero()) throw std::domain_error("Rational: zero denominator");
    if (num_.is_zero()) { den_ = BigInt(1); return; }
    if (den_.is_negative()) { num_ = -num_; den_ = -den_; }
    BigInt g = BigInt::gcd(num_, den_);
    if (g != BigInt(1)) { num_ = num_ / g; den_ = den_ / g; }
}

Rational Rational::parse(const std::string& s) {
    auto slash = s.find('/');
    if (slash != std::string::npos)
        return Rational(BigInt(s.substr(0, slash)), BigInt(s.substr(slash + 1)));
    std::string t = s;
    long long exp10 = 0;
    auto e = t.find_first_of("eE");
    if (e != std::string::npos) {
        exp10 = std::stoll(t.substr(e + 1));
        t = t.substr(0, e);
    }
    auto dot = t.find('.');
    if (dot != std::string::npos) {
        exp10 -= static_cast<long long>(t.size() - dot - 1);
        t.erase(dot, 1);
    }
    Rational r(BigInt(t), BigInt(1));
    Rational ten(10);
    return r * ten.pow_int(exp10);
}

Rational Rational::operator-() const { Rational r; r.num_ = -num_; r.den_ = den_; return r; }

Rational Rational::operator+(const Rational& o) const {
    return Rational(num_ * o.den_ + o.num_ * den_, den_ * o.den_);
}

Rational Rational::operator-(const Rational& o) const {
    return Rational(num_ * o.den_ - o.num_ * den_, den_ * o.den_);
}

Rational Rational::operator*(const Rational& o) const {
    return Rational(num_ * o.num_, den_ * o.den_);
}

Rational Rational::operator/(const Rational& o) const {
    if (o.is_zero()) throw std::domain_error("Rational: division by zero");
    return Rational(num_ * o.den_, den_ * o.num_);
}

Rational Rational::reciprocal() const {
    if (is_zero()) throw std::domain_error("Rational: reciprocal of zero");
    return Rational(den_, num_);
}

Rational Rational::pow_int(long long e) const {
    if (e == 0) return Rational(1);
    if (e < 0) return reciprocal().pow_int(-e);
    Rational base = *this, acc(1);
    while (e) {
        if (e & 1) acc *= base;
        base *= base;
        e >>= 1;
    }
    return acc;
}

double Rational::to_double() const { return num_.to_double() / den_.to_double(); }

std::string Rational::to_string() const {
    if (is_integer()) return num_.to_string();
    return num_.to_string() + "/" + den_.to_string();
}

std::size_t Rational::hash() const { return num_.hash() * 31 + den_.hash(); }

}  // namespace fitk
