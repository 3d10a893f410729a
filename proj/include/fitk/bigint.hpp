#ifndef FITK_BIGINT_HPP
#define FITK_BIGINT_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace fitk {

// Arbitrary-precision signed integer, sign-magnitude over base 2^32 limbs.
// Only the operations the exact linear algebra and rational arithmetic need.
class BigInt {
public:
    BigInt() = default;
    BigInt(long long v);
    explicit BigInt(const std::string& decimal);

    bool is_zero() const { return limbs_.empty(); }
    bool is_negative() const { return neg_; }
    int sign() const { return limbs_.empty() ? 0 : (neg_ ? -1 : 1); }

    BigInt operator-() const;
    BigInt operator+(const BigInt& o) const;
    BigInt operator-(const BigInt& o) const;
    BigInt operator*(const BigInt& o) const;
    // Truncated division (quotient rounds toward zero).
    BigInt operator/(const BigInt& o) const;
    BigInt operator%(const BigInt& o) const;

    BigInt& operator+=(const BigInt& o) { *this = *this + o; return *this; }
    BigInt& operator-=(const BigInt& o) { *this = *this - o; return *this; }
    BigInt& operator*=(const BigInt& o) { *this = *this * o; return *this; }

    bool operator==(const BigInt& o) const { return neg_ == o.neg_ && limbs_ == o.limbs_; }
    bool operator!=(const BigInt& o) const { return !(*this == o); }
    bool operator<(const BigInt& o) const { return cmp(*this, o) < 0; }
    bool operator<=(const BigInt& o) const { return cmp(*this, o) <= 0; }
    bool operator>(const BigInt& o) const { return cmp(*this, o) > 0; }
    bool operator>=(const BigInt& o) const { return cmp(*this, o) >= 0; }

    BigInt abs() const;
    static BigInt gcd(BigInt a, BigInt b);
    static int cmp(const BigInt& a, const BigInt& b);

    double to_double() const;
    // Value when it fits in long long; throws std::overflow_error otherwise.
    long long to_ll() const;
    bool fits_ll() const;
    std::string to_string() const;
    std::size_t hash() const;

private:
    bool neg_ = false;
    std::vector<std::uint32_t> limbs_;  // little-endian, no trailing zeros

    void trim();
    static int cmp_mag(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b);
    static std::vector<std::uint32_t> add_mag(const std::vector<std::uint32_t>& a,
                                              const std::vector<std::uint32_t>& b);
    // Requires |a| >= |b|.
    static std::vector<std::uint32_t> sub_mag(const std::vector<std::uint32_t>& a,
                                              const std::vector<std::uint32_t>& b);
    static void divmod(const BigInt& a, const BigInt& b, BigInt& q, BigInt& r);
};

}  // namespace fitk

#endif
