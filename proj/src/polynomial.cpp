#include "fitk/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fitk {

Polynomial Polynomial::constant(std::size_t nvars, const Rational& c) {
    Polynomial p(nvars);
    if (!c.is_zero()) p.terms_.emplace(Monomial(nvars, 0), c);
    return p;
}

Polynomial Polynomial::variable(std::size_t nvars, std::size_t index) {
    Polynomial p(nvars);
    Monomial m(nvars, 0);
    m[index] = 1;
    p.terms_.emplace(std::move(m), Rational(1));
    return p;
}

void Polynomial::add_term(const Monomial& m, const Rational& c) {
    if (c.is_zero()) return;
    auto it = terms_.find(m);
    if (it == terms_.end()) {
        terms_.emplace(m, c);
    } else {
        it->second += c;
        if (it->second.is_zero()) terms_.erase(it);
    }
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
    Polynomial r = *this;
    for (const auto& [m, c] : o.terms_) r.add_term(m, c);
    return r;
}

Polynomial Polynomial::operator-(const Polynomial& o) const { return *this + (-o); }

Polynomial Polynomial::operator-() const {
    Polynomial r(nvars_);
    for (const auto& [m, c] : terms_) r.terms_.emplace(m, -c);
    return r;
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
    Polynomial r(nvars_);
    for (const auto& [ma, ca] : terms_) {
        for (const auto& [mb, cb] : o.terms_) {
            Monomial m(nvars_);
            for (std::size_t i = 0; i < nvars_; ++i) m[i] = ma[i] + mb[i];
            r.add_term(m, ca * cb);
        }
    }
    return r;
}

Polynomial Polynomial::pow_int(unsigned e) const {
    Polynomial acc = constant(nvars_, Rational(1));
    Polynomial base = *this;
    while (e) {
        if (e & 1) acc = acc * base;
        if (e >>= 1) base = base * base;
    }
    return acc;
}

Polynomial Polynomial::scaled(const Rational& c) const {
    Polynomial r(nvars_);
    if (c.is_zero()) return r;
    for (const auto& [m, k] : terms_) r.terms_.emplace(m, k * c);
    return r;
}

Rational Polynomial::content() const {
    if (terms_.empty()) return Rational(1);
    BigInt g(0), l(1);
    for (const auto& [m, c] : terms_) {
        g = BigInt::gcd(g, c.num());
        l = l / BigInt::gcd(l, c.den()) * c.den();
    }
    Rational content(g, l);
    // rbegin() holds the lexicographically largest monomial; pin its sign.
    if (terms_.rbegin()->second.is_negative()) content = -content;
    return content;
}

double Polynomial::eval(const std::vector<double>& point) const {
    double s = 0;
    for (const auto& [m, c] : terms_) {
        double t = c.to_double();
        for (std::size_t i = 0; i < nvars_; ++i)
            for (unsigned k = 0; k < m[i]; ++k) t *= point[i];
        s += t;
    }
    return s;
}

Expr Polynomial::to_expr(const std::vector<std::string>& vars) const {
    std::vector<Expr> terms;
    for (const auto& [m, c] : terms_) {
        std::vector<Expr> f{Expr::number(c)};
        for (std::size_t i = 0; i < nvars_; ++i)
            if (m[i]) f.push_back(Expr::pow(Expr::symbol(vars[i]), Rational(m[i])));
        terms.push_back(Expr::mul(std::move(f)));
    }
    return Expr::add(std::move(terms));
}

std::string Polynomial::str(const std::vector<std::string>& vars) const {
    return to_expr(vars).str();
}

// ---------------------------------------------------------------------------

namespace {

// Cancels per-variable monomial content and rational content between n and d.
void light_cancel(Polynomial& n, Polynomial& d) {
    if (n.is_zero()) {
        d = Polynomial::constant(d.nvars(), Rational(1));
        return;
    }
    std::size_t nv = n.nvars();
    Monomial mn(nv, std::numeric_limits<unsigned>::max()), md(nv, std::numeric_limits<unsigned>::max());
    for (const auto& [m, c] : n.terms())
        for (std::size_t i = 0; i < nv; ++i) mn[i] = std::min(mn[i], m[i]);
    for (const auto& [m, c] : d.terms())
        for (std::size_t i = 0; i < nv; ++i) md[i] = std::min(md[i], m[i]);
    Monomial shift(nv);
    bool any = false;
    for (std::size_t i = 0; i < nv; ++i) {
        shift[i] = std::min(mn[i], md[i]);
        any = any || shift[i];
    }
    auto deflate = [&](const Polynomial& p) {
        Polynomial q(nv);
        for (const auto& [m, c] : p.terms()) {
            Monomial r(nv);
            for (std::size_t i = 0; i < nv; ++i) r[i] = m[i] - shift[i];
            q.add_term(r, c);
        }
        return q;
    };
    if (any) {
        n = deflate(n);
        d = deflate(d);
    }
    Rational dc = d.content();
    if (!dc.is_one()) {
        Rational inv = dc.reciprocal();
        n = n.scaled(inv);
        d = d.scaled(inv);
    }
}

}  // namespace

RatFun::RatFun(Polynomial n, Polynomial d) : num(std::move(n)), den(std::move(d)) {
    if (den.is_zero()) throw std::domain_error("RatFun: zero denominator");
    light_cancel(num, den);
}

RatFun RatFun::operator+(const RatFun& o) const {
    return RatFun(num * o.den + o.num * den, den * o.den);
}

RatFun RatFun::operator*(const RatFun& o) const { return RatFun(num * o.num, den * o.den); }

RatFun RatFun::operator-() const { return RatFun(-num, den); }

RatFun RatFun::pow_int(long long e) const {
    if (e >= 0) return RatFun(num.pow_int(static_cast<unsigned>(e)),
                              den.pow_int(static_cast<unsigned>(e)));
    if (num.is_zero()) throw std::domain_error("RatFun: inverse of zero");
    return RatFun(den.pow_int(static_cast<unsigned>(-e)),
                  num.pow_int(static_cast<unsigned>(-e)));
}

Rational rational_from_double(double v) {
    if (!std::isfinite(v)) throw std::domain_error("rational_from_double: non-finite");
    if (v == 0.0) return Rational(0);
    int exp2 = 0;
    double m = std::frexp(v, &exp2);  // v = m * 2^exp2, |m| in [0.5, 1)
    // 53 doublings make the mantissa integral.
    long long mant = static_cast<long long>(std::ldexp(m, 53));
    exp2 -= 53;
    Rational r(mant);
    Rational two(2);
    return r * two.pow_int(exp2);
}

namespace {

struct Converter {
    const std::vector<std::string>& base_vars;
    bool allow_atoms;
    std::vector<Expr> atoms;
    std::map<std::string, std::size_t> var_index;
    std::size_t width;  // grows as atoms appear; polynomials re-widened at end

    explicit Converter(const std::vector<std::string>& vars, bool atoms_ok)
        : base_vars(vars), allow_atoms(atoms_ok), width(vars.size()) {
        for (std::size_t i = 0; i < vars.size(); ++i) var_index[vars[i]] = i;
    }

    std::size_t atom_slot(const Expr& e) {
        for (std::size_t i = 0; i < atoms.size(); ++i)
            if (atoms[i].same(e)) return base_vars.size() + i;
        atoms.push_back(e);
        return base_vars.size() + atoms.size() - 1;
    }

    RatFun widen(const RatFun& f, std::size_t w) const {
        if (f.num.nvars() == w) return f;
        auto grow = [&](const Polynomial& p) {
            Polynomial q(w);
            for (const auto& [m, c] : p.terms()) {
                Monomial mm = m;
                mm.resize(w, 0);
                q.add_term(mm, c);
            }
            return q;
        };
        return RatFun(grow(f.num), grow(f.den));
    }

    RatFun convert(const Expr& e) {
        const ExprNode& n = e.node();
        std::size_t w = base_vars.size() + atoms.size();
        switch (n.type) {
            case NodeType::Number: {
                Rational c = n.exact ? n.rat : rational_from_double(n.num);
                return RatFun(Polynomial::constant(w, c),
                              Polynomial::constant(w, Rational(1)));
            }
            case NodeType::Symbol: {
                auto it = var_index.find(n.name);
                std::size_t slot;
                if (it != var_index.end()) {
                    slot = it->second;
                } else if (allow_atoms) {
                    slot = atom_slot(e);
                    w = base_vars.size() + atoms.size();
                } else {
                    throw NonRationalError(n.name + " (undeclared symbol)");
                }
                return RatFun(Polynomial::variable(w, slot),
                              Polynomial::constant(w, Rational(1)));
            }
            case NodeType::Add: {
                RatFun acc = convert(n.kids[0]);
                for (std::size_t i = 1; i < n.kids.size(); ++i) {
                    RatFun next = convert(n.kids[i]);
                    std::size_t ww = base_vars.size() + atoms.size();
                    acc = widen(acc, ww) + widen(next, ww);
                }
                return acc;
            }
            case NodeType::Mul: {
                RatFun acc = convert(n.kids[0]);
                for (std::size_t i = 1; i < n.kids.size(); ++i) {
                    RatFun next = convert(n.kids[i]);
                    std::size_t ww = base_vars.size() + atoms.size();
                    acc = widen(acc, ww) * widen(next, ww);
                }
                return acc;
            }
            case NodeType::Pow: {
                if (n.rat.is_integer())
                    return convert(n.kids[0]).pow_int(n.rat.num().to_ll());
                if (!allow_atoms) throw NonRationalError(e.str());
                std::size_t slot = atom_slot(e);
                std::size_t ww = base_vars.size() + atoms.size();
                return RatFun(Polynomial::variable(ww, slot),
                              Polynomial::constant(ww, Rational(1)));
            }
            case NodeType::Call: {
                if (!allow_atoms) throw NonRationalError(e.str());
                std::size_t slot = atom_slot(e);
                std::size_t ww = base_vars.size() + atoms.size();
                return RatFun(Polynomial::variable(ww, slot),
                              Polynomial::constant(ww, Rational(1)));
            }
        }
        throw std::logic_error("to_rational_function: bad node");
    }
};

}  // namespace

RatFun to_rational_function(const Expr& e, const std::vector<std::string>& vars) {
    Converter c(vars, false);
    return c.convert(e);
}

ExtendedRatFun to_rational_function_extended(const Expr& e, const std::vector<std::string>& vars) {
    Converter c(vars, true);
    RatFun f = c.convert(e);
    std::size_t w = vars.size() + c.atoms.size();
    f = c.widen(f, w);
    ExtendedRatFun out{std::move(f), vars, std::move(c.atoms)};
    for (std::size_t i = 0; i < out.atoms.size(); ++i)
        out.vars.push_back("@atom" + std::to_string(i));
    return out;
}

}  // namespace fitk
