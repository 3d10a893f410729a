#include "fitk/expr.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace fitk {

namespace {

// Numeric value that stays exact as long as every ingredient is exact.
struct NumVal {
    bool exact = true;
    Rational r;
    double d = 0.0;

    static NumVal of(const Rational& q) { return {true, q, q.to_double()}; }
    static NumVal of(double v) { return {false, Rational(0), v}; }
    static NumVal zero() { return of(Rational(0)); }
    static NumVal one() { return of(Rational(1)); }

    bool is_zero() const { return exact ? r.is_zero() : d == 0.0; }
    bool is_one() const { return exact ? r.is_one() : d == 1.0; }

    NumVal operator+(const NumVal& o) const {
        if (exact && o.exact) return of(r + o.r);
        return of(value() + o.value());
    }
    NumVal operator*(const NumVal& o) const {
        if (exact && o.exact) return of(r * o.r);
        return of(value() * o.value());
    }
    double value() const { return exact ? r.to_double() : d; }
};

std::size_t hash_combine(std::size_t h, std::size_t v) {
    return h ^ (v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2));
}

std::size_t node_hash(const ExprNode& n) {
    std::size_t h = static_cast<std::size_t>(n.type) * 1099511628211ull;
    switch (n.type) {
        case NodeType::Number:
            h = hash_combine(h, n.exact ? n.rat.hash() : std::hash<double>()(n.num));
            h = hash_combine(h, n.exact ? 1 : 2);
            break;
        case NodeType::Symbol:
            h = hash_combine(h, std::hash<std::string>()(n.name));
            break;
        case NodeType::Pow:
            h = hash_combine(h, n.rat.hash());
            h = hash_combine(h, n.kids[0].hash());
            break;
        case NodeType::Call:
            h = hash_combine(h, static_cast<std::size_t>(n.func));
            h = hash_combine(h, n.kids[0].hash());
            break;
        default:
            for (const auto& k : n.kids) h = hash_combine(h, k.hash());
    }
    return h;
}

}  // namespace

struct ExprFactory {
    static Expr wrap(ExprNode n) {
        n.hash = node_hash(n);
        return Expr(std::make_shared<const ExprNode>(std::move(n)));
    }
};

static Expr make_number(const NumVal& v) {
    if (v.exact) return Expr::number(v.r);
    return Expr::number(v.d);
}

Expr::Expr() { *this = number(Rational(0)); }

NodeType Expr::type() const { return p_->type; }
std::size_t Expr::hash() const { return p_->hash; }

bool Expr::is_zero() const {
    return type() == NodeType::Number &&
           (p_->exact ? p_->rat.is_zero() : p_->num == 0.0);
}

bool Expr::is_one() const {
    return type() == NodeType::Number &&
           (p_->exact ? p_->rat.is_one() : p_->num == 1.0);
}

std::optional<Rational> Expr::exact_value() const {
    if (type() == NodeType::Number && p_->exact) return p_->rat;
    return std::nullopt;
}

std::optional<double> Expr::numeric_value() const {
    if (type() == NodeType::Number) return p_->num;
    return std::nullopt;
}

Expr Expr::number(const Rational& r) {
    ExprNode n;
    n.type = NodeType::Number;
    n.exact = true;
    n.rat = r;
    n.num = r.to_double();
    return ExprFactory::wrap(std::move(n));
}

Expr Expr::number(double v) {
    ExprNode n;
    n.type = NodeType::Number;
    n.exact = false;
    n.num = v;
    return ExprFactory::wrap(std::move(n));
}

Expr Expr::symbol(const std::string& name) {
    ExprNode n;
    n.type = NodeType::Symbol;
    n.name = name;
    return ExprFactory::wrap(std::move(n));
}

int Expr::compare(const Expr& a, const Expr& b) {
    if (a.p_ == b.p_) return 0;
    const ExprNode& x = *a.p_;
    const ExprNode& y = *b.p_;
    if (x.type != y.type) return x.type < y.type ? -1 : 1;
    switch (x.type) {
        case NodeType::Number: {
            if (x.num != y.num) return x.num < y.num ? -1 : 1;
            if (x.exact != y.exact) return x.exact ? -1 : 1;
            if (x.exact && x.rat != y.rat) return x.rat < y.rat ? -1 : 1;
            return 0;
        }
        case NodeType::Symbol:
            return x.name.compare(y.name) < 0 ? -1 : (x.name == y.name ? 0 : 1);
        case NodeType::Pow: {
            int c = compare(x.kids[0], y.kids[0]);
            if (c) return c;
            if (x.rat != y.rat) return x.rat < y.rat ? -1 : 1;
            return 0;
        }
        case NodeType::Call: {
            if (x.func != y.func) return x.func < y.func ? -1 : 1;
            return compare(x.kids[0], y.kids[0]);
        }
        default: {
            std::size_t n = std::min(x.kids.size(), y.kids.size());
            for (std::size_t i = 0; i < n; ++i) {
                int c = compare(x.kids[i], y.kids[i]);
                if (c) return c;
            }
            if (x.kids.size() != y.kids.size()) return x.kids.size() < y.kids.size() ? -1 : 1;
            return 0;
        }
    }
}

bool Expr::same(const Expr& o) const {
    if (p_ == o.p_) return true;
    if (hash() != o.hash()) return false;
    return compare(*this, o) == 0;
}

namespace {

struct ExprLess {
    bool operator()(const Expr& a, const Expr& b) const { return Expr::compare(a, b) < 0; }
};

// Splits a canonical term into (coefficient, core) for like-term collection.
std::pair<NumVal, Expr> coeff_core(const Expr& e) {
    const ExprNode& n = e.node();
    if (n.type == NodeType::Number)
        return {n.exact ? NumVal::of(n.rat) : NumVal::of(n.num), Expr::number(Rational(1))};
    if (n.type == NodeType::Mul && n.kids[0].is_number()) {
        const ExprNode& c = n.kids[0].node();
        NumVal v = c.exact ? NumVal::of(c.rat) : NumVal::of(c.num);
        std::vector<Expr> rest(n.kids.begin() + 1, n.kids.end());
        if (rest.size() == 1) return {v, rest[0]};
        // Kids of a canonical Mul stay canonical as a shorter Mul.
        ExprNode m;
        m.type = NodeType::Mul;
        m.kids = std::move(rest);
        return {v, ExprFactory::wrap(std::move(m))};
    }
    return {NumVal::one(), e};
}

// Splits a canonical factor into (base, exponent).
std::pair<Expr, Rational> base_expo(const Expr& e) {
    const ExprNode& n = e.node();
    if (n.type == NodeType::Pow) return {n.kids[0], n.rat};
    return {e, Rational(1)};
}

}  // namespace

Expr Expr::add(std::vector<Expr> ops) {
    std::vector<Expr> flat;
    for (auto& o : ops) {
        if (o.type() == NodeType::Add)
            for (const auto& k : o.node().kids) flat.push_back(k);
        else
            flat.push_back(std::move(o));
    }
    NumVal constant = NumVal::zero();
    std::map<Expr, NumVal, ExprLess> terms;
    for (const auto& t : flat) {
        auto [c, core] = coeff_core(t);
        if (core.is_one()) {
            constant = constant + c;
            continue;
        }
        auto it = terms.find(core);
        if (it == terms.end())
            terms.emplace(core, c);
        else
            it->second = it->second + c;
    }
    std::vector<Expr> out;
    if (!constant.is_zero()) out.push_back(make_number(constant));
    for (const auto& [core, c] : terms) {
        if (c.is_zero()) continue;
        out.push_back(c.is_one() ? core : mul({make_number(c), core}));
    }
    if (out.empty()) return number(Rational(0));
    if (out.size() == 1) return out[0];
    std::sort(out.begin(), out.end(), ExprLess{});
    ExprNode n;
    n.type = NodeType::Add;
    n.kids = std::move(out);
    return ExprFactory::wrap(std::move(n));
}

Expr Expr::mul(std::vector<Expr> ops) {
    std::vector<Expr> flat;
    for (auto& o : ops) {
        if (o.type() == NodeType::Mul)
            for (const auto& k : o.node().kids) flat.push_back(k);
        else
            flat.push_back(std::move(o));
    }
    NumVal coef = NumVal::one();
    std::map<Expr, Rational, ExprLess> factors;
    for (const auto& f : flat) {
        if (f.is_number()) {
            const ExprNode& c = f.node();
            coef = coef * (c.exact ? NumVal::of(c.rat) : NumVal::of(c.num));
            continue;
        }
        auto [base, e] = base_expo(f);
        auto it = factors.find(base);
        if (it == factors.end())
            factors.emplace(base, e);
        else
            it->second += e;
    }
    if (coef.is_zero()) return number(Rational(0));
    std::vector<Expr> out;
    for (const auto& [base, e] : factors) {
        if (e.is_zero()) continue;
        Expr p = pow(base, e);
        if (p.is_number()) {
            const ExprNode& c = p.node();
            coef = coef * (c.exact ? NumVal::of(c.rat) : NumVal::of(c.num));
        } else {
            out.push_back(p);
        }
    }
    if (out.empty()) return make_number(coef);
    // distribute a numeric coefficient over a lone sum so that differences of
    // equal sums cancel structurally
    if (out.size() == 1 && out[0].type() == NodeType::Add && !coef.is_one()) {
        std::vector<Expr> scaled;
        for (const auto& k : out[0].node().kids) scaled.push_back(mul({make_number(coef), k}));
        return add(std::move(scaled));
    }
    std::sort(out.begin(), out.end(), ExprLess{});
    if (!coef.is_one()) out.insert(out.begin(), make_number(coef));
    if (out.size() == 1) return out[0];
    ExprNode n;
    n.type = NodeType::Mul;
    n.kids = std::move(out);
    return ExprFactory::wrap(std::move(n));
}

Expr Expr::pow(const Expr& base, const Rational& exponent) {
    if (exponent.is_zero()) return number(Rational(1));
    if (exponent.is_one()) return base;
    if (base.is_number()) {
        const ExprNode& b = base.node();
        if (b.exact) {
            if (b.rat.is_zero()) {
                if (exponent.is_negative())
                    throw EvalError("division by zero", "0^" + exponent.to_string());
                return number(Rational(0));
            }
            if (b.rat.is_one()) return number(Rational(1));
            if (exponent.is_integer()) return number(b.rat.pow_int(exponent.num().to_ll()));
        } else {
            double v = std::pow(b.num, exponent.to_double());
            if (std::isfinite(v)) return number(v);
        }
    }
    if (base.type() == NodeType::Mul && exponent.is_integer()) {
        std::vector<Expr> parts;
        for (const auto& k : base.node().kids) parts.push_back(pow(k, exponent));
        return mul(std::move(parts));
    }
    if (base.type() == NodeType::Pow && exponent.is_integer()) {
        const ExprNode& b = base.node();
        return pow(b.kids[0], b.rat * exponent);
    }
    ExprNode n;
    n.type = NodeType::Pow;
    n.rat = exponent;
    n.kids = {base};
    return ExprFactory::wrap(std::move(n));
}

Expr Expr::call(Func f, const Expr& arg) {
    if (arg.is_number() && !arg.node().exact) {
        double v = arg.node().num;
        switch (f) {
            case Func::Exp: return number(std::exp(v));
            case Func::Ln: if (v > 0) return number(std::log(v)); break;
            case Func::Sin: return number(std::sin(v));
            case Func::Cos: return number(std::cos(v));
        }
    }
    if (arg.is_zero()) {
        switch (f) {
            case Func::Exp: return number(Rational(1));
            case Func::Sin: return number(Rational(0));
            case Func::Cos: return number(Rational(1));
            case Func::Ln: throw EvalError("ln of non-positive constant", "ln(0)");
        }
    }
    if (f == Func::Ln && arg.is_one()) return number(Rational(0));
    if (f == Func::Ln && arg.type() == NodeType::Call && arg.node().func == Func::Exp)
        return arg.node().kids[0];
    if (f == Func::Exp) {
        // exp is rewritten multiplicatively so that log-derivative integrals
        // land back on rational expressions: exp(a+b) -> exp(a)exp(b),
        // exp(c*ln u) -> u^c (principal branch; u > 0 on sampling domains).
        if (arg.type() == NodeType::Call && arg.node().func == Func::Ln)
            return arg.node().kids[0];
        if (arg.type() == NodeType::Add) {
            std::vector<Expr> parts;
            for (const auto& k : arg.node().kids) parts.push_back(call(Func::Exp, k));
            return mul(std::move(parts));
        }
        if (arg.type() == NodeType::Mul) {
            const auto& kids = arg.node().kids;
            if (kids.size() == 2 && kids[0].is_number() && kids[0].node().exact &&
                kids[1].type() == NodeType::Call && kids[1].node().func == Func::Ln)
                return pow(kids[1].node().kids[0], kids[0].node().rat);
        }
    }
    ExprNode n;
    n.type = NodeType::Call;
    n.func = f;
    n.kids = {arg};
    return ExprFactory::wrap(std::move(n));
}

Expr operator-(const Expr& a, const Expr& b) {
    return Expr::add({a, Expr::mul({Expr::number(Rational(-1)), b})});
}

Expr operator/(const Expr& a, const Expr& b) {
    return Expr::mul({a, Expr::pow(b, Rational(-1))});
}

Expr Expr::operator-() const { return mul({number(Rational(-1)), *this}); }

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

double eval(const Expr& e, const Binding& b) {
    const ExprNode& n = e.node();
    switch (n.type) {
        case NodeType::Number:
            return n.num;
        case NodeType::Symbol: {
            auto it = b.find(n.name);
            if (it == b.end()) throw EvalError("unbound symbol", n.name);
            return it->second;
        }
        case NodeType::Add: {
            double s = 0;
            for (const auto& k : n.kids) s += eval(k, b);
            return s;
        }
        case NodeType::Mul: {
            double p = 1;
            for (const auto& k : n.kids) p *= eval(k, b);
            return p;
        }
        case NodeType::Pow: {
            double base = eval(n.kids[0], b);
            if (n.rat.is_integer()) {
                long long k = n.rat.num().to_ll();
                if (base == 0.0 && k < 0) throw EvalError("division by zero", e.str());
                double acc = 1.0, cur = base;
                long long m = k < 0 ? -k : k;
                while (m) {
                    if (m & 1) acc *= cur;
                    cur *= cur;
                    m >>= 1;
                }
                return k < 0 ? 1.0 / acc : acc;
            }
            if (base < 0) throw EvalError("fractional power of negative value", e.str());
            if (base == 0.0 && n.rat.is_negative()) throw EvalError("division by zero", e.str());
            return std::pow(base, n.rat.to_double());
        }
        case NodeType::Call: {
            double a = eval(n.kids[0], b);
            switch (n.func) {
                case Func::Exp: return std::exp(a);
                case Func::Ln:
                    if (a <= 0) throw EvalError("ln of non-positive value", e.str());
                    return std::log(a);
                case Func::Sin: return std::sin(a);
                case Func::Cos: return std::cos(a);
            }
        }
    }
    throw std::logic_error("eval: bad node");
}

namespace {

struct ValScale {
    double v, scale;
};

ValScale eval2(const Expr& e, const Binding& b) {
    const ExprNode& n = e.node();
    switch (n.type) {
        case NodeType::Number:
            return {n.num, std::abs(n.num)};
        case NodeType::Symbol: {
            auto it = b.find(n.name);
            if (it == b.end()) throw EvalError("unbound symbol", n.name);
            return {it->second, std::abs(it->second)};
        }
        case NodeType::Add: {
            ValScale r{0, 0};
            for (const auto& k : n.kids) {
                ValScale c = eval2(k, b);
                r.v += c.v;
                r.scale += c.scale;
            }
            return r;
        }
        case NodeType::Mul: {
            ValScale r{1, 1};
            for (const auto& k : n.kids) {
                ValScale c = eval2(k, b);
                r.v *= c.v;
                r.scale *= c.scale;
            }
            return r;
        }
        case NodeType::Pow: {
            double v = eval(e, b);
            double bs = std::abs(eval(n.kids[0], b));
            if (bs == 0.0) return {v, 0.0};
            return {v, std::pow(bs, n.rat.to_double())};
        }
        case NodeType::Call: {
            double v = eval(e, b);
            double s = (n.func == Func::Sin || n.func == Func::Cos) ? 1.0 : std::abs(v);
            return {v, s};
        }
    }
    throw std::logic_error("eval2: bad node");
}

}  // namespace

double magnitude_scale(const Expr& e, const Binding& b) { return eval2(e, b).scale; }

// ---------------------------------------------------------------------------
// Differentiation
// ---------------------------------------------------------------------------

Expr diff(const Expr& e, const std::string& var) {
    const ExprNode& n = e.node();
    switch (n.type) {
        case NodeType::Number:
            return Expr::number(Rational(0));
        case NodeType::Symbol:
            return Expr::number(Rational(n.name == var ? 1 : 0));
        case NodeType::Add: {
            std::vector<Expr> parts;
            for (const auto& k : n.kids) parts.push_back(diff(k, var));
            return Expr::add(std::move(parts));
        }
        case NodeType::Mul: {
            std::vector<Expr> sum;
            for (std::size_t i = 0; i < n.kids.size(); ++i) {
                std::vector<Expr> prod = n.kids;
                prod[i] = diff(n.kids[i], var);
                sum.push_back(Expr::mul(std::move(prod)));
            }
            return Expr::add(std::move(sum));
        }
        case NodeType::Pow: {
            Expr db = diff(n.kids[0], var);
            if (db.is_zero()) return Expr::number(Rational(0));
            return Expr::mul({Expr::number(n.rat),
                              Expr::pow(n.kids[0], n.rat - Rational(1)), db});
        }
        case NodeType::Call: {
            Expr da = diff(n.kids[0], var);
            if (da.is_zero()) return Expr::number(Rational(0));
            Expr outer;
            switch (n.func) {
                case Func::Exp: outer = e; break;
                case Func::Ln: outer = Expr::pow(n.kids[0], Rational(-1)); break;
                case Func::Sin: outer = cos_of(n.kids[0]); break;
                case Func::Cos: outer = -sin_of(n.kids[0]); break;
            }
            return Expr::mul({outer, da});
        }
    }
    throw std::logic_error("diff: bad node");
}

// ---------------------------------------------------------------------------
// Rebuild / substitute
// ---------------------------------------------------------------------------

Expr simplify(const Expr& e) {
    const ExprNode& n = e.node();
    switch (n.type) {
        case NodeType::Number:
        case NodeType::Symbol:
            return e;
        case NodeType::Add: {
            std::vector<Expr> kids;
            for (const auto& k : n.kids) kids.push_back(simplify(k));
            return Expr::add(std::move(kids));
        }
        case NodeType::Mul: {
            std::vector<Expr> kids;
            for (const auto& k : n.kids) kids.push_back(simplify(k));
            return Expr::mul(std::move(kids));
        }
        case NodeType::Pow:
            return Expr::pow(simplify(n.kids[0]), n.rat);
        case NodeType::Call:
            return Expr::call(n.func, simplify(n.kids[0]));
    }
    throw std::logic_error("simplify: bad node");
}

Expr substitute(const Expr& e, const std::map<std::string, Expr>& repl) {
    const ExprNode& n = e.node();
    switch (n.type) {
        case NodeType::Number:
            return e;
        case NodeType::Symbol: {
            auto it = repl.find(n.name);
            return it == repl.end() ? e : it->second;
        }
        case NodeType::Add: {
            std::vector<Expr> kids;
            for (const auto& k : n.kids) kids.push_back(substitute(k, repl));
            return Expr::add(std::move(kids));
        }
        case NodeType::Mul: {
            std::vector<Expr> kids;
            for (const auto& k : n.kids) kids.push_back(substitute(k, repl));
            return Expr::mul(std::move(kids));
        }
        case NodeType::Pow:
            return Expr::pow(substitute(n.kids[0], repl), n.rat);
        case NodeType::Call:
            return Expr::call(n.func, substitute(n.kids[0], repl));
    }
    throw std::logic_error("substitute: bad node");
}

void collect_symbols(const Expr& e, std::set<std::string>& out) {
    const ExprNode& n = e.node();
    if (n.type == NodeType::Symbol) out.insert(n.name);
    for (const auto& k : n.kids) collect_symbols(k, out);
}

std::set<std::string> free_symbols(const Expr& e) {
    std::set<std::string> s;
    collect_symbols(e, s);
    return s;
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

namespace {

// Precedence levels: add=1, mul=2, unary=3, pow=4, atom=5.
void print_rec(std::ostream& os, const Expr& e, int parent_prec);

bool leading_minus(const Expr& e) {
    const ExprNode& n = e.node();
    if (n.type == NodeType::Number) return n.num < 0;
    if (n.type == NodeType::Mul && n.kids[0].is_number()) return n.kids[0].node().num < 0;
    return false;
}

void print_number(std::ostream& os, const ExprNode& n, int parent_prec) {
    std::string s;
    if (n.exact) {
        s = n.rat.to_string();
    } else {
        std::ostringstream t;
        t.precision(17);
        t << n.num;
        s = t.str();
    }
    bool need = (s.find('-') != std::string::npos && parent_prec >= 3) ||
                (s.find('/') != std::string::npos && parent_prec >= 4);
    if (need) os << '(' << s << ')';
    else os << s;
}

void print_mul(std::ostream& os, const Expr& e, int parent_prec) {
    const ExprNode& n = e.node();
    std::vector<Expr> numer, denom;
    Rational coef(1);
    double fcoef = 1.0;
    bool have_fcoef = false;
    for (const auto& k : n.kids) {
        if (k.is_number()) {
            if (k.node().exact) coef = k.node().rat;
            else { fcoef = k.node().num; have_fcoef = true; }
            continue;
        }
        auto [base, ex] = [&k]() -> std::pair<Expr, Rational> {
            if (k.type() == NodeType::Pow) return {k.node().kids[0], k.node().rat};
            return {k, Rational(1)};
        }();
        if (ex.is_negative())
            denom.push_back(Expr::pow(base, -ex));
        else
            numer.push_back(k);
    }
    std::ostringstream body;
    bool first = true;
    bool neg = coef.is_negative();
    Rational cnum = neg ? -coef : coef;
    if (have_fcoef) {
        body.precision(17);
        body << fcoef;
        first = false;
    }
    if (!cnum.is_one() || (numer.empty() && !have_fcoef)) {
        if (!first) body << "*";
        if (!cnum.is_integer()) body << "(" << cnum.to_string() << ")";
        else body << cnum.to_string();
        first = false;
    }
    for (const auto& f : numer) {
        if (!first) body << "*";
        print_rec(body, f, 2);
        first = false;
    }
    for (const auto& d : denom) {
        body << "/";
        print_rec(body, d, 4);  // force parens around composite denominators
    }
    std::string s = body.str();
    int prec = neg ? 3 : 2;
    if (prec < parent_prec || (neg && parent_prec >= 2)) os << '(' << (neg ? "-" : "") << s << ')';
    else os << (neg ? "-" : "") << s;
}

void print_rec(std::ostream& os, const Expr& e, int parent_prec) {
    const ExprNode& n = e.node();
    switch (n.type) {
        case NodeType::Number:
            print_number(os, n, parent_prec);
            return;
        case NodeType::Symbol:
            os << n.name;
            return;
        case NodeType::Add: {
            std::ostringstream body;
            for (std::size_t i = 0; i < n.kids.size(); ++i) {
                const Expr& k = n.kids[i];
                if (i == 0) {
                    print_rec(body, k, 1);
                } else if (leading_minus(k)) {
                    body << " - ";
                    print_rec(body, -k, 2);
                } else {
                    body << " + ";
                    print_rec(body, k, 1);
                }
            }
            if (parent_prec > 1) os << '(' << body.str() << ')';
            else os << body.str();
            return;
        }
        case NodeType::Mul:
            print_mul(os, e, parent_prec);
            return;
        case NodeType::Pow: {
            if (n.rat == Rational(1, 2)) {
                os << "sqrt(";
                print_rec(os, n.kids[0], 0);
                os << ')';
                return;
            }
            std::ostringstream body;
            print_rec(body, n.kids[0], 5);
            body << '^';
            if (n.rat.is_integer() && !n.rat.is_negative()) body << n.rat.to_string();
            else body << '(' << n.rat.to_string() << ')';
            if (parent_prec > 4) os << '(' << body.str() << ')';
            else os << body.str();
            return;
        }
        case NodeType::Call: {
            switch (n.func) {
                case Func::Exp: os << "exp("; break;
                case Func::Ln: os << "ln("; break;
                case Func::Sin: os << "sin("; break;
                case Func::Cos: os << "cos("; break;
            }
            print_rec(os, n.kids[0], 0);
            os << ')';
            return;
        }
    }
}

}  // namespace

std::string Expr::str() const {
    std::ostringstream os;
    print_rec(os, *this, 0);
    return os.str();
}

// ---------------------------------------------------------------------------
// Compiled evaluation
// ---------------------------------------------------------------------------

CompiledExpr CompiledExpr::compile(const Expr& e, const std::vector<std::string>& symbols) {
    CompiledExpr c;
    std::map<std::string, int> slot;
    for (std::size_t i = 0; i < symbols.size(); ++i) slot[symbols[i]] = static_cast<int>(i);
    std::function<void(const Expr&)> emit = [&](const Expr& x) {
        const ExprNode& n = x.node();
        switch (n.type) {
            case NodeType::Number:
                c.prog_.push_back({OpCode::PushConst, 0, n.num});
                return;
            case NodeType::Symbol: {
                auto it = slot.find(n.name);
                if (it == slot.end()) throw EvalError("unbound symbol", n.name);
                c.prog_.push_back({OpCode::PushSlot, it->second, 0});
                return;
            }
            case NodeType::Add:
                for (const auto& k : n.kids) emit(k);
                c.prog_.push_back({OpCode::AddN, static_cast<int>(n.kids.size()), 0});
                return;
            case NodeType::Mul:
                for (const auto& k : n.kids) emit(k);
                c.prog_.push_back({OpCode::MulN, static_cast<int>(n.kids.size()), 0});
                return;
            case NodeType::Pow:
                emit(n.kids[0]);
                if (n.rat.is_integer() && n.rat.num().fits_ll() &&
                    std::llabs(n.rat.num().to_ll()) <= 64)
                    c.prog_.push_back({OpCode::PowInt, static_cast<int>(n.rat.num().to_ll()), 0});
                else
                    c.prog_.push_back({OpCode::PowReal, 0, n.rat.to_double()});
                return;
            case NodeType::Call:
                emit(n.kids[0]);
                switch (n.func) {
                    case Func::Exp: c.prog_.push_back({OpCode::CallExp, 0, 0}); return;
                    case Func::Ln: c.prog_.push_back({OpCode::CallLn, 0, 0}); return;
                    case Func::Sin: c.prog_.push_back({OpCode::CallSin, 0, 0}); return;
                    case Func::Cos: c.prog_.push_back({OpCode::CallCos, 0, 0}); return;
                }
        }
    };
    emit(e);
    return c;
}

double CompiledExpr::eval(std::span<const double> slots) const {
    auto& st = stack_;
    st.clear();
    for (const auto& ins : prog_) {
        switch (ins.op) {
            case OpCode::PushConst: st.push_back(ins.cst); break;
            case OpCode::PushSlot: st.push_back(slots[static_cast<std::size_t>(ins.arg)]); break;
            case OpCode::AddN: {
                double s = 0;
                for (int i = 0; i < ins.arg; ++i) { s += st.back(); st.pop_back(); }
                st.push_back(s);
                break;
            }
            case OpCode::MulN: {
                double p = 1;
                for (int i = 0; i < ins.arg; ++i) { p *= st.back(); st.pop_back(); }
                st.push_back(p);
                break;
            }
            case OpCode::PowInt: {
                double b = st.back();
                st.pop_back();
                long long k = ins.arg;
                long long m = k < 0 ? -k : k;
                double acc = 1.0, cur = b;
                while (m) {
                    if (m & 1) acc *= cur;
                    cur *= cur;
                    m >>= 1;
                }
                st.push_back(k < 0 ? 1.0 / acc : acc);
                break;
            }
            case OpCode::PowReal: {
                double b = st.back();
                st.pop_back();
                st.push_back(std::pow(b, ins.cst));
                break;
            }
            case OpCode::CallExp: st.back() = std::exp(st.back()); break;
            case OpCode::CallLn: st.back() = std::log(st.back()); break;
            case OpCode::CallSin: st.back() = std::sin(st.back()); break;
            case OpCode::CallCos: st.back() = std::cos(st.back()); break;
        }
    }
    return st.back();
}

}  // namespace fitk
