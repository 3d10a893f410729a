#include "fitk/geometry.hpp"

#include <cmath>

#include "fitk/parser.hpp"

namespace fitk {

std::vector<std::string> SystemDef::make_default_coords(int dim) {
    static const char* names[] = {"q1", "q2", "q3", "q4", "q5", "q6"};
    std::vector<std::string> cs;
    for (int i = 0; i < dim; ++i)
        cs.push_back(i < 6 ? names[i] : "q" + std::to_string(i + 1));
    return cs;
}

std::vector<std::string> SystemDef::velocity_names() const {
    std::vector<std::string> v;
    for (int a = 0; a < dim(); ++a) v.push_back(velocity_name(a));
    return v;
}

std::set<std::string> SystemDef::symbol_names(bool with_velocities, bool with_time) const {
    std::set<std::string> s(coords.begin(), coords.end());
    for (const auto& [k, v] : params) s.insert(k);
    if (with_velocities)
        for (const auto& v : velocity_names()) s.insert(v);
    if (with_time) s.insert("t");
    return s;
}

SampleDomain SystemDef::sample_domain(bool with_velocities, bool with_time,
                                      std::uint64_t seed) const {
    SampleDomain d;
    d.seed = seed;
    for (const auto& c : coords) {
        auto it = domain.find(c);
        d.boxes[c] = it != domain.end() ? it->second : std::make_pair(0.5, 1.5);
    }
    if (with_velocities)
        for (const auto& v : velocity_names()) d.boxes[v] = velocity_box;
    if (with_time) d.boxes["t"] = {0.0, 1.0};
    for (const auto& [k, v] : params) d.fixed[k] = v;
    d.singular_guards = singular;
    return d;
}

Expr SystemDef::parse(const std::string& text, bool with_velocities) const {
    return parse_expr(text, symbol_names(with_velocities, true));
}

// ---------------------------------------------------------------------------

CurvatureField::CurvatureField(const Connection& conn) : dim_(conn.dim()) {
    const int D = dim_;
    comps_.assign(static_cast<std::size_t>(D) * D * D * D, Expr::number(0ll));
    for (int a = 0; a < D; ++a)
        for (int b = 0; b < D; ++b)
            for (int c = 0; c < D; ++c)
                for (int d = 0; d < D; ++d) {
                    std::vector<Expr> terms;
                    terms.push_back(diff(conn.gamma(a, b, d), conn.coords()[static_cast<std::size_t>(c)]));
                    terms.push_back(-diff(conn.gamma(a, b, c), conn.coords()[static_cast<std::size_t>(d)]));
                    for (int s = 0; s < D; ++s) {
                        terms.push_back(conn.gamma(a, s, c) * conn.gamma(s, b, d));
                        terms.push_back(-(conn.gamma(a, s, d) * conn.gamma(s, b, c)));
                    }
                    comps_[static_cast<std::size_t>(((a * D + b) * D + c) * D + d)] =
                        Expr::add(std::move(terms));
                }
}

const Expr& CurvatureField::at(int a, int b, int c, int d) const {
    const int D = dim_;
    return comps_[static_cast<std::size_t>(((a * D + b) * D + c) * D + d)];
}

std::vector<SymTensor> metricity_residual(const Connection& conn, const SymTensor& metric) {
    if (metric.order() != 2 || metric.dim() != conn.dim())
        throw std::invalid_argument("metricity_residual: need an order-2 tensor matching the connection");
    return cov_derivative(metric, conn);
}

// ---------------------------------------------------------------------------
// Antiderivative of the restricted symbolic class
// ---------------------------------------------------------------------------

namespace {

bool depends_on(const Expr& e, const std::string& var) {
    return free_symbols(e).count(var) != 0;
}

// Matches a*var + b with a, b free of var. Returns (a, b).
std::optional<std::pair<Expr, Expr>> match_linear(const Expr& e, const std::string& var) {
    Expr a = simplify(diff(e, var));
    if (a.is_zero() || depends_on(a, var)) return std::nullopt;
    Expr b = simplify(e - a * Expr::symbol(var));
    if (depends_on(b, var)) return std::nullopt;
    return std::make_pair(a, b);
}

// One round of distributing products over sums (and small integer powers of
// sums), so log-derivative quotients separate into per-factor terms.
Expr distribute(const Expr& e) {
    const ExprNode& n = e.node();
    if (n.type == NodeType::Pow && n.kids[0].type() == NodeType::Add && n.rat.is_integer() &&
        !n.rat.is_negative() && n.rat < Rational(5)) {
        long long k = n.rat.num().to_ll();
        const auto& kids = n.kids[0].node().kids;
        std::vector<Expr> terms{Expr::number(1ll)};
        for (long long i = 0; i < k; ++i) {
            std::vector<Expr> next;
            for (const auto& t : terms)
                for (const auto& kid : kids) next.push_back(Expr::mul({t, kid}));
            terms = std::move(next);
            if (terms.size() > 1024) return e;  // keep expansion bounded
        }
        return Expr::add(std::move(terms));
    }
    if (n.type != NodeType::Mul) {
        if (n.type == NodeType::Add) {
            std::vector<Expr> kids;
            for (const auto& kid : n.kids) kids.push_back(distribute(kid));
            return Expr::add(std::move(kids));
        }
        return e;
    }
    std::vector<std::vector<Expr>> sums{{Expr::number(1ll)}};
    auto cross = [&](const std::vector<Expr>& options) {
        std::vector<std::vector<Expr>> next;
        for (const auto& prefix : sums)
            for (const auto& o : options) {
                auto p = prefix;
                p.push_back(o);
                next.push_back(std::move(p));
            }
        sums = std::move(next);
    };
    for (const auto& kid : n.kids) {
        Expr k = distribute(kid);
        if (k.type() == NodeType::Add && sums.size() * k.node().kids.size() <= 256)
            cross(k.node().kids);
        else
            cross({k});
    }
    std::vector<Expr> terms;
    for (auto& factors : sums) terms.push_back(Expr::mul(std::move(factors)));
    return Expr::add(std::move(terms));
}

std::optional<Expr> antider_factor(const Expr& f, const std::string& var) {
    // single var-dependent factor: var, var^r, (a var+b), (a var+b)^r
    Expr base = f;
    Rational r(1);
    if (f.type() == NodeType::Pow) {
        base = f.node().kids[0];
        r = f.node().rat;
    }
    auto lin = match_linear(base, var);
    if (!lin) return std::nullopt;
    auto [a, b] = *lin;
    if (r == Rational(-1)) return ln_of(base) / a;
    Rational r1 = r + Rational(1);
    return Expr::pow(base, r1) / (a * Expr::number(r1));
}

// -- partial fractions over structurally known linear factors -----------------

// dense univariate polynomial with expression coefficients
using UniPoly = std::vector<Expr>;

int unipoly_degree(const UniPoly& p) {
    for (int j = static_cast<int>(p.size()) - 1; j >= 0; --j)
        if (!p[static_cast<std::size_t>(j)].is_zero()) return j;
    return -1;
}

// p = q*(a v + b) + r with r free of v
std::pair<UniPoly, Expr> divide_linear(const UniPoly& p, const Expr& a, const Expr& b) {
    int deg = unipoly_degree(p);
    UniPoly q(deg > 0 ? static_cast<std::size_t>(deg) : 1, Expr::number(0ll));
    Expr carry = Expr::number(0ll);
    for (int j = deg; j >= 1; --j) {
        Expr cur = simplify(p[static_cast<std::size_t>(j)] + carry);
        Expr qc = simplify(cur / a);
        q[static_cast<std::size_t>(j - 1)] = qc;
        carry = simplify(-qc * b);
    }
    Expr r = simplify((deg >= 0 ? p[0] : Expr::number(0ll)) + carry);
    return {std::move(q), std::move(r)};
}

struct LinFactor {
    Expr a, b;  // a*v + b
    long long power;
};

// ∫ num(v) / Π (a_i v + b_i)^{k_i} dv, all coefficients free of v.
std::optional<Expr> integrate_pf(UniPoly num, std::vector<LinFactor> factors,
                                 const std::string& var, int fuel) {
    if (fuel <= 0) return std::nullopt;
    Expr v = Expr::symbol(var);
    for (auto it = factors.begin(); it != factors.end();)
        it = it->power == 0 ? factors.erase(it) : std::next(it);
    if (factors.empty()) {
        std::vector<Expr> parts;
        for (std::size_t j = 0; j < num.size(); ++j)
            parts.push_back(num[j] * Expr::pow(v, Rational(static_cast<long long>(j) + 1)) *
                            Expr::number(Rational(1, static_cast<long long>(j) + 1)));
        return Expr::add(std::move(parts));
    }
    LinFactor head = factors.front();
    if (unipoly_degree(num) >= 1) {
        // num = q*L + r: split off the polynomial multiple of the head factor
        auto [q, r] = divide_linear(num, head.a, head.b);
        std::vector<LinFactor> reduced = factors;
        --reduced.front().power;
        auto left = integrate_pf(std::move(q), std::move(reduced), var, fuel - 1);
        if (!left) return std::nullopt;
        auto right = integrate_pf({r}, std::move(factors), var, fuel - 1);
        if (!right) return std::nullopt;
        return *left + *right;
    }
    Expr r = num.empty() ? Expr::number(0ll) : num[0];
    if (r.is_zero()) return Expr::number(0ll);
    Expr L = simplify(head.a * v + head.b);
    if (factors.size() == 1) {
        if (head.power == 1) return r * ln_of(L) / head.a;
        Rational e(1 - head.power);
        return r * Expr::pow(L, e) / (head.a * Expr::number(e));
    }
    // cover-up split of 1/(L M) against the second factor
    LinFactor m = factors[1];
    Expr denom = simplify(head.a * m.b - m.a * head.b);  // a d - c b with L=av+b, M=cv+d
    if (denom.is_zero()) {
        // proportional factors: 1/M^m = (a/c)^m / L^m
        Expr scale = Expr::pow(simplify(head.a / m.a), Rational(m.power));
        std::vector<LinFactor> merged = factors;
        merged[0].power += merged[1].power;
        merged.erase(merged.begin() + 1);
        return integrate_pf({simplify(r * scale)}, std::move(merged), var, fuel - 1);
    }
    Expr A = simplify(head.a / denom);   // residue on L
    Expr B = simplify(-m.a / denom);     // residue on M
    std::vector<LinFactor> onM = factors;
    --onM[1].power;
    std::vector<LinFactor> onL = factors;
    --onL[0].power;
    auto t1 = integrate_pf({simplify(r * A)}, std::move(onM), var, fuel - 1);
    if (!t1) return std::nullopt;
    auto t2 = integrate_pf({simplify(r * B)}, std::move(onL), var, fuel - 1);
    if (!t2) return std::nullopt;
    return *t1 + *t2;
}

// e as C(var-free) * polynomial(v) / Π linear^k; nullopt when a var-dependent
// denominator factor is not linear.
std::optional<Expr> antider_rational(const Expr& e, const std::string& var) {
    std::vector<Expr> numer_parts;
    std::vector<LinFactor> factors;
    const ExprNode& n = e.node();
    std::vector<Expr> kids = n.type == NodeType::Mul ? n.kids : std::vector<Expr>{e};
    for (const auto& k : kids) {
        if (!depends_on(k, var)) {
            numer_parts.push_back(k);
            continue;
        }
        Expr base = k;
        Rational r(1);
        if (k.type() == NodeType::Pow) {
            base = k.node().kids[0];
            r = k.node().rat;
        }
        if (!r.is_integer()) return std::nullopt;
        long long power = r.num().to_ll();
        if (power >= 0) {
            numer_parts.push_back(k);
            continue;
        }
        auto lin = match_linear(base, var);
        if (!lin) return std::nullopt;
        factors.push_back({lin->first, lin->second, -power});
    }
    // expand the numerator into a dense polynomial in var
    Expr numer = Expr::mul(std::move(numer_parts));
    UniPoly poly;
    try {
        ExtendedRatFun f = to_rational_function_extended(numer, {var});
        for (const auto& atom : f.atoms)
            if (depends_on(atom, var)) return std::nullopt;
        for (const auto& [mono, c] : f.fun.den.terms())
            if (mono[0] > 0) return std::nullopt;
        std::map<std::string, Expr> back;
        for (std::size_t i = 0; i < f.atoms.size(); ++i)
            back["@atom" + std::to_string(i)] = f.atoms[i];
        Expr den = substitute(f.fun.den.to_expr(f.vars), back);
        for (const auto& [mono, c] : f.fun.num.terms()) {
            std::size_t j = mono[0];
            if (poly.size() <= j) poly.resize(j + 1, Expr::number(0ll));
            Expr coeff = Expr::number(c);
            for (std::size_t i = 1; i < f.vars.size(); ++i)
                if (mono[i])
                    coeff = coeff * Expr::pow(substitute(Expr::symbol(f.vars[i]), back),
                                              Rational(mono[i]));
            poly[j] = simplify(poly[j] + coeff / den);
        }
    } catch (const std::exception&) {
        return std::nullopt;
    }
    return integrate_pf(std::move(poly), std::move(factors), var, 64);
}

}  // namespace

std::optional<Expr> antiderivative(const Expr& raw, const std::string& var) {
    Expr e = simplify(raw);
    if (!depends_on(e, var)) return e * Expr::symbol(var);
    const ExprNode& n = e.node();
    if (n.type == NodeType::Add) {
        std::vector<Expr> parts;
        for (const auto& k : n.kids) {
            auto p = antiderivative(k, var);
            if (!p) return std::nullopt;
            parts.push_back(*p);
        }
        return Expr::add(std::move(parts));
    }
    // Pull out the var-free cofactor.
    std::vector<Expr> coeff, dep;
    if (n.type == NodeType::Mul) {
        for (const auto& k : n.kids)
            (depends_on(k, var) ? dep : coeff).push_back(k);
    } else {
        dep.push_back(e);
    }
    if (dep.size() == 1) {
        if (auto p = antider_factor(dep[0], var)) return Expr::mul({Expr::mul(coeff), *p});
    }
    // Rational shape: polynomial numerator over structurally linear factors.
    if (auto p = antider_rational(e, var)) return p;
    // A quotient like f'/f may separate into that shape only after the
    // numerator is distributed over its sums.
    Expr expanded = distribute(e);
    if (!expanded.same(e)) {
        if (auto p = antiderivative(expanded, var)) return p;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

namespace {

double simpson(const std::function<double(double)>& f, double a, double b, double fa,
               double fm, double fb, double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
           simpson(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

}  // namespace

double integrate_1d(const std::function<double(double)>& f, double a, double b, double tol) {
    if (a == b) return 0.0;
    double m = 0.5 * (a + b);
    double fa = f(a), fm = f(m), fb = f(b);
    double whole = (b - a) / 6.0 * (fa + 4 * fm + fb);
    return simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

double quadrature_potential(const std::vector<Expr>& grad,
                            const std::vector<std::string>& coords, const Binding& params,
                            const std::vector<double>& base, const std::vector<double>& point) {
    double total = 0.0;
    Binding b = params;
    for (std::size_t i = 0; i < coords.size(); ++i) b[coords[i]] = base[i];
    for (std::size_t leg = 0; leg < coords.size(); ++leg) {
        const Expr& g = grad[leg];
        auto f = [&](double s) {
            Binding bb = b;
            bb[coords[leg]] = s;
            return eval(g, bb);
        };
        total += integrate_1d(f, base[leg], point[leg]);
        b[coords[leg]] = point[leg];
    }
    return total;
}

// ---------------------------------------------------------------------------
// 2d classification
// ---------------------------------------------------------------------------

namespace {

bool gamma_is_zero(const Expr& g, const SampleDomain& dom) {
    if (g.is_zero()) return true;
    return is_identically_zero(g, dom).verdict == ZeroVerdict::ExactZero;
}

// ln F for case 1: F = exp(A(x,y) + B(y)), A = ∫Γ¹ dx, B' = Γ² - A_,y.
std::optional<Expr> case1_metric_function(const Expr& g1, const Expr& g2,
                                          const std::vector<std::string>& c,
                                          const SampleDomain& dom, std::string& why) {
    auto A = antiderivative(g1, c[0]);
    if (!A) { why = "no symbolic x-antiderivative for Γ¹₁₁"; return std::nullopt; }
    Expr rest = simplify(g2 - diff(*A, c[1]));
    if (depends_on(rest, c[0])) {
        auto chk = is_identically_zero(diff(rest, c[0]), dom);
        if (chk.verdict == ZeroVerdict::NonZero) {
            why = "inconsistent cross-derivatives during ln F recovery";
            return std::nullopt;
        }
    }
    auto B = antiderivative(rest, c[1]);
    if (!B) { why = "no symbolic y-antiderivative for the remainder"; return std::nullopt; }
    return simplify(exp_of(*A + *B));
}

}  // namespace

Classify2DResult classify_2d(const Connection& conn, const SampleDomain& dom) {
    if (conn.dim() != 2) throw std::invalid_argument("classify_2d: dimension must be 2");
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = b; c < 2; ++c) {
                bool diag = (a == 0 && b == 0 && c == 0) || (a == 1 && b == 1 && c == 1);
                if (!diag && !gamma_is_zero(conn.gamma(a, b, c), dom))
                    throw std::invalid_argument(
                        "classify_2d: connection has components beyond Γ¹₁₁ and Γ²₂₂");
            }
    const auto& c = conn.coords();
    const Expr& g1 = conn.gamma(0, 0, 0);
    const Expr& g2 = conn.gamma(1, 1, 1);

    Classify2DResult out;
    out.criterion = is_identically_zero(diff(g1, c[1]) - diff(g2, c[0]), dom);
    if (out.criterion.verdict == ZeroVerdict::NonZero) {
        out.cls = GeometryClass::NonRiemannian;
        out.witness = out.criterion.witness;
        out.note = "Γ¹₁₁,y ≠ Γ²₂₂,x";
        return out;
    }

    bool z1 = gamma_is_zero(g1, dom);
    bool z2 = gamma_is_zero(g2, dom);
    Expr one = Expr::number(1ll);

    auto finish = [&](int case_id, SymTensor g, Expr det, const std::string& note) {
        out.cls = GeometryClass::Riemannian;
        out.case_id = case_id;
        out.metric = MetricField{std::move(g), simplify(det)};
        out.note = note;
        return out;
    };

    if (z1 && z2) {
        SymTensor g(2, 2);
        g.set({0, 0}, one);
        g.set({1, 1}, one);
        return finish(4, std::move(g), one, "flat connection, f = h = 1, c0 = 0");
    }
    if (z2 && !depends_on(g1, c[1])) {
        // case 2 with h = 1: f solves f' = 2 f Γ¹₁₁
        if (auto A = antiderivative(g1, c[0])) {
            Expr f = simplify(exp_of(Expr::number(2ll) * *A));
            SymTensor g(2, 2);
            g.set({0, 0}, f);
            g.set({0, 1}, sqrt_of(f));
            return finish(2, std::move(g), -f, "Γ²₂₂ = 0; γ₂₂ degenerate block");
        }
    }
    if (z1 && !depends_on(g2, c[0])) {
        // case 3 with f = 1: h solves h' = 2 h Γ²₂₂
        if (auto B = antiderivative(g2, c[1])) {
            Expr h = simplify(exp_of(Expr::number(2ll) * *B));
            SymTensor g(2, 2);
            g.set({1, 1}, h);
            g.set({0, 1}, sqrt_of(h));
            return finish(3, std::move(g), -h, "Γ¹₁₁ = 0; γ₁₁ degenerate block");
        }
    }

    // General integrable case: γ = F(x,y)·offdiag.
    std::string why;
    if (auto F = case1_metric_function(g1, g2, c, dom, why)) {
        SymTensor g(2, 2);
        g.set({0, 1}, *F);
        return finish(1, std::move(g), -(*F) * (*F), "γ = F(x,y)·offdiag");
    }

    // Numeric fallback: recover ln F by quadrature from the box base corner and
    // sanity-check the defining relations at a few points.
    double x0 = dom.boxes.count(c[0]) ? dom.boxes.at(c[0]).first : 1.0;
    double y0 = dom.boxes.count(c[1]) ? dom.boxes.at(c[1]).first : 1.0;
    try {
        auto lnF = [&](double x, double y) {
            Binding b = dom.fixed;
            b[c[1]] = y0;
            auto fx = [&](double s) {
                Binding bb = b;
                bb[c[0]] = s;
                return eval(g1, bb);
            };
            double v = integrate_1d(fx, x0, x);
            Binding b2 = dom.fixed;
            b2[c[0]] = x;
            auto fy = [&](double s) {
                Binding bb = b2;
                bb[c[1]] = s;
                return eval(g2, bb);
            };
            v += integrate_1d(fy, y0, y);
            return v;
        };
        double probe = lnF(x0 + 0.25, y0 + 0.25);
        if (!std::isfinite(probe)) throw std::runtime_error("non-finite quadrature");
        double h = 1e-5;
        double d_num = (lnF(x0 + 0.25 + h, y0 + 0.25) - lnF(x0 + 0.25 - h, y0 + 0.25)) / (2 * h);
        Binding b = dom.fixed;
        b[c[0]] = x0 + 0.25;
        b[c[1]] = y0 + 0.25;
        if (std::abs(d_num - eval(g1, b)) > 1e-4 * (1 + std::abs(d_num)))
            throw std::runtime_error("quadrature-reconstructed ln F fails its defining relation");
        out.cls = GeometryClass::Riemannian;
        out.case_id = 1;
        out.metric_symbolic = false;
        out.note = "ln F recovered by quadrature from (" + std::to_string(x0) + ", " +
                   std::to_string(y0) + "); " + why;
        return out;
    } catch (const std::exception& err) {
        out.cls = GeometryClass::Indeterminate;
        out.note = why + "; quadrature failed: " + err.what();
        return out;
    }
}

// ---------------------------------------------------------------------------
// Coupled-oscillator family
// ---------------------------------------------------------------------------

OscillatorFamily oscillator_family_builder(const Expr& f1, const std::string& arg_name,
                                           const Expr& s0, const Expr& k, const Expr& p,
                                           const SampleDomain& dom) {
    Expr x = Expr::symbol("x"), y = Expr::symbol("y");
    Expr w = p * (y * y - x * x) - Expr::number(2ll) * k * x * y;
    Expr f1w = substitute(f1, {{arg_name, w}});
    Expr L2 = (p * y - k * x) * f1w - s0 * x / w;
    Expr L1 = (k * y + p * x) * f1w + s0 * x * (k * y + p * x) / ((k * x - p * y) * w) +
              s0 / (k * x - p * y);
    L1 = simplify(L1);
    L2 = simplify(L2);
    SampleDomain sampled = dom;
    sampled.sample_only = true;  // witnesses come from sampling; skip normal forms
    for (const auto* L : {&L1, &L2}) {
        if (L->is_zero() || is_identically_zero(*L, sampled).verdict != ZeroVerdict::NonZero)
            throw std::invalid_argument("oscillator_family_builder: Killing vector component "
                                        "is identically zero");
    }
    Connection conn(2, {"x", "y"});
    conn.set_gamma(0, 0, 0, simplify(diff(L1, "x") / L1));
    conn.set_gamma(1, 1, 1, simplify(diff(L2, "y") / L2));

    SystemDef sys({"x", "y"}, conn);
    sys.name = "coupled-oscillators-family";
    sys.forces = {simplify(k * x - p * y), simplify(k * y + p * x)};
    sys.singular = {L1, L2};
    if (!s0.is_zero()) {
        sys.singular.push_back(w);
        sys.singular.push_back(k * x - p * y);
    }
    for (const auto& [name, box] : dom.boxes)
        if (name == "x" || name == "y") sys.domain[name] = box;
    for (const auto& [name, v] : dom.fixed) sys.params[name] = v;

    OscillatorFamily fam{{L1, L2}, conn, std::move(sys), ZeroResult{}, false};
    SampleDomain d2 = sampled;
    d2.singular_guards.insert(d2.singular_guards.end(), {L1, L2});
    fam.nonriemannian_criterion =
        is_identically_zero(diff(conn.gamma(0, 0, 0), "y") - diff(conn.gamma(1, 1, 1), "x"), d2);
    fam.nonriemannian = fam.nonriemannian_criterion.verdict == ZeroVerdict::NonZero;
    return fam;
}

}  // namespace fitk
