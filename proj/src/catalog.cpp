#include "fitk/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>

#include "fitk/parser.hpp"

namespace fitk {

Trajectory CatalogEntry::run(const State& ic, double tend, const IntegratorOptions& opts) const {
    if (accel_override)
        return integrate_rhs(*accel_override,
                             guard_override ? *guard_override : GuardValuesFn{}, system.dim(),
                             ic, tend, opts);
    return integrate(system, ic, tend, opts);
}

Trajectory CatalogEntry::run_reference(const IntegratorOptions* opts) const {
    return run(reference_ic, t_end, opts ? *opts : integrator);
}

namespace {

std::map<std::string, double> with_defaults(const std::map<std::string, double>& given,
                                            const std::map<std::string, double>& defaults,
                                            const std::string& entry) {
    std::map<std::string, double> out = defaults;
    for (const auto& [k, v] : given) {
        if (!defaults.count(k))
            throw std::invalid_argument(entry + ": unknown parameter '" + k + "'");
        out[k] = v;
    }
    return out;
}

void require_nonzero(const std::map<std::string, double>& p, const std::string& name,
                     const std::string& entry) {
    if (p.at(name) == 0.0)
        throw std::invalid_argument(entry + ": parameter '" + name + "' must be nonzero");
}

void bind_params(SystemDef& sys, const std::map<std::string, double>& p) {
    sys.params = p;
    for (const auto& [k, v] : p) sys.exact_params[k] = rational_from_double(v);
}

CatalogFI make_poly_fi(const std::string& name, const std::string& tag,
                       PolyTimeCandidate cand, const SystemDef& sys) {
    CatalogFI fi;
    fi.name = name;
    fi.kind = "poly";
    fi.tag = tag;
    fi.expression = build_integral1(cand, sys);
    fi.poly = std::move(cand);
    fi.evaluator = compile_fi(fi.expression, sys);
    return fi;
}

CatalogFI make_exp_fi(const std::string& name, const std::string& tag, ExpTimeCandidate cand,
                      const SystemDef& sys) {
    CatalogFI fi;
    fi.name = name;
    fi.kind = "exp";
    fi.tag = tag;
    fi.expression = build_integral2(cand, sys);
    fi.exponential = std::move(cand);
    fi.evaluator = compile_fi(fi.expression, sys);
    return fi;
}

// -- coupled oscillators with quadratic damping ------------------------------

CatalogEntry make_coupled_nr(const std::map<std::string, double>& given) {
    auto p = with_defaults(given, {{"k", 2.0}, {"p", 1.0}}, "coupled-oscillators-nr");
    require_nonzero(p, "k", "coupled-oscillators-nr");
    require_nonzero(p, "p", "coupled-oscillators-nr");

    Connection conn(2, {"x", "y"});
    std::set<std::string> names{"x", "y", "k", "p"};
    conn.set_gamma(0, 0, 0, parse_expr("p/(k*y+p*x)", names));
    conn.set_gamma(1, 1, 1, parse_expr("p/(p*y-k*x)", names));

    SystemDef sys({"x", "y"}, conn);
    sys.name = "coupled-oscillators-nr";
    sys.forces = {parse_expr("k*x-p*y", names), parse_expr("k*y+p*x", names)};
    sys.singular = {parse_expr("k*y+p*x", names), parse_expr("p*y-k*x", names)};
    sys.domain = {{"x", {0.5, 1.0}}, {"y", {2.5, 3.5}}};
    bind_params(sys, p);

    CatalogEntry e;
    e.name = sys.name;
    e.system = sys;
    e.reference_ic = {0.0, {1.0, 0.5}, {0.1, -0.2}};
    e.t_end = 0.75;  // the damped flow meets the k*y+p*x = 0 locus near t = 0.86

    SymTensor kv(2, 1);
    kv.set({0}, parse_expr("k*y+p*x", names));
    kv.set({1}, parse_expr("p*y-k*x", names));
    e.symmetries.push_back({"L", "kv", kv});

    PolyTimeCandidate c;
    c.m = 1;
    c.n = 0;
    c.set_tensor(0, 1, kv);
    e.fis.push_back(make_poly_fi("I1", "autonomous-linear-integral", std::move(c), sys));
    return e;
}

// -- the same family routed through the builder ------------------------------

CatalogEntry make_family(const std::map<std::string, double>& given) {
    auto p = with_defaults(given, {{"k", 2.0}, {"p", 1.0}, {"s0", 0.0}},
                           "coupled-oscillators-family");
    require_nonzero(p, "k", "coupled-oscillators-family");
    require_nonzero(p, "p", "coupled-oscillators-family");

    SampleDomain dom;
    dom.boxes = {{"x", {0.5, 1.0}}, {"y", {2.5, 3.5}}};
    dom.fixed = {{"k", p.at("k")}, {"p", p.at("p")}, {"s0", p.at("s0")}};
    // s0 enters the vector components; binding it here keeps the expressions
    // in their collapsed form when it vanishes
    OscillatorFamily fam = oscillator_family_builder(
        Expr::number(1ll), "arg", Expr::number(rational_from_double(p.at("s0"))),
        Expr::symbol("k"), Expr::symbol("p"), dom);

    CatalogEntry e;
    e.name = "coupled-oscillators-family";
    e.system = fam.system;
    e.system.name = e.name;
    bind_params(e.system, p);
    e.reference_ic = {0.0, {1.0, 0.5}, {0.1, -0.2}};
    e.t_end = 0.75;

    SymTensor kv(2, 1);
    kv.set({0}, fam.killing_vector[0]);
    kv.set({1}, fam.killing_vector[1]);
    e.symmetries.push_back({"L", "kv", kv});

    PolyTimeCandidate c;
    c.m = 1;
    c.n = 0;
    c.set_tensor(0, 1, kv);
    c.s0 = Expr::number(rational_from_double(p.at("s0")));
    e.fis.push_back(make_poly_fi("I1", "autonomous-linear-integral", std::move(c), e.system));
    return e;
}

// -- quadratic-velocity coupling with an exponential second-order symmetry ----

CatalogEntry make_beta(const std::map<std::string, double>& given) {
    auto p = with_defaults(given, {{"beta", 0.5}}, "beta-system");
    require_nonzero(p, "beta", "beta-system");

    Connection conn(2, {"u", "w"});
    std::set<std::string> names{"u", "w", "beta"};
    conn.set_gamma(0, 0, 0, parse_expr("-8*beta*w/u^3", names));
    conn.set_gamma(0, 0, 1, parse_expr("4*beta/u^2", names));
    conn.set_gamma(1, 0, 1, parse_expr("-8*beta*w/u^3", names));
    conn.set_gamma(1, 1, 1, parse_expr("4*beta/u^2", names));

    SystemDef sys({"u", "w"}, conn);
    sys.name = "beta-system";
    sys.forces = {parse_expr("1/u^2", names), parse_expr("-2*w/u^3", names)};
    sys.singular = {parse_expr("u", names)};
    sys.domain = {{"u", {0.8, 1.6}}, {"w", {-0.5, 0.5}}};
    bind_params(sys, p);

    CatalogEntry e;
    e.name = sys.name;
    e.system = sys;
    e.reference_ic = {0.0, {1.0, 0.1}, {0.3, -0.2}};
    e.t_end = 1.0;  // u(t) reaches the singular locus u = 0 near t = 1.15

    Expr E = parse_expr("exp(12*beta*w/u^2)", names);
    SymTensor kt(2, 2);
    kt.set({0, 1}, E);
    e.symmetries.push_back({"C", "kt", kt});

    PolyTimeCandidate c;
    c.m = 2;
    c.n = 0;
    SymTensor half(2, 2);
    half.set({0, 1}, simplify(E / Expr::number(2ll)));
    c.set_tensor(0, 2, half);
    c.G = simplify(E / (Expr::number(12ll) * Expr::symbol("beta")));
    e.fis.push_back(make_poly_fi("qfi", "autonomous-quadratic-integral", std::move(c), sys));

    Expr w32 = parse_expr("-32*beta^2*w/u^5", names);
    Expr w24 = parse_expr("24*beta*w/u^4", names);
    e.curvature_identities = {
        {0, 0, 0, 1, w32},           // R^1_{112}
        {1, 1, 1, 0, w32},           // R^2_{221}
        {1, 1, 0, 1, simplify(-w32)},// R^2_{212}
        {0, 0, 1, 0, simplify(-w32)},// R^1_{121}
        {1, 0, 0, 1, w24},           // R^2_{112}
        {1, 0, 1, 0, simplify(-w24)} // R^2_{121}
    };
    return e;
}

// -- three-dimensional superintegrable potential with exponential integrals ---

CatalogEntry make_evans(const std::map<std::string, double>& given) {
    auto p = with_defaults(given, {{"lambda", 1.0}, {"k", 0.3}, {"c1", 0.2}, {"c2", 0.5}},
                           "evans-e3");
    require_nonzero(p, "lambda", "evans-e3");

    Connection conn = Connection::zero(3, {"x", "y", "z"});
    SystemDef sys({"x", "y", "z"}, conn);
    sys.name = "evans-e3";
    std::set<std::string> names{"x", "y", "z", "lambda", "k", "c1", "c2"};
    Expr V = parse_expr(
        "-lambda^2/2*(x^2+y^2) + k*x/(y^2*sqrt(x^2+y^2)) + c1/y^2 - lambda^2/8*z^2 + c2/z^2",
        names);
    for (const auto& q : sys.coords) sys.forces.push_back(simplify(diff(V, q)));
    sys.singular = {Expr::symbol("y"), Expr::symbol("z")};
    sys.domain = {{"x", {0.4, 1.2}}, {"y", {0.6, 1.4}}, {"z", {0.7, 1.5}}};
    bind_params(sys, p);

    CatalogEntry e;
    e.name = sys.name;
    e.system = sys;
    e.reference_ic = {0.0, {0.7, 0.8, 0.9}, {0.2, -0.1, 0.15}};
    e.t_end = 4.0;

    Expr lam = Expr::symbol("lambda");
    Expr x = Expr::symbol("x"), y = Expr::symbol("y"), z = Expr::symbol("z");
    Expr half = Expr::number(Rational(1, 2));

    {   // Hamiltonian
        PolyTimeCandidate c;
        c.m = 2;
        c.n = 0;
        SymTensor L(3, 2);
        for (int i = 0; i < 3; ++i) L.set({i, i}, half);
        c.set_tensor(0, 2, L);
        c.G = V;
        e.fis.push_back(make_poly_fi("I1", "hamiltonian", std::move(c), sys));
    }
    {   // angular-momentum square plus potential part
        PolyTimeCandidate c;
        c.m = 2;
        c.n = 0;
        SymTensor L(3, 2);
        L.set({0, 0}, half * y * y);
        L.set({0, 1}, simplify(-half * x * y));
        L.set({1, 1}, half * x * x);
        c.set_tensor(0, 2, L);
        c.G = parse_expr("(k*sqrt(x^2+y^2) + c1*x)*x/y^2", names);
        e.fis.push_back(make_poly_fi("I2", "angular-quadratic-integral", std::move(c), sys));
    }
    {   // separated z-sector energy
        PolyTimeCandidate c;
        c.m = 2;
        c.n = 0;
        SymTensor L(3, 2);
        L.set({2, 2}, half);
        c.set_tensor(0, 2, L);
        c.G = parse_expr("-lambda^2/8*z^2 + c2/z^2", names);
        e.fis.push_back(make_poly_fi("I3", "z-sector-energy", std::move(c), sys));
    }
    {   // exponential integral, angular block
        ExpTimeCandidate c;
        c.m = 2;
        c.lambda = lam;
        SymTensor L2(3, 2);
        L2.set({0, 1}, simplify(-half * y));
        L2.set({1, 1}, x);
        SymTensor L1(3, 1);
        L1.set({0}, lam * y * y);
        L1.set({1}, simplify(-lam * x * y));
        c.set_tensor(2, L2);
        c.set_tensor(1, L1);
        e.fis.push_back(make_exp_fi("I4", "exponential-angular-integral", std::move(c), sys));
    }
    {   // exponential integral, z sector
        ExpTimeCandidate c;
        c.m = 2;
        c.lambda = lam;
        SymTensor L2(3, 2);
        L2.set({2, 2}, Expr::number(1ll));
        SymTensor L1(3, 1);
        L1.set({2}, simplify(-lam * z));
        c.set_tensor(2, L2);
        c.set_tensor(1, L1);
        e.fis.push_back(make_exp_fi("I5", "exponential-z-integral", std::move(c), sys));
    }
    return e;
}

// -- separable potential with a cubic integral and an implicit F(x) ----------

struct QuarticInF {
    // Phi(x, F) = P(u, a) + k2 x^2 with u = F - a, a = c1 x^2.
    GravelParams p;
    double a = 0, da = 0, x = 0;

    void at_x(double xx) {
        x = xx;
        a = p.c1 * x * x;
        da = 2 * p.c1 * x;
    }
    // coefficients of P in u, ascending
    std::array<double, 5> coeffs() const {
        return {p.k2 * x * x + 4 * p.k1 * p.k1 - 16.0 / 3.0 * p.k1 * p.k3 * a,
                -16 * p.k1 * a - 8 * p.k1 * p.k3,
                -12 * p.k1 + 8 * p.k3 * a + 4 * p.k3 * p.k3,
                8 * a + 12 * p.k3,
                9.0};
    }
    double P(double u) const {
        auto c = coeffs();
        return (((c[4] * u + c[3]) * u + c[2]) * u + c[1]) * u + c[0];
    }
    double Pu(double u) const {
        auto c = coeffs();
        return ((4 * c[4] * u + 3 * c[3]) * u + 2 * c[2]) * u + c[1];
    }
    double Pu_scale(double u) const {
        auto c = coeffs();
        double au = std::abs(u);
        return ((4 * std::abs(c[4]) * au + 3 * std::abs(c[3])) * au + 2 * std::abs(c[2])) * au +
               std::abs(c[1]) + 1e-30;
    }
    double Pa(double u) const {
        return 8 * u * u * u + 8 * p.k3 * u * u - 16 * p.k1 * u - 16.0 / 3.0 * p.k1 * p.k3;
    }
    // dF/dx = -Phi_x / Phi_F at fixed F
    double Fprime(double u) const {
        double phi_x = (Pa(u) - Pu(u)) * da + 2 * p.k2 * x;
        return -phi_x / Pu(u);
    }
};

std::vector<double> quartic_real_roots(const std::array<double, 5>& c) {
    // Durand-Kerner; the leading coefficient is the constant 9, so the degree
    // never collapses.
    using C = std::complex<double>;
    std::array<C, 4> r{C(0.4, 0.9), C(-0.86, 0.44), C(0.2, -0.97), C(0.93, -0.1)};
    auto eval = [&](C z) {
        C v = c[4];
        for (int i = 3; i >= 0; --i) v = v * z + c[i];
        return v;
    };
    // scale initial guesses by a root bound
    double bound = 1.0;
    for (int i = 0; i < 4; ++i) bound = std::max(bound, std::abs(c[i] / c[4]));
    bound = 1.0 + bound;
    for (auto& z : r) z *= bound;
    for (int it = 0; it < 400; ++it) {
        double move = 0;
        for (int i = 0; i < 4; ++i) {
            C denom = c[4];
            for (int j = 0; j < 4; ++j)
                if (j != i) denom *= (r[i] - r[j]);
            C step = eval(r[i]) / denom;
            r[i] -= step;
            move = std::max(move, std::abs(step));
        }
        if (move < 1e-14 * bound) break;
    }
    std::vector<double> out;
    for (const auto& z : r)
        if (std::abs(z.imag()) < 1e-7 * (1 + std::abs(z.real()))) out.push_back(z.real());
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<double> gravel_roots_impl(double x, const GravelParams& p) {
    QuarticInF q{p};
    q.at_x(x);
    std::vector<double> roots = quartic_real_roots(q.coeffs());
    // polish and shift back to F
    for (auto& u : roots) {
        for (int it = 0; it < 8; ++it) {
            double du = q.Pu(u);
            if (std::abs(du) < 1e-12 * q.Pu_scale(u)) break;
            u -= q.P(u) / du;
        }
        u += q.a;
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

}  // namespace

std::vector<double> gravel_roots(double x, const GravelParams& p) {
    return gravel_roots_impl(x, p);
}

GravelRoot gravel_F(double x, const GravelParams& p, double seed) {
    QuarticInF q{p};
    q.at_x(x);
    double u = seed - q.a;
    bool converged = false;
    for (int it = 0; it < 60; ++it) {
        double f = q.P(u);
        double df = q.Pu(u);
        if (std::abs(df) < 1e-11 * q.Pu_scale(u)) break;
        double step = f / df;
        u -= step;
        if (std::abs(step) <= 1e-14 * (1 + std::abs(u))) {
            converged = true;
            break;
        }
    }
    if (!converged || std::abs(q.P(u)) > 1e-9 * (1 + std::abs(u))) {
        auto roots = gravel_roots_impl(x, p);
        if (roots.empty())
            throw GravelError("no real branch of the quartic at x = " + std::to_string(x));
        double best = roots[0];
        for (double r : roots)
            if (std::abs(r - seed) < std::abs(best - seed)) best = r;
        u = best - q.a;
    }
    double du = q.Pu(u);
    if (std::abs(du) < 1e-11 * q.Pu_scale(u))
        throw GravelError("branch collision (Phi_F = 0) at x = " + std::to_string(x) +
                          ", F = " + std::to_string(u + q.a));
    return {u + q.a, q.Fprime(u)};
}

GravelRoot GravelTracker::at(double x) {
    QuarticInF q{p_};
    q.at_x(x);
    double seed = primed_ ? last_F_ + last_Fp_ * (x - last_x_) : p_.c1 * x * x / 9.0;
    double u = seed - q.a;
    for (int it = 0; it < 60; ++it) {
        double df = q.Pu(u);
        if (std::abs(df) < 1e-11 * q.Pu_scale(u)) break;
        double step = q.P(u) / df;
        u -= step;
        if (std::abs(step) <= 1e-14 * (1 + std::abs(u))) break;
    }
    if (std::abs(q.P(u)) > 1e-9 * (1 + std::abs(u))) {
        auto roots = gravel_roots_impl(x, p_);
        if (roots.empty())
            throw GravelError("branch lost: no real root at x = " + std::to_string(x));
        double best = roots[0];
        for (double r : roots)
            if (std::abs(r - seed) < std::abs(best - seed)) best = r;
        u = best - q.a;
    }
    double F = u + q.a;
    double du = q.Pu(u);
    // near a root crossing the implicit derivative degenerates; carry the
    // tangent of the tracked branch through it
    double Fp = std::abs(du) >= 1e-9 * q.Pu_scale(u) ? q.Fprime(u)
               : primed_                             ? last_Fp_
                                                     : 2 * p_.c1 * x / 9.0;
    primed_ = true;
    last_x_ = x;
    last_F_ = F;
    last_Fp_ = Fp;
    return {F, Fp};
}

namespace {

CatalogEntry make_gravel(const std::map<std::string, double>& given) {
    auto p = with_defaults(given, {{"c1", 1.0}, {"k1", 0.0}, {"k2", 0.0}, {"k3", 0.0}},
                           "gravel-cubic");
    require_nonzero(p, "c1", "gravel-cubic");
    const bool exact_mode = p.at("k1") == 0.0 && p.at("k2") == 0.0 && p.at("k3") == 0.0;

    Connection conn = Connection::zero(2, {"x", "y"});
    SystemDef sys({"x", "y"}, conn);
    sys.name = "gravel-cubic";
    std::set<std::string> names{"x", "y", "c1", "k3"};
    // seed branch F = c1 x^2 / 9 (exact on the k1 = k2 = k3 = 0 locus)
    Expr F = parse_expr("c1*x^2/9", names);
    Expr Fp = parse_expr("2*c1*x/9", names);
    sys.forces = {Fp, parse_expr("2*c1*y", names)};
    sys.domain = {{"x", {0.5, 1.5}}, {"y", {-0.8, 0.8}}};
    bind_params(sys, p);

    CatalogEntry e;
    e.name = sys.name;
    e.system = sys;
    // On the perturbed branch (k1 > 0) the root sheet folds near x ~ 0.56, so
    // the numeric-mode reference orbit is confined to the well around x ~ 0.64.
    e.reference_ic = exact_mode ? State{0.0, {1.0, 0.4}, {0.1, -0.3}}
                                : State{0.0, {0.75, 0.3}, {0.0, 0.2}};
    e.t_end = 5.0;

    Expr x = Expr::symbol("x"), y = Expr::symbol("y");
    Expr half = Expr::number(Rational(1, 2));
    Expr c1s = Expr::symbol("c1"), k3s = Expr::symbol("k3");

    {   // x-sector energy as an order-2 candidate
        PolyTimeCandidate c;
        c.m = 2;
        c.n = 0;
        SymTensor L(2, 2);
        L.set({0, 0}, half);
        c.set_tensor(0, 2, L);
        c.G = F;
        e.fis.push_back(make_poly_fi("I1", "x-sector-energy", std::move(c), sys));
    }
    {   // y-sector energy
        PolyTimeCandidate c;
        c.m = 2;
        c.n = 0;
        SymTensor L(2, 2);
        L.set({1, 1}, half);
        c.set_tensor(0, 2, L);
        c.G = simplify(c1s * y * y);
        e.fis.push_back(make_poly_fi("I2", "y-sector-energy", std::move(c), sys));
    }
    {   // the cubic integral
        PolyTimeCandidate c;
        c.m = 3;
        c.n = 0;
        SymTensor L3(2, 3);
        L3.set({0, 0, 0}, simplify(-y));
        L3.set({0, 0, 1}, simplify(x / Expr::number(3ll)));
        SymTensor L1(2, 1);
        L1.set({0}, simplify(-(Expr::number(3ll) * y * F - c1s * x * x * y + k3s * y)));
        L1.set({1}, simplify(Fp / (Expr::number(2ll) * c1s) *
                             (Expr::number(3ll) * F - c1s * x * x + k3s)));
        c.set_tensor(0, 3, L3);
        c.set_tensor(0, 1, L1);
        e.fis.push_back(make_poly_fi("I3", "cubic-integral", std::move(c), sys));
    }

    if (!exact_mode) {
        // Forces and integrals through the tracked implicit branch.
        GravelParams gp{p.at("c1"), p.at("k1"), p.at("k2"), p.at("k3")};
        auto accel_tracker = std::make_shared<GravelTracker>(gp);
        double c1 = gp.c1, k3 = gp.k3;
        e.accel_override = [accel_tracker, c1](double, const std::vector<double>& q,
                                               const std::vector<double>&,
                                               std::vector<double>& out) {
            GravelRoot r = accel_tracker->at(q[0]);
            out = {-r.Fprime, -2 * c1 * q[1]};
        };
        auto fi_eval = [gp, c1, k3](int which) {
            auto tracker = std::make_shared<GravelTracker>(gp);
            return StateFn([tracker, c1, k3, which](const State& s) {
                double x = s.q[0], y = s.q[1], vx = s.v[0], vy = s.v[1];
                GravelRoot r = tracker->at(x);
                switch (which) {
                    case 0: return 0.5 * vx * vx + r.F;
                    case 1: return 0.5 * vy * vy + c1 * y * y;
                    default: {
                        double ang = x * vy - y * vx;
                        return ang * vx * vx - (3 * y * r.F - c1 * x * x * y + k3 * y) * vx +
                               r.Fprime / (2 * c1) * (3 * r.F - c1 * x * x + k3) * vy;
                    }
                }
            });
        };
        for (int i = 0; i < 3; ++i) {
            e.fis[static_cast<std::size_t>(i)].symbolic = false;
            e.fis[static_cast<std::size_t>(i)].evaluator = fi_eval(i);
            e.fis[static_cast<std::size_t>(i)].poly.reset();
        }
    }
    return e;
}

}  // namespace

std::vector<std::string> list_catalog() {
    return {"coupled-oscillators-nr", "coupled-oscillators-family", "beta-system", "evans-e3",
            "gravel-cubic"};
}

CatalogEntry instantiate(const std::string& name, const std::map<std::string, double>& params) {
    if (name == "coupled-oscillators-nr") return make_coupled_nr(params);
    if (name == "coupled-oscillators-family") return make_family(params);
    if (name == "beta-system") return make_beta(params);
    if (name == "evans-e3") return make_evans(params);
    if (name == "gravel-cubic") return make_gravel(params);
    throw std::invalid_argument("unknown catalog entry '" + name + "'");
}

}  // namespace fitk
