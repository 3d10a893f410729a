#include "fitk/conditions.hpp"

#include <algorithm>

namespace fitk {

SymTensor PolyTimeCandidate::tensor(int N, int rank, int dim) const {
    auto it = tensors.find({N, rank});
    if (it != tensors.end()) return it->second;
    return SymTensor(dim, rank);
}

void PolyTimeCandidate::set_tensor(int N, int rank, SymTensor t) {
    tensors.insert_or_assign({N, rank}, std::move(t));
}

bool PolyTimeCandidate::stored_nonzero(int N, int rank) const {
    auto it = tensors.find({N, rank});
    return it != tensors.end() && !it->second.is_structurally_zero();
}

SymTensor ExpTimeCandidate::tensor(int rank, int dim) const {
    auto it = tensors.find(rank);
    if (it != tensors.end()) return it->second;
    return SymTensor(dim, rank);
}

void ExpTimeCandidate::set_tensor(int rank, SymTensor t) {
    tensors.insert_or_assign(rank, std::move(t));
}

bool ConditionReport::pass() const {
    return std::all_of(rows.begin(), rows.end(),
                       [](const ConditionRow& r) { return r.result.pass(); });
}

const ConditionRow* ConditionReport::first_failure() const {
    for (const auto& r : rows)
        if (!r.result.pass()) return &r;
    return nullptr;
}

// ---------------------------------------------------------------------------
// helpers
// ---------------------------------------------------------------------------

namespace {

SampleDomain condition_domain(const SystemDef& sys, const CheckOptions& opts,
                              bool with_velocities, bool with_time) {
    SampleDomain d = sys.sample_domain(with_velocities, with_time, opts.seed);
    d.samples = opts.samples;
    d.tolerance = opts.tolerance;
    return d;
}

ZeroResult test_field(const SymTensor& field, const SampleDomain& dom) {
    ZeroResult agg{ZeroVerdict::ExactZero, std::nullopt, 0, 0.0, ""};
    for (const auto& idx : field.index_list()) {
        ZeroResult r = is_identically_zero(field.at(idx), dom);
        agg.samples += r.samples;
        agg.max_ratio = std::max(agg.max_ratio, r.max_ratio);
        if (r.verdict == ZeroVerdict::NonZero) {
            r.note = "component (";
            for (std::size_t i = 0; i < idx.size(); ++i)
                r.note += (i ? "," : "") + std::to_string(idx[i] + 1);
            r.note += ")";
            r.samples = agg.samples;
            r.max_ratio = agg.max_ratio;
            return r;
        }
        if (r.verdict == ZeroVerdict::ProbablyZero && agg.verdict == ZeroVerdict::ExactZero)
            agg.verdict = ZeroVerdict::ProbablyZero;
    }
    return agg;
}

ZeroResult test_scalar(const Expr& e, const SampleDomain& dom) {
    return is_identically_zero(e, dom);
}

SymTensor gradient(const Expr& e, const SystemDef& sys) {
    SymTensor g(sys.dim(), 1);
    for (int a = 0; a < sys.dim(); ++a) g.set({a}, diff(e, sys.coords[static_cast<std::size_t>(a)]));
    return g;
}

Expr scalar_contraction(const SymTensor& rank1, const SystemDef& sys) {
    return contract_last(rank1, sys.forces).at(std::initializer_list<int>{});
}

std::string row_name(const std::string& base, std::initializer_list<int> args) {
    std::string s = base;
    if (args.size()) {
        s += "[";
        bool first = true;
        for (int a : args) {
            if (!first) s += ",";
            s += std::to_string(a);
            first = false;
        }
        s += "]";
    }
    return s;
}

}  // namespace

Expr velocity_contraction(const SymTensor& t, const std::vector<std::string>& vnames) {
    std::vector<Expr> terms;
    for (const auto& idx : t.index_list()) {
        const Expr& c = t.at(idx);
        if (c.is_zero()) continue;
        // number of distinct arrangements of this sorted tuple
        std::vector<int> perm = idx;
        long long arrangements = 0;
        do {
            ++arrangements;
        } while (std::next_permutation(perm.begin(), perm.end()));
        std::vector<Expr> f{Expr::number(Rational(arrangements)), c};
        for (int i : idx) f.push_back(Expr::symbol(vnames[static_cast<std::size_t>(i)]));
        terms.push_back(Expr::mul(std::move(f)));
    }
    return Expr::add(std::move(terms));
}

// ---------------------------------------------------------------------------
// PDE system checker
// ---------------------------------------------------------------------------

ConditionReport check_fi_pde_system(const std::vector<SymTensor>& M, const SystemDef& sys,
                                    const CheckOptions& opts) {
    if (M.empty()) throw std::invalid_argument("check_fi_pde_system: no coefficients");
    const int m = static_cast<int>(M.size()) - 1;
    for (int r = 0; r <= m; ++r)
        if (M[static_cast<std::size_t>(r)].order() != r)
            throw std::invalid_argument("check_fi_pde_system: rank gap at order " +
                                        std::to_string(r));
    SampleDomain dom = condition_domain(sys, opts, false, true);
    ConditionReport rep;
    auto Mr = [&](int r) -> const SymTensor& { return M[static_cast<std::size_t>(r)]; };

    rep.rows.push_back({row_name("pde-top", {}), "top-rank-killing-tensor",
                        test_field(sym_cov_derivative(Mr(m), sys.conn), dom)});
    if (m >= 1) {
        SymTensor res = partial(Mr(m), "t") + sym_cov_derivative(Mr(m - 1), sys.conn);
        rep.rows.push_back({row_name("pde-slope", {}), "top-rank-time-slope", test_field(res, dom)});
    }
    for (int r = 1; r <= m - 1; ++r) {
        SymTensor res = partial(Mr(r), "t") + sym_cov_derivative(Mr(r - 1), sys.conn) -
                        contract_last(Mr(r + 1), sys.forces).scaled(Expr::number(Rational(r + 1)));
        rep.rows.push_back({row_name("pde-mixed", {r}), "mixed-dynamical", test_field(res, dom)});
    }
    {
        Expr res = diff(Mr(0).at(std::initializer_list<int>{}), "t");
        if (m >= 1) res = res - scalar_contraction(Mr(1), sys);
        rep.rows.push_back({row_name("pde-scalar", {}), "scalar-time-force", test_scalar(res, dom)});
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Integral family 1 (polynomial in t)
// ---------------------------------------------------------------------------

ConditionReport check_integral1(const PolyTimeCandidate& c, const SystemDef& sys,
                                const CheckOptions& opts) {
    const int m = c.m, n = c.n, D = sys.dim();
    if (m < 1 || n < 0) throw std::invalid_argument("check_integral1: need m >= 1, n >= 0");
    SampleDomain dom = condition_domain(sys, opts, false, false);
    ConditionReport rep;
    auto L = [&](int N, int r) { return c.tensor(N, r, D); };

    for (int N = 0; N <= n; ++N)
        rep.rows.push_back({row_name("kt", {N}), "killing-tensor",
                            test_field(sym_cov_derivative(L(N, m), sys.conn), dom)});

    if (m > 1) {
        for (int k = 1; k <= n; ++k) {
            SymTensor res = L(k, m).scaled(Expr::number(Rational(k))) +
                            sym_cov_derivative(L(k - 1, m - 1), sys.conn);
            rep.rows.push_back({row_name("kt-chain", {k}), "time-recursion", test_field(res, dom)});
        }
        rep.rows.push_back({row_name("kt-lower", {}), "lower-killing-tensor",
                            test_field(sym_cov_derivative(L(n, m - 1), sys.conn), dom)});
    }

    rep.rows.push_back({row_name("s0", {}), "s0-contraction",
                        test_scalar(scalar_contraction(L(n, 1), sys) - c.s0, dom)});
    if (m == 1 && n > 0)
        rep.rows.push_back({row_name("s1", {}), "s1-contraction",
                            test_scalar(scalar_contraction(L(n - 1, 1), sys) - c.s1, dom)});

    {
        SymTensor res = gradient(c.G, sys);
        if (m > 1)
            res = res - contract_last(L(0, 2), sys.forces).scaled(Expr::number(2ll));
        if (n > 0) res = res + L(1, 1);
        rep.rows.push_back({row_name("grad-G", {}), "gradient-of-G", test_field(res, dom)});
    }

    for (int k = 1; k <= n; ++k) {
        SymTensor res = gradient(scalar_contraction(L(k - 1, 1), sys), sys);
        if (m > 1)
            res = res - contract_last(L(k, 2), sys.forces).scaled(Expr::number(Rational(2 * k)));
        if (k < n) res = res + L(k + 1, 1).scaled(Expr::number(Rational(k) * Rational(k + 1)));
        rep.rows.push_back({row_name("qgrad", {k}), "force-contraction-gradient",
                            test_field(res, dom)});
    }

    if (m > 2) {
        for (int k = 0; k <= n; ++k)
            for (int r = 2; r <= m - 1; ++r) {
                SymTensor res =
                    sym_cov_derivative(L(k, r - 1), sys.conn) -
                    contract_last(L(k, r + 1), sys.forces).scaled(Expr::number(Rational(r + 1)));
                if (k < n) res = res + L(k + 1, r).scaled(Expr::number(Rational(k + 1)));
                rep.rows.push_back({row_name("mixed", {k, r}), "mixed-rank-chain",
                                    test_field(res, dom)});
            }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Integral family 2 (exponential in t)
// ---------------------------------------------------------------------------

namespace {

Expr resolve_lambda(const ExpTimeCandidate& c, const SystemDef& sys) {
    Binding b;
    for (const auto& [k, v] : sys.params) b[k] = v;
    double lv;
    try {
        lv = eval(c.lambda, b);
    } catch (const EvalError& e) {
        throw std::invalid_argument(std::string("lambda does not bind to a number: ") + e.what());
    }
    if (lv == 0.0) throw std::invalid_argument("lambda must be nonzero");
    return c.lambda;
}

}  // namespace

ConditionReport check_integral2(const ExpTimeCandidate& c, const SystemDef& sys,
                                const CheckOptions& opts) {
    const int m = c.m, D = sys.dim();
    if (m < 1) throw std::invalid_argument("check_integral2: need m >= 1");
    Expr lam = resolve_lambda(c, sys);
    SampleDomain dom = condition_domain(sys, opts, false, false);
    ConditionReport rep;
    auto L = [&](int r) { return c.tensor(r, D); };

    rep.rows.push_back({row_name("kt", {}), "killing-tensor",
                        test_field(sym_cov_derivative(L(m), sys.conn), dom)});
    if (m > 1) {
        SymTensor res = L(m).scaled(lam) + sym_cov_derivative(L(m - 1), sys.conn);
        rep.rows.push_back({row_name("kt-chain", {}), "lambda-recursion", test_field(res, dom)});
    }
    {
        SymTensor res = gradient(scalar_contraction(L(1), sys), sys);
        if (m > 1)
            res = res - contract_last(L(2), sys.forces).scaled(Expr::number(2ll) * lam);
        res = res + L(1).scaled(lam * lam);
        rep.rows.push_back({row_name("grad-LQ", {}), "force-contraction-gradient",
                            test_field(res, dom)});
    }
    if (m > 2) {
        for (int r = 2; r <= m - 1; ++r) {
            SymTensor res =
                sym_cov_derivative(L(r - 1), sys.conn) -
                contract_last(L(r + 1), sys.forces).scaled(Expr::number(Rational(r + 1))) +
                L(r).scaled(lam);
            rep.rows.push_back({row_name("mixed", {r}), "mixed-rank-chain", test_field(res, dom)});
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

Expr build_integral1(const PolyTimeCandidate& c, const SystemDef& sys) {
    const int D = sys.dim();
    auto vnames = sys.velocity_names();
    Expr t = Expr::symbol("t");
    std::vector<Expr> terms;
    for (int r = 1; r <= c.m; ++r)
        for (int N = 0; N <= c.n; ++N) {
            if (!c.stored_nonzero(N, r)) continue;
            Expr body = velocity_contraction(c.tensor(N, r, D), vnames);
            terms.push_back(Expr::pow(t, Rational(N)) * body);
        }
    terms.push_back(c.s0 * Expr::pow(t, Rational(c.n + 1)) *
                    Expr::number(Rational(1, c.n + 1)));
    for (int N = 1; N <= c.n; ++N) {
        if (!c.stored_nonzero(N - 1, 1)) continue;
        Expr lq = scalar_contraction(c.tensor(N - 1, 1, D), sys);
        terms.push_back(lq * Expr::pow(t, Rational(N)) * Expr::number(Rational(1, N)));
    }
    terms.push_back(c.G);
    return simplify(Expr::add(std::move(terms)));
}

Expr build_integral2(const ExpTimeCandidate& c, const SystemDef& sys) {
    const int D = sys.dim();
    auto vnames = sys.velocity_names();
    Expr lam = resolve_lambda(c, sys);
    std::vector<Expr> inner;
    for (int r = 1; r <= c.m; ++r) {
        auto it = c.tensors.find(r);
        if (it == c.tensors.end() || it->second.is_structurally_zero()) continue;
        inner.push_back(lam * velocity_contraction(it->second, vnames));
    }
    inner.push_back(scalar_contraction(c.tensor(1, D), sys));
    Expr envelope = exp_of(lam * Expr::symbol("t")) / lam;
    return simplify(envelope * Expr::add(std::move(inner)));
}

// ---------------------------------------------------------------------------
// Parity split / absorption / complete forms
// ---------------------------------------------------------------------------

std::pair<PolyTimeCandidate, PolyTimeCandidate> split_parity(const PolyTimeCandidate& c) {
    if (c.m <= 1) throw std::invalid_argument("split_parity: requires m > 1");
    PolyTimeCandidate even, odd;
    even.m = odd.m = c.m;
    even.n = odd.n = c.n;
    for (const auto& [key, t] : c.tensors) {
        auto [N, r] = key;
        ((r + N) % 2 == 0 ? even : odd).set_tensor(N, r, t);
    }
    even.G = c.G;
    // s0 accompanies the rank-1 tensor at N = n; s1 the one at N = n-1.
    ((1 + c.n) % 2 == 0 ? even : odd).s0 = c.s0;
    if (c.n >= 1) ((1 + c.n - 1) % 2 == 0 ? even : odd).s1 = c.s1;
    return {std::move(even), std::move(odd)};
}

namespace {

int absorbing_parity(int m) { return m % 2 == 0 ? 2 : 1; }

bool in_pattern(int N, int r, int parity) {
    int cls = (N + r) % 2;  // 0: even class (parity 1), 1: odd class (parity 2)
    return parity == 1 ? cls == 0 : cls == 1;
}

}  // namespace

PolyTimeCandidate absorb_lower_order(const PolyTimeCandidate& c, const SystemDef& sys) {
    const int m = c.m, D = sys.dim();
    if (m <= 1) throw std::invalid_argument("absorb_lower_order: requires m > 1");
    if (c.n % 2 != 0)
        throw std::invalid_argument("absorb_lower_order: expected an even time degree (n = 2l)");
    const int parity = absorbing_parity(m);
    for (const auto& [key, t] : c.tensors)
        if (!in_pattern(key.first, key.second, parity) && !t.is_structurally_zero())
            throw std::invalid_argument("absorb_lower_order: input fails its own checks "
                                        "(terms outside the absorbing parity pattern)");
    if (parity == 2 && !c.G.is_zero())
        throw std::invalid_argument("absorb_lower_order: input fails its own checks "
                                    "(G belongs to the other parity class)");

    const int l = c.n / 2;
    const int np = 2 * l + 1;
    Expr inv = Expr::number(Rational(1, np));
    std::map<int, SymTensor> aug;

    // top rank: minus the symmetrized derivative of the order-(m-1) symmetry
    aug.emplace(m, sym_cov_derivative(c.tensor(2 * l, m - 1, D), sys.conn)
                       .scaled(-inv)
                       .map([](const Expr& e) { return simplify(e); }));
    // middle ranks of the same parity class as m
    for (int r = m - 2; r >= 2; r -= 2) {
        SymTensor t = (contract_last(c.tensor(2 * l, r + 1, D), sys.forces)
                           .scaled(Expr::number(Rational(r + 1))) -
                       sym_cov_derivative(c.tensor(2 * l, r - 1, D), sys.conn))
                          .scaled(inv)
                          .map([](const Expr& e) { return simplify(e); });
        aug.emplace(r, std::move(t));
    }
    if (m % 2 == 1) {
        // rank 1 for odd m; at l = 0 it is fixed by the gradient-of-G relation
        SymTensor a1(D, 1);
        if (l == 0) {
            a1 = contract_last(c.tensor(0, 2, D), sys.forces).scaled(Expr::number(2ll)) -
                 SymTensor(D, 1);
            for (int i = 0; i < D; ++i)
                a1.set({i}, simplify(a1.at({i}) - diff(c.G, sys.coords[static_cast<std::size_t>(i)])));
        } else {
            SymTensor grad_lq(D, 1);
            Expr lq = contract_last(c.tensor(2 * l - 1, 1, D), sys.forces)
                          .at(std::initializer_list<int>{});
            for (int i = 0; i < D; ++i)
                grad_lq.set({i}, diff(lq, sys.coords[static_cast<std::size_t>(i)]));
            a1 = (contract_last(c.tensor(2 * l, 2, D), sys.forces)
                      .scaled(Expr::number(Rational(4 * l))) -
                  grad_lq)
                     .scaled(Expr::number(Rational(1, 2 * l * (2 * l + 1))))
                     .map([](const Expr& e) { return simplify(e); });
        }
        aug.emplace(1, std::move(a1));
    }

    bool any = false;
    for (const auto& [r, t] : aug) any = any || !t.is_structurally_zero();
    if (!any) return c;  // the symmetry was already a generalized KT

    PolyTimeCandidate out = c;
    out.n = np;
    for (auto& [r, t] : aug)
        if (!t.is_structurally_zero()) out.set_tensor(np, r, std::move(t));
    if (m % 2 == 1 && out.stored_nonzero(np, 1)) {
        // s1 = contraction of the new rank-1 term with the forces; it doubles
        // as the generic s0 of the degree-(2l+1) candidate.
        Expr s = simplify(contract_last(out.tensor(np, 1, D), sys.forces)
                              .at(std::initializer_list<int>{}));
        out.s1 = s;
        out.s0 = s;
    } else {
        out.s0 = Expr::number(0ll);
    }
    return out;
}

ConditionReport check_complete_form(const PolyTimeCandidate& c, int parity,
                                    const SystemDef& sys, const CheckOptions& opts) {
    if (c.m <= 1) throw std::invalid_argument("check_complete_form: requires m > 1");
    if (parity != 1 && parity != 2)
        throw std::invalid_argument("check_complete_form: parity flag must be 1 or 2");
    ConditionReport rep;
    for (const auto& [key, t] : c.tensors) {
        if (in_pattern(key.first, key.second, parity) || t.is_structurally_zero()) continue;
        ZeroResult bad{ZeroVerdict::NonZero, std::nullopt, 0, 0.0,
                       "tensor (N=" + std::to_string(key.first) + ", r=" +
                           std::to_string(key.second) + ") outside the parity pattern"};
        rep.rows.push_back({row_name("pattern", {key.first, key.second}),
                            "parity-pattern", bad});
    }
    if (parity == 2 && !c.G.is_zero()) {
        SampleDomain dom = condition_domain(sys, opts, false, false);
        rep.rows.push_back({row_name("pattern-G", {}), "parity-pattern",
                            test_scalar(c.G, dom)});
    }
    ConditionReport inner = check_integral1(c, sys, opts);
    std::string prefix = "J(" + std::to_string(c.m) + "," + std::to_string(parity) + ")/";
    for (auto& row : inner.rows) {
        row.id = prefix + row.id;
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Total-derivative oracle
// ---------------------------------------------------------------------------

Expr total_derivative(const Expr& integral, const SystemDef& sys) {
    const int D = sys.dim();
    std::vector<Expr> terms{diff(integral, "t")};
    for (int a = 0; a < D; ++a) {
        const std::string& q = sys.coords[static_cast<std::size_t>(a)];
        Expr v = Expr::symbol(sys.velocity_name(a));
        terms.push_back(diff(integral, q) * v);
        // acceleration from the dynamical equations, symmetric sum doubled
        std::vector<Expr> accel{-sys.forces[static_cast<std::size_t>(a)]};
        for (int b = 0; b < D; ++b)
            for (int cc = b; cc < D; ++cc) {
                const Expr& g = sys.conn.gamma(a, b, cc);
                if (g.is_zero()) continue;
                Expr term = g * Expr::symbol(sys.velocity_name(b)) *
                            Expr::symbol(sys.velocity_name(cc));
                if (b != cc) term = Expr::number(2ll) * term;
                accel.push_back(-term);
            }
        terms.push_back(diff(integral, sys.velocity_name(a)) * Expr::add(std::move(accel)));
    }
    return simplify(Expr::add(std::move(terms)));
}

ZeroResult total_derivative_oracle(const Expr& integral, const SystemDef& sys,
                                   const CheckOptions& opts) {
    SampleDomain dom = condition_domain(sys, opts, true, true);
    return is_identically_zero(total_derivative(integral, sys), dom);
}

ZeroResult gradient_integrability(const std::vector<Expr>& grad, const SystemDef& sys,
                                  const CheckOptions& opts) {
    SampleDomain dom = condition_domain(sys, opts, false, false);
    std::vector<Expr> rows;
    for (int a = 0; a < sys.dim(); ++a)
        for (int b = a + 1; b < sys.dim(); ++b)
            rows.push_back(diff(grad[static_cast<std::size_t>(a)], sys.coords[static_cast<std::size_t>(b)]) -
                           diff(grad[static_cast<std::size_t>(b)], sys.coords[static_cast<std::size_t>(a)]));
    ZeroResult agg{ZeroVerdict::ExactZero, std::nullopt, 0, 0.0, ""};
    for (const auto& r : rows) {
        ZeroResult z = is_identically_zero(r, dom);
        agg.samples += z.samples;
        agg.max_ratio = std::max(agg.max_ratio, z.max_ratio);
        if (z.verdict == ZeroVerdict::NonZero) return z;
        if (z.verdict == ZeroVerdict::ProbablyZero) agg.verdict = ZeroVerdict::ProbablyZero;
    }
    return agg;
}

}  // namespace fitk
