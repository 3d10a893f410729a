#include "fitk/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fitk/polynomial.hpp"

namespace fitk {

void LinearSystem::add_row(std::map<std::size_t, Rational> entries, std::string label) {
    rows.push_back(std::move(entries));
    row_labels.push_back(std::move(label));
}

// ---------------------------------------------------------------------------
// Exact elimination
// ---------------------------------------------------------------------------

namespace {

struct Rref {
    std::vector<std::vector<Rational>> rows;  // reduced rows
    std::vector<std::size_t> pivot_cols;
};

Rref rref(const LinearSystem& sys) {
    std::vector<std::vector<Rational>> m;
    m.reserve(sys.rows.size());
    for (const auto& r : sys.rows) {
        std::vector<Rational> dense(sys.ncols, Rational(0));
        for (const auto& [j, v] : r) dense[j] = v;
        m.push_back(std::move(dense));
    }
    Rref out;
    std::size_t row = 0;
    for (std::size_t col = 0; col < sys.ncols && row < m.size(); ++col) {
        std::size_t piv = row;
        while (piv < m.size() && m[piv][col].is_zero()) ++piv;
        if (piv == m.size()) continue;
        std::swap(m[row], m[piv]);
        Rational inv = m[row][col].reciprocal();
        for (auto& v : m[row]) v *= inv;
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (i == row || m[i][col].is_zero()) continue;
            Rational f = m[i][col];
            for (std::size_t j = col; j < sys.ncols; ++j) m[i][j] -= f * m[row][j];
        }
        out.pivot_cols.push_back(col);
        ++row;
    }
    m.resize(row);
    out.rows = std::move(m);
    return out;
}

// Scales to coprime integer entries with a positive leading coefficient.
void normalize_vector(std::vector<Rational>& v) {
    BigInt g(0), l(1);
    for (const auto& c : v) {
        if (c.is_zero()) continue;
        g = BigInt::gcd(g, c.num());
        l = l / BigInt::gcd(l, c.den()) * c.den();
    }
    if (g.is_zero()) return;
    Rational scale(l, g);
    for (auto& c : v) c *= scale;
    for (const auto& c : v) {
        if (c.is_zero()) continue;
        if (c.is_negative())
            for (auto& cc : v) cc = -cc;
        break;
    }
}

}  // namespace

std::vector<std::vector<Rational>> nullspace(const LinearSystem& sys) {
    Rref r = rref(sys);
    std::vector<bool> is_pivot(sys.ncols, false);
    for (std::size_t c : r.pivot_cols) is_pivot[c] = true;
    std::vector<std::vector<Rational>> basis;
    for (std::size_t free = 0; free < sys.ncols; ++free) {
        if (is_pivot[free]) continue;
        std::vector<Rational> v(sys.ncols, Rational(0));
        v[free] = Rational(1);
        for (std::size_t i = 0; i < r.pivot_cols.size(); ++i)
            v[r.pivot_cols[i]] = -r.rows[i][free];
        normalize_vector(v);
        basis.push_back(std::move(v));
    }
    return basis;
}

std::size_t exact_rank(const LinearSystem& sys) { return rref(sys).pivot_cols.size(); }

std::size_t float_svd_rank(const LinearSystem& sys, double threshold) {
    // One-sided Jacobi on the dense double image of the system.
    std::size_t nrows = std::max<std::size_t>(sys.rows.size(), 1);
    std::vector<std::vector<double>> a(sys.ncols, std::vector<double>(nrows, 0.0));
    for (std::size_t i = 0; i < sys.rows.size(); ++i)
        for (const auto& [j, v] : sys.rows[i]) a[j][i] = v.to_double();
    auto dot = [&](std::size_t p, std::size_t q) {
        double s = 0;
        for (std::size_t i = 0; i < nrows; ++i) s += a[p][i] * a[q][i];
        return s;
    };
    for (int sweep = 0; sweep < 60; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < sys.ncols; ++p) {
            for (std::size_t q = p + 1; q < sys.ncols; ++q) {
                double app = dot(p, p), aqq = dot(q, q), apq = dot(p, q);
                if (std::abs(apq) <= 1e-30 + 1e-15 * std::sqrt(app * aqq)) continue;
                rotated = true;
                double tau = (aqq - app) / (2 * apq);
                double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1 + tau * tau));
                double c = 1.0 / std::sqrt(1 + t * t), s = c * t;
                for (std::size_t i = 0; i < nrows; ++i) {
                    double xp = a[p][i], xq = a[q][i];
                    a[p][i] = c * xp - s * xq;
                    a[q][i] = s * xp + c * xq;
                }
            }
        }
        if (!rotated) break;
    }
    std::vector<double> sigma(sys.ncols);
    double smax = 0;
    for (std::size_t j = 0; j < sys.ncols; ++j) {
        sigma[j] = std::sqrt(dot(j, j));
        smax = std::max(smax, sigma[j]);
    }
    std::size_t rank = 0;
    for (double s : sigma)
        if (s > threshold * (smax > 0 ? smax : 1.0)) ++rank;
    return rank;
}

// ---------------------------------------------------------------------------
// Ansatz assembly
// ---------------------------------------------------------------------------

namespace {

std::vector<Monomial> monomials_up_to(int nvars, int degree) {
    std::vector<Monomial> out;
    Monomial m(static_cast<std::size_t>(nvars), 0);
    // lexicographic enumeration of exponent vectors with total degree <= degree
    std::function<void(int, int)> rec = [&](int pos, int left) {
        if (pos == nvars) {
            out.push_back(m);
            return;
        }
        for (int e = 0; e <= left; ++e) {
            m[static_cast<std::size_t>(pos)] = static_cast<unsigned>(e);
            rec(pos + 1, left - e);
        }
        m[static_cast<std::size_t>(pos)] = 0;
    };
    rec(0, degree);
    return out;
}

Expr monomial_expr(const Monomial& m, const std::vector<std::string>& coords) {
    std::vector<Expr> f;
    for (std::size_t i = 0; i < coords.size(); ++i)
        if (m[i]) f.push_back(Expr::pow(Expr::symbol(coords[i]), Rational(m[i])));
    if (f.empty()) return Expr::number(1ll);
    return Expr::mul(std::move(f));
}

Connection bind_connection(const Connection& conn,
                           const std::map<std::string, Rational>& exact_params) {
    std::map<std::string, Expr> repl;
    for (const auto& [k, v] : exact_params) repl[k] = Expr::number(v);
    Connection out(conn.dim(), conn.coords());
    for (int a = 0; a < conn.dim(); ++a)
        for (int b = 0; b < conn.dim(); ++b)
            for (int c = b; c < conn.dim(); ++c)
                out.set_gamma(a, b, c, simplify(substitute(conn.gamma(a, b, c), repl)));
    return out;
}

struct Unknowns {
    std::vector<std::string> names;
    std::vector<Monomial> monos;               // per tensor component, shared list
    std::vector<std::vector<int>> comp_index;  // component multi-indices of the tensor
    std::size_t count() const { return names.size(); }
};

// Tensor of the given order whose components are generic polynomials with one
// fresh unknown symbol per (component, monomial).
std::pair<SymTensor, Unknowns> generic_tensor(int dim, int order, int degree,
                                              const std::vector<std::string>& coords,
                                              const std::string& prefix) {
    SymTensor t(dim, order);
    Unknowns u;
    u.monos = monomials_up_to(dim, degree);
    u.comp_index = t.index_list();
    std::size_t id = 0;
    for (const auto& idx : t.index_list()) {
        std::vector<Expr> terms;
        for (const auto& m : u.monos) {
            std::string name = prefix + std::to_string(id++);
            u.names.push_back(name);
            terms.push_back(Expr::symbol(name) * monomial_expr(m, coords));
        }
        t.set(idx, Expr::add(std::move(terms)));
    }
    return {std::move(t), std::move(u)};
}

std::string index_label(const std::vector<int>& idx) {
    std::string s = "(";
    for (std::size_t i = 0; i < idx.size(); ++i)
        s += (i ? "," : "") + std::to_string(idx[i] + 1);
    return s + ")";
}

// Turns "residual tensor component == 0" into sparse rows: the numerator of
// its rational normal form must vanish coefficient-by-coefficient, and every
// numerator monomial is linear in the unknowns.
void residual_rows(const SymTensor& residual, const std::vector<std::string>& coords,
                   const Unknowns& u, LinearSystem& sys, const std::string& tag) {
    std::vector<std::string> vars = coords;
    std::map<std::string, std::size_t> unknown_slot;
    for (const auto& n : u.names) {
        unknown_slot[n] = vars.size();
        vars.push_back(n);
    }
    for (const auto& idx : residual.index_list()) {
        Expr comp = simplify(residual.at(idx));
        if (comp.is_zero()) continue;
        RatFun f = to_rational_function(comp, vars);
        // rows keyed by the coordinate part of each numerator monomial
        std::map<Monomial, std::map<std::size_t, Rational>> rows;
        for (const auto& [m, c] : f.num.terms()) {
            std::size_t which = SIZE_MAX;
            for (std::size_t j = coords.size(); j < vars.size(); ++j) {
                if (m[j] == 0) continue;
                if (m[j] > 1 || which != SIZE_MAX)
                    throw std::logic_error("solver: residual not linear in unknowns");
                which = j - coords.size();
            }
            if (which == SIZE_MAX)
                throw std::logic_error("solver: residual has unknown-free term");
            Monomial key(m.begin(), m.begin() + static_cast<long>(coords.size()));
            rows[key][which] += c;
        }
        for (auto& [key, entries] : rows) {
            for (auto it = entries.begin(); it != entries.end();)
                it = it->second.is_zero() ? entries.erase(it) : std::next(it);
            if (entries.empty()) continue;
            std::ostringstream lbl;
            lbl << tag << index_label(idx) << " @ ";
            for (std::size_t i = 0; i < coords.size(); ++i)
                if (key[i]) lbl << coords[i] << "^" << key[i];
            sys.add_row(std::move(entries), lbl.str());
        }
    }
}

void check_caps(const AnsatzSpec& spec, std::size_t unknowns, const SolverCaps& caps) {
    if (spec.degree > caps.max_degree)
        throw std::length_error("solver: polynomial degree exceeds the configured cap");
    if (unknowns > caps.max_unknowns)
        throw std::length_error("solver: unknown count exceeds the configured cap");
}

void require_rational(const Connection& conn) {
    for (int a = 0; a < conn.dim(); ++a)
        for (int b = 0; b < conn.dim(); ++b)
            for (int c = b; c < conn.dim(); ++c) {
                try {
                    to_rational_function(conn.gamma(a, b, c), conn.coords());
                } catch (const NonRationalError& e) {
                    throw NonRationalConnection(
                        std::string("connection is not rational (") + e.what() +
                        "); use the check-only condition path instead");
                }
            }
}

SymTensor vector_from_solution(const std::vector<Rational>& sol, const Unknowns& u, int dim,
                               int order, const std::vector<std::string>& coords) {
    SymTensor t(dim, order);
    std::size_t id = 0;
    for (const auto& idx : u.comp_index) {
        std::vector<Expr> terms;
        for (const auto& m : u.monos) {
            const Rational& c = sol[id++];
            if (!c.is_zero()) terms.push_back(Expr::number(c) * monomial_expr(m, coords));
        }
        t.set(idx, Expr::add(std::move(terms)));
    }
    return t;
}

}  // namespace

LinearSystem build_kt_system(const Connection& conn,
                             const std::map<std::string, Rational>& exact_params,
                             const AnsatzSpec& spec, const SolverCaps& caps) {
    Connection g = bind_connection(conn, exact_params);
    require_rational(g);
    auto [tensor, unknowns] =
        generic_tensor(g.dim(), spec.order, spec.degree, g.coords(), "c");
    check_caps(spec, unknowns.count(), caps);
    LinearSystem sys;
    sys.ncols = unknowns.count();
    for (const auto& idx : unknowns.comp_index)
        for (const auto& m : unknowns.monos) {
            std::ostringstream lbl;
            lbl << "L" << index_label(idx) << ":" << monomial_expr(m, g.coords()).str();
            sys.col_labels.push_back(lbl.str());
        }
    SymTensor residual = sym_cov_derivative(tensor, g);
    residual_rows(residual, g.coords(), unknowns, sys, "KT");
    return sys;
}

std::vector<SymTensor> find_generalized_kts(const Connection& conn,
                                            const std::map<std::string, Rational>& exact_params,
                                            const AnsatzSpec& spec, const SolverCaps& caps) {
    Connection g = bind_connection(conn, exact_params);
    require_rational(g);
    auto [tensor, unknowns] =
        generic_tensor(g.dim(), spec.order, spec.degree, g.coords(), "c");
    check_caps(spec, unknowns.count(), caps);
    LinearSystem sys;
    sys.ncols = unknowns.count();
    SymTensor residual = sym_cov_derivative(tensor, g);
    residual_rows(residual, g.coords(), unknowns, sys, "KT");
    std::vector<SymTensor> basis;
    for (const auto& sol : nullspace(sys)) {
        SymTensor t = vector_from_solution(sol, unknowns, g.dim(), spec.order, g.coords());
        // exact residual check on every returned element
        SymTensor check = sym_cov_derivative(t, g);
        for (const auto& idx : check.index_list()) {
            Expr c = simplify(check.at(idx));
            if (!c.is_zero()) {
                RatFun f = to_rational_function(c, g.coords());
                if (!f.num.is_zero())
                    throw std::logic_error("solver: returned tensor fails its own KT condition");
            }
        }
        basis.push_back(std::move(t));
    }
    return basis;
}

std::vector<std::vector<Expr>> find_reducible_kt_generators(
    const Connection& conn, const std::map<std::string, Rational>& exact_params, int degree,
    const SolverCaps& caps) {
    Connection g = bind_connection(conn, exact_params);
    require_rational(g);
    auto [vec, unknowns] = generic_tensor(g.dim(), 1, degree, g.coords(), "b");
    check_caps({1, degree}, unknowns.count(), caps);

    SymTensor first = sym_cov_derivative(vec, g);
    LinearSystem kt_sys;  // B_{(a|b)} is a KT
    kt_sys.ncols = unknowns.count();
    residual_rows(sym_cov_derivative(first, g), g.coords(), unknowns, kt_sys, "KT2");
    LinearSystem kv_sys;  // B is itself a KV
    kv_sys.ncols = unknowns.count();
    residual_rows(first, g.coords(), unknowns, kv_sys, "KV");

    auto n2 = nullspace(kt_sys);
    auto n1 = nullspace(kv_sys);

    // Quotient span(n2) by span(n1): keep n2 members that add new pivots.
    LinearSystem reducer;
    reducer.ncols = unknowns.count();
    for (const auto& v : n1) {
        std::map<std::size_t, Rational> row;
        for (std::size_t j = 0; j < v.size(); ++j)
            if (!v[j].is_zero()) row[j] = v[j];
        reducer.add_row(std::move(row), "kv");
    }
    std::size_t base_rank = exact_rank(reducer);
    std::vector<std::vector<Expr>> out;
    for (const auto& v : n2) {
        LinearSystem trial = reducer;
        std::map<std::size_t, Rational> row;
        for (std::size_t j = 0; j < v.size(); ++j)
            if (!v[j].is_zero()) row[j] = v[j];
        trial.add_row(std::move(row), "cand");
        if (exact_rank(trial) > base_rank) {
            reducer = std::move(trial);
            ++base_rank;
            SymTensor t = vector_from_solution(v, unknowns, g.dim(), 1, g.coords());
            std::vector<Expr> comps;
            for (int a = 0; a < g.dim(); ++a) comps.push_back(t.at({a}));
            out.push_back(std::move(comps));
        }
    }
    return out;
}

}  // namespace fitk
