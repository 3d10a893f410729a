#include "fitk/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace fitk {

namespace {

// slot layout shared by every compiled expression of a system:
// [t, q..., qdot..., params...]
std::vector<std::string> slot_names(const SystemDef& sys) {
    std::vector<std::string> s{"t"};
    for (const auto& c : sys.coords) s.push_back(c);
    for (const auto& v : sys.velocity_names()) s.push_back(v);
    for (const auto& [k, val] : sys.params) s.push_back(k);
    return s;
}

}  // namespace

CompiledSystem::CompiledSystem(const SystemDef& sys) : dim_(sys.dim()) {
    auto names = slot_names(sys);
    nslots_ = names.size();
    base_slots_.assign(nslots_, 0.0);
    std::size_t p = 1 + 2 * static_cast<std::size_t>(dim_);
    for (const auto& [k, val] : sys.params) base_slots_[p++] = val;
    for (int a = 0; a < dim_; ++a) {
        std::vector<Expr> terms{-sys.forces[static_cast<std::size_t>(a)]};
        for (int b = 0; b < dim_; ++b)
            for (int c = b; c < dim_; ++c) {
                const Expr& g = sys.conn.gamma(a, b, c);
                if (g.is_zero()) continue;
                Expr t = g * Expr::symbol(sys.velocity_name(b)) *
                         Expr::symbol(sys.velocity_name(c));
                if (b != c) t = Expr::number(2ll) * t;
                terms.push_back(-t);
            }
        accel_.push_back(CompiledExpr::compile(simplify(Expr::add(std::move(terms))), names));
    }
    for (const auto& g : sys.singular)
        guards_.push_back(CompiledExpr::compile(g, names));
    work_ = base_slots_;
}

void CompiledSystem::accel(double t, const std::vector<double>& q, const std::vector<double>& v,
                           std::vector<double>& out) const {
    work_ = base_slots_;
    work_[0] = t;
    for (int a = 0; a < dim_; ++a) {
        work_[1 + static_cast<std::size_t>(a)] = q[static_cast<std::size_t>(a)];
        work_[1 + static_cast<std::size_t>(dim_ + a)] = v[static_cast<std::size_t>(a)];
    }
    out.resize(static_cast<std::size_t>(dim_));
    for (int a = 0; a < dim_; ++a)
        out[static_cast<std::size_t>(a)] = accel_[static_cast<std::size_t>(a)].eval(work_);
}

std::vector<double> CompiledSystem::guard_values(const std::vector<double>& q) const {
    std::vector<double> out;
    out.reserve(guards_.size());
    work_ = base_slots_;
    for (int a = 0; a < dim_; ++a) work_[1 + static_cast<std::size_t>(a)] = q[static_cast<std::size_t>(a)];
    for (const auto& g : guards_) out.push_back(g.eval(work_));
    return out;
}

bool CompiledSystem::near_singular(const std::vector<double>& q, double margin) const {
    for (double v : guard_values(q))
        if (!std::isfinite(v) || std::abs(v) < margin) return true;
    return false;
}

std::vector<double> rhs(const SystemDef& sys, const State& s) {
    CompiledSystem cs(sys);
    if (cs.near_singular(s.q, 1e-12))
        throw IntegrationError("rhs: state lies on a declared singular locus");
    std::vector<double> a;
    cs.accel(s.t, s.q, s.v, a);
    for (double x : a)
        if (!std::isfinite(x)) throw IntegrationError("rhs: singular evaluation");
    return a;
}

// ---------------------------------------------------------------------------
// Integrators
// ---------------------------------------------------------------------------

namespace {

// Dormand-Prince 5(4) coefficients.
constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561,
                 A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247,
                 A64 = 49.0 / 176, A65 = -5103.0 / 18656;
constexpr double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784,
                 B6 = 11.0 / 84;
constexpr double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920, E5 = -17253.0 / 339200,
                 E6 = 22.0 / 525, E7 = -1.0 / 40;

struct Ode {
    const AccelFn& accel;
    int dim;
    // y = (q, v); dy = (v, a)
    void f(double t, const std::vector<double>& y, std::vector<double>& dy) const {
        std::vector<double> q(y.begin(), y.begin() + dim);
        std::vector<double> v(y.begin() + dim, y.end());
        std::vector<double> a;
        accel(t, q, v, a);
        dy.resize(2 * static_cast<std::size_t>(dim));
        for (int i = 0; i < dim; ++i) {
            dy[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)];
            dy[static_cast<std::size_t>(dim + i)] = a[static_cast<std::size_t>(i)];
        }
    }
};

State unpack(double t, const std::vector<double>& y, int dim) {
    State s;
    s.t = t;
    s.q.assign(y.begin(), y.begin() + dim);
    s.v.assign(y.begin() + dim, y.end());
    return s;
}

bool finite(const std::vector<double>& y) {
    return std::all_of(y.begin(), y.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

Trajectory integrate_rhs(const AccelFn& accel, const GuardValuesFn& guard, int dim,
                         const State& s0, double t_end, const IntegratorOptions& opts) {
    if (t_end <= s0.t) throw IntegrationError("integrate: t_end must exceed the initial time");
    if (opts.rtol <= 0 || opts.atol <= 0)
        throw IntegrationError("integrate: tolerances must be positive");
    Ode ode{accel, dim};
    Trajectory traj;
    traj.rtol = opts.rtol;
    traj.atol = opts.atol;

    std::vector<double> y(s0.q);
    y.insert(y.end(), s0.v.begin(), s0.v.end());
    double t = s0.t;

    std::vector<double> prev_guards = guard ? guard(s0.q) : std::vector<double>{};
    // singular when a locus value is inside the margin or flipped sign since
    // the previous accepted state (the step jumped across the locus)
    auto singular_now = [&](const std::vector<double>& q) {
        if (!guard) return false;
        std::vector<double> g = guard(q);
        bool hit = false;
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (!std::isfinite(g[i]) || std::abs(g[i]) < opts.singular_margin) hit = true;
            if (i < prev_guards.size() && std::isfinite(prev_guards[i]) &&
                prev_guards[i] * g[i] < 0)
                hit = true;
        }
        prev_guards = std::move(g);
        return hit;
    };
    // loose version used when the step size collapses: the run is ending
    // either way, the question is only whether a declared locus explains it
    std::vector<double> initial_guards = prev_guards;
    auto near_locus = [&](const std::vector<double>& q) {
        if (!guard) return false;
        std::vector<double> g = guard(q);
        for (std::size_t i = 0; i < g.size(); ++i) {
            double ref = i < initial_guards.size() ? std::abs(initial_guards[i]) : 1.0;
            if (!std::isfinite(g[i]) || std::abs(g[i]) < std::max(1e-3, 0.3 * ref)) return true;
        }
        return false;
    };
    for (double v : prev_guards)
        if (!std::isfinite(v) || std::abs(v) < opts.singular_margin)
            throw IntegrationError("integrate: initial state on a singular locus");
    traj.samples.push_back(s0);

    if (opts.method == IntegratorOptions::Method::RK4) {
        traj.method = "rk4";
        double h = opts.fixed_step;
        std::vector<double> k1, k2, k3, k4, tmp(y.size());
        while (t < t_end - 1e-15) {
            double hh = std::min(h, t_end - t);
            ode.f(t, y, k1);
            for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + 0.5 * hh * k1[i];
            ode.f(t + 0.5 * hh, tmp, k2);
            for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + 0.5 * hh * k2[i];
            ode.f(t + 0.5 * hh, tmp, k3);
            for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + hh * k3[i];
            ode.f(t + hh, tmp, k4);
            for (std::size_t i = 0; i < y.size(); ++i)
                y[i] += hh / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
            t += hh;
            if (!finite(y)) throw IntegrationError("integrate: state became non-finite");
            State s = unpack(t, y, dim);
            if (singular_now(s.q)) {
                traj.singular_stop = true;
                traj.note = "stopped near a declared singular locus at t = " + std::to_string(t);
                traj.samples.push_back(s);
                return traj;
            }
            ++traj.accepted;
            traj.samples.push_back(std::move(s));
        }
        return traj;
    }

    traj.method = "rk45";
    const double span = t_end - s0.t;
    const double hmax = span / std::max(1, opts.min_samples);
    double h = std::min(hmax, span * 1e-4);
    std::vector<double> k1, k2, k3, k4, k5, k6, k7, ynew(y.size()), tmp(y.size());
    ode.f(t, y, k1);
    while (t < t_end - 1e-15) {
        h = std::min(h, t_end - t);
        if (h < 1e-14 * std::max(1.0, std::abs(t))) {
            if (near_locus(traj.samples.back().q)) {
                traj.singular_stop = true;
                traj.note = "step collapse beside a declared singular locus at t = " +
                            std::to_string(t);
                return traj;
            }
            throw IntegrationError("integrate: step size underflow at t = " + std::to_string(t));
        }
        auto stage = [&](double frac, const std::vector<std::pair<double, const std::vector<double>*>>& ks,
                         std::vector<double>& out) {
            for (std::size_t i = 0; i < y.size(); ++i) {
                double s = y[i];
                for (const auto& [c, k] : ks) s += h * c * (*k)[i];
                tmp[i] = s;
            }
            ode.f(t + frac * h, tmp, out);
        };
        stage(1.0 / 5, {{A21, &k1}}, k2);
        stage(3.0 / 10, {{A31, &k1}, {A32, &k2}}, k3);
        stage(4.0 / 5, {{A41, &k1}, {A42, &k2}, {A43, &k3}}, k4);
        stage(8.0 / 9, {{A51, &k1}, {A52, &k2}, {A53, &k3}, {A54, &k4}}, k5);
        stage(1.0, {{A61, &k1}, {A62, &k2}, {A63, &k3}, {A64, &k4}, {A65, &k5}}, k6);
        for (std::size_t i = 0; i < y.size(); ++i)
            ynew[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        ode.f(t + h, ynew, k7);
        double err = 0.0;
        bool ok = finite(ynew);
        if (ok) {
            for (std::size_t i = 0; i < y.size(); ++i) {
                double e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] +
                                E7 * k7[i]);
                double sc = opts.atol + opts.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
                err += (e / sc) * (e / sc);
            }
            err = std::sqrt(err / static_cast<double>(y.size()));
        } else {
            err = 1e6;
        }
        if (err <= 1.0) {
            t += h;
            y = ynew;
            k1 = k7;  // FSAL
            ++traj.accepted;
            State s = unpack(t, y, dim);
            if (singular_now(s.q)) {
                traj.singular_stop = true;
                traj.note = "stopped near a declared singular locus at t = " + std::to_string(t);
                traj.samples.push_back(s);
                return traj;
            }
            traj.samples.push_back(std::move(s));
        } else {
            ++traj.rejected;
        }
        double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
        h *= std::clamp(fac, 0.2, 5.0);
        h = std::min(h, hmax);
    }
    return traj;
}

Trajectory integrate(const SystemDef& sys, const State& s0, double t_end,
                     const IntegratorOptions& opts) {
    CompiledSystem cs(sys);
    AccelFn accel = [&cs](double t, const std::vector<double>& q, const std::vector<double>& v,
                          std::vector<double>& out) { cs.accel(t, q, v, out); };
    GuardValuesFn guard;
    if (!sys.singular.empty())
        guard = [&cs](const std::vector<double>& q) { return cs.guard_values(q); };
    return integrate_rhs(accel, guard, sys.dim(), s0, t_end, opts);
}

// ---------------------------------------------------------------------------
// Drift
// ---------------------------------------------------------------------------

DriftSeries monitor_fi(const Trajectory& traj, const StateFn& fi) {
    DriftSeries d;
    if (traj.samples.empty()) return d;
    d.initial = fi(traj.samples.front());
    double scale = std::max(std::abs(d.initial), 1e-30);
    for (const auto& s : traj.samples) {
        double v = fi(s);
        if (!std::isfinite(v)) {
            if (traj.singular_stop) {
                d.truncated = true;
                break;
            }
            throw IntegrationError("monitor_fi: integral evaluation singular at t = " +
                                   std::to_string(s.t));
        }
        d.times.push_back(s.t);
        d.values.push_back(v);
        double drift = std::abs(v - d.initial);
        d.max_abs_drift = std::max(d.max_abs_drift, drift);
    }
    d.max_rel_drift = d.max_abs_drift / scale;
    return d;
}

StateFn compile_fi(const Expr& integral, const SystemDef& sys) {
    auto names = slot_names(sys);
    CompiledExpr c = CompiledExpr::compile(integral, names);
    std::vector<double> base(names.size(), 0.0);
    std::size_t p = 1 + 2 * static_cast<std::size_t>(sys.dim());
    for (const auto& [k, val] : sys.params) base[p++] = val;
    int dim = sys.dim();
    return [c = std::move(c), base = std::move(base), dim](const State& s) mutable {
        std::vector<double> slots = base;
        slots[0] = s.t;
        for (int a = 0; a < dim; ++a) {
            slots[1 + static_cast<std::size_t>(a)] = s.q[static_cast<std::size_t>(a)];
            slots[1 + static_cast<std::size_t>(dim + a)] = s.v[static_cast<std::size_t>(a)];
        }
        return c.eval(slots);
    };
}

}  // namespace fitk
