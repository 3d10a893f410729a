#ifndef FITK_DYNAMICS_HPP
#define FITK_DYNAMICS_HPP

#include <functional>

#include "fitk/geometry.hpp"

namespace fitk {

struct State {
    double t = 0.0;
    std::vector<double> q;
    std::vector<double> v;
};

struct IntegratorOptions {
    enum class Method { RK45, RK4 } method = Method::RK45;
    double rtol = 1e-10;
    double atol = 1e-12;
    double fixed_step = 1e-3;        // RK4 only
    double singular_margin = 1e-6;   // stop distance on declared singular loci
    int min_samples = 200;
};

struct Trajectory {
    std::vector<State> samples;
    std::string method;
    double rtol = 0, atol = 0;
    int accepted = 0, rejected = 0;
    bool singular_stop = false;
    std::string note;
};

struct IntegrationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// accelerations a^a(t, q, v); writes into `acc`
using AccelFn =
    std::function<void(double, const std::vector<double>&, const std::vector<double>&,
                       std::vector<double>&)>;
// Values of the declared singular-locus expressions at q; a state is singular
// when any |value| drops under the margin or a value changes sign between
// consecutive accepted states (the locus was crossed).
using GuardValuesFn = std::function<std::vector<double>(const std::vector<double>&)>;
using GuardFn = std::function<bool(const std::vector<double>&, double margin)>;

// Compiled right-hand side of q''^a = -Γ^a_{bc} q'^b q'^c - Q^a with the
// symmetric sum over b <= c (off-diagonal doubled).
class CompiledSystem {
public:
    explicit CompiledSystem(const SystemDef& sys);
    void accel(double t, const std::vector<double>& q, const std::vector<double>& v,
               std::vector<double>& out) const;
    bool near_singular(const std::vector<double>& q, double margin) const;
    std::vector<double> guard_values(const std::vector<double>& q) const;
    int dim() const { return dim_; }

private:
    int dim_;
    std::size_t nslots_;
    std::vector<CompiledExpr> accel_;
    std::vector<CompiledExpr> guards_;
    std::vector<double> base_slots_;  // parameter values pre-filled
    mutable std::vector<double> work_;
};

// Acceleration at a single state; throws on singular evaluation.
std::vector<double> rhs(const SystemDef& sys, const State& s);

Trajectory integrate(const SystemDef& sys, const State& s0, double t_end,
                     const IntegratorOptions& opts = {});

// Same integrator over a caller-supplied right-hand side (used by catalog
// entries whose forces are only numerically defined).
Trajectory integrate_rhs(const AccelFn& accel, const GuardValuesFn& guard, int dim,
                         const State& s0, double t_end, const IntegratorOptions& opts = {});

struct DriftSeries {
    std::vector<double> times;
    std::vector<double> values;
    double initial = 0.0;
    double max_abs_drift = 0.0;
    double max_rel_drift = 0.0;  // scale max(|I(0)|, 1e-30)
    bool truncated = false;      // evaluation became non-finite on a singular tail
};

using StateFn = std::function<double(const State&)>;

// Evaluates the integral along the trajectory. A non-finite value throws
// unless the trajectory was singular-stopped, in which case the series is
// truncated there and flagged.
DriftSeries monitor_fi(const Trajectory& traj, const StateFn& fi);

// Compiles an expression in (t, q, qdot) against a system's slot layout.
StateFn compile_fi(const Expr& integral, const SystemDef& sys);

}  // namespace fitk

#endif
