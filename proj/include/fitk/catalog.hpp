#ifndef FITK_CATALOG_HPP
#define FITK_CATALOG_HPP

#include <optional>

#include "fitk/conditions.hpp"
#include "fitk/dynamics.hpp"
#include "fitk/geometry.hpp"

namespace fitk {

struct CatalogFI {
    std::string name;
    std::string kind;  // "poly" | "exp"
    Expr expression;   // symbolic integral in (t, q, qdot), when representable
    bool symbolic = true;
    bool expected_conserved = true;
    std::string tag;   // stable condition-family tag for reports
    std::optional<PolyTimeCandidate> poly;
    std::optional<ExpTimeCandidate> exponential;
    StateFn evaluator;  // always callable, numeric path included
};

struct NamedSymmetry {
    std::string name;
    std::string kind;  // "kv" | "kt"
    SymTensor tensor;
};

struct CurvatureIdentity {
    int a, b, c, d;  // 0-based indices of R^a_{bcd}
    Expr expected;
};

struct CatalogEntry {
    std::string name;
    SystemDef system;
    std::vector<CatalogFI> fis;
    std::vector<NamedSymmetry> symmetries;
    std::vector<CurvatureIdentity> curvature_identities;
    State reference_ic;
    double t_end = 5.0;
    IntegratorOptions integrator;
    // Overrides for entries whose forces are only numerically defined.
    std::optional<AccelFn> accel_override;
    std::optional<GuardValuesFn> guard_override;

    Trajectory run_reference(const IntegratorOptions* opts = nullptr) const;
    Trajectory run(const State& ic, double tend, const IntegratorOptions& opts) const;
};

std::vector<std::string> list_catalog();

// Builds the named entry with every parameter bound. Missing parameters take
// the entry's defaults; invalid values (zero where a nonzero constant is
// required) throw std::invalid_argument.
CatalogEntry instantiate(const std::string& name, const std::map<std::string, double>& params = {});

// ---------------------------------------------------------------------------
// Implicit quartic F(x) of the separable cubic-integral potential
// ---------------------------------------------------------------------------

struct GravelParams {
    double c1 = 1.0, k1 = 0.0, k2 = 0.0, k3 = 0.0;
};

struct GravelRoot {
    double F = 0.0;
    double Fprime = 0.0;
};

struct GravelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// All real roots of the quartic Phi(x, F) = 0 in F, ascending.
std::vector<double> gravel_roots(double x, const GravelParams& p);

// One root selected by proximity to `seed`, polished by safeguarded Newton;
// F' from implicit differentiation. Throws GravelError when no real root
// exists or the branch collides (Phi_F = 0 at the root with no usable
// fallback derivative).
GravelRoot gravel_F(double x, const GravelParams& p, double seed);

// Branch continuation along a trajectory: the next root is seeded from the
// last one (with tangent extrapolation), so the tracked branch stays smooth
// through nearby root crossings. Fresh trackers start at the c1*x^2/9 seed.
class GravelTracker {
public:
    explicit GravelTracker(const GravelParams& p) : p_(p) {}
    GravelRoot at(double x);

private:
    GravelParams p_;
    bool primed_ = false;
    double last_x_ = 0, last_F_ = 0, last_Fp_ = 0;
};

}  // namespace fitk

#endif
