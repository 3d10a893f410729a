#ifndef FITK_GEOMETRY_HPP
#define FITK_GEOMETRY_HPP

#include <functional>
#include <optional>

#include "fitk/tensor.hpp"
#include "fitk/zerotest.hpp"

namespace fitk {

// A dynamical system q''^a = -Γ^a_{bc} q'^b q'^c - Q^a(q) together with the
// sampling data every verification step needs.
struct SystemDef {
    std::string name;
    std::vector<std::string> coords;
    Connection conn;
    std::vector<Expr> forces;                     // Q^a, upper index
    std::map<std::string, double> params;         // numeric parameter bindings
    std::map<std::string, Rational> exact_params; // exact values where known
    std::vector<Expr> singular;                   // declared singular loci
    std::map<std::string, std::pair<double, double>> domain;
    std::pair<double, double> velocity_box{-1.0, 1.0};

    explicit SystemDef(int dim = 1)
        : coords(make_default_coords(dim)), conn(dim, coords) {}
    SystemDef(std::vector<std::string> cs, Connection c)
        : coords(std::move(cs)), conn(std::move(c)) {}

    int dim() const { return static_cast<int>(coords.size()); }
    std::string velocity_name(int a) const { return coords[static_cast<std::size_t>(a)] + "_dot"; }
    std::vector<std::string> velocity_names() const;

    // Every symbol expressions over this system may mention.
    std::set<std::string> symbol_names(bool with_velocities = true, bool with_time = true) const;

    // Sampling setup for zero tests over this system's domain. Parameters are
    // pinned to their bindings; coordinates (and optionally velocities and t)
    // are swept.
    SampleDomain sample_domain(bool with_velocities = false, bool with_time = false,
                               std::uint64_t seed = 12345) const;

    Expr parse(const std::string& text, bool with_velocities = true) const;

private:
    static std::vector<std::string> make_default_coords(int dim);
};

// Riemann curvature of a symmetric connection,
// R^a_{bcd} = Γ^a_{bd,c} - Γ^a_{bc,d} + Γ^a_{sc}Γ^s_{bd} - Γ^a_{sd}Γ^s_{bc}.
class CurvatureField {
public:
    explicit CurvatureField(const Connection& conn);
    int dim() const { return dim_; }
    const Expr& at(int a, int b, int c, int d) const;

private:
    int dim_;
    std::vector<Expr> comps_;
};

struct MetricField {
    SymTensor g;   // order-2 covariant components
    Expr det;      // nondegeneracy certificate
};

// γ_{ab|c}; result[c] is the order-2 residual tensor. Zero for a compatible
// (metric, connection) pair.
std::vector<SymTensor> metricity_residual(const Connection& conn, const SymTensor& metric);

enum class GeometryClass { Riemannian, NonRiemannian, Indeterminate };

struct Classify2DResult {
    GeometryClass cls = GeometryClass::Indeterminate;
    int case_id = 0;  // 1..4 when Riemannian
    std::optional<MetricField> metric;
    std::optional<Witness> witness;  // for NonRiemannian
    ZeroResult criterion;            // the Γ¹₁₁,y - Γ²₂₂,x test
    bool metric_symbolic = true;
    std::string note;
};

// Classification of 2d connections with only Γ¹₁₁ and Γ²₂₂ possibly nonzero.
// Tests the integrability criterion Γ¹₁₁,y = Γ²₂₂,x; a witness of failure
// means NonRiemannian. Otherwise reconstructs a kinetic metric, attempting the
// symbolically decidable dependence cases before the general one:
//   case 2:  Γ²₂₂ ≡ 0             -> γ = [[f, sqrt(f)],[sqrt(f), 0]]
//   case 3:  Γ¹₁₁ ≡ 0             -> γ = [[0, sqrt(h)],[sqrt(h), h]]
//   case 4:  both ≡ 0             -> γ = identity (f = h = 1, c0 = 0)
//   case 1:  general integrable   -> γ = F(x,y)·offdiag, ln F by integration
// Throws std::invalid_argument if other connection components are nonzero.
Classify2DResult classify_2d(const Connection& conn, const SampleDomain& dom);

struct OscillatorFamily {
    std::vector<Expr> killing_vector;  // (L1, L2)
    Connection conn;
    SystemDef system;
    ZeroResult nonriemannian_criterion;
    bool nonriemannian = false;
};

// The coupled-oscillator construction: given F1 (an expression in `arg_name`),
// s0, and nonzero constants k, p, builds the generalized KV
//   L2 = (p y - k x) F1(w) - s0 x / w,   w = p(y^2 - x^2) - 2 k x y,
// its companion L1, the connection Γ¹₁₁ = L1,x/L1, Γ²₂₂ = L2,y/L2, and forces
// Q = (k x - p y, k y + p x). Throws if L1 or L2 is identically zero.
OscillatorFamily oscillator_family_builder(const Expr& f1, const std::string& arg_name,
                                           const Expr& s0, const Expr& k, const Expr& p,
                                           const SampleDomain& dom);

// Symbolic antiderivative for the restricted class this project needs: sums of
// terms c(other) * (a*var + b)^r (integer or rational r, including r = -1) and
// polynomials in var with denominator free of var. Returns nullopt otherwise.
std::optional<Expr> antiderivative(const Expr& e, const std::string& var);

// Adaptive Simpson quadrature.
double integrate_1d(const std::function<double(double)>& f, double a, double b,
                    double tol = 1e-10);

// Scalar recovery from a declared gradient by quadrature along axis-parallel
// paths from `base` to `point`; integrability (G_,[ab] = 0) is the caller's
// business (see conditions::check_gradient_integrability).
double quadrature_potential(const std::vector<Expr>& grad,
                            const std::vector<std::string>& coords, const Binding& params,
                            const std::vector<double>& base, const std::vector<double>& point);

}  // namespace fitk

#endif
