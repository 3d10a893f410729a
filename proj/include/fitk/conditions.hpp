#ifndef FITK_CONDITIONS_HPP
#define FITK_CONDITIONS_HPP

#include <map>
#include <utility>

#include "fitk/geometry.hpp"
#include "fitk/tensor.hpp"
#include "fitk/zerotest.hpp"

namespace fitk {

// Candidate first integral polynomial in time: tensors L_(N) of every rank
// r = 1..m for time powers N = 0..n (missing entries are zero fields), the
// scalar G(q), and the constants s0, s1.
struct PolyTimeCandidate {
    int m = 1;
    int n = 0;
    std::map<std::pair<int, int>, SymTensor> tensors;  // (N, rank) -> field
    Expr G = Expr::number(0ll);
    Expr s0 = Expr::number(0ll);
    Expr s1 = Expr::number(0ll);

    SymTensor tensor(int N, int rank, int dim) const;
    void set_tensor(int N, int rank, SymTensor t);
    bool stored_nonzero(int N, int rank) const;
};

// Candidate with an overall e^{λt} factor; one tensor per rank 1..m.
struct ExpTimeCandidate {
    int m = 1;
    Expr lambda = Expr::number(1ll);
    std::map<int, SymTensor> tensors;  // rank -> field

    SymTensor tensor(int rank, int dim) const;
    void set_tensor(int rank, SymTensor t);
};

struct ConditionRow {
    std::string id;
    std::string anchor;  // stable tag of the condition family, for report diffing
    ZeroResult result;
};

struct ConditionReport {
    std::vector<ConditionRow> rows;
    bool pass() const;
    const ConditionRow* first_failure() const;
};

struct CheckOptions {
    std::uint64_t seed = 12345;
    int samples = 64;
    double tolerance = 1e-10;
};

// The full first-order PDE system for time-dependent tensor coefficients
// M_r(t, q), r = 0..m:
//   A: M_(i1...im|im+1) = 0
//   B: M_{i1...im,t} + M_(i1...i_{m-1}|im) = 0
//   C: M_{i1...ir,t} + M_(i1...i_{r-1}|ir) - (r+1) M_{i1...ir c} Q^c = 0
//   D: M_,t - M_c Q^c = 0
ConditionReport check_fi_pde_system(const std::vector<SymTensor>& M, const SystemDef& sys,
                                    const CheckOptions& opts = {});

// Condition set of the polynomial-in-time integral family at the candidate's
// (m, n). Guarded terms are omitted structurally when their guard fails, so
// each report row names exactly the active condition instance.
ConditionReport check_integral1(const PolyTimeCandidate& c, const SystemDef& sys,
                                const CheckOptions& opts = {});

// Condition set of the exponential integral family; lambda must evaluate to a
// nonzero number under the system's parameter bindings.
ConditionReport check_integral2(const ExpTimeCandidate& c, const SystemDef& sys,
                                const CheckOptions& opts = {});

// Literal construction of the candidate's integral expression in (t, q, qdot).
Expr build_integral1(const PolyTimeCandidate& c, const SystemDef& sys);
Expr build_integral2(const ExpTimeCandidate& c, const SystemDef& sys);

// Splits by the (rank + time power) parity classes. First output: even class
// plus G (and s1 when its defining contraction lives there); second: odd class
// plus s0 (ditto). Requires m > 1.
std::pair<PolyTimeCandidate, PolyTimeCandidate> split_parity(const PolyTimeCandidate& c);

// Absorbs the order-(m-1) geometric symmetry of a parity-pure candidate with
// even time degree n = 2l into t^{2l+1} terms, producing the complete form.
// Augmentation tensors that vanish leave the candidate unchanged.
PolyTimeCandidate absorb_lower_order(const PolyTimeCandidate& c, const SystemDef& sys);

// Complete-form condition set for the requested parity (1 or 2): pattern
// conformance rows plus the integral-family conditions at the candidate's
// time degree. Requires m > 1.
ConditionReport check_complete_form(const PolyTimeCandidate& c, int parity,
                                    const SystemDef& sys, const CheckOptions& opts = {});

// dI/dt with accelerations eliminated through the dynamical equations:
//   I_,t + I_,{q^a} qdot^a + I_,{qdot^a} (-Γ^a_{bc} qdot^b qdot^c - Q^a).
Expr total_derivative(const Expr& integral, const SystemDef& sys);

// The master conservation test: zero-verdict of the total derivative sampled
// over the domain box, the velocity box, and t.
ZeroResult total_derivative_oracle(const Expr& integral, const SystemDef& sys,
                                   const CheckOptions& opts = {});

// ∂_a g_b - ∂_b g_a for a declared gradient field; a prerequisite for scalar
// recovery by quadrature.
ZeroResult gradient_integrability(const std::vector<Expr>& grad, const SystemDef& sys,
                                  const CheckOptions& opts = {});

// Velocity-polynomial expansion helper: sum over all index tuples of
// T_{i1..ir} qdot^{i1}..qdot^{ir} using sorted components and multiplicities.
Expr velocity_contraction(const SymTensor& t, const std::vector<std::string>& velocity_names);

}  // namespace fitk

#endif
