#ifndef FITK_SOLVER_HPP
#define FITK_SOLVER_HPP

#include <map>
#include <string>
#include <vector>

#include "fitk/geometry.hpp"
#include "fitk/tensor.hpp"

namespace fitk {

// Polynomial ansatz for a symmetric tensor field: order-m tensor whose
// components are polynomials of total degree <= degree.
struct AnsatzSpec {
    int order = 1;
    int degree = 1;
};

struct SolverCaps {
    int max_degree = 6;
    std::size_t max_unknowns = 20000;
};

// Sparse exact linear system with labeled rows and columns.
struct LinearSystem {
    std::size_t ncols = 0;
    std::vector<std::map<std::size_t, Rational>> rows;
    std::vector<std::string> col_labels;
    std::vector<std::string> row_labels;

    void add_row(std::map<std::size_t, Rational> entries, std::string label);
};

// Exact nullspace basis by Gauss-Jordan elimination over the rationals; basis
// vectors are scaled to integer entries with content 1.
std::vector<std::vector<Rational>> nullspace(const LinearSystem& sys);

// Exact rank (by elimination) and floating rank (Jacobi SVD, threshold
// 1e-8 * sigma_max) of the same system; they must agree on well-posed input.
std::size_t exact_rank(const LinearSystem& sys);
std::size_t float_svd_rank(const LinearSystem& sys, double threshold = 1e-8);

struct NonRationalConnection : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// All order-m generalized Killing tensors with polynomial components of degree
// <= spec.degree: the exact nullspace of L_{(i1...im|im+1)} = 0. Parameters
// appearing in Γ must have exact rational values in `exact_params`. Throws
// NonRationalConnection when Γ is not a rational-function connection
// (check-only verification still applies there), std::length_error past caps.
std::vector<SymTensor> find_generalized_kts(const Connection& conn,
                                            const std::map<std::string, Rational>& exact_params,
                                            const AnsatzSpec& spec,
                                            const SolverCaps& caps = {});

// Vectors B (polynomial, degree <= d) whose symmetrized derivative B_{(a|b)}
// is a generalized KT, modulo exact Killing vectors. Returned as component
// expression lists.
std::vector<std::vector<Expr>> find_reducible_kt_generators(
    const Connection& conn, const std::map<std::string, Rational>& exact_params, int degree,
    const SolverCaps& caps = {});

// Assembles the linear system for the KT condition at the given ansatz; shared
// by the search entry points and the rank cross-checks.
LinearSystem build_kt_system(const Connection& conn,
                             const std::map<std::string, Rational>& exact_params,
                             const AnsatzSpec& spec, const SolverCaps& caps = {});

}  // namespace fitk

#endif
