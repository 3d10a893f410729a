#ifndef FITK_TENSOR_HPP
#define FITK_TENSOR_HPP

#include <functional>
#include <span>
#include <vector>

#include "fitk/expr.hpp"

namespace fitk {

// Symmetric connection coefficients Γ^a_{bc} = Γ^a_{cb}, stored for b <= c.
class Connection {
public:
    Connection(int dim, std::vector<std::string> coords);
    static Connection zero(int dim, std::vector<std::string> coords);

    int dim() const { return dim_; }
    const std::vector<std::string>& coords() const { return coords_; }

    const Expr& gamma(int a, int b, int c) const;  // 0-based, any order of b,c
    void set_gamma(int a, int b, int c, Expr e);
    bool is_zero() const;

private:
    int dim_;
    std::vector<std::string> coords_;
    std::vector<Expr> g_;  // dim * dim*(dim+1)/2
    int pair_index(int b, int c) const;
};

// Totally symmetric tensor field of a fixed order; one Expr per sorted
// multi-index (i1 <= ... <= ir), C(dim+r-1, r) components. Order 0 is a single
// scalar. Indices in this API are 0-based.
class SymTensor {
public:
    SymTensor(int dim, int order);
    static SymTensor scalar(int dim, Expr value);

    int dim() const { return dim_; }
    int order() const { return order_; }
    std::size_t component_count() const { return comps_.size(); }
    bool is_structurally_zero() const;  // every stored component is literal 0

    // Access with indices in any permutation; arity and range checked.
    const Expr& at(std::span<const int> idx) const;
    const Expr& at(std::initializer_list<int> idx) const;
    void set(std::span<const int> idx, Expr e);
    void set(std::initializer_list<int> idx, Expr e);

    // Component storage in sorted-multi-index order.
    const std::vector<Expr>& components() const { return comps_; }
    const std::vector<std::vector<int>>& index_list() const { return sorted_indices_; }

    SymTensor map(const std::function<Expr(const Expr&)>& f) const;
    SymTensor operator+(const SymTensor& o) const;
    SymTensor operator-(const SymTensor& o) const;
    SymTensor scaled(const Expr& c) const;

    static std::size_t count_components(int dim, int order);

private:
    int dim_, order_;
    std::vector<Expr> comps_;
    std::vector<std::vector<int>> sorted_indices_;
    std::size_t position(std::span<const int> sorted) const;
};

// (1/r!) sum over index permutations of an arbitrary full-index map.
SymTensor symmetrize(int dim, int order, const std::function<Expr(const std::vector<int>&)>& full);

// Covariant derivative T_{i1...ir|c} = T_{,c} - sum_s Γ^d_{i_s c} T_{..d..};
// result[c] is the order-r tensor of derivatives in the c direction.
std::vector<SymTensor> cov_derivative(const SymTensor& t, const Connection& conn);

// Symmetrized covariant derivative T_{(i1...ir|c)}: order r+1, normalized
// weights.
SymTensor sym_cov_derivative(const SymTensor& t, const Connection& conn);

// Contraction of the last index with an upper-index vector field:
// C_{i1...ir} = T_{i1...ir c} Q^c.
SymTensor contract_last(const SymTensor& t, const std::vector<Expr>& q);

// Component-wise partial derivative with respect to `var` (e.g. time).
SymTensor partial(const SymTensor& t, const std::string& var);

}  // namespace fitk

#endif
