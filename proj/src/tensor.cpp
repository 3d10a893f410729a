#include "fitk/tensor.hpp"

#include <algorithm>
#include <stdexcept>

namespace fitk {

Connection::Connection(int dim, std::vector<std::string> coords)
    : dim_(dim), coords_(std::move(coords)),
      g_(static_cast<std::size_t>(dim) * (static_cast<std::size_t>(dim) * (dim + 1) / 2),
         Expr::number(0ll)) {
    if (static_cast<int>(coords_.size()) != dim)
        throw std::invalid_argument("Connection: coordinate count != dim");
}

Connection Connection::zero(int dim, std::vector<std::string> coords) {
    return Connection(dim, std::move(coords));
}

int Connection::pair_index(int b, int c) const {
    if (b > c) std::swap(b, c);
    // position of (b,c), b<=c, in row-major upper-triangular order
    return b * dim_ - b * (b - 1) / 2 + (c - b);
}

const Expr& Connection::gamma(int a, int b, int c) const {
    return g_[static_cast<std::size_t>(a) * (dim_ * (dim_ + 1) / 2) + pair_index(b, c)];
}

void Connection::set_gamma(int a, int b, int c, Expr e) {
    g_[static_cast<std::size_t>(a) * (dim_ * (dim_ + 1) / 2) + pair_index(b, c)] = std::move(e);
}

bool Connection::is_zero() const {
    return std::all_of(g_.begin(), g_.end(), [](const Expr& e) { return e.is_zero(); });
}

// ---------------------------------------------------------------------------

std::size_t SymTensor::count_components(int dim, int order) {
    // C(dim + order - 1, order)
    std::size_t n = 1;
    for (int i = 1; i <= order; ++i)
        n = n * static_cast<std::size_t>(dim + order - i) / static_cast<std::size_t>(i);
    return n;
}

SymTensor::SymTensor(int dim, int order) : dim_(dim), order_(order) {
    if (dim < 1 || order < 0) throw std::invalid_argument("SymTensor: bad dim/order");
    // Enumerate sorted multi-indices in lexicographic order.
    std::vector<int> idx(order, 0);
    for (;;) {
        sorted_indices_.push_back(idx);
        int p = order - 1;
        while (p >= 0 && idx[p] == dim - 1) --p;
        if (p < 0) break;
        int v = idx[p] + 1;
        for (int q = p; q < order; ++q) idx[q] = v;
    }
    if (order == 0) sorted_indices_ = {{}};
    comps_.assign(sorted_indices_.size(), Expr::number(0ll));
}

SymTensor SymTensor::scalar(int dim, Expr value) {
    SymTensor t(dim, 0);
    t.comps_[0] = std::move(value);
    return t;
}

bool SymTensor::is_structurally_zero() const {
    return std::all_of(comps_.begin(), comps_.end(), [](const Expr& e) { return e.is_zero(); });
}

std::size_t SymTensor::position(std::span<const int> sorted) const {
    // Rank of a sorted multi-index among all sorted multi-indices: count how
    // many enumerate before it, dimension-peeling one slot at a time.
    std::size_t pos = 0;
    int prev = 0;
    for (int s = 0; s < order_; ++s) {
        int remaining = order_ - s - 1;
        for (int v = prev; v < sorted[static_cast<std::size_t>(s)]; ++v)
            pos += count_components(dim_ - v, remaining);
        prev = sorted[static_cast<std::size_t>(s)];
    }
    return pos;
}

const Expr& SymTensor::at(std::span<const int> idx) const {
    if (static_cast<int>(idx.size()) != order_)
        throw std::invalid_argument("SymTensor: arity mismatch (got " +
                                    std::to_string(idx.size()) + ", order is " +
                                    std::to_string(order_) + ")");
    std::vector<int> s(idx.begin(), idx.end());
    for (int i : s)
        if (i < 0 || i >= dim_) throw std::out_of_range("SymTensor: index out of range");
    std::sort(s.begin(), s.end());
    return comps_[position(s)];
}

const Expr& SymTensor::at(std::initializer_list<int> idx) const {
    return at(std::span<const int>(idx.begin(), idx.size()));
}

void SymTensor::set(std::span<const int> idx, Expr e) {
    if (static_cast<int>(idx.size()) != order_)
        throw std::invalid_argument("SymTensor: arity mismatch");
    std::vector<int> s(idx.begin(), idx.end());
    for (int i : s)
        if (i < 0 || i >= dim_) throw std::out_of_range("SymTensor: index out of range");
    std::sort(s.begin(), s.end());
    comps_[position(s)] = std::move(e);
}

void SymTensor::set(std::initializer_list<int> idx, Expr e) {
    set(std::span<const int>(idx.begin(), idx.size()), std::move(e));
}

SymTensor SymTensor::map(const std::function<Expr(const Expr&)>& f) const {
    SymTensor r(dim_, order_);
    for (std::size_t i = 0; i < comps_.size(); ++i) r.comps_[i] = f(comps_[i]);
    return r;
}

SymTensor SymTensor::operator+(const SymTensor& o) const {
    if (o.dim_ != dim_ || o.order_ != order_)
        throw std::invalid_argument("SymTensor: shape mismatch in +");
    SymTensor r(dim_, order_);
    for (std::size_t i = 0; i < comps_.size(); ++i) r.comps_[i] = comps_[i] + o.comps_[i];
    return r;
}

SymTensor SymTensor::operator-(const SymTensor& o) const {
    if (o.dim_ != dim_ || o.order_ != order_)
        throw std::invalid_argument("SymTensor: shape mismatch in -");
    SymTensor r(dim_, order_);
    for (std::size_t i = 0; i < comps_.size(); ++i) r.comps_[i] = comps_[i] - o.comps_[i];
    return r;
}

SymTensor SymTensor::scaled(const Expr& c) const {
    return map([&c](const Expr& e) { return c * e; });
}

// ---------------------------------------------------------------------------

SymTensor symmetrize(int dim, int order,
                     const std::function<Expr(const std::vector<int>&)>& full) {
    SymTensor out(dim, order);
    for (const auto& sorted : out.index_list()) {
        std::vector<int> perm = sorted;
        std::vector<Expr> terms;
        // next_permutation over the sorted multiset enumerates each distinct
        // arrangement once; averaging over them equals the 1/r! convention.
        do {
            terms.push_back(full(perm));
        } while (std::next_permutation(perm.begin(), perm.end()));
        Expr avg = Expr::mul({Expr::number(Rational(1, static_cast<long long>(terms.size()))),
                              Expr::add(std::move(terms))});
        out.set(sorted, avg);
    }
    return out;
}

std::vector<SymTensor> cov_derivative(const SymTensor& t, const Connection& conn) {
    if (t.dim() != conn.dim())
        throw std::invalid_argument("cov_derivative: dimension mismatch");
    const int dim = t.dim();
    const int r = t.order();
    std::vector<SymTensor> out(static_cast<std::size_t>(dim), SymTensor(dim, r));
    for (int c = 0; c < dim; ++c) {
        for (const auto& idx : t.index_list()) {
            Expr v = diff(t.at(idx), conn.coords()[static_cast<std::size_t>(c)]);
            std::vector<Expr> corrections{v};
            for (int s = 0; s < r; ++s) {
                for (int d = 0; d < dim; ++d) {
                    const Expr& g = conn.gamma(d, idx[static_cast<std::size_t>(s)], c);
                    if (g.is_zero()) continue;
                    std::vector<int> repl = idx;
                    repl[static_cast<std::size_t>(s)] = d;
                    corrections.push_back(-(g * t.at(repl)));
                }
            }
            out[static_cast<std::size_t>(c)].set(idx, Expr::add(std::move(corrections)));
        }
    }
    return out;
}

SymTensor sym_cov_derivative(const SymTensor& t, const Connection& conn) {
    std::vector<SymTensor> d = cov_derivative(t, conn);
    const int r = t.order();
    // d[c] is symmetric in the first r slots, so averaging over the r+1
    // choices of derivative slot realizes the full symmetrization.
    return symmetrize(t.dim(), r + 1, [&](const std::vector<int>& idx) {
        std::vector<int> head(idx.begin(), idx.end() - 1);
        int c = idx.back();
        return d[static_cast<std::size_t>(c)].at(head);
    });
}

SymTensor contract_last(const SymTensor& t, const std::vector<Expr>& q) {
    if (t.order() < 1) throw std::invalid_argument("contract_last: order must be >= 1");
    if (static_cast<int>(q.size()) != t.dim())
        throw std::invalid_argument("contract_last: vector size mismatch");
    SymTensor out(t.dim(), t.order() - 1);
    for (const auto& idx : out.index_list()) {
        std::vector<Expr> sum;
        std::vector<int> full(idx.begin(), idx.end());
        full.push_back(0);
        for (int c = 0; c < t.dim(); ++c) {
            full.back() = c;
            sum.push_back(t.at(full) * q[static_cast<std::size_t>(c)]);
        }
        out.set(idx, Expr::add(std::move(sum)));
    }
    return out;
}

SymTensor partial(const SymTensor& t, const std::string& var) {
    return t.map([&var](const Expr& e) { return diff(e, var); });
}

}  // namespace fitk
