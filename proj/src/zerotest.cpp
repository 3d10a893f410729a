#include "fitk/zerotest.hpp"

#include <algorithm>
#include <cmath>

namespace fitk {

std::string to_string(ZeroVerdict v) {
    switch (v) {
        case ZeroVerdict::ExactZero: return "exact-zero";
        case ZeroVerdict::ProbablyZero: return "probably-zero";
        case ZeroVerdict::NonZero: return "nonzero";
    }
    return "?";
}

std::vector<double> halton_point(std::uint64_t index, std::size_t dim) {
    static const unsigned primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    std::vector<double> p(dim);
    for (std::size_t d = 0; d < dim; ++d) {
        unsigned base = primes[d % (sizeof(primes) / sizeof(primes[0]))];
        double f = 1.0, r = 0.0;
        std::uint64_t i = index;
        while (i > 0) {
            f /= base;
            r += f * static_cast<double>(i % base);
            i /= base;
        }
        p[d] = r;
    }
    return p;
}

ZeroResult is_identically_zero(const Expr& raw, const SampleDomain& d) {
    Expr e = simplify(raw);
    if (e.is_zero()) return {ZeroVerdict::ExactZero, std::nullopt, 0, 0.0, "literal zero"};

    auto syms = free_symbols(e);
    std::vector<std::string> vars(syms.begin(), syms.end());
    bool atoms_used = false;
    bool have_exact = false;
    try {
        if (d.sample_only) throw std::runtime_error("sampling only");
        ExtendedRatFun f = to_rational_function_extended(e, vars);
        atoms_used = f.used_atoms();
        have_exact = true;
        if (f.fun.num.is_zero())
            return {ZeroVerdict::ExactZero, std::nullopt, 0, 0.0,
                    atoms_used ? "zero numerator over transcendental atoms" : "zero numerator"};
    } catch (const std::exception&) {
        // fall through to sampling
    }

    // Sampled phase.
    std::vector<std::string> sampled;
    for (const auto& s : syms)
        if (!d.fixed.count(s)) sampled.push_back(s);

    if (sampled.empty()) {
        // Fully bound: a single evaluation decides.
        Binding b = d.fixed;
        try {
            double v = eval(e, b);
            double scale = magnitude_scale(e, b);
            double ratio = std::abs(v) / (1.0 + std::abs(scale));
            if (ratio > d.tolerance)
                return {ZeroVerdict::NonZero, Witness{b, v}, 1, ratio, "constant expression"};
            return {ZeroVerdict::ProbablyZero, std::nullopt, 1, ratio, "constant expression"};
        } catch (const EvalError& err) {
            throw ZeroTestError(std::string("zero test: evaluation failed: ") + err.what());
        }
    }

    for (const auto& s : sampled)
        if (!d.boxes.count(s))
            throw ZeroTestError("zero test: no sampling box or binding for symbol '" + s + "'");

    // Only guards whose symbols are bound at a sample point can be evaluated;
    // a guard on a coordinate the expression never mentions is irrelevant.
    std::vector<Expr> guards;
    for (const auto& g : d.singular_guards) {
        bool applicable = true;
        for (const auto& s : free_symbols(g))
            if (!d.fixed.count(s) &&
                std::find(sampled.begin(), sampled.end(), s) == sampled.end())
                applicable = false;
        if (applicable) guards.push_back(g);
    }

    ZeroResult best{ZeroVerdict::ProbablyZero, std::nullopt, 0, 0.0, ""};
    int valid = 0;
    std::uint64_t start = (d.seed % 7919) + 17;
    int attempts = std::max(8 * d.samples, d.samples + 16);
    for (int a = 0; a < attempts && valid < d.samples; ++a) {
        std::vector<double> u = halton_point(start + static_cast<std::uint64_t>(a), sampled.size());
        Binding b = d.fixed;
        for (std::size_t i = 0; i < sampled.size(); ++i) {
            auto [lo, hi] = d.boxes.at(sampled[i]);
            b[sampled[i]] = lo + (hi - lo) * u[i];
        }
        bool singular = false;
        for (const auto& g : guards) {
            try {
                if (std::abs(eval(g, b)) < d.guard_margin) { singular = true; break; }
            } catch (const EvalError&) {
                singular = true;
                break;
            }
        }
        if (singular) continue;
        double v, scale;
        try {
            v = eval(e, b);
            scale = magnitude_scale(e, b);
        } catch (const EvalError&) {
            continue;
        }
        if (!std::isfinite(v) || !std::isfinite(scale)) continue;
        ++valid;
        double ratio = std::abs(v) / (1.0 + std::abs(scale));
        if (ratio > best.max_ratio) best.max_ratio = ratio;
        if (ratio > d.tolerance) {
            best.verdict = ZeroVerdict::NonZero;
            best.witness = Witness{b, v};
            best.samples = valid;
            return best;
        }
    }
    if (valid == 0)
        throw ZeroTestError("zero test: all sample points hit singularities for `" + e.str() + "`");
    best.samples = valid;
    if (have_exact && !atoms_used) {
        // Rational normal form was nonzero yet no witness cleared the
        // threshold; report the honest in-between verdict.
        best.note = "nonzero rational normal form, but no sampled witness above threshold";
    }
    return best;
}

}  // namespace fitk
