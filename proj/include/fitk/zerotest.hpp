#ifndef FITK_ZEROTEST_HPP
#define FITK_ZEROTEST_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fitk/expr.hpp"
#include "fitk/polynomial.hpp"

namespace fitk {

enum class ZeroVerdict { ExactZero, ProbablyZero, NonZero };

std::string to_string(ZeroVerdict v);

struct Witness {
    Binding point;
    double value = 0.0;
};

struct ZeroResult {
    ZeroVerdict verdict;
    std::optional<Witness> witness;  // present for NonZero
    int samples = 0;
    double max_ratio = 0.0;  // max |value| / (1 + scale) over samples
    std::string note;
    bool pass() const { return verdict != ZeroVerdict::NonZero; }
};

struct ZeroTestError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Where and how to sample an expression whose exact zero test is inconclusive.
// Symbols in `boxes` are swept with a seeded Halton sequence; symbols in
// `fixed` are pinned. Points violating a singular guard (|g| < guard_margin)
// or raising evaluation errors are skipped.
struct SampleDomain {
    std::map<std::string, std::pair<double, double>> boxes;
    Binding fixed;
    std::vector<Expr> singular_guards;
    double guard_margin = 1e-3;
    std::uint64_t seed = 12345;
    int samples = 64;
    double tolerance = 1e-10;
    // Skip the exact normal-form phase; verdicts come from sampling alone.
    // For expressions whose normal form would explode this is the difference
    // between milliseconds and minutes.
    bool sample_only = false;
};

// ExactZero when the rational normal form (transcendental subtrees as opaque
// atoms) has a zero numerator. Otherwise samples: any point with
// |value| > tolerance*(1 + magnitude scale) is a NonZero witness; all points
// below threshold give ProbablyZero. Throws ZeroTestError if every sample
// point lands on a singularity.
ZeroResult is_identically_zero(const Expr& e, const SampleDomain& d);

// Deterministic low-discrepancy point in [0,1)^dim for the given index.
std::vector<double> halton_point(std::uint64_t index, std::size_t dim);

}  // namespace fitk

#endif
