#ifndef FITK_SYSIO_HPP
#define FITK_SYSIO_HPP

#include <iosfwd>
#include <optional>

#include "fitk/catalog.hpp"
#include "fitk/conditions.hpp"
#include "fitk/dynamics.hpp"
#include "fitk/geometry.hpp"

namespace fitk {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Minimal INI-style reader: [section] headers, `key = value` lines ordered as
// written, '#' comments, optional double quotes around keys and values.
struct IniFile {
    using Entries = std::vector<std::pair<std::string, std::string>>;
    std::vector<std::pair<std::string, Entries>> sections;

    static IniFile parse_text(const std::string& text);
    static IniFile load(const std::string& path);
    const Entries* find(const std::string& name) const;
};

// System-definition format:
//   [system]     name, dim, coords
//   [params]     name = number
//   [connection] "a,b,c" = "<expr>"   (indices a;bc with b <= c, 1-based)
//   [forces]     "a" = "<expr>"
//   [domain]     coord = lo, hi
//   [velocity]   box = lo, hi
//   [singular]   any-key = "<expr>"
SystemDef parse_system(const std::string& text);
SystemDef load_system(const std::string& path);
std::string dump_system(const SystemDef& sys);

// Candidate format:
//   [candidate]    kind = poly|exp, m, and n (poly) or lambda (exp)
//   [tensor.N.r]   "i1,...,ir" = "<expr>"    ([tensor.r] for exp candidates)
//   [scalar]       G = "<expr>", s0, s1
struct CandidateFile {
    std::string kind;
    std::optional<PolyTimeCandidate> poly;
    std::optional<ExpTimeCandidate> exponential;
};
CandidateFile parse_candidate(const std::string& text, const SystemDef& sys);
CandidateFile load_candidate(const std::string& path, const SystemDef& sys);

std::string dump_tensor_literal(const SymTensor& t, const std::string& section);

// Structured JSON with deterministic key order; schema version 1.
std::string report_to_json(const ConditionReport& report, const std::string& command,
                           std::uint64_t seed);

struct DriftReportRow {
    std::string name;
    bool expected_conserved = true;
    DriftSeries drift;
    bool within_tolerance = true;
};
std::string drift_report_to_json(const std::vector<DriftReportRow>& rows,
                                 const std::string& system, double t_end, double rtol,
                                 double atol, double tolerance, bool overall_pass);

void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                          const std::vector<std::string>& coords,
                          const std::vector<std::string>& fi_names,
                          const std::vector<std::vector<double>>& fi_values);

// Resolves a --system argument: an existing file path (tried verbatim, then
// under FITK_CONFIG_DIR) is loaded; otherwise the name is a catalog entry.
struct ResolvedSystem {
    SystemDef system;
    std::optional<CatalogEntry> entry;  // present when it came from the catalog
};
ResolvedSystem resolve_system(const std::string& source,
                              const std::map<std::string, double>& params);

}  // namespace fitk

#endif
