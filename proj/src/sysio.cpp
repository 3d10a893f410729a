#include "fitk/sysio.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "fitk/parser.hpp"

namespace fitk {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
    return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(trim(cur));
    return out;
}

double parse_number(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (trim(s.substr(used)).empty()) return v;
    } catch (const std::exception&) {
    }
    // allow exact fraction syntax
    try {
        return Rational::parse(s).to_double();
    } catch (const std::exception&) {
        throw IoError("cannot parse number for " + what + ": '" + s + "'");
    }
}

}  // namespace

IniFile IniFile::parse_text(const std::string& text) {
    IniFile f;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw IoError("line " + std::to_string(lineno) + ": unterminated section header");
            f.sections.push_back({trim(line.substr(1, line.size() - 2)), {}});
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw IoError("line " + std::to_string(lineno) + ": expected key = value");
        if (f.sections.empty())
            throw IoError("line " + std::to_string(lineno) + ": entry before any [section]");
        std::string key = unquote(trim(line.substr(0, eq)));
        std::string val = unquote(trim(line.substr(eq + 1)));
        f.sections.back().second.push_back({key, val});
    }
    return f;
}

IniFile IniFile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str());
}

const IniFile::Entries* IniFile::find(const std::string& name) const {
    for (const auto& [n, e] : sections)
        if (n == name) return &e;
    return nullptr;
}

// ---------------------------------------------------------------------------
// System files
// ---------------------------------------------------------------------------

SystemDef parse_system(const std::string& text) {
    IniFile f = IniFile::parse_text(text);
    const auto* sec = f.find("system");
    if (!sec) throw IoError("missing [system] section");
    std::string name = "unnamed";
    int dim = 0;
    std::vector<std::string> coords;
    for (const auto& [k, v] : *sec) {
        if (k == "name") name = v;
        else if (k == "dim") dim = static_cast<int>(parse_number(v, "dim"));
        else if (k == "coords") coords = split(v, ',');
        else throw IoError("unknown [system] key '" + k + "'");
    }
    if (dim <= 0) throw IoError("[system] dim must be positive");
    if (static_cast<int>(coords.size()) != dim)
        throw IoError("[system] coords count does not match dim");

    SystemDef sys(coords, Connection(dim, coords));
    sys.name = name;

    if (const auto* ps = f.find("params"))
        for (const auto& [k, v] : *ps) {
            sys.params[k] = parse_number(v, "param " + k);
            try {
                sys.exact_params[k] = Rational::parse(v);
            } catch (const std::exception&) {
                sys.exact_params[k] = rational_from_double(sys.params[k]);
            }
        }

    std::set<std::string> names(coords.begin(), coords.end());
    for (const auto& [k, v] : sys.params) names.insert(k);

    if (const auto* cs = f.find("connection"))
        for (const auto& [k, v] : *cs) {
            auto idx = split(k, ',');
            if (idx.size() != 3) throw IoError("[connection] key must be \"a,b,c\": '" + k + "'");
            int a = static_cast<int>(parse_number(idx[0], "index")) - 1;
            int b = static_cast<int>(parse_number(idx[1], "index")) - 1;
            int c = static_cast<int>(parse_number(idx[2], "index")) - 1;
            if (a < 0 || a >= dim || b < 0 || b >= dim || c < 0 || c >= dim)
                throw IoError("[connection] index out of range in '" + k + "'");
            if (b > c) throw IoError("[connection] expects b <= c in \"a,b,c\": '" + k + "'");
            try {
                sys.conn.set_gamma(a, b, c, parse_expr(v, names));
            } catch (const ParseError& e) {
                throw IoError("[connection] " + k + ": " + e.what());
            }
        }

    sys.forces.assign(static_cast<std::size_t>(dim), Expr::number(0ll));
    if (const auto* fs = f.find("forces"))
        for (const auto& [k, v] : *fs) {
            int a = static_cast<int>(parse_number(k, "force index")) - 1;
            if (a < 0 || a >= dim) throw IoError("[forces] index out of range: '" + k + "'");
            try {
                sys.forces[static_cast<std::size_t>(a)] = parse_expr(v, names);
            } catch (const ParseError& e) {
                throw IoError("[forces] " + k + ": " + e.what());
            }
        }

    if (const auto* ds = f.find("domain"))
        for (const auto& [k, v] : *ds) {
            auto parts = split(v, ',');
            if (parts.size() != 2) throw IoError("[domain] " + k + " needs 'lo, hi'");
            sys.domain[k] = {parse_number(parts[0], "domain"), parse_number(parts[1], "domain")};
        }

    if (const auto* vs = f.find("velocity"))
        for (const auto& [k, v] : *vs) {
            if (k != "box") throw IoError("unknown [velocity] key '" + k + "'");
            auto parts = split(v, ',');
            if (parts.size() != 2) throw IoError("[velocity] box needs 'lo, hi'");
            sys.velocity_box = {parse_number(parts[0], "velocity"),
                                parse_number(parts[1], "velocity")};
        }

    if (const auto* ss = f.find("singular"))
        for (const auto& [k, v] : *ss) {
            (void)k;
            try {
                sys.singular.push_back(parse_expr(v, names));
            } catch (const ParseError& e) {
                throw IoError(std::string("[singular] ") + e.what());
            }
        }
    return sys;
}

SystemDef load_system(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_system(ss.str());
    } catch (const IoError& e) {
        throw IoError(path + ": " + e.what());
    }
}

std::string dump_system(const SystemDef& sys) {
    std::ostringstream os;
    os << "[system]\n";
    os << "name = " << sys.name << "\n";
    os << "dim = " << sys.dim() << "\n";
    os << "coords = ";
    for (int i = 0; i < sys.dim(); ++i) os << (i ? ", " : "") << sys.coords[static_cast<std::size_t>(i)];
    os << "\n";
    if (!sys.params.empty()) {
        os << "\n[params]\n";
        for (const auto& [k, v] : sys.params) {
            auto it = sys.exact_params.find(k);
            if (it != sys.exact_params.end())
                os << k << " = " << it->second.to_string() << "\n";
            else
                os << k << " = " << v << "\n";
        }
    }
    os << "\n[connection]\n";
    for (int a = 0; a < sys.dim(); ++a)
        for (int b = 0; b < sys.dim(); ++b)
            for (int c = b; c < sys.dim(); ++c) {
                const Expr& g = sys.conn.gamma(a, b, c);
                if (g.is_zero()) continue;
                os << "\"" << a + 1 << "," << b + 1 << "," << c + 1 << "\" = \"" << g.str()
                   << "\"\n";
            }
    os << "\n[forces]\n";
    for (int a = 0; a < sys.dim(); ++a) {
        if (sys.forces[static_cast<std::size_t>(a)].is_zero()) continue;
        os << "\"" << a + 1 << "\" = \"" << sys.forces[static_cast<std::size_t>(a)].str() << "\"\n";
    }
    if (!sys.domain.empty()) {
        os << "\n[domain]\n";
        for (const auto& [k, box] : sys.domain)
            os << k << " = " << box.first << ", " << box.second << "\n";
    }
    os << "\n[velocity]\nbox = " << sys.velocity_box.first << ", " << sys.velocity_box.second
       << "\n";
    if (!sys.singular.empty()) {
        os << "\n[singular]\n";
        int i = 1;
        for (const auto& g : sys.singular) os << i++ << " = \"" << g.str() << "\"\n";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Candidate files
// ---------------------------------------------------------------------------

namespace {

SymTensor parse_tensor_section(const IniFile::Entries& entries, int dim, int rank,
                               const std::set<std::string>& names, const std::string& where) {
    SymTensor t(dim, rank);
    for (const auto& [k, v] : entries) {
        auto parts = split(k, ',');
        if (static_cast<int>(parts.size()) != rank)
            throw IoError(where + ": index \"" + k + "\" does not match rank " +
                          std::to_string(rank));
        std::vector<int> idx;
        for (const auto& p : parts) {
            int i = static_cast<int>(parse_number(p, "tensor index")) - 1;
            if (i < 0 || i >= dim) throw IoError(where + ": index out of range in \"" + k + "\"");
            idx.push_back(i);
        }
        std::vector<int> sorted = idx;
        std::sort(sorted.begin(), sorted.end());
        if (sorted != idx)
            throw IoError(where + ": indices must be sorted ascending in \"" + k + "\"");
        try {
            t.set(idx, parse_expr(v, names));
        } catch (const ParseError& e) {
            throw IoError(where + " \"" + k + "\": " + e.what());
        }
    }
    return t;
}

}  // namespace

CandidateFile parse_candidate(const std::string& text, const SystemDef& sys) {
    IniFile f = IniFile::parse_text(text);
    const auto* sec = f.find("candidate");
    if (!sec) throw IoError("missing [candidate] section");
    std::string kind;
    int m = 0, n = 0;
    std::string lambda_text;
    for (const auto& [k, v] : *sec) {
        if (k == "kind") kind = v;
        else if (k == "m") m = static_cast<int>(parse_number(v, "m"));
        else if (k == "n") n = static_cast<int>(parse_number(v, "n"));
        else if (k == "lambda") lambda_text = v;
        else throw IoError("unknown [candidate] key '" + k + "'");
    }
    if (kind != "poly" && kind != "exp")
        throw IoError("[candidate] kind must be \"poly\" or \"exp\"");
    if (m < 1) throw IoError("[candidate] m must be >= 1");

    std::set<std::string> names = sys.symbol_names(false, false);
    CandidateFile out;
    out.kind = kind;

    if (kind == "poly") {
        PolyTimeCandidate c;
        c.m = m;
        c.n = n;
        for (const auto& [sname, entries] : f.sections) {
            if (sname.rfind("tensor.", 0) != 0) continue;
            auto parts = split(sname.substr(7), '.');
            if (parts.size() != 2)
                throw IoError("poly candidate tensor sections are [tensor.N.r]: [" + sname + "]");
            int N = static_cast<int>(parse_number(parts[0], "tensor N"));
            int r = static_cast<int>(parse_number(parts[1], "tensor rank"));
            if (N < 0 || N > n) throw IoError("[" + sname + "]: N outside 0..n");
            if (r < 1 || r > m) throw IoError("[" + sname + "]: rank outside 1..m");
            c.set_tensor(N, r, parse_tensor_section(entries, sys.dim(), r, names, "[" + sname + "]"));
        }
        if (const auto* sc = f.find("scalar"))
            for (const auto& [k, v] : *sc) {
                try {
                    if (k == "G") c.G = parse_expr(v, names);
                    else if (k == "s0") c.s0 = parse_expr(v, names);
                    else if (k == "s1") c.s1 = parse_expr(v, names);
                    else throw IoError("unknown [scalar] key '" + k + "'");
                } catch (const ParseError& e) {
                    throw IoError(std::string("[scalar] ") + k + ": " + e.what());
                }
            }
        out.poly = std::move(c);
    } else {
        ExpTimeCandidate c;
        c.m = m;
        if (lambda_text.empty()) throw IoError("exp candidate requires lambda");
        try {
            c.lambda = parse_expr(lambda_text, names);
        } catch (const ParseError& e) {
            throw IoError(std::string("[candidate] lambda: ") + e.what());
        }
        for (const auto& [sname, entries] : f.sections) {
            if (sname.rfind("tensor.", 0) != 0) continue;
            auto parts = split(sname.substr(7), '.');
            int r = 0;
            if (parts.size() == 1) r = static_cast<int>(parse_number(parts[0], "tensor rank"));
            else if (parts.size() == 2) {
                if (static_cast<int>(parse_number(parts[0], "tensor N")) != 0)
                    throw IoError("exp candidates have no time index: [" + sname + "]");
                r = static_cast<int>(parse_number(parts[1], "tensor rank"));
            } else {
                throw IoError("bad tensor section [" + sname + "]");
            }
            if (r < 1 || r > m) throw IoError("[" + sname + "]: rank outside 1..m");
            c.set_tensor(r, parse_tensor_section(entries, sys.dim(), r, names, "[" + sname + "]"));
        }
        out.exponential = std::move(c);
    }
    return out;
}

CandidateFile load_candidate(const std::string& path, const SystemDef& sys) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_candidate(ss.str(), sys);
    } catch (const IoError& e) {
        throw IoError(path + ": " + e.what());
    }
}

std::string dump_tensor_literal(const SymTensor& t, const std::string& section) {
    std::ostringstream os;
    os << "[" << section << "]\n";
    for (const auto& idx : t.index_list()) {
        const Expr& e = t.at(idx);
        if (e.is_zero()) continue;
        os << "\"";
        for (std::size_t i = 0; i < idx.size(); ++i) os << (i ? "," : "") << idx[i] + 1;
        os << "\" = \"" << e.str() << "\"\n";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// JSON reports
// ---------------------------------------------------------------------------

namespace {

nlohmann::ordered_json witness_json(const std::optional<Witness>& w) {
    if (!w) return nullptr;
    nlohmann::ordered_json point = nlohmann::ordered_json::object();
    for (const auto& [k, v] : w->point) point[k] = v;
    return nlohmann::ordered_json{{"point", point}, {"value", w->value}};
}

}  // namespace

std::string report_to_json(const ConditionReport& report, const std::string& command,
                           std::uint64_t seed) {
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["command"] = command;
    j["seed"] = seed;
    j["overall"] = report.pass() ? "pass" : "fail";
    auto rows = nlohmann::ordered_json::array();
    for (const auto& r : report.rows) {
        nlohmann::ordered_json row;
        row["id"] = r.id;
        row["anchor"] = r.anchor;
        row["verdict"] = to_string(r.result.verdict);
        row["witness"] = witness_json(r.result.witness);
        row["max_ratio"] = r.result.max_ratio;
        row["samples"] = r.result.samples;
        if (!r.result.note.empty()) row["note"] = r.result.note;
        rows.push_back(std::move(row));
    }
    j["conditions"] = std::move(rows);
    return j.dump(2) + "\n";
}

std::string drift_report_to_json(const std::vector<DriftReportRow>& rows,
                                 const std::string& system, double t_end, double rtol,
                                 double atol, double tolerance, bool overall_pass) {
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["system"] = system;
    j["t_end"] = t_end;
    j["rtol"] = rtol;
    j["atol"] = atol;
    j["drift_tolerance"] = tolerance;
    j["overall"] = overall_pass ? "pass" : "fail";
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        arr.push_back(nlohmann::ordered_json{{"name", r.name},
                                             {"expected_conserved", r.expected_conserved},
                                             {"initial", r.drift.initial},
                                             {"max_abs_drift", r.drift.max_abs_drift},
                                             {"max_rel_drift", r.drift.max_rel_drift},
                                             {"within_tolerance", r.within_tolerance}});
    }
    j["fis"] = std::move(arr);
    return j.dump(2) + "\n";
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                          const std::vector<std::string>& coords,
                          const std::vector<std::string>& fi_names,
                          const std::vector<std::vector<double>>& fi_values) {
    os << "t";
    for (std::size_t i = 1; i <= coords.size(); ++i) os << ",q" << i;
    for (std::size_t i = 1; i <= coords.size(); ++i) os << ",v" << i;
    for (const auto& n : fi_names) os << ",I_" << n;
    os << "\n";
    os.precision(17);
    for (std::size_t s = 0; s < traj.samples.size(); ++s) {
        const State& st = traj.samples[s];
        os << st.t;
        for (double q : st.q) os << "," << q;
        for (double v : st.v) os << "," << v;
        for (const auto& vals : fi_values) os << "," << vals[s];
        os << "\n";
    }
}

ResolvedSystem resolve_system(const std::string& source,
                              const std::map<std::string, double>& params) {
    namespace fs = std::filesystem;
    auto try_path = [](const std::string& p) -> std::optional<std::string> {
        std::error_code ec;
        if (fs::exists(p, ec)) return p;
        return std::nullopt;
    };
    std::optional<std::string> path = try_path(source);
    if (!path) {
        if (const char* dir = std::getenv("FITK_CONFIG_DIR"))
            path = try_path((fs::path(dir) / source).string());
    }
    if (path) {
        SystemDef sys = load_system(*path);
        for (const auto& [k, v] : params) {
            sys.params[k] = v;
            sys.exact_params[k] = rational_from_double(v);
        }
        return {std::move(sys), std::nullopt};
    }
    auto known = list_catalog();
    if (std::find(known.begin(), known.end(), source) == known.end())
        throw IoError("'" + source + "' is neither a readable file nor a catalog entry");
    CatalogEntry e = instantiate(source, params);
    return {e.system, std::move(e)};
}

}  // namespace fitk
