// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Every tolerance is pinned here, not configurable.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "fitk/catalog.hpp"
#include "fitk/parser.hpp"
#include "fitk/solver.hpp"
#include "fitk/sysio.hpp"

using namespace fitk;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& what, bool ok, const std::string& detail = "") {
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << criterion << ": " << what;
    if (!detail.empty()) std::cout << " [" << detail << "]";
    std::cout << std::endl;
    if (!ok) ++g_failures;
}

struct CliResult {
    int code;
    std::string out;
};

CliResult run_cli(const std::string& args) {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "fitk_acceptance";
    fs::create_directories(dir);
    fs::path out = dir / "stdout.txt";
    std::string cmd = std::string(FITK_CLI_PATH) + " " + args + " > " + out.string() + " 2>&1";
    int rc = std::system(cmd.c_str());
    std::ifstream f(out);
    std::stringstream ss;
    ss << f.rdbuf();
    return {rc == -1 ? -1 : WEXITSTATUS(rc), ss.str()};
}

double drift_of(const CatalogEntry& e, const CatalogFI& fi, const Trajectory& traj) {
    (void)e;
    return monitor_fi(traj, fi.evaluator).max_rel_drift;
}

// ---------------------------------------------------------------------------

// Drift criteria are evaluated with the verify-fi contract: a trajectory that
// reaches a declared singular locus is valid past 10% of the requested span,
// and drift is measured over the samples that exist.
struct DriftOutcome {
    bool pass;
    std::string detail;
};

std::string sci(double v) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

DriftOutcome drift_criterion(const CatalogEntry& e, const CatalogFI& fi, const State& ic,
                             double t_end, double tol) {
    IntegratorOptions opts;
    opts.rtol = 1e-10;
    opts.atol = 1e-12;
    Trajectory traj = e.run(ic, t_end, opts);
    double reached = traj.samples.back().t;
    std::ostringstream os;
    if (traj.singular_stop && reached < ic.t + 0.1 * (t_end - ic.t)) {
        DriftSeries d = monitor_fi(traj, fi.evaluator);
        os << "trajectory reaches a singular locus at t = " << reached
           << " (before 10% of the requested span); drift up to termination "
           << sci(d.max_rel_drift);
        return {false, os.str()};
    }
    DriftSeries d = monitor_fi(traj, fi.evaluator);
    os << "max rel drift " << sci(d.max_rel_drift) << " over t in [0, " << reached << "]";
    if (traj.singular_stop) os << " (singular stop; " << traj.note << ")";
    return {d.max_rel_drift <= tol, os.str()};
}

void criterion1_coupled_oscillator_lfi() {
    CatalogEntry e = instantiate("coupled-oscillators-nr", {{"k", 2.0}, {"p", 1.0}});
    State ic{0.0, {1.0, 0.5}, {0.1, -0.2}};
    IntegratorOptions opts;
    opts.rtol = 1e-10;
    opts.atol = 1e-12;
    Trajectory traj = e.run(ic, 10.0, opts);
    double reached = traj.samples.back().t;
    DriftSeries d = monitor_fi(traj, e.fis[0].evaluator);
    report(1, "linear integral conserved along the realized trajectory (drift <= 1e-8)",
           d.max_rel_drift <= 1e-8,
           "max rel drift " + sci(d.max_rel_drift) + " over t in [0, " + std::to_string(reached) +
               "]");
    // The damped flow from these data meets the k*y + p*x = 0 locus, where the
    // conserved contraction itself forces x_dot to diverge; the orbit is not
    // extensible to t = 10 and the stop lands before 10% of the span.
    report(1, "requested span t in [0, 10] realized", !traj.singular_stop && reached >= 10.0,
           traj.singular_stop ? "flow terminates at the k*y+p*x = 0 locus at t = " +
                                    std::to_string(reached) + "; " + traj.note
                              : "");
    ZeroResult oracle = total_derivative_oracle(e.fis[0].expression, e.system);
    report(1, "coupled-oscillator total-derivative oracle identically zero", oracle.pass(),
           to_string(oracle.verdict));
}

void criterion2_beta_qfi() {
    CatalogEntry e = instantiate("beta-system", {{"beta", 0.5}});
    State ic{0.0, {1.0, 0.1}, {0.3, -0.2}};
    // u(t) falls into the u = 0 locus near t = 1.154 (the 1/u^2 force is
    // attractive); past 10% of the span that is a flagged stop, not an error.
    DriftOutcome out = drift_criterion(e, e.fis[0], ic, 5.0, 1e-8);
    report(2, "quadratic integral drift <= 1e-8", out.pass, out.detail);

    ConditionReport rep = check_integral1(*e.fis[0].poly, e.system);
    bool all = rep.pass();
    std::string detail = std::to_string(rep.rows.size()) + " rows";
    if (!all && rep.first_failure()) detail += ", first failure " + rep.first_failure()->id;
    report(2, "condition checker passes every integral-family row", all, detail);
}

void criterion3_beta_geometry() {
    CatalogEntry e = instantiate("beta-system", {{"beta", 0.5}});
    SampleDomain dom = e.system.sample_domain();
    CurvatureField R(e.system.conn);
    bool curvature_ok = true;
    for (const auto& ident : e.curvature_identities) {
        auto z = is_identically_zero(R.at(ident.a, ident.b, ident.c, ident.d) - ident.expected,
                                     dom);
        if (z.verdict != ZeroVerdict::ExactZero) curvature_ok = false;
    }
    report(3, "curvature components match the displayed families exactly", curvature_ok);

    auto kvs = find_generalized_kts(e.system.conn, e.system.exact_params, {1, 4});
    report(3, "no polynomial Killing vectors up to degree 4", kvs.empty(),
           std::to_string(kvs.size()) + " found");

    auto gens = find_reducible_kt_generators(e.system.conn, e.system.exact_params, 4);
    report(3, "no reducible Killing-tensor generators up to degree 4", gens.empty(),
           std::to_string(gens.size()) + " found");

    bool kt_exact = true;
    SymTensor resid = sym_cov_derivative(e.symmetries[0].tensor, e.system.conn);
    for (const auto& idx : resid.index_list()) {
        auto z = is_identically_zero(resid.at(idx), dom);
        if (z.verdict != ZeroVerdict::ExactZero) kt_exact = false;
    }
    report(3, "exponential Killing tensor has exactly zero residual", kt_exact);
}

void criterion4_evans() {
    CatalogEntry e = instantiate("evans-e3",
                                 {{"lambda", 1.0}, {"k", 0.3}, {"c1", 0.2}, {"c2", 0.5}});
    CheckOptions opts;  // 64 samples, threshold 1e-10 scaled
    bool oracle_ok = true;
    std::string oracle_detail;
    for (const auto& fi : e.fis) {
        ZeroResult z = total_derivative_oracle(fi.expression, e.system, opts);
        if (!z.pass()) {
            oracle_ok = false;
            oracle_detail += fi.name + " nonzero; ";
        }
    }
    report(4, "all five integrals give identically-zero oracle residuals", oracle_ok,
           oracle_detail);

    IntegratorOptions iopts;
    iopts.rtol = 1e-10;
    iopts.atol = 1e-12;
    Trajectory traj = e.run_reference(&iopts);
    bool autonomous_ok = true, exp_ok = true;
    std::string detail;
    for (const auto& fi : e.fis) {
        double d = drift_of(e, fi, traj);
        detail += fi.name + "=" + sci(d) + " ";
        bool ok = d <= 1e-8;
        if (fi.kind == "poly" && !ok) autonomous_ok = false;
        if (fi.kind == "exp" && !ok) exp_ok = false;
        if (fi.name == "I4")
            std::cout << "  note: I4 verdict recorded: drift " << d
                      << (ok ? " (conserved)" : " (NOT conserved)") << std::endl;
    }
    report(4, "autonomous integral drift <= 1e-8 (I1, I2, I3)",
           autonomous_ok && !traj.singular_stop, detail);
    report(4, "exponential integral drift <= 1e-8 including the e^(lambda t) factor (I4, I5)",
           exp_ok, "");
}

void criterion5_gravel() {
    {
        CatalogEntry e = instantiate("gravel-cubic", {{"c1", 1.0}});
        IntegratorOptions opts;
        opts.rtol = 1e-10;
        opts.atol = 1e-12;
        Trajectory traj = e.run(e.reference_ic, 5.0, opts);
        double d = drift_of(e, e.fis[2], traj);
        report(5, "cubic integral drift <= 1e-6 on the polynomial branch",
               !traj.singular_stop && d <= 1e-6, "drift " + sci(d));
    }
    {
        CatalogEntry e = instantiate("gravel-cubic", {{"c1", 1.0}, {"k1", 0.01}});
        IntegratorOptions opts;
        opts.rtol = 1e-10;
        opts.atol = 1e-12;
        bool ok = true;
        std::string detail;
        try {
            Trajectory traj = e.run(e.reference_ic, 5.0, opts);
            double d = drift_of(e, e.fis[2], traj);
            ok = !traj.singular_stop && d <= 1e-5;
            detail = "drift " + sci(d);
        } catch (const std::exception& err) {
            ok = false;
            detail = err.what();
        }
        report(5, "branch continuation with k1 = 0.01 keeps drift <= 1e-5", ok, detail);
    }
}

void criterion6_classification() {
    CatalogEntry osc = instantiate("coupled-oscillators-nr", {{"k", 2.0}, {"p", 1.0}});
    SampleDomain dom = osc.system.sample_domain();
    Classify2DResult r1 = classify_2d(osc.system.conn, dom);
    report(6, "damped-oscillator connection classified non-Riemannian",
           r1.cls == GeometryClass::NonRiemannian && r1.witness.has_value());

    Connection logpair(2, {"x", "y"});
    std::set<std::string> names{"x", "y"};
    logpair.set_gamma(0, 0, 0, parse_expr("1/x", names));
    logpair.set_gamma(1, 1, 1, parse_expr("1/y", names));
    SampleDomain sq;
    sq.boxes = {{"x", {0.5, 1.5}}, {"y", {0.5, 1.5}}};
    Classify2DResult r2 = classify_2d(logpair, sq);
    bool ok = r2.cls == GeometryClass::Riemannian && r2.case_id == 1 && r2.metric.has_value();
    if (ok)
        for (const auto& res : metricity_residual(logpair, r2.metric->g))
            for (const auto& idx : res.index_list())
                if (is_identically_zero(res.at(idx), sq).verdict != ZeroVerdict::ExactZero)
                    ok = false;
    report(6, "log-derivative pair is Riemannian case 1 with exact metricity", ok);
}

void criterion7_solver_dimensions() {
    Connection flat = Connection::zero(2, {"x", "y"});
    auto kvs = find_generalized_kts(flat, {}, {1, 1});
    report(7, "flat-plane Killing vector basis has dimension 3", kvs.size() == 3,
           std::to_string(kvs.size()));
    auto kts = find_generalized_kts(flat, {}, {2, 2});
    report(7, "flat-plane order-2 Killing tensor basis has dimension 6", kts.size() == 6,
           std::to_string(kts.size()));
    LinearSystem s1 = build_kt_system(flat, {}, {1, 1});
    LinearSystem s2 = build_kt_system(flat, {}, {2, 2});
    bool ranks = exact_rank(s1) == float_svd_rank(s1, 1e-8) &&
                 exact_rank(s2) == float_svd_rank(s2, 1e-8);
    report(7, "exact elimination rank agrees with floating SVD rank", ranks);
}

// -- criterion 8 machinery ---------------------------------------------------

SystemDef flat_system(std::vector<Expr> forces, const std::string& name) {
    SystemDef sys({"x", "y"}, Connection::zero(2, {"x", "y"}));
    sys.name = name;
    sys.forces = std::move(forces);
    sys.domain = {{"x", {0.5, 1.5}}, {"y", {0.5, 1.5}}};
    return sys;
}

// candidate sum with rational weights; rows are jointly linear in the data
PolyTimeCandidate combine(const std::vector<std::pair<Rational, PolyTimeCandidate>>& terms,
                          int m, int n, int dim) {
    PolyTimeCandidate out;
    out.m = m;
    out.n = n;
    Expr G = Expr::number(0ll), s0 = Expr::number(0ll), s1 = Expr::number(0ll);
    for (const auto& [w, c] : terms) {
        Expr we = Expr::number(w);
        for (int N = 0; N <= c.n; ++N)
            for (int r = 1; r <= c.m; ++r) {
                if (!c.stored_nonzero(N, r)) continue;
                SymTensor t = c.tensor(N, r, dim).scaled(we).map(
                    [](const Expr& e) { return simplify(e); });
                SymTensor prev = out.tensor(N, r, dim);
                out.set_tensor(N, r, prev + t);
            }
        G = G + we * c.G;
        s0 = s0 + we * c.s0;
        s1 = s1 + we * c.s1;
    }
    out.G = simplify(G);
    out.s0 = simplify(s0);
    out.s1 = simplify(s1);
    return out;
}

std::vector<PolyTimeCandidate> free_particle_pool() {
    std::vector<PolyTimeCandidate> pool;
    auto vec = [](const char* a, const char* b) {
        SymTensor t(2, 1);
        std::set<std::string> names{"x", "y"};
        t.set({0}, parse_expr(a, names));
        t.set({1}, parse_expr(b, names));
        return t;
    };
    {   // t x_dot - x
        PolyTimeCandidate c;
        c.m = 1;
        c.n = 1;
        c.set_tensor(1, 1, vec("1", "0"));
        c.G = -Expr::symbol("x");
        pool.push_back(c);
    }
    {   // t y_dot - y
        PolyTimeCandidate c;
        c.m = 1;
        c.n = 1;
        c.set_tensor(1, 1, vec("0", "1"));
        c.G = -Expr::symbol("y");
        pool.push_back(c);
    }
    {   // angular momentum
        PolyTimeCandidate c;
        c.m = 1;
        c.n = 0;
        c.set_tensor(0, 1, vec("-y", "x"));
        pool.push_back(c);
    }
    {   // (t x_dot - x)(t y_dot - y)
        PolyTimeCandidate c;
        c.m = 2;
        c.n = 2;
        SymTensor L2(2, 2);
        L2.set({0, 1}, Expr::number(Rational(1, 2)));
        c.set_tensor(2, 2, L2);
        c.set_tensor(1, 1, vec("-y", "-x"));
        c.G = Expr::symbol("x") * Expr::symbol("y");
        pool.push_back(c);
    }
    {   // (t x_dot - x) y_dot
        PolyTimeCandidate c;
        c.m = 2;
        c.n = 1;
        SymTensor L2(2, 2);
        L2.set({0, 1}, Expr::number(Rational(1, 2)));
        c.set_tensor(1, 2, L2);
        c.set_tensor(0, 1, vec("0", "-x"));
        pool.push_back(c);
    }
    {   // kinetic energy
        PolyTimeCandidate c;
        c.m = 2;
        c.n = 0;
        SymTensor L2(2, 2);
        L2.set({0, 0}, Expr::number(Rational(1, 2)));
        L2.set({1, 1}, Expr::number(Rational(1, 2)));
        c.set_tensor(0, 2, L2);
        pool.push_back(c);
    }
    return pool;
}

std::vector<PolyTimeCandidate> harmonic_pool() {
    std::vector<PolyTimeCandidate> pool;
    std::set<std::string> names{"x", "y"};
    auto quad = [&](const char* xx, const char* xy, const char* yy, const char* g) {
        PolyTimeCandidate c;
        c.m = 2;
        c.n = 0;
        SymTensor L2(2, 2);
        L2.set({0, 0}, parse_expr(xx, names));
        L2.set({0, 1}, parse_expr(xy, names));
        L2.set({1, 1}, parse_expr(yy, names));
        c.set_tensor(0, 2, L2);
        c.G = parse_expr(g, names);
        return c;
    };
    pool.push_back(quad("1/2", "0", "0", "x^2/2"));      // x-sector energy
    pool.push_back(quad("0", "0", "1/2", "y^2/2"));      // y-sector energy
    pool.push_back(quad("0", "1/2", "0", "x*y"));        // correlation integral
    {   // angular momentum embedded at order 2
        PolyTimeCandidate c;
        c.m = 2;
        c.n = 0;
        SymTensor L1(2, 1);
        L1.set({0}, parse_expr("-y", names));
        L1.set({1}, parse_expr("x", names));
        c.set_tensor(0, 1, L1);
        pool.push_back(c);
    }
    return pool;
}

void criterion8_theorem_structure() {
    SystemDef fp = flat_system({Expr::number(0ll), Expr::number(0ll)}, "free");
    SystemDef ho = flat_system({Expr::symbol("x"), Expr::symbol("y")}, "harmonic");
    std::mt19937 rng(20260808);
    std::uniform_int_distribution<int> w(-4, 4);

    bool embed_ok = true, split_ok = true;
    std::string detail;
    for (int trial = 0; trial < 20; ++trial) {
        const bool use_free = trial % 2 == 0;
        const SystemDef& sys = use_free ? fp : ho;
        auto pool = use_free ? free_particle_pool() : harmonic_pool();
        std::vector<std::pair<Rational, PolyTimeCandidate>> picks;
        for (const auto& c : pool) {
            int wi = w(rng);
            if (wi) picks.push_back({Rational(wi, 3), c});
        }
        if (picks.empty()) picks.push_back({Rational(1), pool[0]});
        int n = use_free ? 2 : 0;
        PolyTimeCandidate combo = combine(picks, 2, n, 2);
        if (!check_integral1(combo, sys).pass() ||
            !total_derivative_oracle(build_integral1(combo, sys), sys).pass()) {
            embed_ok = false;
            detail = "trial " + std::to_string(trial) + ": combination failed its own check";
            break;
        }
        // order padding: m -> m+1 with zero top-rank tensors
        PolyTimeCandidate up = combo;
        up.m = 3;
        if (!check_integral1(up, sys).pass()) {
            embed_ok = false;
            detail = "trial " + std::to_string(trial) + ": order padding failed";
            break;
        }
        // degree padding: n -> n+1 with zero new tensors, s-constants shifted
        PolyTimeCandidate deeper = combo;
        deeper.n = combo.n + 1;
        deeper.s1 = combo.s0;
        deeper.s0 = Expr::number(0ll);
        if (!check_integral1(deeper, sys).pass()) {
            embed_ok = false;
            detail = "trial " + std::to_string(trial) + ": degree padding failed";
            break;
        }
        auto [h1, h2] = split_parity(combo);
        if (!check_integral1(h1, sys).pass() || !check_integral1(h2, sys).pass()) {
            split_ok = false;
            detail = "trial " + std::to_string(trial) + ": a split half failed";
            break;
        }
    }
    report(8, "recursion embeddings hold on 20 randomized passing candidates", embed_ok, detail);
    report(8, "parity-split halves pass independently whenever the parent passes", split_ok);

    // absorption produces complete forms
    bool absorb_ok = true;
    {
        PolyTimeCandidate c;
        c.m = 2;
        c.n = 0;
        SymTensor L1(2, 1);
        L1.set({0}, Expr::symbol("x"));
        L1.set({1}, Expr::number(2ll) * Expr::symbol("y"));
        c.set_tensor(0, 1, L1);
        PolyTimeCandidate out = absorb_lower_order(c, fp);
        absorb_ok = absorb_ok && out.n == 1 && check_complete_form(out, 2, fp).pass() &&
                    total_derivative_oracle(build_integral1(out, fp), fp).pass();
    }
    {
        PolyTimeCandidate c;
        c.m = 3;
        c.n = 0;
        SymTensor L2(2, 2);
        L2.set({0, 0}, Expr::symbol("x"));
        L2.set({0, 1}, Expr::symbol("y"));
        c.set_tensor(0, 2, L2);
        PolyTimeCandidate out = absorb_lower_order(c, fp);
        absorb_ok = absorb_ok && check_complete_form(out, 1, fp).pass() &&
                    total_derivative_oracle(build_integral1(out, fp), fp).pass();
    }
    report(8, "absorbed candidates pass the complete-form condition set", absorb_ok);
}

void criterion9_negative_controls() {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "fitk_acceptance";
    fs::create_directories(dir);
    fs::path harmonic = dir / "harmonic.sys";
    {
        std::ofstream f(harmonic);
        f << "[system]\nname = harmonic\ndim = 2\ncoords = x, y\n\n"
             "[forces]\n\"1\" = \"x\"\n\"2\" = \"y\"\n\n"
             "[domain]\nx = 0.5, 1.5\ny = 0.5, 1.5\n";
    }
    CliResult r1 = run_cli("verify-fi --system " + harmonic.string() +
                           " --fi control=x_dot --ic 1,0,0,1 --t-end 6");
    report(9, "velocity component flagged non-conserved with exit code 1", r1.code == 1);

    fs::path cand = dir / "identity.cand";
    {
        std::ofstream f(cand);
        f << "[candidate]\nkind = poly\nm = 2\nn = 0\n\n"
             "[tensor.0.2]\n\"1,1\" = \"1\"\n\"2,2\" = \"1\"\n";
    }
    CliResult r2 = run_cli("check-conditions --system beta-system --candidate " + cand.string());
    bool has_witness = r2.out.find("\"verdict\": \"nonzero\"") != std::string::npos &&
                       r2.out.find("\"point\"") != std::string::npos;
    report(9, "identity tensor fails the Killing-tensor row with a witness and exit code 1",
           r2.code == 1 && has_witness);
}

}  // namespace

int main() {
    std::cout << "== acceptance suite ==" << std::endl;
    try {
        criterion1_coupled_oscillator_lfi();
        criterion2_beta_qfi();
        criterion3_beta_geometry();
        criterion4_evans();
        criterion5_gravel();
        criterion6_classification();
        criterion7_solver_dimensions();
        criterion8_theorem_structure();
        criterion9_negative_controls();
    } catch (const std::exception& e) {
        std::cout << "FAIL unexpected exception: " << e.what() << std::endl;
        ++g_failures;
    }
    std::cout << (g_failures == 0 ? "ALL CRITERIA PASSED" : "FAILURES: ") << (g_failures == 0 ? "" : std::to_string(g_failures))
              << std::endl;
    return g_failures == 0 ? 0 : 1;
}
