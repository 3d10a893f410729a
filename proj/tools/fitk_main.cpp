#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fitk/parser.hpp"
#include "fitk/solver.hpp"
#include "fitk/sysio.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitVerificationFailure = 1;
constexpr int kExitInputError = 2;
constexpr int kExitNumericFailure = 3;

struct Common {
    std::string system;
    std::vector<std::string> params;
    std::uint64_t seed = 12345;
    int samples = 64;
    double tolerance = 1e-10;
    std::string out;
    std::string format = "json";
};

std::map<std::string, double> parse_params(const std::vector<std::string>& kvs) {
    std::map<std::string, double> out;
    for (const auto& kv : kvs) {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw fitk::IoError("--param expects name=value, got '" + kv + "'");
        out[kv.substr(0, eq)] = fitk::Rational::parse(kv.substr(eq + 1)).to_double();
    }
    return out;
}

void emit(const std::string& text, const std::string& out) {
    if (out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(out);
    if (!f) throw fitk::IoError("cannot write '" + out + "'");
    f << text;
}

fitk::CheckOptions check_opts(const Common& c) {
    fitk::CheckOptions o;
    o.seed = c.seed;
    o.samples = c.samples;
    o.tolerance = c.tolerance;
    return o;
}

fitk::State parse_ic(const std::string& text, int dim) {
    std::vector<double> vals;
    std::string cur;
    for (char ch : text + ",") {
        if (ch == ',') {
            if (!cur.empty()) vals.push_back(std::stod(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    if (static_cast<int>(vals.size()) != 2 * dim)
        throw fitk::IoError("--ic needs " + std::to_string(2 * dim) +
                            " comma-separated numbers (q then v)");
    fitk::State s;
    s.q.assign(vals.begin(), vals.begin() + dim);
    s.v.assign(vals.begin() + dim, vals.end());
    return s;
}

int run_check_conditions(const Common& c, const std::string& candidate_path) {
    auto rs = fitk::resolve_system(c.system, parse_params(c.params));
    fitk::CandidateFile cand = fitk::load_candidate(candidate_path, rs.system);
    fitk::ConditionReport rep;
    if (cand.kind == "poly")
        rep = fitk::check_integral1(*cand.poly, rs.system, check_opts(c));
    else
        rep = fitk::check_integral2(*cand.exponential, rs.system, check_opts(c));
    emit(fitk::report_to_json(rep, "check-conditions", c.seed), c.out);
    return rep.pass() ? kExitPass : kExitVerificationFailure;
}

int run_verify_fi(const Common& c, const std::string& candidate_path,
                  const std::vector<std::string>& fi_args, const std::string& ic_text,
                  double t_end_opt, double rtol, double atol, double drift_tol) {
    auto rs = fitk::resolve_system(c.system, parse_params(c.params));
    const fitk::SystemDef& sys = rs.system;

    struct Item {
        std::string name;
        fitk::StateFn eval;
        bool expected = true;
    };
    std::vector<Item> items;
    if (rs.entry)
        for (const auto& fi : rs.entry->fis)
            items.push_back({fi.name, fi.evaluator, fi.expected_conserved});
    if (!candidate_path.empty()) {
        fitk::CandidateFile cand = fitk::load_candidate(candidate_path, sys);
        fitk::Expr built = cand.kind == "poly" ? fitk::build_integral1(*cand.poly, sys)
                                               : fitk::build_integral2(*cand.exponential, sys);
        items.push_back({"candidate", fitk::compile_fi(built, sys), true});
    }
    for (const auto& spec : fi_args) {
        auto eq = spec.find('=');
        std::string name = eq == std::string::npos ? "fi" + std::to_string(items.size())
                                                   : spec.substr(0, eq);
        std::string text = eq == std::string::npos ? spec : spec.substr(eq + 1);
        fitk::Expr e = fitk::parse_expr(text, sys.symbol_names(true, true));
        items.push_back({name, fitk::compile_fi(e, sys), true});
    }
    if (items.empty()) throw fitk::IoError("verify-fi: no first integrals to monitor");

    fitk::State ic = rs.entry ? rs.entry->reference_ic : fitk::State{};
    if (!ic_text.empty()) ic = parse_ic(ic_text, sys.dim());
    if (ic.q.empty()) throw fitk::IoError("verify-fi: --ic required for file-based systems");
    double t_end = t_end_opt > 0 ? t_end_opt : (rs.entry ? rs.entry->t_end : 5.0);

    fitk::IntegratorOptions opts;
    opts.rtol = rtol;
    opts.atol = atol;
    fitk::Trajectory traj = rs.entry ? rs.entry->run(ic, t_end, opts)
                                     : fitk::integrate(sys, ic, t_end, opts);
    if (traj.singular_stop && traj.samples.back().t < ic.t + 0.1 * (t_end - ic.t))
        throw fitk::IntegrationError("trajectory hit a singular locus before 10% of t_end");

    std::vector<fitk::DriftReportRow> rows;
    std::vector<std::vector<double>> fi_values;
    std::vector<std::string> fi_names;
    bool pass = true;
    for (const auto& item : items) {
        fitk::DriftReportRow row;
        row.name = item.name;
        row.expected_conserved = item.expected;
        row.drift = fitk::monitor_fi(traj, item.eval);
        row.within_tolerance = row.drift.max_rel_drift <= drift_tol;
        if (item.expected && !row.within_tolerance) pass = false;
        fi_names.push_back(item.name);
        fi_values.push_back(row.drift.values);
        rows.push_back(std::move(row));
    }

    std::string summary =
        fitk::drift_report_to_json(rows, sys.name, t_end, rtol, atol, drift_tol, pass);
    if (c.out.empty()) {
        if (c.format == "csv")
            fitk::write_trajectory_csv(std::cout, traj, sys.coords, fi_names, fi_values);
        else
            std::cout << summary;
    } else {
        emit(summary, c.out);
        std::ofstream f(c.out + ".csv");
        fitk::write_trajectory_csv(f, traj, sys.coords, fi_names, fi_values);
    }
    return pass ? kExitPass : kExitVerificationFailure;
}

int run_classify(const Common& c) {
    auto rs = fitk::resolve_system(c.system, parse_params(c.params));
    fitk::SampleDomain dom = rs.system.sample_domain(false, false, c.seed);
    dom.samples = c.samples;
    dom.tolerance = c.tolerance;
    fitk::Classify2DResult r = fitk::classify_2d(rs.system.conn, dom);
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["system"] = rs.system.name;
    switch (r.cls) {
        case fitk::GeometryClass::Riemannian: j["class"] = "Riemannian"; break;
        case fitk::GeometryClass::NonRiemannian: j["class"] = "NonRiemannian"; break;
        case fitk::GeometryClass::Indeterminate: j["class"] = "Indeterminate"; break;
    }
    if (r.cls == fitk::GeometryClass::Riemannian) {
        j["case"] = r.case_id;
        if (r.metric) {
            nlohmann::ordered_json m;
            for (const auto& idx : r.metric->g.index_list()) {
                if (r.metric->g.at(idx).is_zero()) continue;
                m[std::to_string(idx[0] + 1) + "," + std::to_string(idx[1] + 1)] =
                    r.metric->g.at(idx).str();
            }
            j["metric"] = m;
            j["det"] = r.metric->det.str();
        }
    }
    if (r.witness) {
        nlohmann::ordered_json point = nlohmann::ordered_json::object();
        for (const auto& [k, v] : r.witness->point) point[k] = v;
        j["witness"] = {{"point", point}, {"value", r.witness->value}};
    }
    j["note"] = r.note;
    emit(j.dump(2) + "\n", c.out);
    return r.cls == fitk::GeometryClass::Indeterminate ? kExitNumericFailure : kExitPass;
}

int run_find_kt(const Common& c, int order, int degree, bool reducible) {
    auto rs = fitk::resolve_system(c.system, parse_params(c.params));
    std::ostringstream os;
    if (reducible) {
        auto basis = fitk::find_reducible_kt_generators(rs.system.conn, rs.system.exact_params,
                                                        degree);
        if (basis.empty()) {
            os << "# empty basis: no reducible generator beyond exact Killing vectors\n";
        } else {
            for (std::size_t i = 0; i < basis.size(); ++i) {
                fitk::SymTensor t(rs.system.dim(), 1);
                for (int a = 0; a < rs.system.dim(); ++a)
                    t.set({a}, basis[i][static_cast<std::size_t>(a)]);
                os << fitk::dump_tensor_literal(t, "generator." + std::to_string(i)) << "\n";
            }
        }
    } else {
        auto basis = fitk::find_generalized_kts(rs.system.conn, rs.system.exact_params,
                                                {order, degree});
        if (basis.empty()) {
            os << "# empty basis: no generalized Killing tensor of order "
               << order << " and degree <= " << degree << "\n";
        } else {
            for (std::size_t i = 0; i < basis.size(); ++i)
                os << fitk::dump_tensor_literal(basis[i], "kt." + std::to_string(i)) << "\n";
        }
    }
    emit(os.str(), c.out);
    return kExitPass;
}

int run_curvature(const Common& c) {
    auto rs = fitk::resolve_system(c.system, parse_params(c.params));
    fitk::CurvatureField R(rs.system.conn);
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["system"] = rs.system.name;
    auto comps = nlohmann::ordered_json::object();
    bool any = false;
    const int D = rs.system.dim();
    for (int a = 0; a < D; ++a)
        for (int b = 0; b < D; ++b)
            for (int cc = 0; cc < D; ++cc)
                for (int d = 0; d < D; ++d) {
                    fitk::Expr e = fitk::simplify(R.at(a, b, cc, d));
                    if (e.is_zero()) continue;
                    any = true;
                    std::string key = std::to_string(a + 1) + ";" + std::to_string(b + 1) +
                                      std::to_string(cc + 1) + std::to_string(d + 1);
                    comps[key] = e.str();
                }
    j["nonzero_components"] = comps;
    j["flat"] = !any;
    emit(j.dump(2) + "\n", c.out);
    if (c.format != "json")
        std::cout << (any ? "curvature has nonzero components\n" : "all components zero\n");
    return kExitPass;
}

int run_simulate(const Common& c, const std::string& ic_text, double t_end, double rtol,
                 double atol, const std::string& method, double h) {
    auto rs = fitk::resolve_system(c.system, parse_params(c.params));
    fitk::State ic = rs.entry ? rs.entry->reference_ic : fitk::State{};
    if (!ic_text.empty()) ic = parse_ic(ic_text, rs.system.dim());
    if (ic.q.empty()) throw fitk::IoError("simulate: --ic required for file-based systems");
    double tend = t_end > 0 ? t_end : (rs.entry ? rs.entry->t_end : 5.0);
    fitk::IntegratorOptions opts;
    opts.rtol = rtol;
    opts.atol = atol;
    opts.fixed_step = h;
    opts.method = method == "rk4" ? fitk::IntegratorOptions::Method::RK4
                                  : fitk::IntegratorOptions::Method::RK45;
    fitk::Trajectory traj = rs.entry ? rs.entry->run(ic, tend, opts)
                                     : fitk::integrate(rs.system, ic, tend, opts);
    std::ostringstream os;
    fitk::write_trajectory_csv(os, traj, rs.system.coords, {}, {});
    emit(os.str(), c.out);
    if (traj.singular_stop) std::cerr << traj.note << "\n";
    return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"first-integral toolkit: verify conservation structures of "
                 "connection-based dynamical systems"};
    app.require_subcommand(1);

    Common c;
    std::string candidate, ic_text, method = "rk45";
    std::vector<std::string> fi_args;
    double t_end = -1, rtol = 1e-10, atol = 1e-12, drift_tol = 1e-8, fixed_h = 1e-3;
    int order = 1, degree = 2;
    bool reducible = false;

    auto add_common = [&](CLI::App* sub, bool with_system = true) {
        if (with_system)
            sub->add_option("--system", c.system, "catalog entry name or system file")
                ->required();
        sub->add_option("--param", c.params, "parameter binding name=value (repeatable)");
        sub->add_option("--seed", c.seed, "sampling seed");
        sub->add_option("--samples", c.samples, "sample count for zero tests");
        sub->add_option("--tol", c.tolerance, "zero-test threshold");
        sub->add_option("--out", c.out, "output path (stdout when omitted)");
        sub->add_option("--format", c.format, "json|csv");
    };

    auto* list_cmd = app.add_subcommand("list", "list built-in systems");
    auto* show_cmd = app.add_subcommand("show", "dump a system in file form");
    add_common(show_cmd);
    auto* check_cmd = app.add_subcommand("check-conditions",
                                         "run the integral-family condition checker");
    add_common(check_cmd);
    check_cmd->add_option("--candidate", candidate, "candidate file")->required();
    auto* verify_cmd = app.add_subcommand("verify-fi", "integrate and measure drift");
    add_common(verify_cmd);
    verify_cmd->add_option("--candidate", candidate, "candidate file to build and monitor");
    verify_cmd->add_option("--fi", fi_args, "extra integral name=expr (repeatable)");
    verify_cmd->add_option("--ic", ic_text, "initial conditions q1..qD,v1..vD");
    verify_cmd->add_option("--t-end", t_end, "integration end time");
    verify_cmd->add_option("--rtol", rtol, "relative tolerance");
    verify_cmd->add_option("--atol", atol, "absolute tolerance");
    verify_cmd->add_option("--drift-tol", drift_tol, "max relative drift accepted");
    auto* classify_cmd = app.add_subcommand("classify", "2d Riemannian/non-Riemannian test");
    add_common(classify_cmd);
    auto* findkt_cmd = app.add_subcommand("find-kt", "polynomial Killing tensor search");
    add_common(findkt_cmd);
    findkt_cmd->add_option("--order", order, "tensor order m");
    findkt_cmd->add_option("--degree", degree, "max polynomial degree");
    findkt_cmd->add_flag("--reducible", reducible, "search generators of reducible KTs");
    auto* curv_cmd = app.add_subcommand("curvature", "curvature tensor components");
    add_common(curv_cmd);
    auto* sim_cmd = app.add_subcommand("simulate", "integrate and write CSV");
    add_common(sim_cmd);
    sim_cmd->add_option("--ic", ic_text, "initial conditions q1..qD,v1..vD");
    sim_cmd->add_option("--t-end", t_end, "integration end time");
    sim_cmd->add_option("--rtol", rtol, "relative tolerance");
    sim_cmd->add_option("--atol", atol, "absolute tolerance");
    sim_cmd->add_option("--method", method, "rk45|rk4");
    sim_cmd->add_option("--step", fixed_h, "fixed step for rk4");

    CLI11_PARSE(app, argc, argv);

    try {
        if (list_cmd->parsed()) {
            for (const auto& n : fitk::list_catalog()) std::cout << n << "\n";
            return kExitPass;
        }
        if (show_cmd->parsed()) {
            auto rs = fitk::resolve_system(c.system, parse_params(c.params));
            emit(fitk::dump_system(rs.system), c.out);
            return kExitPass;
        }
        if (check_cmd->parsed()) return run_check_conditions(c, candidate);
        if (verify_cmd->parsed())
            return run_verify_fi(c, candidate, fi_args, ic_text, t_end, rtol, atol, drift_tol);
        if (classify_cmd->parsed()) return run_classify(c);
        if (findkt_cmd->parsed()) return run_find_kt(c, order, degree, reducible);
        if (curv_cmd->parsed()) return run_curvature(c);
        if (sim_cmd->parsed())
            return run_simulate(c, ic_text, t_end, rtol, atol, method, fixed_h);
    } catch (const fitk::IoError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const fitk::ParseError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const std::length_error& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const std::exception& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumericFailure;
    }
    return kExitInputError;
}
