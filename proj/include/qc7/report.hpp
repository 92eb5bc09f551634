#pragma once

// Run configuration, command implementations and report rendering. JSON is
// the canonical document; markdown and CSV are rendered from it so every
// format carries the same numbers.

#include <chrono>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qc7/algebra_suite.hpp"
#include "qc7/models.hpp"
#include "qc7/scalarops.hpp"
#include "qc7/spectral.hpp"

namespace qc7 {

using Json = nlohmann::ordered_json;

enum class OutputFormat { json, csv, markdown };

inline OutputFormat parse_format(const std::string& s) {
    if (s == "json") return OutputFormat::json;
    if (s == "csv") return OutputFormat::csv;
    if (s == "markdown" || s == "md") return OutputFormat::markdown;
    throw config_error("unknown output format: " + s + " (expected json, csv or markdown)");
}

inline std::string format_name(OutputFormat f) {
    switch (f) {
        case OutputFormat::json: return "json";
        case OutputFormat::csv: return "csv";
        case OutputFormat::markdown: return "markdown";
    }
    return "json";
}

inline constexpr int kAlgebraForms = 100;
inline constexpr int kPFormFunctions = 4;  // random functions also run through the P-form identities

struct RunConfig {
    std::uint64_t seed = 1;
    int sample_points = 10;
    int random_functions = 20;
    int max_poly_degree = 4;
    int spectral_degree = 2;
    std::string eigen_tol = "1e-12";
    OutputFormat output_format = OutputFormat::json;
    std::string output_path;
    bool timing = false;
    bool corrupt_convention = false;  // negative-control hook: forces a failing sign convention

    double tolerance() const {
        std::size_t used = 0;
        double t = 0;
        try {
            t = std::stod(eigen_tol, &used);
        } catch (const std::exception&) {
            throw config_error("eigen_tol is not a decimal number: " + eigen_tol);
        }
        if (used != eigen_tol.size()) throw config_error("eigen_tol is not a decimal number: " + eigen_tol);
        if (!(t > 0)) throw config_error("eigen_tol must be positive");
        return t;
    }

    void validate() const {
        auto positive = [](int v, const char* name) {
            if (v < 1) throw config_error(std::string(name) + " must be at least 1");
        };
        positive(sample_points, "sample_points");
        positive(random_functions, "random_functions");
        positive(max_poly_degree, "max_poly_degree");
        positive(spectral_degree, "spectral_degree");
        if (spectral_degree > kDefaultDegreeCap)
            throw config_error("spectral_degree must be at most " + std::to_string(kDefaultDegreeCap));
        tolerance();
    }

    Json to_json() const {
        Json j;
        j["seed"] = seed;
        j["sample_points"] = sample_points;
        j["random_functions"] = random_functions;
        j["max_poly_degree"] = max_poly_degree;
        j["spectral_degree"] = spectral_degree;
        j["eigen_tol"] = eigen_tol;
        j["output_format"] = format_name(output_format);
        return j;
    }
};

/// Applies the keys present in a JSON object to cfg. Unknown keys are errors.
inline void apply_config_json(RunConfig& cfg, const Json& j) {
    if (!j.is_object()) throw config_error("config file must hold a JSON object");
    for (const auto& [key, v] : j.items()) {
        try {
            if (key == "seed") cfg.seed = v.get<std::uint64_t>();
            else if (key == "sample_points") cfg.sample_points = v.get<int>();
            else if (key == "random_functions") cfg.random_functions = v.get<int>();
            else if (key == "max_poly_degree") cfg.max_poly_degree = v.get<int>();
            else if (key == "spectral_degree") cfg.spectral_degree = v.get<int>();
            else if (key == "eigen_tol") cfg.eigen_tol = v.is_string() ? v.get<std::string>() : v.dump();
            else if (key == "output_format") cfg.output_format = parse_format(v.get<std::string>());
            else if (key == "output_path") cfg.output_path = v.get<std::string>();
            else throw config_error("unknown config key: " + key);
        } catch (const nlohmann::json::exception& e) {
            throw config_error("config key " + key + ": " + e.what());
        }
    }
}

inline RunConfig load_config(const std::string& path, RunConfig base = {}) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw config_error("config file is not valid JSON: " + std::string(e.what()));
    }
    apply_config_json(base, j);
    return base;
}

// ---------------------------------------------------------------------------
// JSON fragments
// ---------------------------------------------------------------------------

inline Json ledger_json(const std::string& name, const ResidualLedger& l, std::optional<double> seconds = {}) {
    Json s;
    s["name"] = name;
    s["pass"] = l.must_pass_ok();
    Json entries = Json::array();
    for (const auto& e : l.entries()) {
        Json x;
        x["name"] = e.name;
        x["formula"] = e.formula;
        x["lhs"] = to_pq(e.lhs);
        x["rhs"] = to_pq(e.rhs);
        x["residual"] = to_pq(e.residual);
        x["must_pass"] = e.must_pass;
        x["pass"] = e.pass();
        x["samples"] = e.samples;
        if (!e.note.empty()) x["note"] = e.note;
        entries.push_back(std::move(x));
    }
    s["entries"] = std::move(entries);
    if (seconds) s["seconds"] = *seconds;
    return s;
}

inline Json convention_json(const QcModel& m) {
    const ConventionLedger& c = m.convention;
    Json j;
    j["model"] = m.kind == ModelKind::sphere7 ? "sphere7" : "heisenberg7";
    j["multiplication"] = c.multiplication;
    j["coordinate_order"] = c.coordinate_order;
    j["xi_sign"] = c.xi_sign;
    j["i_sign"] = c.i_sign;
    j["forced"] = c.forced;
    j["validated"] = m.validated;
    Json cands = Json::array();
    for (const auto& k : c.candidates) {
        Json x;
        x["xi_sign"] = k.xi_sign;
        x["i_sign"] = k.i_sign;
        x["passed"] = k.passed;
        x["failed"] = k.failed;
        cands.push_back(std::move(x));
    }
    j["candidates"] = std::move(cands);
    return j;
}

inline Json registry_json(const DiscrepancyRegistry& reg) {
    Json arr = Json::array();
    for (const auto& e : reg.entries()) {
        Json x;
        x["id"] = e.id;
        x["formula"] = e.formula;
        x["lhs_label"] = e.lhs_label;
        x["lhs"] = to_pq(e.lhs);
        x["rhs_label"] = e.rhs_label;
        x["rhs"] = to_pq(e.rhs);
        if (e.alternative) {
            x["alternative_label"] = *e.alternative_label;
            x["alternative"] = to_pq(*e.alternative);
        }
        x["verdict"] = e.verdict;
        arr.push_back(std::move(x));
    }
    return arr;
}

inline Json optional_pq(const std::optional<Rational>& r) { return r ? Json(to_pq(*r)) : Json(nullptr); }

inline Json eigen_rows_json(const std::vector<EigenRow>& rows) {
    Json arr = Json::array();
    for (const auto& r : rows) {
        Json x;
        x["lambda"] = optional_pq(r.exact);
        x["approx"] = r.approx;
        x["multiplicity"] = r.multiplicity;
        x["certified"] = r.certified;
        x["residual"] = r.residual;
        x["method"] = r.method;
        arr.push_back(std::move(x));
    }
    return arr;
}


// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

struct CommandResult {
    Json doc;
    int exit_code = 0;
};

namespace detail {

class SuiteRunner {
public:
    explicit SuiteRunner(const RunConfig& cfg) : timing_(cfg.timing) {}

    void run(const std::string& name, const std::function<ResidualLedger()>& body) {
        auto t0 = std::chrono::steady_clock::now();
        ResidualLedger l = body();
        std::optional<double> secs;
        if (timing_) secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!l.must_pass_ok()) ok_ = false;
        suites_.push_back(ledger_json(name, l, secs));
    }

    Json take() { return std::move(suites_); }
    bool ok() const { return ok_; }
    void fail() { ok_ = false; }

private:
    bool timing_;
    bool ok_ = true;
    Json suites_ = Json::array();
};

inline Json header(const std::string& command, const RunConfig& cfg) {
    Json d;
    d["tool"] = "qc7";
    d["command"] = command;
    d["config"] = cfg.to_json();
    return d;
}

inline QcModel sphere_for(const RunConfig& cfg) {
    BuildOptions opt;
    if (cfg.corrupt_convention) opt.forced_candidate = 1;
    return build_sphere7(opt);
}

inline void model_suites(SuiteRunner& run, const QcModel& m, const RunConfig& cfg, const std::string& tag) {
    auto pts = model_points(m, cfg.seed, cfg.sample_points);
    run.run("models." + tag + ".structure", [&] { return structure_suite(m, pts); });
    run.run("models." + tag + ".connection", [&] { return connection_suite(m, pts); });
    run.run("models." + tag + ".curvature", [&] { return curvature_suite(m, pts, cfg.seed); });
}

}  // namespace detail

/// Algebra and model validation suites with the convention ledger.
inline CommandResult cmd_validate(const RunConfig& cfg) {
    cfg.validate();
    CommandResult r;
    r.doc = detail::header("validate", cfg);
    QcModel sphere = detail::sphere_for(cfg);
    QcModel heis = build_heisenberg7();
    r.doc["conventions"] = Json::array({convention_json(sphere), convention_json(heis)});
    detail::SuiteRunner run(cfg);
    run.run("quatalg", [&] { return algebra_suite(cfg.seed, kAlgebraForms); });
    detail::model_suites(run, sphere, cfg, "sphere7");
    detail::model_suites(run, heis, cfg, "heisenberg7");
    if (!sphere.validated) run.fail();
    r.doc["suites"] = run.take();
    r.doc["pass"] = run.ok();
    r.exit_code = run.ok() ? 0 : 1;
    return r;
}

/// Certified Rayleigh-Ritz spectra of both Laplacians on the sphere.
inline CommandResult cmd_spectrum(const RunConfig& cfg) {
    cfg.validate();
    CommandResult r;
    r.doc = detail::header("spectrum", cfg);
    QcModel m = detail::sphere_for(cfg);
    ScalarCalculus calc(m);
    SpectralProblem p = assemble(m, cfg.spectral_degree);
    auto h = solve_spectrum(calc, p, Operator::sub_laplacian, cfg.tolerance());
    auto g = solve_spectrum(calc, p, Operator::riemannian, cfg.tolerance());
    const EigenRow* l1 = first_positive(h);
    const EigenRow* m1 = first_positive(g);
    bool lam_ok = l1 && l1->certified && l1->exact && *l1->exact == 4;
    bool mu_ok = m1 && m1->certified && m1->exact && *m1->exact == 7;
    r.doc["basis_size"] = p.basis.size();
    r.doc["sub_laplacian"] = eigen_rows_json(h);
    r.doc["riemannian"] = eigen_rows_json(g);
    r.doc["lambda1"] = l1 ? optional_pq(l1->exact) : Json(nullptr);
    r.doc["lambda1_multiplicity"] = l1 ? l1->multiplicity : 0;
    r.doc["mu1"] = m1 ? optional_pq(m1->exact) : Json(nullptr);
    r.doc["mu1_multiplicity"] = m1 ? m1->multiplicity : 0;
    r.doc["pass"] = lam_ok && mu_ok;
    r.exit_code = lam_ok && mu_ok ? 0 : 1;
    return r;
}

inline CommandResult cmd_lichnerowicz(const RunConfig& cfg) {
    cfg.validate();
    CommandResult r;
    r.doc = detail::header("lichnerowicz", cfg);
    QcModel m = detail::sphere_for(cfg);
    ScalarCalculus calc(m);
    LichnerowiczResult lr = lichnerowicz_k0(m, sample_rational_points(cfg.seed, cfg.sample_points));
    SpectralProblem p = assemble(m, cfg.spectral_degree);
    auto h = solve_spectrum(calc, p, Operator::sub_laplacian, cfg.tolerance());
    const EigenRow* l1 = first_positive(h);
    std::optional<Rational> lam;
    if (l1 && l1->certified) lam = l1->exact;
    bool sharp = lam && *lam == lr.bound;
    bool above = lam && *lam >= lr.bound;
    r.doc["k0"] = to_pq(lr.k0);
    r.doc["bound"] = to_pq(lr.bound);
    r.doc["lambda1"] = optional_pq(lam);
    r.doc["sharp"] = sharp;
    r.doc["points"] = lr.points;
    r.doc["pass"] = above;
    r.exit_code = above ? 0 : 1;
    return r;
}

/// P-form of a user polynomial on the sphere with its integral identities.
inline CommandResult cmd_pform(const RunConfig& cfg, const std::string& expr) {
    cfg.validate();
    Poly f = parse_poly(expr);
    CommandResult r;
    r.doc = detail::header("pform", cfg);
    r.doc["function"] = expr;
    QcModel m = detail::sphere_for(cfg);
    ScalarCalculus calc(m);
    ScalarFieldJet j = calc.jet(f);
    PFormData pd = calc.p_form(j, PBranch::n1, true);
    ResidualLedger L("pform");
    L.record("paneitz_integration_by_parts", "int f Cf = -int P_f(grad f)", *pd.f_cf_integral, *pd.p_integral);
    L.record("c_operator_integral", "int Cf = 0", calc.integrate(pd.Cf), 0);
    Rational b0 = 0;
    for (const auto& e : pd.B0.e)
        for (const auto& [mono, coef] : e.terms()) b0 += abs(coef);
    L.record("b0_polynomial_vanishes", "4 B_0 = 0 as a polynomial form (n = 1)", b0, 0);
    r.doc["p_function_integral"] = to_pq(-*pd.p_integral);
    r.doc["minus_p_function_integral"] = to_pq(*pd.p_integral);
    r.doc["f_cf_integral"] = to_pq(*pd.f_cf_integral);
    r.doc["p_function"] = pd.p_function.to_string();
    r.doc["suites"] = Json::array({ledger_json("pform", L)});
    r.doc["pass"] = L.must_pass_ok();
    r.exit_code = L.must_pass_ok() ? 0 : 1;
    return r;
}

/// Every suite in fixed order, the spectral chain and the discrepancy registry.
inline CommandResult cmd_full_report(const RunConfig& cfg) {
    cfg.validate();
    CommandResult r;
    r.doc = detail::header("report", cfg);
    QcModel sphere = detail::sphere_for(cfg);
    QcModel heis = build_heisenberg7();
    r.doc["conventions"] = Json::array({convention_json(sphere), convention_json(heis)});
    detail::SuiteRunner run(cfg);
    run.run("quatalg", [&] { return algebra_suite(cfg.seed, kAlgebraForms); });
    detail::model_suites(run, sphere, cfg, "sphere7");
    detail::model_suites(run, heis, cfg, "heisenberg7");
    if (!sphere.validated) run.fail();

    ScalarCalculus calc(sphere);
    for (const QcModel* m : {&sphere, &heis}) {
        std::string tag = m == &sphere ? "sphere7" : "heisenberg7";
        auto fs = random_functions(*m, cfg.seed, cfg.random_functions, cfg.max_poly_degree);
        auto pts = model_points(*m, cfg.seed + 1, cfg.sample_points);
        run.run("scalarops." + tag + ".ricci", [&] { return ricci_identity_suite(*m, fs, pts, cfg.seed); });
    }
    auto fs = random_functions(sphere, cfg.seed + 2, cfg.random_functions, cfg.max_poly_degree);
    run.run("scalarops.sphere7.integral",
            [&] { return integral_machinery_suite(calc, fs, std::min(cfg.random_functions, kPFormFunctions)); });

    SpectralOptions so;
    so.degree = cfg.spectral_degree;
    so.tol = cfg.tolerance();
    so.seed = cfg.seed;
    so.sample_points = cfg.sample_points;
    so.random_functions = std::min(cfg.random_functions, 2);
    so.random_degree = std::min(cfg.max_poly_degree, 3);
    SpectralReport rep;
    run.run("spectral", [&] {
        rep = spectral_report(sphere, so);
        return rep.residuals;
    });
    bool lam_ok = rep.lambda1 && *rep.lambda1 == 4 && rep.lambda1_multiplicity == 8;
    bool mu_ok = rep.mu1 && *rep.mu1 == 7;
    if (!lam_ok || !mu_ok) run.fail();
    r.doc["suites"] = run.take();

    Json sp;
    sp["degree"] = rep.degree;
    sp["sub_laplacian"] = eigen_rows_json(rep.eigen_h);
    sp["riemannian"] = eigen_rows_json(rep.eigen_g);
    sp["lambda1"] = optional_pq(rep.lambda1);
    sp["lambda1_multiplicity"] = rep.lambda1_multiplicity;
    sp["mu1"] = optional_pq(rep.mu1);
    sp["mu1_multiplicity"] = rep.mu1_multiplicity;
    r.doc["spectral"] = std::move(sp);

    Json li;
    li["k0"] = to_pq(rep.lichnerowicz.k0);
    li["bound"] = to_pq(rep.lichnerowicz.bound);
    li["lambda1"] = optional_pq(rep.lambda1);
    li["sharp"] = rep.lambda1 && *rep.lambda1 == rep.lichnerowicz.bound;
    li["line"] = "k0 = " + to_pq(rep.lichnerowicz.k0) + " => bound " + to_pq(rep.lichnerowicz.bound) +
                 (li["sharp"].get<bool>() ? " = lambda1" : " != lambda1");
    r.doc["lichnerowicz"] = std::move(li);
    r.doc["discrepancy_registry"] = registry_json(rep.registry);
    r.doc["pass"] = run.ok();
    r.exit_code = run.ok() ? 0 : 1;
    return r;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

namespace detail {

inline std::string cell(const Json& v) {
    std::string s = v.is_string() ? v.get<std::string>() : v.dump();
    std::string out;
    for (char c : s) out += c == '|' ? std::string("\\|") : std::string(1, c);
    return out;
}

inline void md_suites(std::ostringstream& o, const Json& suites) {
    for (const auto& s : suites) {
        o << "### " << s["name"].get<std::string>() << " (" << (s["pass"].get<bool>() ? "pass" : "FAIL") << ")\n\n";
        if (s.contains("seconds")) o << "time: " << s["seconds"].dump() << " s\n\n";
        o << "| identity | lhs | rhs | residual | must pass | pass | samples |\n|---|---|---|---|---|---|---|\n";
        for (const auto& e : s["entries"])
            o << "| " << cell(e["name"]) << " | " << cell(e["lhs"]) << " | " << cell(e["rhs"]) << " | "
              << cell(e["residual"]) << " | " << cell(e["must_pass"]) << " | " << cell(e["pass"]) << " | "
              << cell(e["samples"]) << " |\n";
        o << "\n";
    }
}

inline void md_eigen(std::ostringstream& o, const std::string& title, const Json& rows) {
    o << "#### " << title << "\n\n| lambda | approx | multiplicity | certified | residual | method |\n"
      << "|---|---|---|---|---|---|\n";
    for (const auto& r : rows)
        o << "| " << cell(r["lambda"]) << " | " << cell(r["approx"]) << " | " << cell(r["multiplicity"]) << " | "
          << cell(r["certified"]) << " | " << cell(r["residual"]) << " | " << cell(r["method"]) << " |\n";
    o << "\n";
}

inline void md_table(std::ostringstream& o, const Json& obj, const std::vector<std::string>& skip = {}) {
    o << "| key | value |\n|---|---|\n";
    for (const auto& [k, v] : obj.items()) {
        if (std::find(skip.begin(), skip.end(), k) != skip.end()) continue;
        o << "| " << k << " | " << cell(v) << " |\n";
    }
    o << "\n";
}

}  // namespace detail

inline std::string render_markdown(const Json& d) {
    std::ostringstream o;
    o << "# qc7 " << d["command"].get<std::string>() << "\n\n";
    o << "overall: " << (d["pass"].get<bool>() ? "pass" : "FAIL") << "\n\n## Configuration\n\n";
    detail::md_table(o, d["config"]);
    if (d.contains("conventions")) {
        o << "## Convention ledger\n\n";
        for (const auto& c : d["conventions"]) {
            o << "### " << c["model"].get<std::string>() << "\n\n";
            detail::md_table(o, c, {"model", "candidates"});
            o << "| xi_sign | i_sign | passed | failed identities |\n|---|---|---|---|\n";
            for (const auto& k : c["candidates"]) {
                std::string failed;
                for (const auto& f : k["failed"]) failed += (failed.empty() ? "" : ", ") + f.get<std::string>();
                o << "| " << k["xi_sign"].dump() << " | " << k["i_sign"].dump() << " | " << k["passed"].dump() << " | "
                  << detail::cell(Json(failed)) << " |\n";
            }
            o << "\n";
        }
    }
    if (d.contains("function")) {
        o << "## P-form\n\n";
        detail::md_table(o, d, {"tool", "command", "config", "suites", "pass"});
    }
    if (d.contains("sub_laplacian")) {
        o << "## Spectrum\n\n";
        detail::md_table(o, d, {"tool", "command", "config", "sub_laplacian", "riemannian", "pass"});
        detail::md_eigen(o, "Sub-Laplacian", d["sub_laplacian"]);
        detail::md_eigen(o, "Riemannian Laplacian", d["riemannian"]);
    }
    if (d["command"] == "lichnerowicz") {
        o << "## Lichnerowicz bound\n\n";
        detail::md_table(o, d, {"tool", "command", "config", "pass"});
    }
    if (d.contains("suites")) {
        o << "## Residual ledger\n\n";
        detail::md_suites(o, d["suites"]);
    }
    if (d.contains("spectral")) {
        const Json& s = d["spectral"];
        o << "## Spectrum\n\n";
        detail::md_table(o, s, {"sub_laplacian", "riemannian"});
        detail::md_eigen(o, "Sub-Laplacian", s["sub_laplacian"]);
        detail::md_eigen(o, "Riemannian Laplacian", s["riemannian"]);
    }
    if (d.contains("lichnerowicz")) {
        o << "## Lichnerowicz bound\n\n" << d["lichnerowicz"]["line"].get<std::string>() << "\n\n";
        detail::md_table(o, d["lichnerowicz"], {"line"});
    }
    if (d.contains("discrepancy_registry")) {
        o << "## Discrepancy registry\n\n";
        for (const auto& e : d["discrepancy_registry"]) {
            o << "### " << e["id"].get<std::string>() << "\n\n";
            detail::md_table(o, e, {"id"});
        }
    }
    return o.str();
}

/// CSV: the sub-Laplacian table for spectrum, otherwise one row per ledger entry.
inline std::string render_csv(const Json& d) {
    std::ostringstream o;
    auto q = [](const Json& v) {
        std::string s = v.is_string() ? v.get<std::string>() : v.dump();
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string out = "\"";
        for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
        return out + "\"";
    };
    if (d.contains("sub_laplacian")) {
        o << "lambda,multiplicity,certified,residual\n";
        for (const auto& r : d["sub_laplacian"])
            o << (r["lambda"].is_null() ? r["approx"].dump() : r["lambda"].get<std::string>()) << ","
              << r["multiplicity"].dump() << "," << r["certified"].dump() << "," << r["residual"].dump() << "\n";
        return o.str();
    }
    o << "suite,name,lhs,rhs,residual,must_pass,pass,samples\n";
    if (d.contains("suites"))
        for (const auto& s : d["suites"])
            for (const auto& e : s["entries"])
                o << q(s["name"]) << "," << q(e["name"]) << "," << q(e["lhs"]) << "," << q(e["rhs"]) << ","
                  << q(e["residual"]) << "," << e["must_pass"].dump() << "," << e["pass"].dump() << ","
                  << e["samples"].dump() << "\n";
    return o.str();
}

inline std::string render(const Json& d, OutputFormat f) {
    switch (f) {
        case OutputFormat::json: return d.dump(2) + "\n";
        case OutputFormat::csv: return render_csv(d);
        case OutputFormat::markdown: return render_markdown(d);
    }
    return d.dump(2) + "\n";
}

}  // namespace qc7
