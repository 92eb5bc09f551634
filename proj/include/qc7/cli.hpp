#pragma once

// Command-line front end. Exit codes: 0 all must-pass identities hold,
// 1 mathematical failure, 2 usage or configuration error.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qc7/report.hpp"

namespace qc7::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct Flags {
    std::optional<std::string> config;
    std::optional<std::uint64_t> seed;
    std::optional<int> degree, points, functions, poly_degree;
    std::optional<std::string> tol, format, out;
    bool timing = false;
    bool corrupt = false;
    std::string function;
};

inline RunConfig resolve(const Flags& f) {
    RunConfig cfg;
    if (f.config) cfg = load_config(*f.config);
    if (f.seed) cfg.seed = *f.seed;
    if (f.degree) cfg.spectral_degree = *f.degree;
    if (f.points) cfg.sample_points = *f.points;
    if (f.functions) cfg.random_functions = *f.functions;
    if (f.poly_degree) cfg.max_poly_degree = *f.poly_degree;
    if (f.tol) cfg.eigen_tol = *f.tol;
    if (f.format) cfg.output_format = parse_format(*f.format);
    if (f.out) cfg.output_path = *f.out;
    cfg.timing = f.timing;
    cfg.corrupt_convention = f.corrupt;
    cfg.validate();
    return cfg;
}

inline void emit(const RunConfig& cfg, const Json& doc, std::ostream& out) {
    std::string text = render(doc, cfg.output_format);
    if (cfg.output_path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(cfg.output_path, std::ios::binary);
    if (!f) throw config_error("cannot open output file: " + cfg.output_path);
    f << text;
}

/// Runs the CLI on argv; output goes to out, diagnostics to err.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"qc7: exact quaternionic contact geometry in dimension seven"};
    app.require_subcommand(1);
    Flags f;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", f.config, "JSON config file; flags override its keys");
        sub->add_option("--seed", f.seed, "seed for sample points and random functions");
        sub->add_option("--degree,--max-degree", f.degree, "spectral polynomial degree (1..4)");
        sub->add_option("--points", f.points, "sample points per suite");
        sub->add_option("--functions", f.functions, "random functions per suite");
        sub->add_option("--poly-degree", f.poly_degree, "maximum degree of random functions");
        sub->add_option("--tol", f.tol, "eigensolver tolerance (decimal)");
        sub->add_option("--format", f.format, "json, csv or markdown");
        sub->add_option("--out", f.out, "output path (default stdout)");
        sub->add_flag("--timing", f.timing, "include per-suite wall time (breaks byte reproducibility)");
        sub->add_flag("--corrupt-convention", f.corrupt)->group("");
    };
    CLI::App* validate = app.add_subcommand("validate", "algebra and model structure suites");
    CLI::App* spectrum = app.add_subcommand("spectrum", "certified sub-Laplacian and Riemannian spectra on the sphere");
    CLI::App* lich = app.add_subcommand("lichnerowicz", "k0, the bound k0/3 and its sharpness");
    CLI::App* pform = app.add_subcommand("pform", "P-form integrals of a polynomial on the sphere");
    CLI::App* report = app.add_subcommand("report", "every suite, the spectral chain and the discrepancy registry");
    for (CLI::App* s : {validate, spectrum, lich, pform, report}) add_common(s);
    pform->add_option("function", f.function, "polynomial in x1..x8, e.g. \"x1^2 - x2*x3\"")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        RunConfig cfg = resolve(f);
        CommandResult r;
        if (*validate) r = cmd_validate(cfg);
        else if (*spectrum) r = cmd_spectrum(cfg);
        else if (*lich) r = cmd_lichnerowicz(cfg);
        else if (*pform) r = cmd_pform(cfg, f.function);
        else r = cmd_full_report(cfg);
        emit(cfg, r.doc, out);
        if (r.exit_code != kExitOk) {
            err << "qc7: must-pass identities failed:";
            if (r.doc.contains("suites"))
                for (const auto& s : r.doc["suites"])
                    for (const auto& e : s["entries"])
                        if (e["must_pass"].get<bool>() && !e["pass"].get<bool>())
                            err << " " << s["name"].get<std::string>() << "/" << e["name"].get<std::string>();
            err << "\n";
        }
        return r.exit_code;
    } catch (const config_error& e) {
        err << "qc7: configuration error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const input_error& e) {
        err << "qc7: input error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const dimension_error& e) {
        err << "qc7: input error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const error& e) {
        err << "qc7: " << e.what() << "\n";
        return kExitFailure;
    }
}

}  // namespace qc7::cli
