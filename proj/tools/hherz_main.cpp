#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hherz/scenario.hpp"

// hherz <axioms|calibrate|norms|constants|inequality|report> [flags]
//
// Exit codes: 0 every executed check passed, 1 a check or baseline failed,
// 2 malformed scenario or failed hypotheses. HHERZ_THREADS caps parallelism
// (0 = auto).

namespace {

using hherz::Report;
using nlohmann::json;

void write_output(const json& j, const std::string& out_path) {
    if (out_path.empty()) return;
    std::ofstream out(out_path);
    if (!out) {
        std::cerr << "cannot write " << out_path << "\n";
        std::exit(1);
    }
    out << j.dump(2) << '\n';
}

hherz::Scenario load_scenario(const std::string& path, std::uint64_t seed_override,
                              long budget_override, int n_override) {
    hherz::Scenario sc = hherz::Scenario::from_file(path);
    if (seed_override != 0) sc.quad.seed = seed_override;
    if (budget_override != 0) sc.quad.budget = budget_override;
    if (n_override != 0) sc.n = n_override;
    return sc;
}

void print_calibration(const hherz::CalibrationReport& rep) {
    std::printf("%-34s %16s %16s %10s %8s  %s\n", "oracle", "computed", "expected", "rel_err",
                "tol", "ok");
    for (const auto& e : rep.entries)
        std::printf("%-34s %16.8g %16.8g %10.2e %8.0e  %s\n", e.name.c_str(), e.computed,
                    e.expected, e.rel_err, e.tol, e.pass ? "pass" : "FAIL");
    std::printf("calibration: %s\n", rep.pass ? "pass" : "FAIL");
}

void print_report(const Report& rep) {
    std::printf("scenario %s (%s), theorem %s\n", rep.scenario_name.c_str(),
                rep.scenario_digest.c_str(), rep.which.c_str());
    std::printf("  lhs  = %.6g (err %.2g, %ld evals)\n", rep.lhs.value, rep.lhs.err_est,
                rep.lhs.n_evals);
    std::printf("  K    = %.6g (err %.2g)\n", rep.k_constant.value, rep.k_constant.err_est);
    std::printf("  |b|  = %.6g (cbmo, argmax 2^%d)\n", rep.b_cbmo, rep.cbmo_argmax_j);
    std::printf("  |f|  = %.6g (herz)\n", rep.f_herz);
    std::printf("  rhs  = %.6g   ratio = %.6g\n", rep.rhs, rep.ratio);
    if (rep.baseline)
        std::printf("  baseline %.6g, rel diff %.3g -> %s\n", *rep.baseline,
                    rep.baseline_rel_diff, rep.baseline_pass ? "pass" : "FAIL");
    for (const auto& f : rep.flags) std::printf("  flag: %s\n", f.c_str());
    std::printf("  %s\n", rep.pass ? "pass" : "FAIL");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical harness for Hausdorff-operator commutator bounds on the Heisenberg "
                 "group"};
    app.require_subcommand(1);

    std::string scenario_path, out_path, baselines_path, in_path, format = "json";
    std::uint64_t seed = 0;
    long budget = 0;
    int n_override = 0;
    long samples = 10'000;

    auto add_common = [&](CLI::App* cmd, bool with_scenario) {
        if (with_scenario)
            cmd->add_option("--scenario", scenario_path, "scenario JSON path")->required();
        cmd->add_option("--out", out_path, "write the report JSON here");
        cmd->add_option("--seed", seed, "override the quadrature seed");
        cmd->add_option("--budget", budget, "override the per-integral evaluation budget");
        cmd->add_option("--n", n_override, "override the group dimension parameter n");
        cmd->add_option("--format", format, "json|csv")->check(CLI::IsMember({"json", "csv"}));
    };

    CLI::App* axioms = app.add_subcommand("axioms", "randomized group/matrix property suite");
    add_common(axioms, false);
    axioms->add_option("--samples", samples, "random instances per property");

    CLI::App* calibrate =
        app.add_subcommand("calibrate", "recompute every closed-form oracle and compare");
    add_common(calibrate, false);

    CLI::App* norms = app.add_subcommand("norms", "Herz norm of f and CBMO norm of b");
    add_common(norms, true);

    CLI::App* constants = app.add_subcommand("constants", "theorem constant for the scenario");
    add_common(constants, true);

    CLI::App* inequality =
        app.add_subcommand("inequality", "full end-to-end inequality verification");
    add_common(inequality, true);
    inequality->add_option("--baselines", baselines_path,
                           "pinned-ratio table; first run records, later runs compare (5%)");

    CLI::App* report_cmd = app.add_subcommand("report", "re-emit a stored report");
    report_cmd->add_option("--in", in_path, "report JSON to read")->required();
    report_cmd->add_option("--format", format, "json|csv")->check(CLI::IsMember({"json", "csv"}));
    report_cmd->add_option("--out", out_path, "write the re-emitted report here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (axioms->parsed()) {
            const int n = n_override != 0 ? n_override : 1;
            const auto rep = hherz::run_axioms(n, samples, seed != 0 ? seed : 1);
            for (const auto& p : rep.properties)
                std::printf("%-34s worst %.3e tol %.0e (%ld samples) %s\n", p.name.c_str(),
                            p.worst, p.tol, p.count, p.pass ? "pass" : "FAIL");
            write_output(rep.to_json(), out_path);
            return rep.pass ? 0 : 1;
        }
        if (calibrate->parsed()) {
            const auto rep =
                hherz::run_calibration(budget != 0 ? budget : 400'000, seed != 0 ? seed : 1);
            print_calibration(rep);
            write_output(rep.to_json(), out_path);
            return rep.pass ? 0 : 1;
        }
        if (norms->parsed()) {
            const auto sc = load_scenario(scenario_path, seed, budget, n_override);
            const auto rep = hherz::run_norms(sc);
            std::printf("f herz = %.8g (err %.2g)\nb cbmo = %.8g (err %.2g, argmax 2^%d)\n",
                        rep.f_herz, rep.f_herz_err, rep.b_cbmo, rep.b_cbmo_err, rep.cbmo_argmax_j);
            write_output(rep.to_json(), out_path);
            return 0;
        }
        if (constants->parsed()) {
            const auto sc = load_scenario(scenario_path, seed, budget, n_override);
            const auto dims = hherz::group_constants(sc.n);
            const auto k = hherz::k_constant(sc.kernel, sc.field, sc.theorem, sc.quad, dims);
            std::printf("K = %.8g (err %.2g, %ld evals)\n", k.value, k.err_est, k.n_evals);
            write_output(nlohmann::json{{"k_constant", k.value},
                                        {"err_est", k.err_est},
                                        {"n_evals", k.n_evals}},
                         out_path);
            return 0;
        }
        if (inequality->parsed()) {
            const auto sc = load_scenario(scenario_path, seed, budget, n_override);
            std::optional<double> base;
            if (!baselines_path.empty()) base = hherz::baseline_lookup(baselines_path, sc.digest());
            const Report rep = hherz::run_inequality(sc, base);
            if (!baselines_path.empty() && !base && !rep.degenerate)
                hherz::baseline_store(baselines_path, sc.digest(), sc.name, rep.ratio);
            print_report(rep);
            if (format == "csv") {
                std::printf("%s\n%s\n", Report::csv_header().c_str(), rep.csv_row().c_str());
            }
            write_output(rep.to_json(), out_path);
            return rep.pass ? 0 : 1;
        }
        if (report_cmd->parsed()) {
            std::ifstream in(in_path);
            if (!in) {
                std::cerr << "cannot read " << in_path << "\n";
                return 1;
            }
            json j;
            in >> j;
            if (format == "csv" && j.contains("ratio")) {
                std::printf("%s\n", Report::csv_header().c_str());
                std::printf("%s,%s,%s,%g,%g,%g,%g,%g,%g,%g,%g,%d,,,%d,\n",
                            j.value("scenario_digest", "").c_str(),
                            j.value("scenario_name", "").c_str(), j.value("which", "").c_str(),
                            j["lhs"].value("value", 0.0), j["lhs"].value("err_est", 0.0),
                            j["k_constant"].value("value", 0.0),
                            j["k_constant"].value("err_est", 0.0),
                            j["b_cbmo"].value("value", 0.0), j["f_herz"].value("value", 0.0),
                            j.value("rhs", 0.0), j.value("ratio", 0.0),
                            j.value("degenerate", false) ? 1 : 0, j.value("pass", true) ? 1 : 0);
            } else {
                std::cout << j.dump(2) << '\n';
            }
            write_output(j, out_path);
            return 0;
        }
    } catch (const hherz::HypothesisError& e) {
        std::cerr << "hypothesis check failed:\n";
        for (const auto& v : e.violations) std::cerr << "  - " << v << "\n";
        return 2;
    } catch (const hherz::ScenarioError& e) {
        std::cerr << "scenario error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
