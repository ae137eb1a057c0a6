#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hherz/hausdorff.hpp"

// Scenario files, report emission, pinned-baseline bookkeeping, and the
// three harness entry points: the axiom suite, the calibration table of
// closed-form oracles, and the end-to-end inequality run.

namespace hherz {

// Malformed scenario input; the CLI maps this (and hypothesis failures) to
// exit code 2.
class ScenarioError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class HypothesisError : public std::runtime_error {
public:
    HypothesisError(std::string msg, std::vector<std::string> violations)
        : std::runtime_error(std::move(msg)), violations(std::move(violations)) {}
    std::vector<std::string> violations;
};

struct Scenario {
    std::string name = "unnamed";
    int n = 1;
    Kernel kernel = Kernel::char_shell(1.0, 2.0);
    MatrixField field = MatrixField::inverse_dilation(1);
    TestFunction symbol_b = TestFunction::log_norm();
    TestFunction f = TestFunction::power(2.0);
    TheoremParams theorem;
    QuadSpec quad;
    int herz_k_min = -10, herz_k_max = 10;
    int cbmo_j_min = -6, cbmo_j_max = 6;

    static Scenario from_json(const nlohmann::json& j);
    static Scenario from_file(const std::string& path);
    nlohmann::json to_json() const; // canonical form; source of the digest
    std::string digest() const;     // FNV-1a 64 of the canonical dump
};

struct Report {
    std::string scenario_digest, scenario_name, which;
    QuadResult lhs, k_constant;
    double b_cbmo = 0, b_cbmo_err = 0;
    double f_herz = 0, f_herz_err = 0;
    double rhs = 0, ratio = 0;
    bool degenerate = false;
    std::vector<std::string> flags;
    double lhs_edge_lo = 0, lhs_edge_hi = 0;
    double f_edge_lo = 0, f_edge_hi = 0;
    int cbmo_argmax_j = 0;
    long outer_nodes = 0, inner_budget = 0;
    std::optional<double> baseline;
    double baseline_rel_diff = 0;
    bool baseline_pass = true;
    bool pass = true;

    nlohmann::json to_json() const;
    static std::string csv_header();
    std::string csv_row() const;
};

// Full pipeline: hypothesis gate, K constant, CBMO and Herz norms, nested
// LHS, ratio, baseline comparison (within 5% when a baseline is given).
// Throws HypothesisError when check_hypotheses fails.
Report run_inequality(const Scenario& sc, std::optional<double> baseline = std::nullopt);

// Norms-only run: no operator evaluation, no hypothesis gate beyond ranges.
struct NormsReport {
    std::string scenario_digest, scenario_name;
    double f_herz = 0, f_herz_err = 0;
    double b_cbmo = 0, b_cbmo_err = 0;
    int cbmo_argmax_j = 0;
    double f_edge_lo = 0, f_edge_hi = 0;
    std::vector<std::string> flags;
    nlohmann::json to_json() const;
};
NormsReport run_norms(const Scenario& sc);

struct PropertyResult {
    std::string name;
    double worst = 0;
    double tol = 0;
    long count = 0;
    bool pass = false;
};

struct AxiomsReport {
    int n = 1;
    int Q = 0; // homogeneous dimension 2n+2
    long samples = 0;
    std::uint64_t seed = 0;
    std::vector<PropertyResult> properties;
    bool pass = false;
    nlohmann::json to_json() const;
};

AxiomsReport run_axioms(int n, long samples, std::uint64_t seed);

struct CalibrationEntry {
    std::string name;
    double computed = 0, expected = 0;
    double rel_err = 0, tol = 0;
    bool pass = false;
};

struct CalibrationReport {
    std::vector<CalibrationEntry> entries;
    long budget = 0;
    std::uint64_t seed = 0;
    bool pass = false;
    nlohmann::json to_json() const;
};

// Recomputes every closed-form oracle value and compares at its stated
// tolerance; the harness' standing cross-check.
CalibrationReport run_calibration(long budget, std::uint64_t seed);

// Pinned ratio baselines: {"baselines": {digest: {name, ratio, recorded}}}.
std::optional<double> baseline_lookup(const std::string& path, const std::string& digest);
void baseline_store(const std::string& path, const std::string& digest, const std::string& name,
                    double ratio);

std::string fnv1a_hex(const std::string& data);

} // namespace hherz
