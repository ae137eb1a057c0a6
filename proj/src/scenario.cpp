#include "hherz/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "hherz/detail/rng.hpp"

namespace hherz {

using nlohmann::json;

namespace {

double require_number(const json& j, const char* key, const char* ctx) {
    if (!j.contains(key) || !j.at(key).is_number())
        throw ScenarioError(std::string(ctx) + ": missing numeric field '" + key + "'");
    return j.at(key).get<double>();
}

std::string require_string(const json& j, const char* key, const char* ctx) {
    if (!j.contains(key) || !j.at(key).is_string())
        throw ScenarioError(std::string(ctx) + ": missing string field '" + key + "'");
    return j.at(key).get<std::string>();
}

Weight weight_from_json(const json& j) {
    const std::string kind = require_string(j, "kind", "weight");
    if (kind == "unit") return Weight::unit();
    if (kind == "power") return Weight::power(require_number(j, "beta", "weight"));
    throw ScenarioError("weight: unknown kind '" + kind + "' (scenario files take unit|power)");
}

json weight_to_json(const Weight& w) {
    switch (w.kind) {
        case Weight::Kind::unit: return json{{"kind", "unit"}};
        case Weight::Kind::power: return json{{"kind", "power"}, {"beta", w.beta}};
        case Weight::Kind::custom: return json{{"kind", "custom"}};
    }
    return {};
}

Kernel kernel_from_json(const json& j) {
    const std::string kind = require_string(j, "kind", "kernel");
    if (kind == "char_shell")
        return Kernel::char_shell(require_number(j, "r1", "kernel"),
                                  require_number(j, "r2", "kernel"));
    if (kind == "power_decay")
        return Kernel::power_decay(require_number(j, "sigma", "kernel"),
                                   require_number(j, "r0", "kernel"));
    throw ScenarioError("kernel: unknown kind '" + kind + "'");
}

json kernel_to_json(const Kernel& k) {
    switch (k.kind) {
        case Kernel::Kind::char_shell:
            return json{{"kind", "char_shell"}, {"r1", k.r1}, {"r2", k.r2}};
        case Kernel::Kind::power_decay:
            return json{{"kind", "power_decay"}, {"sigma", k.sigma}, {"r0", k.r0}};
        case Kernel::Kind::custom: return json{{"kind", "custom"}};
    }
    return {};
}

MatrixField field_from_json(const json& j, int n) {
    if (j.contains("kind") && j.at("kind").is_string()) {
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "inverse_dilation") return MatrixField::inverse_dilation(n);
        if (kind != "constant")
            throw ScenarioError("matrix_field: unknown kind '" + kind + "'");
    }
    if (!j.contains("B") || !j.at("B").is_array())
        throw ScenarioError("matrix_field: constant field needs a 2n x 2n array 'B'");
    const int m = 2 * n;
    const auto& rows = j.at("B");
    if (static_cast<int>(rows.size()) != m)
        throw ScenarioError("matrix_field: B must have 2n rows");
    std::vector<double> B;
    B.reserve(static_cast<std::size_t>(m) * m);
    for (const auto& row : rows) {
        if (!row.is_array() || static_cast<int>(row.size()) != m)
            throw ScenarioError("matrix_field: B rows must have length 2n");
        for (const auto& v : row) {
            if (!v.is_number()) throw ScenarioError("matrix_field: non-numeric entry in B");
            B.push_back(v.get<double>());
        }
    }
    const double a = require_number(j, "a", "matrix_field");
    try {
        return MatrixField::constant(GradedMatrix(n, std::move(B), a));
    } catch (const std::invalid_argument& e) {
        throw ScenarioError(std::string("matrix_field: ") + e.what());
    }
}

json field_to_json(const MatrixField& f) {
    switch (f.kind()) {
        case MatrixField::Kind::inverse_dilation: return json{{"kind", "inverse_dilation"}};
        case MatrixField::Kind::constant: {
            const GradedMatrix M = f.at(HPoint::zero(f.n()));
            const int m = 2 * f.n();
            json rows = json::array();
            for (int i = 0; i < m; ++i) {
                json row = json::array();
                for (int j2 = 0; j2 < m; ++j2) row.push_back(M.B()[i * m + j2]);
                rows.push_back(row);
            }
            return json{{"kind", "constant"}, {"B", rows}, {"a", M.a()}};
        }
        case MatrixField::Kind::custom: return json{{"kind", "custom"}};
    }
    return {};
}

TestFunction function_from_json(const json& j, const char* ctx) {
    const std::string kind = require_string(j, "kind", ctx);
    if (kind == "power") return TestFunction::power(require_number(j, "lambda", ctx));
    if (kind == "char_ball")
        return TestFunction::char_ball(static_cast<int>(require_number(j, "k", ctx)));
    if (kind == "char_annulus")
        return TestFunction::char_annulus(static_cast<int>(require_number(j, "k1", ctx)),
                                          static_cast<int>(require_number(j, "k2", ctx)));
    if (kind == "log_norm") return TestFunction::log_norm();
    if (kind == "bump")
        return TestFunction::bump(require_number(j, "k_center", ctx),
                                  require_number(j, "width", ctx));
    if (kind == "constant") return TestFunction::constant(require_number(j, "value", ctx));
    throw ScenarioError(std::string(ctx) + ": unknown kind '" + kind + "'");
}

json function_to_json(const TestFunction& f) {
    switch (f.kind) {
        case TestFunction::Kind::power: return json{{"kind", "power"}, {"lambda", f.lambda}};
        case TestFunction::Kind::char_ball: return json{{"kind", "char_ball"}, {"k", f.k}};
        case TestFunction::Kind::char_annulus:
            return json{{"kind", "char_annulus"}, {"k1", f.k1}, {"k2", f.k2}};
        case TestFunction::Kind::log_norm: return json{{"kind", "log_norm"}};
        case TestFunction::Kind::bump:
            return json{{"kind", "bump"}, {"k_center", f.k_center}, {"width", f.width}};
        case TestFunction::Kind::constant: return json{{"kind", "constant"}, {"value", f.value}};
        case TestFunction::Kind::custom: return json{{"kind", "custom"}};
    }
    return {};
}

TheoremParams theorem_from_json(const json& j) {
    TheoremParams tp;
    const std::string which = require_string(j, "which", "theorem");
    if (which == "thm1_case_i") tp.which = TheoremParams::Which::thm1_case_i;
    else if (which == "thm1_case_ii") tp.which = TheoremParams::Which::thm1_case_ii;
    else if (which == "thm2") tp.which = TheoremParams::Which::thm2;
    else throw ScenarioError("theorem: unknown which '" + which + "'");
    tp.p = require_number(j, "p", "theorem");
    tp.q = require_number(j, "q", "theorem");
    tp.q1 = require_number(j, "q1", "theorem");
    tp.q2 = require_number(j, "q2", "theorem");
    tp.alpha1 = require_number(j, "alpha1", "theorem");
    tp.alpha2 = require_number(j, "alpha2", "theorem");
    if (j.contains("delta")) tp.delta = j.at("delta").get<double>();
    if (!j.contains("weight")) throw ScenarioError("theorem: missing weight");
    tp.weight = weight_from_json(j.at("weight"));
    return tp;
}

const char* which_name(TheoremParams::Which w) {
    switch (w) {
        case TheoremParams::Which::thm1_case_i: return "thm1_case_i";
        case TheoremParams::Which::thm1_case_ii: return "thm1_case_ii";
        case TheoremParams::Which::thm2: return "thm2";
    }
    return "?";
}

json theorem_to_json(const TheoremParams& tp) {
    return json{{"which", which_name(tp.which)},
                {"p", tp.p},
                {"q", tp.q},
                {"q1", tp.q1},
                {"q2", tp.q2},
                {"alpha1", tp.alpha1},
                {"alpha2", tp.alpha2},
                {"delta", tp.delta},
                {"weight", weight_to_json(tp.weight)}};
}

QuadSpec quad_from_json(const json& j) {
    QuadSpec q;
    const std::string method = require_string(j, "method", "quad");
    if (method == "tensor_grid") q.method = QuadMethod::tensor_grid;
    else if (method == "stratified_monte_carlo") q.method = QuadMethod::stratified_monte_carlo;
    else if (method == "radial_1d") q.method = QuadMethod::radial_1d;
    else throw ScenarioError("quad: unknown method '" + method + "'");
    q.budget = static_cast<long>(require_number(j, "budget", "quad"));
    if (q.budget < 1) throw ScenarioError("quad: budget must be >= 1");
    q.seed = static_cast<std::uint64_t>(require_number(j, "seed", "quad"));
    q.tail_k = static_cast<int>(require_number(j, "tail_k", "quad"));
    if (j.contains("tail_k_lo")) q.tail_k_lo = j.at("tail_k_lo").get<int>();
    if (j.contains("target_rel")) q.target_rel = j.at("target_rel").get<double>();
    if (q.tail_k <= q.tail_k_lo) throw ScenarioError("quad: need tail_k > tail_k_lo");
    return q;
}

const char* method_name(QuadMethod m) {
    switch (m) {
        case QuadMethod::tensor_grid: return "tensor_grid";
        case QuadMethod::stratified_monte_carlo: return "stratified_monte_carlo";
        case QuadMethod::radial_1d: return "radial_1d";
    }
    return "?";
}

json quad_to_json(const QuadSpec& q) {
    return json{{"method", method_name(q.method)}, {"budget", q.budget},
                {"seed", q.seed},                  {"tail_k", q.tail_k},
                {"tail_k_lo", q.tail_k_lo},        {"target_rel", q.target_rel}};
}

json quadresult_to_json(const QuadResult& r) {
    json j{{"value", r.value}, {"err_est", r.err_est}, {"n_evals", r.n_evals}};
    if (r.flagged) j["flag"] = r.flag;
    if (r.excluded_core_radius > 0) j["excluded_core_radius"] = r.excluded_core_radius;
    if (r.tail_majorant) j["tail_majorant"] = *r.tail_majorant;
    return j;
}

} // namespace

std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Scenario Scenario::from_json(const json& j) {
    Scenario sc;
    if (j.contains("name")) sc.name = j.at("name").get<std::string>();
    sc.n = static_cast<int>(require_number(j, "n", "scenario"));
    if (sc.n < 1) throw ScenarioError("scenario: n must be >= 1");
    if (!j.contains("kernel")) throw ScenarioError("scenario: missing kernel");
    sc.kernel = kernel_from_json(j.at("kernel"));
    if (!j.contains("matrix_field")) throw ScenarioError("scenario: missing matrix_field");
    sc.field = field_from_json(j.at("matrix_field"), sc.n);
    if (!j.contains("symbol_b")) throw ScenarioError("scenario: missing symbol_b");
    sc.symbol_b = function_from_json(j.at("symbol_b"), "symbol_b");
    if (!j.contains("f")) throw ScenarioError("scenario: missing f");
    sc.f = function_from_json(j.at("f"), "f");
    if (!j.contains("theorem")) throw ScenarioError("scenario: missing theorem");
    sc.theorem = theorem_from_json(j.at("theorem"));
    if (!j.contains("quad")) throw ScenarioError("scenario: missing quad");
    sc.quad = quad_from_json(j.at("quad"));
    if (j.contains("herz_window")) {
        sc.herz_k_min = static_cast<int>(require_number(j.at("herz_window"), "k_min", "herz_window"));
        sc.herz_k_max = static_cast<int>(require_number(j.at("herz_window"), "k_max", "herz_window"));
    }
    if (sc.herz_k_min >= sc.herz_k_max) throw ScenarioError("scenario: herz window empty");
    if (j.contains("cbmo_grid")) {
        sc.cbmo_j_min = static_cast<int>(require_number(j.at("cbmo_grid"), "j_min", "cbmo_grid"));
        sc.cbmo_j_max = static_cast<int>(require_number(j.at("cbmo_grid"), "j_max", "cbmo_grid"));
    }
    if (sc.cbmo_j_min > sc.cbmo_j_max) throw ScenarioError("scenario: cbmo grid empty");
    return sc;
}

Scenario Scenario::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open scenario file: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ScenarioError("scenario file is not valid JSON: " + std::string(e.what()));
    }
    return from_json(j);
}

json Scenario::to_json() const {
    return json{{"name", name},
                {"n", n},
                {"kernel", kernel_to_json(kernel)},
                {"matrix_field", field_to_json(field)},
                {"symbol_b", function_to_json(symbol_b)},
                {"f", function_to_json(f)},
                {"theorem", theorem_to_json(theorem)},
                {"quad", quad_to_json(quad)},
                {"herz_window", json{{"k_min", herz_k_min}, {"k_max", herz_k_max}}},
                {"cbmo_grid", json{{"j_min", cbmo_j_min}, {"j_max", cbmo_j_max}}}};
}

std::string Scenario::digest() const { return fnv1a_hex(to_json().dump()); }

json Report::to_json() const {
    json j{{"scenario_digest", scenario_digest},
           {"scenario_name", scenario_name},
           {"which", which},
           {"lhs", quadresult_to_json(lhs)},
           {"k_constant", quadresult_to_json(k_constant)},
           {"b_cbmo", json{{"value", b_cbmo}, {"err_est", b_cbmo_err}, {"argmax_j", cbmo_argmax_j}}},
           {"f_herz", json{{"value", f_herz},
                           {"err_est", f_herz_err},
                           {"edge_lo_frac", f_edge_lo},
                           {"edge_hi_frac", f_edge_hi}}},
           {"rhs", rhs},
           {"ratio", ratio},
           {"degenerate", degenerate},
           {"flags", flags},
           {"truncation", json{{"lhs_edge_lo_frac", lhs_edge_lo}, {"lhs_edge_hi_frac", lhs_edge_hi}}},
           {"nested", json{{"outer_nodes", outer_nodes}, {"inner_budget", inner_budget}}},
           {"pass", pass}};
    if (baseline) {
        j["baseline"] =
            json{{"value", *baseline}, {"rel_diff", baseline_rel_diff}, {"pass", baseline_pass}};
    }
    return j;
}

std::string Report::csv_header() {
    return "digest,name,which,lhs,lhs_err,k,k_err,b_cbmo,f_herz,rhs,ratio,degenerate,"
           "baseline,baseline_rel_diff,pass,flags";
}

std::string Report::csv_row() const {
    std::ostringstream os;
    os.precision(12);
    os << scenario_digest << ',' << scenario_name << ',' << which << ',' << lhs.value << ','
       << lhs.err_est << ',' << k_constant.value << ',' << k_constant.err_est << ',' << b_cbmo
       << ',' << f_herz << ',' << rhs << ',' << ratio << ',' << (degenerate ? 1 : 0) << ',';
    if (baseline) os << *baseline;
    os << ',' << baseline_rel_diff << ',' << (pass ? 1 : 0) << ',';
    for (std::size_t i = 0; i < flags.size(); ++i) os << (i ? ";" : "") << flags[i];
    return os.str();
}

Report run_inequality(const Scenario& sc, std::optional<double> baseline) {
    const GroupDims dims = group_constants(sc.n);
    const TheoremParams& tp = sc.theorem;

    const HypothesisReport hyp = check_hypotheses(tp, dims, sc.quad);
    if (!hyp.ok) {
        std::string msg = "hypotheses failed:";
        for (const auto& v : hyp.violations) msg += " [" + v + "]";
        throw HypothesisError(msg, hyp.violations);
    }
    std::string note;
    if (!kernel_integrable(sc.kernel, sc.quad, dims, &note))
        throw ScenarioError("kernel fails the integrability check: " + note);

    Report rep;
    rep.scenario_digest = sc.digest();
    rep.scenario_name = sc.name;
    rep.which = which_name(tp.which);

    rep.k_constant = k_constant(sc.kernel, sc.field, tp, sc.quad, dims);

    QuadSpec cbmo_spec = sc.quad;
    cbmo_spec.seed = rng::substream(sc.quad.seed, 0xaa01, 0);
    const CbmoResult cb = cbmo_norm(sc.symbol_b.as_integrand(), tp.q, tp.weight, sc.cbmo_j_min,
                                    sc.cbmo_j_max, cbmo_spec, dims);
    rep.b_cbmo = cb.value;
    rep.b_cbmo_err = cb.err_est;
    rep.cbmo_argmax_j = cb.argmax_j;

    HerzParams f_params{tp.alpha1, tp.p, tp.q1, tp.weight, sc.herz_k_min, sc.herz_k_max};
    QuadSpec f_spec = sc.quad;
    f_spec.seed = rng::substream(sc.quad.seed, 0xaa02, 0);
    const HerzResult fh = herz_norm(sc.f.as_integrand(), f_params, f_spec, dims);
    rep.f_herz = fh.value;
    rep.f_herz_err = fh.err_est;
    rep.f_edge_lo = fh.edge_lo_frac;
    rep.f_edge_hi = fh.edge_hi_frac;
    if (fh.flagged) rep.flags.push_back("f_herz_edge_terms_exceed_1pct");

    // Nested LHS: outer annulus nodes x inner operator quadrature, capped by
    // quad.budget per annulus with inner = clamp(budget^{1/3}, 128, 4096).
    const long inner = std::clamp<long>(
        static_cast<long>(std::cbrt(static_cast<double>(sc.quad.budget))), 128, 4096);
    const long outer = std::max<long>(64, sc.quad.budget / inner);
    rep.inner_budget = inner;
    rep.outer_nodes = outer;

    QuadSpec inner_spec = sc.quad;
    inner_spec.budget = inner;
    inner_spec.seed = rng::substream(sc.quad.seed, 0xaa04, 0);
    QuadSpec outer_spec = sc.quad;
    outer_spec.method = QuadMethod::stratified_monte_carlo;
    outer_spec.budget = outer;
    outer_spec.seed = rng::substream(sc.quad.seed, 0xaa03, 0);

    const Integrand b_int = sc.symbol_b.as_integrand();
    const Integrand f_int = sc.f.as_integrand();
    std::atomic<long> inner_calls{0};
    Integrand tbf;
    // The inner seed is a function of the outer node's coordinate bits:
    // deterministic and schedule-independent, yet independent across nodes so
    // the inner-quadrature noise averages out of each annulus norm.
    tbf.fn = [&](const HPoint& x) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (double c : x.c) {
            std::uint64_t bits;
            std::memcpy(&bits, &c, sizeof bits);
            h ^= bits;
            h *= 0x100000001b3ULL;
        }
        QuadSpec isp = inner_spec;
        isp.seed = rng::substream(inner_spec.seed, 0x717e, h);
        inner_calls.fetch_add(1, std::memory_order_relaxed);
        return apply_commutator(b_int, f_int, sc.kernel, sc.field, x, isp, dims).value;
    };
    tbf.origin_singular = f_int.origin_singular || b_int.origin_singular;
    tbf.radial = false;

    HerzParams lhs_params{tp.alpha2, tp.p, tp.q2, tp.weight, sc.herz_k_min, sc.herz_k_max};
    const HerzResult lh = herz_norm(tbf, lhs_params, outer_spec, dims);
    rep.lhs.value = lh.value;
    rep.lhs.err_est = lh.err_est;
    rep.lhs.n_evals = lh.n_evals + inner_calls.load() * inner;
    rep.lhs_edge_lo = lh.edge_lo_frac;
    rep.lhs_edge_hi = lh.edge_hi_frac;
    if (lh.flagged) rep.flags.push_back("lhs_edge_terms_exceed_1pct");
    if (rep.k_constant.flagged) rep.flags.push_back("k_" + rep.k_constant.flag);

    rep.rhs = rep.k_constant.value * rep.b_cbmo * rep.f_herz;
    if (rep.rhs == 0.0) {
        rep.degenerate = true;
        rep.flags.push_back("degenerate");
        rep.ratio = 0.0;
        if (rep.lhs.value != 0.0) {
            rep.ratio = std::numeric_limits<double>::infinity();
            rep.pass = false;
            rep.flags.push_back("zero_rhs_nonzero_lhs");
        }
    } else {
        rep.ratio = rep.lhs.value / rep.rhs;
    }

    if (baseline && !rep.degenerate) {
        rep.baseline = baseline;
        rep.baseline_rel_diff = std::abs(rep.ratio - *baseline) / std::abs(*baseline);
        rep.baseline_pass = rep.baseline_rel_diff <= 0.05;
        if (!rep.baseline_pass) rep.pass = false;
    }
    if (!std::isfinite(rep.ratio)) rep.pass = false;
    return rep;
}

NormsReport run_norms(const Scenario& sc) {
    const GroupDims dims = group_constants(sc.n);
    const TheoremParams& tp = sc.theorem;
    NormsReport rep;
    rep.scenario_digest = sc.digest();
    rep.scenario_name = sc.name;

    QuadSpec cbmo_spec = sc.quad;
    cbmo_spec.seed = rng::substream(sc.quad.seed, 0xaa01, 0);
    const CbmoResult cb = cbmo_norm(sc.symbol_b.as_integrand(), tp.q, tp.weight, sc.cbmo_j_min,
                                    sc.cbmo_j_max, cbmo_spec, dims);
    rep.b_cbmo = cb.value;
    rep.b_cbmo_err = cb.err_est;
    rep.cbmo_argmax_j = cb.argmax_j;

    HerzParams f_params{tp.alpha1, tp.p, tp.q1, tp.weight, sc.herz_k_min, sc.herz_k_max};
    QuadSpec f_spec = sc.quad;
    f_spec.seed = rng::substream(sc.quad.seed, 0xaa02, 0);
    const HerzResult fh = herz_norm(sc.f.as_integrand(), f_params, f_spec, dims);
    rep.f_herz = fh.value;
    rep.f_herz_err = fh.err_est;
    rep.f_edge_lo = fh.edge_lo_frac;
    rep.f_edge_hi = fh.edge_hi_frac;
    if (fh.flagged) rep.flags.push_back("f_herz_edge_terms_exceed_1pct");
    return rep;
}

json NormsReport::to_json() const {
    return json{{"scenario_digest", scenario_digest},
                {"scenario_name", scenario_name},
                {"f_herz", json{{"value", f_herz},
                                {"err_est", f_herz_err},
                                {"edge_lo_frac", f_edge_lo},
                                {"edge_hi_frac", f_edge_hi}}},
                {"b_cbmo", json{{"value", b_cbmo}, {"err_est", b_cbmo_err}, {"argmax_j", cbmo_argmax_j}}},
                {"flags", flags}};
}

json AxiomsReport::to_json() const {
    json props = json::array();
    for (const auto& p : properties)
        props.push_back(json{{"name", p.name},
                             {"worst_residual", p.worst},
                             {"tol", p.tol},
                             {"count", p.count},
                             {"pass", p.pass}});
    return json{{"n", n},       {"Q", Q},              {"samples", samples},
                {"seed", seed}, {"properties", props}, {"pass", pass}};
}

json CalibrationReport::to_json() const {
    json rows = json::array();
    for (const auto& e : entries)
        rows.push_back(json{{"name", e.name},
                            {"computed", e.computed},
                            {"expected", e.expected},
                            {"rel_err", e.rel_err},
                            {"tol", e.tol},
                            {"pass", e.pass}});
    return json{{"budget", budget}, {"seed", seed}, {"entries", rows}, {"pass", pass}};
}

std::optional<double> baseline_lookup(const std::string& path, const std::string& digest) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    json j;
    try {
        in >> j;
    } catch (const std::exception&) {
        return std::nullopt;
    }
    if (!j.contains("baselines")) return std::nullopt;
    const auto& b = j.at("baselines");
    if (!b.contains(digest)) return std::nullopt;
    return b.at(digest).at("ratio").get<double>();
}

void baseline_store(const std::string& path, const std::string& digest, const std::string& name,
                    double ratio) {
    json j;
    {
        std::ifstream in(path);
        if (in) {
            try {
                in >> j;
            } catch (const std::exception&) {
                j = json{};
            }
        }
    }
    if (!j.contains("baselines")) j["baselines"] = json::object();
    j["baselines"][digest] = json{{"name", name}, {"ratio", ratio}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write baselines file: " + path);
    out << j.dump(2) << '\n';
}

} // namespace hherz
