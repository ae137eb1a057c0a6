#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <sys/wait.h>

#include "hherz/scenario.hpp"
#include "test_helpers.hpp"

using namespace hherz;
using nlohmann::json;
using testutil::rel_err;

namespace {

json worked_scenario_json(long budget = 30'000) {
    return json{
        {"name", "thm1_small"},
        {"n", 1},
        {"kernel", {{"kind", "char_shell"}, {"r1", 1.0}, {"r2", 2.0}}},
        {"matrix_field", {{"kind", "inverse_dilation"}}},
        {"symbol_b", {{"kind", "log_norm"}}},
        {"f", {{"kind", "power"}, {"lambda", 2.0}}},
        {"theorem",
         {{"which", "thm1_case_i"},
          {"p", 1.0},
          {"q", 4.0},
          {"q1", 2.0},
          {"q2", 1.25},
          {"alpha1", -1.0},
          {"alpha2", -2.2},
          {"weight", {{"kind", "unit"}}}}},
        {"quad",
         {{"method", "stratified_monte_carlo"},
          {"budget", budget},
          {"seed", 911},
          {"tail_k", 2},
          {"tail_k_lo", -12}}},
        {"herz_window", {{"k_min", -4}, {"k_max", 4}}},
        {"cbmo_grid", {{"j_min", -3}, {"j_max", 3}}}};
}

std::string write_temp(const json& j, const std::string& name) {
    const std::string path = "hherz_test_" + name + ".json";
    std::ofstream out(path);
    out << j.dump(2);
    return path;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(HHERZ_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    if (WIFEXITED(status)) return WEXITSTATUS(status);
    return -1;
}

} // namespace

TEST_CASE("scenario json round trip and digest") {
    const json j = worked_scenario_json();
    const Scenario sc = Scenario::from_json(j);
    CHECK(sc.name == "thm1_small");
    CHECK(sc.n == 1);
    CHECK(sc.theorem.q2 == doctest::Approx(1.25));
    const Scenario sc2 = Scenario::from_json(sc.to_json());
    CHECK(sc.digest() == sc2.digest());

    json changed = j;
    changed["quad"]["seed"] = 912;
    CHECK(Scenario::from_json(changed).digest() != sc.digest());

    json missing = j;
    missing.erase("kernel");
    CHECK_THROWS_AS(Scenario::from_json(missing), ScenarioError);
    json badkind = j;
    badkind["f"]["kind"] = "nope";
    CHECK_THROWS_AS(Scenario::from_json(badkind), ScenarioError);

    // constant matrix field literal {"B": [[...]], "a": r}
    json cf = j;
    cf["matrix_field"] = json{{"B", json::array({json::array({2.0, 0.0}),
                                                 json::array({0.0, 3.0})})},
                              {"a", 16.0}};
    const Scenario scf = Scenario::from_json(cf);
    CHECK(scf.field.kind() == MatrixField::Kind::constant);
    CHECK(scf.field.sample(HPoint::zero(1)).norm == doctest::Approx(4.0));
    const Scenario scf2 = Scenario::from_json(scf.to_json());
    CHECK(scf2.digest() == scf.digest());

    json badB = cf;
    badB["matrix_field"]["B"] = json::array({json::array({1.0, 2.0}),
                                             json::array({2.0, 4.0})}); // singular
    CHECK_THROWS_AS(Scenario::from_json(badB), ScenarioError);
}

TEST_CASE("axioms report determinism") {
    const AxiomsReport a = run_axioms(1, 500, 42);
    const AxiomsReport b = run_axioms(1, 500, 42);
    CHECK(a.pass);
    CHECK(a.to_json().dump() == b.to_json().dump());
    const AxiomsReport c = run_axioms(2, 200, 42);
    CHECK(c.pass);
    CHECK(c.Q == 6);
    CHECK(c.to_json().at("Q").get<int>() == 6);
}

TEST_CASE("inequality pipeline on the worked scenario") {
    const Scenario sc = Scenario::from_json(worked_scenario_json());
    const Report rep = run_inequality(sc);
    CHECK(std::isfinite(rep.ratio));
    CHECK(rep.ratio > 0);
    CHECK(!rep.degenerate);
    CHECK(rep.rhs == doctest::Approx(rep.k_constant.value * rep.b_cbmo * rep.f_herz));
    CHECK(rep.ratio == doctest::Approx(rep.lhs.value / rep.rhs).epsilon(1e-12));

    // bit-identical rerun
    const Report rep2 = run_inequality(sc);
    CHECK(rep.ratio == rep2.ratio);
    CHECK(rep.lhs.value == rep2.lhs.value);

    // f -> 3f leaves the ratio unchanged (same nodes)
    Scenario scaled = sc;
    scaled.f = TestFunction::custom(
        [](const HPoint& x) {
            const double r = hnorm(x);
            return 3.0 / (r * r);
        },
        true, true);
    const Report rep3 = run_inequality(scaled);
    CHECK(rel_err(rep3.ratio, rep.ratio) < 1e-10);
    CHECK(rel_err(rep3.lhs.value, 3.0 * rep.lhs.value) < 1e-10);

    // b -> b + 5 leaves the ratio unchanged (same nodes)
    Scenario shifted = sc;
    shifted.symbol_b = TestFunction::custom(
        [](const HPoint& x) { return std::log(hnorm(x)) + 5.0; }, true, true);
    const Report rep4 = run_inequality(shifted);
    CHECK(rel_err(rep4.ratio, rep.ratio) < 1e-10);
}

TEST_CASE("degenerate gates") {
    // constant symbol: commutator vanishes identically
    {
        Scenario sc = Scenario::from_json(worked_scenario_json());
        sc.symbol_b = TestFunction::constant(1.0);
        const Report rep = run_inequality(sc);
        CHECK(rep.lhs.value == 0.0);
        CHECK(rep.ratio == 0.0);
    }
    // zero kernel: all constants zero, report flagged degenerate
    {
        json j = worked_scenario_json();
        j["kernel"]["r2"] = 1.0;
        const Report rep = run_inequality(Scenario::from_json(j));
        CHECK(rep.k_constant.value == 0.0);
        CHECK(rep.lhs.value == 0.0);
        CHECK(rep.ratio == 0.0);
        CHECK(rep.degenerate);
        bool flagged = false;
        for (const auto& f : rep.flags) flagged = flagged || f == "degenerate";
        CHECK(flagged);
    }
    // hypothesis violation throws before computing
    {
        json j = worked_scenario_json();
        j["theorem"]["alpha1"] = 1.0;
        j["theorem"]["alpha2"] = 1.0 + 4.0 * (1.0 / 2.0 - 1.0 / 1.25);
        CHECK_THROWS_AS(run_inequality(Scenario::from_json(j)), HypothesisError);
    }
}

TEST_CASE("baseline bookkeeping") {
    const std::string path = "hherz_test_baselines.json";
    std::remove(path.c_str());
    CHECK(!baseline_lookup(path, "abc").has_value());
    baseline_store(path, "abc", "demo", 1.25);
    baseline_store(path, "def", "demo2", 2.5);
    REQUIRE(baseline_lookup(path, "abc").has_value());
    CHECK(*baseline_lookup(path, "abc") == 1.25);
    CHECK(*baseline_lookup(path, "def") == 2.5);
    std::remove(path.c_str());

    // comparison semantics: within 5 percent passes
    const Scenario sc = Scenario::from_json(worked_scenario_json());
    const Report base = run_inequality(sc);
    const Report ok = run_inequality(sc, base.ratio * 1.03);
    CHECK(ok.baseline_pass);
    const Report badr = run_inequality(sc, base.ratio * 1.2);
    CHECK(!badr.baseline_pass);
    CHECK(!badr.pass);
}

TEST_CASE("cli exit codes") {
    // exit 2: hypothesis violation, itemized
    json bad = worked_scenario_json();
    bad["theorem"]["alpha1"] = 1.0;
    const std::string bad_path = write_temp(bad, "bad_hyp");
    CHECK(run_cli("inequality --scenario " + bad_path) == 2);

    // exit 2: malformed scenario
    {
        std::ofstream out("hherz_test_malformed.json");
        out << "{ not json";
    }
    CHECK(run_cli("inequality --scenario hherz_test_malformed.json") == 2);
    CHECK(run_cli("norms --scenario hherz_test_missing_file.json") == 2);

    // exit 0: small healthy run
    const std::string good_path = write_temp(worked_scenario_json(20'000), "good");
    CHECK(run_cli("inequality --scenario " + good_path) == 0);
    CHECK(run_cli("inequality --scenario " + good_path + " --format csv") == 0);
    CHECK(run_cli("axioms --samples 500") == 0);
    CHECK(run_cli("norms --scenario " + good_path) == 0);
    CHECK(run_cli("constants --scenario " + good_path) == 0);

    // custom kinds are not valid scenario-file literals
    json custom_w = worked_scenario_json();
    custom_w["theorem"]["weight"] = {{"kind", "custom"}};
    const std::string custom_path = write_temp(custom_w, "custom_weight");
    CHECK(run_cli("inequality --scenario " + custom_path) == 2);
    std::remove(custom_path.c_str());

    std::remove(bad_path.c_str());
    std::remove("hherz_test_malformed.json");
    std::remove(good_path.c_str());
}

TEST_CASE("cli report round trip") {
    const std::string good_path = write_temp(worked_scenario_json(20'000), "roundtrip");
    CHECK(run_cli("inequality --scenario " + good_path + " --out hherz_test_rep.json") == 0);

    std::ifstream in("hherz_test_rep.json");
    REQUIRE(in.good());
    json rep;
    in >> rep;
    CHECK(rep.contains("ratio"));
    CHECK(rep.contains("lhs"));
    CHECK(rep["nested"].contains("outer_nodes"));
    // ratio recomputable from the stored quantities
    const double rhs = rep["k_constant"]["value"].get<double>() *
                       rep["b_cbmo"]["value"].get<double>() *
                       rep["f_herz"]["value"].get<double>();
    CHECK(rel_err(rep["ratio"].get<double>(), rep["lhs"]["value"].get<double>() / rhs) <= 1e-12);

    CHECK(run_cli("report --in hherz_test_rep.json") == 0);
    CHECK(run_cli("report --in hherz_test_rep.json --format csv") == 0);
    CHECK(run_cli("report --in hherz_test_nonexistent.json") == 1);

    std::remove(good_path.c_str());
    std::remove("hherz_test_rep.json");
}
