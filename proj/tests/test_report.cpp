#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "finsler/report.hpp"

using namespace finsler;
using njson = nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config parsing fills defaults and rejects junk") {
    const ScenarioConfig minimal = parse_config(njson::parse(R"({"model":"minkowski"})"));
    CHECK(minimal.model == "minkowski");
    CHECK(minimal.q.size() == 4);
    CHECK(minimal.tolerances.abs_tol == doctest::Approx(1e-8));
    CHECK(minimal.analyses == std::vector<std::string>{"validate"});

    const ScenarioConfig schw =
        parse_config(njson::parse(R"({"model":"schwarzschild","params":{"m":1.0}})"));
    CHECK(schw.params.at("m") == 1.0);
    CHECK(schw.q[1] == doctest::Approx(10.0));

    CHECK_THROWS_AS(parse_config(njson::parse(R"({"model":"nope"})")), UnknownModel);
    CHECK_THROWS_AS(parse_config(njson::parse(R"({"model":"minkowski","bogus":1})")), ParseError);
    CHECK_THROWS_AS(parse_config(njson::parse(R"({"model":"minkowski","c":-1.0})")), BadParameter);
    CHECK_THROWS_AS(
        parse_config(njson::parse(R"({"model":"minkowski","analyses":["wat"]})")), BadParameter);
    CHECK_THROWS_AS(
        parse_config(njson::parse(R"({"model":"schwarzschild","params":{"mass":1}})")),
        BadParameter);
}

TEST_CASE("load_config surfaces io and parse failures") {
    CHECK_THROWS_AS(load_config("/nonexistent/nowhere.json"), IoError);
    const std::string bad = "/tmp/finsler_bad_config.json";
    {
        std::ofstream os(bad);
        os << "{ not json";
    }
    CHECK_THROWS_AS(load_config(bad), ParseError);
}

TEST_CASE("validate-only run on flat spacetime passes") {
    ScenarioConfig cfg = parse_config(njson::parse(R"({"model":"minkowski"})"));
    cfg.validate_samples = 60;
    const RunReport rep = run(cfg);
    CHECK_FALSE(rep.any_failed);
    const auto& a = rep.document["analyses"][0];
    CHECK(a["analysis"] == "validate");
    CHECK(a["status"] == "ok");
    CHECK(a["result"]["signature_ok"].get<bool>());
    CHECK(a["result"]["max_homogeneity"].get<double>() < 1e-10);
}

TEST_CASE("fermat run on the flat null scenario") {
    ScenarioConfig cfg = parse_config(njson::parse(R"({
        "model": "minkowski",
        "c": 0.0,
        "observer": {"type": "static", "position": [1.0, 0.0, 0.0], "interval": [0.0, 5.0]},
        "analyses": ["classify", "fermat"],
        "generators": 4,
        "seed": 11
    })"));
    const RunReport rep = run(cfg);
    REQUIRE_FALSE(rep.any_failed);

    const auto& fermat = rep.document["analyses"][1];
    REQUIRE(fermat["analysis"] == "fermat");
    REQUIRE(fermat["status"] == "ok");
    const auto& res = fermat["result"];
    CHECK(res["tau"].get<double>() == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(res["first_variation_residual"].get<double>() < 1e-7);
    CHECK(res["character"] == "local_min");
    CHECK(res["morse_index"].get<int>() == 0);
    CHECK(res["conjugate_points"].empty());
    for (const auto& sv : res["second_variation"]) CHECK(sv["gap"].get<double>() < 1e-3);

    std::string why;
    CHECK_MESSAGE(validate_report_json(rep.document, &why), why);

    // Arrival sweep has its interior minimum at eps = 0.
    REQUIRE(rep.tau_sweep.size() == 11);
    const double tau0 = rep.tau_sweep[5][1];
    for (const auto& row : rep.tau_sweep)
        CHECK(row[1] >= tau0 - 1e-12);
}

TEST_CASE("emitted files and byte determinism") {
    ScenarioConfig cfg = parse_config(njson::parse(R"({
        "model": "minkowski",
        "c": 1.0,
        "observer": {"type": "static", "position": [1.0, 0.0, 0.0], "interval": [0.0, 5.0]},
        "analyses": ["validate", "fermat"],
        "generators": 3,
        "seed": 5,
        "validate_samples": 40
    })"));

    const RunReport rep1 = run(cfg);
    const RunReport rep2 = run(cfg);
    emit(rep1, cfg, "/tmp/finsler_out_a", "csv-bundle");
    emit(rep2, cfg, "/tmp/finsler_out_b", "csv-bundle");

    const std::string a = slurp("/tmp/finsler_out_a/report.json");
    const std::string b = slurp("/tmp/finsler_out_b/report.json");
    CHECK(!a.empty());
    CHECK(a == b);  // byte identical given identical config and seed

    // CSV bundle members exist with headers.
    const std::string sweep = slurp("/tmp/finsler_out_a/tau_sweep.csv");
    CHECK(sweep.rfind("eps,tau\n", 0) == 0);
    const std::string dets = slurp("/tmp/finsler_out_a/jacobi_det.csv");
    CHECK(dets.rfind("s,det\n", 0) == 0);
    const std::string conj = slurp("/tmp/finsler_out_a/conjugate_points.csv");
    CHECK(conj.rfind("s,mult\n", 0) == 0);

    // A different seed changes the document (the seed is echoed).
    ScenarioConfig cfg2 = cfg;
    cfg2.seed = 6;
    const RunReport rep3 = run(cfg2);
    emit(rep3, cfg2, "/tmp/finsler_out_c");
    CHECK(slurp("/tmp/finsler_out_c/report.json") != a);
}

TEST_CASE("failed analyses are recorded and the run continues") {
    // A spacelike guess cannot be shot onto the observer: fermat fails but
    // validate still reports.
    ScenarioConfig cfg = parse_config(njson::parse(R"({
        "model": "minkowski",
        "c": 0.0,
        "guess": [-1.0, 0.2, 0.0, 0.0],
        "analyses": ["validate", "fermat"],
        "validate_samples": 30
    })"));
    const RunReport rep = run(cfg);
    CHECK(rep.any_failed);
    CHECK(rep.document["analyses"][0]["status"] == "ok");
    CHECK(rep.document["analyses"][1]["status"] == "error");
    std::string why;
    CHECK_MESSAGE(validate_report_json(rep.document, &why), why);
}

TEST_CASE("empty analysis list emits header-only plot files") {
    ScenarioConfig cfg = parse_config(njson::parse(R"({"model":"minkowski","analyses":[]})"));
    const RunReport rep = run(cfg);
    CHECK_FALSE(rep.any_failed);
    CHECK(rep.document["analyses"].empty());
    emit(rep, cfg, "/tmp/finsler_out_empty", "csv-bundle");
    CHECK(slurp("/tmp/finsler_out_empty/tau_sweep.csv") == "eps,tau\n");
    CHECK(slurp("/tmp/finsler_out_empty/jacobi_det.csv") == "s,det\n");
    CHECK(slurp("/tmp/finsler_out_empty/conjugate_points.csv") == "s,mult\n");
}

TEST_CASE("report schema validator flags malformed documents") {
    njson bad = njson::object();
    std::string why;
    CHECK_FALSE(validate_report_json(bad, &why));
    CHECK(!why.empty());

    njson doc;
    doc["config"] = njson::object();
    doc["version"] = "x";
    doc["analyses"] = njson::array({njson{{"analysis", "fermat"}, {"status", "weird"}}});
    CHECK_FALSE(validate_report_json(doc, &why));
}
