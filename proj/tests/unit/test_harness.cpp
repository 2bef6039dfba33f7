#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "sdmp/errors.hpp"
#include "sdmp/harness.hpp"
#include "sdmp/parallel.hpp"

using namespace sdmp;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("sdmp-unit-" + name);
    fs::remove_all(dir);
    return dir;
}

std::string message_of(const std::string& json) {
    try {
        parse_config(json);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_SUITE("cli_harness") {

TEST_CASE("FNV-1a reference vectors") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("experiment names round-trip") {
    for (const auto& name : experiment_names()) CHECK(to_string(parse_kind(name)) == name);
    CHECK_THROWS_AS(parse_kind("nope"), ConfigError);
}

TEST_CASE("canonical config round-trips") {
    ExperimentConfig c;
    c.kind = ExperimentKind::LQVerify;
    c.problem.name = "lq";
    c.problem.lq.A2 = 0.3;
    c.epsilons = {0.0625, 0.03125};
    c.scan.values = {1.0, -1.0};
    c.picard.r2 = R2Placement::AsWritten;
    c.tolerances.x1_slope_hi = 1.3;
    const std::string text = serialize_config(c);
    const ExperimentConfig back = parse_config(text);
    CHECK(back == c);
    CHECK(serialize_config(back) == text);
    CHECK(config_hash(back) == config_hash(c));
    c.out_dir = "elsewhere";
    CHECK(config_hash(back) == config_hash(c));
    c.seed = 2;
    CHECK(config_hash(back) != config_hash(c));
}

TEST_CASE("expression problems and domains round-trip") {
    const std::string text = R"({"kind": "simulate", "problem": {"name": "expression",
        "expression": {"drift": "-x + v", "domain": {"intervals": [["-inf", -1], [1, "inf"]]},
                       "initial_control": 1.0}}})";
    const ExperimentConfig c = parse_config(text);
    CHECK(c.problem.expression.drift == "-x + v");
    CHECK(parse_config(serialize_config(c)) == c);
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("overrides") {
    const std::string base = R"({"kind": "simulate"})";
    ExperimentConfig c = parse_config(apply_override(base, "spike.tau=0.5"));
    CHECK(c.spike.tau == 0.5);
    c = parse_config(apply_override(base, "problem.name=lq-no-delay"));
    CHECK(c.problem.name == "lq-no-delay");
    c = parse_config(apply_override(base, "epsilons=[0.125,0.0625]"));
    CHECK(c.epsilons.size() == 2);
    CHECK_THROWS_AS(apply_override(base, "seed"), ConfigError);
    CHECK_THROWS_AS(apply_override(R"({"kind": "simulate", "seed": 3})", "seed.x=1"), ConfigError);
}

TEST_CASE("config errors name the field or position") {
    CHECK(message_of(R"({"kind": "simulate", "spike": {"tua": 1}})").find("spike.tua") != std::string::npos);
    CHECK(message_of(R"({"kind": "simulate", "paths": "many"})").find("'paths'") != std::string::npos);
    CHECK(message_of("{\n\"kind\": \"simulate\",\n\"seed\": }").find("line 3") != std::string::npos);
    CHECK(message_of(R"({"seed": 1})").find("'kind'") != std::string::npos);

    ExperimentConfig c = parse_config(R"({"kind": "simulate", "problem": {"name": "expression",
        "expression": {"T": 1.0, "delta": 0.3}}})");
    try {
        c.validate();
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("problem.expression") != std::string::npos);
    }
    c = parse_config(R"({"kind": "converge-lemma31", "epsilons": [0.1]})");
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = parse_config(R"({"kind": "lq-solve", "problem": {"name": "nonlinear-benchmark"}})");
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("output directory resolution") {
    ExperimentConfig c;
    CHECK(resolve_out_dir("cli", c) == fs::path("cli"));
    c.out_dir = "cfg";
    CHECK(resolve_out_dir("", c) == fs::path("cfg"));
}

TEST_CASE("runs are byte-identical across worker counts") {
    ExperimentConfig c = parse_config(R"({"kind": "converge-lemma31", "grid": {"m": 32},
        "paths": 800, "seed": 4, "epsilons": [0.0625, 0.03125, 0.015625]})");
    const fs::path a = scratch("w1"), b = scratch("w3");
    parallel::set_workers(1);
    const RunResult ra = run_experiment(c, a);
    parallel::set_workers(3);
    const RunResult rb = run_experiment(c, b);
    parallel::set_workers(0);
    REQUIRE(ra.files == rb.files);
    for (const auto& f : ra.files) CHECK_MESSAGE(slurp(a / f) == slurp(b / f), f);

    const auto manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
    CHECK(manifest["seed"] == 4);
    std::ostringstream hex;
    hex << std::hex << config_hash(c);
    CHECK(manifest["config_hash"].get<std::string>().find(hex.str()) != std::string::npos);
    CHECK(manifest["kind"] == "converge-lemma31");
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("a spike equal to the nominal control leaves every curve at zero") {
    ExperimentConfig c = parse_config(R"({"kind": "converge-lemma31", "grid": {"m": 32},
        "paths": 300, "control": {"value": 1.0}, "spike": {"value": 1.0},
        "epsilons": [0.0625, 0.03125]})");
    const fs::path dir = scratch("zero");
    run_experiment(c, dir);
    std::ifstream in(dir / "slopes.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line.rfind("epsilon,metric,value", 0) == 0);
    int rows = 0;
    while (std::getline(in, line)) {
        std::stringstream s(line);
        std::string eps, metric, value;
        std::getline(s, eps, ',');
        std::getline(s, metric, ',');
        std::getline(s, value, ',');
        if (metric == "residual_sq_over_eps2") continue;  // 0 / eps^2 is still 0
        CHECK_MESSAGE(std::stod(value) == 0.0, line);
        ++rows;
    }
    CHECK(rows > 0);
    fs::remove_all(dir);
}

TEST_CASE("simulate writes the requested paths") {
    ExperimentConfig c = parse_config(R"({"kind": "simulate", "grid": {"m": 4}, "paths": 50,
        "dump_paths": 3, "spike": {"epsilon": 0.0625}})");
    const fs::path dir = scratch("sim");
    const RunResult r = run_experiment(c, dir);
    CHECK(r.passed());
    std::ifstream in(dir / "paths.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "path,t,x,x1,x2,u");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 3 * (4 * 4 + 1));  // nodes 0 .. N
    fs::remove_all(dir);
}

}  // TEST_SUITE
