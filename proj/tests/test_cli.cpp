#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ibex/config.hpp"
#include "ibex/errors.hpp"
#include "ibex/runner.hpp"
#include "ibex/version.hpp"

using namespace ibex;

namespace {

std::string failing_field(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const ConfigError& e) {
        return e.field;
    }
    return "<no error>";
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, sep)) out.push_back(item);
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

const char* survival_text = R"({
    "command": "survival",
    "process": "ibm",
    "domain": {"shape": "interval", "a": -1, "b": 1},
    "z_grid": [0.0, 0.5],
    "t_grid": [0.5, 1.0],
    "estimator": {"method": "conditional", "count": 4000},
    "master_seed": 12345,
    "output": "survival.csv"
})";

}  // namespace

TEST_CASE("config round-trip is the identity") {
    const std::string text = R"({
        "command": "verify",
        "process": "btbm",
        "domain": {"shape": "rectangle", "xmin": -1, "xmax": 1, "ymin": -2, "ymax": 2},
        "comparison": "inradius-slab",
        "z_grid": [[0.0, 0.0], [0.25, -1.5]],
        "t_grid": [0.5, 2.0],
        "estimator": {"count": 5000, "dt": 0.001},
        "verification": {"k": 2.5, "confirm_factor": 3, "dt_scale": 0.001},
        "series": {"abs_tol": 1e-10, "max_terms": 500, "regime_ratio": 0.2},
        "master_seed": 99,
        "chunk_size": 1024,
        "output": "verify.csv"
    })";
    const ExperimentConfig cfg = parse_config_text(text);
    CHECK(cfg.command == Command::verify);
    CHECK(cfg.process == ProcessKind::btbm);
    CHECK(cfg.comparison == Comparison::inradius_slab);
    CHECK(cfg.z_grid.size() == 2);
    CHECK(cfg.z_grid[1] == std::vector<double>{0.25, -1.5});
    CHECK(cfg.estimator.count == 5000);
    CHECK(cfg.estimator.dt == 0.001);
    CHECK(cfg.verification.k == 2.5);
    CHECK(cfg.verification.confirm_factor == 3);
    CHECK(cfg.series.max_terms == 500);
    CHECK(cfg.master_seed == 99);
    CHECK(cfg.chunk_size == 1024);
    CHECK(cfg.output == "verify.csv");

    const std::string canonical = serialize_config(cfg);
    const ExperimentConfig reparsed = parse_config_text(canonical);
    CHECK(serialize_config(reparsed) == canonical);

    // The hash fingerprints the experiment, not the artifact location.
    ExperimentConfig moved = cfg;
    moved.output = "elsewhere.csv";
    CHECK(config_hash(moved) == config_hash(cfg));
    ExperimentConfig reseeded = cfg;
    reseeded.master_seed = 100;
    CHECK(config_hash(reseeded) != config_hash(cfg));
    ExperimentConfig recounted = cfg;
    recounted.estimator.count = 5001;
    CHECK(config_hash(recounted) != config_hash(cfg));
}

TEST_CASE("config diagnostics name the failing field") {
    CHECK(failing_field("not json at all") == "<json>");
    CHECK(failing_field("[1, 2]") == "<json>");
    CHECK(failing_field(R"({"process": "ibm"})") == "command");
    CHECK(failing_field(R"({"command": "vibe"})") == "command");
    CHECK(failing_field(R"({"command": "survival", "outptu": "x"})") == "outptu");

    const std::string base = R"("domain": {"shape": "interval", "a": -1, "b": 1},
                                 "z_grid": [0.0], "t_grid": [1.0])";
    CHECK(failing_field(R"({"command": "survival", )" + base + "}") ==
          "master_seed");
    CHECK(failing_field(R"({"command": "survival", "master_seed": 1,
                            "domain": {"shape": "interval", "a": -1, "b": 1},
                            "z_grid": [2.0], "t_grid": [1.0]})") == "z_grid");
    CHECK(failing_field(R"({"command": "survival", "master_seed": 1,
                            "domain": {"shape": "interval", "a": -1, "b": 1},
                            "z_grid": [0.0], "t_grid": [-1.0]})") == "t_grid");
    CHECK(failing_field(R"({"command": "moments", "master_seed": 1,
                            "domain": {"shape": "interval", "a": -1, "b": 1},
                            "z_grid": [0.0], "p_grid": [0.5]})") == "p_grid");
    CHECK(failing_field(R"({"command": "survival", "master_seed": 1,
                            "process": "btbm",
                            "estimator": {"method": "pathwise"},
                            "domain": {"shape": "interval", "a": -1, "b": 1},
                            "z_grid": [0.0], "t_grid": [1.0]})") ==
          "estimator.method");
    CHECK(failing_field(R"({"command": "moments", "master_seed": 1,
                            "estimator": {"method": "quadrature"},
                            "domain": {"shape": "interval", "a": -1, "b": 1},
                            "z_grid": [0.0], "p_grid": [1.0]})") ==
          "estimator.method");
    CHECK(failing_field(R"({"command": "survival",
                            "estimator": {"method": "quadrature"},
                            "domain": {"shape": "polygon",
                                       "vertices": [[0,0],[1,0],[0,1]]},
                            "z_grid": [[0.2, 0.2]], "t_grid": [1.0]})") ==
          "estimator.method");
    CHECK(failing_field(R"({"command": "verify", "master_seed": 1,
                            "comparison": "equal-volume-ball",
                            "domain": {"shape": "interval", "a": -1, "b": 1},
                            "z_grid": [0.0], "t_grid": [1.0],
                            "p_grid": [1.0]})") == "t_grid");
    CHECK(failing_field(R"({"command": "verify", "master_seed": 1,
                            "domain": {"shape": "interval", "a": -1, "b": 1},
                            "z_grid": [0.0], "t_grid": [1.0]})") == "comparison");
    CHECK(failing_field(R"({"command": "verify", "master_seed": 1,
                            "comparison": "diameter-lens",
                            "domain": {"shape": "interval", "a": -1, "b": 1},
                            "z_grid": [0.0], "t_grid": [1.0]})") == "comparison");
    CHECK(failing_field(R"({"command": "crosscheck",
                            "domain": {"shape": "rectangle", "xmin": 0,
                                       "xmax": 1, "ymin": 0, "ymax": 1},
                            "z_grid": [[0.5, 0.5]], "t_grid": [1.0]})") ==
          "domain");
    CHECK(failing_field(R"({"command": "survival", "master_seed": 1,
                            "estimator": {"count": 1},
                            "domain": {"shape": "interval", "a": -1, "b": 1},
                            "z_grid": [0.0], "t_grid": [1.0]})") ==
          "estimator.count");
    CHECK(failing_field(R"({"command": "survival", "master_seed": 1,
                            "estimator": {"order": 32, "refined_order": 32},
                            "domain": {"shape": "interval", "a": -1, "b": 1},
                            "z_grid": [0.0], "t_grid": [1.0]})") ==
          "estimator.refined_order");
    CHECK(failing_field(R"({"command": "survival", "master_seed": 1,
                            "chunk_size": 0,
                            "domain": {"shape": "interval", "a": -1, "b": 1},
                            "z_grid": [0.0], "t_grid": [1.0]})") == "chunk_size");
    CHECK(failing_field(R"({"command": "sign-scan", "u_grid": [0.0],
                            "v_grid": [1.0], "t_grid": [1.0]})") == "u_grid");
    CHECK(failing_field(R"({"command": "survival", "master_seed": 1,
                            "domain": {"shape": "pentagon"},
                            "z_grid": [0.0], "t_grid": [1.0]})") ==
          "domain.shape");
    CHECK(failing_field(R"({"command": "survival", "master_seed": 1,
                            "domain": {"shape": "ball", "center": ["x"],
                                       "radius": 1},
                            "z_grid": [0.0], "t_grid": [1.0]})") ==
          "domain.center");
    CHECK(failing_field(R"({"command": "survival", "master_seed": 1,
                            "domain": {"shape": "interval", "a": -1, "b": 1,
                                       "c": 0},
                            "z_grid": [0.0], "t_grid": [1.0]})") == "domain.c");
    CHECK(failing_field(R"({"command": "survival", "master_seed": -5,
                            "domain": {"shape": "interval", "a": -1, "b": 1},
                            "z_grid": [0.0], "t_grid": [1.0]})") ==
          "master_seed");
}

TEST_CASE("survival at time zero writes ones") {
    ExperimentConfig cfg = parse_config_text(survival_text);
    cfg.t_grid = {0.0};
    cfg.estimator.count = 100;
    cfg.z_grid = {{0.0}};
    const std::string csv = render_csv(cfg, 1);
    const auto lines = split(csv, '\n');
    REQUIRE(lines.size() == 3);
    CHECK(lines[0].find("# ibex " + std::string(version)) == 0);
    CHECK(lines[0].find("command=survival") != std::string::npos);
    CHECK(lines[0].find("config=fnv1a:") != std::string::npos);
    CHECK(lines[0].find("seed=12345") != std::string::npos);
    CHECK(lines[1] == "z_0,t,value,std_error,n_samples,method");
    CHECK(lines[2] == "0,0,1,0,100,conditional");
}

TEST_CASE("csv bytes are identical across workers and reruns") {
    const ExperimentConfig cfg = parse_config_text(survival_text);
    const std::string w1 = render_csv(cfg, 1);
    CHECK(render_csv(cfg, 2) == w1);
    CHECK(render_csv(cfg, 8) == w1);
    CHECK(render_csv(cfg, 1) == w1);

    ExperimentConfig reseeded = cfg;
    reseeded.master_seed = 54321;
    CHECK(render_csv(reseeded, 1) != w1);

    ExperimentConfig moments = cfg;
    moments.command = Command::moments;
    moments.t_grid.clear();
    moments.p_grid = {1.0, 2.0};
    const std::string m1 = render_csv(moments, 1);
    CHECK(render_csv(moments, 4) == m1);
    CHECK(split(m1, '\n').size() == 2 + 4);
}

TEST_CASE("run_experiment writes artifacts and maps statuses") {
    ExperimentConfig cfg = parse_config_text(survival_text);
    cfg.estimator.count = 500;
    cfg.output = "test_cli_artifact.csv";

    RunOptions opts;
    opts.workers = 2;
    SUBCASE("success writes the rendered bytes") {
        const RunResult res = run_experiment(cfg, opts);
        CHECK(res.status == exit_ok);
        CHECK(res.output_path == cfg.output);
        CHECK(res.message == "wrote test_cli_artifact.csv");
        CHECK(read_file(cfg.output) == render_csv(cfg, 2));
        std::remove(cfg.output.c_str());
    }
    SUBCASE("seed and output overrides are applied") {
        opts.seed_override = 999;
        opts.output_override = "test_cli_override.csv";
        const RunResult res = run_experiment(cfg, opts);
        CHECK(res.status == exit_ok);
        const std::string body = read_file("test_cli_override.csv");
        CHECK(body.find("seed=999") != std::string::npos);
        std::remove("test_cli_override.csv");
    }
    SUBCASE("missing output is a config error") {
        cfg.output.clear();
        CHECK(run_experiment(cfg, opts).status == exit_config_error);
    }
    SUBCASE("bad worker counts are a config error") {
        opts.workers = 0;
        CHECK(run_experiment(cfg, opts).status == exit_config_error);
    }
    SUBCASE("unwritable paths are runtime failures") {
        cfg.output = "no_such_dir_0932/artifact.csv";
        CHECK(run_experiment(cfg, opts).status == exit_runtime_failure);
    }
}

TEST_CASE("verify command reports one row per cell") {
    const std::string text = R"({
        "command": "verify",
        "process": "ibm",
        "domain": {"shape": "rectangle", "xmin": -1, "xmax": 1, "ymin": -2, "ymax": 2},
        "comparison": "equal-volume-ball",
        "z_grid": [[0.0, 0.0], [0.5, 1.0]],
        "t_grid": [0.5],
        "estimator": {"count": 2000},
        "verification": {"dt_scale": 0.001},
        "master_seed": 777,
        "output": "verify.csv"
    })";
    bool confirmed = true;
    const std::string csv = render_csv(parse_config_text(text), 1, &confirmed);
    CHECK(!confirmed);
    const auto lines = split(csv, '\n');
    REQUIRE(lines.size() == 3 + 2);  // two comments, header, one row per (z, t)
    CHECK(lines[1].find("# comparison: equal-volume-ball") == 0);
    CHECK(lines[2] ==
          "z_0,z_1,t,lhs,lhs_se,rhs,rhs_se,margin,combined_se,status");
    for (std::size_t i = 3; i < lines.size(); ++i) {
        const auto cells = split(lines[i], ',');
        REQUIRE(cells.size() == 10);
        CHECK(cells.back() == "pass");
    }
}

TEST_CASE("confirmed violations exit with their own status") {
    // A step size larger than the domain makes the left-hand walker useless;
    // the harness must flag the garbage, confirm it, and say so loudly.
    const std::string text = R"({
        "command": "verify",
        "process": "ibm",
        "domain": {"shape": "polygon", "vertices": [[-30,-1],[30,-1],[0,1]]},
        "comparison": "inradius-slab",
        "z_grid": [[0.0, 0.0]],
        "t_grid": [0.3],
        "estimator": {"count": 10000},
        "verification": {"dt_scale": 3.0},
        "master_seed": 4242,
        "output": "test_cli_flagged.csv"
    })";
    const RunResult res = run_experiment(parse_config_text(text), RunOptions{});
    CHECK(res.status == exit_confirmed_flag);
    CHECK(res.message.find("confirmed") != std::string::npos);
    const std::string body = read_file("test_cli_flagged.csv");
    CHECK(body.find(",confirmed") != std::string::npos);
    CHECK(body.find("# comparison: inradius-slab | flags: 1 | confirmed: 1") !=
          std::string::npos);
    std::remove("test_cli_flagged.csv");
}

TEST_CASE("crosscheck and sign-scan artifacts are deterministic") {
    const std::string cross_text = R"({
        "command": "crosscheck",
        "domain": {"shape": "interval", "a": -1, "b": 1},
        "z_grid": [0.0, 0.9],
        "t_grid": [0.25, 1.0],
        "output": "cc.csv"
    })";
    const ExperimentConfig cross = parse_config_text(cross_text);
    const std::string csv = render_csv(cross, 1);
    CHECK(render_csv(cross, 3) == csv);
    const auto lines = split(csv, '\n');
    REQUIRE(lines.size() == 2 + 4);
    CHECK(lines[1] ==
          "z,t,direct,parts_upper,parts_lower,parts_both,max_discrepancy");
    for (std::size_t i = 2; i < lines.size(); ++i) {
        const auto cells = split(lines[i], ',');
        REQUIRE(cells.size() == 7);
        CHECK(std::stod(cells.back()) < 1e-6);
    }

    const std::string scan_text = R"({
        "command": "sign-scan",
        "u_grid": [0.5, 1.0],
        "v_grid": [1.0],
        "t_grid": [0.5, 2.0],
        "output": "scan.csv"
    })";
    const ExperimentConfig scan = parse_config_text(scan_text);
    const std::string scan_csv = render_csv(scan, 1);
    CHECK(render_csv(scan, 1) == scan_csv);
    const auto scan_lines = split(scan_csv, '\n');
    REQUIRE(scan_lines.size() == 3 + 4);
    CHECK(scan_lines[1].find("# summary: positive=") == 0);
    CHECK(scan_lines[2] == "u,v,t,value,sign");
    CHECK(split(scan_lines[3], ',').back() == "positive");
}
