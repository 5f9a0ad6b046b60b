#include "ibex/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "ibex/errors.hpp"

namespace ibex {

namespace {

using nlohmann::json;

// --- small typed readers -------------------------------------------------
//
// Every reader names the field it is reading so a bad entry surfaces as a
// ConfigError pointing at exactly one key.

[[noreturn]] void fail(const std::string& field, const std::string& what) {
    throw ConfigError(field, what);
}

double read_double(const json& j, const std::string& field) {
    if (!j.is_number()) fail(field, "expected a number");
    return j.get<double>();
}

double read_finite(const json& j, const std::string& field) {
    const double x = read_double(j, field);
    if (!std::isfinite(x)) fail(field, "must be finite");
    return x;
}

std::uint64_t read_uint(const json& j, const std::string& field) {
    if (!j.is_number_unsigned()) fail(field, "expected a nonnegative integer");
    return j.get<std::uint64_t>();
}

int read_order(const json& j, const std::string& field) {
    const std::uint64_t n = read_uint(j, field);
    if (n < 2 || n > 1u << 12) fail(field, "expected an order in [2, 4096]");
    return static_cast<int>(n);
}

std::string read_string(const json& j, const std::string& field) {
    if (!j.is_string()) fail(field, "expected a string");
    return j.get<std::string>();
}

std::vector<double> read_number_list(const json& j, const std::string& field) {
    if (!j.is_array()) fail(field, "expected an array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& e : j) out.push_back(read_finite(e, field));
    return out;
}

void reject_unknown(const json& j, const std::string& where,
                    std::initializer_list<const char*> allowed) {
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* k : allowed) {
            if (item.key() == k) {
                known = true;
                break;
            }
        }
        if (!known) fail(where + item.key(), "unknown field");
    }
}

// --- enums ----------------------------------------------------------------

Command command_from(const std::string& s) {
    if (s == "survival") return Command::survival;
    if (s == "moments") return Command::moments;
    if (s == "verify") return Command::verify;
    if (s == "sign-scan") return Command::sign_scan;
    if (s == "crosscheck") return Command::crosscheck;
    fail("command", "expected one of survival, moments, verify, sign-scan, "
                    "crosscheck");
}

ProcessKind process_from(const std::string& s) {
    if (s == "ibm") return ProcessKind::ibm;
    if (s == "btbm") return ProcessKind::btbm;
    fail("process", "expected ibm or btbm");
}

EstimatorMethod method_from(const std::string& s) {
    if (s == "conditional") return EstimatorMethod::conditional;
    if (s == "quadrature") return EstimatorMethod::quadrature;
    if (s == "pathwise") return EstimatorMethod::pathwise;
    fail("estimator.method", "expected conditional, quadrature, or pathwise");
}

Comparison comparison_from(const std::string& s) {
    if (s == "equal-volume-ball") return Comparison::equal_volume_ball;
    if (s == "inradius-slab") return Comparison::inradius_slab;
    if (s == "diameter-lens") return Comparison::diameter_lens;
    fail("comparison", "expected equal-volume-ball, inradius-slab, or "
                       "diameter-lens");
}

// --- domain records --------------------------------------------------------

Domain domain_from(const json& j) {
    if (!j.is_object()) fail("domain", "expected a tagged record");
    const std::string shape = read_string(j.value("shape", json()), "domain.shape");
    if (shape == "interval") {
        reject_unknown(j, "domain.", {"shape", "a", "b"});
        if (!j.contains("a") || !j.contains("b")) {
            fail("domain", "interval needs a and b");
        }
        return Interval{read_finite(j["a"], "domain.a"),
                        read_finite(j["b"], "domain.b")};
    }
    if (shape == "ball") {
        reject_unknown(j, "domain.", {"shape", "center", "radius"});
        if (!j.contains("center") || !j.contains("radius")) {
            fail("domain", "ball needs center and radius");
        }
        return Ball{read_number_list(j["center"], "domain.center"),
                    read_finite(j["radius"], "domain.radius")};
    }
    if (shape == "rectangle") {
        reject_unknown(j, "domain.", {"shape", "xmin", "xmax", "ymin", "ymax"});
        for (const char* k : {"xmin", "xmax", "ymin", "ymax"}) {
            if (!j.contains(k)) fail("domain", "rectangle needs xmin/xmax/ymin/ymax");
        }
        return Rectangle{read_finite(j["xmin"], "domain.xmin"),
                         read_finite(j["xmax"], "domain.xmax"),
                         read_finite(j["ymin"], "domain.ymin"),
                         read_finite(j["ymax"], "domain.ymax")};
    }
    if (shape == "polygon") {
        reject_unknown(j, "domain.", {"shape", "vertices"});
        if (!j.contains("vertices") || !j["vertices"].is_array()) {
            fail("domain.vertices", "expected an array of [x, y] pairs");
        }
        ConvexPolygon poly;
        for (const auto& v : j["vertices"]) {
            const auto pair = read_number_list(v, "domain.vertices");
            if (pair.size() != 2) fail("domain.vertices", "vertices are [x, y] pairs");
            poly.vertices.push_back({pair[0], pair[1]});
        }
        return poly;
    }
    if (shape == "slab") {
        reject_unknown(j, "domain.", {"shape", "dim", "half_width"});
        if (!j.contains("dim") || !j.contains("half_width")) {
            fail("domain", "slab needs dim and half_width");
        }
        const std::uint64_t dim = read_uint(j["dim"], "domain.dim");
        if (dim < 1 || dim > 16) fail("domain.dim", "expected a dimension in [1, 16]");
        return Slab{static_cast<int>(dim),
                    read_finite(j["half_width"], "domain.half_width")};
    }
    if (shape == "lens") {
        reject_unknown(j, "domain.", {"shape", "half_width", "radius"});
        if (!j.contains("half_width") || !j.contains("radius")) {
            fail("domain", "lens needs half_width and radius");
        }
        return Lens{read_finite(j["half_width"], "domain.half_width"),
                    read_finite(j["radius"], "domain.radius")};
    }
    fail("domain.shape",
         "expected interval, ball, rectangle, polygon, slab, or lens");
}

json domain_to_json(const Domain& d) {
    json j;
    if (const auto* iv = std::get_if<Interval>(&d)) {
        j["shape"] = "interval";
        j["a"] = iv->a;
        j["b"] = iv->b;
    } else if (const auto* ball = std::get_if<Ball>(&d)) {
        j["shape"] = "ball";
        j["center"] = ball->center;
        j["radius"] = ball->radius;
    } else if (const auto* rect = std::get_if<Rectangle>(&d)) {
        j["shape"] = "rectangle";
        j["xmin"] = rect->xmin;
        j["xmax"] = rect->xmax;
        j["ymin"] = rect->ymin;
        j["ymax"] = rect->ymax;
    } else if (const auto* poly = std::get_if<ConvexPolygon>(&d)) {
        j["shape"] = "polygon";
        auto& verts = j["vertices"] = json::array();
        for (const auto& v : poly->vertices) verts.push_back({v[0], v[1]});
    } else if (const auto* slab = std::get_if<Slab>(&d)) {
        j["shape"] = "slab";
        j["dim"] = slab->dim;
        j["half_width"] = slab->half_width;
    } else if (const auto* lens = std::get_if<Lens>(&d)) {
        j["shape"] = "lens";
        j["half_width"] = lens->half_width;
        j["radius"] = lens->radius;
    }
    return j;
}

// --- grids ------------------------------------------------------------

std::vector<std::vector<double>> read_start_grid(const json& j) {
    if (!j.is_array() || j.empty()) fail("z_grid", "expected a nonempty array");
    std::vector<std::vector<double>> grid;
    grid.reserve(j.size());
    for (const auto& e : j) {
        if (e.is_number()) {
            grid.push_back({read_finite(e, "z_grid")});
        } else {
            grid.push_back(read_number_list(e, "z_grid"));
            if (grid.back().empty()) fail("z_grid", "start points must be nonempty");
        }
    }
    return grid;
}

std::vector<double> read_grid(const json& j, const std::string& field,
                              double lower, const char* bound_msg) {
    const auto grid = read_number_list(j, field);
    if (grid.empty()) fail(field, "expected a nonempty array");
    for (double x : grid) {
        if (!(x >= lower)) fail(field, bound_msg);
    }
    return grid;
}

// --- per-command validation --------------------------------------------

void validate_for_command(const ExperimentConfig& cfg) {
    const bool needs_domain = cfg.command != Command::sign_scan;
    if (needs_domain) {
        if (!cfg.domain) fail("domain", "required for this command");
        try {
            validate(*cfg.domain);
        } catch (const DomainError& e) {
            fail("domain", e.what());
        }
        if (cfg.z_grid.empty()) fail("z_grid", "required for this command");
        for (const auto& z : cfg.z_grid) {
            try {
                require_interior(*cfg.domain, z);
            } catch (const DomainError& e) {
                fail("z_grid", e.what());
            }
        }
    }

    switch (cfg.command) {
        case Command::survival:
            if (cfg.t_grid.empty()) fail("t_grid", "required for survival");
            if (cfg.estimator.method == EstimatorMethod::pathwise &&
                cfg.process != ProcessKind::ibm) {
                fail("estimator.method", "pathwise supports the ibm process only");
            }
            if (cfg.estimator.method == EstimatorMethod::quadrature &&
                !has_exact_exit_law(*cfg.domain)) {
                fail("estimator.method",
                     "quadrature needs a closed-form exit law for the domain");
            }
            break;
        case Command::moments:
            if (cfg.p_grid.empty()) fail("p_grid", "required for moments");
            if (cfg.estimator.method != EstimatorMethod::conditional) {
                fail("estimator.method", "moments support conditional only");
            }
            break;
        case Command::verify: {
            if (!cfg.comparison) fail("comparison", "required for verify");
            if (cfg.t_grid.empty() == cfg.p_grid.empty()) {
                fail("t_grid", "verify needs exactly one of t_grid or p_grid");
            }
            if (cfg.estimator.method != EstimatorMethod::conditional) {
                fail("estimator.method", "verify supports conditional only");
            }
            const Symmetrization kind =
                *cfg.comparison == Comparison::equal_volume_ball
                    ? Symmetrization::equal_volume_ball
                : *cfg.comparison == Comparison::inradius_slab
                    ? Symmetrization::inradius_slab
                    : Symmetrization::diameter_lens;
            try {
                symmetrize(*cfg.domain, kind);
            } catch (const CapabilityError& e) {
                fail("comparison", e.what());
            }
            break;
        }
        case Command::sign_scan:
            if (cfg.u_grid.empty()) fail("u_grid", "required for sign-scan");
            if (cfg.v_grid.empty()) fail("v_grid", "required for sign-scan");
            if (cfg.t_grid.empty()) fail("t_grid", "required for sign-scan");
            for (double t : cfg.t_grid) {
                if (!(t > 0.0)) fail("t_grid", "sign-scan times must be positive");
            }
            for (double u : cfg.u_grid) {
                if (!(u > 0.0)) fail("u_grid", "barriers must be positive");
            }
            for (double v : cfg.v_grid) {
                if (!(v > 0.0)) fail("v_grid", "barriers must be positive");
            }
            break;
        case Command::crosscheck:
            if (!std::holds_alternative<Interval>(*cfg.domain)) {
                fail("domain", "crosscheck needs an interval domain");
            }
            if (cfg.t_grid.empty()) fail("t_grid", "required for crosscheck");
            break;
    }

    if (is_stochastic(cfg) && !cfg.master_seed) {
        fail("master_seed", "required for stochastic commands");
    }
}

}  // namespace

std::string command_name(Command c) {
    switch (c) {
        case Command::survival:
            return "survival";
        case Command::moments:
            return "moments";
        case Command::verify:
            return "verify";
        case Command::sign_scan:
            return "sign-scan";
        case Command::crosscheck:
            return "crosscheck";
    }
    return "unknown";
}

std::string estimator_method_name(EstimatorMethod m) {
    switch (m) {
        case EstimatorMethod::conditional:
            return "conditional";
        case EstimatorMethod::quadrature:
            return "quadrature";
        case EstimatorMethod::pathwise:
            return "pathwise";
    }
    return "unknown";
}

bool is_stochastic(const ExperimentConfig& cfg) {
    switch (cfg.command) {
        case Command::survival:
            return cfg.estimator.method != EstimatorMethod::quadrature;
        case Command::moments:
        case Command::verify:
            return true;
        case Command::sign_scan:
        case Command::crosscheck:
            return false;
    }
    return false;
}

ExperimentConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        fail("<json>", e.what());
    }
    if (!j.is_object()) fail("<json>", "top level must be an object");
    reject_unknown(j, "",
                   {"command", "process", "domain", "comparison", "z_grid",
                    "t_grid", "p_grid", "u_grid", "v_grid", "estimator",
                    "verification", "series", "master_seed", "chunk_size",
                    "output"});

    ExperimentConfig cfg;
    if (!j.contains("command")) fail("command", "required");
    cfg.command = command_from(read_string(j["command"], "command"));
    if (j.contains("process")) {
        cfg.process = process_from(read_string(j["process"], "process"));
    }
    if (j.contains("domain")) cfg.domain = domain_from(j["domain"]);
    if (j.contains("comparison")) {
        cfg.comparison = comparison_from(read_string(j["comparison"], "comparison"));
    }
    if (j.contains("z_grid")) cfg.z_grid = read_start_grid(j["z_grid"]);
    if (j.contains("t_grid")) {
        cfg.t_grid = read_grid(j["t_grid"], "t_grid", 0.0,
                               "times must be nonnegative");
    }
    if (j.contains("p_grid")) {
        cfg.p_grid = read_grid(j["p_grid"], "p_grid", 1.0,
                               "moment orders must be >= 1");
    }
    if (j.contains("u_grid")) {
        cfg.u_grid = read_grid(j["u_grid"], "u_grid", 0.0,
                               "barrier grids must be nonnegative");
    }
    if (j.contains("v_grid")) {
        cfg.v_grid = read_grid(j["v_grid"], "v_grid", 0.0,
                               "barrier grids must be nonnegative");
    }

    if (j.contains("estimator")) {
        const json& e = j["estimator"];
        if (!e.is_object()) fail("estimator", "expected an object");
        reject_unknown(e, "estimator.",
                       {"method", "count", "dt", "dt_y", "order",
                        "refined_order"});
        if (e.contains("method")) {
            cfg.estimator.method = method_from(read_string(e["method"],
                                                           "estimator.method"));
        }
        if (e.contains("count")) {
            cfg.estimator.count = read_uint(e["count"], "estimator.count");
            if (cfg.estimator.count < 2) fail("estimator.count", "must be >= 2");
        }
        if (e.contains("dt")) {
            cfg.estimator.dt = read_finite(e["dt"], "estimator.dt");
            if (cfg.estimator.dt < 0.0) fail("estimator.dt", "must be >= 0");
        }
        if (e.contains("dt_y")) {
            cfg.estimator.dt_y = read_finite(e["dt_y"], "estimator.dt_y");
            if (!(cfg.estimator.dt_y > 0.0)) fail("estimator.dt_y", "must be > 0");
        }
        if (e.contains("order")) {
            cfg.estimator.order = read_order(e["order"], "estimator.order");
        }
        if (e.contains("refined_order")) {
            cfg.estimator.refined_order =
                read_order(e["refined_order"], "estimator.refined_order");
        }
        if (cfg.estimator.refined_order <= cfg.estimator.order) {
            fail("estimator.refined_order", "must exceed estimator.order");
        }
    }

    if (j.contains("verification")) {
        const json& v = j["verification"];
        if (!v.is_object()) fail("verification", "expected an object");
        reject_unknown(v, "verification.", {"k", "confirm_factor", "dt_scale"});
        if (v.contains("k")) {
            cfg.verification.k = read_finite(v["k"], "verification.k");
            if (!(cfg.verification.k > 0.0)) fail("verification.k", "must be > 0");
        }
        if (v.contains("confirm_factor")) {
            cfg.verification.confirm_factor =
                read_uint(v["confirm_factor"], "verification.confirm_factor");
            if (cfg.verification.confirm_factor < 1) {
                fail("verification.confirm_factor", "must be >= 1");
            }
        }
        if (v.contains("dt_scale")) {
            cfg.verification.dt_scale =
                read_finite(v["dt_scale"], "verification.dt_scale");
            if (!(cfg.verification.dt_scale > 0.0)) {
                fail("verification.dt_scale", "must be > 0");
            }
        }
    }

    if (j.contains("series")) {
        const json& s = j["series"];
        if (!s.is_object()) fail("series", "expected an object");
        reject_unknown(s, "series.", {"abs_tol", "max_terms", "regime_ratio"});
        if (s.contains("abs_tol")) {
            cfg.series.abs_tol = read_finite(s["abs_tol"], "series.abs_tol");
            if (!(cfg.series.abs_tol > 0.0)) fail("series.abs_tol", "must be > 0");
        }
        if (s.contains("max_terms")) {
            const std::uint64_t n = read_uint(s["max_terms"], "series.max_terms");
            if (n < 1 || n > 1000000) fail("series.max_terms", "out of range");
            cfg.series.max_terms = static_cast<int>(n);
        }
        if (s.contains("regime_ratio")) {
            cfg.series.regime_ratio =
                read_finite(s["regime_ratio"], "series.regime_ratio");
            if (!(cfg.series.regime_ratio > 0.0)) {
                fail("series.regime_ratio", "must be > 0");
            }
        }
    }

    if (j.contains("master_seed")) {
        cfg.master_seed = read_uint(j["master_seed"], "master_seed");
    }
    if (j.contains("chunk_size")) {
        cfg.chunk_size = read_uint(j["chunk_size"], "chunk_size");
        if (cfg.chunk_size < 1) fail("chunk_size", "must be >= 1");
    }
    if (j.contains("output")) cfg.output = read_string(j["output"], "output");

    validate_for_command(cfg);
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("<file>", "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
    json j;
    j["command"] = command_name(cfg.command);
    j["process"] = process_name(cfg.process);
    if (cfg.domain) j["domain"] = domain_to_json(*cfg.domain);
    if (cfg.comparison) j["comparison"] = comparison_name(*cfg.comparison);
    if (!cfg.z_grid.empty()) j["z_grid"] = cfg.z_grid;
    if (!cfg.t_grid.empty()) j["t_grid"] = cfg.t_grid;
    if (!cfg.p_grid.empty()) j["p_grid"] = cfg.p_grid;
    if (!cfg.u_grid.empty()) j["u_grid"] = cfg.u_grid;
    if (!cfg.v_grid.empty()) j["v_grid"] = cfg.v_grid;
    j["estimator"] = {{"method", estimator_method_name(cfg.estimator.method)},
                      {"count", cfg.estimator.count},
                      {"dt", cfg.estimator.dt},
                      {"dt_y", cfg.estimator.dt_y},
                      {"order", cfg.estimator.order},
                      {"refined_order", cfg.estimator.refined_order}};
    j["verification"] = {{"k", cfg.verification.k},
                         {"confirm_factor", cfg.verification.confirm_factor},
                         {"dt_scale", cfg.verification.dt_scale}};
    j["series"] = {{"abs_tol", cfg.series.abs_tol},
                   {"max_terms", cfg.series.max_terms},
                   {"regime_ratio", cfg.series.regime_ratio}};
    if (cfg.master_seed) j["master_seed"] = *cfg.master_seed;
    j["chunk_size"] = cfg.chunk_size;
    if (!cfg.output.empty()) j["output"] = cfg.output;
    return j.dump();
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
    // The hash fingerprints the numerical experiment; where the artifact
    // lands must not change its bytes.
    ExperimentConfig keyed = cfg;
    keyed.output.clear();
    const std::string text = serialize_config(keyed);
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace ibex
