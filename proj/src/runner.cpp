#include "ibex/runner.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ibex/errors.hpp"
#include "ibex/version.hpp"

namespace ibex {

namespace {

// Locale-independent shortest round-trip rendering.
std::string fmt(double x) {
    std::array<char, 32> buf;
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), res.ptr);
}

std::string fmt(std::uint64_t n) { return std::to_string(n); }

std::string hash_hex(std::uint64_t h) {
    std::array<char, 17> buf{};
    std::snprintf(buf.data(), buf.size(), "%016llx",
                  static_cast<unsigned long long>(h));
    return buf.data();
}

class CsvWriter {
  public:
    void comment(const std::string& line) { out_ << "# " << line << '\n'; }

    void header(const std::vector<std::string>& names) {
        for (std::size_t i = 0; i < names.size(); ++i) {
            out_ << (i ? "," : "") << names[i];
        }
        out_ << '\n';
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            out_ << (i ? "," : "") << cells[i];
        }
        out_ << '\n';
    }

    std::string str() const { return out_.str(); }

  private:
    std::ostringstream out_;
};

std::vector<std::string> start_columns(int dim) {
    std::vector<std::string> names;
    for (int i = 0; i < dim; ++i) names.push_back("z_" + std::to_string(i));
    return names;
}

void append_estimate(std::vector<std::string>& cells, const EstimateWithError& e) {
    cells.push_back(fmt(e.value));
    cells.push_back(fmt(e.std_error));
    cells.push_back(fmt(static_cast<std::uint64_t>(e.n_samples)));
    cells.push_back(e.method);
}

ParallelConfig parallel_for(const ExperimentConfig& cfg, int workers) {
    ParallelConfig par;
    par.workers = workers;
    par.chunk_size = cfg.chunk_size;
    return par;
}

std::uint64_t seed_of(const ExperimentConfig& cfg) {
    return cfg.master_seed ? *cfg.master_seed : 0;
}

void render_survival(const ExperimentConfig& cfg, int workers, CsvWriter& csv) {
    const ParallelConfig par = parallel_for(cfg, workers);
    auto names = start_columns(dimension(*cfg.domain));
    names.insert(names.end(), {"t", "value", "std_error", "n_samples", "method"});
    csv.header(names);

    const QuadratureSettings quad{cfg.estimator.order, cfg.estimator.refined_order,
                                  cfg.series};
    for (std::size_t zi = 0; zi < cfg.z_grid.size(); ++zi) {
        const IteratedQuery query{*cfg.domain, cfg.z_grid[zi], cfg.process};

        std::vector<EstimateWithError> ests;
        switch (cfg.estimator.method) {
            case EstimatorMethod::conditional: {
                ConditionalSettings cs;
                cs.count = cfg.estimator.count;
                cs.seed = {seed_of(cfg), zi};
                cs.dt = cfg.estimator.dt;
                cs.series = cfg.series;
                cs.parallel = par;
                const auto batch = draw_outer_exits(query, cs);
                for (double t : cfg.t_grid) {
                    ests.push_back(survival_from_batch(batch, t, cfg.series, par));
                }
                break;
            }
            case EstimatorMethod::quadrature: {
                for (double t : cfg.t_grid) {
                    ests.push_back(cfg.process == ProcessKind::ibm
                                       ? ibm_survival(query, t, quad)
                                       : btbm_survival(query, t, quad));
                }
                break;
            }
            case EstimatorMethod::pathwise: {
                PathwiseSettings ps;
                ps.count = cfg.estimator.count;
                ps.seed = {seed_of(cfg), zi};
                ps.dt_y = cfg.estimator.dt_y;
                ps.dt = cfg.estimator.dt;
                ps.series = cfg.series;
                ps.parallel = par;
                for (double t : cfg.t_grid) {
                    ests.push_back(ibm_survival(query, t, ps));
                }
                break;
            }
        }

        for (std::size_t tj = 0; tj < cfg.t_grid.size(); ++tj) {
            std::vector<std::string> cells;
            for (double c : cfg.z_grid[zi]) cells.push_back(fmt(c));
            cells.push_back(fmt(cfg.t_grid[tj]));
            append_estimate(cells, ests[tj]);
            csv.row(cells);
        }
    }
}

void render_moments(const ExperimentConfig& cfg, int workers, CsvWriter& csv) {
    const ParallelConfig par = parallel_for(cfg, workers);
    auto names = start_columns(dimension(*cfg.domain));
    names.insert(names.end(), {"p", "value", "std_error", "n_samples", "method"});
    csv.header(names);

    for (std::size_t zi = 0; zi < cfg.z_grid.size(); ++zi) {
        ConditionalSettings cs;
        cs.count = cfg.estimator.count;
        cs.seed = {seed_of(cfg), zi};
        cs.dt = cfg.estimator.dt;
        cs.series = cfg.series;
        cs.parallel = par;
        const auto batch = draw_outer_exits(
            {*cfg.domain, cfg.z_grid[zi], cfg.process}, cs);
        for (double p : cfg.p_grid) {
            const auto est = moment_from_batch(batch, p, cfg.series, par);
            std::vector<std::string> cells;
            for (double c : cfg.z_grid[zi]) cells.push_back(fmt(c));
            cells.push_back(fmt(p));
            append_estimate(cells, est);
            csv.row(cells);
        }
    }
}

void render_verify(const ExperimentConfig& cfg, int workers, CsvWriter& csv,
                   bool* confirmed) {
    const bool over_time = !cfg.t_grid.empty();

    VerificationSettings vs;
    vs.count = cfg.estimator.count;
    vs.k = cfg.verification.k;
    vs.seed = {seed_of(cfg), 0};
    vs.confirm_factor = cfg.verification.confirm_factor;
    vs.dt_scale = cfg.verification.dt_scale;
    vs.series = cfg.series;
    vs.parallel = parallel_for(cfg, workers);

    const auto report =
        over_time ? check_isoperimetric(*cfg.domain, cfg.process, *cfg.comparison,
                                        cfg.z_grid, cfg.t_grid, vs)
                  : check_moments(*cfg.domain, cfg.process, *cfg.comparison,
                                  cfg.z_grid, cfg.p_grid, vs);
    if (confirmed) *confirmed = report.any_confirmed();

    csv.comment("comparison: " + comparison_name(*cfg.comparison) +
                " | flags: " + fmt(static_cast<std::uint64_t>(report.flag_count)) +
                " | confirmed: " +
                fmt(static_cast<std::uint64_t>(report.confirmed_count)) +
                " | worst-margin: " + fmt(report.worst_margin));

    auto names = start_columns(dimension(*cfg.domain));
    names.insert(names.end(),
                 {over_time ? "t" : "p", "lhs", "lhs_se", "rhs", "rhs_se",
                  "margin", "combined_se", "status"});
    csv.header(names);

    for (const auto& rec : report.records) {
        std::vector<std::string> cells;
        for (double c : rec.start) cells.push_back(fmt(c));
        cells.push_back(fmt(rec.coordinate));
        cells.push_back(fmt(rec.lhs.value));
        cells.push_back(fmt(rec.lhs.std_error));
        cells.push_back(fmt(rec.rhs.value));
        cells.push_back(fmt(rec.rhs.std_error));
        cells.push_back(fmt(rec.margin));
        cells.push_back(fmt(rec.combined_se));
        cells.push_back(record_status(rec));
        csv.row(cells);
    }
}

void render_sign_scan(const ExperimentConfig& cfg, CsvWriter& csv) {
    const auto scan = sign_scan(cfg.u_grid, cfg.v_grid, cfg.t_grid, cfg.series);
    csv.comment("summary: positive=" + fmt(static_cast<std::uint64_t>(scan.positive)) +
                " negative=" + fmt(static_cast<std::uint64_t>(scan.negative)) +
                " near_zero=" + fmt(static_cast<std::uint64_t>(scan.near_zero)) +
                " | min " + fmt(scan.min_value) + " at u=" + fmt(scan.min_u) +
                " v=" + fmt(scan.min_v) + " t=" + fmt(scan.min_t));
    csv.header({"u", "v", "t", "value", "sign"});
    for (double u : cfg.u_grid) {
        for (double v : cfg.v_grid) {
            for (double t : cfg.t_grid) {
                const double val = interval_mixed_partial({u, v, t}, cfg.series);
                const char* sign = val > cfg.series.abs_tol    ? "positive"
                                   : val < -cfg.series.abs_tol ? "negative"
                                                               : "near_zero";
                csv.row({fmt(u), fmt(v), fmt(t), fmt(val), sign});
            }
        }
    }
}

void render_crosscheck(const ExperimentConfig& cfg, CsvWriter& csv) {
    const QuadratureSettings quad{cfg.estimator.order, cfg.estimator.refined_order,
                                  cfg.series};
    csv.header({"z", "t", "direct", "parts_upper", "parts_lower", "parts_both",
                "max_discrepancy"});
    for (const auto& z : cfg.z_grid) {
        for (double t : cfg.t_grid) {
            const auto rep = representation_crosscheck(*cfg.domain, z, t, quad);
            csv.row({fmt(z[0]), fmt(t), fmt(rep.direct), fmt(rep.parts_upper),
                     fmt(rep.parts_lower), fmt(rep.parts_both),
                     fmt(rep.max_discrepancy)});
        }
    }
}

}  // namespace

std::string render_csv(const ExperimentConfig& cfg, int workers, bool* confirmed) {
    if (confirmed) *confirmed = false;
    CsvWriter csv;
    csv.comment(std::string("ibex ") + version +
                " | command=" + command_name(cfg.command) +
                " | config=fnv1a:" + hash_hex(config_hash(cfg)) + " | seed=" +
                (cfg.master_seed ? fmt(*cfg.master_seed) : std::string("none")));
    switch (cfg.command) {
        case Command::survival:
            render_survival(cfg, workers, csv);
            break;
        case Command::moments:
            render_moments(cfg, workers, csv);
            break;
        case Command::verify:
            render_verify(cfg, workers, csv, confirmed);
            break;
        case Command::sign_scan:
            render_sign_scan(cfg, csv);
            break;
        case Command::crosscheck:
            render_crosscheck(cfg, csv);
            break;
    }
    return csv.str();
}

RunResult run_experiment(ExperimentConfig cfg, const RunOptions& opts) {
    RunResult result;
    if (opts.seed_override) cfg.master_seed = *opts.seed_override;
    if (opts.output_override) cfg.output = *opts.output_override;
    if (cfg.output.empty()) {
        result.status = exit_config_error;
        result.message = "config field 'output': no output path (set it or pass --out)";
        return result;
    }
    if (opts.workers < 1) {
        result.status = exit_config_error;
        result.message = "workers must be >= 1";
        return result;
    }
    result.output_path = cfg.output;

    bool confirmed = false;
    std::string csv;
    try {
        csv = render_csv(cfg, opts.workers, &confirmed);
    } catch (const ConfigError& e) {
        result.status = exit_config_error;
        result.message = e.what();
        return result;
    } catch (const std::exception& e) {
        result.status = exit_runtime_failure;
        result.message = e.what();
        return result;
    }

    std::ofstream out(cfg.output, std::ios::binary);
    if (!out || !(out << csv) || !out.flush()) {
        result.status = exit_runtime_failure;
        result.message = "cannot write " + cfg.output;
        return result;
    }

    if (confirmed) {
        result.status = exit_confirmed_flag;
        result.message = "confirmed inequality violation; details in " + cfg.output;
    } else {
        result.message = "wrote " + cfg.output;
    }
    return result;
}

}  // namespace ibex
