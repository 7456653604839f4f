// gct: graph-cumulant two-sample testing toolkit.
//
// Subcommands: count, stats, test, roc, calibrate, pare.  All randomness is
// derived from --seed (required for the stochastic subcommands); identical
// configuration and seed produce byte-identical output files.
//
// Exit codes: 0 success, 2 configuration error, 3 data error.

#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gct/experiments.hpp"

using nlohmann::json;

namespace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt(double x) {
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

gct::Graph load_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open input file: " + path);
    try {
        if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
            json j;
            in >> j;
            return gct::Graph::from_json(j);
        }
        return gct::load_edge_list(in).graph;
    } catch (const std::exception& e) {
        throw DataError("failed to parse " + path + ": " + e.what());
    }
}

std::vector<gct::Graph> load_sample(const std::vector<std::string>& paths) {
    std::vector<gct::Graph> out;
    for (const auto& p : paths) out.push_back(load_graph(p));
    return out;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write output file: " + path);
    out << content;
}

// Everything a run depends on, echoed into every output artifact.
struct RunConfig {
    std::string subcommand;
    std::vector<std::string> inputs, inputs_b;
    int n = 256, s = 4, r = 3, trials = 0, threads = 0;
    double rho = 0.5;
    std::vector<double> eps_h, eps_a;
    std::uint64_t seed = 0;
    bool has_seed = false;
    std::string kind = "both", out, format = "json";

    json to_json() const {
        json j{{"subcommand", subcommand}, {"n", n},       {"s", s},
               {"r", r},                   {"rho", rho},   {"eps_h", eps_h},
               {"eps_a", eps_a},           {"trials", trials},
               {"kind", kind},             {"format", format},
               {"inputs", inputs},         {"inputs_b", inputs_b}};
        if (has_seed) j["seed"] = seed;
        return j;
    }

    std::string csv_header() const {
        std::ostringstream os;
        os << "# " << to_json().dump() << "\n";
        return os.str();
    }
};

std::vector<gct::StatKind> kinds_of(const RunConfig& cfg) {
    if (cfg.kind == "moment") return {gct::StatKind::Moment};
    if (cfg.kind == "cumulant") return {gct::StatKind::Cumulant};
    if (cfg.kind == "both") return {gct::StatKind::Moment, gct::StatKind::Cumulant};
    throw ConfigError("unknown kind: " + cfg.kind);
}

void emit(const RunConfig& cfg, const json& summary) {
    if (cfg.format == "csv") {
        std::cout << cfg.csv_header();
        for (const auto& [k, v] : summary.items())
            std::cout << k << "," << (v.is_string() ? v.get<std::string>() : v.dump())
                      << "\n";
    } else {
        std::cout << summary.dump(2) << "\n";
    }
    if (!cfg.out.empty()) write_file(cfg.out, summary.dump(2) + "\n");
}

json matrix_json(const gct::CovMatrix& m, const gct::Atlas& atlas) {
    json names = json::array();
    for (int id : m.basis) names.push_back(atlas.graph(id).name);
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.values.cols(); ++j) row.push_back(m.values(i, j));
        rows.push_back(std::move(row));
    }
    return {{"basis", names}, {"n", m.n}, {"s", m.s}, {"kind", m.kind}, {"values", rows}};
}

// --- subcommands -----------------------------------------------------------

int cmd_count(const RunConfig& cfg, const gct::Statistics& stats) {
    gct::Graph g = load_graph(cfg.inputs.at(0));
    const auto& atlas = stats.atlas();
    auto counts = stats.counter().count_all(g);
    auto basis = atlas.full_basis(cfg.r);
    auto mu = stats.counter().moments(counts, basis);
    json rows = json::array();
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const auto& pat = atlas.graph(basis[i]);
        rows.push_back({{"name", pat.name},
                        {"edges", pat.e},
                        {"vertices", pat.v},
                        {"count", gct::int128_to_string(counts.values[basis[i]])},
                        {"moment", mu.values[static_cast<Eigen::Index>(i)]}});
    }
    emit(cfg, {{"config", cfg.to_json()}, {"n", g.n()},
               {"num_edges", g.num_edges()}, {"patterns", rows}});
    return 0;
}

int cmd_stats(const RunConfig& cfg, const gct::Statistics& stats) {
    auto sample = load_sample(cfg.inputs);
    const auto& atlas = stats.atlas();
    auto summaries = stats.summarize(sample, cfg.r);
    auto conn = atlas.connected_basis(cfg.r);
    auto mu = stats.estimate_moments(summaries, conn);
    auto kappa = stats.estimate_cumulants(summaries, cfg.r);
    json names = json::array();
    for (int id : conn) names.push_back(atlas.graph(id).name);
    json jm = json::array(), jk = json::array();
    for (Eigen::Index i = 0; i < mu.values.size(); ++i) {
        jm.push_back(mu.values[i]);
        jk.push_back(kappa.values[i]);
    }
    emit(cfg, {{"config", cfg.to_json()},
               {"n", sample.front().n()},
               {"s", sample.size()},
               {"basis", names},
               {"moments", jm},
               {"cumulants", jk},
               {"cov_moment",
                matrix_json(stats.sample_covariance(summaries, cfg.r,
                                                    gct::StatKind::Moment), atlas)},
               {"cov_cumulant",
                matrix_json(stats.sample_covariance(summaries, cfg.r,
                                                    gct::StatKind::Cumulant), atlas)}});
    return 0;
}

int cmd_test(const RunConfig& cfg, const gct::Statistics& stats) {
    auto sample_a = load_sample(cfg.inputs);
    auto sample_b = load_sample(cfg.inputs_b);
    auto sum_a = stats.summarize(sample_a, cfg.r);
    auto sum_b = stats.summarize(sample_b, cfg.r);
    json reports = json::array();
    for (auto kind : kinds_of(cfg))
        reports.push_back(
            gct::two_sample_test(stats, sum_a, sum_b, cfg.r, kind).to_json());
    emit(cfg, {{"config", cfg.to_json()}, {"reports", reports}});
    return 0;
}

gct::TrialBatch run_configured_trials(const RunConfig& cfg, const gct::Statistics& stats) {
    gct::TrialConfig tc;
    tc.n = cfg.n;
    tc.s = cfg.s;
    tc.r = cfg.r;
    tc.trials = cfg.trials;
    tc.seed = cfg.seed;
    if (!cfg.inputs.empty() || !cfg.inputs_b.empty()) {
        if (cfg.inputs.size() != 1 || cfg.inputs_b.size() != 1)
            throw ConfigError("host mode needs exactly one --input and one --input-b");
        tc.host_a = load_graph(cfg.inputs[0]);
        tc.host_b = load_graph(cfg.inputs_b[0]);
    } else {
        double eh = cfg.eps_h.empty() ? 0.0 : cfg.eps_h.front();
        double ea = cfg.eps_a.empty() ? 0.0 : cfg.eps_a.front();
        try {
            tc.sbm_a = gct::SbmSpec::heterogeneous(cfg.rho, eh);
            tc.sbm_b = gct::SbmSpec::assortative(cfg.rho, ea);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    return gct::run_trials(stats, tc);
}

std::string trials_csv(const RunConfig& cfg, const gct::TrialBatch& batch) {
    std::ostringstream os;
    os << cfg.csv_header()
       << "trial,source_a,source_b,different,stat_moment,p_moment,degen_moment,"
          "stat_cumulant,p_cumulant,degen_cumulant\n";
    for (const auto& rec : batch.records)
        os << rec.trial << "," << rec.source_a << "," << rec.source_b << ","
           << rec.different << "," << fmt(rec.stat_moment) << "," << fmt(rec.p_moment)
           << "," << rec.degen_moment << "," << fmt(rec.stat_cumulant) << ","
           << fmt(rec.p_cumulant) << "," << rec.degen_cumulant << "\n";
    return os.str();
}

int cmd_roc(const RunConfig& cfg, const gct::Statistics& stats) {
    auto batch = run_configured_trials(cfg, stats);
    write_file(cfg.out + "_trials.csv", trials_csv(cfg, batch));

    json summary{{"config", cfg.to_json()}, {"trials", cfg.trials}};
    for (auto kind : kinds_of(cfg)) {
        std::string name = gct::to_string(kind);
        try {
            auto roc = gct::roc_auc(batch, kind);
            std::ostringstream os;
            os << cfg.csv_header() << "threshold,fpr,tpr\n";
            for (const auto& p : roc.points)
                os << fmt(p.threshold) << "," << fmt(p.fpr) << "," << fmt(p.tpr) << "\n";
            write_file(cfg.out + "_roc_" + name + ".csv", os.str());
            summary[name] = {{"auc", roc.auc},
                             {"positives", roc.positives},
                             {"negatives", roc.negatives},
                             {"excluded_degenerate", roc.excluded_degenerate}};
        } catch (const std::invalid_argument& e) {
            summary[name] = {{"error", e.what()}};
        }
    }
    std::cout << summary.dump(2) << "\n";
    write_file(cfg.out + "_summary.json", summary.dump(2) + "\n");
    return 0;
}

int cmd_calibrate(const RunConfig& cfg, const gct::Statistics& stats) {
    auto batch = run_configured_trials(cfg, stats);
    write_file(cfg.out + "_trials.csv", trials_csv(cfg, batch));
    const int dof = static_cast<int>(stats.atlas().connected_basis(cfg.r).size());

    json summary{{"config", cfg.to_json()}, {"dof", dof}};
    for (auto kind : kinds_of(cfg)) {
        std::string name = gct::to_string(kind);
        auto rep = gct::chi2_calibration(batch, kind, dof);
        std::ostringstream os;
        os << cfg.csv_header() << "bin_lo,bin_hi,count\n";
        for (std::size_t b = 0; b < rep.bin_counts.size(); ++b)
            os << fmt(rep.bin_edges[b]) << "," << fmt(rep.bin_edges[b + 1]) << ","
               << rep.bin_counts[b] << "\n";
        write_file(cfg.out + "_hist_" + name + ".csv", os.str());
        summary[name] = {{"ks", rep.ks},
                         {"exceed_95", rep.exceed_95},
                         {"exceed_99", rep.exceed_99},
                         {"null_trials", rep.trials}};
    }
    std::cout << summary.dump(2) << "\n";
    write_file(cfg.out + "_summary.json", summary.dump(2) + "\n");
    return 0;
}

int cmd_pare(const RunConfig& cfg, const gct::Statistics& stats) {
    if (cfg.eps_h.empty() || cfg.eps_a.empty())
        throw ConfigError("pare needs at least one --eps-h and one --eps-a");
    gct::PareReport report;
    try {
        report = gct::pare_grid(stats, cfg.rho, cfg.eps_h, cfg.eps_a, cfg.n,
                                cfg.trials, cfg.seed);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    std::ostringstream os;
    os << cfg.csv_header() << "rho,eps_h,eps_a,n,xi_draws,log_pare,se\n";
    for (const auto& cell : report.cells)
        os << fmt(cell.rho) << "," << fmt(cell.eps_h) << "," << fmt(cell.eps_a) << ","
           << cell.n << "," << cell.xi_draws << "," << fmt(cell.log_pare) << ","
           << fmt(cell.se) << "\n";
    write_file(cfg.out + "_grid.csv", os.str());
    json cells = json::array();
    for (const auto& cell : report.cells)
        cells.push_back({{"eps_h", cell.eps_h}, {"eps_a", cell.eps_a},
                         {"log_pare", cell.log_pare}, {"se", cell.se}});
    std::cout << json{{"config", cfg.to_json()}, {"cells", cells}}.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    CLI::App app{"graph-cumulant two-sample testing toolkit"};
    app.require_subcommand(1);

    auto add_common = [&](CLI::App* sub, bool stochastic) {
        sub->add_option("--input", cfg.inputs, "input graph file(s) for sample A");
        sub->add_option("--input-b", cfg.inputs_b, "input graph file(s) for sample B");
        sub->add_option("--r", cfg.r, "maximum subgraph order")->check(CLI::Range(1, 3));
        sub->add_option("--kind", cfg.kind, "statistic kind")
            ->check(CLI::IsMember({"moment", "cumulant", "both"}));
        sub->add_option("--out", cfg.out, "output path (prefix for multi-file commands)");
        sub->add_option("--format", cfg.format, "stdout format")
            ->check(CLI::IsMember({"json", "csv"}));
        sub->add_option("--threads", cfg.threads, "worker thread cap (0 = auto)");
        if (stochastic) {
            sub->add_option("--n", cfg.n, "nodes per graph");
            sub->add_option("--s", cfg.s, "graphs per sample");
            sub->add_option("--trials", cfg.trials,
                            "trial count (xi draws for pare)")->required();
            auto* seed =
                sub->add_option("--seed", cfg.seed, "RNG seed (required; no wall-clock default)");
            seed->required();
            sub->parse_complete_callback([&] { cfg.has_seed = true; });
            sub->add_option("--rho", cfg.rho, "edge density of the SBM sources");
            sub->add_option("--eps-h", cfg.eps_h, "heterogeneity parameter(s)");
            sub->add_option("--eps-a", cfg.eps_a, "assortativity parameter(s)");
        }
    };

    auto* count = app.add_subcommand("count", "exact pattern counts and moments of one graph");
    add_common(count, false);
    auto* stats_cmd = app.add_subcommand("stats", "moments, cumulants, and covariances of a sample");
    add_common(stats_cmd, false);
    auto* test = app.add_subcommand("test", "two-sample test between samples A and B");
    add_common(test, false);
    auto* roc = app.add_subcommand("roc", "coin-flip trials, ROC curves, and AUC");
    add_common(roc, true);
    auto* calibrate = app.add_subcommand("calibrate", "null-trial chi-square calibration");
    add_common(calibrate, true);
    auto* pare = app.add_subcommand("pare", "asymptotic relative efficiency grid");
    add_common(pare, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (count->parsed() || stats_cmd->parsed()) {
            if (cfg.inputs.empty()) throw ConfigError("--input is required");
        }
        if (test->parsed() && (cfg.inputs.empty() || cfg.inputs_b.empty()))
            throw ConfigError("test needs --input and --input-b");
        if ((roc->parsed() || calibrate->parsed() || pare->parsed()) && cfg.out.empty())
            throw ConfigError("--out is required for this subcommand");

        gct::Atlas atlas(6);  // covers the full covariance basis for any r <= 3
        gct::Counter counter(atlas);
        gct::Statistics stats(counter);

        cfg.subcommand = app.get_subcommands().front()->get_name();
        if (count->parsed()) return cmd_count(cfg, stats);
        if (stats_cmd->parsed()) return cmd_stats(cfg, stats);
        if (test->parsed()) return cmd_test(cfg, stats);
        if (roc->parsed()) return cmd_roc(cfg, stats);
        if (calibrate->parsed()) return cmd_calibrate(cfg, stats);
        if (pare->parsed()) return cmd_pare(cfg, stats);
        throw ConfigError("no subcommand");
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    }
}
