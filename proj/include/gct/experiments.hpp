#ifndef GCT_EXPERIMENTS_HPP
#define GCT_EXPERIMENTS_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "gct/chi2.hpp"
#include "gct/models.hpp"
#include "gct/two_sample.hpp"

namespace gct {

// ---------------------------------------------------------------------------
// Coin-flip two-sample trials
// ---------------------------------------------------------------------------

// Sources are either two SBM distributions or two host networks (graphs
// sampled by i.i.d. node subsampling with expected size n).
struct TrialConfig {
    std::optional<SbmSpec> sbm_a;
    std::optional<SbmSpec> sbm_b;
    std::optional<Graph> host_a;
    std::optional<Graph> host_b;
    int n = 0;        // exact size for SBM sources, expected size for hosts
    int s = 1;        // graphs per sample
    int r = 3;        // statistic order
    int trials = 0;
    std::uint64_t seed = 0;
};

struct TrialRecord {
    int trial = 0;
    int source_a = 0;  // 0 or 1
    int source_b = 0;
    bool different = false;
    double stat_moment = 0.0;
    double stat_cumulant = 0.0;
    double p_moment = 1.0;
    double p_cumulant = 1.0;
    bool degen_moment = false;
    bool degen_cumulant = false;
};

struct TrialBatch {
    TrialConfig config;
    std::vector<TrialRecord> records;
};

// Each trial flips two independent fair coins for the samples' sources:
// half the trials compare different sources, the "same" half splits evenly
// between the two sources.
inline TrialBatch run_trials(const Statistics& stats, const TrialConfig& config) {
    const bool sbm_mode = config.sbm_a.has_value();
    if (sbm_mode != config.sbm_b.has_value() ||
        sbm_mode == (config.host_a.has_value() && config.host_b.has_value()))
        throw std::invalid_argument("run_trials: provide two SBMs or two host graphs");
    if (config.trials <= 0 || config.s < 1 || config.n < 2)
        throw std::invalid_argument("run_trials: invalid trial configuration");

    TrialBatch batch;
    batch.config = config;
    batch.records.reserve(static_cast<std::size_t>(config.trials));

    for (int t = 0; t < config.trials; ++t) {
        auto rng = make_rng(config.seed, static_cast<std::uint64_t>(t));
        TrialRecord rec;
        rec.trial = t;
        rec.source_a = static_cast<int>(rng() & 1u);
        rec.source_b = static_cast<int>(rng() & 1u);
        rec.different = rec.source_a != rec.source_b;

        auto draw_sample = [&](int source) {
            std::vector<MomentVector> sum;
            sum.reserve(static_cast<std::size_t>(config.s));
            for (int i = 0; i < config.s; ++i) {
                Graph g = sbm_mode
                              ? sample_sbm(source == 0 ? *config.sbm_a : *config.sbm_b,
                                           config.n, rng)
                              : subsample_nodes(source == 0 ? *config.host_a
                                                            : *config.host_b,
                                                config.n, rng);
                sum.push_back(stats.summarize(g, config.r));
            }
            return sum;
        };
        auto sum_a = draw_sample(rec.source_a);
        auto sum_b = draw_sample(rec.source_b);

        auto mom = two_sample_test(stats, sum_a, sum_b, config.r, StatKind::Moment);
        auto cum = two_sample_test(stats, sum_a, sum_b, config.r, StatKind::Cumulant);
        rec.stat_moment = mom.statistic;
        rec.p_moment = mom.p_value;
        rec.degen_moment = mom.degenerate;
        rec.stat_cumulant = cum.statistic;
        rec.p_cumulant = cum.p_value;
        rec.degen_cumulant = cum.degenerate;
        batch.records.push_back(rec);
    }
    return batch;
}

// ---------------------------------------------------------------------------
// ROC / AUC
// ---------------------------------------------------------------------------

struct RocPoint {
    double threshold = 0.0;
    double fpr = 0.0;
    double tpr = 0.0;
};

struct RocResult {
    std::vector<RocPoint> points;  // from (0,0) to (1,1)
    double auc = 0.5;
    int positives = 0;  // truth "different"
    int negatives = 0;
    int excluded_degenerate = 0;
};

// Threshold sweep over the scores ("different" is the positive class);
// tied scores collapse into a single threshold step, which makes the
// trapezoidal area equal to the tie-corrected Mann-Whitney statistic.
inline RocResult roc_from_scores(const std::vector<std::pair<double, bool>>& scored) {
    RocResult out;
    for (const auto& [score, positive] : scored) (positive ? out.positives : out.negatives)++;
    if (out.positives == 0 || out.negatives == 0)
        throw std::invalid_argument("roc_auc: need both truth classes");

    auto sorted = scored;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });

    out.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    double tp = 0, fp = 0, auc = 0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        double tp_step = 0, fp_step = 0;
        while (j < sorted.size() && sorted[j].first == sorted[i].first) {
            (sorted[j].second ? tp_step : fp_step) += 1.0;
            ++j;
        }
        // Trapezoid over the tie block.
        auc += (tp + tp_step / 2.0) * fp_step;
        tp += tp_step;
        fp += fp_step;
        out.points.push_back({sorted[i].first, fp / out.negatives, tp / out.positives});
        i = j;
    }
    out.auc = auc / (static_cast<double>(out.positives) * out.negatives);
    return out;
}

inline RocResult roc_auc(const TrialBatch& batch, StatKind kind) {
    std::vector<std::pair<double, bool>> scored;
    int excluded = 0;
    for (const auto& rec : batch.records) {
        bool degen = kind == StatKind::Moment ? rec.degen_moment : rec.degen_cumulant;
        if (kind == StatKind::Moment && degen) {
            ++excluded;  // the moment test "fails to give an answer"
            continue;
        }
        double score = kind == StatKind::Moment ? rec.stat_moment : rec.stat_cumulant;
        scored.emplace_back(score, rec.different);
    }
    RocResult out = roc_from_scores(scored);
    out.excluded_degenerate = excluded;
    return out;
}

// ---------------------------------------------------------------------------
// Chi-square null calibration
// ---------------------------------------------------------------------------

struct CalibrationReport {
    int dof = 0;
    int trials = 0;
    double ks = 0.0;           // one-sample KS distance to chi2_dof
    double exceed_95 = 0.0;    // fraction above the chi2 0.95 quantile
    double exceed_99 = 0.0;
    std::vector<int> bin_counts;  // 50 equal-probability bins under chi2_dof
    std::vector<double> bin_edges;
};

inline CalibrationReport calibrate_statistics(std::vector<double> stats_null, int dof) {
    if (stats_null.size() < 200)
        throw std::invalid_argument("chi2_calibration: need at least 200 null trials");
    CalibrationReport rep;
    rep.dof = dof;
    rep.trials = static_cast<int>(stats_null.size());

    std::sort(stats_null.begin(), stats_null.end());
    const auto m = static_cast<double>(stats_null.size());
    double ks = 0.0;
    for (std::size_t i = 0; i < stats_null.size(); ++i) {
        double f = chi2_cdf(stats_null[i], dof);
        ks = std::max(ks, std::abs((static_cast<double>(i) + 1.0) / m - f));
        ks = std::max(ks, std::abs(static_cast<double>(i) / m - f));
    }
    rep.ks = ks;

    double q95 = chi2_quantile(0.95, dof);
    double q99 = chi2_quantile(0.99, dof);
    rep.exceed_95 = static_cast<double>(
                        std::count_if(stats_null.begin(), stats_null.end(),
                                      [&](double x) { return x > q95; })) / m;
    rep.exceed_99 = static_cast<double>(
                        std::count_if(stats_null.begin(), stats_null.end(),
                                      [&](double x) { return x > q99; })) / m;

    const int bins = 50;
    rep.bin_counts.assign(bins, 0);
    for (int b = 0; b <= bins; ++b)
        rep.bin_edges.push_back(b == bins ? std::numeric_limits<double>::infinity()
                                          : chi2_quantile(static_cast<double>(b) / bins, dof));
    for (double x : stats_null) {
        auto it = std::upper_bound(rep.bin_edges.begin() + 1, rep.bin_edges.end(), x);
        auto idx = static_cast<std::size_t>(it - rep.bin_edges.begin()) - 1;
        rep.bin_counts[std::min<std::size_t>(idx, bins - 1)]++;
    }
    return rep;
}

// Calibration over the null ("same source") trials of a batch.
inline CalibrationReport chi2_calibration(const TrialBatch& batch, StatKind kind, int dof) {
    std::vector<double> null_stats;
    for (const auto& rec : batch.records)
        if (!rec.different)
            null_stats.push_back(kind == StatKind::Moment ? rec.stat_moment
                                                          : rec.stat_cumulant);
    return calibrate_statistics(std::move(null_stats), dof);
}

// ---------------------------------------------------------------------------
// Pitman asymptotic relative efficiency (PARE)
// ---------------------------------------------------------------------------

struct PareCell {
    double rho = 0.0;
    double eps_h = 0.0;
    double eps_a = 0.0;
    int n = 0;
    int xi_draws = 0;
    double log_pare = 0.0;  // <log PARE>; positive means cumulants win
    double se = 0.0;        // Monte Carlo standard error
    Eigen::VectorXd lambda_mu;
    Eigen::VectorXd lambda_kappa;
};

namespace detail {

inline Eigen::MatrixXd sym_pinv(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    double lam_max = es.eigenvalues().maxCoeff();
    double tau = static_cast<double>(m.rows()) * std::max(lam_max, 0.0) * 1e-12;
    Eigen::VectorXd inv = es.eigenvalues();
    for (Eigen::Index i = 0; i < inv.size(); ++i)
        inv[i] = inv[i] > tau ? 1.0 / inv[i] : 0.0;
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace detail

// The efficiency matrix M = D^{1/2} J^T Sigma^{-1} J D^{1/2} for one kind,
// plus the analogous cumulant version via the chain rule through the
// moment->cumulant transform.
inline PareCell pare_cell(const Statistics& stats, double rho, double eps_h,
                          double eps_a, int n, int xi_draws, std::uint64_t seed) {
    const auto& atlas = stats.atlas();
    const int r = 3;
    auto spec = blend_kronecker(rho, eps_h, eps_a).sbm;
    const int dof = detail::upper_tri_size(static_cast<int>(spec.num_blocks()));

    // Analytic distribution moments to order 2r and their Jacobians.
    auto full2r = atlas.full_basis(2 * r);
    MomentVector mu2r;
    mu2r.basis = full2r;
    mu2r.n = n;
    mu2r.values.resize(static_cast<Eigen::Index>(full2r.size()));
    for (std::size_t i = 0; i < full2r.size(); ++i)
        mu2r.values[static_cast<Eigen::Index>(i)] = sbm_moment(atlas, full2r[i], spec);

    auto full_r = atlas.full_basis(r);
    auto conn_r = atlas.connected_basis(r);
    Eigen::MatrixXd j_full(static_cast<Eigen::Index>(full_r.size()), dof);
    for (std::size_t i = 0; i < full_r.size(); ++i)
        j_full.row(static_cast<Eigen::Index>(i)) =
            sbm_moment_jacobian(atlas, full_r[i], spec).transpose();

    // Moment side: connected rows of the Jacobian.
    Eigen::MatrixXd j_mu(static_cast<Eigen::Index>(conn_r.size()), dof);
    for (std::size_t i = 0; i < conn_r.size(); ++i) {
        auto it = std::find(full_r.begin(), full_r.end(), conn_r[i]);
        j_mu.row(static_cast<Eigen::Index>(i)) =
            j_full.row(static_cast<Eigen::Index>(it - full_r.begin()));
    }

    // Cumulant side: the linear map from full-basis moments to cumulants,
    // applied to the full-basis Jacobian (distribution moments factorize
    // over disjoint unions, so this is the exact chain rule).
    Eigen::MatrixXd j_kappa = stats.unbiased_map(r) * j_full;

    CovMatrix sigma_mu = stats.moment_covariance(mu2r, n, conn_r);
    CovMatrix sigma_kappa = stats.cumulant_covariance(mu2r, n, r);

    Eigen::VectorXd d_half = perturbation_scale(spec).cwiseSqrt();
    auto build_m = [&](const Eigen::MatrixXd& j, const Eigen::MatrixXd& sigma) {
        Eigen::MatrixXd m = d_half.asDiagonal() * j.transpose() *
                            detail::sym_pinv(sigma) * j * d_half.asDiagonal();
        return clamp_psd(0.5 * (m + m.transpose()), 1e-6);
    };
    Eigen::MatrixXd m_mu = build_m(j_mu, sigma_mu.values);
    Eigen::MatrixXd m_kappa = build_m(j_kappa, sigma_kappa.values);
    if (m_mu.cwiseAbs().maxCoeff() == 0.0 || m_kappa.cwiseAbs().maxCoeff() == 0.0)
        throw std::runtime_error("pare_cell: zero efficiency matrix");

    PareCell cell;
    cell.rho = rho;
    cell.eps_h = eps_h;
    cell.eps_a = eps_a;
    cell.n = n;
    cell.xi_draws = xi_draws;
    // cwiseMax absorbs residual -1e-15-scale eigensolver roundoff.
    cell.lambda_mu = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m_mu)
                         .eigenvalues().cwiseMax(0.0);
    cell.lambda_kappa = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m_kappa)
                            .eigenvalues().cwiseMax(0.0);

    // <log PARE> = <log sum lambda^kappa xi^2> - <log sum lambda^mu xi^2>,
    // Monte Carlo over shared standard-normal xi draws.
    auto rng = make_rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    double acc = 0.0, acc2 = 0.0;
    for (int d = 0; d < xi_draws; ++d) {
        double qk = 0.0, qm = 0.0;
        for (int i = 0; i < dof; ++i) {
            double x = normal(rng);
            double x2 = x * x;
            qk += std::max(cell.lambda_kappa[i], 0.0) * x2;
            qm += std::max(cell.lambda_mu[i], 0.0) * x2;
        }
        double v = std::log(qk) - std::log(qm);
        acc += v;
        acc2 += v * v;
    }
    const auto m = static_cast<double>(xi_draws);
    cell.log_pare = acc / m;
    cell.se = std::sqrt(std::max(acc2 / m - cell.log_pare * cell.log_pare, 0.0) / m);
    return cell;
}

struct PareReport {
    int n = 0;
    int xi_draws = 0;
    std::vector<PareCell> cells;
};

inline PareReport pare_grid(const Statistics& stats, double rho,
                            const std::vector<double>& eps_h_grid,
                            const std::vector<double>& eps_a_grid, int n,
                            int xi_draws, std::uint64_t seed) {
    PareReport report;
    report.n = n;
    report.xi_draws = xi_draws;
    std::uint64_t idx = 0;
    for (double eh : eps_h_grid)
        for (double ea : eps_a_grid)
            report.cells.push_back(
                pare_cell(stats, rho, eh, ea, n, xi_draws, derive_seed(seed, idx++)));
    return report;
}

} // namespace gct

#endif
