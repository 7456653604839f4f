#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gct/experiments.hpp"

using namespace gct;

namespace {

const Statistics& stats6() {
    static Atlas atlas(6);
    static Counter counter(atlas);
    static Statistics s(counter);
    return s;
}

}  // namespace

TEST_CASE("roc on fixed scores") {
    SUBCASE("perfectly separated scores give AUC 1") {
        auto roc = roc_from_scores({{5.0, true}, {4.0, true}, {1.0, false}, {0.5, false}});
        CHECK(roc.auc == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(roc.points.front().tpr == 0.0);
        CHECK(roc.points.back().tpr == 1.0);
        CHECK(roc.points.back().fpr == 1.0);
    }
    SUBCASE("one score per class") {
        CHECK(roc_from_scores({{2.0, true}, {1.0, false}}).auc ==
              doctest::Approx(1.0).epsilon(1e-15));
        // Tied scores collapse to one threshold step worth 1/2.
        CHECK(roc_from_scores({{1.0, true}, {1.0, false}}).auc ==
              doctest::Approx(0.5).epsilon(1e-15));
    }
    SUBCASE("random scores hover at 1/2") {
        auto rng = make_rng(2000);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::vector<std::pair<double, bool>> scored;
        for (int i = 0; i < 10000; ++i) scored.emplace_back(unif(rng), (rng() & 1u) != 0);
        CHECK(roc_from_scores(scored).auc == doctest::Approx(0.5).epsilon(0.04));
    }
    SUBCASE("AUC is invariant under strictly monotone transforms") {
        auto rng = make_rng(2001);
        std::uniform_real_distribution<double> unif(0.0, 2.0);
        std::vector<std::pair<double, bool>> raw, cubed, expd;
        for (int i = 0; i < 500; ++i) {
            double x = unif(rng);
            bool pos = (rng() & 1u) != 0;
            raw.emplace_back(x, pos);
            cubed.emplace_back(x * x * x, pos);
            expd.emplace_back(std::exp(x), pos);
        }
        double base = roc_from_scores(raw).auc;
        CHECK(roc_from_scores(cubed).auc == doctest::Approx(base).epsilon(1e-15));
        CHECK(roc_from_scores(expd).auc == doctest::Approx(base).epsilon(1e-15));
    }
    SUBCASE("an empty truth class is rejected") {
        CHECK_THROWS_AS(roc_from_scores({{1.0, true}, {2.0, true}}),
                        std::invalid_argument);
        CHECK_THROWS_AS(roc_from_scores({}), std::invalid_argument);
    }
}

TEST_CASE("calibration against synthetic chi-square draws") {
    const int dof = 5, trials = 2000;
    auto rng = make_rng(2100);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> draws;
    for (int i = 0; i < trials; ++i) {
        double x = 0.0;
        for (int d = 0; d < dof; ++d) {
            double z = normal(rng);
            x += z * z;
        }
        draws.push_back(x);
    }
    auto rep = calibrate_statistics(draws, dof);
    CHECK(rep.trials == trials);
    CHECK(rep.ks <= 0.05);
    CHECK(rep.exceed_95 == doctest::Approx(0.05).epsilon(0.5));
    CHECK(rep.exceed_99 < 0.03);
    REQUIRE(rep.bin_counts.size() == 50);
    int total = 0, lo = trials, hi = 0;
    for (int c : rep.bin_counts) {
        total += c;
        lo = std::min(lo, c);
        hi = std::max(hi, c);
    }
    CHECK(total == trials);
    // Equal-probability bins: expected 40 per bin, Poisson-ish spread.
    CHECK(lo > 10);
    CHECK(hi < 90);

    CHECK_THROWS_AS(calibrate_statistics(std::vector<double>(199, 1.0), dof),
                    std::invalid_argument);
}

TEST_CASE("trials with identical sources carry no signal") {
    TrialConfig config;
    config.sbm_a = SbmSpec::erdos_renyi(0.3);
    config.sbm_b = SbmSpec::erdos_renyi(0.3);
    config.n = 24;
    config.s = 2;
    config.r = 3;
    config.trials = 160;
    config.seed = 2200;
    auto batch = run_trials(stats6(), config);
    REQUIRE(static_cast<int>(batch.records.size()) == config.trials);

    int different = 0, degen_cum = 0;
    for (const auto& rec : batch.records) {
        CHECK(rec.different == (rec.source_a != rec.source_b));
        if (rec.different) ++different;
        if (rec.degen_cumulant) ++degen_cum;
        // s = 2 < 4: the moment test cannot resolve its full basis.
        CHECK(rec.degen_moment);
        CHECK(std::isfinite(rec.stat_cumulant));
    }
    // At this small n the inferred covariance is occasionally rank-deficient,
    // but the cumulant test must answer in the large majority of trials.
    CHECK(degen_cum < config.trials / 4);
    // Two fair coins: truth "different" half the time, within 4 sigma.
    double se = std::sqrt(0.25 * config.trials);
    CHECK(std::abs(different - config.trials / 2.0) < 4 * se);

    auto roc = roc_auc(batch, StatKind::Cumulant);
    CHECK(roc.excluded_degenerate == 0);
    CHECK(roc.auc == doctest::Approx(0.5).epsilon(0.35));

    // Every moment trial is degenerate, so the moment ROC has no scores.
    CHECK_THROWS_AS(roc_auc(batch, StatKind::Moment), std::invalid_argument);

    // Determinism: the batch is a pure function of config + seed.
    auto batch2 = run_trials(stats6(), config);
    for (std::size_t i = 0; i < batch.records.size(); ++i) {
        CHECK(batch.records[i].stat_cumulant == batch2.records[i].stat_cumulant);
        CHECK(batch.records[i].source_a == batch2.records[i].source_a);
    }

    // Too few null trials for calibration at this size.
    CHECK_THROWS_AS(chi2_calibration(batch, StatKind::Cumulant, 5),
                    std::invalid_argument);
}

TEST_CASE("trials with well-separated sources reach high AUC") {
    TrialConfig config;
    config.sbm_a = SbmSpec::erdos_renyi(0.2);
    config.sbm_b = SbmSpec::erdos_renyi(0.6);
    config.n = 24;
    config.s = 4;
    config.r = 3;
    config.trials = 80;
    config.seed = 2300;
    auto batch = run_trials(stats6(), config);

    auto cum = roc_auc(batch, StatKind::Cumulant);
    CHECK(cum.auc >= 0.95);
    // s = 4 resolves the moment basis: nothing excluded.
    auto mom = roc_auc(batch, StatKind::Moment);
    CHECK(mom.excluded_degenerate == 0);
    CHECK(mom.auc >= 0.9);
}

TEST_CASE("host-subsampling trials run with varying graph sizes") {
    auto rng = make_rng(2400);
    Graph host_a = sample_sbm(SbmSpec::erdos_renyi(0.3), 64, rng);
    Graph host_b = sample_sbm(SbmSpec::erdos_renyi(0.3), 64, rng);

    TrialConfig config;
    config.host_a = host_a;
    config.host_b = host_b;
    config.n = 28;
    config.s = 2;
    config.r = 2;
    config.trials = 40;
    config.seed = 2401;
    auto batch = run_trials(stats6(), config);
    REQUIRE(batch.records.size() == 40);
    for (const auto& rec : batch.records) {
        CHECK(std::isfinite(rec.stat_cumulant));
        CHECK(rec.p_cumulant >= 0.0);
        CHECK(rec.p_cumulant <= 1.0);
    }
}

TEST_CASE("trial configuration validation") {
    TrialConfig config;
    config.n = 24;
    config.trials = 10;
    CHECK_THROWS_AS(run_trials(stats6(), config), std::invalid_argument);
    config.sbm_a = SbmSpec::erdos_renyi(0.3);
    CHECK_THROWS_AS(run_trials(stats6(), config), std::invalid_argument);
    config.sbm_b = SbmSpec::erdos_renyi(0.3);
    config.trials = 0;
    CHECK_THROWS_AS(run_trials(stats6(), config), std::invalid_argument);
}

TEST_CASE("pare cell mechanics") {
    const auto& stats = stats6();
    auto cell = pare_cell(stats, 0.5, 0.25, 0.25, 64, 4000, 2500);
    REQUIRE(cell.lambda_mu.size() == 10);
    REQUIRE(cell.lambda_kappa.size() == 10);
    CHECK(cell.lambda_mu.minCoeff() >= 0.0);
    CHECK(cell.lambda_kappa.minCoeff() >= 0.0);
    CHECK(cell.lambda_mu.maxCoeff() > 0.0);
    CHECK(cell.lambda_kappa.maxCoeff() > 0.0);
    CHECK(std::isfinite(cell.log_pare));
    CHECK(cell.se > 0.0);

    SUBCASE("deterministic for a fixed seed") {
        auto again = pare_cell(stats, 0.5, 0.25, 0.25, 64, 4000, 2500);
        CHECK(again.log_pare == cell.log_pare);
        CHECK(again.se == cell.se);
    }

    SUBCASE("standard error shrinks like 1/sqrt(draws)") {
        auto big = pare_cell(stats, 0.5, 0.25, 0.25, 64, 16000, 2500);
        CHECK(big.se == doctest::Approx(cell.se / 2.0).epsilon(0.35));
        CHECK(big.log_pare == doctest::Approx(cell.log_pare).epsilon(1.0));
    }

    SUBCASE("shared draws agree with independently estimated terms") {
        // Estimate <log sum lambda xi^2> separately per kind with fresh
        // draws; the difference must match the shared-draw estimate within
        // combined uncertainty.
        auto term = [&](const Eigen::VectorXd& lam, std::uint64_t seed, double& se_out) {
            auto rng = make_rng(seed);
            std::normal_distribution<double> normal(0.0, 1.0);
            const int draws = 20000;
            double acc = 0.0, acc2 = 0.0;
            for (int d = 0; d < draws; ++d) {
                double q = 0.0;
                for (Eigen::Index i = 0; i < lam.size(); ++i) {
                    double z = normal(rng);
                    q += lam[i] * z * z;
                }
                double v = std::log(q);
                acc += v;
                acc2 += v * v;
            }
            double mean = acc / draws;
            se_out = std::sqrt((acc2 / draws - mean * mean) / draws);
            return mean;
        };
        double se_k = 0.0, se_m = 0.0;
        double independent = term(cell.lambda_kappa, 77, se_k) -
                             term(cell.lambda_mu, 78, se_m);
        double combined = std::sqrt(se_k * se_k + se_m * se_m + cell.se * cell.se);
        CHECK(std::abs(independent - cell.log_pare) < 4 * combined);
    }

    SUBCASE("equal efficiency matrices give zero log-PARE") {
        auto rng = make_rng(2501);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (int d = 0; d < 100; ++d) {
            double qa = 0.0, qb = 0.0;
            for (Eigen::Index i = 0; i < cell.lambda_mu.size(); ++i) {
                double z = normal(rng);
                qa += cell.lambda_mu[i] * z * z;
                qb += cell.lambda_mu[i] * z * z;
            }
            CHECK(std::log(qa) - std::log(qb) == 0.0);
        }
    }
}

TEST_CASE("pare grid enumerates cells deterministically") {
    const auto& stats = stats6();
    auto report = pare_grid(stats, 0.5, {0.1, 0.3}, {0.1, 0.3}, 64, 2000, 2600);
    REQUIRE(report.cells.size() == 4);
    CHECK(report.cells[0].eps_h == 0.1);
    CHECK(report.cells[0].eps_a == 0.1);
    CHECK(report.cells[3].eps_h == 0.3);
    CHECK(report.cells[3].eps_a == 0.3);
    for (const auto& cell : report.cells) {
        CHECK(std::isfinite(cell.log_pare));
        // The cumulant basis should not be meaningfully worse anywhere.
        CHECK(cell.log_pare > -4 * cell.se);
    }
    auto again = pare_grid(stats, 0.5, {0.1, 0.3}, {0.1, 0.3}, 64, 2000, 2600);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(again.cells[i].log_pare == report.cells[i].log_pare);
}
