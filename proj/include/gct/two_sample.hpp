#ifndef GCT_TWO_SAMPLE_HPP
#define GCT_TWO_SAMPLE_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "gct/chi2.hpp"
#include "gct/statistics.hpp"

namespace gct {

struct TestReport {
    std::string kind;  // "moment" | "cumulant"
    int r = 0;
    int dof = 0;
    int rank = 0;
    bool degenerate = false;
    double statistic = 0.0;
    double p_value = 1.0;
    int n = 0;
    int s_a = 0;
    int s_b = 0;
    std::vector<std::string> basis_names;

    nlohmann::json to_json() const {
        return {{"kind", kind},        {"r", r},
                {"dof", dof},          {"rank", rank},
                {"degenerate", degenerate}, {"statistic", statistic},
                {"p_value", p_value},  {"n", n},
                {"s_a", s_a},          {"s_b", s_b},
                {"basis", basis_names}};
    }
};

// Squared Mahalanobis distance with a spectral pseudoinverse: eigenvalues
// of the pooled covariance at or below tau = dof * lambda_max * 1e-12 are
// discarded (this also keeps numerically negative ones out of the inverse).
inline TestReport mahalanobis_sq(const Eigen::VectorXd& x_a, const Eigen::VectorXd& x_b,
                                 const CovMatrix& sigma_a, const CovMatrix& sigma_b) {
    if (sigma_a.basis != sigma_b.basis)
        throw std::invalid_argument("mahalanobis_sq: covariance bases differ");
    const auto dof = static_cast<int>(sigma_a.basis.size());
    if (x_a.size() != dof || x_b.size() != dof)
        throw std::invalid_argument("mahalanobis_sq: vector/basis size mismatch");
    for (const CovMatrix* m : {&sigma_a, &sigma_b}) {
        if (m->values.rows() != dof || m->values.cols() != dof)
            throw std::invalid_argument("mahalanobis_sq: matrix/basis size mismatch");
        double scale = std::max(1.0, m->values.cwiseAbs().maxCoeff());
        if ((m->values - m->values.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
            throw std::invalid_argument("mahalanobis_sq: covariance not symmetric");
    }

    Eigen::MatrixXd pooled = sigma_a.values + sigma_b.values;
    pooled = 0.5 * (pooled + pooled.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(pooled);
    const Eigen::VectorXd& lam = es.eigenvalues();
    double lam_max = lam.maxCoeff();
    double tau = dof * std::max(lam_max, 0.0) * 1e-12;

    Eigen::VectorXd diff = x_a - x_b;
    Eigen::VectorXd proj = es.eigenvectors().transpose() * diff;
    double d2 = 0.0;
    int rank = 0;
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        if (lam[i] > tau) {
            d2 += proj[i] * proj[i] / lam[i];
            ++rank;
        }
    }

    TestReport rep;
    rep.dof = dof;
    rep.rank = rank;
    rep.degenerate = rank < dof;
    rep.statistic = d2;
    rep.p_value = chi2_sf(d2, dof);
    return rep;
}

// Two-sample pipeline over per-graph summaries (one counting pass per
// graph, shared by estimators and covariances).
inline TestReport two_sample_test(const Statistics& stats,
                                  const std::vector<MomentVector>& sum_a,
                                  const std::vector<MomentVector>& sum_b, int r,
                                  StatKind kind) {
    if (sum_a.empty() || sum_b.empty())
        throw std::invalid_argument("two_sample_test: empty sample");

    const auto& atlas = stats.atlas();
    auto basis = atlas.connected_basis(r);

    Eigen::VectorXd x_a, x_b;
    if (kind == StatKind::Moment) {
        x_a = stats.estimate_moments(sum_a, basis).values;
        x_b = stats.estimate_moments(sum_b, basis).values;
    } else {
        x_a = stats.estimate_cumulants(sum_a, r).values;
        x_b = stats.estimate_cumulants(sum_b, r).values;
    }
    CovMatrix sigma_a = stats.sample_covariance(sum_a, r, kind);
    CovMatrix sigma_b = stats.sample_covariance(sum_b, r, kind);

    TestReport rep = mahalanobis_sq(x_a, x_b, sigma_a, sigma_b);
    rep.kind = to_string(kind);
    rep.r = r;
    rep.n = sum_a.front().n;
    rep.s_a = static_cast<int>(sum_a.size());
    rep.s_b = static_cast<int>(sum_b.size());
    for (int id : basis) rep.basis_names.push_back(atlas.graph(id).name);
    return rep;
}

inline TestReport two_sample_test(const Statistics& stats,
                                  const std::vector<Graph>& sample_a,
                                  const std::vector<Graph>& sample_b, int r,
                                  StatKind kind) {
    return two_sample_test(stats, stats.summarize(sample_a, r),
                           stats.summarize(sample_b, r), r, kind);
}

} // namespace gct

#endif
