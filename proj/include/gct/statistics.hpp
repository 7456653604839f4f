#ifndef GCT_STATISTICS_HPP
#define GCT_STATISTICS_HPP

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gct/counting.hpp"

namespace gct {

struct CumulantVector {
    std::vector<int> basis;
    Eigen::VectorXd values;
    int n = 0;
    int s = 1;
};

struct CovMatrix {
    std::vector<int> basis;
    Eigen::MatrixXd values;
    int n = 0;
    int s = 1;
    std::string kind;  // "moment" | "cumulant"
};

enum class StatKind { Moment, Cumulant };

// Integer polynomial in moments: sorted atlas-id monomials -> coefficient.
using MomentMonomial = std::vector<int>;
using MomentPolynomial = std::map<MomentMonomial, std::int64_t>;

inline const char* to_string(StatKind k) {
    return k == StatKind::Moment ? "moment" : "cumulant";
}

// Clamp eigenvalues in [-rel_tol * lambda_max, 0) to zero; anything more
// negative indicates a real PSD violation and is an error.
inline Eigen::MatrixXd clamp_psd(const Eigen::MatrixXd& m, double rel_tol = 1e-9) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    const auto& vals = es.eigenvalues();
    double lambda_max = vals.size() ? vals.maxCoeff() : 0.0;
    double floor = -rel_tol * std::max(lambda_max, 0.0);
    Eigen::VectorXd clamped = vals;
    for (Eigen::Index i = 0; i < clamped.size(); ++i) {
        if (clamped[i] < floor)
            throw std::runtime_error("clamp_psd: covariance has a genuinely negative eigenvalue");
        if (clamped[i] < 0.0) clamped[i] = 0.0;
    }
    return es.eigenvectors() * clamped.asDiagonal() * es.eigenvectors().transpose();
}

// Moment <-> cumulant transforms, unbiased estimators and analytic
// covariances over an atlas basis.
class Statistics {
public:
    explicit Statistics(const Counter& counter)
        : counter_(counter), atlas_(counter.atlas()), glue_(atlas_) {}

    const Atlas& atlas() const { return atlas_; }
    const Counter& counter() const { return counter_; }

    // --- transforms (distribution-level, over edge partitions) ---

    // Triangular solve by recursion over edge count; mu must cover the full
    // basis (connected and disconnected) up to r edges.
    CumulantVector moments_to_cumulants(const MomentVector& mu, int r) const {
        auto lookup = index_values(mu);
        std::vector<int> basis = atlas_.full_basis(r);
        std::map<int, double> kappa;
        for (int id : basis) {  // ids are sorted by edge count
            auto it = lookup.find(id);
            if (it == lookup.end())
                throw std::invalid_argument("moments_to_cumulants: missing basis entry " +
                                            atlas_.graph(id).name);
            double k = it->second;
            for (const auto& term : atlas_.edge_partitions(id)) {
                if (term.part_ids.size() == 1) continue;  // the singleton-block partition
                double prod = 1.0;
                for (int part : term.part_ids) prod *= kappa.at(part);
                k -= static_cast<double>(term.multiplicity) * prod;
            }
            kappa[id] = k;
        }
        CumulantVector out;
        out.basis = basis;
        out.n = mu.n;
        out.s = mu.s;
        out.values.resize(static_cast<Eigen::Index>(basis.size()));
        for (std::size_t i = 0; i < basis.size(); ++i)
            out.values[static_cast<Eigen::Index>(i)] = kappa.at(basis[i]);
        return out;
    }

    MomentVector cumulants_to_moments(const CumulantVector& kappa, int r) const {
        std::map<int, double> lookup;
        for (std::size_t i = 0; i < kappa.basis.size(); ++i)
            lookup[kappa.basis[i]] = kappa.values[static_cast<Eigen::Index>(i)];
        std::vector<int> basis = atlas_.full_basis(r);
        MomentVector out;
        out.basis = basis;
        out.n = kappa.n;
        out.s = kappa.s;
        out.values.resize(static_cast<Eigen::Index>(basis.size()));
        for (std::size_t i = 0; i < basis.size(); ++i) {
            double mu = 0.0;
            for (const auto& term : atlas_.edge_partitions(basis[i])) {
                double prod = 1.0;
                for (int part : term.part_ids) {
                    auto it = lookup.find(part);
                    if (it == lookup.end())
                        throw std::invalid_argument("cumulants_to_moments: missing entry " +
                                                    atlas_.graph(part).name);
                    prod *= it->second;
                }
                mu += static_cast<double>(term.multiplicity) * prod;
            }
            out.values[static_cast<Eigen::Index>(i)] = mu;
        }
        return out;
    }

    // --- unbiased cumulant estimators ---

    // Integer matrix L (connected basis of order <= r) x (full basis): the
    // cumulant-in-moments expansion with every product of moments replaced
    // by the moment of the disjoint union.
    Eigen::MatrixXd unbiased_map(int r) const {
        auto key = r;
        auto it = unbiased_cache_.find(key);
        if (it != unbiased_cache_.end()) return it->second;

        std::vector<int> rows = atlas_.connected_basis(r);
        std::vector<int> cols = atlas_.full_basis(r);
        std::map<int, Eigen::Index> col_of;
        for (std::size_t j = 0; j < cols.size(); ++j)
            col_of[cols[j]] = static_cast<Eigen::Index>(j);

        Eigen::MatrixXd L = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()),
                                                  static_cast<Eigen::Index>(cols.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            for (const auto& [monomial, coeff] : kappa_polynomial(rows[i])) {
                int u = monomial.front();
                for (std::size_t k = 1; k < monomial.size(); ++k)
                    u = atlas_.disjoint_union(u, monomial[k]);
                if (u < 0) throw std::logic_error("unbiased_map: union outside atlas");
                L(static_cast<Eigen::Index>(i), col_of.at(u)) += static_cast<double>(coeff);
            }
        }
        unbiased_cache_.emplace(key, L);
        return L;
    }

    // --- per-graph summaries ---

    // Moments of a single graph over the full basis up to order 2r: one
    // counting pass per graph feeds every estimator and covariance below.
    MomentVector summarize(const Graph& g, int r) const {
        return counter_.moments(g, atlas_.full_basis(2 * r));
    }

    std::vector<MomentVector> summarize(const std::vector<Graph>& sample, int r) const {
        std::vector<MomentVector> out;
        out.reserve(sample.size());
        for (const auto& g : sample) out.push_back(summarize(g, r));
        return out;
    }

    // --- sample estimators ---

    MomentVector estimate_moments(const std::vector<MomentVector>& sample,
                                  const std::vector<int>& basis) const {
        require_sample(sample);
        MomentVector acc;
        acc.basis = basis;
        acc.n = sample.front().n;
        acc.s = static_cast<int>(sample.size());
        acc.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.size()));
        for (const auto& mv : sample) acc.values += subvector(mv, basis);
        acc.values /= static_cast<double>(sample.size());
        return acc;
    }

    MomentVector estimate_moments(const std::vector<Graph>& sample,
                                  const std::vector<int>& basis) const {
        if (sample.empty()) throw std::invalid_argument("empty graph sample");
        MomentVector acc;
        for (std::size_t i = 0; i < sample.size(); ++i) {
            auto m = counter_.moments(sample[i], basis);
            if (i == 0)
                acc = m;
            else
                acc.values += m.values;
        }
        acc.values /= static_cast<double>(sample.size());
        acc.s = static_cast<int>(sample.size());
        return acc;
    }

    CumulantVector estimate_cumulants(const std::vector<MomentVector>& sample,
                                      int r) const {
        require_sample(sample);
        Eigen::MatrixXd L = unbiased_map(r);
        std::vector<int> full = atlas_.full_basis(r);
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(L.rows());
        for (const auto& mv : sample) acc += L * subvector(mv, full);
        CumulantVector out;
        out.basis = atlas_.connected_basis(r);
        out.values = acc / static_cast<double>(sample.size());
        out.n = sample.front().n;
        out.s = static_cast<int>(sample.size());
        return out;
    }

    CumulantVector estimate_cumulants(const std::vector<Graph>& sample, int r) const {
        return estimate_cumulants(summarize(sample, r), r);
    }

    // --- covariances ---

    // Covariance of single-graph moments over `basis` at node count n, from
    // moments up to twice the basis order: the gluing expansion turns
    // E[c_g c_g'] into a linear combination of counts, and the centering
    // term is the product mu_g * mu_g' of the supplied moments.
    //
    // With sample-mean plug-in moments, the gluing identity makes this
    // reduce exactly to the empirical covariance of the per-graph moment
    // vectors (rank <= s-1; identically zero at s=1).
    CovMatrix moment_covariance(const MomentVector& mu2r, int n,
                                const std::vector<int>& basis) const {
        auto lookup = index_values(mu2r);
        CovMatrix out = gluing_second_moment(lookup, n, basis);
        out.kind = "moment";
        const auto dim = static_cast<Eigen::Index>(basis.size());
        for (Eigen::Index i = 0; i < dim; ++i)
            for (Eigen::Index j = 0; j < dim; ++j)
                out.values(i, j) -= moment_at(lookup, basis[static_cast<std::size_t>(i)], n) *
                                    moment_at(lookup, basis[static_cast<std::size_t>(j)], n);
        return out;
    }

    // Cumulant covariance: L * Sigma_full * L^T, where Sigma_full centers
    // with the moment of the disjoint union mu_{g u g'} instead of the
    // product mu_g * mu_g'. For distribution moments the two coincide
    // (disjoint unions factorize); for plug-in moments the union form is
    // the unbiased one and stays informative even at s=1.
    CovMatrix cumulant_covariance(const MomentVector& mu2r, int n, int r) const {
        auto lookup = index_values(mu2r);
        std::vector<int> full = atlas_.full_basis(r);
        CovMatrix sigma = gluing_second_moment(lookup, n, full);
        const auto dim = static_cast<Eigen::Index>(full.size());
        for (Eigen::Index i = 0; i < dim; ++i)
            for (Eigen::Index j = 0; j < dim; ++j) {
                int u = atlas_.disjoint_union(full[static_cast<std::size_t>(i)],
                                              full[static_cast<std::size_t>(j)]);
                if (u < 0) throw std::logic_error("cumulant_covariance: union outside atlas");
                auto it = lookup.find(u);
                if (it == lookup.end())
                    throw std::invalid_argument("cumulant_covariance: missing moment for " +
                                                atlas_.graph(u).name);
                sigma.values(i, j) -= it->second;
            }
        Eigen::MatrixXd L = unbiased_map(r);
        CovMatrix out;
        out.basis = atlas_.connected_basis(r);
        out.n = n;
        out.kind = "cumulant";
        out.values = L * sigma.values * L.transpose();
        out.values = 0.5 * (out.values + out.values.transpose());
        return out;
    }

    // Moment sequence of the distribution inferred from one graph: keep its
    // unbiased connected cumulants up to order r, set every other cumulant
    // to zero (the single-graphon assumption leaves no disconnected or
    // unmeasured cumulants), and rebuild the moments up to order 2r.  At
    // these graphon-consistent moments disjoint unions factorize exactly,
    // which keeps the tiny eigenvalues of the covariance on their analytic
    // cancellation structure instead of at the plug-in noise floor.
    MomentVector inferred_moments(const MomentVector& summary, int r) const {
        Eigen::MatrixXd L = unbiased_map(r);
        Eigen::VectorXd khat = L * subvector(summary, atlas_.full_basis(r));
        auto conn = atlas_.connected_basis(r);
        CumulantVector kt;
        kt.basis = atlas_.full_basis(2 * r);
        kt.n = summary.n;
        kt.s = summary.s;
        kt.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(kt.basis.size()));
        for (std::size_t i = 0; i < kt.basis.size(); ++i)
            for (std::size_t j = 0; j < conn.size(); ++j)
                if (kt.basis[i] == conn[j])
                    kt.values[static_cast<Eigen::Index>(i)] =
                        khat[static_cast<Eigen::Index>(j)];
        return cumulants_to_moments(kt, 2 * r);
    }

    // Covariance of the s-graph mean statistic, from per-graph summaries.
    //
    // Moment kind: with sample-mean plug-in moments the gluing formula
    // reduces exactly to the empirical covariance of the per-graph moment
    // vectors; compute that form directly so s=1 is exactly zero.
    // Cumulant kind: per-graph analytic covariances at the inferred
    // (graphon-consistent) moments, averaged.  Plugging each graph's raw
    // 2r-moments instead leaves the smallest eigenvalues dominated by
    // estimation noise and gives the statistic heavy tails at small s.
    // Both are then scaled by 1/s for the covariance of the mean.
    CovMatrix sample_covariance(const std::vector<MomentVector>& sample, int r,
                                StatKind kind) const {
        require_sample(sample);
        const auto s = static_cast<double>(sample.size());
        CovMatrix out;
        if (kind == StatKind::Moment) {
            auto basis = atlas_.connected_basis(r);
            Eigen::MatrixXd X(static_cast<Eigen::Index>(sample.size()),
                              static_cast<Eigen::Index>(basis.size()));
            for (std::size_t i = 0; i < sample.size(); ++i)
                X.row(static_cast<Eigen::Index>(i)) = subvector(sample[i], basis).transpose();
            Eigen::RowVectorXd mean = X.colwise().mean();
            Eigen::MatrixXd centered = X.rowwise() - mean;
            out.basis = basis;
            out.n = sample.front().n;
            out.values = centered.transpose() * centered / s;
        } else {
            for (std::size_t i = 0; i < sample.size(); ++i) {
                auto c = cumulant_covariance(inferred_moments(sample[i], r),
                                             sample[i].n, r);
                if (i == 0)
                    out = c;
                else
                    out.values += c.values;
            }
            out.values /= s;
        }
        out.values /= s;
        out.s = static_cast<int>(sample.size());
        out.kind = to_string(kind);
        return out;
    }

    CovMatrix sample_covariance(const std::vector<Graph>& sample, int r,
                                StatKind kind) const {
        return sample_covariance(summarize(sample, r), r, kind);
    }

    // kappa_g as an integer polynomial in the moments (distribution-level
    // expansion; products are genuine products, not disjoint unions).
    const MomentPolynomial& cumulant_polynomial(int id) const {
        return kappa_polynomial(id);
    }

private:
    using Monomial = MomentMonomial;
    using Poly = MomentPolynomial;

    static void require_sample(const std::vector<MomentVector>& sample) {
        if (sample.empty()) throw std::invalid_argument("empty graph sample");
        for (const auto& mv : sample)
            if (mv.basis != sample.front().basis)
                throw std::invalid_argument("sample summaries must share a basis");
    }

    // Extract a sub-basis from a summary vector (basis ids must appear).
    Eigen::VectorXd subvector(const MomentVector& mv, const std::vector<int>& basis) const {
        Eigen::VectorXd out(static_cast<Eigen::Index>(basis.size()));
        for (std::size_t i = 0; i < basis.size(); ++i) {
            auto it = std::find(mv.basis.begin(), mv.basis.end(), basis[i]);
            if (it == mv.basis.end())
                throw std::invalid_argument("summary is missing basis entry " +
                                            atlas_.graph(basis[i]).name);
            out[static_cast<Eigen::Index>(i)] =
                mv.values[static_cast<Eigen::Index>(it - mv.basis.begin())];
        }
        return out;
    }

    static std::map<int, double> index_values(const MomentVector& mu) {
        std::map<int, double> out;
        for (std::size_t i = 0; i < mu.basis.size(); ++i)
            out[mu.basis[i]] = mu.values[static_cast<Eigen::Index>(i)];
        return out;
    }

    double moment_at(const std::map<int, double>& lookup, int id, int n) const {
        const auto& g = atlas_.graph(id);
        if (g.v > n)
            throw std::invalid_argument("moment_covariance: n too small for " + g.name);
        auto it = lookup.find(id);
        if (it == lookup.end())
            throw std::invalid_argument("moment_covariance: missing moment for " + g.name);
        return it->second;
    }

    // E[mu_g mu_g'] over `basis` via the gluing expansion; terms whose
    // pattern needs more than n nodes contribute zero counts.
    CovMatrix gluing_second_moment(const std::map<int, double>& lookup, int n,
                                   const std::vector<int>& basis) const {
        const auto dim = static_cast<Eigen::Index>(basis.size());
        CovMatrix out;
        out.basis = basis;
        out.n = n;
        out.values.resize(dim, dim);
        for (Eigen::Index i = 0; i < dim; ++i) {
            const auto& gi = atlas_.graph(basis[static_cast<std::size_t>(i)]);
            for (Eigen::Index j = i; j < dim; ++j) {
                const auto& gj = atlas_.graph(basis[static_cast<std::size_t>(j)]);
                double e_cc = 0.0;
                for (const auto& [h, beta] : glue_.row(basis[static_cast<std::size_t>(i)],
                                                       basis[static_cast<std::size_t>(j)])) {
                    const auto& gh = atlas_.graph(h);
                    if (gh.v > n) continue;  // counts identically zero
                    e_cc += static_cast<double>(beta) *
                            moment_at(lookup, h, n) * falling_factorial(n, gh.v);
                }
                double denom = falling_factorial(n, gi.v) * falling_factorial(n, gj.v);
                out.values(i, j) = e_cc / denom;
                out.values(j, i) = out.values(i, j);
            }
        }
        return out;
    }

    // kappa_g as an integer polynomial in the moments, via the same
    // triangular recursion as the numeric transform.
    const Poly& kappa_polynomial(int id) const {
        auto it = poly_cache_.find(id);
        if (it != poly_cache_.end()) return it->second;
        Poly out;
        out[{id}] = 1;
        for (const auto& term : atlas_.edge_partitions(id)) {
            if (term.part_ids.size() == 1) continue;
            Poly prod;
            prod[{}] = term.multiplicity;
            for (int part : term.part_ids) prod = multiply(prod, kappa_polynomial(part));
            for (const auto& [mono, coeff] : prod) out[mono] -= coeff;
        }
        for (auto pit = out.begin(); pit != out.end();)
            pit = pit->second == 0 ? out.erase(pit) : std::next(pit);
        return poly_cache_.emplace(id, std::move(out)).first->second;
    }

    static Poly multiply(const Poly& a, const Poly& b) {
        Poly out;
        for (const auto& [ma, ca] : a)
            for (const auto& [mb, cb] : b) {
                Monomial m = ma;
                m.insert(m.end(), mb.begin(), mb.end());
                std::sort(m.begin(), m.end());
                out[m] += ca * cb;
            }
        return out;
    }

    const Counter& counter_;
    const Atlas& atlas_;
    mutable GluingTable glue_;
    mutable std::map<int, Eigen::MatrixXd> unbiased_cache_;
    mutable std::map<int, Poly> poly_cache_;
};

} // namespace gct

#endif
