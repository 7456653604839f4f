#ifndef GCT_MODELS_HPP
#define GCT_MODELS_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "gct/atlas.hpp"
#include "gct/rng.hpp"
#include "gct/sbm.hpp"

namespace gct {

namespace detail {

// Exact graphon moment of a connected pattern under an SBM: sum over all
// block assignments of the vertex set (k^v terms, v <= 7 here).
inline double sbm_moment_connected(const SmallEdges& edges, int v, const SbmSpec& spec) {
    const auto k = static_cast<int>(spec.num_blocks());
    double total = 0.0;
    std::vector<int> block(v, 0);
    while (true) {
        double w = 1.0;
        for (int u = 0; u < v; ++u) w *= spec.block_probs[block[u]];
        for (auto [a, b] : edges) w *= spec.B[block[a]][block[b]];
        total += w;
        int i = 0;
        for (; i < v; ++i) {
            if (++block[i] < k) break;
            block[i] = 0;
        }
        if (i == v) break;
    }
    return total;
}

// Index of (i,j), i <= j, in the row-major upper triangle of a k x k matrix.
inline int upper_tri_index(int i, int j, int k) {
    if (i > j) std::swap(i, j);
    return i * k - i * (i - 1) / 2 + (j - i);
}

inline int upper_tri_size(int k) { return k * (k + 1) / 2; }

// Gradient of the connected moment with respect to the upper-triangular
// entries of B (treating B as symmetric: both (i,j) and (j,i) occurrences
// feed the same derivative).
inline Eigen::VectorXd sbm_moment_jacobian_connected(const SmallEdges& edges, int v,
                                                     const SbmSpec& spec) {
    const auto k = static_cast<int>(spec.num_blocks());
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(upper_tri_size(k));
    std::vector<int> block(v, 0);
    while (true) {
        double base = 1.0;
        for (int u = 0; u < v; ++u) base *= spec.block_probs[block[u]];
        for (std::size_t e = 0; e < edges.size(); ++e) {
            double w = base;
            for (std::size_t f = 0; f < edges.size(); ++f) {
                if (f == e) continue;
                w *= spec.B[block[edges[f].first]][block[edges[f].second]];
            }
            grad[upper_tri_index(block[edges[e].first], block[edges[e].second], k)] += w;
        }
        int i = 0;
        for (; i < v; ++i) {
            if (++block[i] < k) break;
            block[i] = 0;
        }
        if (i == v) break;
    }
    return grad;
}

}  // namespace detail

// Exact graphon moment of any atlas pattern; disconnected patterns
// factorize over components.
inline double sbm_moment(const Atlas& atlas, int id, const SbmSpec& spec) {
    const auto& g = atlas.graph(id);
    if (g.connected) return detail::sbm_moment_connected(g.canonical_edges, g.v, spec);
    double prod = 1.0;
    for (int comp : g.components) prod *= sbm_moment(atlas, comp, spec);
    return prod;
}

// Gradient of sbm_moment over the upper-triangular entries of B; product
// rule over components for disconnected patterns.
inline Eigen::VectorXd sbm_moment_jacobian(const Atlas& atlas, int id,
                                           const SbmSpec& spec) {
    const auto& g = atlas.graph(id);
    if (g.connected)
        return detail::sbm_moment_jacobian_connected(g.canonical_edges, g.v, spec);
    const auto k = static_cast<int>(spec.num_blocks());
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(detail::upper_tri_size(k));
    for (std::size_t c = 0; c < g.components.size(); ++c) {
        double rest = 1.0;
        for (std::size_t d = 0; d < g.components.size(); ++d)
            if (d != c) rest *= sbm_moment(atlas, g.components[d], spec);
        grad += rest * sbm_moment_jacobian(atlas, g.components[c], spec);
    }
    return grad;
}

// Four-block SBM blending heterogeneity and assortativity through the
// Kronecker product of the two 2-block factors, scaled to density rho.
struct BlendSpec {
    double rho = 0.0;
    double eps_h = 0.0;
    double eps_a = 0.0;
    SbmSpec sbm;

    nlohmann::json to_json() const {
        return {{"rho", rho}, {"eps_h", eps_h}, {"eps_a", eps_a}, {"B", sbm.B}};
    }
};

inline BlendSpec blend_kronecker(double rho, double eps_h, double eps_a) {
    const std::vector<std::vector<double>> h = {{1 + eps_h, 1.0}, {1.0, 1 - eps_h}};
    const std::vector<std::vector<double>> a = {{1 + eps_a, 1 - eps_a},
                                                {1 - eps_a, 1 + eps_a}};
    std::vector<std::vector<double>> b(4, std::vector<double>(4, 0.0));
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            b[i][j] = rho * h[i / 2][j / 2] * a[i % 2][j % 2];
            if (b[i][j] < 0.0 || b[i][j] > 1.0)
                throw std::invalid_argument(
                    "blend_kronecker: entry (" + std::to_string(i + 1) + "," +
                    std::to_string(j + 1) + ") = " + std::to_string(b[i][j]) +
                    " outside [0,1]");
        }
    return BlendSpec{rho, eps_h, eps_a,
                     SbmSpec({0.25, 0.25, 0.25, 0.25}, std::move(b))};
}

// A random symmetric perturbation of the connectivity matrix, with entry
// variance matching the Bernoulli fluctuation scale B(1-B).
struct Perturbation {
    Eigen::MatrixXd delta;       // symmetric k x k
    Eigen::VectorXd dof_vector;  // upper-triangular entries, row-major
};

// Diagonal of per-dof perturbation variances B_ij (1 - B_ij).
inline Eigen::VectorXd perturbation_scale(const SbmSpec& spec) {
    const auto k = static_cast<int>(spec.num_blocks());
    Eigen::VectorXd d(detail::upper_tri_size(k));
    for (int i = 0; i < k; ++i)
        for (int j = i; j < k; ++j)
            d[detail::upper_tri_index(i, j, k)] = spec.B[i][j] * (1.0 - spec.B[i][j]);
    return d;
}

inline Perturbation sample_perturbation(const SbmSpec& spec, Rng& rng) {
    const auto k = static_cast<int>(spec.num_blocks());
    Eigen::MatrixXd draw(k, k);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            draw(i, j) = normal(rng) *
                         std::sqrt(spec.B[i][j] * (1.0 - spec.B[i][j]));
    Perturbation p;
    p.delta = 0.5 * (draw + draw.transpose());
    p.dof_vector.resize(detail::upper_tri_size(k));
    for (int i = 0; i < k; ++i)
        for (int j = i; j < k; ++j)
            p.dof_vector[detail::upper_tri_index(i, j, k)] = p.delta(i, j);
    return p;
}

} // namespace gct

#endif
