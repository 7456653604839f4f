#ifndef GCT_SBM_HPP
#define GCT_SBM_HPP

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "gct/graph.hpp"
#include "gct/rng.hpp"

namespace gct {

// Stochastic block model: block weights plus a symmetric connectivity
// matrix with entries in [0,1].
struct SbmSpec {
    std::vector<double> block_probs;
    std::vector<std::vector<double>> B;

    SbmSpec(std::vector<double> probs, std::vector<std::vector<double>> conn)
        : block_probs(std::move(probs)), B(std::move(conn)) {
        validate();
    }

    std::size_t num_blocks() const { return block_probs.size(); }

    void validate() const {
        const std::size_t k = block_probs.size();
        if (k == 0 || B.size() != k)
            throw std::invalid_argument("SbmSpec: dimension mismatch");
        double total = 0.0;
        for (double p : block_probs) {
            if (p < 0.0) throw std::invalid_argument("SbmSpec: negative block weight");
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw std::invalid_argument("SbmSpec: block weights must sum to 1");
        for (std::size_t i = 0; i < k; ++i) {
            if (B[i].size() != k)
                throw std::invalid_argument("SbmSpec: B not square");
            for (std::size_t j = 0; j < k; ++j) {
                if (B[i][j] < 0.0 || B[i][j] > 1.0)
                    throw std::invalid_argument("SbmSpec: B entry outside [0,1]");
                if (std::abs(B[i][j] - B[j][i]) > 1e-12)
                    throw std::invalid_argument("SbmSpec: B not symmetric");
            }
        }
    }

    static SbmSpec erdos_renyi(double p) {
        return SbmSpec({1.0}, {{p}});
    }

    // Two equal blocks, one dense and one sparse; row means stay at rho.
    static SbmSpec heterogeneous(double rho, double eps_h) {
        return SbmSpec({0.5, 0.5},
                       {{rho * (1 + eps_h), rho}, {rho, rho * (1 - eps_h)}});
    }

    // Two equal blocks with within-block excess eps_a.
    static SbmSpec assortative(double rho, double eps_a) {
        return SbmSpec({0.5, 0.5},
                       {{rho * (1 + eps_a), rho * (1 - eps_a)},
                        {rho * (1 - eps_a), rho * (1 + eps_a)}});
    }
};

// Nodes get i.i.d. block labels; each pair is edged independently with
// probability B[b(u)][b(v)].
inline Graph sample_sbm(const SbmSpec& spec, int n, Rng& rng) {
    if (n < 1) throw std::invalid_argument("sample_sbm: n must be >= 1");
    std::discrete_distribution<int> block_dist(spec.block_probs.begin(),
                                               spec.block_probs.end());
    std::vector<int> block(n);
    for (int v = 0; v < n; ++v) block[v] = block_dist(rng);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<std::pair<int, int>> edges;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            if (unif(rng) < spec.B[block[u]][block[v]]) edges.emplace_back(u, v);
    return Graph(n, std::move(edges));
}

// Keep each node i.i.d. with probability target_n / n(G) and return the
// induced subgraph on the kept nodes, densely relabeled.
inline Graph subsample_nodes(const Graph& g, double target_n, Rng& rng) {
    if (target_n <= 0.0) throw std::invalid_argument("subsample_nodes: target_n must be > 0");
    if (target_n > g.n()) throw std::invalid_argument("subsample_nodes: target_n exceeds n");
    const double keep_p = target_n / g.n();
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<int> relabel(g.n(), -1);
    int kept = 0;
    for (int v = 0; v < g.n(); ++v)
        if (unif(rng) < keep_p) relabel[v] = kept++;
    std::vector<std::pair<int, int>> edges;
    for (auto [u, v] : g.edges())
        if (relabel[u] >= 0 && relabel[v] >= 0)
            edges.emplace_back(relabel[u], relabel[v]);
    return Graph(kept, std::move(edges));
}

// Delete edges uniformly at random until density(G) <= target_density.
inline Graph match_edge_density(const Graph& g, double target_density, Rng& rng) {
    if (target_density < 0.0 || target_density > 1.0)
        throw std::invalid_argument("match_edge_density: target outside [0,1]");
    if (target_density > g.density() + 1e-15)
        throw std::invalid_argument("match_edge_density: target exceeds current density; "
                                    "edge addition is unsupported");
    const double pairs = static_cast<double>(g.n()) * (g.n() - 1) / 2.0;
    const auto target_m =
        static_cast<std::size_t>(std::floor(target_density * pairs + 1e-9));
    auto edges = g.edges();
    std::shuffle(edges.begin(), edges.end(), rng);
    if (edges.size() > target_m) edges.resize(target_m);
    return Graph(g.n(), std::move(edges));
}

} // namespace gct

#endif
