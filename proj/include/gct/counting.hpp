#ifndef GCT_COUNTING_HPP
#define GCT_COUNTING_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gct/atlas.hpp"
#include "gct/graph.hpp"
#include "gct/util.hpp"

namespace Eigen {
template <>
struct NumTraits<__int128> : GenericNumTraits<__int128> {
    enum {
        IsInteger = 1,
        IsSigned = 1,
        IsComplex = 0,
        RequireInitialization = 0,
        ReadCost = 1,
        AddCost = 2,
        MulCost = 4
    };
    static inline __int128 highest() { return ~(__int128(1) << 126); }
    static inline __int128 lowest() { return __int128(1) << 126; }
    static inline int digits10() { return 38; }
};
} // namespace Eigen

namespace gct {

// Exact injective homomorphism counts over an atlas basis.
struct CountVector {
    const Atlas* atlas = nullptr;
    std::vector<int128> values;  // indexed by atlas id
    int n = 0;
};

// Injective homomorphism densities over a declared basis of atlas ids.
struct MomentVector {
    std::vector<int> basis;
    Eigen::VectorXd values;
    int n = 0;
    int s = 1;
};

// Brute-force injective homomorphism count; oracle for small hosts.
inline int128 inj_count_bruteforce(const SmallEdges& pattern, const Graph& host) {
    const int pv = detail::vertex_count(pattern);
    const int n = host.n();
    if (n > 12)
        throw std::invalid_argument("inj_count_bruteforce: host too large for oracle");
    if (pv > n) return 0;
    // Pattern neighbors already placed when vertex i is mapped.
    std::vector<std::vector<int>> earlier(pv);
    for (auto [a, b] : pattern) earlier[std::max(a, b)].push_back(std::min(a, b));
    std::vector<std::uint32_t> adj(n, 0);
    for (auto [u, v] : host.edges()) {
        adj[u] |= 1u << v;
        adj[v] |= 1u << u;
    }
    const std::uint32_t all = (1u << n) - 1;
    std::vector<int> image(pv, -1);
    int128 count = 0;
    std::function<void(int, std::uint32_t)> rec = [&](int i, std::uint32_t used) {
        if (i == pv) {
            ++count;
            return;
        }
        std::uint32_t candidates = all & ~used;
        for (int p : earlier[i]) candidates &= adj[image[p]];
        while (candidates) {
            int t = std::countr_zero(candidates);
            candidates &= candidates - 1;
            image[i] = t;
            rec(i + 1, used | (1u << t));
        }
    };
    rec(0, 0);
    return count;
}

namespace homdp {

// Expression DAG over host-sized matrices/vectors; hash-consed so
// subexpressions shared between patterns are evaluated once per host.
struct Expr {
    enum class Op { Adj, Ones, Trans, MatVec, VecHad, DiagMM, MatHad, VecSum };
    Op op;
    int a = -1, b = -1, c = -1;
    bool operator<(const Expr& o) const {
        return std::tie(op, a, b, c) < std::tie(o.op, o.a, o.b, o.c);
    }
};

class ExprPool {
public:
    int adj() { return intern({Expr::Op::Adj}); }
    int ones() { return intern({Expr::Op::Ones}); }
    int trans(int m) {
        if (node(m).op == Expr::Op::Adj) return m;
        if (node(m).op == Expr::Op::Trans) return node(m).a;
        return intern({Expr::Op::Trans, m});
    }
    int matvec(int m, int v) { return intern({Expr::Op::MatVec, m, v}); }
    int vec_had(int u, int v) {
        if (u > v) std::swap(u, v);
        return intern({Expr::Op::VecHad, u, v});
    }
    int diag_mm(int l, int w, int r) { return intern({Expr::Op::DiagMM, l, w, r}); }
    int mat_had(int m1, int m2) {
        if (m1 > m2) std::swap(m1, m2);
        return intern({Expr::Op::MatHad, m1, m2});
    }
    int vec_sum(int v) { return intern({Expr::Op::VecSum, v}); }

    const Expr& node(int id) const { return nodes_[id]; }
    std::size_t size() const { return nodes_.size(); }

private:
    int intern(Expr e) {
        auto it = index_.find(e);
        if (it != index_.end()) return it->second;
        int id = static_cast<int>(nodes_.size());
        nodes_.push_back(e);
        index_.emplace(e, id);
        return id;
    }
    std::vector<Expr> nodes_;
    std::map<Expr, int> index_;
};

// Evaluation plan for hom counts of one connected pattern.
struct Plan {
    int v = 0;
    bool is_k4 = false;      // evaluated by the clique-count routine instead
    bool has_cycle = false;  // needs matrix-matrix products
    std::vector<int> scalar_exprs;
};

// Bucket elimination over the pattern's vertices. Min-degree order keeps
// the induced width at 2 for every connected atlas pattern except K4.
inline Plan compile_pattern(const SmallEdges& edges, ExprPool& pool) {
    Plan plan;
    plan.v = detail::vertex_count(edges);
    const int v = plan.v;
    std::vector<bool> alive(v, true);
    std::vector<int> unary(v, -1);
    // factor[(x,y)] with x<y: expr with rows indexed by x.
    std::map<std::pair<int, int>, int> factor;
    for (auto [a, b] : edges) factor[{a, b}] = pool.adj();

    auto neighbors_of = [&](int x) {
        std::vector<int> nbrs;
        for (const auto& [key, f] : factor)
            if (key.first == x)
                nbrs.push_back(key.second);
            else if (key.second == x)
                nbrs.push_back(key.first);
        return nbrs;
    };
    auto take_factor = [&](int rows, int other) {
        auto key = std::minmax(rows, other);
        int f = factor.at({key.first, key.second});
        factor.erase({key.first, key.second});
        return key.first == rows ? f : pool.trans(f);
    };

    for (int step = 0; step < v; ++step) {
        int x = -1;
        std::size_t best_deg = 0;
        for (int cand = 0; cand < v; ++cand) {
            if (!alive[cand]) continue;
            std::size_t deg = neighbors_of(cand).size();
            if (x < 0 || deg < best_deg) {
                x = cand;
                best_deg = deg;
            }
        }
        auto nbrs = neighbors_of(x);
        int w = unary[x] >= 0 ? unary[x] : pool.ones();
        if (nbrs.empty()) {
            plan.scalar_exprs.push_back(pool.vec_sum(w));
        } else if (nbrs.size() == 1) {
            int y = nbrs[0];
            int f = take_factor(y, x);  // rows = y
            int msg = pool.matvec(f, w);
            unary[y] = unary[y] >= 0 ? pool.vec_had(unary[y], msg) : msg;
        } else if (nbrs.size() == 2) {
            plan.has_cycle = true;
            int y = nbrs[0], z = nbrs[1];
            int fy = take_factor(y, x);  // rows = y, cols = x
            int fz = take_factor(x, z);  // rows = x, cols = z
            int msg = pool.diag_mm(fy, w, fz);
            auto key = std::minmax(y, z);
            int oriented = key.first == y ? msg : pool.trans(msg);
            auto it = factor.find({key.first, key.second});
            if (it == factor.end())
                factor[{key.first, key.second}] = oriented;
            else
                it->second = pool.mat_had(it->second, oriented);
        } else {
            // Width 3 only arises for K4 in this atlas.
            plan.is_k4 = true;
            return plan;
        }
        alive[x] = false;
    }
    return plan;
}

template <class S>
class Evaluator {
public:
    using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
    using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

    Evaluator(const ExprPool& pool, Mat adjacency)
        : pool_(pool),
          adj_(std::move(adjacency)),
          mats_(pool.size()),
          vecs_(pool.size()) {}

    S scalar(int id) {
        const Expr& e = pool_.node(id);
        if (e.op != Expr::Op::VecSum) throw std::logic_error("not a scalar expr");
        return vec(e.a).sum();
    }

    const Vec& vec(int id) {
        if (vecs_[id]) return *vecs_[id];
        const Expr& e = pool_.node(id);
        Vec out;
        switch (e.op) {
            case Expr::Op::Ones:
                out = Vec::Ones(adj_.rows());
                break;
            case Expr::Op::MatVec:
                out = mat(e.a) * vec(e.b);
                break;
            case Expr::Op::VecHad:
                out = vec(e.a).cwiseProduct(vec(e.b));
                break;
            default:
                throw std::logic_error("not a vector expr");
        }
        vecs_[id] = std::move(out);
        return *vecs_[id];
    }

    const Mat& mat(int id) {
        if (mats_[id]) return *mats_[id];
        const Expr& e = pool_.node(id);
        Mat out;
        switch (e.op) {
            case Expr::Op::Adj:
                return adj_;
            case Expr::Op::Trans:
                out = mat(e.a).transpose();
                break;
            case Expr::Op::DiagMM:
                out = mat(e.a) * vec(e.b).asDiagonal() * mat(e.c);
                break;
            case Expr::Op::MatHad:
                out = mat(e.a).cwiseProduct(mat(e.b));
                break;
            default:
                throw std::logic_error("not a matrix expr");
        }
        mats_[id] = std::move(out);
        return *mats_[id];
    }

private:
    const ExprPool& pool_;
    Mat adj_;
    std::vector<std::optional<Mat>> mats_;
    std::vector<std::optional<Vec>> vecs_;
};

// hom(K4, G): ordered 4-cliques via bitset intersection.
inline int128 hom_k4(const Graph& g) {
    const int n = g.n();
    const int words = (n + 63) / 64;
    std::vector<std::uint64_t> rows(static_cast<std::size_t>(n) * words, 0);
    for (auto [u, v] : g.edges()) {
        rows[static_cast<std::size_t>(u) * words + v / 64] |= 1ULL << (v % 64);
        rows[static_cast<std::size_t>(v) * words + u / 64] |= 1ULL << (u % 64);
    }
    int128 total = 0;
    std::vector<std::uint64_t> common(words);
    for (auto [u, v] : g.edges()) {
        const std::uint64_t* ru = &rows[static_cast<std::size_t>(u) * words];
        const std::uint64_t* rv = &rows[static_cast<std::size_t>(v) * words];
        for (int w = 0; w < words; ++w) common[w] = ru[w] & rv[w];
        std::int64_t pairs = 0;
        for (int w = 0; w < words; ++w) {
            std::uint64_t bits = common[w];
            while (bits) {
                int c = w * 64 + std::countr_zero(bits);
                bits &= bits - 1;
                const std::uint64_t* rc = &rows[static_cast<std::size_t>(c) * words];
                for (int w2 = 0; w2 < words; ++w2)
                    pairs += std::popcount(common[w2] & rc[w2]);
            }
        }
        total += 2 * static_cast<int128>(pairs);  // both orientations of (u,v)
    }
    return total;
}

} // namespace homdp

// Exact subgraph counting for every atlas pattern: homomorphism counts by
// variable elimination, injective counts by Mobius inversion over the
// vertex-partition lattice, disconnected patterns by the gluing identity.
class Counter {
public:
    explicit Counter(const Atlas& atlas) : atlas_(atlas), glue_(atlas) {
        compile_plans();
        build_inversion_tables();
        build_union_recursion();
    }

    const Atlas& atlas() const { return atlas_; }

    CountVector count_all(const Graph& host) const {
        const int n = host.n();
        // Connected patterns need n >= v; disconnected ones come out of the
        // gluing identity, which stays exact even when their counts hit 0.
        int max_connected_v = 0;
        for (const auto& g : atlas_.graphs())
            if (g.connected) max_connected_v = std::max(max_connected_v, g.v);
        if (n < max_connected_v)
            throw std::invalid_argument(
                "count_all: host has " + std::to_string(n) + " nodes but atlas needs " +
                std::to_string(max_connected_v) + " (first unsatisfiable: " +
                first_unsatisfiable_name(n) + ")");
        if (12.0 * std::log2(static_cast<double>(n)) >= 126.0)
            throw std::overflow_error("count_all: host too large for 128-bit counts");

        std::vector<int128> hom(atlas_.size(), 0);
        evaluate_homs(host, hom);

        CountVector out;
        out.atlas = &atlas_;
        out.n = n;
        out.values.assign(atlas_.size(), 0);
        // Connected patterns: inj = sum over quotients with Mobius weights.
        for (const auto& g : atlas_.graphs()) {
            if (!g.connected) continue;
            int128 inj = 0;
            for (const auto& [id, coeff] : inversion_[g.id])
                inj += static_cast<int128>(coeff) * hom[id];
            out.values[g.id] = inj;
        }
        // Disconnected patterns, in increasing (e, v) order:
        // c_{g u g'} = c_g * c_g' - sum_{h != g u g'} beta_h * c_h.
        for (const auto& step : union_steps_) {
            int128 c = out.values[step.comp] * out.values[step.rest];
            for (const auto& [h, beta] : step.row) {
                if (h == step.target) continue;
                c -= static_cast<int128>(beta) * out.values[h];
            }
            out.values[step.target] = c;
        }
        return out;
    }

    MomentVector moments(const CountVector& counts, const std::vector<int>& basis) const {
        MomentVector out;
        out.basis = basis;
        out.n = counts.n;
        out.values.resize(static_cast<Eigen::Index>(basis.size()));
        for (std::size_t i = 0; i < basis.size(); ++i) {
            const auto& g = atlas_.graph(basis[i]);
            double denom = falling_factorial(counts.n, g.v);
            if (denom == 0.0)
                throw std::invalid_argument("moments: host too small for pattern " + g.name);
            out.values[static_cast<Eigen::Index>(i)] =
                static_cast<double>(counts.values[basis[i]]) / denom;
        }
        return out;
    }

    MomentVector moments(const Graph& host, const std::vector<int>& basis) const {
        return moments(count_all(host), basis);
    }

private:
    struct UnionStep {
        int target = -1, comp = -1, rest = -1;
        std::vector<std::pair<int, std::int64_t>> row;
    };

    std::string first_unsatisfiable_name(int n) const {
        for (const auto& g : atlas_.graphs())
            if (g.connected && g.v > n) return g.name;
        return "?";
    }

    void compile_plans() {
        plans_.resize(atlas_.size());
        for (const auto& g : atlas_.graphs())
            if (g.connected)
                plans_[g.id] = homdp::compile_pattern(g.canonical_edges, pool_);
    }

    void build_inversion_tables() {
        inversion_.resize(atlas_.size());
        for (const auto& g : atlas_.graphs()) {
            if (!g.connected) continue;
            const int v = g.v;
            std::map<int, std::int64_t> acc;
            std::vector<int> block(v, 0);
            std::function<void(int, int)> rec = [&](int i, int max_used) {
                if (i == v) {
                    // Quotient; blocks merging adjacent vertices give loops.
                    SmallEdges q;
                    bool loop = false;
                    for (auto [a, b] : g.canonical_edges) {
                        if (block[a] == block[b]) {
                            loop = true;
                            break;
                        }
                        int x = block[a], y = block[b];
                        if (x > y) std::swap(x, y);
                        q.emplace_back(x, y);
                    }
                    if (loop) return;
                    std::sort(q.begin(), q.end());
                    q.erase(std::unique(q.begin(), q.end()), q.end());
                    int id = atlas_.id_of(q);
                    if (id < 0) throw std::logic_error("inversion: quotient outside atlas");
                    std::int64_t weight = 1;
                    for (int b = 0; b < max_used; ++b) {
                        int size = static_cast<int>(std::count(block.begin(), block.end(), b));
                        // Mobius function of the partition lattice.
                        std::int64_t w = factorial_i64(size - 1);
                        weight *= (size % 2 == 0) ? -w : w;
                    }
                    acc[id] += weight;
                    return;
                }
                for (int b = 0; b <= max_used; ++b) {
                    block[i] = b;
                    rec(i + 1, std::max(max_used, b + 1));
                }
            };
            rec(0, 0);
            inversion_[g.id].assign(acc.begin(), acc.end());
        }
    }

    void build_union_recursion() {
        std::vector<int> disconnected;
        for (const auto& g : atlas_.graphs())
            if (!g.connected) disconnected.push_back(g.id);
        std::sort(disconnected.begin(), disconnected.end(), [&](int a, int b) {
            const auto& ga = atlas_.graph(a);
            const auto& gb = atlas_.graph(b);
            return std::tie(ga.e, ga.v, a) < std::tie(gb.e, gb.v, b);
        });
        for (int id : disconnected) {
            const auto& g = atlas_.graph(id);
            UnionStep step;
            step.target = id;
            step.comp = g.components.front();
            // Remaining components as one pattern.
            SmallEdges rest;
            int offset = 0;
            for (std::size_t i = 1; i < g.components.size(); ++i) {
                const auto& c = atlas_.graph(g.components[i]);
                for (auto [a, b] : c.canonical_edges)
                    rest.emplace_back(a + offset, b + offset);
                offset += c.v;
            }
            step.rest = atlas_.id_of(rest);
            if (step.rest < 0) throw std::logic_error("union recursion: rest outside atlas");
            for (const auto& [h, beta] : glue_.row(step.comp, step.rest))
                step.row.emplace_back(h, beta);
            // The disjoint union itself must appear with coefficient 1.
            bool found = false;
            for (const auto& [h, beta] : step.row)
                if (h == step.target) found = beta == 1;
            if (!found) throw std::logic_error("union recursion: malformed gluing row");
            union_steps_.push_back(std::move(step));
        }
    }

    void evaluate_homs(const Graph& host, std::vector<int128>& hom) const {
        const int n = host.n();
        // Exactness thresholds: every DP intermediate counts partial
        // assignments of a <= 7 vertex pattern, so values are bounded by
        // n^v. Doubles stay exact below 2^53, int64 below 2^62.
        auto bound_bits = [&](int v) { return v * std::log2(static_cast<double>(n)); };

        std::optional<homdp::Evaluator<double>> ev_d;
        std::optional<homdp::Evaluator<std::int64_t>> ev_i64;
        std::optional<homdp::Evaluator<int128>> ev_i128;

        auto adj_matrix = [&](auto scalar_tag) {
            using S = decltype(scalar_tag);
            Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> A =
                Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, n);
            for (auto [u, v] : host.edges()) {
                A(u, v) = S(1);
                A(v, u) = S(1);
            }
            return A;
        };

        for (const auto& g : atlas_.graphs()) {
            if (!g.connected) continue;
            const auto& plan = plans_[g.id];
            if (plan.is_k4) {
                hom[g.id] = homdp::hom_k4(host);
                continue;
            }
            int128 result = 1;
            if (bound_bits(g.v) < 52.5) {
                if (!ev_d) ev_d.emplace(pool_, adj_matrix(double{}));
                for (int s : plan.scalar_exprs)
                    result *= static_cast<int128>(ev_d->scalar(s));
            } else if (!plan.has_cycle && bound_bits(g.v) < 62.0) {
                if (!ev_i64) ev_i64.emplace(pool_, adj_matrix(std::int64_t{}));
                for (int s : plan.scalar_exprs)
                    result *= static_cast<int128>(ev_i64->scalar(s));
            } else {
                if (!ev_i128) ev_i128.emplace(pool_, adj_matrix(int128{}));
                for (int s : plan.scalar_exprs) result *= ev_i128->scalar(s);
            }
            hom[g.id] = result;
        }
    }

    const Atlas& atlas_;
    GluingTable glue_;
    homdp::ExprPool pool_;
    std::vector<homdp::Plan> plans_;
    std::vector<std::vector<std::pair<int, std::int64_t>>> inversion_;
    std::vector<UnionStep> union_steps_;
};

} // namespace gct

#endif
