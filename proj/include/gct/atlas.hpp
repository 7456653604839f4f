#ifndef GCT_ATLAS_HPP
#define GCT_ATLAS_HPP

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gct/util.hpp"

namespace gct {

// Edge list of a small pattern graph: vertices dense 0..v-1, pairs (u<v),
// sorted, no isolated vertices.
using SmallEdges = std::vector<std::pair<int, int>>;

namespace detail {

inline int vertex_count(const SmallEdges& edges) {
    int v = 0;
    for (auto [a, b] : edges) v = std::max({v, a + 1, b + 1});
    return v;
}

// Drop isolated vertices and relabel densely in order of first appearance.
inline SmallEdges normalize(SmallEdges edges) {
    std::map<int, int> relabel;
    for (auto [a, b] : edges) {
        relabel.emplace(a, 0);
        relabel.emplace(b, 0);
    }
    int next = 0;
    for (auto& [k, v] : relabel) v = next++;
    for (auto& [a, b] : edges) {
        a = relabel[a];
        b = relabel[b];
        if (a > b) std::swap(a, b);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

inline std::string edge_key(const SmallEdges& edges) {
    std::string s;
    s.reserve(edges.size() * 2);
    for (auto [a, b] : edges) {
        s.push_back(static_cast<char>('a' + a));
        s.push_back(static_cast<char>('a' + b));
    }
    return s;
}

inline std::vector<SmallEdges> split_components(const SmallEdges& edges) {
    int v = vertex_count(edges);
    std::vector<int> parent(v);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (auto [a, b] : edges) parent[find(a)] = find(b);
    std::map<int, SmallEdges> comps;
    for (auto e : edges) comps[find(e.first)].push_back(e);
    std::vector<SmallEdges> out;
    for (auto& [root, ce] : comps) out.push_back(normalize(std::move(ce)));
    return out;
}

struct CanonResult {
    SmallEdges edges;
    std::int64_t aut = 1;
};

// Canonical labeling of a connected pattern by exhaustive permutation
// search; the automorphism count falls out as the number of permutations
// attaining the minimum.
inline CanonResult canonical_connected(const SmallEdges& edges) {
    const int v = vertex_count(edges);
    if (v > 8) throw std::invalid_argument("canonical_connected: too many vertices");
    std::vector<int> perm(v);
    std::iota(perm.begin(), perm.end(), 0);
    CanonResult best;
    bool first = true;
    SmallEdges relabeled(edges.size());
    do {
        for (std::size_t i = 0; i < edges.size(); ++i) {
            int a = perm[edges[i].first], b = perm[edges[i].second];
            if (a > b) std::swap(a, b);
            relabeled[i] = {a, b};
        }
        std::sort(relabeled.begin(), relabeled.end());
        if (first || relabeled < best.edges) {
            best.edges = relabeled;
            best.aut = 1;
            first = false;
        } else if (relabeled == best.edges) {
            ++best.aut;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

} // namespace detail

// Canonical form of an arbitrary small pattern. Disconnected patterns are
// canonicalized per component; identical components multiply the
// automorphism count by their exchange symmetry.
struct CanonicalForm {
    SmallEdges edges;      // canonical labeling
    int v = 0;
    std::int64_t aut = 1;
    std::vector<SmallEdges> components;  // canonical, sorted
};

inline CanonicalForm canonical_form(const SmallEdges& raw) {
    static std::unordered_map<std::string, CanonicalForm> cache;
    static std::mutex cache_mutex;

    SmallEdges norm = detail::normalize(raw);
    std::string key = detail::edge_key(norm);
    {
        std::lock_guard<std::mutex> lock(cache_mutex);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }

    CanonicalForm out;
    auto comps = detail::split_components(norm);
    std::vector<detail::CanonResult> canon(comps.size());
    for (std::size_t i = 0; i < comps.size(); ++i)
        canon[i] = detail::canonical_connected(comps[i]);
    auto comp_less = [](const detail::CanonResult& a, const detail::CanonResult& b) {
        int va = detail::vertex_count(a.edges), vb = detail::vertex_count(b.edges);
        if (a.edges.size() != b.edges.size()) return a.edges.size() < b.edges.size();
        if (va != vb) return va < vb;
        return a.edges < b.edges;
    };
    std::sort(canon.begin(), canon.end(), comp_less);

    int offset = 0;
    for (std::size_t i = 0; i < canon.size(); ++i) {
        int cv = detail::vertex_count(canon[i].edges);
        for (auto [a, b] : canon[i].edges)
            out.edges.emplace_back(a + offset, b + offset);
        out.components.push_back(canon[i].edges);
        out.aut *= canon[i].aut;
        offset += cv;
    }
    std::sort(out.edges.begin(), out.edges.end());
    out.v = offset;
    // Exchange symmetry between identical components.
    std::int64_t run = 1;
    for (std::size_t i = 1; i <= canon.size(); ++i) {
        if (i < canon.size() && canon[i].edges == canon[i - 1].edges) {
            ++run;
        } else {
            out.aut *= factorial_i64(static_cast<int>(run));
            run = 1;
        }
    }
    {
        std::lock_guard<std::mutex> lock(cache_mutex);
        cache.emplace(std::move(key), out);
    }
    return out;
}

struct SmallGraph {
    int id = -1;
    int v = 0;
    int e = 0;
    SmallEdges canonical_edges;
    std::int64_t aut = 1;
    bool connected = false;
    std::vector<int> components;  // atlas ids, sorted
    std::string name;
};

// One multiset of part patterns arising from partitioning E(g), with the
// number of distinct edge partitions producing it.
struct PartitionTerm {
    std::vector<int> part_ids;  // sorted atlas ids
    std::int64_t multiplicity = 0;
};

class Atlas {
public:
    explicit Atlas(int max_edges) : max_edges_(max_edges) {
        if (max_edges < 1 || max_edges > 6)
            throw std::invalid_argument("Atlas: max_edges must be in [1,6]");
        build();
    }

    int max_edges() const { return max_edges_; }
    std::size_t size() const { return graphs_.size(); }
    const std::vector<SmallGraph>& graphs() const { return graphs_; }
    const SmallGraph& graph(int id) const { return graphs_.at(id); }

    // Atlas id of an arbitrary edge set, or -1 if outside the atlas.
    int id_of(const SmallEdges& edges) const {
        auto cf = canonical_form(edges);
        auto it = index_.find(detail::edge_key(cf.edges));
        return it == index_.end() ? -1 : it->second;
    }

    int max_vertices() const {
        int m = 0;
        for (const auto& g : graphs_) m = std::max(m, g.v);
        return m;
    }

    std::vector<int> connected_basis(int r) const {
        std::vector<int> out;
        for (const auto& g : graphs_)
            if (g.connected && g.e <= r) out.push_back(g.id);
        return out;
    }

    std::vector<int> full_basis(int r) const {
        std::vector<int> out;
        for (const auto& g : graphs_)
            if (g.e <= r) out.push_back(g.id);
        return out;
    }

    // All edge partitions of g, grouped by the multiset of part patterns.
    std::vector<PartitionTerm> edge_partitions(int id) const {
        const auto& g = graphs_.at(id);
        const auto& edges = g.canonical_edges;
        const int e = g.e;
        std::map<std::vector<int>, std::int64_t> acc;
        std::vector<int> block(e, 0);
        // Restricted growth strings enumerate set partitions exactly once.
        std::function<void(int, int)> rec = [&](int i, int max_used) {
            if (i == e) {
                int nblocks = max_used;
                std::vector<int> ids;
                for (int b = 0; b < nblocks; ++b) {
                    SmallEdges part;
                    for (int j = 0; j < e; ++j)
                        if (block[j] == b) part.push_back(edges[j]);
                    int pid = id_of(part);
                    if (pid < 0)
                        throw std::logic_error("edge_partitions: part outside atlas");
                    ids.push_back(pid);
                }
                std::sort(ids.begin(), ids.end());
                ++acc[ids];
                return;
            }
            for (int b = 0; b <= max_used; ++b) {
                block[i] = b;
                rec(i + 1, std::max(max_used, b + 1));
            }
        };
        rec(0, 0);
        std::vector<PartitionTerm> out;
        for (auto& [ids, mult] : acc) out.push_back({ids, mult});
        return out;
    }

    // Atlas id of the disjoint union of two patterns.
    int disjoint_union(int a, int b) const {
        SmallEdges u = graphs_.at(a).canonical_edges;
        int shift = graphs_.at(a).v;
        for (auto [x, y] : graphs_.at(b).canonical_edges)
            u.emplace_back(x + shift, y + shift);
        return id_of(u);
    }

    nlohmann::json to_json() const {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& g : graphs_) {
            nlohmann::json je = nlohmann::json::array();
            for (auto [a, b] : g.canonical_edges) je.push_back({a, b});
            arr.push_back({{"id", g.id},
                           {"name", g.name},
                           {"v", g.v},
                           {"e", g.e},
                           {"edges", je},
                           {"aut", g.aut},
                           {"connected", g.connected},
                           {"components", g.components}});
        }
        return {{"max_edges", max_edges_}, {"graphs", arr}};
    }

private:
    void build() {
        // Grow by edge addition from the single-edge seed, deduplicating by
        // canonical form; every e-edge pattern arises from an (e-1)-edge
        // pattern by one of the three edge-placement moves below.
        std::map<std::string, CanonicalForm> by_level[7];
        {
            CanonicalForm seed = canonical_form({{0, 1}});
            by_level[1].emplace(detail::edge_key(seed.edges), seed);
        }
        for (int e = 2; e <= max_edges_; ++e) {
            for (const auto& [key, parent] : by_level[e - 1]) {
                const int v = parent.v;
                auto add = [&](int a, int b) {
                    SmallEdges child = parent.edges;
                    if (a > b) std::swap(a, b);
                    if (std::find(child.begin(), child.end(), std::make_pair(a, b)) !=
                        child.end())
                        return;
                    child.emplace_back(a, b);
                    CanonicalForm cf = canonical_form(child);
                    by_level[e].emplace(detail::edge_key(cf.edges), cf);
                };
                for (int a = 0; a < v; ++a)
                    for (int b = a + 1; b < v; ++b) add(a, b);
                for (int a = 0; a < v; ++a) add(a, v);
                add(v, v + 1);
            }
        }

        std::vector<CanonicalForm> all;
        for (int e = 1; e <= max_edges_; ++e)
            for (auto& [key, cf] : by_level[e]) all.push_back(cf);
        std::sort(all.begin(), all.end(), [](const CanonicalForm& a, const CanonicalForm& b) {
            if (a.edges.size() != b.edges.size()) return a.edges.size() < b.edges.size();
            if (a.v != b.v) return a.v < b.v;
            return a.edges < b.edges;
        });

        for (std::size_t i = 0; i < all.size(); ++i) {
            SmallGraph g;
            g.id = static_cast<int>(i);
            g.v = all[i].v;
            g.e = static_cast<int>(all[i].edges.size());
            g.canonical_edges = all[i].edges;
            g.aut = all[i].aut;
            g.connected = all[i].components.size() == 1;
            graphs_.push_back(std::move(g));
            index_.emplace(detail::edge_key(all[i].edges), static_cast<int>(i));
        }
        for (std::size_t i = 0; i < all.size(); ++i) {
            for (const auto& comp : all[i].components) {
                auto it = index_.find(detail::edge_key(comp));
                if (it == index_.end())
                    throw std::logic_error("Atlas: component missing from atlas");
                graphs_[i].components.push_back(it->second);
            }
            std::sort(graphs_[i].components.begin(), graphs_[i].components.end());
        }
        assign_names();
    }

    void assign_names() {
        static const std::vector<std::pair<SmallEdges, std::string>> named = {
            {{{0, 1}}, "e1_edge"},
            {{{0, 1}, {0, 2}}, "e2_wedge"},
            {{{0, 1}, {2, 3}}, "e2_2edges"},
            {{{0, 1}, {0, 2}, {1, 2}}, "e3_triangle"},
            {{{0, 1}, {0, 2}, {0, 3}}, "e3_claw"},
            {{{0, 1}, {0, 2}, {1, 3}}, "e3_path"},
            {{{0, 1}, {0, 2}, {3, 4}}, "e3_edge_wedge"},
            {{{0, 1}, {2, 3}, {4, 5}}, "e3_3edges"},
        };
        std::map<std::string, std::string> known;
        for (const auto& [edges, name] : named)
            known.emplace(detail::edge_key(canonical_form(edges).edges), name);
        std::map<std::pair<int, int>, int> counter;  // (e, v) -> running index
        for (auto& g : graphs_) {
            auto it = known.find(detail::edge_key(g.canonical_edges));
            if (it != known.end()) {
                g.name = it->second;
            } else {
                int idx = counter[{g.e, g.v}]++;
                g.name = "e" + std::to_string(g.e) + "v" + std::to_string(g.v) + "_" +
                         std::to_string(idx);
            }
        }
    }

    int max_edges_;
    std::vector<SmallGraph> graphs_;
    std::unordered_map<std::string, int> index_;
};

// Gluing coefficients: c_g(G) * c_g'(G) = sum_h beta[h] * c_h(G) for
// injective homomorphism counts, universal in G. Rows are computed by
// enumerating partial injective identifications of V(g') with V(g) and
// canonicalizing the resulting union pattern.
class GluingTable {
public:
    explicit GluingTable(const Atlas& atlas) : atlas_(atlas) {}

    using Row = std::map<int, std::int64_t>;

    const Row& row(int g, int gp) const {
        const auto& a = atlas_.graph(g);
        const auto& b = atlas_.graph(gp);
        if (a.e + b.e > atlas_.max_edges())
            throw std::invalid_argument("GluingTable: combined size exceeds atlas bound");
        std::pair<int, int> key = {std::min(g, gp), std::max(g, gp)};
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = cache_.find(key);
        if (it == cache_.end())
            it = cache_.emplace(key, compute(key.first, key.second)).first;
        return it->second;
    }

private:
    Row compute(int g, int gp) const {
        const auto& ga = atlas_.graph(g);
        const auto& gb = atlas_.graph(gp);
        const int va = ga.v, vb = gb.v;
        Row out;
        // map[i] = image of g' vertex i in g, or -1 for a fresh vertex.
        std::vector<int> map(vb, -1);
        std::vector<bool> used(va, false);
        std::function<void(int)> rec = [&](int i) {
            if (i == vb) {
                SmallEdges u = ga.canonical_edges;
                int fresh = va;
                std::vector<int> image(vb);
                for (int j = 0; j < vb; ++j)
                    image[j] = map[j] >= 0 ? map[j] : fresh++;
                for (auto [x, y] : gb.canonical_edges) {
                    int a = image[x], b = image[y];
                    if (a > b) std::swap(a, b);
                    u.emplace_back(a, b);
                }
                std::sort(u.begin(), u.end());
                u.erase(std::unique(u.begin(), u.end()), u.end());
                int h = atlas_.id_of(u);
                if (h < 0) throw std::logic_error("GluingTable: union outside atlas");
                ++out[h];
                return;
            }
            map[i] = -1;
            rec(i + 1);
            for (int t = 0; t < va; ++t) {
                if (used[t]) continue;
                used[t] = true;
                map[i] = t;
                rec(i + 1);
                used[t] = false;
            }
            map[i] = -1;
        };
        rec(0);
        return out;
    }

    const Atlas& atlas_;
    mutable std::mutex mutex_;
    mutable std::map<std::pair<int, int>, Row> cache_;
};

} // namespace gct

#endif
