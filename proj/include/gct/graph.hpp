#ifndef GCT_GRAPH_HPP
#define GCT_GRAPH_HPP

#include <algorithm>
#include <cstdint>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

namespace gct {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Simple undirected unweighted graph on labeled nodes 0..n-1.
// Immutable after construction; safe to share across threads.
class Graph {
public:
    Graph() : n_(0) {}

    // Edges are deduplicated and normalized to (u < v); self-loops are
    // rejected. Endpoints must lie in [0, n).
    Graph(int n, std::vector<std::pair<int, int>> edges) : n_(n) {
        if (n < 0) throw std::invalid_argument("Graph: negative node count");
        for (auto& [u, v] : edges) {
            if (u == v) throw std::invalid_argument("Graph: self-loop");
            if (u < 0 || v < 0 || u >= n || v >= n)
                throw std::invalid_argument("Graph: endpoint out of range");
            if (u > v) std::swap(u, v);
        }
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
        edges_ = std::move(edges);
        adj_.assign(n_, {});
        for (auto [u, v] : edges_) {
            adj_[u].push_back(v);
            adj_[v].push_back(u);
        }
        for (auto& nb : adj_) std::sort(nb.begin(), nb.end());
    }

    int n() const { return n_; }
    std::size_t num_edges() const { return edges_.size(); }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    const std::vector<int>& neighbors(int v) const { return adj_.at(v); }
    int degree(int v) const { return static_cast<int>(adj_.at(v).size()); }

    bool has_edge(int u, int v) const {
        if (u == v) return false;
        const auto& nb = adj_.at(u);
        return std::binary_search(nb.begin(), nb.end(), v);
    }

    double density() const {
        if (n_ < 2) return 0.0;
        return 2.0 * static_cast<double>(edges_.size()) / (static_cast<double>(n_) * (n_ - 1));
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["n"] = n_;
        auto arr = nlohmann::json::array();
        for (auto [u, v] : edges_) arr.push_back({u, v});
        j["edges"] = std::move(arr);
        return j;
    }

    static Graph from_json(const nlohmann::json& j) {
        int n = j.at("n").get<int>();
        std::vector<std::pair<int, int>> edges;
        for (const auto& e : j.at("edges"))
            edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
        return Graph(n, std::move(edges));
    }

private:
    int n_;
    std::vector<std::pair<int, int>> edges_;
    std::vector<std::vector<int>> adj_;
};

struct EdgeListResult {
    Graph graph;
    int dropped_duplicates = 0;
    int dropped_self_loops = 0;
};

// Whitespace-separated edge list, one edge per line; '#' starts a comment
// line. Node tokens are arbitrary strings, relabeled densely 0..n-1 in
// first-appearance order.
inline EdgeListResult load_edge_list(std::istream& in) {
    EdgeListResult result;
    std::unordered_map<std::string, int> ids;
    std::vector<std::pair<int, int>> edges;
    std::vector<std::pair<int, int>> seen_sorted;
    std::string line;
    int line_no = 0;
    auto intern = [&](const std::string& tok) {
        auto [it, inserted] = ids.emplace(tok, static_cast<int>(ids.size()));
        return it->second;
    };
    while (std::getline(in, line)) {
        ++line_no;
        std::string stripped = line;
        auto first = stripped.find_first_not_of(" \t\r\n");
        if (first == std::string::npos) continue;
        if (stripped[first] == '#') continue;
        std::istringstream ls(stripped);
        std::string a, b, extra;
        if (!(ls >> a >> b) || (ls >> extra))
            throw ParseError("edge list line " + std::to_string(line_no) +
                             ": expected exactly two tokens");
        int u = intern(a);
        int v = intern(b);
        if (u == v) {
            ++result.dropped_self_loops;
            continue;
        }
        edges.emplace_back(u, v);
    }
    // Count duplicates (including reversed pairs) before Graph dedups them.
    {
        auto sorted = edges;
        for (auto& [u, v] : sorted)
            if (u > v) std::swap(u, v);
        std::sort(sorted.begin(), sorted.end());
        result.dropped_duplicates =
            static_cast<int>(sorted.size() -
                             (std::unique(sorted.begin(), sorted.end()) - sorted.begin()));
    }
    result.graph = Graph(static_cast<int>(ids.size()), std::move(edges));
    return result;
}

} // namespace gct

#endif
