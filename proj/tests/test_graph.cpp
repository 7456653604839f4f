#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "gct/graph.hpp"
#include "gct/sbm.hpp"

using namespace gct;

TEST_CASE("edge list parsing") {
    std::istringstream in("0 1\n1 2\n");
    auto r = load_edge_list(in);
    CHECK(r.graph.n() == 3);
    CHECK(r.graph.num_edges() == 2);
    CHECK(r.graph.has_edge(0, 1));
    CHECK(r.graph.has_edge(1, 2));
    CHECK(!r.graph.has_edge(0, 2));
}

TEST_CASE("edge list dedups reversed pairs") {
    std::istringstream in("a b\nb a\n");
    auto r = load_edge_list(in);
    CHECK(r.graph.n() == 2);
    CHECK(r.graph.num_edges() == 1);
    CHECK(r.dropped_duplicates == 1);
}

TEST_CASE("edge list drops self-loops") {
    std::istringstream in("0 0\n0 1\n");
    auto r = load_edge_list(in);
    CHECK(r.graph.n() == 2);
    CHECK(r.graph.num_edges() == 1);
    CHECK(r.dropped_self_loops == 1);
}

TEST_CASE("edge list comments and malformed lines") {
    std::istringstream ok("# header\n0 1\n\n");
    CHECK(load_edge_list(ok).graph.num_edges() == 1);
    std::istringstream bad("0 1 2\n");
    CHECK_THROWS_AS(load_edge_list(bad), ParseError);
}

TEST_CASE("graph json round trip") {
    Graph g(4, {{0, 1}, {2, 3}, {1, 2}});
    Graph h = Graph::from_json(g.to_json());
    CHECK(h.n() == 4);
    CHECK(h.edges() == g.edges());
}

TEST_CASE("sbm extremes") {
    auto rng = make_rng(1);
    Graph k5 = sample_sbm(SbmSpec::erdos_renyi(1.0), 5, rng);
    CHECK(k5.num_edges() == 10);
    Graph empty = sample_sbm(SbmSpec::erdos_renyi(0.0), 5, rng);
    CHECK(empty.num_edges() == 0);
}

TEST_CASE("assortative eps=1 has no cross-block edges in expectation") {
    auto spec = SbmSpec::assortative(0.5, 1.0);
    CHECK(spec.B[0][1] == 0.0);
    CHECK(spec.B[0][0] == 1.0);
}

TEST_CASE("sbm empirical edge density") {
    const double p = 0.3;
    const int n = 64, reps = 1000;
    auto spec = SbmSpec::erdos_renyi(p);
    double total = 0;
    for (int i = 0; i < reps; ++i) {
        auto rng = make_rng(42, i);
        total += sample_sbm(spec, n, rng).density();
    }
    double mean = total / reps;
    double pairs = n * (n - 1) / 2.0;
    double se = std::sqrt(p * (1 - p) / pairs / reps);
    CHECK(std::abs(mean - p) < 4 * se);
}

TEST_CASE("subsample keeps induced subgraph") {
    auto rng = make_rng(7);
    Graph g = sample_sbm(SbmSpec::erdos_renyi(0.4), 30, rng);
    Graph full = subsample_nodes(g, g.n(), rng);
    CHECK(full.num_edges() == g.num_edges());

    // Mean kept nodes ~ Binomial(n, target/n).
    const double target = 10.0;
    const int reps = 10000;
    double total = 0;
    for (int i = 0; i < reps; ++i) {
        auto r2 = make_rng(9, i);
        total += subsample_nodes(g, target, r2).n();
    }
    double keep_p = target / g.n();
    double se = std::sqrt(g.n() * keep_p * (1 - keep_p) / reps);
    CHECK(std::abs(total / reps - target) < 3 * se);
}

TEST_CASE("subsample of complete graph is complete") {
    std::vector<std::pair<int, int>> edges;
    for (int u = 0; u < 10; ++u)
        for (int v = u + 1; v < 10; ++v) edges.emplace_back(u, v);
    Graph k10(10, edges);
    auto rng = make_rng(3);
    Graph s = subsample_nodes(k10, 5.0, rng);
    CHECK(s.num_edges() == static_cast<std::size_t>(s.n() * (s.n() - 1) / 2));
}

TEST_CASE("match edge density") {
    std::vector<std::pair<int, int>> edges;
    for (int u = 0; u < 4; ++u)
        for (int v = u + 1; v < 4; ++v) edges.emplace_back(u, v);
    Graph k4(4, edges);
    auto rng = make_rng(5);
    CHECK(match_edge_density(k4, 1.0, rng).num_edges() == 6);
    CHECK(match_edge_density(k4, 0.5, rng).num_edges() == 3);
    CHECK(match_edge_density(k4, 0.0, rng).num_edges() == 0);
    CHECK_THROWS(match_edge_density(Graph(4, {{0, 1}}), 0.9, rng));
}
