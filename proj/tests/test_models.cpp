#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gct/counting.hpp"
#include "gct/models.hpp"

using namespace gct;

namespace {

const Atlas& atlas6() {
    static Atlas a(6);
    return a;
}

int id_by_name(const Atlas& atlas, const std::string& name) {
    for (const auto& g : atlas.graphs())
        if (g.name == name) return g.id;
    FAIL("missing atlas name ", name);
    return -1;
}

}  // namespace

TEST_CASE("ER moments are p^e for every atlas graph") {
    const auto& atlas = atlas6();
    for (double p : {0.2, 0.5, 0.8}) {
        auto spec = SbmSpec::erdos_renyi(p);
        for (const auto& g : atlas.graphs())
            CHECK(sbm_moment(atlas, g.id, spec) ==
                  doctest::Approx(std::pow(p, g.e)).epsilon(1e-12));
    }
}

TEST_CASE("two-block closed forms") {
    const auto& atlas = atlas6();
    int edge = id_by_name(atlas, "e1_edge");
    int wedge = id_by_name(atlas, "e2_wedge");

    auto assort = SbmSpec::assortative(0.5, 0.25);
    CHECK(sbm_moment(atlas, edge, assort) == doctest::Approx(0.5).epsilon(1e-12));

    auto het = SbmSpec::heterogeneous(0.5, 0.5);
    CHECK(sbm_moment(atlas, edge, het) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(sbm_moment(atlas, wedge, het) ==
          doctest::Approx(0.25 * (1 + 0.25 / 4)).epsilon(1e-12));
}

TEST_CASE("moments match Monte Carlo sampling") {
    const auto& atlas = atlas6();
    static Counter counter(atlas);
    auto spec = blend_kronecker(0.3, 0.25, 0.25).sbm;
    auto basis = atlas.full_basis(3);

    const int reps = 1000, n = 64;
    std::vector<std::vector<double>> samples(basis.size());
    for (int i = 0; i < reps; ++i) {
        auto rng = make_rng(1000, i);
        Graph g = sample_sbm(spec, n, rng);
        auto m = counter.moments(g, basis);
        for (std::size_t b = 0; b < basis.size(); ++b)
            samples[b].push_back(m.values[static_cast<Eigen::Index>(b)]);
    }
    for (std::size_t b = 0; b < basis.size(); ++b) {
        double mean = 0, var = 0;
        for (double x : samples[b]) mean += x;
        mean /= reps;
        for (double x : samples[b]) var += (x - mean) * (x - mean);
        double se = std::sqrt(var / (reps - 1) / reps);
        double analytic = sbm_moment(atlas, basis[b], spec);
        CHECK(std::abs(mean - analytic) < 4 * std::max(se, 1e-12));
    }
}

TEST_CASE("jacobian closed forms") {
    const auto& atlas = atlas6();
    auto er = SbmSpec::erdos_renyi(0.4);
    auto g_edge = sbm_moment_jacobian(atlas, id_by_name(atlas, "e1_edge"), er);
    REQUIRE(g_edge.size() == 1);
    CHECK(g_edge[0] == doctest::Approx(1.0).epsilon(1e-12));

    auto g_wedge = sbm_moment_jacobian(atlas, id_by_name(atlas, "e2_wedge"), er);
    CHECK(g_wedge[0] == doctest::Approx(2 * 0.4).epsilon(1e-12));
}

TEST_CASE("jacobian matches central finite differences") {
    const auto& atlas = atlas6();
    auto rng = make_rng(1100);
    std::uniform_real_distribution<double> unif(0.1, 0.9);
    // All connected patterns plus a spread of disconnected ones.
    std::vector<int> ids;
    for (const auto& g : atlas.graphs())
        if (g.connected || g.id % 7 == 0) ids.push_back(g.id);

    for (int trial = 0; trial < 20; ++trial) {
        const int k = 4;
        std::vector<std::vector<double>> b(k, std::vector<double>(k, 0.0));
        for (int i = 0; i < k; ++i)
            for (int j = i; j < k; ++j) b[i][j] = b[j][i] = unif(rng);
        SbmSpec spec({0.25, 0.25, 0.25, 0.25}, b);

        for (int id : ids) {
            auto grad = sbm_moment_jacobian(atlas, id, spec);
            const double h = 1e-6;
            for (int i = 0; i < k; ++i)
                for (int j = i; j < k; ++j) {
                    auto bp = b, bm = b;
                    bp[i][j] = bp[j][i] = b[i][j] + h;
                    bm[i][j] = bm[j][i] = b[i][j] - h;
                    double fd = (sbm_moment(atlas, id, SbmSpec({0.25, 0.25, 0.25, 0.25}, bp)) -
                                 sbm_moment(atlas, id, SbmSpec({0.25, 0.25, 0.25, 0.25}, bm))) /
                                (2 * h);
                    double an = grad[detail::upper_tri_index(i, j, k)];
                    double scale = std::max({std::abs(an), std::abs(fd), 1e-8});
                    // 1e-8 absolute floor absorbs finite-difference roundoff.
                    if (std::abs(an - fd) > 1e-6 * scale + 1e-8)
                        FAIL("jacobian mismatch for ", atlas.graph(id).name, " at (", i,
                             ",", j, "): ", an, " vs ", fd);
                }
        }
    }
}

TEST_CASE("kronecker blend") {
    const auto& atlas = atlas6();
    int edge = id_by_name(atlas, "e1_edge");

    SUBCASE("zero parameters give ER") {
        auto b = blend_kronecker(0.3, 0.0, 0.0);
        for (const auto& row : b.sbm.B)
            for (double x : row) CHECK(x == doctest::Approx(0.3).epsilon(1e-15));
    }

    SUBCASE("displayed entries") {
        double rho = 0.4, eh = 0.2, ea = 0.1;
        auto b = blend_kronecker(rho, eh, ea);
        CHECK(b.sbm.B[0][0] == doctest::Approx(rho * (1 + eh) * (1 + ea)).epsilon(1e-15));
        CHECK(b.sbm.B[0][1] == doctest::Approx(rho * (1 + eh) * (1 - ea)).epsilon(1e-15));
        CHECK(b.sbm.B[0][2] == doctest::Approx(rho * (1 + ea)).epsilon(1e-15));
        CHECK(b.sbm.B[0][3] == doctest::Approx(rho * (1 - ea)).epsilon(1e-15));
        CHECK(b.sbm.B[2][2] == doctest::Approx(rho * (1 - eh) * (1 + ea)).epsilon(1e-15));
    }

    SUBCASE("edge density is rho across the admissible grid") {
        for (double eh : {0.0, 0.1, 0.25, 0.4})
            for (double ea : {0.0, 0.1, 0.25, 0.4})
                CHECK(sbm_moment(atlas, edge, blend_kronecker(0.5, eh, ea).sbm) ==
                      doctest::Approx(0.5).epsilon(1e-12));
    }

    SUBCASE("zero heterogeneity reduces to the assortative 2-block model") {
        auto blend = blend_kronecker(0.5, 0.0, 0.3).sbm;
        auto two = SbmSpec::assortative(0.5, 0.3);
        for (int id : atlas.full_basis(3))
            CHECK(sbm_moment(atlas, id, blend) ==
                  doctest::Approx(sbm_moment(atlas, id, two)).epsilon(1e-12));
    }

    SUBCASE("out-of-range entries are rejected by name") {
        CHECK_THROWS_WITH_AS(blend_kronecker(0.6, 0.5, 0.5),
                             doctest::Contains("(1,1)"), std::invalid_argument);
    }
}

TEST_CASE("perturbations are symmetric with Bernoulli-scaled variance") {
    auto b0 = blend_kronecker(0.5, 0.25, 0.25).sbm;
    auto rng = make_rng(1200);
    const int reps = 20000;
    double acc_diag = 0.0, acc_off = 0.0;
    for (int i = 0; i < reps; ++i) {
        auto p = sample_perturbation(b0, rng);
        CHECK((p.delta - p.delta.transpose()).cwiseAbs().maxCoeff() == 0.0);
        acc_diag += p.delta(0, 0) * p.delta(0, 0);
        acc_off += p.delta(0, 1) * p.delta(0, 1);
        if (i == 0) {
            REQUIRE(p.dof_vector.size() == 10);
            CHECK(p.dof_vector[0] == p.delta(0, 0));
            CHECK(p.dof_vector[1] == p.delta(0, 1));
            CHECK(p.dof_vector[4] == p.delta(1, 1));
        }
    }
    double var_diag = acc_diag / reps;
    double var_off = acc_off / reps;
    double s00 = b0.B[0][0] * (1 - b0.B[0][0]);
    double s01 = b0.B[0][1] * (1 - b0.B[0][1]);
    // Diagonal keeps full variance; off-diagonal halves it (symmetrized
    // average of two independent draws).
    CHECK(var_diag == doctest::Approx(s00).epsilon(0.05));
    CHECK(var_off == doctest::Approx(s01 / 2).epsilon(0.05));

    auto scale = perturbation_scale(b0);
    CHECK(scale[0] == doctest::Approx(s00).epsilon(1e-15));
    CHECK(scale[1] == doctest::Approx(s01).epsilon(1e-15));
}
