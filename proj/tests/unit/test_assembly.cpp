#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "wmgraph/assembly.hpp"
#include "wmgraph/constrained.hpp"
#include "wmgraph/errors.hpp"

using namespace wmgraph;

namespace {

ModelParams params(int alpha, double kappa, double tau) {
    ModelParams p;
    p.alpha = alpha;
    p.kappa = kappa;
    p.tau = tau;
    return p;
}

ConstrainedGaussian model(const MetricGraph& g, const ModelParams& p) {
    return ConstrainedGaussian(assemble_block_precision(g, p), build_constraints(g, p));
}

Eigen::MatrixXd vertex_cov(const MetricGraph& g, const ModelParams& p) {
    const auto cg = model(g, p);
    return constrained_covariance(cg, cg.constraints().A);
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("edge precision inverts the endpoint covariances") {
    for (int alpha : {1, 2}) {
        const ModelParams p = params(alpha, 1.3, 0.7);
        const double len = 0.9;
        const Eigen::MatrixXd stat = Eigen::MatrixXd(edge_precision(p, len, true, true));
        CHECK(max_abs(stat - Eigen::MatrixXd(stationary_edge_precision(p, len))) < 1e-10);
        // Symmetric and positive definite in every boundary mode.
        for (bool s0 : {false, true}) {
            for (bool s1 : {false, true}) {
                const Eigen::MatrixXd q = Eigen::MatrixXd(edge_precision(p, len, s0, s1));
                CHECK(max_abs(q - q.transpose()) < 1e-12);
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q);
                CHECK(es.eigenvalues().minCoeff() > 0.0);
            }
        }
    }
}

TEST_CASE("constraint rows and change of basis") {
    std::mt19937_64 rng(5);
    for (int alpha : {1, 2}) {
        for (int rep = 0; rep < 3; ++rep) {
            const auto g = oracle::random_graph(rng, 7, 10, alpha == 1);
            const ModelParams p = params(alpha, 1.0, 1.0);
            const ConstraintSystem cs = build_constraints(g, p);
            int expect = 0;
            for (int v = 0; v < g.num_vertices(); ++v) expect += g.degree(v) - 1 + (alpha == 2 ? 1 : 0);
            CHECK(cs.k == expect);
            CHECK(cs.dim == 2 * alpha * g.num_edges());

            const Eigen::MatrixXd T = Eigen::MatrixXd(cs.T);
            const Eigen::MatrixXd K = Eigen::MatrixXd(cs.K);
            CHECK(max_abs(T * T.transpose() - Eigen::MatrixXd::Identity(cs.dim, cs.dim)) < 1e-12);
            CHECK(max_abs(K * Eigen::MatrixXd(cs.T_U()).transpose()) < 1e-12);

            const Eigen::VectorXd U = Eigen::VectorXd::Random(cs.dim);
            const Eigen::VectorXd b = K * U;
            CHECK(max_abs(cs.transform_rhs(b) - Eigen::MatrixXd(cs.T_C()) * U) < 1e-12);
            const Eigen::MatrixXd KC = K * Eigen::MatrixXd(cs.T_C()).transpose();
            CHECK(cs.log_abs_det_R() == doctest::Approx(std::log(std::abs(KC.determinant()))).epsilon(1e-10));

            // A reads the common vertex value of a continuous field
            Eigen::VectorXd vals = Eigen::VectorXd::Random(g.num_vertices());
            Eigen::VectorXd Uc = Eigen::VectorXd::Zero(cs.dim);
            const DofIndex dof{alpha, g.num_edges()};
            for (int e = 0; e < g.num_edges(); ++e)
                for (int end = 0; end < 2; ++end) Uc[dof(e, end, 0)] = vals[g.endpoint(e, end)];
            CHECK(max_abs(Eigen::VectorXd(cs.A * Uc) - vals) == 0.0);
            if (alpha == 1) CHECK(max_abs(Eigen::VectorXd(cs.K * Uc)) < 1e-14);
        }
    }
}

TEST_CASE("stationary leaves carry no constraint rows") {
    ModelParams p = params(2, 1.0, 1.0);
    p.boundary = Boundary::stationary;
    const auto g = oracle::star(3, 1.0);
    const ConstraintSystem cs = build_constraints(g, p);
    CHECK(cs.k == 3);  // centre: two continuity rows and one derivative sum
    CHECK(stationary_vertex(g, p, g.vertex_index(1)));
    CHECK_FALSE(stationary_vertex(g, p, g.vertex_index(0)));
    p.boundary_at[1] = Boundary::kirchhoff;
    CHECK_FALSE(stationary_vertex(g, p, g.vertex_index(1)));
}

TEST_CASE("pinned vertices add one value row each") {
    const auto g = oracle::star(3, 1.0);
    const ModelParams p = params(1, 1.0, 1.0);
    const ConstraintSystem base = build_constraints(g, p);
    const ConstraintSystem pinned = build_constraints(g, p, {g.vertex_index(2), g.vertex_index(0)});
    CHECK(pinned.k == base.k + 2);
    REQUIRE(pinned.pin_rows.size() == 2);
    const Eigen::MatrixXd K = Eigen::MatrixXd(pinned.K);
    for (std::size_t i = 0; i < 2; ++i) {
        const int v = i == 0 ? g.vertex_index(2) : g.vertex_index(0);
        Eigen::RowVectorXd row = Eigen::MatrixXd(pinned.A).row(v);
        CHECK(max_abs(K.row(pinned.pin_rows[i]) - row) == 0.0);
    }
}

TEST_CASE("constrained covariance on an interval equals the closed form") {
    for (int alpha : {1, 2}) {
        const ModelParams p = params(alpha, 1.7, 0.6);
        const double len = 1.3;
        const Eigen::MatrixXd C = vertex_cov(oracle::interval(len), p);
        CHECK(C(0, 0) == doctest::Approx(interval_cov(p, len, 0.0, 0.0)).epsilon(1e-12));
        CHECK(C(0, 1) == doctest::Approx(interval_cov(p, len, 0.0, len)).epsilon(1e-12));
        CHECK(C(1, 1) == doctest::Approx(interval_cov(p, len, len, len)).epsilon(1e-12));
    }
}

TEST_CASE("constrained covariance on a circle equals the closed form") {
    const double len = 2.5;
    const ModelParams p1 = params(1, 1.1, 0.9);
    const Eigen::MatrixXd C1 = vertex_cov(oracle::circle(len), p1);
    CHECK(C1(0, 0) == doctest::Approx(circle_cov(p1, len, 0.0, 0.0)).epsilon(1e-12));

    for (int alpha : {1, 2}) {
        const ModelParams p = params(alpha, 1.1, 0.9);
        const auto g = split_loops(oracle::circle(len));
        REQUIRE(g.num_vertices() == 2);
        const Eigen::MatrixXd C = vertex_cov(g, p);
        CHECK(C(0, 0) == doctest::Approx(circle_cov(p, len, 0.0, 0.0)).epsilon(1e-12));
        CHECK(C(0, 1) == doctest::Approx(circle_cov(p, len, 0.0, 0.5 * len)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(assemble_block_precision(oracle::circle(len), params(2, 1.0, 1.0)), GraphError);
}

TEST_CASE("stationary ends reproduce the Matern covariance") {
    for (int alpha : {1, 2}) {
        ModelParams p = params(alpha, 0.9, 1.2);
        p.boundary = Boundary::stationary;
        const double len = 1.4;
        const Eigen::MatrixXd C = vertex_cov(oracle::interval(len), p);
        CHECK(C(0, 0) == doctest::Approx(matern_cov(p, 0.0)).epsilon(1e-12));
        CHECK(C(0, 1) == doctest::Approx(matern_cov(p, len)).epsilon(1e-12));
    }
}

TEST_CASE("closed-form alpha 1 vertex precision inverts the vertex covariance") {
    std::mt19937_64 rng(17);
    for (int rep = 0; rep < 4; ++rep) {
        const auto g = oracle::random_graph(rng, 8, 12, true);
        const ModelParams p = params(1, 1.4, 0.8);
        const Eigen::MatrixXd Q = Eigen::MatrixXd(alpha1_vertex_precision(g, p));
        const Eigen::MatrixXd C = vertex_cov(g, p);
        CHECK(max_abs(Q * C - Eigen::MatrixXd::Identity(C.rows(), C.cols())) < 1e-9);
    }
}

TEST_CASE("vertex covariance converges to the finite-difference oracle on a star") {
    const auto g = oracle::star(3, 1.0);
    const ModelParams p = params(1, 1.0, 1.0);
    const Eigen::MatrixXd C = vertex_cov(g, p);
    const auto mesh = oracle::fd_graph_cov(g, p, 1.0 / 256);
    double err = 0.0;
    for (int v = 0; v < g.num_vertices(); ++v) {
        for (int w = 0; w < g.num_vertices(); ++w) {
            const auto& hv = g.incident(v).front();
            const auto& hw = g.incident(w).front();
            const Location sv{hv.edge, hv.end == 0 ? 0.0 : g.edge(hv.edge).length};
            const Location sw{hw.edge, hw.end == 0 ? 0.0 : g.edge(hw.edge).length};
            err = std::max(err, std::abs(mesh.cov(mesh.node_at(g, sv), mesh.node_at(g, sw)) - C(v, w)));
        }
    }
    CHECK(err < 1e-2 * max_abs(C));
}

TEST_CASE("inserting a degree-2 vertex leaves the covariance unchanged") {
    std::mt19937_64 rng(23);
    for (int alpha : {1, 2}) {
        const auto g = oracle::random_graph(rng, 6, 8, false);
        const ModelParams p = params(alpha, 1.2, 1.0);
        const Eigen::MatrixXd C = vertex_cov(g, p);
        const auto [g2, vs] = add_location_vertices(g, oracle::random_locations(g, 3, rng));
        (void)vs;
        const Eigen::MatrixXd C2 = vertex_cov(g2, p);
        CHECK(max_abs(C2.topLeftCorner(C.rows(), C.cols()) - C) < 1e-10);
    }
}

TEST_CASE("closed-form log determinant of the edge precision") {
    for (int alpha : {1, 2}) {
        const ModelParams p = params(alpha, 1.2, 0.7);
        for (double len : {0.3, 1.0, 4.0}) {
            for (bool s0 : {false, true}) {
                for (bool s1 : {false, true}) {
                    const Eigen::MatrixXd q = Eigen::MatrixXd(edge_precision(p, len, s0, s1));
                    CHECK(edge_precision_log_det(p, len, s0, s1) ==
                          doctest::Approx(std::log(q.determinant())).epsilon(1e-9));
                }
            }
        }
        // length independent with free ends; finite on very short edges
        CHECK(edge_precision_log_det(p, 1e-4) == doctest::Approx(edge_precision_log_det(p, 3.0)).epsilon(1e-15));
        CHECK(std::isfinite(edge_precision_log_det(p, 1e-4, true, false)));
    }
}
