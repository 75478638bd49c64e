#include "wmgraph/laplacian.hpp"

#include <cmath>
#include <stdexcept>

#include "wmgraph/assembly.hpp"
#include "wmgraph/errors.hpp"

namespace wmgraph {
namespace {

Eigen::MatrixXd identity_columns(int n, int k) { return Eigen::MatrixXd::Identity(n, k); }

}  // namespace

SpMat graph_laplacian_precision(const MetricGraph& g, double kappa_hat, int alpha) {
    if (!(kappa_hat > 0.0)) throw std::invalid_argument("kappa_hat must be positive");
    if (alpha != 1 && alpha != 2) throw std::invalid_argument("alpha must be 1 or 2");
    const int n = g.num_vertices();
    std::vector<Triplet> trip;
    for (int v = 0; v < n; ++v) trip.emplace_back(v, v, kappa_hat * kappa_hat);
    for (const auto& e : g.edges()) {
        if (e.is_loop()) continue;
        trip.emplace_back(e.from, e.from, 1.0);
        trip.emplace_back(e.to, e.to, 1.0);
        trip.emplace_back(e.from, e.to, -1.0);
        trip.emplace_back(e.to, e.from, -1.0);
    }
    SpMat Q(n, n);
    Q.setFromTriplets(trip.begin(), trip.end());
    if (alpha == 2) return SpMat(Q * Q);
    return Q;
}

SpMat weighted_laplacian(const MetricGraph& g) {
    const int n = g.num_vertices();
    std::vector<Triplet> trip;
    for (const auto& e : g.edges()) {
        if (e.is_loop()) continue;
        const double w = 1.0 / e.length;
        trip.emplace_back(e.from, e.from, w);
        trip.emplace_back(e.to, e.to, w);
        trip.emplace_back(e.from, e.to, -w);
        trip.emplace_back(e.to, e.from, -w);
    }
    SpMat L(n, n);
    L.setFromTriplets(trip.begin(), trip.end());
    return L;
}

LaplacianScaling laplacian_scaling(double kappa, double h) {
    if (!(kappa > 0.0 && h > 0.0)) throw std::invalid_argument("kappa and h must be positive");
    const double x = kappa * h;
    LaplacianScaling s;
    s.c_hat = std::exp(-x) / (-std::expm1(-2.0 * x));
    s.kappa_hat2 = 1.0 / s.c_hat + 2.0 * std::expm1(-x);
    return s;
}

MetricGraph subdivide(const MetricGraph& g, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("mesh width must be positive");
    std::vector<Location> cuts;
    for (int e = 0; e < g.num_edges(); ++e) {
        const double len = g.edge(e).length;
        const long m = std::lround(len / h);
        if (m < 1 || std::abs(m * h - len) > 1e-9 * len)
            throw GraphError("mesh width does not divide the length of edge " + std::to_string(g.edge(e).id));
        for (long k = 1; k < m; ++k) cuts.push_back({e, k * h});
    }
    return refine(g, cuts).graph;
}

std::vector<SubdivisionRow> subdivision_convergence(const MetricGraph& g, const ModelParams& p,
                                                    const std::vector<double>& h_grid) {
    p.validate();
    if (p.alpha != 1) throw std::invalid_argument("subdivision comparison is defined for alpha = 1");
    const int n0 = g.num_vertices();
    const double s = 2.0 * p.kappa * p.tau * p.tau;
    std::vector<SubdivisionRow> rows;
    for (double h : h_grid) {
        const MetricGraph sg = subdivide(g, h);
        const LaplacianScaling sc = laplacian_scaling(p.kappa, h);
        const Eigen::MatrixXd E = identity_columns(sg.num_vertices(), n0);
        const Eigen::MatrixXd exact = SparseCholesky(alpha1_vertex_precision(sg, p)).solve(E);
        const Eigen::MatrixXd approx =
            SparseCholesky(graph_laplacian_precision(sg, std::sqrt(sc.kappa_hat2), 1)).solve(E) / (s * sc.c_hat);
        rows.push_back({h, sc.c_hat, std::sqrt(sc.kappa_hat2),
                        (exact.topRows(n0) - approx.topRows(n0)).cwiseAbs().maxCoeff()});
    }
    return rows;
}

std::vector<KappaZeroRow> kappa_zero_limit_check(const MetricGraph& g, const std::vector<double>& kappa_grid,
                                                 const TauRule& rule) {
    if (g.has_loops()) throw GraphError("kappa -> 0 check needs a loop-free graph");
    const Eigen::MatrixXd L(weighted_laplacian(g));
    std::vector<KappaZeroRow> rows;
    for (double k : kappa_grid) {
        ModelParams p;
        p.alpha = 1;
        p.kappa = k;
        p.tau = rule ? rule(k) : std::sqrt(1.0 / (2.0 * k));
        const Eigen::MatrixXd Q(alpha1_vertex_precision(g, p));
        rows.push_back({k, (2.0 * k * Q - L).cwiseAbs().maxCoeff()});
    }
    return rows;
}

DefectCheck defect_identity_check(const MetricGraph& g, const ModelParams& p, double h) {
    p.validate();
    if (p.alpha != 1) throw std::invalid_argument("defect identity is defined for alpha = 1");
    const MetricGraph sg = subdivide(g, h);
    if (sg.has_loops()) throw GraphError("defect identity needs a loop-free subdivided graph");
    const int n = sg.num_vertices();
    const double scale = 2.0 * p.kappa * p.tau * p.tau;
    const LaplacianScaling sc = laplacian_scaling(p.kappa, h);

    std::vector<int> dv;
    std::vector<double> sv;
    for (int v = 0; v < n; ++v) {
        const double d = sg.degree(v);
        double si = scale * (1.0 - 0.5 * d - sc.c_hat * (d - 2.0) * std::expm1(-p.kappa * h));
        if (stationary_vertex(sg, p, v)) si -= 0.5 * scale;
        if (std::abs(si) > 1e-14 * scale) {
            dv.push_back(v);
            sv.push_back(si);
        }
    }

    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd sigma = SparseCholesky(alpha1_vertex_precision(sg, p)).solve(I);
    const Eigen::MatrixXd sigma_hat =
        SparseCholesky(graph_laplacian_precision(sg, std::sqrt(sc.kappa_hat2), 1)).solve(I) / (scale * sc.c_hat);

    const int k = static_cast<int>(dv.size());
    Eigen::MatrixXd SD(n, k), core(k, k);
    for (int j = 0; j < k; ++j) SD.col(j) = sigma.col(dv[j]);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) core(i, j) = sigma(dv[i], dv[j]) + (i == j ? 1.0 / sv[i] : 0.0);
    const Eigen::MatrixXd update = k ? Eigen::MatrixXd(SD * core.partialPivLu().solve(SD.transpose()))
                                     : Eigen::MatrixXd::Zero(n, n);

    DefectCheck out;
    out.defects = k;
    out.max_discrepancy = (sigma - sigma_hat).cwiseAbs().maxCoeff();
    out.max_error = (sigma - sigma_hat - update).cwiseAbs().maxCoeff();
    return out;
}

}  // namespace wmgraph
