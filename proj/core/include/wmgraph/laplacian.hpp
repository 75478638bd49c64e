#pragma once

#include <functional>
#include <vector>

#include "wmgraph/graph.hpp"
#include "wmgraph/kernels.hpp"
#include "wmgraph/sparse.hpp"

namespace wmgraph {

// (kappa_hat^2 I + D - W)^alpha with unweighted adjacency W (multi-edges counted,
// loops ignored).
SpMat graph_laplacian_precision(const MetricGraph& g, double kappa_hat, int alpha);

// Sum of 1/length over incident edges on the diagonal, -1/length per edge off it.
SpMat weighted_laplacian(const MetricGraph& g);

// Scaling that matches the Laplacian model to the exact alpha = 1 precision on a
// mesh of width h: c_hat = e^{-kh} / (1 - e^{-2kh}), kappa_hat^2 = 1/c_hat + 2e^{-kh} - 2.
struct LaplacianScaling {
    double c_hat = 0.0;
    double kappa_hat2 = 0.0;
};
LaplacianScaling laplacian_scaling(double kappa, double h);

// Cuts every edge into pieces of length h. Throws GraphError unless h divides every length.
MetricGraph subdivide(const MetricGraph& g, double h);

struct SubdivisionRow {
    double h = 0.0;
    double c_hat = 0.0;
    double kappa_hat = 0.0;
    double max_discrepancy = 0.0;  // over pairs of original vertices
};

// Exact alpha = 1 covariance against (2 kappa tau^2 c_hat)^-1 Q_hat^-1 on the subdivided graph.
std::vector<SubdivisionRow> subdivision_convergence(const MetricGraph& g, const ModelParams& p,
                                                    const std::vector<double>& h_grid);

using TauRule = std::function<double(double kappa)>;  // returns tau

struct KappaZeroRow {
    double kappa = 0.0;
    double max_error = 0.0;  // max |2 kappa Q - weighted Laplacian|
};

// alpha = 1, loop-free. Default rule tau^2 = 1 / (2 kappa).
std::vector<KappaZeroRow> kappa_zero_limit_check(const MetricGraph& g, const std::vector<double>& kappa_grid,
                                                 const TauRule& rule = {});

// Exact precision Q = Sigma_hat^-1 - sum_i s_i e_i e_i^T on the subdivided graph, where
// s_i = (2 kappa tau^2)(1 - d_i/2 + c_hat (d_i - 2)(1 - e^{-kappa h})) is nonzero only
// at vertices of degree != 2. Compares Sigma - Sigma_hat with the low-rank update
// Sigma_D (S^-1 + Sigma_DD)^-1 Sigma_D^T (one defect: Sherman-Morrison).
struct DefectCheck {
    int defects = 0;
    double max_error = 0.0;        // identity residual
    double max_discrepancy = 0.0;  // max |Sigma - Sigma_hat|
};
DefectCheck defect_identity_check(const MetricGraph& g, const ModelParams& p, double h);

}  // namespace wmgraph
