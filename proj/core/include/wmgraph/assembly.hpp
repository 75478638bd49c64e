#pragma once

#include <vector>

#include <Eigen/Dense>

#include "wmgraph/graph.hpp"
#include "wmgraph/kernels.hpp"
#include "wmgraph/sparse.hpp"

namespace wmgraph {

// Endpoint dofs stacked edge by edge: [u(start), u'(start), .., u(end), u'(end), ..].
struct DofIndex {
    int alpha = 1;
    int num_edges = 0;
    int dim() const { return 2 * alpha * num_edges; }
    int operator()(int edge, int end, int order) const { return 2 * alpha * edge + alpha * end + order; }
};

// Precision of the boundaryless endpoint state (x(0), x(l)). A stationary end keeps
// the full stationary precision there instead of subtracting half of r(0,0)^-1.
SmallMat edge_precision(const ModelParams& p, double length, bool stationary_start = false,
                        bool stationary_end = false);

// log det of edge_precision in closed form: -alpha log 4 - 2 log det A with A the
// stationary state covariance, or with the Markov innovation W entering at stationary
// ends. Stays accurate on short edges where a Cholesky of the block would not.
double edge_precision_log_det(const ModelParams& p, double length, bool stationary_start = false,
                              bool stationary_end = false);

// True at degree-1 vertices whose boundary mode is stationary.
bool stationary_vertex(const MetricGraph& g, const ModelParams& p, int v);

// Block-diagonal precision of the independent boundaryless edges. Loops are only
// accepted for alpha = 1.
SpMat assemble_block_precision(const MetricGraph& g, const ModelParams& p);
// Sum of edge_precision_log_det over the edges.
double block_precision_log_det(const MetricGraph& g, const ModelParams& p);

struct VertexBlock {
    int vertex = 0;
    std::vector<int> dofs;  // dofs owned by the vertex
    int first_row = 0;      // rows of K (and constrained coordinates of T)
    int rows = 0;
    Eigen::MatrixXd R;      // local K^T = Q R with positive diagonal
};

struct ConstraintSystem {
    int alpha = 1;
    int dim = 0;
    int k = 0;   // number of constraint rows
    SpMat K;     // k x dim, rows grouped by vertex
    SpMat A;     // |V| x dim, value dof of the first incident half-edge
    SpMat T;     // dim x dim orthogonal; the first k rows carry the constraints
    std::vector<VertexBlock> blocks;
    std::vector<int> pin_rows;  // row of K for each pinned vertex, in request order

    // b* such that K U = b  <=>  (T U)_C = b*.
    Eigen::VectorXd transform_rhs(const Eigen::VectorXd& b) const;
    // log |det| of the map from (T U)_C to K U.
    double log_abs_det_R() const;
    SpMat T_C() const { return T.topRows(k); }
    SpMat T_U() const { return T.bottomRows(dim - k); }
};

// Kirchhoff rows per vertex: value continuity as consecutive differences and, for
// alpha = 2, the sum of outward derivatives. Stationary degree-1 vertices get none.
// Each pinned vertex gets one extra row u(v) = b.
ConstraintSystem build_constraints(const MetricGraph& g, const ModelParams& p,
                                   const std::vector<int>& pinned_vertices = {});

// Fills cs.T and cs.blocks[].R from cs.K by per-vertex Householder QR.
const SpMat& change_of_basis(ConstraintSystem& cs);

// Closed-form alpha = 1 precision of the vertex values.
SpMat alpha1_vertex_precision(const MetricGraph& g, const ModelParams& p);

}  // namespace wmgraph
