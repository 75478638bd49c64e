#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "wmgraph/sparse.hpp"

namespace wmgraph {

enum class Boundary { kirchhoff, stationary };

struct ModelParams {
    int alpha = 1;       // smoothness, 1 or 2
    double kappa = 1.0;  // inverse range
    double tau = 1.0;    // precision scale
    double sigma = 0.0;  // measurement noise std
    Boundary boundary = Boundary::kirchhoff;      // default at degree-1 vertices
    std::map<std::int64_t, Boundary> boundary_at;  // per vertex id override

    Boundary boundary_of(std::int64_t vertex_id) const;
    void validate() const;  // throws std::invalid_argument
};

// Fixed-capacity small matrix: every kernel block is at most 4x4.
using SmallMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4>;
using SmallVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 4, 1>;

double matern_cov(const ModelParams& p, double h);

// rho(h), rho'(h), rho''(h) of the stationary kernel at signed lag h.
struct MaternDerivs {
    double r0, r1, r2;
};
MaternDerivs matern_derivs(const ModelParams& p, double h);

// r(t1,t2)_{ij} = d^{i}/dt2^{i} d^{j}/dt1^{j} rho(t1 - t2), i,j < alpha.
SmallMat deriv_kernel_matrix(const ModelParams& p, double t1, double t2);

// Cov(x(t1), x(t2)) for the state x = (u, u', ..). Equals deriv_kernel_matrix transposed.
SmallMat state_cov(const ModelParams& p, double t1, double t2);

// Markov transition of the state over a lag d >= 0: x(t+d) = Phi x(t) + w, w ~ N(0, W).
struct MarkovStep {
    SmallMat Phi;
    SmallMat W;
};
SmallMat stationary_state_cov(const ModelParams& p);  // Cov(x(t)), diagonal
MarkovStep markov_step(const ModelParams& p, double d);

// Precision of (x(0), x(l)) for the stationary process on the line.
SmallMat stationary_edge_precision(const ModelParams& p, double length);

double bridge_cov(const ModelParams& p, double length, double t1, double t2);

// Conditional-mean weights of u(t) on (x(0), x(l)): row vector of length 2*alpha.
Eigen::RowVectorXd boundary_weights_S(const ModelParams& p, double length, double t);

// Bridge decomposition of an edge at a batch of points in [0, l]:
// u(t_i) = S.row(i) * [x(0); x(l)] + b_i with b ~ N(0, bridge).
struct EdgeBridge {
    Eigen::MatrixXd S;       // n x 2*alpha
    Eigen::MatrixXd bridge;  // n x n
};
EdgeBridge edge_bridge(const ModelParams& p, double length, const std::vector<double>& ts);

// Same, for the full state x(t_i) (value and derivatives), rows interleaved per point.
EdgeBridge edge_bridge_states(const ModelParams& p, double length, const std::vector<double>& ts);

// Precision of the interior states x(t_1..t_m) (strictly increasing, interior) given
// both end states, and the coupling QB so that E[x_I | x_B] = -Q^-1 QB x_B.
struct BridgeChain {
    SpMat Q;             // a*m x a*m, block tridiagonal
    Eigen::MatrixXd QB;  // a*m x 2*alpha
};
BridgeChain bridge_chain(const ModelParams& p, double length, const std::vector<double>& points);

// Multivariate covariance Cov(x(t1), x(t2)) of the boundaryless edge process.
SmallMat boundaryless_cov(const ModelParams& p, double length, double t1, double t2);

// Interval with Kirchhoff (Neumann) ends.
double interval_cov(const ModelParams& p, double length, double t1, double t2);

// Circle of circumference length.
double circle_cov(const ModelParams& p, double length, double t1, double t2);

}  // namespace wmgraph
