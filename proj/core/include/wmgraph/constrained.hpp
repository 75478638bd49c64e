#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "wmgraph/assembly.hpp"
#include "wmgraph/sparse.hpp"

namespace wmgraph {

// Block-diagonal observation covariance: blocks over disjoint index sets covering 0..n-1.
struct BlockCov {
    int n = 0;
    std::vector<std::vector<int>> index;
    std::vector<Eigen::MatrixXd> blocks;

    static BlockCov diagonal(int n, double variance);
    void add_block(std::vector<int> rows, Eigen::MatrixXd cov);
    Eigen::MatrixXd dense() const;
    // Sparse inverse and log-determinant via per-block Cholesky. Throws NumericalError.
    SpMat inverse(double* log_det = nullptr) const;
};

// Gaussian U with boundaryless precision Qtilde, restricted to K U = b.
class ConstrainedGaussian {
public:
    // log_det_Qtilde, when given, replaces a Cholesky of Qtilde in log_density_constraints.
    ConstrainedGaussian(SpMat Qtilde, ConstraintSystem cs, std::optional<double> log_det_Qtilde = std::nullopt);

    const SpMat& Qtilde() const { return Qt_; }
    const ConstraintSystem& constraints() const { return cs_; }
    const SpMat& Qstar_UU() const { return Quu_; }
    const SpMat& Qstar_UC() const { return Quc_; }
    const SparseCholesky& chol_UU() const { return chol_; }
    int dim() const { return cs_.dim; }

    // Conditional mean of the unconstrained coordinates given (T U)_C = bstar.
    Eigen::VectorXd prior_mean_U(const Eigen::VectorXd& bstar) const;
    // Maps coordinates (bstar, zU) back to U = T^T [bstar; zU].
    Eigen::VectorXd to_dofs(const Eigen::VectorXd& bstar, const Eigen::VectorXd& zU) const;
    // log density of K Utilde at b, Utilde ~ N(0, Qtilde^-1) without constraints.
    double log_density_constraints(const Eigen::VectorXd& b) const;

private:
    SpMat Qt_;
    ConstraintSystem cs_;
    std::optional<double> log_det_Qt_;
    SpMat Quu_, Quc_, Qcc_;
    SparseCholesky chol_;
};

// A (Qt^-1 - Qt^-1 K^T (K Qt^-1 K^T)^-1 K Qt^-1) A^T, using the block structure of Qt.
Eigen::MatrixXd constrained_covariance(const ConstrainedGaussian& cg, const SpMat& A);

// Draw of U given K U = b (b = 0 when empty). Standard normals are consumed in
// coordinate order from rng.
Eigen::VectorXd sample_constrained(const ConstrainedGaussian& cg, std::mt19937_64& rng,
                                   const Eigen::VectorXd& b = Eigen::VectorXd());

struct ConstrainedSample {
    Eigen::VectorXd U;       // all endpoint dofs
    Eigen::VectorXd values;  // A U
};
ConstrainedSample sample_constrained(const ConstrainedGaussian& cg, const SpMat& A, std::uint64_t seed);

// log pi(y | K U = b) for Y = B U + e, e ~ N(0, Sigma).
double density_y_given_constraints(const ConstrainedGaussian& cg, const SpMat& B, const BlockCov& Sigma,
                                   const Eigen::VectorXd& b, const Eigen::VectorXd& y);

// U | {K U = b, Y = y}. Q_hat = T_U^T Qhat*_UU T_U.
class PosteriorU {
public:
    Eigen::VectorXd mean;
    const SpMat& TU() const { return TU_; }
    const SpMat& Qhat_star() const { return Qhat_; }
    SpMat precision() const;
    // Sel (m x dim) -> Sel Cov Sel^T.
    Eigen::MatrixXd covariance(const SpMat& Sel) const;
    // Diagonal only, one solve per row of Sel.
    Eigen::VectorXd variances(const SpMat& Sel) const;

private:
    friend PosteriorU posterior_u(const ConstrainedGaussian&, const SpMat&, const BlockCov&, const Eigen::VectorXd&,
                                  const Eigen::VectorXd&);
    SpMat TU_, Qhat_;
    SparseCholesky chol_;
};

PosteriorU posterior_u(const ConstrainedGaussian& cg, const SpMat& B, const BlockCov& Sigma, const Eigen::VectorXd& b,
                       const Eigen::VectorXd& y);

}  // namespace wmgraph
