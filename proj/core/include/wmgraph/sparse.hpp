#pragma once

#include <memory>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace wmgraph {

using SpMat = Eigen::SparseMatrix<double>;  // column major
using Triplet = Eigen::Triplet<double>;

// Symmetric positive-definite factorization with a fill-reducing ordering.
// analyze() may be called once and factorize() repeatedly for a fixed pattern.
class SparseCholesky {
public:
    SparseCholesky();
    explicit SparseCholesky(const SpMat& a);
    ~SparseCholesky();
    SparseCholesky(SparseCholesky&&) noexcept;
    SparseCholesky& operator=(SparseCholesky&&) noexcept;

    void analyze(const SpMat& a);
    void factorize(const SpMat& a);  // throws NumericalError when not SPD
    void compute(const SpMat& a) {
        analyze(a);
        factorize(a);
    }

    Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
    Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;
    double log_det() const;
    // x = P^T L^-T eps, so x ~ N(0, A^-1) when eps is standard normal.
    Eigen::VectorXd sample_transform(const Eigen::VectorXd& eps) const;
    int rows() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Lower-triangle-free symmetric check helper: max |A - A^T|.
double asymmetry(const SpMat& a);

// Coordinate dump, 17 significant digits, one "row col value" per line.
void write_coordinates(std::ostream& os, const SpMat& a);

}  // namespace wmgraph
