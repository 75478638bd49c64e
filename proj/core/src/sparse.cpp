#include "wmgraph/sparse.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>

#include "wmgraph/errors.hpp"

namespace wmgraph {

struct SparseCholesky::Impl {
    Eigen::SimplicialLLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> llt;
    bool analyzed = false;
    bool factored = false;
    bool empty = false;
};

SparseCholesky::SparseCholesky() : impl_(std::make_unique<Impl>()) {}
SparseCholesky::SparseCholesky(const SpMat& a) : SparseCholesky() { compute(a); }
SparseCholesky::~SparseCholesky() = default;
SparseCholesky::SparseCholesky(SparseCholesky&&) noexcept = default;
SparseCholesky& SparseCholesky::operator=(SparseCholesky&&) noexcept = default;

void SparseCholesky::analyze(const SpMat& a) {
    impl_->empty = a.rows() == 0;
    if (impl_->empty) {
        impl_->analyzed = true;
        return;
    }
    impl_->llt.analyzePattern(a);
    impl_->analyzed = true;
    impl_->factored = false;
}

void SparseCholesky::factorize(const SpMat& a) {
    if (!impl_->analyzed) analyze(a);
    if (impl_->empty) {
        impl_->factored = true;
        return;
    }
    impl_->llt.factorize(a);
    if (impl_->llt.info() != Eigen::Success) throw NumericalError("sparse Cholesky: matrix is not positive definite");
    impl_->factored = true;
}

Eigen::VectorXd SparseCholesky::solve(const Eigen::VectorXd& b) const {
    if (!impl_->factored) throw NumericalError("sparse Cholesky: solve before factorize");
    if (impl_->empty) return b;
    return impl_->llt.solve(b);
}

Eigen::MatrixXd SparseCholesky::solve(const Eigen::MatrixXd& b) const {
    if (!impl_->factored) throw NumericalError("sparse Cholesky: solve before factorize");
    if (impl_->empty) return b;
    return impl_->llt.solve(b);
}

double SparseCholesky::log_det() const {
    if (!impl_->factored) throw NumericalError("sparse Cholesky: log_det before factorize");
    if (impl_->empty) return 0.0;
    SpMat l = impl_->llt.matrixL();
    double s = 0.0;
    for (int j = 0; j < l.outerSize(); ++j) {
        for (SpMat::InnerIterator it(l, j); it; ++it) {
            if (it.row() == j) {
                s += std::log(it.value());
                break;
            }
        }
    }
    return 2.0 * s;
}

Eigen::VectorXd SparseCholesky::sample_transform(const Eigen::VectorXd& eps) const {
    if (!impl_->factored) throw NumericalError("sparse Cholesky: sample before factorize");
    if (impl_->empty) return eps;
    Eigen::VectorXd x = impl_->llt.matrixU().solve(eps);
    return impl_->llt.permutationPinv() * x;
}

int SparseCholesky::rows() const { return impl_->empty ? 0 : static_cast<int>(impl_->llt.rows()); }

double asymmetry(const SpMat& a) {
    SpMat d = a - SpMat(a.transpose());
    double m = 0.0;
    for (int j = 0; j < d.outerSize(); ++j)
        for (SpMat::InnerIterator it(d, j); it; ++it) m = std::max(m, std::abs(it.value()));
    return m;
}

void write_coordinates(std::ostream& os, const SpMat& a) {
    os << std::setprecision(17);
    for (int j = 0; j < a.outerSize(); ++j)
        for (SpMat::InnerIterator it(a, j); it; ++it) os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

}  // namespace wmgraph
