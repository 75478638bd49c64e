#include "wmgraph/constrained.hpp"

#include <cmath>
#include <stdexcept>

#include "wmgraph/errors.hpp"

namespace wmgraph {
namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// Inverse of a matrix that is block diagonal in consecutive blocks of size bs.
SpMat block_diagonal_inverse(const SpMat& Q, int bs) {
    const int n = static_cast<int>(Q.rows());
    std::vector<Triplet> trip;
    trip.reserve(static_cast<std::size_t>(n) * bs);
    for (int s = 0; s < n; s += bs) {
        Eigen::MatrixXd blk = Eigen::MatrixXd(Q.block(s, s, bs, bs));
        Eigen::LLT<Eigen::MatrixXd> llt(blk);
        if (llt.info() != Eigen::Success) throw NumericalError("edge precision block is not positive definite");
        Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(bs, bs));
        for (int i = 0; i < bs; ++i)
            for (int j = 0; j < bs; ++j) trip.emplace_back(s + i, s + j, 0.5 * (inv(i, j) + inv(j, i)));
    }
    SpMat out(n, n);
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

SpMat sub(const SpMat& m, int r0, int c0, int nr, int nc) { return SpMat(m.block(r0, c0, nr, nc)); }

}  // namespace

BlockCov BlockCov::diagonal(int n, double variance) {
    BlockCov c;
    c.n = n;
    for (int i = 0; i < n; ++i) c.add_block({i}, Eigen::MatrixXd::Constant(1, 1, variance));
    return c;
}

void BlockCov::add_block(std::vector<int> rows, Eigen::MatrixXd cov) {
    if (cov.rows() != static_cast<int>(rows.size()) || cov.cols() != cov.rows())
        throw std::invalid_argument("BlockCov block size mismatch");
    index.push_back(std::move(rows));
    blocks.push_back(std::move(cov));
}

Eigen::MatrixXd BlockCov::dense() const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const auto& ix = index[b];
        for (std::size_t i = 0; i < ix.size(); ++i)
            for (std::size_t j = 0; j < ix.size(); ++j) out(ix[i], ix[j]) = blocks[b](i, j);
    }
    return out;
}

SpMat BlockCov::inverse(double* log_det) const {
    std::vector<Triplet> trip;
    double ld = 0.0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const auto& ix = index[b];
        const int m = static_cast<int>(ix.size());
        Eigen::LLT<Eigen::MatrixXd> llt(blocks[b]);
        if (llt.info() != Eigen::Success) throw NumericalError("observation covariance block is not positive definite");
        const auto& L = llt.matrixLLT();
        for (int i = 0; i < m; ++i) ld += 2.0 * std::log(L(i, i));
        Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(m, m));
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) trip.emplace_back(ix[i], ix[j], inv(i, j));
    }
    if (log_det) *log_det = ld;
    SpMat out(n, n);
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

ConstrainedGaussian::ConstrainedGaussian(SpMat Qtilde, ConstraintSystem cs, std::optional<double> log_det_Qtilde)
    : Qt_(std::move(Qtilde)), cs_(std::move(cs)), log_det_Qt_(log_det_Qtilde) {
    if (Qt_.rows() != cs_.dim) throw std::invalid_argument("precision and constraint dimensions differ");
    const int k = cs_.k, m = cs_.dim - cs_.k;
    SpMat Tt = cs_.T.transpose();
    SpMat Qs = cs_.T * Qt_ * Tt;
    Quu_ = sub(Qs, k, k, m, m);
    Quc_ = sub(Qs, k, 0, m, k);
    Qcc_ = sub(Qs, 0, 0, k, k);
    chol_.compute(Quu_);
}

Eigen::VectorXd ConstrainedGaussian::prior_mean_U(const Eigen::VectorXd& bstar) const {
    if (cs_.k == 0) return Eigen::VectorXd::Zero(cs_.dim - cs_.k);
    return -chol_.solve(Eigen::VectorXd(Quc_ * bstar));
}

Eigen::VectorXd ConstrainedGaussian::to_dofs(const Eigen::VectorXd& bstar, const Eigen::VectorXd& zU) const {
    Eigen::VectorXd z(cs_.dim);
    z << bstar, zU;
    return cs_.T.transpose() * z;
}

double ConstrainedGaussian::log_density_constraints(const Eigen::VectorXd& b) const {
    const int k = cs_.k;
    if (k == 0) return 0.0;
    const Eigen::VectorXd bs = cs_.transform_rhs(b);
    const Eigen::VectorXd h = Quc_ * bs;
    const double quad = bs.dot(Qcc_ * bs) - h.dot(chol_.solve(h));
    const double ld_qt = log_det_Qt_ ? *log_det_Qt_ : SparseCholesky(Qt_).log_det();
    return -0.5 * k * kLog2Pi + 0.5 * ld_qt - 0.5 * chol_.log_det() - 0.5 * quad - cs_.log_abs_det_R();
}

Eigen::MatrixXd constrained_covariance(const ConstrainedGaussian& cg, const SpMat& A) {
    const auto& cs = cg.constraints();
    const SpMat Qinv = block_diagonal_inverse(cg.Qtilde(), 2 * cs.alpha);
    const SpMat AQi = A * Qinv;
    Eigen::MatrixXd sigma = Eigen::MatrixXd(AQi * SpMat(A.transpose()));
    if (cs.k == 0) return sigma;
    const SpMat M = Qinv * SpMat(cs.K.transpose());  // Qt^-1 K^T
    const SpMat S = cs.K * M;                         // K Qt^-1 K^T
    SparseCholesky chol(S);
    const SpMat Y = A * M;
    const Eigen::MatrixXd Z = chol.solve(Eigen::MatrixXd(Y.transpose()));
    sigma -= Y * Z;
    return 0.5 * (sigma + sigma.transpose());
}

Eigen::VectorXd sample_constrained(const ConstrainedGaussian& cg, std::mt19937_64& rng, const Eigen::VectorXd& b) {
    const auto& cs = cg.constraints();
    const Eigen::VectorXd bs = b.size() ? cs.transform_rhs(b) : Eigen::VectorXd::Zero(cs.k);
    const int m = cs.dim - cs.k;
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd eps(m);
    for (int i = 0; i < m; ++i) eps[i] = normal(rng);
    Eigen::VectorXd zU = cg.prior_mean_U(bs).head(m) + cg.chol_UU().sample_transform(eps);
    return cg.to_dofs(bs, zU);
}

ConstrainedSample sample_constrained(const ConstrainedGaussian& cg, const SpMat& A, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    ConstrainedSample s;
    s.U = sample_constrained(cg, rng);
    s.values = A * s.U;
    return s;
}

namespace {

struct ObsSystem {
    Eigen::VectorXd bs;    // b*
    SpMat BU;              // B T_U^T
    SpMat Sinv;            // Sigma^-1
    double logdet_sigma;
    Eigen::VectorXd yp;    // y - B T_C^T b*
    Eigen::VectorXd h;     // Q*_UU mu_tilde
    SpMat Qhat;
};

ObsSystem observation_system(const ConstrainedGaussian& cg, const SpMat& B, const BlockCov& Sigma,
                             const Eigen::VectorXd& b, const Eigen::VectorXd& y) {
    const auto& cs = cg.constraints();
    const int k = cs.k, m = cs.dim - cs.k, n = static_cast<int>(y.size());
    if (B.rows() != n || B.cols() != cs.dim || Sigma.n != n)
        throw std::invalid_argument("observation system dimensions are inconsistent");
    ObsSystem o;
    o.bs = b.size() ? cs.transform_rhs(b) : Eigen::VectorXd::Zero(k);
    const SpMat BT = B * SpMat(cs.T.transpose());
    o.BU = SpMat(BT.rightCols(m));
    o.yp = y;
    if (k > 0) o.yp -= SpMat(BT.leftCols(k)) * o.bs;
    o.Sinv = Sigma.inverse(&o.logdet_sigma);
    o.h = k > 0 ? Eigen::VectorXd(-(cg.Qstar_UC() * o.bs)) : Eigen::VectorXd::Zero(m);
    o.Qhat = cg.Qstar_UU() + SpMat(o.BU.transpose() * o.Sinv * o.BU);
    return o;
}

}  // namespace

double density_y_given_constraints(const ConstrainedGaussian& cg, const SpMat& B, const BlockCov& Sigma,
                                   const Eigen::VectorXd& b, const Eigen::VectorXd& y) {
    const ObsSystem o = observation_system(cg, B, Sigma, b, y);
    SparseCholesky ch(o.Qhat);
    const Eigen::VectorXd Siy = o.Sinv * o.yp;
    const Eigen::VectorXd rhs = o.h + o.BU.transpose() * Siy;
    const Eigen::VectorXd mu_hat = ch.solve(rhs);
    const Eigen::VectorXd mu_tilde = cg.chol_UU().solve(o.h);
    const double quad = o.yp.dot(Siy) + mu_tilde.dot(o.h) - mu_hat.dot(rhs);
    const double n = static_cast<double>(y.size());
    return 0.5 * cg.chol_UU().log_det() - 0.5 * o.logdet_sigma - 0.5 * ch.log_det() - 0.5 * n * kLog2Pi - 0.5 * quad;
}

PosteriorU posterior_u(const ConstrainedGaussian& cg, const SpMat& B, const BlockCov& Sigma, const Eigen::VectorXd& b,
                       const Eigen::VectorXd& y) {
    const ObsSystem o = observation_system(cg, B, Sigma, b, y);
    PosteriorU post;
    post.chol_.compute(o.Qhat);
    const Eigen::VectorXd rhs = o.h + o.BU.transpose() * (o.Sinv * o.yp);
    post.mean = cg.to_dofs(o.bs, post.chol_.solve(rhs));
    post.TU_ = cg.constraints().T_U();
    post.Qhat_ = o.Qhat;
    return post;
}

SpMat PosteriorU::precision() const { return SpMat(TU_.transpose() * Qhat_ * TU_); }

Eigen::MatrixXd PosteriorU::covariance(const SpMat& Sel) const {
    const SpMat M = Sel * SpMat(TU_.transpose());
    const Eigen::MatrixXd X = chol_.solve(Eigen::MatrixXd(M.transpose()));
    Eigen::MatrixXd c = M * X;
    return 0.5 * (c + c.transpose());
}

Eigen::VectorXd PosteriorU::variances(const SpMat& Sel) const {
    const SpMat Mt = SpMat(TU_ * SpMat(Sel.transpose()));  // columns = rows of Sel T_U^T
    Eigen::VectorXd v(Sel.rows());
    for (int i = 0; i < Sel.rows(); ++i) {
        Eigen::VectorXd col = Eigen::VectorXd(Mt.col(i));
        v[i] = col.dot(chol_.solve(col));
    }
    return v;
}

}  // namespace wmgraph
