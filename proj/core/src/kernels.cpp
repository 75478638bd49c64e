#include "wmgraph/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wmgraph/errors.hpp"

namespace wmgraph {
namespace {

void check_alpha(int alpha) {
    if (alpha != 1 && alpha != 2) throw std::invalid_argument("alpha must be 1 or 2");
}

// Variance constant of the stationary kernel: rho(0).
double scale(const ModelParams& p) {
    const double k = p.kappa, t2 = p.tau * p.tau;
    return p.alpha == 1 ? 1.0 / (2.0 * k * t2) : 1.0 / (4.0 * k * k * k * t2);
}

// 1 - exp(-2x) (1 + 2 s x + 2 x^2) for s = +-1, accurate for small x where the
// closed form cancels to O(x^3) (s = +1) or O(x) (s = -1).
double one_minus_exp_quad(double x, int s) {
    if (x > 0.5) return 1.0 - std::exp(-2.0 * x) * (1.0 + 2.0 * s * x + 2.0 * x * x);
    // coefficient k of exp(-2x)(1 + 2sx + 2x^2) is a_k + 2s a_{k-1} + 2 a_{k-2}
    double a2 = 0.0, a1 = 1.0;  // a_{k-2}, a_{k-1} with a_0 = 1
    double xk = 1.0, sum = 0.0;
    for (int k = 1; k < 40; ++k) {
        double ak = a1 * (-2.0) / k;
        xk *= x;
        double term = (ak + 2.0 * s * a1 + 2.0 * a2) * xk;
        sum -= term;
        if (k > 4 && std::abs(term) < 1e-18 * std::abs(sum)) break;
        a2 = a1;
        a1 = ak;
    }
    return sum;
}

SmallMat inverse_spd(const SmallMat& m) {
    SmallMat inv = m.llt().solve(SmallMat::Identity(m.rows(), m.cols()));
    return 0.5 * (inv + inv.transpose());
}

}  // namespace

Boundary ModelParams::boundary_of(std::int64_t vertex_id) const {
    auto it = boundary_at.find(vertex_id);
    return it == boundary_at.end() ? boundary : it->second;
}

void ModelParams::validate() const {
    check_alpha(alpha);
    if (!(kappa > 0.0) || !std::isfinite(kappa)) throw std::invalid_argument("kappa must be positive");
    if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("tau must be positive");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be non-negative");
}

double matern_cov(const ModelParams& p, double h) {
    return matern_derivs(p, h).r0;
}

MaternDerivs matern_derivs(const ModelParams& p, double h) {
    check_alpha(p.alpha);
    const double k = p.kappa, c = scale(p), a = std::abs(h);
    const double e = std::exp(-k * a);
    if (p.alpha == 1) {
        const double sgn = h > 0 ? 1.0 : (h < 0 ? -1.0 : 0.0);
        return {c * e, -k * sgn * c * e, k * k * c * e};
    }
    return {c * (1.0 + k * a) * e, -c * k * k * h * e, c * k * k * (k * a - 1.0) * e};
}

SmallMat state_cov(const ModelParams& p, double t1, double t2) {
    const MaternDerivs d = matern_derivs(p, t1 - t2);
    SmallMat m(p.alpha, p.alpha);
    if (p.alpha == 1) {
        m(0, 0) = d.r0;
    } else {
        m << d.r0, -d.r1, d.r1, -d.r2;
    }
    return m;
}

SmallMat deriv_kernel_matrix(const ModelParams& p, double t1, double t2) {
    return state_cov(p, t1, t2).transpose();
}

SmallMat stationary_state_cov(const ModelParams& p) {
    check_alpha(p.alpha);
    const double c = scale(p);
    SmallMat a = SmallMat::Zero(p.alpha, p.alpha);
    a(0, 0) = c;
    if (p.alpha == 2) a(1, 1) = c * p.kappa * p.kappa;
    return a;
}

MarkovStep markov_step(const ModelParams& p, double d) {
    check_alpha(p.alpha);
    const double k = p.kappa, c = scale(p), x = k * d;
    const double e = std::exp(-x);
    MarkovStep s;
    if (p.alpha == 1) {
        s.Phi = SmallMat::Constant(1, 1, e);
        s.W = SmallMat::Constant(1, 1, -c * std::expm1(-2.0 * x));
        return s;
    }
    s.Phi.resize(2, 2);
    s.Phi << e * (1.0 + x), e * d, -e * k * k * d, e * (1.0 - x);
    const double off = 2.0 * c * k * x * x * std::exp(-2.0 * x);
    s.W.resize(2, 2);
    s.W << c * one_minus_exp_quad(x, +1), off, off, c * k * k * one_minus_exp_quad(x, -1);
    return s;
}

SmallMat stationary_edge_precision(const ModelParams& p, double length) {
    if (!(length > 0.0)) throw GraphError("edge length must be positive");
    const int a = p.alpha;
    const SmallMat Ainv = inverse_spd(stationary_state_cov(p));
    const MarkovStep s = markov_step(p, length);
    const SmallMat Winv = inverse_spd(s.W);
    const SmallMat WinvPhi = Winv * s.Phi;
    SmallMat q(2 * a, 2 * a);
    q.topLeftCorner(a, a) = Ainv + s.Phi.transpose() * WinvPhi;
    q.topRightCorner(a, a) = -WinvPhi.transpose();
    q.bottomLeftCorner(a, a) = -WinvPhi;
    q.bottomRightCorner(a, a) = Winv;
    return 0.5 * (q + q.transpose());
}

BridgeChain bridge_chain(const ModelParams& p, double length, const std::vector<double>& points) {
    const int a = p.alpha, m = static_cast<int>(points.size());
    std::vector<double> nodes{0.0};
    nodes.insert(nodes.end(), points.begin(), points.end());
    nodes.push_back(length);
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        if (!(nodes[i] > nodes[i - 1])) throw std::invalid_argument("bridge points must be increasing and interior");
    }
    std::vector<Triplet> trip;
    BridgeChain ch;
    ch.QB = Eigen::MatrixXd::Zero(a * m, 2 * a);
    auto add = [&](int r0, int c0, const SmallMat& b, double sign) {
        for (int i = 0; i < a; ++i)
            for (int j = 0; j < a; ++j) trip.emplace_back(r0 + i, c0 + j, sign * b(i, j));
    };
    for (int i = 0; i <= m; ++i) {
        const MarkovStep s = markov_step(p, nodes[i + 1] - nodes[i]);
        const SmallMat Winv = inverse_spd(s.W);
        const SmallMat WinvPhi = Winv * s.Phi;
        // step i links node i (interior index i-1) to node i+1 (interior index i)
        if (i >= 1) add((i - 1) * a, (i - 1) * a, s.Phi.transpose() * WinvPhi, 1.0);
        if (i < m) add(i * a, i * a, Winv, 1.0);
        if (i >= 1 && i < m) {
            add(i * a, (i - 1) * a, WinvPhi, -1.0);
            add((i - 1) * a, i * a, WinvPhi.transpose(), -1.0);
        }
        if (m > 0 && i == 0) ch.QB.block(0, 0, a, a) -= WinvPhi;
        if (m > 0 && i == m) ch.QB.block((m - 1) * a, a, a, a) -= WinvPhi.transpose();
    }
    ch.Q.resize(a * m, a * m);
    ch.Q.setFromTriplets(trip.begin(), trip.end());
    return ch;
}

// Covariance form: condition the stationary state process on the 2*alpha end states.
// Only a 2*alpha system is solved, so closely spaced points cost no accuracy.
EdgeBridge edge_bridge_states(const ModelParams& p, double length, const std::vector<double>& ts) {
    if (!(length > 0.0)) throw GraphError("edge length must be positive");
    const int a = p.alpha, n = static_cast<int>(ts.size());
    const double tol = 1e-12 * length;

    SmallMat RBB(2 * a, 2 * a);
    RBB << state_cov(p, 0.0, 0.0), state_cov(p, 0.0, length), state_cov(p, length, 0.0), state_cov(p, length, length);
    Eigen::LLT<SmallMat> llt(RBB);
    if (llt.info() != Eigen::Success) throw NumericalError("end state covariance is not positive definite");

    // slot of each requested point: -1 start, -2 end, otherwise interior
    std::vector<int> slot(n, 0);
    Eigen::MatrixXd rTB = Eigen::MatrixXd::Zero(a * n, 2 * a);
    for (int i = 0; i < n; ++i) {
        if (ts[i] <= tol) {
            slot[i] = -1;
        } else if (ts[i] >= length - tol) {
            slot[i] = -2;
        } else {
            rTB.block(i * a, 0, a, a) = state_cov(p, ts[i], 0.0);
            rTB.block(i * a, a, a, a) = state_cov(p, ts[i], length);
        }
    }
    EdgeBridge out;
    out.S = llt.solve(rTB.transpose()).transpose();
    out.bridge = Eigen::MatrixXd::Zero(a * n, a * n);
    for (int i = 0; i < n; ++i) {
        if (slot[i] == -1) {
            out.S.block(i * a, 0, a, 2 * a).setZero();
            out.S.block(i * a, 0, a, a).setIdentity();
        } else if (slot[i] == -2) {
            out.S.block(i * a, 0, a, 2 * a).setZero();
            out.S.block(i * a, a, a, a).setIdentity();
        }
    }
    for (int i = 0; i < n; ++i) {
        if (slot[i] < 0) continue;
        for (int j = i; j < n; ++j) {
            if (slot[j] < 0) continue;
            SmallMat c = state_cov(p, ts[i], ts[j]) -
                         out.S.block(i * a, 0, a, 2 * a) * rTB.block(j * a, 0, a, 2 * a).transpose();
            if (i == j) c = 0.5 * (c + c.transpose());
            out.bridge.block(i * a, j * a, a, a) = c;
            out.bridge.block(j * a, i * a, a, a) = c.transpose();
        }
    }
    return out;
}

EdgeBridge edge_bridge(const ModelParams& p, double length, const std::vector<double>& ts) {
    EdgeBridge full = edge_bridge_states(p, length, ts);
    if (p.alpha == 1) return full;
    const int n = static_cast<int>(ts.size()), a = p.alpha;
    EdgeBridge out;
    out.S.resize(n, 2 * a);
    out.bridge.resize(n, n);
    for (int i = 0; i < n; ++i) {
        out.S.row(i) = full.S.row(i * a);
        for (int j = 0; j < n; ++j) out.bridge(i, j) = full.bridge(i * a, j * a);
    }
    return out;
}

double bridge_cov(const ModelParams& p, double length, double t1, double t2) {
    return edge_bridge(p, length, {t1, t2}).bridge(0, 1);
}

Eigen::RowVectorXd boundary_weights_S(const ModelParams& p, double length, double t) {
    return edge_bridge(p, length, {t}).S.row(0);
}

SmallMat boundaryless_cov(const ModelParams& p, double length, double t1, double t2) {
    if (!(length > 0.0)) throw GraphError("edge length must be positive");
    const int a = p.alpha;
    const SmallMat r00 = state_cov(p, 0.0, 0.0);
    SmallMat M(2 * a, 2 * a);
    M.topLeftCorner(a, a) = r00;
    M.topRightCorner(a, a) = -state_cov(p, 0.0, length);
    M.bottomLeftCorner(a, a) = -state_cov(p, length, 0.0);
    M.bottomRightCorner(a, a) = r00;
    SmallMat left(a, 2 * a), right(2 * a, a);
    left << state_cov(p, t1, 0.0), state_cov(p, t1, length);
    right << state_cov(p, 0.0, t2), state_cov(p, length, t2);
    Eigen::FullPivLU<SmallMat> lu(M);
    if (!lu.isInvertible()) throw NumericalError("boundaryless middle matrix is singular");
    return state_cov(p, t1, t2) + left * lu.solve(right);
}

double interval_cov(const ModelParams& p, double length, double t1, double t2) {
    check_alpha(p.alpha);
    const double k = p.kappa, L = k * length, t2s = p.tau * p.tau;
    const double om = -std::expm1(-2.0 * L);
    const double h = t1 - t2, v = t1 + t2;
    if (p.alpha == 1) {
        // [cosh(k(l-|h|)) + cosh(k(v-l))] / (2 k tau^2 sinh(kl)), in decaying exponentials
        const double a1 = k * (length - std::abs(h)), a2 = k * (v - length);
        const double num = std::exp(a1 - L) + std::exp(-a1 - L) + std::exp(a2 - L) + std::exp(-a2 - L);
        return num / (om * 2.0 * k * t2s);
    }
    const double c = scale(p);
    const double kh = k * h, kv = k * v, ka = k * std::abs(h);
    double s = c * (1.0 + ka) * std::exp(-ka);
    s += c * ((1.0 + kh) * std::exp(-kh - 2.0 * L) + (1.0 - kh) * std::exp(kh - 2.0 * L)) / om;
    s += c * (1.0 + kv) * std::exp(-kv) / om;
    s += c * (1.0 - kv) * std::exp(kv - 2.0 * L) / om;
    const double a = k * t1, b = k * t2;
    s += length / (2.0 * k * k * t2s) * std::exp(a + b - 2.0 * L) * (1.0 + std::exp(-2.0 * a)) *
         (1.0 + std::exp(-2.0 * b)) / (om * om);
    return s;
}

double circle_cov(const ModelParams& p, double length, double t1, double t2) {
    check_alpha(p.alpha);
    const double k = p.kappa, t2s = p.tau * p.tau;
    double d = std::fmod(std::abs(t1 - t2), length);
    const double b = 0.5 * k * length, w = k * (d - 0.5 * length), aw = std::abs(w);
    const double omb = -std::expm1(-2.0 * b);
    const double ch = (std::exp(aw - b) + std::exp(-aw - b)) / omb;  // cosh(w)/sinh(b)
    if (p.alpha == 1) return ch / (2.0 * k * t2s);
    const double sh = (w < 0 ? -1.0 : 1.0) * (std::exp(aw - b) - std::exp(-aw - b)) / omb;
    const double coth = (1.0 + std::exp(-2.0 * b)) / omb;
    return ((1.0 + b * coth) * ch - w * sh) / (4.0 * k * k * k * t2s);
}

}  // namespace wmgraph
