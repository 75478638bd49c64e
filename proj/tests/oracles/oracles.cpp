#include "oracles.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace oracle {
namespace {

constexpr double kPi = std::numbers::pi;

double lambda_pow(double kappa2, double mu2, int alpha) { return std::pow(kappa2 + mu2, -alpha); }

// Integral over x from x0 to infinity of (kappa^2 + c^2 x^2)^-alpha.
double tail_integral(double kappa, double c, double x0, int alpha) {
    const double u = c * x0 / kappa;
    if (alpha == 1) return (0.5 * kPi - std::atan(u)) / (kappa * c);
    return (0.5 * kPi - std::atan(u) - u / (1.0 + u * u)) / (2.0 * kappa * kappa * kappa * c);
}

bool is_multiple(double x, double period) {
    const double r = x / period;
    return std::abs(r - std::round(r)) < 1e-12;
}

double phi_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace

double spectral_interval_cov(const ModelParams& p, double len, double t1, double t2, long n_terms,
                             bool tail_correction) {
    if (n_terms < 1) throw std::invalid_argument("n_terms must be at least 1");
    const double k2 = p.kappa * p.kappa, c = kPi / len;
    double s = lambda_pow(k2, 0.0, p.alpha) / len;
    for (long i = 1; i < n_terms; ++i) {
        const double w = i * c;
        s += 2.0 / len * lambda_pow(k2, w * w, p.alpha) * std::cos(w * t1) * std::cos(w * t2);
    }
    if (tail_correction) {
        // 2 cos a cos b = cos(a - b) + cos(a + b); only zero-frequency parts survive summation
        int flat = 0;
        if (is_multiple(t1 - t2, 2.0 * len)) ++flat;
        if (is_multiple(t1 + t2, 2.0 * len)) ++flat;
        s += flat / len * tail_integral(p.kappa, c, n_terms - 0.5, p.alpha);
    }
    return s / (p.tau * p.tau);
}

double spectral_circle_cov(const ModelParams& p, double len, double t1, double t2, long n_terms,
                           bool tail_correction) {
    if (n_terms < 1) throw std::invalid_argument("n_terms must be at least 1");
    const double k2 = p.kappa * p.kappa, c = 2.0 * kPi / len;
    double s = lambda_pow(k2, 0.0, p.alpha) / len;
    for (long i = 1; i < n_terms; ++i) {
        const double w = i * c;
        s += 2.0 / len * lambda_pow(k2, w * w, p.alpha) * std::cos(w * (t1 - t2));
    }
    if (tail_correction && is_multiple(t1 - t2, len))
        s += 2.0 / len * tail_integral(p.kappa, c, n_terms - 0.5, p.alpha);
    return s / (p.tau * p.tau);
}

double matern_bessel(double nu, double kappa, double sigma2, double h) {
    const double x = kappa * std::abs(h);
    if (x == 0.0) return sigma2;
    return sigma2 * std::pow(2.0, 1.0 - nu) / std::tgamma(nu) * std::pow(x, nu) * std::cyl_bessel_k(nu, x);
}

double whittle_matern_variance(const ModelParams& p) {
    const double nu = p.alpha - 0.5;
    return std::tgamma(nu) /
           (p.tau * p.tau * std::tgamma(p.alpha) * std::sqrt(4.0 * kPi) * std::pow(p.kappa, 2.0 * nu));
}

int FdMesh::node_at(const MetricGraph& g, const Location& s) const {
    const auto& e = g.edge(s.edge);
    const double tol = 1e-9 * e.length;
    if (s.t <= tol) return e.from;
    if (s.t >= e.length - tol) return e.to;
    for (std::size_t i = g.num_vertices(); i < nodes.size(); ++i)
        if (nodes[i].edge == s.edge && std::abs(nodes[i].t - s.t) <= tol) return static_cast<int>(i);
    throw std::invalid_argument("location is not a mesh node");
}

FdMesh fd_graph_cov(const MetricGraph& g, const ModelParams& p, double h) {
    FdMesh mesh;
    for (int v = 0; v < g.num_vertices(); ++v) {
        const auto& he = g.incident(v).front();
        mesh.nodes.push_back({he.edge, he.end == 0 ? 0.0 : g.edge(he.edge).length});
    }
    struct Seg {
        int a, b;
    };
    std::vector<Seg> segs;
    for (int e = 0; e < g.num_edges(); ++e) {
        const auto& ed = g.edge(e);
        const long m = std::lround(ed.length / h);
        if (m < 1 || std::abs(m * h - ed.length) > 1e-9 * ed.length)
            throw std::invalid_argument("mesh width must divide every edge length");
        int prev = ed.from;
        for (long k = 1; k < m; ++k) {
            mesh.nodes.push_back({e, k * h});
            const int cur = static_cast<int>(mesh.nodes.size()) - 1;
            segs.push_back({prev, cur});
            prev = cur;
        }
        segs.push_back({prev, ed.to});
    }
    const int n = static_cast<int>(mesh.nodes.size());
    if (n > 5000) throw std::length_error("finite-difference mesh exceeds 5000 nodes");
    Eigen::VectorXd mass = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
    for (const auto& s : segs) {
        mass[s.a] += 0.5 * h;
        mass[s.b] += 0.5 * h;
        G(s.a, s.a) += 1.0 / h;
        G(s.b, s.b) += 1.0 / h;
        G(s.a, s.b) -= 1.0 / h;
        G(s.b, s.a) -= 1.0 / h;
    }
    Eigen::MatrixXd L = G;
    L.diagonal() += p.kappa * p.kappa * mass;
    Eigen::LLT<Eigen::MatrixXd> llt(L);
    Eigen::MatrixXd Linv = llt.solve(Eigen::MatrixXd::Identity(n, n));
    if (p.alpha == 1) {
        mesh.cov = Linv;
    } else {
        mesh.cov = Linv * mass.asDiagonal() * Linv;
    }
    mesh.cov = 0.5 * (mesh.cov + mesh.cov.transpose()) / (p.tau * p.tau);
    return mesh;
}

double gaussian_logpdf(const Eigen::MatrixXd& cov, const Eigen::VectorXd& y) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) throw std::runtime_error("covariance not SPD");
    const double logdet = ldlt.vectorD().array().log().sum();
    return -0.5 * y.size() * std::log(2.0 * kPi) - 0.5 * logdet - 0.5 * y.dot(ldlt.solve(y));
}

DenseConditioning dense_constrained_oracle(const Eigen::MatrixXd& Qt, const Eigen::MatrixXd& K, const Eigen::MatrixXd& B,
                                           const Eigen::MatrixXd& Sigma, const Eigen::VectorXd& y) {
    const long d = Qt.rows();
    if (d > 500) throw std::length_error("dense oracle limited to 500 dofs");
    Eigen::MatrixXd C = Qt.ldlt().solve(Eigen::MatrixXd::Identity(d, d));
    C = 0.5 * (C + C.transpose());
    if (K.rows() > 0) {
        const Eigen::MatrixXd KC = K * C;
        const Eigen::MatrixXd KCK = KC * K.transpose();
        Eigen::FullPivLU<Eigen::MatrixXd> lu(KCK);
        if (lu.rank() < KCK.rows()) throw std::runtime_error("redundant constraints");
        C -= KC.transpose() * lu.solve(KC);
        C = 0.5 * (C + C.transpose());
    }
    DenseConditioning out;
    out.prior = C;
    if (B.rows() == 0) {
        out.mean = Eigen::VectorXd::Zero(d);
        out.cov = C;
        return out;
    }
    const Eigen::MatrixXd CB = C * B.transpose();
    const Eigen::MatrixXd S = B * CB + Sigma;
    out.log_density = gaussian_logpdf(S, y);
    Eigen::LDLT<Eigen::MatrixXd> ls(S);
    out.mean = CB * ls.solve(y);
    out.cov = C - CB * ls.solve(Eigen::MatrixXd(CB.transpose()));
    return out;
}

DenseKriging dense_gp_regression(const Eigen::MatrixXd& joint, int n, double sigma, const Eigen::VectorXd& y) {
    const long m = joint.rows() - n;
    Eigen::MatrixXd Soo = joint.topLeftCorner(n, n);
    Soo.diagonal().array() += sigma * sigma;
    const Eigen::MatrixXd Sot = joint.topRightCorner(n, m);
    Eigen::LDLT<Eigen::MatrixXd> l(Soo);
    DenseKriging out;
    out.mean = Sot.transpose() * l.solve(y);
    const Eigen::MatrixXd W = l.solve(Sot);
    out.var.resize(m);
    for (long j = 0; j < m; ++j) out.var[j] = joint(n + j, n + j) - Sot.col(j).dot(W.col(j));
    return out;
}

double crps_quadrature(double mu, double sd, double y) {
    if (sd == 0.0) return std::abs(y - mu);
    using boost::math::quadrature::gauss_kronrod;
    const double z0 = (y - mu) / sd, inf = std::numeric_limits<double>::infinity();
    const double lo = gauss_kronrod<double, 61>::integrate(
        [](double z) { return phi_cdf(z) * phi_cdf(z); }, -inf, z0, 20, 1e-15);
    const double hi = gauss_kronrod<double, 61>::integrate(
        [](double z) { return (1.0 - phi_cdf(z)) * (1.0 - phi_cdf(z)); }, z0, inf, 20, 1e-15);
    return sd * (lo + hi);
}

double abs_dev_quadrature(double mu, double sd, double y) {
    if (sd == 0.0) return std::abs(y - mu);
    using boost::math::quadrature::gauss_kronrod;
    const double z0 = (y - mu) / sd, inf = std::numeric_limits<double>::infinity();
    auto dens = [](double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * kPi); };
    const double lo =
        gauss_kronrod<double, 61>::integrate([&](double z) { return (z0 - z) * dens(z); }, -inf, z0, 20, 1e-15);
    const double hi =
        gauss_kronrod<double, 61>::integrate([&](double z) { return (z - z0) * dens(z); }, z0, inf, 20, 1e-15);
    return sd * (lo + hi);
}

MetricGraph interval(double length) { return MetricGraph::build({{1}, {2}}, {{1, 1, 2, length}}); }

MetricGraph circle(double length) { return MetricGraph::build({{1}}, {{1, 1, 1, length}}); }

MetricGraph star(int leaves, double length) {
    std::vector<wmgraph::Vertex> vs{{0}};
    std::vector<wmgraph::EdgeRecord> es;
    for (int i = 1; i <= leaves; ++i) {
        vs.push_back({i});
        es.push_back({i, 0, i, length});
    }
    return MetricGraph::build(vs, es);
}

MetricGraph parallel_edges(int k, double length) {
    std::vector<wmgraph::EdgeRecord> es;
    for (int i = 0; i < k; ++i) es.push_back({i + 1, 1, 2, length});
    return MetricGraph::build({{1}, {2}}, es);
}

MetricGraph figure_eight(double loop_length) {
    return MetricGraph::build({{1}}, {{1, 1, 1, loop_length}, {2, 1, 1, loop_length}});
}

MetricGraph grid_graph(int nx, int ny, double spacing) {
    std::vector<wmgraph::Vertex> vs;
    std::vector<wmgraph::EdgeRecord> es;
    auto id = [&](int i, int j) { return static_cast<std::int64_t>(j * nx + i); };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) vs.push_back({id(i, j), i * spacing, j * spacing});
    std::int64_t eid = 0;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            if (i + 1 < nx) es.push_back({eid++, id(i, j), id(i + 1, j), spacing});
            if (j + 1 < ny) es.push_back({eid++, id(i, j), id(i, j + 1), spacing});
        }
    }
    return MetricGraph::build(vs, es);
}

MetricGraph random_graph(std::mt19937_64& rng, int nv, int ne, bool allow_loops) {
    if (ne < nv - 1) throw std::invalid_argument("too few edges for a connected graph");
    std::uniform_real_distribution<double> len(0.3, 2.0);
    std::vector<wmgraph::Vertex> vs;
    for (int i = 0; i < nv; ++i) vs.push_back({i});
    std::vector<wmgraph::EdgeRecord> es;
    for (int i = 1; i < nv; ++i) {
        std::uniform_int_distribution<int> pick(0, i - 1);
        es.push_back({static_cast<std::int64_t>(es.size()), pick(rng), i, len(rng)});
    }
    std::uniform_int_distribution<int> any(0, nv - 1);
    bool looped = false;
    while (static_cast<int>(es.size()) < ne) {
        int a = any(rng), b = any(rng);
        if (allow_loops && !looped) b = a;
        if (a == b && !allow_loops) continue;
        looped |= a == b;
        es.push_back({static_cast<std::int64_t>(es.size()), a, b, len(rng)});
    }
    return MetricGraph::build(vs, es);
}

std::vector<Location> random_locations(const MetricGraph& g, int n, std::mt19937_64& rng) {
    std::vector<double> w;
    for (const auto& e : g.edges()) w.push_back(e.length);
    std::discrete_distribution<int> pick(w.begin(), w.end());
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Location> out;
    for (int i = 0; i < n; ++i) {
        const int e = pick(rng);
        out.push_back({e, u(rng) * g.edge(e).length});
    }
    return out;
}

}  // namespace oracle
