#include "wmgraph/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "wmgraph/assembly.hpp"
#include "wmgraph/constrained.hpp"
#include "wmgraph/errors.hpp"
#include "wmgraph/log.hpp"
#include "wmgraph/parallel.hpp"

namespace wmgraph {
namespace {

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

Eigen::VectorXd normals(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> z(0.0, 1.0);
    Eigen::VectorXd out(n);
    for (int i = 0; i < n; ++i) out[i] = z(rng);
    return out;
}

// Interior states at the sorted distinct points given the end states xb.
Eigen::VectorXd draw_bridge(const ModelParams& p, double length, const std::vector<double>& pts,
                            const Eigen::VectorXd& xb, std::mt19937_64& rng) {
    const BridgeChain ch = bridge_chain(p, length, pts);
    const int d = static_cast<int>(ch.Q.rows());
    const Eigen::VectorXd eps = normals(rng, d);
    try {
        SparseCholesky chol(ch.Q);
        return -chol.solve(Eigen::VectorXd(ch.QB * xb)) + chol.sample_transform(eps);
    } catch (const NumericalError&) {
        // covariance form with a small diagonal jitter
        Eigen::MatrixXd cov = Eigen::MatrixXd(ch.Q).inverse();
        cov = 0.5 * (cov + cov.transpose());
        const Eigen::VectorXd mean = -cov * (ch.QB * xb);
        cov.diagonal() += 1e-12 * cov.diagonal().cwiseAbs();
        Eigen::LLT<Eigen::MatrixXd> llt(cov);
        if (llt.info() != Eigen::Success) throw NumericalError("bridge covariance is not positive definite");
        warn("bridge covariance needed diagonal jitter on an edge of length " + std::to_string(length));
        return mean + llt.matrixL() * eps;
    }
}

}  // namespace

Eigen::VectorXd simulate_field(const MetricGraph& g, const ModelParams& p, const std::vector<Location>& locations,
                               std::uint64_t seed) {
    p.validate();
    for (const auto& s : locations) g.validate(s);
    const Refinement r = split_loops_refinement(g);
    const MetricGraph& sg = r.graph;
    ConstraintSystem cs = build_constraints(sg, p);
    ConstrainedGaussian cg(assemble_block_precision(sg, p), std::move(cs));
    std::mt19937_64 rng(seed);  // same stream as sample_constrained(cg, A, seed)
    const Eigen::VectorXd U = sample_constrained(cg, rng);

    const int a = p.alpha, ne = sg.num_edges();
    const DofIndex dof{a, ne};
    std::vector<std::vector<int>> rows(ne);
    std::vector<std::vector<double>> ts(ne);
    for (std::size_t i = 0; i < locations.size(); ++i) {
        const Location c = r.locate(locations[i]);
        rows[c.edge].push_back(static_cast<int>(i));
        ts[c.edge].push_back(c.t);
    }

    Eigen::VectorXd out(static_cast<int>(locations.size()));
    parallel_for(static_cast<std::size_t>(ne), [&](std::size_t ei) {
        const int e = static_cast<int>(ei);
        if (rows[e].empty()) return;
        const double len = sg.edge(e).length, tol = 1e-12 * len;
        const Eigen::VectorXd xb = U.segment(dof(e, 0, 0), 2 * a);
        std::vector<double> pts;
        for (double t : ts[e])
            if (t > tol && t < len - tol) pts.push_back(t);
        std::sort(pts.begin(), pts.end());
        std::vector<double> uniq;
        for (double t : pts)
            if (uniq.empty() || t - uniq.back() > tol) uniq.push_back(t);
        Eigen::VectorXd inner;
        if (!uniq.empty()) {
            std::mt19937_64 erng = stream(seed, ei + 1);
            inner = draw_bridge(p, len, uniq, xb, erng);
        }
        for (std::size_t k = 0; k < rows[e].size(); ++k) {
            const double t = ts[e][k];
            double v;
            if (t <= tol) {
                v = xb[0];
            } else if (t >= len - tol) {
                v = xb[a];
            } else {
                const auto it = std::lower_bound(uniq.begin(), uniq.end(), t - tol);
                v = inner[static_cast<int>(it - uniq.begin()) * a];
            }
            out[rows[e][k]] = v;
        }
    });
    return out;
}

ObservationSet simulate_observations(const std::vector<Location>& locations, const Eigen::VectorXd& field,
                                     double sigma, std::uint64_t seed) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be nonnegative");
    if (static_cast<int>(locations.size()) != field.size())
        throw std::invalid_argument("field and locations differ in length");
    ObservationSet obs;
    obs.locations = locations;
    obs.values = field;
    if (sigma > 0.0) {
        std::mt19937_64 rng(seed);
        obs.values += sigma * normals(rng, static_cast<int>(field.size()));
    }
    return obs;
}

}  // namespace wmgraph

namespace wmgraph {

std::vector<Location> uniform_locations(const MetricGraph& g, int n, std::uint64_t seed) {
    if (n < 0) throw std::invalid_argument("location count must be nonnegative");
    std::vector<double> cum;
    double total = 0.0;
    for (const auto& e : g.edges()) cum.push_back(total += e.length);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, total);
    std::vector<Location> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double u = unif(rng);
        const auto it = std::upper_bound(cum.begin(), cum.end(), u);
        const int e = std::min(static_cast<int>(it - cum.begin()), g.num_edges() - 1);
        const double start = e == 0 ? 0.0 : cum[e - 1];
        out.push_back({e, std::clamp(u - start, 0.0, g.edge(e).length)});
    }
    return out;
}

}  // namespace wmgraph
