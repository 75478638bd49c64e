#include "wmgraph/kriging.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bridge_design.hpp"
#include "detail.hpp"
#include "wmgraph/constrained.hpp"
#include "wmgraph/errors.hpp"

namespace wmgraph {
namespace {

using detail::BridgeDesign;
using detail::select_vertices;
using detail::selector;
using detail::with_loop_midpoints;

struct Extended {
    MetricGraph graph;
    std::vector<int> obs_vertex, target_vertex;
};

Extended extend(const MetricGraph& g, const ObservationSet& obs, const std::vector<Location>& targets,
                bool split_loops) {
    obs.validate(g);
    for (const auto& s : targets) g.validate(s);
    std::vector<Location> locs = obs.locations;
    locs.insert(locs.end(), targets.begin(), targets.end());
    if (split_loops) locs = with_loop_midpoints(g, std::move(locs));
    Refinement r = refine(g, locs);
    Extended ex;
    const auto n = static_cast<std::size_t>(obs.size());
    ex.obs_vertex.assign(r.location_vertex.begin(), r.location_vertex.begin() + n);
    ex.target_vertex.assign(r.location_vertex.begin() + n, r.location_vertex.begin() + n + targets.size());
    ex.graph = std::move(r.graph);
    return ex;
}

// Distinct observed vertices with their values; direct observations must agree.
std::vector<std::pair<int, double>> direct_values(const std::vector<int>& vertex, const Eigen::VectorXd& y) {
    std::vector<std::pair<int, double>> out;
    for (std::size_t i = 0; i < vertex.size(); ++i) {
        auto it = std::find_if(out.begin(), out.end(), [&](const auto& pr) { return pr.first == vertex[i]; });
        if (it == out.end()) {
            out.emplace_back(vertex[i], y[static_cast<int>(i)]);
        } else if (it->second != y[static_cast<int>(i)]) {
            throw GraphError("conflicting direct observations at one location");
        }
    }
    return out;
}

std::vector<GaussianPredictive> pack(const std::vector<Location>& targets, const Eigen::VectorXd& mean,
                                     const Eigen::VectorXd& var, const ModelParams& p, bool predictive) {
    std::vector<GaussianPredictive> out(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const int k = static_cast<int>(i);
        out[i] = {targets[i], mean[k], std::max(var[k], 0.0) + (predictive ? p.sigma * p.sigma : 0.0)};
    }
    return out;
}

// Observations and targets stay on the edges of the loop-split graph:
// u(t) = S(t) U_e + v_e(t), v_e the bridge of edge e. With w = Sigma_e^-1 Cov(v_e(t), y_e),
// E[u(t) | y] = S(t) mu_U + w' (y - B mu_U) and the variance is h Cov(U | y) h' + r_B(t,t) - c'w
// with h = S(t) - w' B_e. Avoids the short edges that inserted vertices would create.
std::vector<GaussianPredictive> krig_on_edges(const MetricGraph& g, const ModelParams& p, const ObservationSet& obs,
                                              const std::vector<Location>& targets, bool predictive) {
    const BridgeDesign d = BridgeDesign::make(g, obs.locations);
    const MetricGraph& sg = d.graph();
    const int n = obs.size(), m = static_cast<int>(targets.size()), a = p.alpha;
    const DofIndex dof{a, sg.num_edges()};
    auto [B, sigma] = d.system(p, n);
    ConstrainedGaussian cg(assemble_block_precision(sg, p), build_constraints(sg, p));
    const PosteriorU post = posterior_u(cg, B, sigma, Eigen::VectorXd(), obs.values);
    const Eigen::VectorXd resid = obs.values - B * post.mean;

    // per carrying edge: boundary weights of its observations and the factored block
    const std::size_t ng = d.groups.edges.size();
    std::vector<Eigen::MatrixXd> S_obs(ng);
    std::vector<Eigen::LLT<Eigen::MatrixXd>> chol(ng);
    for (std::size_t k = 0; k < ng; ++k) {
        const double len = sg.edge(d.groups.edges[k]).length;
        S_obs[k].resize(static_cast<int>(d.groups.ts[k].size()), 2 * a);
        for (std::size_t i = 0; i < d.groups.ts[k].size(); ++i)
            S_obs[k].row(static_cast<int>(i)) = boundary_weights_S(p, len, d.groups.ts[k][i]);
        chol[k].compute(sigma.blocks[k]);
        if (chol[k].info() != Eigen::Success) throw NumericalError("edge observation block is not positive definite");
    }

    Eigen::VectorXd mean(m), extra(m);
    std::vector<Triplet> ht;
    for (int j = 0; j < m; ++j) {
        const Location s = d.split.locate(targets[j]);
        const double len = sg.edge(s.edge).length;
        const int base = dof(s.edge, 0, 0);
        Eigen::RowVectorXd h = boundary_weights_S(p, len, s.t);
        mean[j] = h.dot(post.mean.segment(base, 2 * a));
        extra[j] = bridge_cov(p, len, s.t, s.t);
        const int k = d.groups.slot[s.edge];
        if (k >= 0) {
            const auto& ts = d.groups.ts[k];
            const auto& rows = d.groups.rows[k];
            Eigen::VectorXd c(static_cast<int>(ts.size()));
            for (std::size_t i = 0; i < ts.size(); ++i) c[static_cast<int>(i)] = bridge_cov(p, len, s.t, ts[i]);
            const Eigen::VectorXd w = chol[k].solve(c);
            for (std::size_t i = 0; i < rows.size(); ++i) mean[j] += w[static_cast<int>(i)] * resid[rows[i]];
            h -= w.transpose() * S_obs[k];
            extra[j] -= c.dot(w);
        }
        for (int q = 0; q < 2 * a; ++q) ht.emplace_back(j, base + q, h[q]);
    }
    SpMat H(m, dof.dim());
    H.setFromTriplets(ht.begin(), ht.end());
    const Eigen::VectorXd var = post.variances(H) + extra;
    return pack(targets, mean, var, p, predictive);
}

}  // namespace

std::vector<GaussianPredictive> krig_alpha1(const MetricGraph& g, const ModelParams& p, const ObservationSet& obs,
                                            const std::vector<Location>& targets, bool predictive) {
    p.validate();
    if (p.alpha != 1) throw std::invalid_argument("krig_alpha1 requires alpha = 1");
    const Extended ex = extend(g, obs, targets, false);
    const SpMat Q = alpha1_vertex_precision(ex.graph, p);
    const int nv = ex.graph.num_vertices(), m = static_cast<int>(targets.size());
    Eigen::VectorXd mean(m), var(m);

    if (p.sigma > 0.0) {
        const double s2 = p.sigma * p.sigma;
        const SpMat Abar = selector(obs.size(), nv, ex.obs_vertex);
        const SpMat Qhat = Q + SpMat(Abar.transpose() * Abar) / s2;
        SparseCholesky ch(Qhat);
        const Eigen::VectorXd mu = ch.solve(Eigen::VectorXd(Abar.transpose() * obs.values / s2));
        const Eigen::MatrixXd cols = ch.solve(Eigen::MatrixXd(SpMat(selector(m, nv, ex.target_vertex).transpose())));
        for (int i = 0; i < m; ++i) {
            mean[i] = mu[ex.target_vertex[i]];
            var[i] = cols(ex.target_vertex[i], i);
        }
        return pack(targets, mean, var, p, predictive);
    }

    // direct observations: condition the vertex GMRF on the observed coordinates
    const auto known = direct_values(ex.obs_vertex, obs.values);
    std::vector<int> slot(nv, -1);
    std::vector<int> observed, rest;
    Eigen::VectorXd ys(static_cast<int>(known.size()));
    for (std::size_t i = 0; i < known.size(); ++i) {
        observed.push_back(known[i].first);
        ys[static_cast<int>(i)] = known[i].second;
    }
    std::vector<char> is_obs(nv, 0);
    for (int v : observed) is_obs[v] = 1;
    for (int v = 0; v < nv; ++v) {
        if (!is_obs[v]) {
            slot[v] = static_cast<int>(rest.size());
            rest.push_back(v);
        }
    }
    const SpMat Sr = selector(static_cast<int>(rest.size()), nv, rest);
    const SpMat So = selector(static_cast<int>(observed.size()), nv, observed);
    const SpMat Qrr = Sr * Q * SpMat(Sr.transpose());
    const SpMat Qro = Sr * Q * SpMat(So.transpose());
    Eigen::VectorXd mu_r;
    Eigen::MatrixXd cols;
    std::vector<int> free_targets;
    for (int i = 0; i < m; ++i)
        if (slot[ex.target_vertex[i]] >= 0) free_targets.push_back(slot[ex.target_vertex[i]]);
    if (!rest.empty()) {
        SparseCholesky ch(Qrr);
        mu_r = -ch.solve(Eigen::VectorXd(Qro * ys));
        cols = ch.solve(Eigen::MatrixXd(
            SpMat(selector(static_cast<int>(free_targets.size()), static_cast<int>(rest.size()), free_targets)
                      .transpose())));
    }
    for (int i = 0, f = 0; i < m; ++i) {
        const int v = ex.target_vertex[i];
        if (slot[v] < 0) {
            const auto it = std::find(observed.begin(), observed.end(), v);
            mean[i] = ys[static_cast<int>(it - observed.begin())];
            var[i] = 0.0;
        } else {
            mean[i] = mu_r[slot[v]];
            var[i] = cols(slot[v], f++);
        }
    }
    return pack(targets, mean, var, p, predictive);
}

std::vector<GaussianPredictive> krig_alphaN(const MetricGraph& g, const ModelParams& p, const ObservationSet& obs,
                                            const std::vector<Location>& targets, bool predictive) {
    p.validate();
    const Extended ex = extend(g, obs, targets, true);
    const int m = static_cast<int>(targets.size());
    if (p.sigma > 0.0) return krig_on_edges(g, p, obs, targets, predictive);

    // direct observations: on the edges when the bridge blocks are nonsingular, else pinned vertices
    const auto known = direct_values(ex.obs_vertex, obs.values);
    bool interior = known.size() == ex.obs_vertex.size();
    for (const auto& s : obs.locations) interior = interior && !g.vertex_at(s);
    if (interior) {
        auto pred = krig_on_edges(g, p, obs, targets, predictive);
        for (int i = 0; i < m; ++i) {
            for (const auto& kv : known) {
                if (kv.first == ex.target_vertex[i]) pred[i].mean = kv.second, pred[i].var = 0.0;
            }
        }
        return pred;
    }
    const SpMat Qt = assemble_block_precision(ex.graph, p);
    Eigen::VectorXd mean(m), var(m);
    std::vector<int> pins;
    for (const auto& kv : known) pins.push_back(kv.first);
    ConstraintSystem cs = build_constraints(ex.graph, p, pins);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(cs.k);
    for (std::size_t i = 0; i < known.size(); ++i) b[cs.pin_rows[i]] = known[i].second;
    const SpMat At = select_vertices(cs, ex.target_vertex);
    const int dim = cs.dim;
    ConstrainedGaussian cg(Qt, std::move(cs));
    BlockCov none;
    const PosteriorU post = posterior_u(cg, SpMat(0, dim), none, b, Eigen::VectorXd());
    mean = At * post.mean;
    var = post.variances(At);
    for (int i = 0; i < m; ++i) {
        for (const auto& kv : known) {
            if (kv.first == ex.target_vertex[i]) {
                mean[i] = kv.second;
                var[i] = 0.0;
            }
        }
    }
    return pack(targets, mean, var, p, predictive);
}

std::vector<VariancePoint> variance_map(const MetricGraph& g, const ModelParams& p, double resolution) {
    p.validate();
    if (!(resolution > 0.0)) throw std::invalid_argument("resolution must be positive");
    const Refinement r = split_loops_refinement(g);
    const MetricGraph& sg = r.graph;
    ConstraintSystem cs = build_constraints(sg, p);
    const int a = p.alpha, dim = cs.dim;
    ConstrainedGaussian cg(assemble_block_precision(sg, p), std::move(cs));
    SpMat I(dim, dim);
    I.setIdentity();
    const Eigen::MatrixXd cov = constrained_covariance(cg, I);
    const DofIndex dof{a, sg.num_edges()};

    std::vector<VariancePoint> out;
    for (int e = 0; e < g.num_edges(); ++e) {
        const double len = g.edge(e).length;
        const int steps = std::max(1, static_cast<int>(std::ceil(len * resolution)));
        // group grid points by child edge
        std::vector<std::vector<double>> ts(sg.num_edges());
        std::vector<std::pair<int, int>> where;
        for (int j = 0; j <= steps; ++j) {
            const Location child = r.locate({e, len * j / steps});
            where.emplace_back(child.edge, static_cast<int>(ts[child.edge].size()));
            ts[child.edge].push_back(child.t);
        }
        std::vector<EdgeBridge> br(sg.num_edges());
        for (int c = 0; c < sg.num_edges(); ++c) {
            if (ts[c].empty()) continue;
            br[c] = edge_bridge(p, sg.edge(c).length, ts[c]);
        }
        for (int j = 0; j <= steps; ++j) {
            const auto [c, i] = where[j];
            const int base = dof(c, 0, 0);
            const Eigen::RowVectorXd s = br[c].S.row(i);
            const double v = s * cov.block(base, base, 2 * a, 2 * a) * s.transpose() + br[c].bridge(i, i);
            out.push_back({{e, len * j / steps}, v});
        }
    }
    return out;
}

}  // namespace wmgraph
