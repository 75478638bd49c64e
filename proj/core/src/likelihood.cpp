#include "wmgraph/likelihood.hpp"

#include "bridge_design.hpp"
#include "detail.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wmgraph/assembly.hpp"
#include "wmgraph/constrained.hpp"
#include "wmgraph/errors.hpp"
#include "wmgraph/sparse.hpp"

namespace wmgraph {
namespace {

using detail::BridgeDesign;
using detail::EdgeGroups;
using detail::has_duplicates;
using detail::kLog2Pi;
using detail::select_vertices;
using detail::selector;
using detail::with_loop_midpoints;

double gaussian_logpdf(const Eigen::MatrixXd& cov, const Eigen::VectorXd& y) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) throw NumericalError("observation covariance is not positive definite");
    const auto& L = llt.matrixLLT();
    double ld = 0.0;
    for (int i = 0; i < L.rows(); ++i) ld += 2.0 * std::log(L(i, i));
    Eigen::VectorXd z = llt.matrixL().solve(y);
    return -0.5 * static_cast<double>(y.size()) * kLog2Pi - 0.5 * ld - 0.5 * z.squaredNorm();
}

class ExtendedLoglik final : public LoglikEvaluator {
public:
    ExtendedLoglik(const MetricGraph& g, const ObservationSet& obs) : y_(obs.values) {
        Refinement r = refine(g, obs.locations);
        graph_ = std::move(r.graph);
        vertex_ = std::move(r.location_vertex);
        const int nv = graph_.num_vertices(), n = obs.size();
        Abar_ = selector(n, nv, vertex_);
        std::vector<char> observed(nv, 0);
        for (int v : vertex_) observed[v] = 1;
        for (int v = 0; v < nv; ++v)
            if (!observed[v]) rest_.push_back(v);
        distinct_ = !has_duplicates(vertex_);
    }

    double operator()(const ModelParams& p) const override {
        p.validate();
        if (p.alpha != 1) throw std::invalid_argument("extended-graph likelihood requires alpha = 1");
        const SpMat Q = alpha1_vertex_precision(graph_, p);
        const double n = static_cast<double>(y_.size());
        if (p.sigma > 0.0) {
            const double s2 = p.sigma * p.sigma;
            const SpMat Qp = Q + SpMat(Abar_.transpose() * Abar_) / s2;
            SparseCholesky cq(Q), cp(Qp);
            const Eigen::VectorXd rhs = Abar_.transpose() * y_ / s2;
            const Eigen::VectorXd mu = cp.solve(rhs);
            return 0.5 * cq.log_det() - 0.5 * cp.log_det() - n * std::log(p.sigma) - 0.5 * n * kLog2Pi -
                   0.5 * y_.squaredNorm() / s2 + 0.5 * mu.dot(rhs);
        }
        if (!distinct_) throw GraphError("direct observations must be at distinct locations");
        const int nv = graph_.num_vertices();
        const SpMat Ss = Abar_;
        const SpMat Sv = selector(static_cast<int>(rest_.size()), nv, rest_);
        const SpMat Qss = Ss * Q * SpMat(Ss.transpose());
        const SpMat Qvs = Sv * Q * SpMat(Ss.transpose());
        const SpMat Qvv = Sv * Q * SpMat(Sv.transpose());
        SparseCholesky cq(Q), cv(Qvv);
        const Eigen::VectorXd w = Qvs * y_;
        const double quad = y_.dot(Qss * y_) - w.dot(cv.solve(w));
        return 0.5 * (cq.log_det() - cv.log_det()) - 0.5 * n * kLog2Pi - 0.5 * quad;
    }

private:
    MetricGraph graph_;
    std::vector<int> vertex_, rest_;
    SpMat Abar_;
    Eigen::VectorXd y_;
    bool distinct_ = true;
};

class DenseLoglik final : public LoglikEvaluator {
public:
    DenseLoglik(const MetricGraph& g, const ObservationSet& obs)
        : design_(BridgeDesign::make(g, obs.locations)), y_(obs.values) {}
    double operator()(const ModelParams& p) const override {
        p.validate();
        return gaussian_logpdf(design_.covariance(p, static_cast<int>(y_.size())), y_);
    }

private:
    BridgeDesign design_;
    Eigen::VectorXd y_;
};

class BridgeLoglik final : public LoglikEvaluator {
public:
    BridgeLoglik(const MetricGraph& g, const ObservationSet& obs)
        : graph_(g), groups_(g, obs.locations), y_(obs.values) {}

    double operator()(const ModelParams& p) const override {
        p.validate();
        if (p.alpha != 1) throw std::invalid_argument("bridge likelihood requires alpha = 1");
        if (p.sigma == 0.0 && (groups_.any_at_vertex || groups_.max_per_edge > p.alpha))
            throw GraphError("bridge likelihood with sigma = 0 needs at most alpha interior observations per edge");
        const int n = static_cast<int>(y_.size()), nv = graph_.num_vertices();
        const SpMat Qv = alpha1_vertex_precision(graph_, p);
        std::vector<Triplet> bt;
        Eigen::VectorXd siy(n);  // Sigma^-1 y
        double logdet_sigma = 0.0, ysy = 0.0;
        std::vector<Triplet> st;  // Sigma^-1 entries
        for (std::size_t k = 0; k < groups_.edges.size(); ++k) {
            const Edge& ed = graph_.edge(groups_.edges[k]);
            const auto& rows = groups_.rows[k];
            const int m = static_cast<int>(rows.size());
            EdgeBridge eb = edge_bridge(p, ed.length, groups_.ts[k]);
            for (int i = 0; i < m; ++i) {
                bt.emplace_back(rows[i], ed.from, eb.S(i, 0));
                bt.emplace_back(rows[i], ed.to, eb.S(i, 1));
            }
            Eigen::MatrixXd sig = eb.bridge;
            sig.diagonal().array() += p.sigma * p.sigma;
            Eigen::LLT<Eigen::MatrixXd> llt(sig);
            if (llt.info() != Eigen::Success) throw NumericalError("edge observation block is not positive definite");
            for (int i = 0; i < m; ++i) logdet_sigma += 2.0 * std::log(llt.matrixLLT()(i, i));
            Eigen::VectorXd ye(m);
            for (int i = 0; i < m; ++i) ye[i] = y_[rows[i]];
            Eigen::VectorXd se = llt.solve(ye);
            ysy += ye.dot(se);
            Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(m, m));
            for (int i = 0; i < m; ++i) {
                siy[rows[i]] = se[i];
                for (int j = 0; j < m; ++j) st.emplace_back(rows[i], rows[j], inv(i, j));
            }
        }
        SpMat B(n, nv), Si(n, n);
        B.setFromTriplets(bt.begin(), bt.end());
        Si.setFromTriplets(st.begin(), st.end());
        const SpMat Qhat = Qv + SpMat(B.transpose() * Si * B);
        SparseCholesky cv(Qv), ch(Qhat);
        const Eigen::VectorXd rhs = B.transpose() * siy;
        const Eigen::VectorXd mu = ch.solve(rhs);
        return 0.5 * cv.log_det() - 0.5 * ch.log_det() - 0.5 * logdet_sigma - 0.5 * n * kLog2Pi - 0.5 * ysy +
               0.5 * mu.dot(rhs);
    }

private:
    MetricGraph graph_;
    EdgeGroups groups_;
    Eigen::VectorXd y_;
};

class ConstrainedLoglik final : public LoglikEvaluator {
public:
    ConstrainedLoglik(const MetricGraph& g, const ObservationSet& obs, ObsPlacement placement)
        : placement_(placement), y_(obs.values) {
        if (placement == ObsPlacement::bridge) {
            design_ = std::make_unique<BridgeDesign>(BridgeDesign::make(g, obs.locations));
        } else {
            Refinement r = refine(g, with_loop_midpoints(g, obs.locations));
            graph_ = std::move(r.graph);
            vertex_.assign(r.location_vertex.begin(), r.location_vertex.begin() + obs.size());
            distinct_ = !has_duplicates(vertex_);
        }
    }

    double operator()(const ModelParams& p) const override {
        p.validate();
        return placement_ == ObsPlacement::bridge ? bridge(p) : extended(p);
    }

private:
    double bridge(const ModelParams& p) const {
        if (p.sigma == 0.0 && design_->groups.any_at_vertex)
            throw GraphError("direct observations at vertices need the extended placement");
        auto [B, sigma] = design_->system(p, static_cast<int>(y_.size()));
        const MetricGraph& g = design_->graph();
        ConstrainedGaussian cg(assemble_block_precision(g, p), build_constraints(g, p));
        return density_y_given_constraints(cg, B, sigma, Eigen::VectorXd(), y_);
    }

    double extended(const ModelParams& p) const {
        const int n = static_cast<int>(y_.size());
        if (p.sigma > 0.0) {
            ConstraintSystem cs = build_constraints(graph_, p);
            SpMat B = select_vertices(cs, vertex_);
            ConstrainedGaussian cg(assemble_block_precision(graph_, p), std::move(cs));
            return density_y_given_constraints(cg, B, BlockCov::diagonal(n, p.sigma * p.sigma), Eigen::VectorXd(), y_);
        }
        // direct observations: ratio of the densities of the pinned and plain constraint sets
        if (!distinct_) throw GraphError("direct observations must be at distinct locations");
        const SpMat Qt = assemble_block_precision(graph_, p);
        ConstraintSystem pinned = build_constraints(graph_, p, vertex_);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(pinned.k);
        for (int i = 0; i < n; ++i) b[pinned.pin_rows[i]] = y_[i];
        const double ld_qt = block_precision_log_det(graph_, p);
        ConstrainedGaussian cg_pin(Qt, std::move(pinned), ld_qt);
        ConstraintSystem plain = build_constraints(graph_, p);
        const int k = plain.k;
        ConstrainedGaussian cg(Qt, std::move(plain), ld_qt);
        return cg_pin.log_density_constraints(b) - cg.log_density_constraints(Eigen::VectorXd::Zero(k));
    }

    ObsPlacement placement_;
    MetricGraph graph_;
    std::unique_ptr<BridgeDesign> design_;
    std::vector<int> vertex_;
    bool distinct_ = true;
    Eigen::VectorXd y_;
};

}  // namespace

void ObservationSet::validate(const MetricGraph& g) const {
    if (static_cast<int>(values.size()) != size()) throw GraphError("observation values and locations differ in length");
    for (const auto& s : locations) g.validate(s);
    for (int i = 0; i < values.size(); ++i)
        if (!std::isfinite(values[i])) throw GraphError("non-finite observation value");
}

ObservationSet ObservationSet::subset(const std::vector<int>& rows) const {
    ObservationSet out;
    out.values.resize(static_cast<int>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.locations.push_back(locations[rows[i]]);
        out.values[static_cast<int>(i)] = values[rows[i]];
    }
    return out;
}

LoglikMethod parse_method(const std::string& name) {
    if (name == "dense") return LoglikMethod::dense;
    if (name == "extended") return LoglikMethod::extended;
    if (name == "bridge") return LoglikMethod::bridge;
    if (name == "constrained") return LoglikMethod::constrained;
    throw std::invalid_argument("unknown likelihood method '" + name + "'");
}

std::string to_string(LoglikMethod m) {
    switch (m) {
        case LoglikMethod::dense: return "dense";
        case LoglikMethod::extended: return "extended";
        case LoglikMethod::bridge: return "bridge";
        case LoglikMethod::constrained: return "constrained";
    }
    return "?";
}

std::unique_ptr<LoglikEvaluator> make_loglik(LoglikMethod method, const MetricGraph& g, const ObservationSet& obs,
                                             ObsPlacement placement) {
    obs.validate(g);
    switch (method) {
        case LoglikMethod::dense: return std::make_unique<DenseLoglik>(g, obs);
        case LoglikMethod::extended: return std::make_unique<ExtendedLoglik>(g, obs);
        case LoglikMethod::bridge: return std::make_unique<BridgeLoglik>(g, obs);
        case LoglikMethod::constrained: return std::make_unique<ConstrainedLoglik>(g, obs, placement);
    }
    throw std::invalid_argument("unknown likelihood method");
}

double loglik_dense(const MetricGraph& g, const ModelParams& p, const ObservationSet& obs) {
    return (*make_loglik(LoglikMethod::dense, g, obs))(p);
}

double loglik_alpha1_extended(const MetricGraph& g, const ModelParams& p, const ObservationSet& obs) {
    return (*make_loglik(LoglikMethod::extended, g, obs))(p);
}

double loglik_alpha1_bridge(const MetricGraph& g, const ModelParams& p, const ObservationSet& obs) {
    return (*make_loglik(LoglikMethod::bridge, g, obs))(p);
}

double loglik_alphaN(const MetricGraph& g, const ModelParams& p, const ObservationSet& obs, ObsPlacement placement) {
    return (*make_loglik(LoglikMethod::constrained, g, obs, placement))(p);
}

Eigen::MatrixXd field_covariance(const MetricGraph& g, const ModelParams& p, const std::vector<Location>& locations) {
    p.validate();
    for (const auto& s : locations) g.validate(s);
    ModelParams latent = p;
    latent.sigma = 0.0;
    return BridgeDesign::make(g, locations).covariance(latent, static_cast<int>(locations.size()));
}

}  // namespace wmgraph
