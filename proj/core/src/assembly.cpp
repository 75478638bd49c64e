#include "wmgraph/assembly.hpp"

#include <cmath>
#include <string>
#include <unordered_map>

#include "wmgraph/errors.hpp"

namespace wmgraph {

SmallMat edge_precision(const ModelParams& p, double length, bool stationary_start, bool stationary_end) {
    const int a = p.alpha;
    SmallMat q = stationary_edge_precision(p, length);
    const SmallMat half = 0.5 * stationary_state_cov(p).inverse();
    if (!stationary_start) q.topLeftCorner(a, a) -= half;
    if (!stationary_end) q.bottomRightCorner(a, a) -= half;
    return q;
}

double edge_precision_log_det(const ModelParams& p, double length, bool stationary_start, bool stationary_end) {
    const int a = p.alpha;
    const double logdet_a = std::log(stationary_state_cov(p).diagonal().prod());
    const int free_ends = (stationary_start ? 0 : 1) + (stationary_end ? 0 : 1);
    if (free_ends == 2) return -a * std::log(4.0) - 2.0 * logdet_a;
    const SmallMat W = markov_step(p, length).W;
    const double logdet_w = std::log(Eigen::MatrixXd(W).determinant());
    return -free_ends * a * std::log(2.0) - logdet_a - logdet_w;
}

bool stationary_vertex(const MetricGraph& g, const ModelParams& p, int v) {
    return g.degree(v) == 1 && p.boundary_of(g.vertex(v).id) == Boundary::stationary;
}

SpMat assemble_block_precision(const MetricGraph& g, const ModelParams& p) {
    p.validate();
    if (p.alpha > 1 && g.has_loops()) throw GraphError("alpha = 2 assembly needs a loop-free graph (split_loops)");
    const DofIndex dof{p.alpha, g.num_edges()};
    const int b = 2 * p.alpha;
    std::vector<Triplet> trip;
    trip.reserve(static_cast<std::size_t>(b * b * g.num_edges()));
    for (int e = 0; e < g.num_edges(); ++e) {
        const Edge& ed = g.edge(e);
        const SmallMat q =
            edge_precision(p, ed.length, stationary_vertex(g, p, ed.from), stationary_vertex(g, p, ed.to));
        const int base = dof(e, 0, 0);
        for (int i = 0; i < b; ++i)
            for (int j = 0; j < b; ++j) trip.emplace_back(base + i, base + j, q(i, j));
    }
    SpMat Q(dof.dim(), dof.dim());
    Q.setFromTriplets(trip.begin(), trip.end());
    return Q;
}

double block_precision_log_det(const MetricGraph& g, const ModelParams& p) {
    double ld = 0.0;
    for (int e = 0; e < g.num_edges(); ++e) {
        const Edge& ed = g.edge(e);
        ld += edge_precision_log_det(p, ed.length, stationary_vertex(g, p, ed.from), stationary_vertex(g, p, ed.to));
    }
    return ld;
}

Eigen::VectorXd ConstraintSystem::transform_rhs(const Eigen::VectorXd& b) const {
    if (b.size() != k) throw std::invalid_argument("constraint right-hand side has wrong length");
    Eigen::VectorXd out(k);
    for (const auto& blk : blocks) {
        if (blk.rows == 0) continue;
        out.segment(blk.first_row, blk.rows) =
            blk.R.transpose().triangularView<Eigen::Lower>().solve(b.segment(blk.first_row, blk.rows));
    }
    return out;
}

double ConstraintSystem::log_abs_det_R() const {
    double s = 0.0;
    for (const auto& blk : blocks)
        for (int i = 0; i < blk.rows; ++i) s += std::log(std::abs(blk.R(i, i)));
    return s;
}

ConstraintSystem build_constraints(const MetricGraph& g, const ModelParams& p,
                                   const std::vector<int>& pinned_vertices) {
    p.validate();
    const int a = p.alpha;
    const DofIndex dof{a, g.num_edges()};
    ConstraintSystem cs;
    cs.alpha = a;
    cs.dim = dof.dim();

    std::vector<int> pins_at(g.num_vertices(), 0);
    for (int v : pinned_vertices) {
        if (v < 0 || v >= g.num_vertices()) throw GraphError("pinned vertex out of range");
        if (pins_at[v]++) throw GraphError("vertex pinned twice");
    }

    std::vector<Triplet> trip;
    std::vector<int> pin_row_of(g.num_vertices(), -1);
    int row = 0;
    for (int v = 0; v < g.num_vertices(); ++v) {
        VertexBlock blk;
        blk.vertex = v;
        blk.first_row = row;
        const auto& inc = g.incident(v);
        for (const auto& h : inc)
            for (int o = 0; o < a; ++o) blk.dofs.push_back(dof(h.edge, h.end, o));
        if (!stationary_vertex(g, p, v)) {
            for (std::size_t j = 0; j + 1 < inc.size(); ++j) {
                trip.emplace_back(row, dof(inc[j].edge, inc[j].end, 0), 1.0);
                trip.emplace_back(row, dof(inc[j + 1].edge, inc[j + 1].end, 0), -1.0);
                ++row;
            }
            if (a == 2) {
                // outward derivative: +u'(0) at a start, -u'(l) at an end
                for (const auto& h : inc) trip.emplace_back(row, dof(h.edge, h.end, 1), h.end == 0 ? 1.0 : -1.0);
                ++row;
            }
        }
        if (pins_at[v]) {
            trip.emplace_back(row, dof(inc[0].edge, inc[0].end, 0), 1.0);
            pin_row_of[v] = row++;
        }
        blk.rows = row - blk.first_row;
        cs.blocks.push_back(std::move(blk));
    }
    cs.k = row;
    cs.K.resize(cs.k, cs.dim);
    cs.K.setFromTriplets(trip.begin(), trip.end());
    for (int v : pinned_vertices) cs.pin_rows.push_back(pin_row_of[v]);

    std::vector<Triplet> sel;
    for (int v = 0; v < g.num_vertices(); ++v) {
        const auto& h = g.incident(v).front();
        sel.emplace_back(v, dof(h.edge, h.end, 0), 1.0);
    }
    cs.A.resize(g.num_vertices(), cs.dim);
    cs.A.setFromTriplets(sel.begin(), sel.end());

    change_of_basis(cs);
    return cs;
}

const SpMat& change_of_basis(ConstraintSystem& cs) {
    Eigen::SparseMatrix<double, Eigen::RowMajor> Kr(cs.K);
    std::vector<Triplet> trip;
    int next_u = cs.k;
    for (auto& blk : cs.blocks) {
        const int nd = static_cast<int>(blk.dofs.size());
        const int kv = blk.rows;
        std::unordered_map<int, int> local;
        for (int i = 0; i < nd; ++i) local[blk.dofs[i]] = i;

        Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(nd, nd);
        blk.R.resize(kv, kv);
        if (kv > 0) {
            Eigen::MatrixXd Kt = Eigen::MatrixXd::Zero(nd, kv);
            for (int r = 0; r < kv; ++r) {
                for (decltype(Kr)::InnerIterator it(Kr, blk.first_row + r); it; ++it) {
                    auto f = local.find(static_cast<int>(it.col()));
                    if (f == local.end()) throw NumericalError("constraint row touches dofs of two vertices");
                    Kt(f->second, r) = it.value();
                }
            }
            Eigen::HouseholderQR<Eigen::MatrixXd> qr(Kt);
            Q = qr.householderQ() * Eigen::MatrixXd::Identity(nd, nd);
            blk.R = qr.matrixQR().topRows(kv).triangularView<Eigen::Upper>();
            const double scale = Kt.norm();
            for (int i = 0; i < kv; ++i) {
                if (std::abs(blk.R(i, i)) <= 1e-12 * scale)
                    throw NumericalError("rank-deficient constraint block at vertex " + std::to_string(blk.vertex));
                if (blk.R(i, i) < 0) {
                    blk.R.row(i) *= -1.0;
                    Q.col(i) *= -1.0;
                }
            }
        }
        for (int c = 0; c < nd; ++c) {
            const int out_row = c < kv ? blk.first_row + c : next_u + (c - kv);
            for (int i = 0; i < nd; ++i) {
                if (Q(i, c) != 0.0) trip.emplace_back(out_row, blk.dofs[i], Q(i, c));
            }
        }
        next_u += nd - kv;
    }
    cs.T.resize(cs.dim, cs.dim);
    cs.T.setFromTriplets(trip.begin(), trip.end());
    return cs.T;
}

SpMat alpha1_vertex_precision(const MetricGraph& g, const ModelParams& p) {
    p.validate();
    if (p.alpha != 1) throw std::invalid_argument("alpha1_vertex_precision requires alpha = 1");
    const double s = 2.0 * p.kappa * p.tau * p.tau;
    std::vector<Triplet> trip;
    for (int v = 0; v < g.num_vertices(); ++v) {
        if (stationary_vertex(g, p, v)) trip.emplace_back(v, v, 0.5 * s);
    }
    for (const auto& e : g.edges()) {
        const double x = p.kappa * e.length;
        if (e.is_loop()) {
            trip.emplace_back(e.from, e.from, s * std::tanh(0.5 * x));
            continue;
        }
        const double diag = s * (0.5 + 1.0 / std::expm1(2.0 * x));
        const double off = -s * std::exp(-x) / (-std::expm1(-2.0 * x));
        trip.emplace_back(e.from, e.from, diag);
        trip.emplace_back(e.to, e.to, diag);
        trip.emplace_back(e.from, e.to, off);
        trip.emplace_back(e.to, e.from, off);
    }
    SpMat Q(g.num_vertices(), g.num_vertices());
    Q.setFromTriplets(trip.begin(), trip.end());
    return Q;
}

}  // namespace wmgraph
