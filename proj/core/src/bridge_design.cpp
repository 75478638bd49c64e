#include "bridge_design.hpp"

#include <algorithm>

#include "wmgraph/assembly.hpp"

namespace wmgraph::detail {

EdgeGroups::EdgeGroups(const MetricGraph& g, const std::vector<Location>& locs) : slot(g.num_edges(), -1) {
    for (int i = 0; i < static_cast<int>(locs.size()); ++i) {
        const Location& s = locs[i];
        if (g.vertex_at(s)) any_at_vertex = true;
        if (slot[s.edge] < 0) {
            slot[s.edge] = static_cast<int>(edges.size());
            edges.push_back(s.edge);
            rows.emplace_back();
            ts.emplace_back();
        }
        rows[slot[s.edge]].push_back(i);
        ts[slot[s.edge]].push_back(s.t);
    }
    for (const auto& r : rows) max_per_edge = std::max(max_per_edge, static_cast<int>(r.size()));
}

BridgeDesign BridgeDesign::make(const MetricGraph& g, const std::vector<Location>& locs) {
    BridgeDesign d;
    d.split = split_loops_refinement(g);
    std::vector<Location> mapped;
    mapped.reserve(locs.size());
    for (const auto& s : locs) mapped.push_back(d.split.locate(s));
    d.groups = EdgeGroups(d.split.graph, mapped);
    return d;
}

std::pair<SpMat, BlockCov> BridgeDesign::system(const ModelParams& p, int n) const {
    const int a = p.alpha;
    const DofIndex dof{a, graph().num_edges()};
    std::vector<Triplet> bt;
    BlockCov sigma;
    sigma.n = n;
    for (std::size_t k = 0; k < groups.edges.size(); ++k) {
        const int e = groups.edges[k];
        const auto& rows = groups.rows[k];
        EdgeBridge eb = edge_bridge(p, graph().edge(e).length, groups.ts[k]);
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (int j = 0; j < 2 * a; ++j) bt.emplace_back(rows[i], dof(e, 0, 0) + j, eb.S(i, j));
        eb.bridge.diagonal().array() += p.sigma * p.sigma;
        sigma.add_block(rows, std::move(eb.bridge));
    }
    SpMat B(n, dof.dim());
    B.setFromTriplets(bt.begin(), bt.end());
    return {std::move(B), std::move(sigma)};
}

Eigen::MatrixXd BridgeDesign::covariance(const ModelParams& p, int n) const {
    auto [B, sigma] = system(p, n);
    ConstrainedGaussian cg(assemble_block_precision(graph(), p), build_constraints(graph(), p));
    return constrained_covariance(cg, B) + sigma.dense();
}

}  // namespace wmgraph::detail
