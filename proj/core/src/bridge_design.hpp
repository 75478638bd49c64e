#pragma once

// Observations kept on the edges of a loop-free graph, written as
// u(s) = S(t) U_e + bridge(t). Shared by the likelihood and kriging sources; not installed.

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "wmgraph/constrained.hpp"
#include "wmgraph/graph.hpp"
#include "wmgraph/kernels.hpp"

namespace wmgraph::detail {

// Locations grouped by edge of a fixed graph.
struct EdgeGroups {
    std::vector<int> edges;                 // edges carrying locations
    std::vector<std::vector<int>> rows;     // location rows per carrying edge
    std::vector<std::vector<double>> ts;    // positions per carrying edge
    std::vector<int> slot;                  // per graph edge: index into edges, or -1
    bool any_at_vertex = false;
    int max_per_edge = 0;

    EdgeGroups() = default;
    EdgeGroups(const MetricGraph& g, const std::vector<Location>& locs);
};

struct BridgeDesign {
    Refinement split;  // of the input graph at loop midpoints
    EdgeGroups groups;  // of the mapped locations

    const MetricGraph& graph() const { return split.graph; }

    static BridgeDesign make(const MetricGraph& g, const std::vector<Location>& locs);

    // B rows onto the endpoint dofs, and the per-edge bridge blocks plus sigma^2.
    std::pair<SpMat, BlockCov> system(const ModelParams& p, int n) const;
    // Dense covariance of B U + bridge + noise.
    Eigen::MatrixXd covariance(const ModelParams& p, int n) const;
};

}  // namespace wmgraph::detail
