#pragma once

// Helpers shared by the inference sources; not installed.

#include <algorithm>
#include <vector>

#include "wmgraph/assembly.hpp"
#include "wmgraph/graph.hpp"
#include "wmgraph/sparse.hpp"

namespace wmgraph::detail {

constexpr double kLog2Pi = 1.8378770664093454836;

inline std::vector<Location> with_loop_midpoints(const MetricGraph& g, std::vector<Location> locs) {
    for (int e = 0; e < g.num_edges(); ++e) {
        if (g.edge(e).is_loop()) locs.push_back({e, 0.5 * g.edge(e).length});
    }
    return locs;
}

// Rows of cs.A for the given vertices.
inline SpMat select_vertices(const ConstraintSystem& cs, const std::vector<int>& vertices) {
    std::vector<Triplet> trip;
    Eigen::SparseMatrix<double, Eigen::RowMajor> A(cs.A);
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        for (decltype(A)::InnerIterator it(A, vertices[i]); it; ++it)
            trip.emplace_back(static_cast<int>(i), static_cast<int>(it.col()), it.value());
    }
    SpMat S(static_cast<int>(vertices.size()), cs.dim);
    S.setFromTriplets(trip.begin(), trip.end());
    return S;
}

// 0/1 matrix with a single one per row at column picks[i].
inline SpMat selector(int rows, int cols, const std::vector<int>& picks) {
    std::vector<Triplet> trip;
    for (std::size_t i = 0; i < picks.size(); ++i) trip.emplace_back(static_cast<int>(i), picks[i], 1.0);
    SpMat S(rows, cols);
    S.setFromTriplets(trip.begin(), trip.end());
    return S;
}

inline bool has_duplicates(std::vector<int> v) {
    std::sort(v.begin(), v.end());
    return std::adjacent_find(v.begin(), v.end()) != v.end();
}

}  // namespace wmgraph::detail
