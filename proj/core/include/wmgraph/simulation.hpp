#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "wmgraph/graph.hpp"
#include "wmgraph/kernels.hpp"
#include "wmgraph/likelihood.hpp"

namespace wmgraph {

// Exact joint draw of u at the locations: endpoint dofs from the constrained
// model, then an independent bridge per edge given its end states.
Eigen::VectorXd simulate_field(const MetricGraph& g, const ModelParams& p, const std::vector<Location>& locations,
                               std::uint64_t seed);

// Adds iid N(0, sigma^2) noise.
ObservationSet simulate_observations(const std::vector<Location>& locations, const Eigen::VectorXd& field,
                                     double sigma, std::uint64_t seed);

}  // namespace wmgraph

namespace wmgraph {

// n iid locations, uniform with respect to arc length.
std::vector<Location> uniform_locations(const MetricGraph& g, int n, std::uint64_t seed);

}  // namespace wmgraph
