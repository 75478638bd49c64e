#pragma once

#include <vector>

#include "wmgraph/graph.hpp"
#include "wmgraph/kernels.hpp"
#include "wmgraph/likelihood.hpp"

namespace wmgraph {

// Posterior of the field at one location. var is the latent variance, or
// latent + sigma^2 when a predictive for a new observation was requested.
struct GaussianPredictive {
    Location location;
    double mean = 0.0;
    double var = 0.0;
};

// alpha = 1, vertex precision on the graph extended by observations and targets.
std::vector<GaussianPredictive> krig_alpha1(const MetricGraph& g, const ModelParams& p, const ObservationSet& obs,
                                            const std::vector<Location>& targets, bool predictive = false);

// Any alpha, constrained endpoint model; observations and targets stay on the edges
// through the bridge decomposition.
std::vector<GaussianPredictive> krig_alphaN(const MetricGraph& g, const ModelParams& p, const ObservationSet& obs,
                                            const std::vector<Location>& targets, bool predictive = false);

struct VariancePoint {
    Location location;
    double var = 0.0;
};

// Prior marginal variance on a grid of ceil(length * resolution) + 1 points per edge.
std::vector<VariancePoint> variance_map(const MetricGraph& g, const ModelParams& p, double resolution);

}  // namespace wmgraph
