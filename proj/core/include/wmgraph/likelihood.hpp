#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wmgraph/graph.hpp"
#include "wmgraph/kernels.hpp"

namespace wmgraph {

// Observed values at graph locations. The noise level lives in ModelParams::sigma;
// sigma = 0 means direct observation of the field.
struct ObservationSet {
    std::vector<Location> locations;
    Eigen::VectorXd values;

    int size() const { return static_cast<int>(locations.size()); }
    void validate(const MetricGraph& g) const;  // throws GraphError
    ObservationSet subset(const std::vector<int>& rows) const;
};

enum class ObsPlacement {
    bridge,    // observations stay on edges, B rows are boundary weights
    extended,  // observations become vertices
};

enum class LoglikMethod {
    dense,        // n x n covariance from the constrained endpoint model
    extended,     // alpha = 1 vertex precision on the extended graph
    bridge,       // alpha = 1 vertex precision plus per-edge bridge blocks
    constrained,  // general alpha, constrained sparse system
};

LoglikMethod parse_method(const std::string& name);  // throws std::invalid_argument
std::string to_string(LoglikMethod m);

double loglik_dense(const MetricGraph& g, const ModelParams& p, const ObservationSet& obs);
double loglik_alpha1_extended(const MetricGraph& g, const ModelParams& p, const ObservationSet& obs);
double loglik_alpha1_bridge(const MetricGraph& g, const ModelParams& p, const ObservationSet& obs);
double loglik_alphaN(const MetricGraph& g, const ModelParams& p, const ObservationSet& obs,
                     ObsPlacement placement = ObsPlacement::bridge);

// Holds the parameter-independent structure (extended graph, mappings, symbolic
// factorizations) so repeated evaluations only redo the numeric work.
class LoglikEvaluator {
public:
    virtual ~LoglikEvaluator() = default;
    virtual double operator()(const ModelParams& p) const = 0;
};

std::unique_ptr<LoglikEvaluator> make_loglik(LoglikMethod method, const MetricGraph& g, const ObservationSet& obs,
                                             ObsPlacement placement = ObsPlacement::bridge);

// Dense covariance of the field at the given locations (constrained model on the
// graph extended by those locations).
Eigen::MatrixXd field_covariance(const MetricGraph& g, const ModelParams& p, const std::vector<Location>& locations);

}  // namespace wmgraph
