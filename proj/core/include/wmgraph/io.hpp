#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wmgraph/graph.hpp"
#include "wmgraph/kriging.hpp"
#include "wmgraph/likelihood.hpp"

namespace wmgraph {

// {"vertices":[{"id":..,"x":..,"y":..}], "edges":[{"id":..,"from":..,"to":..,"length":..}]}
// Throws ParseError (with line) for syntax or field errors, GraphError for graph-level ones.
MetricGraph parse_graph_json(const std::string& text);
MetricGraph read_graph_json(const std::string& path);
std::string graph_to_json(const MetricGraph& g);

// CSV with header; columns edge_id,t[,value]. Edge ids are mapped to indices of g.
std::vector<Location> read_locations_csv(std::istream& in, const MetricGraph& g);
ObservationSet read_observations_csv(std::istream& in, const MetricGraph& g);
std::vector<Location> read_locations_csv(const std::string& path, const MetricGraph& g);
ObservationSet read_observations_csv(const std::string& path, const MetricGraph& g);

// 17 significant digits.
std::string format_double(double v, int digits = 17);

void write_values_csv(std::ostream& out, const MetricGraph& g, const std::vector<Location>& locs,
                      const Eigen::VectorXd& values);  // edge_id,t,value
void write_predictions_csv(std::ostream& out, const MetricGraph& g, const std::vector<GaussianPredictive>& pred);

}  // namespace wmgraph
