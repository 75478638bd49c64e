#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

namespace wmgraph {

struct Vertex {
    std::int64_t id = 0;
    std::optional<double> x, y;  // planar coordinates, output only
};

// Edge as supplied by the caller: endpoints are vertex ids.
struct EdgeRecord {
    std::int64_t id = 0;
    std::int64_t from = 0;
    std::int64_t to = 0;
    double length = 0.0;
};

// Edge as stored: endpoints are vertex indices.
struct Edge {
    std::int64_t id = 0;
    int from = 0;
    int to = 0;
    double length = 0.0;
    bool is_loop() const { return from == to; }
};

// One end of an edge. end == 0 is the start (t = 0), end == 1 the end (t = length).
struct HalfEdge {
    int edge = 0;
    int end = 0;
};

// Point on the graph: edge index and arc length from the edge start.
struct Location {
    int edge = 0;
    double t = 0.0;
};

class MetricGraph {
public:
    MetricGraph() = default;

    // Validates endpoints, lengths and connectivity. Throws GraphError.
    static MetricGraph build(std::vector<Vertex> vertices, const std::vector<EdgeRecord>& edges);

    int num_vertices() const { return static_cast<int>(vertices_.size()); }
    int num_edges() const { return static_cast<int>(edges_.size()); }
    const Vertex& vertex(int v) const { return vertices_[v]; }
    const Edge& edge(int e) const { return edges_[e]; }
    const std::vector<Vertex>& vertices() const { return vertices_; }
    const std::vector<Edge>& edges() const { return edges_; }

    // Incident half-edges ordered by edge index, start before end. A loop appears twice.
    const std::vector<HalfEdge>& incident(int v) const { return incident_[v]; }
    int degree(int v) const { return static_cast<int>(incident_[v].size()); }
    int endpoint(int e, int end) const { return end == 0 ? edges_[e].from : edges_[e].to; }

    int vertex_index(std::int64_t id) const;  // throws GraphError if unknown
    int edge_index(std::int64_t id) const;
    bool has_loops() const;
    double total_length() const;

    void validate(const Location& s) const;  // throws GraphError
    // Vertex index if s sits on an edge end (within 1e-12 relative), otherwise nullopt.
    std::optional<int> vertex_at(const Location& s) const;

private:
    std::vector<Vertex> vertices_;
    std::vector<Edge> edges_;
    std::vector<std::vector<HalfEdge>> incident_;
    std::unordered_map<std::int64_t, int> vertex_lookup_;
    std::unordered_map<std::int64_t, int> edge_lookup_;
};

// Result of inserting degree-2 vertices. Original vertices keep their indices; new
// vertices follow in order of (parent edge, position). Each parent edge is cut into
// pieces; the first piece keeps the parent's index and id.
struct Refinement {
    MetricGraph graph;
    std::vector<int> location_vertex;          // per requested location
    std::vector<std::vector<double>> cuts;     // per parent edge: 0 = c0 < ... < ck = length
    std::vector<std::vector<int>> pieces;      // per parent edge: k child edges, in order

    // Maps a location of the parent graph onto the refined graph.
    Location locate(const Location& parent) const;
};

Refinement refine(const MetricGraph& g, const std::vector<Location>& locations);

// Every interior location becomes a degree-2 vertex; duplicates share one vertex.
// The mapping gives the vertex index of each input location in the new graph.
std::pair<MetricGraph, std::vector<int>> add_location_vertices(const MetricGraph& g,
                                                               const std::vector<Location>& locations);

// Removes degree-2 vertices joining two distinct edges; loop vertices stay.
MetricGraph merge_degree2(const MetricGraph& g);

// Splits each loop at its midpoint.
MetricGraph split_loops(const MetricGraph& g);
Refinement split_loops_refinement(const MetricGraph& g);

double geodesic_distance(const MetricGraph& g, const Location& s1, const Location& s2);

}  // namespace wmgraph
