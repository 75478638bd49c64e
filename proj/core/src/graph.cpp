#include "wmgraph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <string>

#include "wmgraph/errors.hpp"

namespace wmgraph {
namespace {

constexpr double kSnap = 1e-12;

}  // namespace

MetricGraph MetricGraph::build(std::vector<Vertex> vertices, const std::vector<EdgeRecord>& edges) {
    MetricGraph g;
    if (vertices.empty()) throw GraphError("graph has no vertices");
    if (edges.empty()) throw GraphError("graph has no edges");
    g.vertices_ = std::move(vertices);
    for (int i = 0; i < g.num_vertices(); ++i) {
        if (!g.vertex_lookup_.emplace(g.vertices_[i].id, i).second)
            throw GraphError("duplicate vertex id " + std::to_string(g.vertices_[i].id));
    }
    g.edges_.reserve(edges.size());
    for (const auto& r : edges) {
        auto f = g.vertex_lookup_.find(r.from);
        auto t = g.vertex_lookup_.find(r.to);
        if (f == g.vertex_lookup_.end() || t == g.vertex_lookup_.end())
            throw GraphError("edge " + std::to_string(r.id) + " has a dangling endpoint");
        if (!std::isfinite(r.length) || r.length <= 0.0)
            throw GraphError("edge " + std::to_string(r.id) + " has non-positive length");
        if (!g.edge_lookup_.emplace(r.id, static_cast<int>(g.edges_.size())).second)
            throw GraphError("duplicate edge id " + std::to_string(r.id));
        g.edges_.push_back({r.id, f->second, t->second, r.length});
    }
    g.incident_.assign(g.vertices_.size(), {});
    for (int e = 0; e < g.num_edges(); ++e) {
        g.incident_[g.edges_[e].from].push_back({e, 0});
        g.incident_[g.edges_[e].to].push_back({e, 1});
    }

    std::vector<char> seen(g.vertices_.size(), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int reached = 1;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (const auto& h : g.incident_[v]) {
            int w = g.endpoint(h.edge, 1 - h.end);
            if (!seen[w]) {
                seen[w] = 1;
                ++reached;
                stack.push_back(w);
            }
        }
    }
    if (reached != g.num_vertices()) throw GraphError("graph is not connected");
    return g;
}

int MetricGraph::vertex_index(std::int64_t id) const {
    auto it = vertex_lookup_.find(id);
    if (it == vertex_lookup_.end()) throw GraphError("unknown vertex id " + std::to_string(id));
    return it->second;
}

int MetricGraph::edge_index(std::int64_t id) const {
    auto it = edge_lookup_.find(id);
    if (it == edge_lookup_.end()) throw GraphError("unknown edge id " + std::to_string(id));
    return it->second;
}

bool MetricGraph::has_loops() const {
    return std::any_of(edges_.begin(), edges_.end(), [](const Edge& e) { return e.is_loop(); });
}

double MetricGraph::total_length() const {
    double s = 0.0;
    for (const auto& e : edges_) s += e.length;
    return s;
}

void MetricGraph::validate(const Location& s) const {
    if (s.edge < 0 || s.edge >= num_edges()) throw GraphError("location refers to an unknown edge");
    const double l = edges_[s.edge].length;
    if (!(s.t >= -kSnap * l && s.t <= l * (1.0 + kSnap)))
        throw GraphError("location t = " + std::to_string(s.t) + " outside [0, " + std::to_string(l) + "]");
}

std::optional<int> MetricGraph::vertex_at(const Location& s) const {
    validate(s);
    const Edge& e = edges_[s.edge];
    if (s.t <= kSnap * e.length) return e.from;
    if (s.t >= e.length * (1.0 - kSnap)) return e.to;
    return std::nullopt;
}

Location Refinement::locate(const Location& parent) const {
    const auto& c = cuts[parent.edge];
    auto it = std::upper_bound(c.begin() + 1, c.end() - 1, parent.t);
    std::size_t j = static_cast<std::size_t>(it - c.begin()) - 1;
    double t = std::clamp(parent.t - c[j], 0.0, c[j + 1] - c[j]);
    return {pieces[parent.edge][j], t};
}

Refinement refine(const MetricGraph& g, const std::vector<Location>& locations) {
    const int ne = g.num_edges();
    std::vector<std::vector<double>> interior(ne);
    for (const auto& s : locations) {
        if (!g.vertex_at(s)) interior[s.edge].push_back(s.t);
    }

    std::int64_t next_vid = 0, next_eid = 0;
    for (const auto& v : g.vertices()) next_vid = std::max(next_vid, v.id + 1);
    for (const auto& e : g.edges()) next_eid = std::max(next_eid, e.id + 1);

    Refinement r;
    r.cuts.resize(ne);
    r.pieces.resize(ne);
    std::vector<Vertex> vertices = g.vertices();
    std::vector<std::vector<int>> cut_vertex(ne);
    for (int e = 0; e < ne; ++e) {
        const Edge& ed = g.edge(e);
        auto& ts = interior[e];
        std::sort(ts.begin(), ts.end());
        std::vector<double> c{0.0};
        for (double t : ts) {
            if (t - c.back() > kSnap * ed.length) c.push_back(t);
        }
        c.push_back(ed.length);
        cut_vertex[e].push_back(ed.from);
        for (std::size_t j = 1; j + 1 < c.size(); ++j) {
            cut_vertex[e].push_back(static_cast<int>(vertices.size()));
            vertices.push_back({next_vid++, std::nullopt, std::nullopt});
        }
        cut_vertex[e].push_back(ed.to);
        r.cuts[e] = std::move(c);
    }

    std::vector<EdgeRecord> records(ne);
    std::vector<EdgeRecord> extra;
    int next_index = ne;
    for (int e = 0; e < ne; ++e) {
        const auto& c = r.cuts[e];
        const auto& cv = cut_vertex[e];
        for (std::size_t j = 0; j + 1 < c.size(); ++j) {
            EdgeRecord rec{j == 0 ? g.edge(e).id : next_eid++, vertices[cv[j]].id, vertices[cv[j + 1]].id,
                           c[j + 1] - c[j]};
            if (j == 0) {
                records[e] = rec;
                r.pieces[e].push_back(e);
            } else {
                extra.push_back(rec);
                r.pieces[e].push_back(next_index++);
            }
        }
    }
    records.insert(records.end(), extra.begin(), extra.end());
    r.graph = MetricGraph::build(std::move(vertices), records);

    r.location_vertex.reserve(locations.size());
    for (const auto& s : locations) {
        if (auto v = g.vertex_at(s)) {
            r.location_vertex.push_back(*v);
            continue;
        }
        const auto& c = r.cuts[s.edge];
        // nearest cut; interior cuts are the deduplicated location set
        auto it = std::lower_bound(c.begin(), c.end(), s.t);
        std::size_t j = static_cast<std::size_t>(it - c.begin());
        if (j == c.size() || (j > 0 && s.t - c[j - 1] < c[j] - s.t)) --j;
        r.location_vertex.push_back(cut_vertex[s.edge][j]);
    }
    return r;
}

std::pair<MetricGraph, std::vector<int>> add_location_vertices(const MetricGraph& g,
                                                               const std::vector<Location>& locations) {
    Refinement r = refine(g, locations);
    return {std::move(r.graph), std::move(r.location_vertex)};
}

Refinement split_loops_refinement(const MetricGraph& g) {
    std::vector<Location> mids;
    for (int e = 0; e < g.num_edges(); ++e) {
        if (g.edge(e).is_loop()) mids.push_back({e, 0.5 * g.edge(e).length});
    }
    return refine(g, mids);
}

MetricGraph split_loops(const MetricGraph& g) {
    if (!g.has_loops()) return g;
    return split_loops_refinement(g).graph;
}

MetricGraph merge_degree2(const MetricGraph& g) {
    struct Work {
        std::int64_t id;
        int from, to;
        double length;
        bool alive;
    };
    std::vector<Work> edges;
    for (const auto& e : g.edges()) edges.push_back({e.id, e.from, e.to, e.length, true});
    std::vector<std::vector<int>> inc(g.num_vertices());
    for (int e = 0; e < g.num_edges(); ++e) {
        inc[edges[e].from].push_back(e);
        inc[edges[e].to].push_back(e);
    }
    std::vector<char> alive(g.num_vertices(), 1);

    for (int v = g.num_vertices() - 1; v >= 0; --v) {
        if (inc[v].size() != 2 || inc[v][0] == inc[v][1]) continue;
        int e1 = std::min(inc[v][0], inc[v][1]);
        int e2 = std::max(inc[v][0], inc[v][1]);
        Work& w1 = edges[e1];
        Work& w2 = edges[e2];
        int a = w1.from == v ? w1.to : w1.from;
        int b = w2.from == v ? w2.to : w2.from;
        w1.from = a;
        w1.to = b;
        w1.length += w2.length;
        w2.alive = false;
        std::replace(inc[b].begin(), inc[b].end(), e2, e1);
        inc[v].clear();
        alive[v] = 0;
    }

    std::vector<Vertex> vertices;
    for (int v = 0; v < g.num_vertices(); ++v) {
        if (alive[v]) vertices.push_back(g.vertex(v));
    }
    std::vector<EdgeRecord> records;
    for (const auto& w : edges) {
        if (w.alive) records.push_back({w.id, g.vertex(w.from).id, g.vertex(w.to).id, w.length});
    }
    return MetricGraph::build(std::move(vertices), records);
}

double geodesic_distance(const MetricGraph& g, const Location& s1, const Location& s2) {
    g.validate(s1);
    g.validate(s2);
    const int nv = g.num_vertices();
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(nv, inf);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    auto relax = [&](int v, double d) {
        if (d < dist[v]) {
            dist[v] = d;
            pq.push({d, v});
        }
    };
    const Edge& a = g.edge(s1.edge);
    relax(a.from, s1.t);
    relax(a.to, a.length - s1.t);
    while (!pq.empty()) {
        auto [d, v] = pq.top();
        pq.pop();
        if (d > dist[v]) continue;
        for (const auto& h : g.incident(v)) {
            relax(g.endpoint(h.edge, 1 - h.end), d + g.edge(h.edge).length);
        }
    }
    const Edge& b = g.edge(s2.edge);
    double best = std::min(dist[b.from] + s2.t, dist[b.to] + b.length - s2.t);
    if (s1.edge == s2.edge) best = std::min(best, std::abs(s1.t - s2.t));
    return best;
}

}  // namespace wmgraph
