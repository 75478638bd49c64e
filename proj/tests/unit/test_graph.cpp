#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "wmgraph/errors.hpp"
#include "wmgraph/graph.hpp"

using namespace wmgraph;

namespace {

int degree_sum(const MetricGraph& g) {
    int s = 0;
    for (int v = 0; v < g.num_vertices(); ++v) s += g.degree(v);
    return s;
}

}  // namespace

TEST_CASE("build: interval, circle and parallel edges") {
    const auto iv = oracle::interval(1.0);
    CHECK(iv.num_vertices() == 2);
    CHECK(iv.degree(0) == 1);
    CHECK(iv.degree(1) == 1);

    const auto c = oracle::circle(2.0);
    CHECK(c.num_vertices() == 1);
    CHECK(c.degree(0) == 2);
    CHECK(c.has_loops());

    const auto p = oracle::parallel_edges(3, 1.0);
    CHECK(p.degree(0) == 3);
    CHECK(p.degree(1) == 3);
}

TEST_CASE("build: validation errors") {
    CHECK_THROWS_AS(MetricGraph::build({{1}, {2}}, {{1, 1, 3, 1.0}}), GraphError);
    CHECK_THROWS_AS(MetricGraph::build({{1}, {2}}, {{1, 1, 2, 0.0}}), GraphError);
    CHECK_THROWS_AS(MetricGraph::build({{1}, {2}}, {{1, 1, 2, -1.0}}), GraphError);
    CHECK_THROWS_AS(MetricGraph::build({{1}, {2}, {3}}, {{1, 1, 2, 1.0}}), GraphError);
    CHECK_THROWS_AS(MetricGraph::build({{1}, {1}}, {{1, 1, 1, 1.0}}), GraphError);
}

TEST_CASE("incident half-edges are ordered by edge, start before end") {
    const auto c = oracle::circle(1.0);
    const auto& inc = c.incident(0);
    REQUIRE(inc.size() == 2);
    CHECK(inc[0].end == 0);
    CHECK(inc[1].end == 1);
}

TEST_CASE("add_location_vertices splits edges and deduplicates") {
    const auto iv = oracle::interval(1.0);
    auto [g, map] = add_location_vertices(iv, {{0, 0.3}});
    CHECK(g.num_vertices() == 3);
    CHECK(g.num_edges() == 2);
    CHECK(g.edge(0).length == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(g.edge(1).length == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(g.degree(map[0]) == 2);

    auto [same, m2] = add_location_vertices(iv, {{0, 0.0}, {0, 1.0}});
    CHECK(same.num_vertices() == 2);
    CHECK(m2[0] == 0);
    CHECK(m2[1] == 1);

    auto [dup, m3] = add_location_vertices(iv, {{0, 0.5}, {0, 0.5}});
    CHECK(dup.num_vertices() == 3);
    CHECK(m3[0] == m3[1]);

    auto [cg, m4] = add_location_vertices(oracle::circle(1.0), {{0, 0.25}});
    CHECK(cg.num_vertices() == 2);
    CHECK(cg.num_edges() == 2);
    CHECK_FALSE(cg.has_loops());
}

TEST_CASE("merge_degree2 inverts add_location_vertices") {
    const auto iv = oracle::interval(1.0);
    const auto back = merge_degree2(add_location_vertices(iv, {{0, 0.3}}).first);
    CHECK(back.num_vertices() == 2);
    CHECK(back.num_edges() == 1);
    CHECK(back.edge(0).length == doctest::Approx(1.0));

    const auto chain = add_location_vertices(iv, {{0, 0.1}, {0, 0.2}, {0, 0.5}, {0, 0.6}, {0, 0.9}}).first;
    CHECK(chain.num_vertices() == 7);
    const auto merged = merge_degree2(chain);
    CHECK(merged.num_edges() == 1);
    CHECK(merged.total_length() == doctest::Approx(1.0));

    const auto circ = merge_degree2(add_location_vertices(oracle::circle(1.0), {{0, 0.3}, {0, 0.6}}).first);
    CHECK(circ.num_vertices() == 1);
    CHECK(circ.num_edges() == 1);
    CHECK(circ.has_loops());
}

TEST_CASE("split_loops") {
    const auto c = split_loops(oracle::circle(1.0));
    CHECK(c.num_vertices() == 2);
    CHECK(c.num_edges() == 2);
    CHECK_FALSE(c.has_loops());

    const auto s = oracle::star(3, 1.0);
    const auto s2 = split_loops(s);
    CHECK(s2.num_vertices() == s.num_vertices());
    CHECK(s2.num_edges() == s.num_edges());

    const auto f = split_loops(oracle::figure_eight(1.0));
    CHECK(f.num_vertices() == 3);
    CHECK(f.num_edges() == 4);
}

TEST_CASE("geodesic distance") {
    const auto iv = oracle::interval(1.0);
    CHECK(geodesic_distance(iv, {0, 0.4}, {0, 0.4}) == 0.0);
    CHECK(geodesic_distance(iv, {0, 0.2}, {0, 0.9}) == doctest::Approx(0.7).epsilon(1e-14));
    const auto c = oracle::circle(1.0);
    CHECK(geodesic_distance(c, {0, 0.1}, {0, 0.6}) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(geodesic_distance(c, {0, 0.1}, {0, 0.9}) == doctest::Approx(0.2).epsilon(1e-14));

    std::mt19937_64 rng(7);
    const auto g = oracle::random_graph(rng, 8, 12, true);
    const auto locs = oracle::random_locations(g, 6, rng);
    for (const auto& a : locs) {
        for (const auto& b : locs) {
            const double dab = geodesic_distance(g, a, b);
            CHECK(dab >= 0.0);
            CHECK(dab == doctest::Approx(geodesic_distance(g, b, a)).epsilon(1e-12));
            for (const auto& c2 : locs) CHECK(dab <= geodesic_distance(g, a, c2) + geodesic_distance(g, c2, b) + 1e-12);
        }
    }
}

TEST_CASE("surgery invariants: total length and degree sum") {
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 10; ++rep) {
        const auto g = oracle::random_graph(rng, 6, 9, rep % 2 == 0);
        CHECK(degree_sum(g) == 2 * g.num_edges());
        const auto locs = oracle::random_locations(g, 5, rng);
        const auto ext = add_location_vertices(g, locs).first;
        CHECK(ext.total_length() == doctest::Approx(g.total_length()).epsilon(1e-13));
        CHECK(degree_sum(ext) == 2 * ext.num_edges());
        const auto back = merge_degree2(ext);
        CHECK(back.total_length() == doctest::Approx(g.total_length()).epsilon(1e-13));
        CHECK(back.num_edges() <= g.num_edges());
        const auto sl = split_loops(g);
        CHECK_FALSE(sl.has_loops());
        CHECK(sl.total_length() == doctest::Approx(g.total_length()).epsilon(1e-13));
    }
}

TEST_CASE("refinement locate maps parent locations to child edges") {
    const auto iv = oracle::interval(2.0);
    const Refinement r = refine(iv, {{0, 0.5}, {0, 1.5}});
    const Location c = r.locate({0, 1.0});
    CHECK(r.graph.edge(c.edge).length == doctest::Approx(1.0));
    CHECK(c.t == doctest::Approx(0.5));
}

TEST_CASE("locations outside the edge are rejected") {
    const auto iv = oracle::interval(1.0);
    CHECK_THROWS_AS(iv.validate({0, 1.5}), GraphError);
    CHECK_THROWS_AS(iv.validate({0, -0.1}), GraphError);
    CHECK_THROWS_AS(iv.validate({3, 0.1}), GraphError);
}
