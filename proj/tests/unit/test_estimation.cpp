#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "reference.hpp"
#include "wmgraph/estimation.hpp"
#include "wmgraph/simulation.hpp"

using namespace wmgraph;
using testref::params;

namespace {

ObservationSet simulated(const MetricGraph& g, const ModelParams& p, int n, std::uint64_t seed) {
    const auto locs = uniform_locations(g, n, seed);
    return simulate_observations(locs, simulate_field(g, p, locs, seed + 1), p.sigma, seed + 2);
}

}  // namespace

TEST_CASE("profiled tau is the closed-form maximizer") {
    const auto g = oracle::star(3, 1.0);
    for (int alpha : {1, 2}) {
        const ModelParams p = params(alpha, 1.4, 1.0);
        const ObservationSet obs = simulated(g, params(alpha, 1.4, 0.7), 15, 3);
        const Eigen::MatrixXd G = testref::joint_covariance(g, p, obs.locations);
        const double q = obs.values.dot(G.ldlt().solve(obs.values));
        CHECK(profile_tau2(g, obs, p) == doctest::Approx(obs.size() / q).epsilon(1e-8));
        CHECK_THROWS(profile_tau2(g, obs, params(alpha, 1.0, 1.0, 0.1)));
    }
}

TEST_CASE("fit reaches a local maximum of the likelihood") {
    const auto g = oracle::star(3, 1.5);
    const ModelParams truth = params(1, 2.0, 1.0, 0.3);
    const ObservationSet obs = simulated(g, truth, 80, 11);
    const FitResult fit = fit_mle(g, obs, 1, Bounds{0.05, 50.0});
    CHECK(fit.converged);
    CHECK(fit.evaluations > 0);
    CHECK(fit.loglik == doctest::Approx(loglik_dense(g, fit.params, obs)).epsilon(1e-9));
    for (int k = 0; k < 3; ++k) {
        for (double f : {0.97, 1.03}) {
            ModelParams q = fit.params;
            (k == 0 ? q.kappa : k == 1 ? q.tau : q.sigma) *= f;
            CHECK(loglik_dense(g, q, obs) < fit.loglik);
        }
    }
    CHECK(fit.params.kappa > 0.5);
    CHECK(fit.params.kappa < 8.0);
}

TEST_CASE("fit with direct observations profiles tau") {
    const auto g = oracle::interval(5.0);
    const ModelParams truth = params(2, 2.0, 1.0);
    const ObservationSet obs = simulated(g, truth, 60, 21);
    FitOptions o;
    o.estimate_sigma = false;
    o.profile_grid = {1.0, 2.0, 4.0};
    const FitResult fit = fit_mle(g, obs, 2, Bounds{0.1, 20.0}, o);
    CHECK(fit.params.sigma == 0.0);
    CHECK(fit.params.tau * fit.params.tau == doctest::Approx(profile_tau2(g, obs, fit.params)).epsilon(1e-6));
    REQUIRE(fit.profile.size() == 3);
    CHECK(fit.profile[1].tau2 == doctest::Approx(profile_tau2(g, obs, params(2, 2.0, 1.0))).epsilon(1e-10));
    for (double f : {0.97, 1.03}) {
        ModelParams q = fit.params;
        q.kappa *= f;
        q.tau = std::sqrt(profile_tau2(g, obs, q));
        CHECK(loglik_dense(g, q, obs) < fit.loglik);
    }
}

TEST_CASE("fit argument checks") {
    const auto g = oracle::interval(1.0);
    ObservationSet obs;
    obs.locations = {{0, 0.1}, {0, 0.5}};
    obs.values = Eigen::Vector2d(1.0, 0.0);
    CHECK_THROWS_AS(fit_mle(g, obs, 1, Bounds{}), std::invalid_argument);
    obs.locations.push_back({0, 0.9});
    obs.values = Eigen::Vector3d(1.0, 0.0, -1.0);
    CHECK_THROWS_AS(fit_mle(g, obs, 1, Bounds{2.0, 1.0}), std::invalid_argument);
}

TEST_CASE("fold assignment") {
    const auto f = fold_assignment(23, 5, 7);
    CHECK(f == fold_assignment(23, 5, 7));
    CHECK(f != fold_assignment(23, 5, 8));
    for (int k = 0; k < 5; ++k) {
        const auto c = std::count(f.begin(), f.end(), k);
        CHECK(c >= 4);
        CHECK(c <= 5);
    }
    CHECK_THROWS(fold_assignment(10, 1, 0));
}

TEST_CASE("misspecified kriging ratios") {
    const auto g = oracle::interval(4.0);
    const ModelParams truth = params(1, 2.0, 1.0);
    const auto same = kriging_misspec_experiment(g, truth, truth, {10, 40}, 20, 3);
    for (const auto& r : same) CHECK(r.max_ratio == doctest::Approx(1.0).epsilon(1e-8));
    // the tau scale does not change the predictor
    ModelParams scaled = truth;
    scaled.tau = 3.0;
    for (const auto& r : kriging_misspec_experiment(g, truth, scaled, {10, 40}, 20, 3))
        CHECK(r.max_ratio == doctest::Approx(1.0).epsilon(1e-8));
    ModelParams wrong = truth;
    wrong.kappa = 8.0;
    const auto rows = kriging_misspec_experiment(g, truth, wrong, {10, 40}, 20, 3);
    for (const auto& r : rows) {
        CHECK(r.max_ratio > 1.0);
        CHECK(r.mean_ratio <= r.max_ratio);
    }
}

TEST_CASE("consistency experiment bookkeeping") {
    const auto g = oracle::interval(2.0);
    const ModelParams truth = params(1, 2.0, 1.0);
    FitOptions o;
    o.estimate_sigma = false;
    const auto rows = consistency_experiment(g, truth, {20, 40}, 4, 5, Bounds{0.1, 20.0}, o);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].n == 20);
    CHECK(rows[1].replicates == 4);
    CHECK(rows[0].target == doctest::Approx(std::sqrt(2.0)));
    CHECK(rows[0].bias == doctest::Approx(rows[0].mean_tau2 - 1.0));
    CHECK(rows[1].sd_sqrt_n == doctest::Approx(rows[1].sd_tau2 * std::sqrt(40.0)));
    const auto again = consistency_experiment(g, truth, {20, 40}, 4, 5, Bounds{0.1, 20.0}, o);
    CHECK(again[1].mean_tau2 == rows[1].mean_tau2);
}

TEST_CASE("cross validation rows") {
    const auto g = oracle::star(3, 2.0);
    const ObservationSet obs = simulated(g, params(2, 1.5, 1.0, 0.2), 40, 31);
    const auto rows = cross_validate(g, obs, {1, 2}, 5, 9, Bounds{0.1, 20.0});
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].model == "wm1");
    CHECK(rows[1].model == "wm2");
    for (const auto& r : rows) {
        CHECK(std::isfinite(r.scores.crps));
        CHECK(r.scores.rmse >= r.scores.mae);
        CHECK(std::isfinite(r.negloglik));
    }
    CHECK_THROWS(cross_validate(g, obs, {3}, 5, 9, Bounds{}));
}
