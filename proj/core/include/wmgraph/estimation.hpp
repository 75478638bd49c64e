#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wmgraph/graph.hpp"
#include "wmgraph/kernels.hpp"
#include "wmgraph/likelihood.hpp"
#include "wmgraph/scoring.hpp"

namespace wmgraph {

struct Bounds {
    double kappa_lo = 1e-2;
    double kappa_hi = 1e2;
};

struct FitOptions {
    std::optional<LoglikMethod> method;  // default: extended for alpha 1, constrained otherwise
    ObsPlacement placement = ObsPlacement::extended;
    bool estimate_sigma = true;
    double sigma_fixed = 0.0;  // used when estimate_sigma is false
    // With sigma fixed at 0, maximize over tau in closed form and search kappa only.
    bool profile_tau = true;
    int starts = 3;
    int max_iter = 2000;
    double xtol = 1e-6;  // simplex size in transformed coordinates
    Boundary boundary = Boundary::kirchhoff;
    std::vector<double> profile_grid;  // kappa values for the tau^2(kappa) curve
};

struct ProfilePoint {
    double kappa = 0.0;
    double tau2 = 0.0;
};

struct FitResult {
    ModelParams params;
    double loglik = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
    std::vector<ProfilePoint> profile;
};

// Throws std::invalid_argument for n < 3 or bad bounds. Non-convergence is reported
// through the flag with the best point found.
FitResult fit_mle(const MetricGraph& g, const ObservationSet& obs, int alpha, const Bounds& bounds,
                  const FitOptions& options = {});

// n / (y^T Gamma_kappa^-1 y) for direct observations, Gamma_kappa the covariance at tau = 1.
double profile_tau2(const MetricGraph& g, const ObservationSet& obs, const ModelParams& p,
                    const FitOptions& options = {});

struct ConsistencyRow {
    int n = 0;
    int replicates = 0;
    int failures = 0;  // fits that did not converge (still included)
    double mean_tau2 = 0.0;
    double bias = 0.0;
    double sd_tau2 = 0.0;
    double sd_sqrt_n = 0.0;
    double target = 0.0;  // sqrt(2) tau^2
    double bias_se = 0.0;
    double mean_kappa = 0.0;
    double sd_kappa = 0.0;
};

// Simulate at n uniform locations, fit, aggregate tau^2 estimates per n.
std::vector<ConsistencyRow> consistency_experiment(const MetricGraph& g, const ModelParams& truth,
                                                   const std::vector<int>& n_grid, int replicates, std::uint64_t seed,
                                                   const Bounds& bounds, const FitOptions& options = {});

struct MisspecRow {
    int n = 0;
    double max_ratio = 0.0;
    double mean_ratio = 0.0;
};

// Exact MSE ratio of the kriging predictor built under `working` to the optimal
// predictor under `truth`, over nested uniform designs and fixed uniform targets.
std::vector<MisspecRow> kriging_misspec_experiment(const MetricGraph& g, const ModelParams& truth,
                                                   const ModelParams& working, const std::vector<int>& n_grid,
                                                   int n_targets, std::uint64_t seed);

// Seeded shuffle, then round-robin: fold[i] for observation i.
std::vector<int> fold_assignment(int n, int folds, std::uint64_t seed);

struct CvRow {
    std::string model;  // "wm1" or "wm2"
    Scores scores;
    double negloglik = 0.0;  // of the full-data fit
};

std::vector<CvRow> cross_validate(const MetricGraph& g, const ObservationSet& obs, const std::vector<int>& alphas,
                                  int folds, std::uint64_t seed, const Bounds& bounds, const FitOptions& options = {});

}  // namespace wmgraph
