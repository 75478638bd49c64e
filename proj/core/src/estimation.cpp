#include "wmgraph/estimation.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <random>
#include <stdexcept>

#include "wmgraph/errors.hpp"
#include "wmgraph/kriging.hpp"
#include "wmgraph/parallel.hpp"
#include "wmgraph/simulation.hpp"

namespace wmgraph {
namespace {

constexpr double kBad = 1e300;

std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

LoglikMethod default_method(int alpha, const FitOptions& o) {
    if (o.method) return *o.method;
    return alpha == 1 ? LoglikMethod::extended : LoglikMethod::constrained;
}

ModelParams base_params(int alpha, const FitOptions& o) {
    ModelParams p;
    p.alpha = alpha;
    p.boundary = o.boundary;
    p.sigma = o.estimate_sigma ? 1.0 : o.sigma_fixed;
    return p;
}

struct Profiled {
    double loglik;
    double tau2;
};

// sigma = 0: l(kappa, tau) = l(kappa, 1) + n log tau - (tau^2 - 1) q / 2 with q = y^T Gamma^-1 y.
Profiled profile_at(const LoglikEvaluator& eval, ModelParams p, int n) {
    p.tau = 1.0;
    const double l1 = eval(p);
    p.tau = std::sqrt(2.0);
    const double l2 = eval(p);
    const double q = 2.0 * (l1 - l2) + n * std::log(2.0);
    if (!(q > 0.0)) throw NumericalError("profile quadratic form is not positive");
    const double tau2 = n / q;
    return {l1 + 0.5 * n * std::log(tau2) - 0.5 * (tau2 - 1.0) * q, tau2};
}

struct Problem {
    const LoglikEvaluator& eval;
    ModelParams base;
    double log_lo, log_hi;
    int n;
    bool profile;
    bool estimate_sigma;
    double sigma_floor;  // below it sigma^-2 overwhelms the field precision
    std::atomic<int>& evaluations;

    double kappa(double z) const { return std::exp(log_lo + (log_hi - log_lo) / (1.0 + std::exp(-z))); }

    // Returns the log-likelihood and fills p (tau profiled when enabled).
    double evaluate(const gsl_vector* z, ModelParams& p) const {
        p = base;
        p.kappa = kappa(gsl_vector_get(z, 0));
        ++evaluations;
        if (profile) {
            const Profiled pr = profile_at(eval, p, n);
            p.tau = std::sqrt(pr.tau2);
            return pr.loglik;
        }
        p.tau = std::exp(gsl_vector_get(z, 1));
        if (estimate_sigma) {
            p.sigma = std::exp(gsl_vector_get(z, 2));
            if (p.sigma < sigma_floor) throw std::domain_error("sigma below floor");
        }
        return eval(p);
    }

    static double objective(const gsl_vector* z, void* self) {
        const auto* pr = static_cast<const Problem*>(self);
        ModelParams p;
        try {
            const double l = pr->evaluate(z, p);
            return std::isfinite(l) ? -l : kBad;
        } catch (const std::exception&) {
            return kBad;
        }
    }
};

struct StartResult {
    double f = kBad;
    std::vector<double> z;
    int iterations = 0;
    bool converged = false;
};

StartResult run_simplex(const Problem& prob, const std::vector<double>& z0, const FitOptions& o) {
    const std::size_t dim = z0.size();
    gsl_multimin_function fn{&Problem::objective, dim, const_cast<Problem*>(&prob)};
    gsl_vector* x = gsl_vector_alloc(dim);
    gsl_vector* step = gsl_vector_alloc(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        gsl_vector_set(x, i, z0[i]);
        gsl_vector_set(step, i, 1.0);
    }
    gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dim);
    gsl_multimin_fminimizer_set(s, &fn, x, step);
    StartResult r;
    // A flat direction (optimum on a parameter boundary) keeps the simplex from shrinking;
    // a best value that stalls for many iterations also counts as converged.
    const int patience = 100 * static_cast<int>(dim);
    double best_f = gsl_multimin_fminimizer_minimum(s);
    int stalled = 0;
    for (int it = 1; it <= o.max_iter; ++it) {
        r.iterations = it;
        if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
        if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), o.xtol) == GSL_SUCCESS) {
            r.converged = true;
            break;
        }
        const double f = gsl_multimin_fminimizer_minimum(s);
        stalled = f < best_f - 1e-10 * (1.0 + std::abs(best_f)) ? 0 : stalled + 1;
        best_f = std::min(best_f, f);
        if (stalled >= patience && best_f < kBad) {
            r.converged = true;
            break;
        }
    }
    r.f = gsl_multimin_fminimizer_minimum(s);
    const gsl_vector* best = gsl_multimin_fminimizer_x(s);
    for (std::size_t i = 0; i < dim; ++i) r.z.push_back(gsl_vector_get(best, i));
    gsl_multimin_fminimizer_free(s);
    gsl_vector_free(step);
    gsl_vector_free(x);
    return r;
}

void quiet_gsl() {
    static std::once_flag once;
    std::call_once(once, [] { gsl_set_error_handler_off(); });
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double sd(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / (v.size() - 1));
}

}  // namespace

FitResult fit_mle(const MetricGraph& g, const ObservationSet& obs, int alpha, const Bounds& bounds,
                  const FitOptions& o) {
    quiet_gsl();
    const int n = obs.size();
    if (n < 3) throw std::invalid_argument("fit_mle needs at least 3 observations");
    if (!(bounds.kappa_lo > 0.0 && bounds.kappa_hi > bounds.kappa_lo))
        throw std::invalid_argument("kappa bounds must satisfy 0 < lo < hi");
    if (o.starts < 1) throw std::invalid_argument("at least one start is required");
    if (!o.estimate_sigma && !(o.sigma_fixed >= 0.0)) throw std::invalid_argument("fixed sigma must be nonnegative");

    const auto eval = make_loglik(default_method(alpha, o), g, obs, o.placement);
    std::atomic<int> evaluations{0};
    const bool profile = !o.estimate_sigma && o.sigma_fixed == 0.0 && o.profile_tau;
    double var = obs.values.squaredNorm() / n;
    if (!(var > 0.0)) var = 1.0;
    const Problem prob{*eval,   base_params(alpha, o), std::log(bounds.kappa_lo), std::log(bounds.kappa_hi),
                       n,       profile,               o.estimate_sigma,          1e-4 * std::sqrt(var),
                       evaluations};

    std::vector<StartResult> runs(static_cast<std::size_t>(o.starts));
    parallel_for(runs.size(), [&](std::size_t i) {
        const double frac = (i + 1.0) / (o.starts + 1.0);
        const double k0 = std::exp(prob.log_lo + frac * (prob.log_hi - prob.log_lo));
        std::vector<double> z{std::log(frac / (1.0 - frac))};
        if (!profile) {
            const double tau2 = alpha == 1 ? 1.0 / (2.0 * k0 * var) : 1.0 / (4.0 * k0 * k0 * k0 * var);
            z.push_back(0.5 * std::log(tau2));
            if (o.estimate_sigma) z.push_back(0.5 * std::log(0.1 * var));
        }
        runs[i] = run_simplex(prob, z, o);
    });

    std::size_t best = 0;
    for (std::size_t i = 1; i < runs.size(); ++i)
        if (runs[i].f < runs[best].f) best = i;
    if (runs[best].f >= kBad) throw NumericalError("likelihood could not be evaluated at any start");

    FitResult res;
    gsl_vector* z = gsl_vector_alloc(runs[best].z.size());
    for (std::size_t i = 0; i < runs[best].z.size(); ++i) gsl_vector_set(z, i, runs[best].z[i]);
    res.loglik = prob.evaluate(z, res.params);
    gsl_vector_free(z);
    res.converged = runs[best].converged;
    for (const auto& r : runs) res.iterations += r.iterations;
    for (double k : o.profile_grid) {
        ModelParams p = base_params(alpha, o);
        p.sigma = 0.0;
        p.kappa = k;
        res.profile.push_back({k, profile_at(*eval, p, n).tau2});
    }
    res.evaluations = evaluations.load();
    return res;
}

double profile_tau2(const MetricGraph& g, const ObservationSet& obs, const ModelParams& p, const FitOptions& o) {
    if (p.sigma != 0.0) throw std::invalid_argument("profile_tau2 is defined for direct observations (sigma = 0)");
    const auto eval = make_loglik(default_method(p.alpha, o), g, obs, o.placement);
    return profile_at(*eval, p, obs.size()).tau2;
}

std::vector<ConsistencyRow> consistency_experiment(const MetricGraph& g, const ModelParams& truth,
                                                   const std::vector<int>& n_grid, int replicates, std::uint64_t seed,
                                                   const Bounds& bounds, const FitOptions& options) {
    truth.validate();
    if (replicates < 2) throw std::invalid_argument("need at least 2 replicates");
    FitOptions o = options;
    o.boundary = truth.boundary;
    std::vector<ConsistencyRow> rows;
    for (int n : n_grid) {
        std::vector<double> tau2(replicates), kappa(replicates);
        std::vector<char> ok(replicates);
        parallel_for(static_cast<std::size_t>(replicates), [&](std::size_t r) {
            const auto locs = uniform_locations(g, n, mix(seed, n, 3 * r));
            const Eigen::VectorXd field = simulate_field(g, truth, locs, mix(seed, n, 3 * r + 1));
            const ObservationSet obs = simulate_observations(locs, field, truth.sigma, mix(seed, n, 3 * r + 2));
            const FitResult fit = fit_mle(g, obs, truth.alpha, bounds, o);
            tau2[r] = fit.params.tau * fit.params.tau;
            kappa[r] = fit.params.kappa;
            ok[r] = fit.converged;
        });
        ConsistencyRow row;
        row.n = n;
        row.replicates = replicates;
        row.failures = static_cast<int>(std::count(ok.begin(), ok.end(), 0));
        row.mean_tau2 = mean(tau2);
        row.bias = row.mean_tau2 - truth.tau * truth.tau;
        row.sd_tau2 = sd(tau2);
        row.sd_sqrt_n = row.sd_tau2 * std::sqrt(static_cast<double>(n));
        row.target = std::sqrt(2.0) * truth.tau * truth.tau;
        row.bias_se = row.sd_tau2 / std::sqrt(static_cast<double>(replicates));
        row.mean_kappa = mean(kappa);
        row.sd_kappa = sd(kappa);
        rows.push_back(row);
    }
    return rows;
}

std::vector<MisspecRow> kriging_misspec_experiment(const MetricGraph& g, const ModelParams& truth,
                                                   const ModelParams& working, const std::vector<int>& n_grid,
                                                   int n_targets, std::uint64_t seed) {
    truth.validate();
    working.validate();
    if (n_grid.empty() || n_targets < 1) throw std::invalid_argument("empty design");
    const int nmax = *std::max_element(n_grid.begin(), n_grid.end());
    const auto all = uniform_locations(g, nmax, mix(seed, 0));
    const auto targets = uniform_locations(g, n_targets, mix(seed, 1));

    std::vector<MisspecRow> rows(n_grid.size());
    parallel_for(n_grid.size(), [&](std::size_t k) {
        const int n = n_grid[k];
        std::vector<Location> locs(all.begin(), all.begin() + n);
        locs.insert(locs.end(), targets.begin(), targets.end());
        Eigen::MatrixXd St = field_covariance(g, truth, locs);
        Eigen::MatrixXd Sw = field_covariance(g, working, locs);
        St.topLeftCorner(n, n).diagonal().array() += truth.sigma * truth.sigma;
        Sw.topLeftCorner(n, n).diagonal().array() += working.sigma * working.sigma;
        const Eigen::MatrixXd Coo = St.topLeftCorner(n, n), Cot = St.topRightCorner(n, n_targets);
        const Eigen::LDLT<Eigen::MatrixXd> lt(Coo);
        const Eigen::LDLT<Eigen::MatrixXd> lw(Sw.topLeftCorner(n, n));
        if (lt.info() != Eigen::Success || lw.info() != Eigen::Success)
            throw NumericalError("design covariance factorization failed");
        const Eigen::MatrixXd Wopt = lt.solve(Cot);
        const Eigen::MatrixXd Ww = lw.solve(Eigen::MatrixXd(Sw.topRightCorner(n, n_targets)));
        MisspecRow row;
        row.n = n;
        for (int j = 0; j < n_targets; ++j) {
            const double prior = St(n + j, n + j);
            const double e_opt = prior - Cot.col(j).dot(Wopt.col(j));
            const Eigen::VectorXd w = Ww.col(j);
            const double e_w = prior - 2.0 * w.dot(Cot.col(j)) + w.dot(Coo * w);
            const double ratio = e_w / e_opt;
            row.max_ratio = std::max(row.max_ratio, ratio);
            row.mean_ratio += ratio / n_targets;
        }
        rows[k] = row;
    });
    return rows;
}

std::vector<int> fold_assignment(int n, int folds, std::uint64_t seed) {
    if (folds < 2) throw std::invalid_argument("need at least 2 folds");
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<int> fold(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) fold[idx[i]] = i % folds;
    return fold;
}

std::vector<CvRow> cross_validate(const MetricGraph& g, const ObservationSet& obs, const std::vector<int>& alphas,
                                  int folds, std::uint64_t seed, const Bounds& bounds, const FitOptions& options) {
    obs.validate(g);
    const int n = obs.size();
    const auto fold = fold_assignment(n, folds, seed);
    std::vector<CvRow> rows;
    for (int alpha : alphas) {
        if (alpha != 1 && alpha != 2) throw std::invalid_argument("cross_validate models are wm1 and wm2");
        std::vector<GaussianPredictive> pred(static_cast<std::size_t>(n));
        for (int f = 0; f < folds; ++f) {
            std::vector<int> train, test;
            for (int i = 0; i < n; ++i) (fold[i] == f ? test : train).push_back(i);
            if (train.size() < 2) throw std::invalid_argument("fold has fewer than 2 training points");
            if (test.empty()) continue;
            const ObservationSet tr = obs.subset(train);
            const FitResult fit = fit_mle(g, tr, alpha, bounds, options);
            std::vector<Location> targets;
            for (int i : test) targets.push_back(obs.locations[i]);
            const auto p = alpha == 1 ? krig_alpha1(g, fit.params, tr, targets, true)
                                      : krig_alphaN(g, fit.params, tr, targets, true);
            for (std::size_t k = 0; k < test.size(); ++k) pred[test[k]] = p[k];
        }
        CvRow row;
        row.model = "wm" + std::to_string(alpha);
        row.scores = score(pred, obs.values);
        row.negloglik = -fit_mle(g, obs, alpha, bounds, options).loglik;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace wmgraph
