// wmgraph: command-line front end. CSV output uses 17 significant digits.
// Exit codes: 1 input or parse error, 2 numerical failure, 3 non-convergence.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "wmgraph/errors.hpp"
#include "wmgraph/estimation.hpp"
#include "wmgraph/io.hpp"
#include "wmgraph/kriging.hpp"
#include "wmgraph/laplacian.hpp"
#include "wmgraph/likelihood.hpp"
#include "wmgraph/scoring.hpp"
#include "wmgraph/simulation.hpp"

using namespace wmgraph;

namespace {

constexpr int kParse = 1, kNumerical = 2, kConvergence = 3;

struct ModelFlags {
    int alpha = 1;
    double kappa = 1.0;
    double tau = 1.0;
    double sigma = 0.0;
    std::string boundary = "kirchhoff";

    ModelParams params() const {
        ModelParams p;
        p.alpha = alpha;
        p.kappa = kappa;
        p.tau = tau;
        p.sigma = sigma;
        p.boundary = boundary == "stationary" ? Boundary::stationary : Boundary::kirchhoff;
        p.validate();
        return p;
    }
};

void add_model(CLI::App* c, ModelFlags& m, bool with_params = true) {
    c->add_option("--alpha", m.alpha, "smoothness (1 or 2)")->check(CLI::IsMember({1, 2}));
    if (!with_params) return;
    c->add_option("--kappa", m.kappa, "range parameter")->check(CLI::PositiveNumber);
    c->add_option("--tau", m.tau, "precision scale")->check(CLI::PositiveNumber);
    c->add_option("--sigma", m.sigma, "noise standard deviation")->check(CLI::NonNegativeNumber);
    c->add_option("--boundary", m.boundary, "degree-1 vertex condition")
        ->check(CLI::IsMember({"kirchhoff", "stationary"}));
}

// Writes to the file, or to stdout when path is empty or "-".
class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty() && path != "-") {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw ParseError("cannot write '" + path + "'", 0);
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

Bounds parse_bounds(const std::vector<double>& b) {
    Bounds out;
    if (b.empty()) return out;
    if (b.size() != 2) throw CLI::ValidationError("--bounds", "expects two values: kappa_lo,kappa_hi");
    out.kappa_lo = b[0];
    out.kappa_hi = b[1];
    return out;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Whittle-Matern Gaussian fields on metric graphs"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "wmgraph 0.1.0");

    std::string graph_path, obs_path, locations_path, targets_path, out_path, method = "constrained";
    std::string placement = "bridge", predictive = "latent";
    ModelFlags m;
    std::uint64_t seed = 1;
    int n_uniform = 0, folds = 5, repeats = 5, starts = 3;
    double resolution = 10.0;
    std::vector<double> bounds, h_grid;
    std::vector<int> n_grid;
    std::vector<std::string> models{"wm1", "wm2"};
    bool fix_sigma = false;

    auto graph_opt = [&](CLI::App* c) {
        c->add_option("--graph", graph_path, "graph JSON")->required()->check(CLI::ExistingFile);
    };
    auto out_opt = [&](CLI::App* c) { c->add_option("--out", out_path, "output CSV (default stdout)"); };

    auto* sim = app.add_subcommand("simulate", "draw observations of the field");
    graph_opt(sim);
    add_model(sim, m);
    auto* locs_flag = sim->add_option("--locations", locations_path, "CSV edge_id,t")->check(CLI::ExistingFile);
    sim->add_option("--n", n_uniform, "uniform locations when --locations is absent")->excludes(locs_flag);
    sim->add_option("--seed", seed);
    out_opt(sim);

    auto* ll = app.add_subcommand("loglik", "log-likelihood of observations");
    graph_opt(ll);
    add_model(ll, m);
    ll->add_option("--obs", obs_path, "CSV edge_id,t,value")->required()->check(CLI::ExistingFile);
    ll->add_option("--method", method)->check(CLI::IsMember({"dense", "extended", "bridge", "constrained"}));
    ll->add_option("--placement", placement, "observations for the constrained method")
        ->check(CLI::IsMember({"bridge", "extended"}));

    auto* fit = app.add_subcommand("fit", "maximum likelihood estimation");
    graph_opt(fit);
    add_model(fit, m, false);
    fit->add_option("--obs", obs_path)->required()->check(CLI::ExistingFile);
    fit->add_option("--bounds", bounds, "kappa_lo,kappa_hi")->delimiter(',');
    fit->add_flag("--fix-sigma", fix_sigma, "hold sigma at --sigma instead of estimating it");
    fit->add_option("--sigma", m.sigma, "fixed noise level with --fix-sigma")->check(CLI::NonNegativeNumber);
    fit->add_option("--starts", starts)->check(CLI::PositiveNumber);
    out_opt(fit);

    auto* pred = app.add_subcommand("predict", "kriging predictions");
    graph_opt(pred);
    add_model(pred, m);
    pred->add_option("--obs", obs_path)->required()->check(CLI::ExistingFile);
    pred->add_option("--targets", targets_path, "CSV edge_id,t")->required()->check(CLI::ExistingFile);
    pred->add_option("--predictive", predictive)->check(CLI::IsMember({"latent", "obs"}));
    out_opt(pred);

    auto* vm = app.add_subcommand("varmap", "marginal variance on a grid (posterior with --obs)");
    graph_opt(vm);
    add_model(vm, m);
    vm->add_option("--resolution", resolution, "points per unit length")->check(CLI::PositiveNumber);
    vm->add_option("--obs", obs_path)->check(CLI::ExistingFile);
    out_opt(vm);

    auto* bench = app.add_subcommand("benchmark", "log-likelihood timings per method");
    graph_opt(bench);
    add_model(bench, m);
    bench->add_option("--n-grid", n_grid)->delimiter(',')->required();
    bench->add_option("--repeats", repeats)->check(CLI::PositiveNumber);
    bench->add_option("--seed", seed);
    out_opt(bench);

    auto* cv = app.add_subcommand("cv", "cross-validated scores");
    graph_opt(cv);
    cv->add_option("--obs", obs_path)->required()->check(CLI::ExistingFile);
    cv->add_option("--folds", folds)->check(CLI::Range(2, 1000));
    cv->add_option("--models", models)->delimiter(',')->check(CLI::IsMember({"wm1", "wm2"}));
    cv->add_option("--bounds", bounds, "kappa_lo,kappa_hi")->delimiter(',');
    cv->add_option("--seed", seed);
    out_opt(cv);

    auto* lap = app.add_subcommand("laplacian-compare", "exact model against the scaled graph Laplacian");
    graph_opt(lap);
    add_model(lap, m);
    lap->add_option("--h-grid", h_grid)->delimiter(',')->required();
    out_opt(lap);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kParse;
    }

    try {
        const MetricGraph g = read_graph_json(graph_path);

        if (*sim) {
            const ModelParams p = m.params();
            const auto locs = locations_path.empty() ? uniform_locations(g, n_uniform, seed)
                                                     : read_locations_csv(locations_path, g);
            const Eigen::VectorXd u = simulate_field(g, p, locs, seed);
            const ObservationSet obs = simulate_observations(locs, u, p.sigma, seed + 1);
            Output out(out_path);
            write_values_csv(out.stream(), g, obs.locations, obs.values);
        } else if (*ll) {
            const ModelParams p = m.params();
            const ObservationSet obs = read_observations_csv(obs_path, g);
            const auto eval = make_loglik(parse_method(method), g, obs,
                                          placement == "extended" ? ObsPlacement::extended : ObsPlacement::bridge);
            std::cout << format_double((*eval)(p), 12) << '\n';
        } else if (*fit) {
            const ObservationSet obs = read_observations_csv(obs_path, g);
            FitOptions o;
            o.estimate_sigma = !fix_sigma;
            o.sigma_fixed = m.sigma;
            o.starts = starts;
            o.boundary = m.boundary == "stationary" ? Boundary::stationary : Boundary::kirchhoff;
            const FitResult r = fit_mle(g, obs, m.alpha, parse_bounds(bounds), o);
            Output out(out_path);
            out.stream() << "alpha,kappa,tau,sigma,loglik,converged,iterations,evaluations\n"
                         << r.params.alpha << ',' << format_double(r.params.kappa) << ','
                         << format_double(r.params.tau) << ',' << format_double(r.params.sigma) << ','
                         << format_double(r.loglik) << ',' << (r.converged ? 1 : 0) << ',' << r.iterations << ','
                         << r.evaluations << '\n';
            if (!r.converged) {
                std::cerr << "wmgraph: optimizer did not converge; best point written\n";
                return kConvergence;
            }
        } else if (*pred) {
            const ModelParams p = m.params();
            const ObservationSet obs = read_observations_csv(obs_path, g);
            const auto targets = read_locations_csv(targets_path, g);
            const bool po = predictive == "obs";
            const auto res = p.alpha == 1 ? krig_alpha1(g, p, obs, targets, po) : krig_alphaN(g, p, obs, targets, po);
            Output out(out_path);
            write_predictions_csv(out.stream(), g, res);
        } else if (*vm) {
            const ModelParams p = m.params();
            const auto grid = variance_map(g, p, resolution);
            std::vector<GaussianPredictive> res;
            if (obs_path.empty()) {
                for (const auto& v : grid) res.push_back({v.location, 0.0, v.var});
            } else {
                std::vector<Location> locs;
                for (const auto& v : grid) locs.push_back(v.location);
                const ObservationSet obs = read_observations_csv(obs_path, g);
                res = p.alpha == 1 ? krig_alpha1(g, p, obs, locs) : krig_alphaN(g, p, obs, locs);
            }
            Output out(out_path);
            write_predictions_csv(out.stream(), g, res);
        } else if (*bench) {
            ModelParams p = m.params();
            if (p.sigma == 0.0) p.sigma = 0.5;  // the bridge method needs noisy observations
            std::vector<std::pair<std::string, LoglikMethod>> methods{{"dense", LoglikMethod::dense}};
            if (p.alpha == 1) {
                methods.push_back({"extended", LoglikMethod::extended});
                methods.push_back({"bridge", LoglikMethod::bridge});
            } else {
                methods.push_back({"constrained-extended", LoglikMethod::constrained});
                methods.push_back({"constrained-bridge", LoglikMethod::constrained});
            }
            Output out(out_path);
            out.stream() << "n,method,median_seconds,mean_seconds,repeats\n";
            for (int n : n_grid) {
                const auto locs = uniform_locations(g, n, seed + static_cast<std::uint64_t>(n));
                const Eigen::VectorXd u = simulate_field(g, p, locs, seed);
                const ObservationSet obs = simulate_observations(locs, u, p.sigma, seed + 1);
                for (const auto& [name, meth] : methods) {
                    const ObsPlacement pl =
                        name == "constrained-extended" ? ObsPlacement::extended : ObsPlacement::bridge;
                    std::vector<double> t;
                    double sink = 0.0;
                    for (int r = 0; r < repeats; ++r) {
                        const auto t0 = std::chrono::steady_clock::now();
                        sink += (*make_loglik(meth, g, obs, pl))(p);
                        t.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
                    }
                    if (!std::isfinite(sink)) throw NumericalError("non-finite log-likelihood in benchmark");
                    double mean = 0.0;
                    for (double x : t) mean += x / repeats;
                    out.stream() << n << ',' << name << ',' << format_double(median(t)) << ','
                                 << format_double(mean) << ',' << repeats << '\n';
                }
            }
        } else if (*cv) {
            const ObservationSet obs = read_observations_csv(obs_path, g);
            std::vector<int> alphas;
            for (const auto& s : models) alphas.push_back(s == "wm1" ? 1 : 2);
            const auto rows = cross_validate(g, obs, alphas, folds, seed, parse_bounds(bounds));
            Output out(out_path);
            out.stream() << "model,rmse,mae,ls,crps,scrps,negloglik\n";
            for (const auto& r : rows) {
                out.stream() << r.model << ',' << format_double(r.scores.rmse) << ',' << format_double(r.scores.mae)
                             << ',' << format_double(r.scores.ls) << ',' << format_double(r.scores.crps) << ','
                             << format_double(r.scores.scrps) << ',' << format_double(r.negloglik) << '\n';
            }
        } else if (*lap) {
            const ModelParams p = m.params();
            const auto rows = subdivision_convergence(g, p, h_grid);
            Output out(out_path);
            out.stream() << "h,c_hat,kappa_hat,max_discrepancy\n";
            for (const auto& r : rows) {
                out.stream() << format_double(r.h) << ',' << format_double(r.c_hat) << ','
                             << format_double(r.kappa_hat) << ',' << format_double(r.max_discrepancy) << '\n';
            }
        }
    } catch (const ParseError& e) {
        std::cerr << "wmgraph: " << e.what() << '\n';
        return kParse;
    } catch (const NumericalError& e) {
        std::cerr << "wmgraph: numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const ConvergenceError& e) {
        std::cerr << "wmgraph: " << e.what() << '\n';
        return kConvergence;
    } catch (const std::exception& e) {
        std::cerr << "wmgraph: " << e.what() << '\n';
        return kParse;
    }
    return 0;
}
