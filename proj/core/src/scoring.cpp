#include "wmgraph/scoring.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace wmgraph {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double norm_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// E|X - y| for X ~ N(mu, sd^2).
double abs_dev(double mu, double sd, double y) {
    if (sd == 0.0) return std::abs(y - mu);
    const double z = (y - mu) / sd;
    return sd * (z * (2.0 * norm_cdf(z) - 1.0) + 2.0 * norm_pdf(z));
}

void check_sd(double sd) {
    if (!(sd >= 0.0)) throw std::invalid_argument("predictive standard deviation must be nonnegative");
}

}  // namespace

double crps_gaussian(double mu, double sd, double y) {
    check_sd(sd);
    // E|X - y| - E|X - X'| / 2 with E|X - X'| = 2 sd / sqrt(pi)
    return abs_dev(mu, sd, y) - sd * std::numbers::inv_sqrtpi;
}

double scrps_gaussian(double mu, double sd, double y) {
    check_sd(sd);
    const double spread = 2.0 * sd * std::numbers::inv_sqrtpi;
    if (sd == 0.0) return y == mu ? -kInf : kInf;
    return abs_dev(mu, sd, y) / spread + 0.5 * std::log(spread);
}

double log_score_gaussian(double mu, double sd, double y) {
    check_sd(sd);
    if (sd == 0.0) return y == mu ? -kInf : kInf;
    const double z = (y - mu) / sd;
    return 0.5 * std::log(2.0 * std::numbers::pi) + std::log(sd) + 0.5 * z * z;
}

Scores score(const std::vector<GaussianPredictive>& pred, const Eigen::VectorXd& y) {
    if (static_cast<int>(pred.size()) != y.size()) throw std::invalid_argument("predictives and data differ in length");
    if (pred.empty()) throw std::invalid_argument("no predictives to score");
    Scores s;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double yi = y[static_cast<int>(i)], mu = pred[i].mean, sd = std::sqrt(pred[i].var);
        s.rmse += (yi - mu) * (yi - mu);
        s.mae += std::abs(yi - mu);
        s.ls += log_score_gaussian(mu, sd, yi);
        s.crps += crps_gaussian(mu, sd, yi);
        s.scrps += scrps_gaussian(mu, sd, yi);
    }
    const double n = static_cast<double>(pred.size());
    s.rmse = std::sqrt(s.rmse / n);
    s.mae /= n;
    s.ls /= n;
    s.crps /= n;
    s.scrps /= n;
    return s;
}

}  // namespace wmgraph
