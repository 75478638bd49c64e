#pragma once

#include <vector>

#include <Eigen/Dense>

#include "wmgraph/kriging.hpp"

namespace wmgraph {

// Negatively oriented scores of a Gaussian predictive N(mu, sd^2) at y.
double crps_gaussian(double mu, double sd, double y);
double scrps_gaussian(double mu, double sd, double y);
double log_score_gaussian(double mu, double sd, double y);  // -log density

struct Scores {
    double rmse = 0.0;
    double mae = 0.0;
    double ls = 0.0;
    double crps = 0.0;
    double scrps = 0.0;
};

// Averages over the predictives; var is used as the predictive variance.
Scores score(const std::vector<GaussianPredictive>& pred, const Eigen::VectorXd& y);

}  // namespace wmgraph
