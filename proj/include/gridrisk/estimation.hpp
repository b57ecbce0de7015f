#pragma once

#include <Eigen/Dense>

#include "gridrisk/measurement.hpp"

namespace gridrisk {

struct EstimationResult {
    Eigen::VectorXd x_hat;  // estimated state, rad
    double r = 0.0;         // residual 2-norm, p.u.
    double objective = 0.0; // weighted least squares objective at x_hat
};

// Weighted least squares estimate x_hat = (H^T W H)^-1 H^T W z.
// Throws NumericalError when H^T W H is rank deficient (unobservable).
EstimationResult wls_estimate(const Eigen::MatrixXd& H, const Eigen::VectorXd& weights,
                              const Eigen::VectorXd& z);
EstimationResult wls_estimate(const MeasurementModel& model, const Eigen::VectorXd& z);

// Regularized lower incomplete gamma P(a, x), accurate to ~1e-14.
double regularized_gamma_p(double a, double x);

// Chi-squared CDF and quantile. The quantile is solved by bisection on the
// incomplete-gamma CDF to an interval of 1e-10, so no table dependency.
double chi_squared_cdf(double x, int dof);
double chi_squared_quantile(int dof, double p);

// Detection threshold eta = sigma * sqrt(chi2_quantile(m - n, alpha)).
double detection_threshold(std::size_t m, std::size_t n, double alpha, double sigma);

struct DetectorConfig {
    double alpha = 0.95;
    double sigma = 0.01;
    double eta = 0.0;

    static DetectorConfig make(std::size_t m, std::size_t n, double alpha = 0.95,
                               double sigma = 0.01);
};

enum class BddOutcome { Pass, Alarm };

// Residual test: alarm iff r > eta.
BddOutcome bdd_check(double r, double eta);

}  // namespace gridrisk
