#include "gridrisk/estimation.hpp"

#include <cmath>
#include <limits>

#include "gridrisk/error.hpp"

namespace gridrisk {

EstimationResult wls_estimate(const Eigen::MatrixXd& H, const Eigen::VectorXd& weights,
                              const Eigen::VectorXd& z) {
    if (H.rows() != z.size() || H.rows() != weights.size())
        throw ValidationError("measurement vector length does not match the model");

    const Eigen::MatrixXd HtW = H.transpose() * weights.asDiagonal();
    const Eigen::MatrixXd A = HtW * H;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    if (ldlt.info() != Eigen::Success)
        throw NumericalError("gain matrix factorization failed");
    const Eigen::VectorXd d = ldlt.vectorD();
    if (d.minCoeff() <= d.maxCoeff() * 1e-12)
        throw NumericalError("system is unobservable: H^T W H is rank deficient");

    EstimationResult result;
    result.x_hat = ldlt.solve(HtW * z);
    const Eigen::VectorXd residual = z - H * result.x_hat;
    result.r = residual.norm();
    result.objective = residual.dot(weights.asDiagonal() * residual);
    return result;
}

EstimationResult wls_estimate(const MeasurementModel& model, const Eigen::VectorXd& z) {
    return wls_estimate(model.H, model.weights, z);
}

namespace {

constexpr int kMaxGammaIterations = 500;
constexpr double kGammaEps = 1e-15;

// Series expansion of P(a, x), converges fast for x < a + 1.
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < kMaxGammaIterations; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * kGammaEps) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a, x) = 1 - P(a, x), for x >= a + 1 (modified
// Lentz iteration).
double gamma_q_continued_fraction(double a, double x) {
    const double tiny = std::numeric_limits<double>::min() / kGammaEps;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kMaxGammaIterations; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kGammaEps) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double regularized_gamma_p(double a, double x) {
    if (!(a > 0.0)) throw ValidationError("incomplete gamma requires a > 0");
    if (x < 0.0) throw ValidationError("incomplete gamma requires x >= 0");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_continued_fraction(a, x);
}

double chi_squared_cdf(double x, int dof) {
    if (dof < 1) throw ValidationError("chi-squared degrees of freedom must be >= 1");
    if (x <= 0.0) return 0.0;
    return regularized_gamma_p(0.5 * dof, 0.5 * x);
}

double chi_squared_quantile(int dof, double p) {
    if (dof < 1) throw ValidationError("chi-squared degrees of freedom must be >= 1");
    if (!(p > 0.0 && p < 1.0))
        throw ValidationError("chi-squared quantile requires 0 < p < 1");

    double lo = 0.0;
    double hi = std::max(2.0 * dof, 16.0);
    while (chi_squared_cdf(hi, dof) < p) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12) throw NumericalError("chi-squared quantile bracket failed");
    }
    // ~60 halvings takes the bracket well below the 1e-8 accuracy target.
    for (int i = 0; i < 200 && hi - lo > 1e-10 * std::max(1.0, hi); ++i) {
        const double mid = 0.5 * (lo + hi);
        if (chi_squared_cdf(mid, dof) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double detection_threshold(std::size_t m, std::size_t n, double alpha, double sigma) {
    if (m <= n)
        throw ValidationError("detection threshold requires m > n (redundant measurements)");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must be in (0, 1)");
    if (!(sigma > 0.0)) throw ValidationError("sigma must be positive");
    return sigma * std::sqrt(chi_squared_quantile(static_cast<int>(m - n), alpha));
}

DetectorConfig DetectorConfig::make(std::size_t m, std::size_t n, double alpha, double sigma) {
    DetectorConfig cfg;
    cfg.alpha = alpha;
    cfg.sigma = sigma;
    cfg.eta = detection_threshold(m, n, alpha, sigma);
    return cfg;
}

BddOutcome bdd_check(double r, double eta) {
    if (r < 0.0) throw ValidationError("residual must be >= 0");
    if (!(eta > 0.0)) throw ValidationError("detection threshold must be > 0");
    return r > eta ? BddOutcome::Alarm : BddOutcome::Pass;
}

}  // namespace gridrisk
