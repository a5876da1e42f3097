#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "agvcost/errors.hpp"
#include "agvcost/types.hpp"

namespace agvcost {

struct Sample {
    Eigen::VectorXd regressor;  // x_t, fixed dimension across a series
    double observation = 0.0;   // y_t
};

// Least-squares moving window: a batch solve θ̂ = (XᵀX)⁻¹XᵀY recomputed over
// the last l samples. Produces an estimate only once the window is full, so a
// series of length L yields L − l + 1 estimates.
class LsmwState {
public:
    explicit LsmwState(std::size_t window);

    // Pushes a sample, evicting the oldest once full. Returns the window
    // estimate when the buffer holds exactly l samples, nothing otherwise.
    std::optional<Eigen::VectorXd> step(const Sample& s);

    bool full() const { return window_.size() == l_; }
    std::size_t window_size() const { return l_; }

    // θ̂ᵀx over the current window; empty until the window is full.
    std::optional<double> predict(const Eigen::VectorXd& x) const;

    const std::vector<Eigen::VectorXd>& estimates() const { return estimates_; }
    // Per-window residual vectors ê = Y − Xθ̂, aligned with estimates().
    const std::vector<Eigen::VectorXd>& residuals() const { return residuals_; }

private:
    std::size_t l_;
    std::deque<Sample> window_;
    std::optional<Eigen::VectorXd> theta_;
    std::vector<Eigen::VectorXd> estimates_;
    std::vector<Eigen::VectorXd> residuals_;
    Eigen::Index dim_ = -1;
};

// Forgetting-factor schedule for RLS: a fixed λ, or the residual-driven
// arctan law λ = 1 − α1((1/π)·arctan(α2(|ê| − α3)) + 1/2).
struct LambdaMode {
    static LambdaMode constant(double lambda);
    static LambdaMode adaptive(double a1, double a2, double a3);
    // α3 tracks 1% of the running mean of |y| instead of a fixed threshold.
    static LambdaMode adaptive_auto(double a1, double a2);

    bool adaptive_mode = false;
    double lambda = 1.0;
    double a1 = 0.0, a2 = 0.0;
    double a3 = -1.0;  // < 0 means automatic

private:
    LambdaMode() = default;
};

// λ(|ê|) per the arctan law; strictly decreasing, bounded in (1 − α1, 1).
double adaptive_lambda(double e_prev, double a1, double a2, double a3);

// Recursive least squares with forgetting factor:
//   P ← (1/λ)[P − (P x xᵀ P)/(λ + xᵀ P x)],  K = P x,  θ̂ ← θ̂ + K(y − xᵀθ̂).
// In adaptive mode λ is recomputed from the previous residual before each update.
class RlsState {
public:
    RlsState(Eigen::VectorXd theta0, Eigen::MatrixXd P0, LambdaMode mode);

    // Seeds the |y| scale tracker used by the automatic α3 rule (typically
    // with the observation that initialized θ̂).
    void prime_scale(double y);

    Eigen::VectorXd step(const Sample& s);

    double predict(const Eigen::VectorXd& x) const { return x.dot(theta_); }

    const Eigen::VectorXd& theta() const { return theta_; }
    const Eigen::MatrixXd& P() const { return P_; }
    const Eigen::VectorXd& last_gain() const { return gain_; }
    double last_residual() const { return last_residual_; }
    double current_lambda() const { return lambda_used_; }

private:
    double effective_a3() const;

    Eigen::VectorXd theta_;
    Eigen::MatrixXd P_;
    LambdaMode mode_;
    Eigen::VectorXd gain_;
    double last_residual_ = 0.0;
    double lambda_used_ = 1.0;
    double scale_mean_ = 0.0;
    std::size_t scale_n_ = 0;
};

// Scalar Kalman filter alternating prediction and filtering cycles:
//   predict:  x̂(k+1|k) = A·x̂(k|k),          P(k+1|k) = A²·P(k|k) + Q
//   correct:  K = P⁻C/(C²P⁻ + R),  x̂ ← x̂⁻ + K(y − Cx̂⁻),  P ← (1 − KC)P⁻
// The input gain B is fixed at 0 (no control input in this application).
class KfState {
public:
    KfState(double x0, double P0, double A, double C, double Q, double R);

    std::pair<double, double> predict();          // returns (x̂(k+1|k), P(k+1|k))
    std::pair<double, double> correct(double y);  // requires a predict first

    double x_hat() const { return x_; }
    double P() const { return P_; }
    double last_gain() const { return K_; }
    double A() const { return A_; }
    double C() const { return C_; }
    double Q() const { return Q_; }
    double R() const { return R_; }

    static constexpr double B = 0.0;

private:
    double x_, P_;
    double A_, C_, Q_, R_;
    double K_ = 0.0;
    bool predicted_ = false;
};

struct ErrorStats {
    double mean_error = 0.0;
    double std_dev = 0.0;
    double rmse = 0.0;
    double max_abs = 0.0;
    std::size_t count = 0;
};

ErrorStats compute_error_stats(const std::vector<double>& residuals);

enum class Method { lsmw, rls, rls_adaptive, kf };

std::string_view method_name(Method m);
std::optional<Method> method_from_name(std::string_view name);

// Knobs for run_estimator and the per-arc banks. Negative values mean
// "derive a default from the data".
struct EstimatorSpec {
    Method method = Method::kf;
    std::size_t window = 5;                             // lsmw
    double lambda = 0.98;                               // rls, constant λ
    double alpha1 = 0.5, alpha2 = 10.0, alpha3 = -1.0;  // rls-adaptive; α3 < 0 → auto
    double q = -1.0, r = -1.0;                          // kf; < 0 → estimated from data
    double q_over_r = 8.0;                              // kf process/measurement ratio
};

struct EstimateRun {
    // One-step-ahead predictions aligned with the series; empty during warm-up.
    std::vector<std::optional<double>> predicted;
    std::vector<double> residuals;  // y_t − predicted_t where defined
    ErrorStats stats;
};

// Feeds a series in time order with the regressor fixed to the scalar 1, so θ
// is the local mean traversal time. The estimate at step t is the prediction
// formed before y_t is incorporated; ErrorStats covers those residuals.
//
// Warm-up: lsmw needs `window` observations before its first prediction
// (series length must be ≥ window + 1); rls and kf consume the first
// observation as initialization (θ̂_0 = y_0 resp. x̂_0 = y_0, P_0 = R).
// When unconfigured, kf estimates R as the sample variance of the first 20
// first-differences divided by 2, and sets Q = q_over_r · R.
EstimateRun run_estimator(const EstimatorSpec& spec, const std::vector<double>& series);
EstimateRun run_estimator(const EstimatorSpec& spec, const std::vector<TraversalObservation>& series);

}  // namespace agvcost
