#include "agvcost/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace agvcost {

namespace {

void check_regressor(Eigen::Index expected, const Sample& s) {
    if (s.regressor.size() == 0)
        throw UsageError("sample regressor is empty");
    if (expected >= 0 && s.regressor.size() != expected)
        throw UsageError("regressor dimension changed mid-series");
    if (!s.regressor.allFinite() || !std::isfinite(s.observation))
        throw UsageError("non-finite sample");
}

}  // namespace

LsmwState::LsmwState(std::size_t window) : l_(window) {
    if (window < 1)
        throw UsageError("window size must be at least 1");
}

std::optional<Eigen::VectorXd> LsmwState::step(const Sample& s) {
    check_regressor(dim_, s);
    if (dim_ < 0)
        dim_ = s.regressor.size();

    if (window_.size() == l_)
        window_.pop_front();
    window_.push_back(s);
    if (window_.size() < l_)
        return std::nullopt;

    const Eigen::Index n = dim_;
    Eigen::MatrixXd X(static_cast<Eigen::Index>(l_), n);
    Eigen::VectorXd Y(static_cast<Eigen::Index>(l_));
    for (std::size_t i = 0; i < l_; ++i) {
        X.row(static_cast<Eigen::Index>(i)) = window_[i].regressor.transpose();
        Y(static_cast<Eigen::Index>(i)) = window_[i].observation;
    }

    Eigen::MatrixXd XtX = X.transpose() * X;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(XtX);
    if (!lu.isInvertible())
        throw NumericError("singular window matrix (degenerate regressors)");

    Eigen::VectorXd theta = lu.solve(X.transpose() * Y);
    theta_ = theta;
    estimates_.push_back(theta);
    residuals_.push_back(Y - X * theta);
    return theta;
}

std::optional<double> LsmwState::predict(const Eigen::VectorXd& x) const {
    if (!theta_)
        return std::nullopt;
    if (x.size() != theta_->size())
        throw UsageError("regressor dimension mismatch in predict");
    return x.dot(*theta_);
}

LambdaMode LambdaMode::constant(double lambda) {
    if (!(lambda > 0.0) || lambda > 1.0)
        throw UsageError("forgetting factor must lie in (0, 1]");
    LambdaMode m;
    m.lambda = lambda;
    return m;
}

LambdaMode LambdaMode::adaptive(double a1, double a2, double a3) {
    if (!(a1 > 0.0) || a1 >= 1.0)
        throw UsageError("alpha1 must lie in (0, 1)");
    if (!(a2 > 0.0))
        throw UsageError("alpha2 must be positive");
    if (!(a3 >= 0.0))
        throw UsageError("alpha3 must be non-negative");
    LambdaMode m;
    m.adaptive_mode = true;
    m.a1 = a1;
    m.a2 = a2;
    m.a3 = a3;
    return m;
}

LambdaMode LambdaMode::adaptive_auto(double a1, double a2) {
    LambdaMode m = adaptive(a1, a2, 0.0);
    m.a3 = -1.0;
    return m;
}

double adaptive_lambda(double e_prev, double a1, double a2, double a3) {
    if (!(a1 > 0.0) || a1 >= 1.0)
        throw UsageError("alpha1 must lie in (0, 1)");
    if (!(a2 > 0.0))
        throw UsageError("alpha2 must be positive");
    if (!(a3 >= 0.0))
        throw UsageError("alpha3 must be non-negative");
    return 1.0 - a1 * (std::atan(a2 * (std::abs(e_prev) - a3)) / std::numbers::pi + 0.5);
}

RlsState::RlsState(Eigen::VectorXd theta0, Eigen::MatrixXd P0, LambdaMode mode)
    : theta_(std::move(theta0)), P_(std::move(P0)), mode_(mode), gain_(theta_.size()) {
    if (theta_.size() == 0)
        throw UsageError("theta0 is empty");
    if (P_.rows() != theta_.size() || P_.cols() != theta_.size())
        throw UsageError("P0 shape does not match theta0");
    if (!P_.isApprox(P_.transpose(), 1e-9))
        throw UsageError("P0 must be symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(P_);
    if (llt.info() != Eigen::Success)
        throw UsageError("P0 must be positive definite");
    gain_.setZero();
}

void RlsState::prime_scale(double y) {
    scale_mean_ = std::abs(y);
    scale_n_ = 1;
}

double RlsState::effective_a3() const {
    if (mode_.a3 >= 0.0)
        return mode_.a3;
    return 0.01 * scale_mean_;
}

Eigen::VectorXd RlsState::step(const Sample& s) {
    check_regressor(theta_.size(), s);
    const Eigen::VectorXd& x = s.regressor;

    double lam = mode_.adaptive_mode
                     ? adaptive_lambda(last_residual_, mode_.a1, mode_.a2, effective_a3())
                     : mode_.lambda;

    double denom = lam + x.dot(P_ * x);
    if (!(denom > 0.0) || !std::isfinite(denom))
        throw NumericError("rls update denominator is not positive");

    P_ = (P_ - (P_ * x) * (x.transpose() * P_) / denom) / lam;
    P_ = ((P_ + P_.transpose()) / 2.0).eval();  // hold symmetry against roundoff
    gain_ = P_ * x;

    double e = s.observation - x.dot(theta_);
    theta_ += gain_ * e;
    last_residual_ = e;
    lambda_used_ = lam;

    if (mode_.adaptive_mode && mode_.a3 < 0.0) {
        ++scale_n_;
        scale_mean_ += (std::abs(s.observation) - scale_mean_) / static_cast<double>(scale_n_);
    }
    return theta_;
}

KfState::KfState(double x0, double P0, double A, double C, double Q, double R)
    : x_(x0), P_(P0), A_(A), C_(C), Q_(Q), R_(R) {
    if (!std::isfinite(x0) || !std::isfinite(P0) || !std::isfinite(A) || !std::isfinite(C))
        throw UsageError("non-finite filter parameter");
    if (!(P0 >= 0.0))
        throw UsageError("P0 must be non-negative");
    if (!(R > 0.0))
        throw UsageError("R must be positive");
    if (!(Q >= 0.0))
        throw UsageError("Q must be non-negative");
}

std::pair<double, double> KfState::predict() {
    x_ = A_ * x_;  // + B·u with u ≡ 0
    P_ = A_ * P_ * A_ + Q_;
    predicted_ = true;
    return {x_, P_};
}

std::pair<double, double> KfState::correct(double y) {
    if (!predicted_)
        throw UsageError("kf correct without a preceding predict");
    double S = C_ * P_ * C_ + R_;
    if (!(S > 0.0) || !std::isfinite(S))
        throw NumericError("kf innovation variance is not positive");
    K_ = P_ * C_ / S;
    x_ += K_ * (y - C_ * x_);
    P_ = (1.0 - K_ * C_) * P_;
    predicted_ = false;
    return {x_, P_};
}

ErrorStats compute_error_stats(const std::vector<double>& residuals) {
    if (residuals.empty())
        throw UsageError("no residuals to summarize");
    double sum = 0.0, sum_sq = 0.0, max_abs = 0.0;
    for (double e : residuals) {
        sum += e;
        sum_sq += e * e;
        max_abs = std::max(max_abs, std::abs(e));
    }
    const double n = static_cast<double>(residuals.size());
    ErrorStats st;
    st.count = residuals.size();
    st.mean_error = sum / n;
    st.rmse = std::sqrt(sum_sq / n);
    double var = 0.0;
    for (double e : residuals)
        var += (e - st.mean_error) * (e - st.mean_error);
    st.std_dev = std::sqrt(var / n);
    st.max_abs = max_abs;
    return st;
}

std::string_view method_name(Method m) {
    switch (m) {
        case Method::lsmw: return "lsmw";
        case Method::rls: return "rls";
        case Method::rls_adaptive: return "rls-adaptive";
        case Method::kf: return "kf";
    }
    return "?";
}

std::optional<Method> method_from_name(std::string_view name) {
    if (name == "lsmw") return Method::lsmw;
    if (name == "rls") return Method::rls;
    if (name == "rls-adaptive") return Method::rls_adaptive;
    if (name == "kf") return Method::kf;
    return std::nullopt;
}

namespace {

// R from the data when unconfigured: differencing a slowly drifting series
// doubles the measurement-noise variance, hence the /2.
double estimate_r(const std::vector<double>& y, std::size_t lookahead = 20) {
    std::size_t n = std::min(lookahead, y.size());
    std::vector<double> d;
    for (std::size_t i = 0; i + 1 < n; ++i)
        d.push_back(y[i + 1] - y[i]);
    if (d.size() < 2)
        return 1e-12;
    double mean = 0.0;
    for (double v : d)
        mean += v;
    mean /= static_cast<double>(d.size());
    double var = 0.0;
    for (double v : d)
        var += (v - mean) * (v - mean);
    var /= static_cast<double>(d.size() - 1);
    return std::max(var / 2.0, 1e-12);
}

EstimateRun run_lsmw(const EstimatorSpec& spec, const std::vector<double>& y) {
    if (y.size() < spec.window + 1)
        throw UsageError("series shorter than lsmw warm-up (need window + 1 samples)");
    EstimateRun run;
    run.predicted.resize(y.size());
    LsmwState st(spec.window);
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
    for (std::size_t t = 0; t < y.size(); ++t) {
        if (auto p = st.predict(one)) {
            run.predicted[t] = *p;
            run.residuals.push_back(y[t] - *p);
        }
        st.step({one, y[t]});
    }
    return run;
}

EstimateRun run_rls(const EstimatorSpec& spec, const std::vector<double>& y, bool adaptive) {
    if (y.size() < 2)
        throw UsageError("series too short (need at least 2 samples)");
    EstimateRun run;
    run.predicted.resize(y.size());
    LambdaMode mode = adaptive ? (spec.alpha3 >= 0.0
                                      ? LambdaMode::adaptive(spec.alpha1, spec.alpha2, spec.alpha3)
                                      : LambdaMode::adaptive_auto(spec.alpha1, spec.alpha2))
                               : LambdaMode::constant(spec.lambda);
    Eigen::VectorXd theta0(1);
    theta0 << y[0];
    Eigen::MatrixXd P0(1, 1);
    P0 << 1e8;
    RlsState st(theta0, P0, mode);
    st.prime_scale(y[0]);
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
    for (std::size_t t = 1; t < y.size(); ++t) {
        double p = st.predict(one);
        run.predicted[t] = p;
        run.residuals.push_back(y[t] - p);
        st.step({one, y[t]});
    }
    return run;
}

EstimateRun run_kf(const EstimatorSpec& spec, const std::vector<double>& y) {
    if (y.size() < 2)
        throw UsageError("series too short (need at least 2 samples)");
    double R = spec.r >= 0.0 ? spec.r : estimate_r(y);
    double Q = spec.q >= 0.0 ? spec.q : spec.q_over_r * R;
    EstimateRun run;
    run.predicted.resize(y.size());
    KfState st(y[0], R, 1.0, 1.0, Q, R);
    for (std::size_t t = 1; t < y.size(); ++t) {
        auto [xm, Pm] = st.predict();
        (void)Pm;
        double p = st.C() * xm;
        run.predicted[t] = p;
        run.residuals.push_back(y[t] - p);
        st.correct(y[t]);
    }
    return run;
}

}  // namespace

EstimateRun run_estimator(const EstimatorSpec& spec, const std::vector<double>& series) {
    if (series.empty())
        throw UsageError("empty series");
    EstimateRun run;
    switch (spec.method) {
        case Method::lsmw: run = run_lsmw(spec, series); break;
        case Method::rls: run = run_rls(spec, series, false); break;
        case Method::rls_adaptive: run = run_rls(spec, series, true); break;
        case Method::kf: run = run_kf(spec, series); break;
    }
    run.stats = compute_error_stats(run.residuals);
    return run;
}

EstimateRun run_estimator(const EstimatorSpec& spec,
                          const std::vector<TraversalObservation>& series) {
    std::vector<double> y;
    y.reserve(series.size());
    for (const auto& obs : series)
        y.push_back(obs.duration);
    return run_estimator(spec, y);
}

}  // namespace agvcost
