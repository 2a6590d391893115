#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "idpath/common.hpp"
#include "idpath/special.hpp"

namespace idpath {

struct KsResult {
    double statistic = 0.0;  // sup-distance D
    double p_value = 1.0;
    size_t n = 0;
};

// One-sample Kolmogorov-Smirnov against a continuous CDF; p-value uses the
// Stephens small-sample correction of the asymptotic law.
inline KsResult ks_test_1sample(std::vector<double> x, const std::function<double(double)>& cdf) {
    if (x.size() < 8) throw Error(ErrorCode::kDomain, "ks_test_1sample: need at least 8 samples");
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        const double f = cdf(x[i]);
        d = std::max(d, std::max((i + 1) / n - f, f - i / n));
    }
    const double rn = std::sqrt(n);
    KsResult r;
    r.statistic = d;
    r.n = x.size();
    r.p_value = kolmogorov_sf((rn + 0.12 + 0.11 / rn) * d);
    return r;
}

// Two-sample Kolmogorov-Smirnov.
inline KsResult ks_test_2sample(std::vector<double> x, std::vector<double> y) {
    if (x.size() < 8 || y.size() < 8)
        throw Error(ErrorCode::kDomain, "ks_test_2sample: need at least 8 samples per side");
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
    double d = 0.0;
    size_t i = 0, j = 0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] <= v) ++i;
        while (j < y.size() && y[j] <= v) ++j;
        d = std::max(d, std::abs(i / nx - j / ny));
    }
    const double ne = std::sqrt(nx * ny / (nx + ny));
    KsResult r;
    r.statistic = d;
    r.n = x.size() + y.size();
    r.p_value = kolmogorov_sf((ne + 0.12 + 0.11 / ne) * d);
    return r;
}

struct TailExponent {
    double alpha_hat = kNaN;
    double se = kNaN;
    int k = 0;  // order statistics used
};

// Hill estimator of the tail exponent from the top fraction of the sample.
inline TailExponent tail_exponent(std::vector<double> x, double top_fraction) {
    if (!(top_fraction > 0.0 && top_fraction < 1.0))
        throw Error(ErrorCode::kDomain, "tail_exponent: top_fraction in (0,1) required");
    std::sort(x.begin(), x.end(), std::greater<>());
    int k = static_cast<int>(top_fraction * x.size());
    k = std::min<int>(std::max(k, 2), static_cast<int>(x.size()) - 1);
    if (!(x[k] > 0.0))
        throw Error(ErrorCode::kDomain, "tail_exponent: threshold order statistic must be positive");
    double s = 0.0;
    for (int i = 0; i < k; ++i) s += std::log(x[i] / x[k]);
    TailExponent t;
    t.k = k;
    t.alpha_hat = k / s;
    t.se = t.alpha_hat / std::sqrt(static_cast<double>(k));
    return t;
}

// Mann-Whitney one-sided p-value for the alternative "a stochastically smaller
// than b" (normal approximation with tie correction).
inline double rank_sum_p_less(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 8 || b.size() < 8)
        throw Error(ErrorCode::kDomain, "rank_sum_p_less: need at least 8 samples per side");
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::vector<double> bs(b);
    std::sort(bs.begin(), bs.end());
    double u = 0.0;
    for (double v : a) {
        const auto lo = std::lower_bound(bs.begin(), bs.end(), v) - bs.begin();
        const auto hi = std::upper_bound(bs.begin(), bs.end(), v) - bs.begin();
        u += (nb - hi) + 0.5 * (hi - lo);  // pairs with v < b, ties half
    }
    const double mean = na * nb / 2.0;
    const double sd = std::sqrt(na * nb * (na + nb + 1.0) / 12.0);
    const double z = (u - mean) / sd;
    return 1.0 - normal_cdf(z);  // large u favors "a smaller"
}

// Mardia skewness statistic for multivariate normality; rows of x are samples.
inline double mardia_skewness_p(const Eigen::MatrixXd& x) {
    const int n = static_cast<int>(x.rows()), d = static_cast<int>(x.cols());
    if (n < 16) throw Error(ErrorCode::kDomain, "mardia_skewness_p: need at least 16 samples");
    Eigen::RowVectorXd mu = x.colwise().mean();
    Eigen::MatrixXd c = x.rowwise() - mu;
    Eigen::MatrixXd s = (c.transpose() * c) / static_cast<double>(n);
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success)
        throw Error(ErrorCode::kDomain, "mardia_skewness_p: singular sample covariance");
    Eigen::MatrixXd g = c * llt.solve(c.transpose());  // Mahalanobis gram
    double b = g.array().cube().sum() / (static_cast<double>(n) * n);
    const double df = d * (d + 1.0) * (d + 2.0) / 6.0;
    return chi2_sf(n * b / 6.0, df);
}

inline double sample_mean(const std::vector<double>& x) {
    CompensatedSum s;
    for (double v : x) s.add(v);
    return s.value() / static_cast<double>(x.size());
}

inline double sample_variance(const std::vector<double>& x) {
    const double mu = sample_mean(x);
    CompensatedSum s;
    for (double v : x) s.add((v - mu) * (v - mu));
    return s.value() / (static_cast<double>(x.size()) - 1.0);
}

}  // namespace idpath
