#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "idpath/common.hpp"
#include "idpath/quadrature.hpp"

namespace idpath {

struct KernelRegularity {
    bool bounded = true;
    bool square_integrable = true;
    // Lipschitz-in-L2 exponents; one entry per subdomain. Empty when no
    // exponent is established for the family.
    std::vector<double> c1;
    std::vector<Interval> subdomains;
};

// A deterministic scalar kernel f(t,s) on t in [0,T], s in the natural domain,
// together with the metadata the simulator and the diagnostics need. Closed
// forms are attached where elementary; quadrature fills the rest.
class Kernel {
  public:
    std::string id;
    double horizon = 1.0;  // T
    Interval natural_domain{0.0, 1.0};
    KernelRegularity regularity;

    std::function<double(double, double)> eval_fn;
    std::function<Interval(double)> support_fn;
    std::function<double(double)> offset_fn;                          // deterministic path shift
    std::function<double(double, Interval)> time_integral_fn;         // closed form, optional
    std::function<double(double, double, Interval)> increment_l2_fn;  // closed form, optional

    double evaluate(double t, double s) const {
        check_time(t);
        return eval_fn(t, s);
    }

    Interval support(double t) const {
        check_time(t);
        return support_fn(t);
    }

    double offset(double t) const { return offset_fn ? offset_fn(t) : 0.0; }

    // int_window f(t,s) ds; exact when a closed form is attached.
    double time_integral(double t, Interval window) const {
        check_time(t);
        if (!natural_domain.contains(window))
            throw Error(ErrorCode::kDomain, "time_integral: window outside the kernel domain");
        if (time_integral_fn) return time_integral_fn(t, window);
        Interval iv = window.intersect(support_fn(t));
        if (iv.empty()) return 0.0;
        auto f = [&](double s) { return eval_fn(t, s); };
        return integrate(f, iv, {1e-8, 1e-13, 4000}, interior_breaks(iv, {0.0, t})).value;
    }

    // int_subdomain (f(t2,s) - f(t1,s))^2 ds.
    double increment_l2(double t1, double t2, Interval subdomain) const {
        if (!(0.0 <= t1 && t1 <= t2 && t2 <= horizon))
            throw Error(ErrorCode::kDomain, "increment_l2: need 0 <= t1 <= t2 <= T");
        if (increment_l2_fn) return increment_l2_fn(t1, t2, subdomain);
        Interval hull{std::min(support_fn(t1).lo, support_fn(t2).lo),
                      std::max(support_fn(t1).hi, support_fn(t2).hi)};
        Interval iv = subdomain.intersect(hull);
        if (iv.empty()) return 0.0;
        auto f = [&](double s) {
            const double d = eval_fn(t2, s) - eval_fn(t1, s);
            return d * d;
        };
        double v = integrate(f, iv, {1e-7, 1e-12, 4000}, interior_breaks(iv, {0.0, t1, t2})).value;
        if (!std::isfinite(v) || v > 1e100)
            throw Error(ErrorCode::kDomain,
                        "increment_l2: integral diverges (kernel not square-integrable here)");
        return v;
    }

    // int_window f(t,s)^2 ds (isometry factor for Gaussian scaling checks).
    double squared_integral(double t, Interval window) const {
        check_time(t);
        Interval iv = window.intersect(support_fn(t));
        if (iv.empty()) return 0.0;
        auto f = [&](double s) {
            const double v = eval_fn(t, s);
            return v * v;
        };
        return integrate(f, iv, {1e-8, 1e-13, 4000}, interior_breaks(iv, {0.0, t})).value;
    }

    KernelRegularity regularity_report() const { return regularity; }

    static Kernel indicator(double T);
    static Kernel ou(double lambda, double mu, double x0, double T);
    static Kernel reverse_ou(double lambda, double T);
    static Kernel frac_kha(double H, double alpha, double c, double T);
    static Kernel linear_frac(int n, double H, double alpha, double T);
    static Kernel carma(std::vector<double> a_coeffs, std::vector<double> b_coeffs, double T);
    static Kernel log_frac(double T);

  private:
    void check_time(double t) const {
        if (!(t >= 0.0 && t <= horizon))
            throw Error(ErrorCode::kDomain, "kernel time argument outside [0,T]");
    }

    static std::vector<double> interior_breaks(Interval iv, std::initializer_list<double> pts) {
        std::vector<double> b;
        for (double p : pts)
            if (p > iv.lo && p < iv.hi) b.push_back(p);
        return b;
    }
};

inline Kernel Kernel::indicator(double T) {
    if (!(T > 0.0)) throw Error(ErrorCode::kDomain, "indicator kernel: T > 0 required");
    Kernel k;
    k.id = "indicator";
    k.horizon = T;
    k.natural_domain = {0.0, T};
    k.regularity = {true, true, {1.0}, {{0.0, T}}};
    k.eval_fn = [](double t, double s) { return (s >= 0.0 && s < t) ? 1.0 : 0.0; };
    k.support_fn = [](double t) { return Interval{0.0, t}; };
    k.time_integral_fn = [](double t, Interval w) {
        return std::max(0.0, std::min(w.hi, t) - std::max(w.lo, 0.0));
    };
    k.increment_l2_fn = [](double t1, double t2, Interval sub) {
        return std::max(0.0, std::min(sub.hi, t2) - std::max(sub.lo, t1));
    };
    return k;
}

inline Kernel Kernel::ou(double lambda, double mu, double x0, double T) {
    if (!(lambda > 0.0) || !(T > 0.0))
        throw Error(ErrorCode::kDomain, "ou kernel: lambda > 0 and T > 0 required");
    Kernel k;
    k.id = "ou(lambda=" + std::to_string(lambda) + ")";
    k.horizon = T;
    k.natural_domain = {0.0, T};
    k.regularity = {true, true, {1.0}, {{0.0, T}}};
    k.eval_fn = [lambda](double t, double s) {
        return (s >= 0.0 && s < t) ? std::exp(-lambda * (t - s)) : 0.0;
    };
    k.support_fn = [](double t) { return Interval{0.0, t}; };
    k.offset_fn = [lambda, mu, x0](double t) {
        return x0 * std::exp(-lambda * t) + mu * -std::expm1(-lambda * t);
    };
    k.time_integral_fn = [lambda](double t, Interval w) {
        const double a = std::max(w.lo, 0.0), b = std::min(w.hi, t);
        if (!(a < b)) return 0.0;
        return (std::exp(-lambda * (t - b)) - std::exp(-lambda * (t - a))) / lambda;
    };
    k.increment_l2_fn = [lambda](double t1, double t2, Interval sub) {
        // s < t1: (1-e^{-l d})^2 e^{-2l(t1-s)};  t1 <= s < t2: e^{-2l(t2-s)}
        const double d = t2 - t1;
        const double g = -std::expm1(-lambda * d);  // 1 - e^{-l d}
        double acc = 0.0;
        const double a1 = std::max(sub.lo, 0.0), b1 = std::min(sub.hi, t1);
        if (a1 < b1)
            acc += g * g *
                   (std::exp(-2.0 * lambda * (t1 - b1)) - std::exp(-2.0 * lambda * (t1 - a1))) /
                   (2.0 * lambda);
        const double a2 = std::max(sub.lo, t1), b2 = std::min(sub.hi, t2);
        if (a2 < b2)
            acc += (std::exp(-2.0 * lambda * (t2 - b2)) - std::exp(-2.0 * lambda * (t2 - a2))) /
                   (2.0 * lambda);
        return acc;
    };
    return k;
}

inline Kernel Kernel::reverse_ou(double lambda, double T) {
    if (!(lambda > 0.0) || !(T > 0.0))
        throw Error(ErrorCode::kDomain, "reverse_ou kernel: lambda > 0 and T > 0 required");
    Kernel k;
    k.id = "reverse_ou(lambda=" + std::to_string(lambda) + ")";
    k.horizon = T;
    k.natural_domain = whole_line();
    k.regularity = {true, true, {1.0}, {whole_line()}};
    k.eval_fn = [lambda](double t, double s) {
        return s >= t ? std::exp(-lambda * (s - t)) : 0.0;
    };
    k.support_fn = [](double t) { return Interval{t, kInf}; };
    k.time_integral_fn = [lambda](double t, Interval w) {
        const double a = std::max(w.lo, t), b = w.hi;
        if (!(a < b)) return 0.0;
        const double top = std::isfinite(b) ? std::exp(-lambda * (b - t)) : 0.0;
        return (std::exp(-lambda * (a - t)) - top) / lambda;
    };
    k.increment_l2_fn = [lambda](double t1, double t2, Interval sub) {
        // t1 <= s < t2: e^{-2l(s-t1)};  s >= t2: (1-e^{-l d})^2 e^{-2l(s-t2)}
        const double g = -std::expm1(-lambda * (t2 - t1));
        double acc = 0.0;
        const double a1 = std::max(sub.lo, t1), b1 = std::min(sub.hi, t2);
        if (a1 < b1)
            acc += (std::exp(-2.0 * lambda * (a1 - t1)) - std::exp(-2.0 * lambda * (b1 - t1))) /
                   (2.0 * lambda);
        const double a2 = std::max(sub.lo, t2), b2 = sub.hi;
        if (a2 < b2) {
            const double top = std::isfinite(b2) ? std::exp(-2.0 * lambda * (b2 - t2)) : 0.0;
            acc += g * g * (std::exp(-2.0 * lambda * (a2 - t2)) - top) / (2.0 * lambda);
        }
        return acc;
    };
    return k;
}

namespace detail {

// inner integral of the fractional kernel: int_s^t u^{h-1}(u-s)^h du via the
// endpoint substitution u = s + v^2 (integrand v^{2h+1}-smooth at v = 0)
inline double frac_kha_inner(double s, double t, double h) {
    const double vmax = std::sqrt(t - s);
    auto g = [s, h](double v) {
        return 2.0 * std::pow(s + v * v, h - 1.0) * std::pow(v, 2.0 * h + 1.0);
    };
    return integrate(g, 0.0, vmax, {1e-12, 1e-10, 4000}).value;
}

}  // namespace detail

/// Self-similar fractional kernel on [0,T]:
/// c [ (t/s)^h (t-s)^h - h s^{-h} int_s^t u^{h-1}(u-s)^h du ] on 0 < s < t,
/// h = H - 1/alpha. Bounded only for h > 0; h < 0 diverges as s -> t-.
inline Kernel Kernel::frac_kha(double H, double alpha, double c, double T) {
    if (!(alpha > 0.0 && alpha < 2.0))
        throw Error(ErrorCode::kDomain, "frac_kha kernel: alpha in (0,2) required");
    const double h = H - 1.0 / alpha;
    if (!(h > -0.5 && h < 0.5) || h == 0.0)
        throw Error(ErrorCode::kConfigInvalid,
                    "frac_kha kernel: H must lie in (1/alpha - 1/2, 1/alpha + 1/2) excluding "
                    "1/alpha; admissible simulation range is H in (1/alpha, 1/alpha + 1/2)");
    if (!(c > 0.0) || !(T > 0.0))
        throw Error(ErrorCode::kDomain, "frac_kha kernel: c > 0 and T > 0 required");
    Kernel k;
    k.id = "frac_kha(H=" + std::to_string(H) + ",alpha=" + std::to_string(alpha) + ")";
    k.horizon = T;
    k.natural_domain = {0.0, T};
    k.regularity = {h > 0.0, true, {2.0 * h + 1.0}, {{0.0, T}}};
    k.eval_fn = [h, c](double t, double s) {
        if (!(s > 0.0 && s < t)) return 0.0;
        const double lead = std::pow(t / s, h) * std::pow(t - s, h);
        return c * (lead - h * std::pow(s, -h) * detail::frac_kha_inner(s, t, h));
    };
    k.support_fn = [](double t) { return Interval{0.0, t}; };
    return k;
}

namespace detail {

// ((t-s)_+^h - sum_{k<n} C(h,k) t^k (-s)_+^{h-k}) / Gamma(h+1); for deep
// negative s the direct difference cancels, so the binomial tail series
// sum_{k>=n} C(h,k) t^k (-s)^{h-k} takes over.
struct LinearFracEval {
    int n;
    double h;
    double inv_gamma;  // 1/Gamma(h+1)

    double operator()(double t, double s) const {
        if (s >= t) return 0.0;
        const double lead = h == 0.0 ? 1.0 : std::pow(t - s, h);
        if (s >= 0.0) return inv_gamma * lead;
        const double x = -s;
        if (x > 8.0 * std::max(t, 1e-300)) {
            double coef = 1.0, sum = 0.0;  // C(h,k) by the recurrence
            for (int k = 0; k < 200; ++k) {
                if (k >= n) {
                    const double term = coef * std::pow(t, k) * std::pow(x, h - k);
                    sum += term;
                    if (std::abs(term) < 1e-17 * std::abs(sum) + 1e-300) break;
                }
                coef *= (h - k) / (k + 1.0);
            }
            return inv_gamma * sum;
        }
        double coef = 1.0, sum = lead;
        for (int k = 0; k < n; ++k) {
            sum -= coef * std::pow(t, k) * std::pow(x, h - k);
            coef *= (h - k) / (k + 1.0);
        }
        return inv_gamma * sum;
    }
};

}  // namespace detail

/// n-th order moving average kernel with Hurst index H; h = H - 1/alpha must
/// lie in (n-1, n-1/2). H = 1/alpha with n = 1 is accepted and reduces to the
/// indicator kernel by the zero-power convention.
inline Kernel Kernel::linear_frac(int n, double H, double alpha, double T) {
    if (n < 1) throw Error(ErrorCode::kDomain, "linear_frac kernel: n >= 1 required");
    if (!(alpha > 0.0 && alpha < 2.0))
        throw Error(ErrorCode::kDomain, "linear_frac kernel: alpha in (0,2) required");
    if (!(T > 0.0)) throw Error(ErrorCode::kDomain, "linear_frac kernel: T > 0 required");
    const double h = H - 1.0 / alpha;
    const bool reduces_to_indicator = (n == 1 && h == 0.0);
    if (!reduces_to_indicator && !(h > n - 1.0 && h < n - 0.5))
        throw Error(ErrorCode::kConfigInvalid,
                    "linear_frac kernel: H - 1/alpha must lie in (n-1, n-1/2)");
    Kernel k;
    k.id = "linear_frac(n=" + std::to_string(n) + ",H=" + std::to_string(H) + ")";
    k.horizon = T;
    k.natural_domain = whole_line();
    if (n == 1) {
        k.regularity = {true, true, {2.0 * h + 1.0}, {whole_line()}};
    } else {
        k.regularity = {true, true, {2.0, 2.0 * h + 1.0}, {{-kInf, 0.0}, {0.0, kInf}}};
    }
    detail::LinearFracEval ev{n, h, 1.0 / std::tgamma(h + 1.0)};
    k.eval_fn = ev;
    if (reduces_to_indicator) {
        k.support_fn = [](double t) { return Interval{0.0, t}; };
    } else {
        k.support_fn = [](double t) { return Interval{-kInf, t}; };
    }
    // elementary antiderivative: -(t-s)^{h+1}/(h+1) + sum_k C(h,k) t^k (-s)^{h-k+1}/(h-k+1)
    k.time_integral_fn = [n, h, ig = ev.inv_gamma](double t, Interval w) {
        if (!std::isfinite(w.lo) || !std::isfinite(w.hi))
            throw Error(ErrorCode::kDomain,
                        "linear_frac time_integral diverges on an infinite window");
        auto anti = [n, h, t](double s) {
            double v = (s < t) ? -std::pow(t - s, h + 1.0) / (h + 1.0) : 0.0;
            if (s < 0.0) {
                double coef = 1.0;
                const double x = -s;
                for (int k = 0; k < n; ++k) {
                    v += coef * std::pow(t, k) * std::pow(x, h - k + 1.0) / (h - k + 1.0);
                    coef *= (h - k) / (k + 1.0);
                }
            }
            return v;
        };
        return ig * (anti(w.hi) - anti(w.lo));
    };
    return k;
}

/// Kernel of a stationary CARMA(p,q) process driven through its distinct
/// negative autoregressive roots: sum_k b(l_k)/a'(l_k) e^{l_k (t-s)} 1_{s<t}.
inline Kernel Kernel::carma(std::vector<double> a_coeffs, std::vector<double> b_coeffs, double T) {
    const int p = static_cast<int>(a_coeffs.size());
    const int q = static_cast<int>(b_coeffs.size()) - 1;
    if (p < 1) throw Error(ErrorCode::kDomain, "carma kernel: need p >= 1 autoregressive coefficients");
    if (q < 0 || q >= p)
        throw Error(ErrorCode::kDomain, "carma kernel: need 0 <= q < p moving average degree");
    if (b_coeffs[q] != 1.0)
        throw Error(ErrorCode::kDomain, "carma kernel: leading moving average coefficient must be 1");
    if (!(T > 0.0)) throw Error(ErrorCode::kDomain, "carma kernel: T > 0 required");

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(p, p);
    for (int i = 0; i + 1 < p; ++i) A(i, i + 1) = 1.0;
    for (int j = 0; j < p; ++j) A(p - 1, j) = -a_coeffs[p - 1 - j];
    Eigen::EigenSolver<Eigen::MatrixXd> es(A);
    if (es.info() != Eigen::Success)
        throw Error(ErrorCode::kDomain, "carma kernel: eigenvalue computation failed");

    std::vector<double> roots(p);
    for (int i = 0; i < p; ++i) {
        const auto z = es.eigenvalues()[i];
        if (std::abs(z.imag()) > 1e-8 * std::max(1.0, std::abs(z.real())))
            throw Error(ErrorCode::kDomain,
                        "carma kernel: complex root " + std::to_string(z.real()) + "+" +
                            std::to_string(z.imag()) + "i (roots must be real)");
        if (!(z.real() < 0.0))
            throw Error(ErrorCode::kDomain, "carma kernel: nonnegative root " +
                                                std::to_string(z.real()) +
                                                " (roots must be strictly negative)");
        roots[i] = z.real();
    }
    std::sort(roots.begin(), roots.end());
    for (int i = 0; i + 1 < p; ++i)
        if (roots[i + 1] - roots[i] <= 1e-8)
            throw Error(ErrorCode::kDomain, "carma kernel: repeated root near " +
                                                std::to_string(roots[i]) +
                                                " (roots must be distinct)");

    std::vector<double> gamma(p);
    for (int i = 0; i < p; ++i) {
        double bv = 0.0, zp = 1.0;
        for (int j = 0; j <= q; ++j) {
            bv += b_coeffs[j] * zp;
            zp *= roots[i];
        }
        double ap = 1.0;  // a'(l_i) = prod_{j != i} (l_i - l_j)
        for (int j = 0; j < p; ++j)
            if (j != i) ap *= roots[i] - roots[j];
        gamma[i] = bv / ap;
    }

    Kernel k;
    k.id = "carma(p=" + std::to_string(p) + ",q=" + std::to_string(q) + ")";
    k.horizon = T;
    k.natural_domain = {-kInf, T};
    k.regularity = {true, true, {1.0}, {{-kInf, T}}};
    k.eval_fn = [roots, gamma](double t, double s) {
        if (s >= t) return 0.0;
        double v = 0.0;
        for (size_t i = 0; i < roots.size(); ++i) v += gamma[i] * std::exp(roots[i] * (t - s));
        return v;
    };
    k.support_fn = [](double t) { return Interval{-kInf, t}; };
    k.time_integral_fn = [roots, gamma](double t, Interval w) {
        const double a = w.lo, b = std::min(w.hi, t);
        if (!(a < b)) return 0.0;
        double v = 0.0;
        for (size_t i = 0; i < roots.size(); ++i) {
            const double bot = std::isfinite(a) ? std::exp(roots[i] * (t - a)) : 0.0;
            v += gamma[i] * (std::exp(roots[i] * (t - b)) - bot) / (-roots[i]);
        }
        return v;
    };
    k.increment_l2_fn = [roots, gamma](double t1, double t2, Interval sub) {
        // pairwise elementary integrals of exponential products on the two
        // support pieces; on s < t1 the difference has coefficients
        // gamma_i (e^{l_i t2} - e^{l_i t1}) e^{-l_i s}
        const size_t P = roots.size();
        double acc = 0.0;
        const double a1 = sub.lo, b1 = std::min(sub.hi, t1);
        if (a1 < b1) {
            for (size_t i = 0; i < P; ++i)
                for (size_t j = 0; j < P; ++j) {
                    const double lij = roots[i] + roots[j];
                    const double ci = gamma[i] * -std::expm1(roots[i] * (t2 - t1));
                    const double cj = gamma[j] * -std::expm1(roots[j] * (t2 - t1));
                    // int e^{-lij s} ds with coefficients at reference t1
                    const double bot = std::isfinite(a1) ? std::exp(lij * (t1 - a1)) : 0.0;
                    acc += ci * cj * (std::exp(lij * (t1 - b1)) - bot) / (-lij);
                }
        }
        const double a2 = std::max(sub.lo, t1), b2 = std::min(sub.hi, t2);
        if (a2 < b2) {
            for (size_t i = 0; i < P; ++i)
                for (size_t j = 0; j < P; ++j) {
                    const double lij = roots[i] + roots[j];
                    acc += gamma[i] * gamma[j] *
                           (std::exp(lij * (t2 - b2)) - std::exp(lij * (t2 - a2))) / (-lij);
                }
        }
        return acc;
    };
    return k;
}

/// ln|t-s| - ln|s|: square-integrable but unbounded near s = 0 and s = t, so
/// flagged non-simulatable.
inline Kernel Kernel::log_frac(double T) {
    if (!(T > 0.0)) throw Error(ErrorCode::kDomain, "log_frac kernel: T > 0 required");
    Kernel k;
    k.id = "log_frac";
    k.horizon = T;
    k.natural_domain = whole_line();
    k.regularity = {false, true, {}, {whole_line()}};
    k.eval_fn = [](double t, double s) {
        if (s == 0.0 || s == t) return 0.0;  // null set; keeps integrals finite
        return std::log(std::abs(t - s)) - std::log(std::abs(s));
    };
    k.support_fn = [](double) { return whole_line(); };
    return k;
}

}  // namespace idpath
