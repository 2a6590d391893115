#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <type_traits>
#include <vector>

#include "idpath/common.hpp"

namespace idpath {

struct QuadratureOptions {
    double rel_tol = 1e-8;
    double abs_tol = 1e-12;
    int max_segments = 4000;
};

template <class T>
struct QuadResult {
    T value{};
    double abs_err = 0.0;
    bool converged = false;
    long evals = 0;
};

namespace detail {

// (G7, K15) Gauss-Kronrod pair, QUADPACK abscissae/weights.
inline constexpr double kGkNode[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};

inline constexpr double kGkWk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

inline constexpr double kGkWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

inline double qnorm(double v) { return std::abs(v); }
inline double qnorm(const std::complex<double>& v) { return std::abs(v); }

template <class T>
struct PanelEstimate {
    T value{};
    double err = 0.0;
};

// One Kronrod panel on [a,b]; nodes are interior, so integrable endpoint
// singularities are never evaluated directly.
template <class F, class T = std::decay_t<std::invoke_result_t<F&, double>>>
PanelEstimate<T> gk15(F& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    T fv[15];
    T fc = f(c);
    T resk = kGkWk[7] * fc;
    T resg = kGkWg[3] * fc;
    double resabs = kGkWk[7] * qnorm(fc);
    fv[14] = fc;
    for (int i = 0; i < 7; ++i) {
        double dx = h * kGkNode[i];
        T f1 = f(c - dx), f2 = f(c + dx);
        fv[2 * i] = f1;
        fv[2 * i + 1] = f2;
        resk += kGkWk[i] * (f1 + f2);
        resabs += kGkWk[i] * (qnorm(f1) + qnorm(f2));
        if (i % 2 == 1) resg += kGkWg[(i - 1) / 2] * (f1 + f2);
    }
    T reskh = resk * 0.5;
    double resasc = kGkWk[7] * qnorm(fv[14] - reskh);
    for (int i = 0; i < 7; ++i)
        resasc += kGkWk[i] * (qnorm(fv[2 * i] - reskh) + qnorm(fv[2 * i + 1] - reskh));
    resasc *= std::abs(h);
    resabs *= std::abs(h);
    double err = qnorm((resk - resg) * h);
    if (resasc != 0.0 && err != 0.0)
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    const double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50.0 * eps))
        err = std::max(err, 50.0 * eps * resabs);
    return {resk * h, err};
}

template <class T>
struct Segment {
    double a, b;
    T value;
    double err;
};

template <class F, class T = std::decay_t<std::invoke_result_t<F&, double>>>
QuadResult<T> adaptive(F& f, double a, double b, const QuadratureOptions& opts,
                       const std::vector<double>& interior_breaks) {
    QuadResult<T> out;
    if (!(a < b)) {
        out.converged = true;
        return out;
    }
    std::vector<Segment<T>> segs;
    std::vector<double> pts;
    pts.push_back(a);
    for (double p : interior_breaks)
        if (p > a && p < b) pts.push_back(p);
    pts.push_back(b);
    std::sort(pts.begin(), pts.end());
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        if (!(pts[i] < pts[i + 1])) continue;
        auto est = gk15(f, pts[i], pts[i + 1]);
        out.evals += 15;
        segs.push_back({pts[i], pts[i + 1], est.value, est.err});
    }
    while (true) {
        T total{};
        double toterr = 0.0;
        for (const auto& s : segs) {
            total += s.value;
            toterr += s.err;
        }
        out.value = total;
        out.abs_err = toterr;
        if (toterr <= std::max(opts.abs_tol, opts.rel_tol * qnorm(total))) {
            out.converged = true;
            return out;
        }
        if (static_cast<int>(segs.size()) >= opts.max_segments) return out;
        size_t worst = 0;
        for (size_t i = 1; i < segs.size(); ++i)
            if (segs[i].err > segs[worst].err) worst = i;
        Segment<T> s = segs[worst];
        double mid = 0.5 * (s.a + s.b);
        if (!(s.a < mid && mid < s.b)) {  // interval exhausted at machine precision
            segs[worst].err = 0.0;
            continue;
        }
        auto left = gk15(f, s.a, mid);
        auto right = gk15(f, mid, s.b);
        out.evals += 30;
        segs[worst] = {s.a, mid, left.value, left.err};
        segs.push_back({mid, s.b, right.value, right.err});
    }
}

}  // namespace detail

// Integrates f over [a,b]; either endpoint may be infinite (mapped through
// s = c +- (1-t)/t). interior_breaks should list known kinks/singularities.
template <class F, class T = std::decay_t<std::invoke_result_t<F&, double>>>
QuadResult<T> integrate(F&& f, double a, double b, const QuadratureOptions& opts = {},
                        const std::vector<double>& interior_breaks = {}) {
    if (!(a <= b)) throw Error(ErrorCode::kDomain, "integrate: requires a <= b");
    const bool lo_inf = std::isinf(a), hi_inf = std::isinf(b);
    if (!lo_inf && !hi_inf) return detail::adaptive(f, a, b, opts, interior_breaks);
    if (lo_inf && hi_inf) {
        double split = 0.0;
        auto r1 = integrate(f, -kInf, split, opts, interior_breaks);
        auto r2 = integrate(f, split, kInf, opts, interior_breaks);
        QuadResult<T> out;
        out.value = r1.value + r2.value;
        out.abs_err = r1.abs_err + r2.abs_err;
        out.converged = r1.converged && r2.converged;
        out.evals = r1.evals + r2.evals;
        return out;
    }
    if (hi_inf) {
        auto g = [&f, a](double t) { return f(a + (1.0 - t) / t) / (t * t); };
        std::vector<double> tb;
        for (double p : interior_breaks)
            if (p > a && std::isfinite(p)) tb.push_back(1.0 / (1.0 + (p - a)));
        return detail::adaptive(g, 0.0, 1.0, opts, tb);
    }
    auto g = [&f, b](double t) { return f(b - (1.0 - t) / t) / (t * t); };
    std::vector<double> tb;
    for (double p : interior_breaks)
        if (p < b && std::isfinite(p)) tb.push_back(1.0 / (1.0 + (b - p)));
    return detail::adaptive(g, 0.0, 1.0, opts, tb);
}

template <class F>
auto integrate(F&& f, const Interval& iv, const QuadratureOptions& opts = {},
               const std::vector<double>& interior_breaks = {}) {
    return integrate(std::forward<F>(f), iv.lo, iv.hi, opts, interior_breaks);
}

}  // namespace idpath
