#pragma once

#include <Eigen/Dense>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "idpath/common.hpp"
#include "idpath/quadrature.hpp"
#include "idpath/special.hpp"

namespace idpath {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Spectral atom on the unit sphere; w is the mass lambda({xi}).
struct StableAtom {
    Vector xi;
    double w;
};

// Adds the exponential tempering rate theta(xi) for the atom's ray.
struct TemperedAtom {
    Vector xi;
    double w;
    double theta;
};

namespace detail {

// int_{x1}^{x2} (s/L)^{-1/alpha} ds, stable near alpha = 1.
inline double stable_power_integral(double x1, double x2, double L, double alpha) {
    if (!(x1 < x2)) return 0.0;
    const double e = 1.0 - 1.0 / alpha;
    const double scale = std::pow(L, 1.0 / alpha);
    if (std::abs(e) < 1e-8) {
        const double lr = std::log(x2 / x1);
        if (e == 0.0) return scale * lr;
        return scale * std::pow(x1, e) * std::expm1(e * lr) / e;
    }
    return scale * (std::pow(x2, e) - std::pow(x1, e)) / e;
}

// (1 - e^{-t})/t evaluated from log(t); monotone, in [0,1].
inline double one_minus_exp_over(double log_t) {
    if (log_t > 700.0) return std::exp(-log_t);
    double t = std::exp(log_t);
    if (t < 1e-12) return 1.0 - 0.5 * t;
    return -std::expm1(-t) / t;
}

inline std::string fmt_num(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", x);
    return buf;
}

}  // namespace detail

// An integrator representation: the jump-size function H(r,u) with r the
// series index, a sampler for the mark U, the centering integral
// r -> int E[H 1{|H|<=1}], and the residual covariance m -> int_m^inf E[H H^T].
// Magnitudes r -> |H(r,u)| are nonincreasing for every representation here.
class LevyRepresentation {
  public:
    int dim = 1;
    std::string id;
    bool is_symmetric = false;
    // Whether the principal series subtracts the running center sum. Finite
    // variation subordinator families (gamma, exponential compound Poisson)
    // are simulated without compensation so the path is the subordinator
    // itself; asymmetric (tempered) stable families are compensated.
    bool center_in_simulation = false;
    std::optional<double> finite_total_mass;

    std::function<Vector(double, const Vector&)> jump_fn;
    std::function<Vector(Rng&)> sample_mark;
    std::function<Vector(double, double)> center_integral_fn;
    std::function<Matrix(double)> residual_cov_fn;  // null -> unsupported

    Vector jump(double r, const Vector& u) const {
        if (!(r > 0.0)) throw Error(ErrorCode::kDomain, "jump: index r must be > 0");
        return jump_fn(r, u);
    }

    // int_lo^hi E[H(s,U) 1{|H(s,U)| <= 1}] ds, 0 <= lo <= hi.
    Vector center_integral(double lo, double hi) const {
        if (!(lo >= 0.0) || !(hi >= lo))
            throw Error(ErrorCode::kDomain, "center_integral: need 0 <= lo <= hi");
        if (is_symmetric) return Vector::Zero(dim);
        return center_integral_fn(lo, hi);
    }

    // c_k over the index cell [k-1, k], k >= 1.
    Vector center(int k) const {
        if (k < 1) throw Error(ErrorCode::kDomain, "center: k >= 1 required");
        return center_integral(k - 1.0, k);
    }

    bool has_residual_covariance() const { return static_cast<bool>(residual_cov_fn); }

    // sigma_m^2; symmetric PSD by construction of the closed forms.
    Matrix residual_covariance(double m) const {
        if (!(m >= 0.0)) throw Error(ErrorCode::kDomain, "residual_covariance: m >= 0 required");
        if (!residual_cov_fn)
            throw Error(ErrorCode::kUnsupported,
                        "residual_covariance: no closed form for this representation");
        Matrix s = residual_cov_fn(m);
        return 0.5 * (s + s.transpose());
    }

    static LevyRepresentation gamma(double a, double beta);
    static LevyRepresentation stable(double alpha, std::vector<StableAtom> atoms);
    static LevyRepresentation tempered_stable(double alpha, std::vector<TemperedAtom> atoms);
    static LevyRepresentation exponential_cp();
};

namespace detail {

inline void check_atom_common(const Vector& xi, double w, int dim, size_t i) {
    if (xi.size() != dim)
        throw Error(ErrorCode::kDomain, "atom " + std::to_string(i) + ": inconsistent dimension");
    if (std::abs(xi.norm() - 1.0) > 1e-9)
        throw Error(ErrorCode::kDomain, "atom " + std::to_string(i) + ": xi must be a unit vector");
    if (!(w > 0.0)) throw Error(ErrorCode::kDomain, "atom " + std::to_string(i) + ": weight must be > 0");
}

template <class Atom>
bool atoms_symmetric(const std::vector<Atom>& atoms,
                     const std::function<bool(const Atom&, const Atom&)>& mirror) {
    for (const auto& a : atoms) {
        bool found = false;
        for (const auto& b : atoms)
            if (mirror(a, b)) {
                found = true;
                break;
            }
        if (!found) return false;
    }
    return true;
}

}  // namespace detail

/// Bondesson representation of the gamma(a, beta) subordinator:
/// H(r,u) = beta^{-1} e^{-r/a} u with U standard exponential.
inline LevyRepresentation LevyRepresentation::gamma(double a, double beta) {
    if (!(a > 0.0) || !(beta > 0.0))
        throw Error(ErrorCode::kDomain, "gamma representation: a > 0 and beta > 0 required");
    LevyRepresentation rep;
    rep.dim = 1;
    rep.id = "gamma(a=" + detail::fmt_num(a) + ",beta=" + detail::fmt_num(beta) + ")";
    rep.is_symmetric = false;
    rep.center_in_simulation = false;
    rep.jump_fn = [a, beta](double r, const Vector& u) {
        Vector h(1);
        h[0] = std::exp(-r / a) * u[0] / beta;
        return h;
    };
    rep.sample_mark = [](Rng& rng) {
        Vector u(1);
        u[0] = rng.exponential();
        return u;
    };
    // E[U 1{U <= c}] = 1-(1+c)e^{-c}; substituting t = beta e^{s/a} collapses
    // the s-integral to a(1-e^{-t})/t evaluated at the endpoints.
    rep.center_integral_fn = [a, beta](double lo, double hi) {
        const double lb = std::log(beta);
        Vector c(1);
        c[0] = a * (detail::one_minus_exp_over(lb + lo / a) - detail::one_minus_exp_over(lb + hi / a));
        return c;
    };
    rep.residual_cov_fn = [a, beta](double m) {
        Matrix s(1, 1);
        s(0, 0) = a / (beta * beta) * std::exp(-2.0 * m / a);
        return s;
    };
    return rep;
}

/// Strictly alpha-stable integrator with a discrete spectral measure:
/// H(r,u) = (r/|lambda|)^{-1/alpha} u, U drawn from lambda/|lambda| on the atoms.
inline LevyRepresentation LevyRepresentation::stable(double alpha, std::vector<StableAtom> atoms) {
    if (!(alpha > 0.0 && alpha < 2.0))
        throw Error(ErrorCode::kDomain, "stable representation: alpha in (0,2) required");
    if (atoms.empty()) throw Error(ErrorCode::kDomain, "stable representation: at least one atom");
    const int d = static_cast<int>(atoms[0].xi.size());
    double L = 0.0;
    for (size_t i = 0; i < atoms.size(); ++i) {
        detail::check_atom_common(atoms[i].xi, atoms[i].w, d, i);
        L += atoms[i].w;
    }
    LevyRepresentation rep;
    rep.dim = d;
    rep.id = "stable(alpha=" + detail::fmt_num(alpha) + ",atoms=" + std::to_string(atoms.size()) + ")";
    rep.is_symmetric = detail::atoms_symmetric<StableAtom>(
        atoms, [](const StableAtom& x, const StableAtom& y) {
            return (x.xi + y.xi).norm() < 1e-12 && std::abs(x.w - y.w) < 1e-12;
        });
    rep.center_in_simulation = !rep.is_symmetric;
    std::vector<double> weights;
    for (const auto& at : atoms) weights.push_back(at.w);
    rep.jump_fn = [L, alpha](double r, const Vector& u) {
        return Vector(std::pow(r / L, -1.0 / alpha) * u);
    };
    rep.sample_mark = [atoms, weights](Rng& rng) { return atoms[rng.discrete(weights)].xi; };
    // |H(s,u)| = (s/L)^{-1/alpha} <= 1 iff s >= L, independent of the mark.
    Vector mean_dir = Vector::Zero(d);
    for (const auto& at : atoms) mean_dir += (at.w / L) * at.xi;
    rep.center_integral_fn = [L, alpha, mean_dir](double lo, double hi) {
        double v = detail::stable_power_integral(std::max(lo, L), std::max(hi, L), L, alpha);
        return Vector(v * mean_dir);
    };
    Matrix lam2 = Matrix::Zero(d, d);
    for (const auto& at : atoms) lam2 += at.w * at.xi * at.xi.transpose();
    rep.residual_cov_fn = [L, alpha, lam2](double m) {
        if (m <= 0.0)
            throw Error(ErrorCode::kUnsupported,
                        "stable residual covariance diverges at m = 0 (infinite variance)");
        const double c = 2.0 / alpha - 1.0;
        return Matrix(std::pow(m, -c) * std::pow(L, c) / c * lam2);
    };
    return rep;
}

namespace detail {

// s-integral of min((s/L)^{-1/alpha}, b) 1{min <= 1} over [lo,hi] for a fixed
// magnitude cap b = u1 u2^{1/alpha}/theta; elementary in every region.
inline double ts_center_s_integral(double b, double lo, double hi, double L, double alpha) {
    if (b > 1.0) return stable_power_integral(std::max(lo, L), std::max(hi, L), L, alpha);
    if (b <= 0.0) return 0.0;
    const double rb = L * std::pow(b, -alpha);  // where the stable cap crosses b
    double flat = b * std::max(0.0, std::min(hi, rb) - std::min(lo, rb));
    return flat + stable_power_integral(std::max(lo, rb), std::max(hi, rb), L, alpha);
}

}  // namespace detail

/// Tempered stable integrator with discrete spectral measure and exponential
/// tempering e^{-theta(xi) r}:
/// H(r,u) = min((r/|lambda|)^{-1/alpha}, u1 u2^{1/alpha}/|u3|) u3/|u3|,
/// with U = (u1, u2, u3) ~ Exp(1) x Uniform(0,1) x (theta_i xi_i picked w.p. w_i/|lambda|).
inline LevyRepresentation LevyRepresentation::tempered_stable(double alpha,
                                                              std::vector<TemperedAtom> atoms) {
    if (!(alpha > 0.0 && alpha < 2.0))
        throw Error(ErrorCode::kDomain, "tempered stable representation: alpha in (0,2) required");
    if (atoms.empty())
        throw Error(ErrorCode::kDomain, "tempered stable representation: at least one atom");
    const int d = static_cast<int>(atoms[0].xi.size());
    double L = 0.0;
    for (size_t i = 0; i < atoms.size(); ++i) {
        detail::check_atom_common(atoms[i].xi, atoms[i].w, d, i);
        if (!(atoms[i].theta > 0.0))
            throw Error(ErrorCode::kDomain, "atom " + std::to_string(i) + ": theta must be > 0");
        L += atoms[i].w;
    }
    LevyRepresentation rep;
    rep.dim = d;
    rep.id = "tempered_stable(alpha=" + detail::fmt_num(alpha) +
             ",atoms=" + std::to_string(atoms.size()) + ")";
    rep.is_symmetric = detail::atoms_symmetric<TemperedAtom>(
        atoms, [](const TemperedAtom& x, const TemperedAtom& y) {
            return (x.xi + y.xi).norm() < 1e-12 && std::abs(x.w - y.w) < 1e-12 &&
                   std::abs(x.theta - y.theta) < 1e-12;
        });
    rep.center_in_simulation = !rep.is_symmetric;
    std::vector<double> weights;
    for (const auto& at : atoms) weights.push_back(at.w);
    rep.jump_fn = [L, alpha](double r, const Vector& u) {
        const int d2 = static_cast<int>(u.size()) - 2;
        Vector dir = u.tail(d2);
        const double nrm = dir.norm();
        const double mag = std::min(std::pow(r / L, -1.0 / alpha), u[0] * std::pow(u[1], 1.0 / alpha) / nrm);
        return Vector(mag / nrm * dir);
    };
    rep.sample_mark = [atoms, weights, d](Rng& rng) {
        Vector u(d + 2);
        u[0] = rng.exponential();
        u[1] = rng.uniform();
        const auto& at = atoms[rng.discrete(weights)];
        u.tail(d) = at.theta * at.xi;
        return u;
    };
    rep.center_integral_fn = [atoms, L, alpha, d](double lo, double hi) {
        Vector c = Vector::Zero(d);
        QuadratureOptions vq{1e-10, 1e-14, 2000};
        QuadratureOptions uq{1e-11, 1e-15, 2000};
        for (const auto& at : atoms) {
            const double th = at.theta;
            auto over_v = [&](double v) {
                const double kap = std::pow(v, 1.0 / alpha) / th;
                auto over_u = [&](double u1) {
                    return detail::ts_center_s_integral(kap * u1, lo, hi, L, alpha) * std::exp(-u1);
                };
                // kinks of the s-integral as a function of u1: b = 1 and b = (hi/L)^{-1/a}, (lo/L)^{-1/a}
                std::vector<double> brk{1.0 / kap};
                if (hi > 0.0) brk.push_back(std::pow(hi / L, -1.0 / alpha) / kap);
                if (lo > 0.0) brk.push_back(std::pow(lo / L, -1.0 / alpha) / kap);
                return integrate(over_u, 0.0, kInf, uq, brk).value;
            };
            c += (at.w / L) * integrate(over_v, 0.0, 1.0, vq).value * at.xi;
        }
        return c;
    };
    rep.residual_cov_fn = [atoms, L, alpha, d](double m) {
        if (m <= 0.0)
            throw Error(ErrorCode::kUnsupported,
                        "tempered stable residual covariance at m = 0 is not available in closed form");
        Matrix s = Matrix::Zero(d, d);
        const double c1 = std::pow(L, 2.0 / alpha) * std::pow(m, 1.0 - 2.0 / alpha) / (2.0 / alpha - 1.0);
        const double B = std::pow(m / L, -1.0 / alpha);
        QuadratureOptions vq{1e-10, 1e-16, 2000};
        for (const auto& at : atoms) {
            const double th = at.theta;
            // E over u1 of int_m^inf min((r/L)^{-1/a}, kap u1)^2 dr in closed form,
            // then one adaptive pass over the uniform mark v.
            auto over_v = [&](double v) {
                const double kap = std::pow(v, 1.0 / alpha) / th;
                const double ustar = B / kap;
                double g = c1 * std::exp(-ustar);
                g += 2.0 * L * std::pow(kap, 2.0 - alpha) / (2.0 - alpha) *
                     lower_incomplete_gamma(3.0 - alpha, ustar);
                g -= m * kap * kap *
                     (2.0 - std::exp(-ustar) * (ustar * ustar + 2.0 * ustar + 2.0));
                return g;
            };
            s += (at.w / L) * integrate(over_v, 0.0, 1.0, vq).value * at.xi * at.xi.transpose();
        }
        return s;
    };
    return rep;
}

/// Finite-activity exponential compound Poisson subordinator, nu(dz) = e^{-z} dz
/// on (0, inf): H(r) = -ln r on (0,1], zero past the total mass. Simulated
/// exactly, with no center correction (the series is an a.s. finite sum).
inline LevyRepresentation LevyRepresentation::exponential_cp() {
    LevyRepresentation rep;
    rep.dim = 1;
    rep.id = "exp_cp";
    rep.is_symmetric = false;
    rep.center_in_simulation = false;
    rep.finite_total_mass = 1.0;
    rep.jump_fn = [](double r, const Vector&) {
        Vector h(1);
        h[0] = r <= 1.0 ? -std::log(r) : 0.0;
        return h;
    };
    rep.sample_mark = [](Rng&) { return Vector(0); };
    // This representation is defined with c_k == 0.
    rep.center_integral_fn = [](double, double) { return Vector::Zero(1); };
    rep.residual_cov_fn = [](double m) {
        Matrix s(1, 1);
        if (m >= 1.0) {
            s(0, 0) = 0.0;
        } else if (m <= 0.0) {
            s(0, 0) = 2.0;
        } else {
            const double lm = std::log(m);
            s(0, 0) = 2.0 - m * (lm * lm - 2.0 * lm + 2.0);
        }
        return s;
    };
    return rep;
}

// Unbiased stratified Monte Carlo estimate of int_m^{r_max} E[H H^T] dr with
// elementwise standard errors; pairs of draws per stratum. tail_warning is set
// when a sampled estimate of the mass beyond r_max is non-negligible.
struct ResidualCovEstimate {
    Matrix value;
    Matrix se;
    bool tail_warning = false;
};

inline ResidualCovEstimate residual_covariance_numeric(const LevyRepresentation& rep, double m,
                                                       int n_samples, double r_max, Rng& rng) {
    if (!(m >= 0.0) || !(r_max >= m))
        throw Error(ErrorCode::kDomain, "residual_covariance_numeric: need 0 <= m <= r_max");
    if (n_samples < 1000)
        throw Error(ErrorCode::kDomain, "residual_covariance_numeric: n_samples >= 1000");
    const int d = rep.dim;
    if (r_max == m) {
        ResidualCovEstimate zero;
        zero.value = Matrix::Zero(d, d);
        zero.se = Matrix::Zero(d, d);
        return zero;
    }
    const int n_strata = n_samples / 2;
    // geometric strata track power-law decay over wide index ranges
    const bool geometric = m > 0.0 && r_max / m > 50.0;
    const double ratio = geometric ? std::pow(r_max / m, 1.0 / n_strata) : 0.0;
    Matrix sum = Matrix::Zero(d, d), var = Matrix::Zero(d, d);
    double lo = m;
    for (int i = 0; i < n_strata; ++i) {
        const double hi = geometric ? (i + 1 == n_strata ? r_max : lo * ratio)
                                    : m + (i + 1) * (r_max - m) / n_strata;
        const double w = hi - lo;
        Matrix x[2];
        for (int j = 0; j < 2; ++j) {
            const double r = lo + rng.uniform() * w;
            Vector h = rep.jump_fn(r, rep.sample_mark(rng));
            x[j] = h * h.transpose();
        }
        sum += (0.5 * w) * (x[0] + x[1]);
        var += (0.25 * w * w) * (x[0] - x[1]).cwiseProduct(x[0] - x[1]);
        lo = hi;
    }
    ResidualCovEstimate out;
    out.value = sum;
    out.se = var.cwiseSqrt();
    // crude tail probe over (r_max, 10 r_max]
    Matrix tail = Matrix::Zero(d, d);
    const int probes = 256;
    for (int i = 0; i < probes; ++i) {
        const double r = r_max * (1.0 + 9.0 * rng.uniform());
        Vector h = rep.jump_fn(r, rep.sample_mark(rng));
        tail += (9.0 * r_max / probes) * h * h.transpose();
    }
    const double scale = out.value.trace();
    if (scale > 0.0 && tail.trace() > 1e-3 * scale) out.tail_warning = true;
    return out;
}

}  // namespace idpath
