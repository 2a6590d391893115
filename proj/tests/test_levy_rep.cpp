#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "idpath/levy_rep.hpp"
#include "idpath/stats.hpp"

using namespace idpath;
using Catch::Approx;

namespace {

Vector v1(double x) {
    Vector v(1);
    v[0] = x;
    return v;
}

LevyRepresentation one_sided_stable(double alpha, double weight = 1.0) {
    return LevyRepresentation::stable(alpha, {{v1(1.0), weight}});
}

LevyRepresentation symmetric_stable(double alpha, double weight = 1.0) {
    return LevyRepresentation::stable(alpha, {{v1(1.0), weight}, {v1(-1.0), weight}});
}

double min_eigenvalue(const Matrix& s) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(s);
    return es.eigenvalues().minCoeff();
}

}  // namespace

TEST_CASE("gamma jump closed form") {
    auto rep = LevyRepresentation::gamma(1.0, 2.0);
    CHECK(rep.jump(1e-12, v1(1.0))[0] == Approx(0.5).epsilon(1e-9));
    auto rep2 = LevyRepresentation::gamma(1.0, 1.0);
    CHECK(rep2.jump(1.0, v1(2.0))[0] == Approx(2.0 * std::exp(-1.0)).epsilon(1e-14));
    CHECK_THROWS_AS(rep.jump(0.0, v1(1.0)), Error);
    CHECK_THROWS_AS(rep.jump(-1.0, v1(1.0)), Error);
}

TEST_CASE("stable jump closed form") {
    auto rep = one_sided_stable(1.0);
    CHECK(rep.jump(4.0, v1(1.0))[0] == Approx(0.25).epsilon(1e-14));
    // alpha = 1/2, unit mass: |H(s)| = s^{-2}
    auto rep2 = one_sided_stable(0.5);
    CHECK(rep2.jump(3.0, v1(1.0))[0] == Approx(1.0 / 9.0).epsilon(1e-14));
}

TEST_CASE("exponential cp jump hits zero at the total mass") {
    auto rep = LevyRepresentation::exponential_cp();
    CHECK(rep.jump(1.0, Vector(0))[0] == 0.0);
    CHECK(rep.jump(0.5, Vector(0))[0] == Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(rep.jump(2.0, Vector(0))[0] == 0.0);
    REQUIRE(rep.finite_total_mass.has_value());
    CHECK(*rep.finite_total_mass == 1.0);
}

TEST_CASE("tempered stable jump bounded by the stable envelope") {
    auto rep = LevyRepresentation::tempered_stable(1.2, {{v1(1.0), 1.5, 0.7}});
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        const double r = std::exp(rng.uniform(-3.0, 5.0));
        Vector u = rep.sample_mark(rng);
        const double h = std::abs(rep.jump(r, u)[0]);
        CHECK(h <= std::pow(r / 1.5, -1.0 / 1.2) * (1.0 + 1e-12));
        CHECK(h <= u[0] * std::pow(u[1], 1.0 / 1.2) / 0.7 * (1.0 + 1e-12));
    }
}

TEST_CASE("jump magnitudes are nonincreasing in the index") {
    std::vector<LevyRepresentation> reps;
    reps.push_back(LevyRepresentation::gamma(2.0, 0.5));
    reps.push_back(symmetric_stable(1.5));
    reps.push_back(LevyRepresentation::tempered_stable(0.8, {{v1(1.0), 2.0, 1.1}}));
    reps.push_back(LevyRepresentation::exponential_cp());
    Rng rng(99);
    for (const auto& rep : reps) {
        for (int trial = 0; trial < 100; ++trial) {
            Vector u = rep.sample_mark(rng);
            double prev = kInf;
            for (double r = 1e-3; r < 1e4; r *= 1.7) {
                const double h = rep.jump(r, u).norm();
                CHECK(h <= prev * (1.0 + 1e-12));
                prev = h;
            }
        }
    }
}

TEST_CASE("magnitudes vanish at large index for infinite-mass representations") {
    Rng rng(5);
    auto gam = LevyRepresentation::gamma(3.0, 1.0);
    CHECK(gam.jump(1e4, gam.sample_mark(rng)).norm() < 1e-100);
    auto st = symmetric_stable(1.5);
    CHECK(st.jump(1e9, st.sample_mark(rng)).norm() < 1e-5);
    CHECK_FALSE(st.finite_total_mass.has_value());
}

TEST_CASE("gamma marks are standard exponential") {
    auto rep = LevyRepresentation::gamma(1.0, 1.0);
    Rng rng(2024);
    std::vector<double> draws;
    for (int i = 0; i < 100000; ++i) draws.push_back(rep.sample_mark(rng)[0]);
    auto ks = ks_test_1sample(draws, [](double x) { return x < 0 ? 0.0 : -std::expm1(-x); });
    CHECK(ks.p_value > 0.01);
}

TEST_CASE("stable marks follow the normalized spectral measure") {
    auto rep = symmetric_stable(1.0);
    Rng rng(7);
    int plus = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i)
        if (rep.sample_mark(rng)[0] > 0) ++plus;
    CHECK(std::abs(plus / double(n) - 0.5) < 3.0 * std::sqrt(0.25 / n));

    // weighted atoms
    auto rep2 = LevyRepresentation::stable(1.2, {{v1(1.0), 3.0}, {v1(-1.0), 1.0}});
    plus = 0;
    for (int i = 0; i < n; ++i)
        if (rep2.sample_mark(rng)[0] > 0) ++plus;
    CHECK(std::abs(plus / double(n) - 0.75) < 3.0 * std::sqrt(0.1875 / n));
}

TEST_CASE("tempered stable mark components have the right laws") {
    auto rep = LevyRepresentation::tempered_stable(1.5, {{v1(1.0), 1.0, 2.0}});
    Rng rng(31);
    std::vector<double> u1s, u2s;
    for (int i = 0; i < 100000; ++i) {
        Vector u = rep.sample_mark(rng);
        u1s.push_back(u[0]);
        u2s.push_back(u[1]);
        CHECK(u[2] == 2.0);  // theta * xi
    }
    CHECK(ks_test_1sample(u1s, [](double x) { return x < 0 ? 0.0 : -std::expm1(-x); }).p_value > 0.01);
    CHECK(ks_test_1sample(u2s, [](double x) { return std::clamp(x, 0.0, 1.0); }).p_value > 0.01);
}

TEST_CASE("mark sampling is reproducible from the stream seed") {
    auto rep = LevyRepresentation::tempered_stable(1.1, {{v1(1.0), 1.0, 1.0}, {v1(-1.0), 2.0, 3.0}});
    Rng a(Rng::stream(9, 4)), b(Rng::stream(9, 4));
    for (int i = 0; i < 100; ++i) CHECK(rep.sample_mark(a) == rep.sample_mark(b));
}

TEST_CASE("one-sided stable centers, closed form and quadrature oracle") {
    auto rep = one_sided_stable(0.5);  // |H(s)| = s^{-2}, <= 1 iff s >= 1
    CHECK(rep.center(1)[0] == Approx(0.0).margin(1e-14));
    CHECK(rep.center(2)[0] == Approx(0.5).epsilon(1e-12));
    auto oracle = integrate([](double s) { return std::pow(s, -2.0); }, 1.0, 2.0);
    CHECK(rep.center(2)[0] == Approx(oracle.value).epsilon(1e-8));
    // alpha = 1 branch: int_1^2 s^{-1} ds = ln 2
    auto rep1 = one_sided_stable(1.0);
    CHECK(rep1.center(2)[0] == Approx(std::log(2.0)).epsilon(1e-12));
    // near-1 alpha stays finite and close to the log value
    auto rep1e = one_sided_stable(1.0 + 1e-10);
    CHECK(rep1e.center(2)[0] == Approx(std::log(2.0)).epsilon(1e-6));
}

TEST_CASE("symmetric representations have vanishing centers") {
    auto rep = symmetric_stable(1.3);
    CHECK(rep.is_symmetric);
    for (int k = 1; k <= 5; ++k) CHECK(rep.center(k).norm() == 0.0);
    auto ts = LevyRepresentation::tempered_stable(
        0.9, {{v1(1.0), 1.0, 2.0}, {v1(-1.0), 1.0, 2.0}});
    CHECK(ts.is_symmetric);
    CHECK(ts.center(3).norm() == 0.0);
}

TEST_CASE("gamma center matches its defining integral") {
    struct Case {
        double a, beta;
    };
    for (auto [a, beta] : {Case{1.0, 1.0}, Case{2.0, 0.5}, Case{0.7, 3.0}}) {
        auto rep = LevyRepresentation::gamma(a, beta);
        auto integrand = [a, beta](double s) {
            const double c = beta * std::exp(s / a);
            return std::exp(-s / a) / beta * (1.0 - (1.0 + c) * std::exp(-c));
        };
        for (auto iv : {Interval{0.0, 1.0}, Interval{1.0, 2.0}, Interval{3.5, 7.0}}) {
            auto oracle = integrate(integrand, iv.lo, iv.hi, {1e-12, 1e-15, 4000});
            CHECK(rep.center_integral(iv.lo, iv.hi)[0] == Approx(oracle.value).epsilon(1e-9));
        }
        // summing every center recovers the total small-jump mean a(1-e^{-beta})/beta
        CHECK(rep.center_integral(0.0, 5000.0)[0] ==
              Approx(a * -std::expm1(-beta) / beta).epsilon(1e-12));
    }
}

TEST_CASE("gamma first center matches a Monte Carlo oracle") {
    auto rep = LevyRepresentation::gamma(1.0, 1.0);
    Rng rng(314159);
    const int n = 1000000;
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double s = rng.uniform();
        const double u = rng.exponential();
        const double x = (u <= std::exp(s)) ? std::exp(-s) * u : 0.0;
        s1 += x;
        s2 += x * x;
    }
    const double mean = s1 / n;
    const double se = std::sqrt((s2 / n - mean * mean) / n);
    CHECK(std::abs(rep.center(1)[0] - mean) < 3.0 * se);
}

TEST_CASE("tempered stable center matches an independent quadrature oracle") {
    const double alpha = 1.2, w = 1.3, theta = 0.8, L = w;
    auto rep = LevyRepresentation::tempered_stable(alpha, {{v1(1.0), w, theta}});
    // oracle with the opposite nesting: s outer, uniform mark inner, u1 in closed form
    auto inner = [&](double s) {
        const double mc = std::pow(s / L, -1.0 / alpha);
        auto over_v = [&](double v) {
            const double kap = std::pow(v, 1.0 / alpha) / theta;
            if (mc <= 1.0) return kap * -std::expm1(-mc / kap);
            return kap * -std::expm1(-1.0 / kap) - std::exp(-1.0 / kap);
        };
        return integrate(over_v, 0.0, 1.0, {1e-10, 1e-14, 4000}).value;
    };
    for (auto iv : {Interval{0.0, 2.0}, Interval{2.0, 5.0}}) {
        auto oracle = integrate([&](double s) { return (w / L) * inner(s); }, iv.lo, iv.hi,
                                {1e-8, 1e-12, 4000}, {L});
        CHECK(rep.center_integral(iv.lo, iv.hi)[0] == Approx(oracle.value).epsilon(2e-4));
    }
}

TEST_CASE("residual covariance closed forms match the frozen values") {
    auto gam = LevyRepresentation::gamma(2.0, 1.0);
    CHECK(gam.residual_covariance(2.0)(0, 0) == Approx(2.0 * std::exp(-2.0)).epsilon(1e-13));

    auto st = symmetric_stable(1.0);  // |lambda| = 2, Lambda = 2
    CHECK(st.residual_covariance(10.0)(0, 0) == Approx(0.4).epsilon(1e-13));

    auto cp = LevyRepresentation::exponential_cp();
    CHECK(cp.residual_covariance(1.0)(0, 0) == 0.0);
    CHECK(cp.residual_covariance(5.0)(0, 0) == 0.0);
    CHECK(cp.residual_covariance(0.0)(0, 0) == Approx(2.0).epsilon(1e-14));
    const double m = 0.25, lm = std::log(0.25);
    CHECK(cp.residual_covariance(m)(0, 0) ==
          Approx(2.0 - m * (lm * lm - 2.0 * lm + 2.0)).epsilon(1e-13));
}

TEST_CASE("residual covariance norm decays to zero") {
    auto gam = LevyRepresentation::gamma(1.0, 1.0);
    auto st = symmetric_stable(1.5);
    double prev_g = kInf, prev_s = kInf;
    for (double m : {1.0, 4.0, 16.0, 64.0}) {
        const double g = gam.residual_covariance(m).norm();
        const double s = st.residual_covariance(m).norm();
        CHECK(g < prev_g);
        CHECK(s < prev_s);
        prev_g = g;
        prev_s = s;
    }
    CHECK(gam.residual_covariance(100.0).norm() < 1e-80);
    CHECK(st.residual_covariance(1e6).norm() < 1e-1);
    CHECK_THROWS_AS(st.residual_covariance(0.0), Error);
}

TEST_CASE("residual covariance differences are PSD for nested truncations") {
    std::vector<LevyRepresentation> reps;
    reps.push_back(LevyRepresentation::gamma(1.5, 2.0));
    Vector e1 = Vector::Zero(2), e2 = Vector::Zero(2);
    e1[0] = 1.0;
    e2[1] = 1.0;
    reps.push_back(LevyRepresentation::stable(1.4, {{e1, 1.0}, {e2, 0.5}, {-e1, 0.25}}));
    reps.push_back(LevyRepresentation::tempered_stable(1.1, {{v1(1.0), 1.0, 0.5}, {v1(-1.0), 2.0, 1.5}}));
    reps.push_back(LevyRepresentation::exponential_cp());
    Rng rng(404);
    for (const auto& rep : reps) {
        for (int trial = 0; trial < 20; ++trial) {
            const double m = 0.05 + 4.0 * rng.uniform();
            const double M = m + 4.0 * rng.uniform();
            Matrix diff = rep.residual_covariance(m) - rep.residual_covariance(M);
            CHECK(min_eigenvalue(diff) > -1e-10 * (1.0 + diff.norm()));
        }
    }
}

TEST_CASE("numeric residual covariance agrees with the closed forms") {
    Rng rng(777);
    auto gam = LevyRepresentation::gamma(2.0, 1.0);
    auto eg = residual_covariance_numeric(gam, 2.0, 80000, 40.0, rng);
    REQUIRE(eg.se(0, 0) > 0.0);
    CHECK(std::abs(eg.value(0, 0) - 2.0 * std::exp(-2.0)) < 3.0 * eg.se(0, 0));
    CHECK_FALSE(eg.tail_warning);

    auto st = symmetric_stable(1.0);
    auto es = residual_covariance_numeric(st, 10.0, 80000, 4.0e5, rng);
    CHECK(std::abs(es.value(0, 0) - 0.4) < 3.0 * es.se(0, 0) + 2e-5);

    // tempered stable tail decays like r^{1-2/alpha}; push the horizon out and
    // allow the analytic tail bound on top of the Monte Carlo band
    auto ts = LevyRepresentation::tempered_stable(1.2, {{v1(1.0), 1.3, 0.8}});
    const double closed = ts.residual_covariance(0.5)(0, 0);
    const double rmax = 2.0e5;
    const double tail_bound = std::pow(1.3, 2.0 / 1.2) * std::pow(rmax, 1.0 - 2.0 / 1.2) /
                              (2.0 / 1.2 - 1.0);
    auto et = residual_covariance_numeric(ts, 0.5, 200000, rmax, rng);
    CHECK(std::abs(et.value(0, 0) - closed) < 3.0 * et.se(0, 0) + tail_bound);

    auto ez = residual_covariance_numeric(gam, 2.0, 2000, 2.0, rng);
    CHECK(ez.value.norm() == 0.0);
    CHECK_FALSE(ez.tail_warning);
}

TEST_CASE("numeric residual covariance warns when the horizon is too short") {
    Rng rng(888);
    auto gam = LevyRepresentation::gamma(1.0, 1.0);
    auto e = residual_covariance_numeric(gam, 0.0, 20000, 2.0, rng);
    CHECK(e.tail_warning);
}

TEST_CASE("stable truncated measure mass above a level matches min(m, |lambda| eps^{-alpha})") {
    const double alpha = 1.5, L = 2.0, m = 5.0, eps = 1.0;
    auto rep = LevyRepresentation::stable(alpha, {{v1(1.0), L / 2}, {v1(-1.0), L / 2}});
    Rng rng(12);
    const int strata = 20000;
    double acc = 0.0;
    for (int i = 0; i < strata; ++i) {
        const double r = (i + rng.uniform()) * (m / strata);
        if (rep.jump(r, rep.sample_mark(rng)).norm() > eps) acc += m / strata;
    }
    CHECK(acc == Approx(std::min(m, L * std::pow(eps, -alpha))).epsilon(1e-3));
}

TEST_CASE("construction rejects invalid parameters") {
    CHECK_THROWS_AS(LevyRepresentation::gamma(0.0, 1.0), Error);
    CHECK_THROWS_AS(LevyRepresentation::gamma(1.0, -2.0), Error);
    CHECK_THROWS_AS(LevyRepresentation::stable(2.0, {{v1(1.0), 1.0}}), Error);
    CHECK_THROWS_AS(LevyRepresentation::stable(0.0, {{v1(1.0), 1.0}}), Error);
    CHECK_THROWS_AS(LevyRepresentation::stable(1.0, {}), Error);
    CHECK_THROWS_AS(LevyRepresentation::stable(1.0, {{v1(2.0), 1.0}}), Error);
    CHECK_THROWS_AS(LevyRepresentation::stable(1.0, {{v1(1.0), 0.0}}), Error);
    CHECK_THROWS_AS(LevyRepresentation::tempered_stable(1.0, {{v1(1.0), 1.0, 0.0}}), Error);
    Vector e1 = Vector::Zero(2);
    e1[0] = 1.0;
    CHECK_THROWS_AS(LevyRepresentation::stable(1.0, {{e1, 1.0}, {v1(1.0), 1.0}}), Error);
}

TEST_CASE("spectral second moment reflects the atom geometry") {
    Vector e1 = Vector::Zero(2), e2 = Vector::Zero(2);
    e1[0] = 1.0;
    e2[1] = 1.0;
    auto full = LevyRepresentation::stable(1.2, {{e1, 1.0}, {e2, 1.0}});
    CHECK(min_eigenvalue(full.residual_covariance(3.0)) > 0.0);
    auto flat = LevyRepresentation::stable(1.2, {{e1, 1.0}, {-e1, 1.0}});
    auto s = flat.residual_covariance(3.0);
    CHECK(min_eigenvalue(s) == Approx(0.0).margin(1e-14));
    CHECK(s(0, 0) > 0.0);
}
