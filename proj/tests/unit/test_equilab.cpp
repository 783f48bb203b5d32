#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <numbers>

#include "modsurf/equilab.hpp"
#include "modsurf/errors.hpp"
#include "modsurf/kernels.hpp"
#include "modsurf/specfun.hpp"

using namespace modsurf;

namespace {

ExperimentConfig small_cfg(std::size_t n, std::uint64_t seed = 7) {
    ExperimentConfig cfg;
    cfg.samples = n;
    cfg.seed = seed;
    return cfg;
}

double ball_vol(double R) { return 4.0 * std::numbers::pi * std::pow(std::sinh(R / 2.0), 2); }

}  // namespace

TEST_CASE("constant function has zero variance") {
    double c = 1.0 / std::sqrt(kVolModular);
    Evaluable g = [c](const Point&) { return cplx(c, 0.0); };
    auto rep = var_estimator(g, 0.3, small_cfg(200));
    CHECK(std::abs(rep.estimate) < 1e-20);
    CHECK(rep.n == 200);
    CHECK(ball_average_density(g, BallSpec(Point(0.1, 2.0), 0.5), 1e-10) == doctest::Approx(1.0 / kVolModular).epsilon(1e-9));
}

TEST_CASE("config validation") {
    Evaluable g = [](const Point&) { return cplx(1.0, 0.0); };
    CHECK_THROWS_AS(var_estimator(g, 0.3, small_cfg(10)), DomainError);
    CHECK_THROWS_AS(var_estimator(g, -1.0, small_cfg(200)), DomainError);
    CHECK_THROWS_AS(var_estimator_eisenstein(5.0, 0.3, small_cfg(200), Centering::InverseVolume), DomainError);
    CHECK_THROWS_AS(schedule_radius(0.0, 0.5), DomainError);
    CHECK(schedule_radius(16.0, 0.5) == doctest::Approx(0.25));
}

TEST_CASE("fixed ball rule agrees with adaptive quadrature") {
    EisensteinField f(cplx(0.5, 12.0));
    for (double R : {0.1, 0.5, 1.0}) {
        BallSpec ball(Point(0.2, 1.3), R);
        double adaptive = ball_average_density([&](const Point& z) { return f(z); }, ball, 1e-10);
        auto pts = ball_fixed_rule(ball, 12 + static_cast<int>(std::ceil(2 * R * 13)),
                                   2 * (12 + static_cast<int>(std::ceil(2 * std::numbers::pi * std::sinh(R) * 13))));
        double num = 0, den = 0;
        for (auto& p : pts) {
            num += p.w * std::norm(f(p.p));
            den += p.w;
        }
        CHECK(num / den == doctest::Approx(adaptive).epsilon(1e-8));
    }
}

TEST_CASE("nested balls") {
    EisensteinField f(cplx(0.5, 6.0));
    Point w(-0.3, 1.1);
    auto dens = [&](const Point& z) { return std::norm(f(z)); };
    double big = ball_quadrature(dens, BallSpec(w, 0.8), 1e-11);
    double small = ball_quadrature(dens, BallSpec(w, 0.4), 1e-11);
    CHECK(big > small);
    double s2 = 0;
    for (auto& p : ball_fixed_rule(BallSpec(w, 0.4), 30, 90)) s2 += p.w * dens(p.p);
    CHECK(s2 == doctest::Approx(small).epsilon(1e-8));
}

TEST_CASE("reproducible and thread independent") {
    EisensteinField f(cplx(0.5, 9.5));
    Evaluable g = [&](const Point& z) { return f(z); };
    auto cfg = small_cfg(300, 11);
    setenv("MODSURF_THREADS", "1", 1);
    auto a = var_estimator(g, 0.3, cfg);
    setenv("MODSURF_THREADS", "5", 1);
    auto b = var_estimator(g, 0.3, cfg);
    unsetenv("MODSURF_THREADS");
    auto c = var_estimator(g, 0.3, cfg);
    CHECK(a.estimate == b.estimate);
    CHECK(a.estimate == c.estimate);
    CHECK(a.std_error == c.std_error);
    REQUIRE(a.exceedance.size() == c.exceedance.size());
    for (std::size_t i = 0; i < a.exceedance.size(); ++i) CHECK(a.exceedance[i].measure == c.exceedance[i].measure);
}

TEST_CASE("standard error scales like n^-1/2") {
    auto a = var_estimator_eisenstein(6.0, 0.4, small_cfg(400, 3));
    auto b = var_estimator_eisenstein(6.0, 0.4, small_cfg(1600, 3));
    double ratio = a.std_error / b.std_error;
    CHECK(ratio > 1.5);
    CHECK(ratio < 2.7);
}

TEST_CASE("exceedance is monotone and obeys Chebyshev") {
    auto cfg = small_cfg(500, 5);
    auto rep = var_estimator_eisenstein(8.0, 0.3, cfg);
    REQUIRE(rep.exceedance.size() >= 2);
    for (std::size_t i = 0; i < rep.exceedance.size(); ++i) {
        const auto& e = rep.exceedance[i];
        CHECK(e.measure <= rep.estimate / (e.c * e.c) * (1 + 1e-12));
        if (i) CHECK(e.measure <= rep.exceedance[i - 1].measure);
    }
}

TEST_CASE("std_error target doubles the sample count") {
    auto cfg = small_cfg(200, 9);
    auto base = var_estimator_eisenstein(6.0, 0.4, cfg);
    cfg.std_error_target = base.std_error / 1.9;
    cfg.max_samples = 4000;
    auto rep = var_estimator_eisenstein(6.0, 0.4, cfg);
    CHECK(rep.n >= 800);
    CHECK_FALSE(rep.partial);
    cfg.std_error_target = 1e-30;
    cfg.max_samples = 400;
    auto capped = var_estimator_eisenstein(6.0, 0.4, cfg);
    CHECK(capped.partial);
    CHECK(capped.n == 400);
}

TEST_CASE("Planck inequality at sample points") {
    for (double t : {3.0, 10.0, 25.0})
        for (double R : {0.2, 0.6}) {
            auto pc = planck_check(t, R, Point(0.17, 1.4), 1e-9);
            CHECK_FALSE(pc.violated);
            CHECK(pc.lhs <= pc.rhs + 1e-8);
        }
}

TEST_CASE("Eisenstein Monte Carlo matches the grid integral") {
    double t = 20.0, R = 0.3;
    auto mc = var_estimator_eisenstein(t, R, small_cfg(2000, 1));
    auto grid = var_grid_eisenstein(t, R, 40, 40, small_cfg(2000));
    double tol = 3.0 * std::hypot(mc.std_error, grid.error);
    CHECK(std::abs(mc.estimate - grid.value) <= tol);
    CHECK(mc.estimate > 0.0);
}

TEST_CASE("Heegner ball counts") {
    CHECK(heegner_ball_count(-4, {}, BallSpec(Point(0.0, 1.0), 0.1)) == 1);
    CHECK(heegner_ball_count(-4, {}, BallSpec(Point(0.0, 3.0), 0.1)) == 0);
    // every Heegner point of these D lies within distance 2 of i
    for (std::int64_t D : {-23, -84, -163})
        CHECK(heegner_ball_count(D, {}, BallSpec(Point(0.0, 1.0), 2.0)) ==
              class_group(D).h);
    CHECK_THROWS_AS(heegner_ball_count(5, {}, BallSpec(Point(0.0, 1.0), 0.1)), DomainError);
    CHECK_THROWS_AS(heegner_ball_count(-4, {}, BallSpec(Point(0.0, 1.0), 3.0)), DomainError);
}

TEST_CASE("geodesic ball lengths") {
    auto far = geodesic_ball_length(5, {}, BallSpec(Point(0.0, 40.0), 0.2), 0.01);
    CHECK(far.length == 0.0);
    double prev = 0.0;
    for (double R : {0.2, 0.4, 0.8}) {
        auto g = geodesic_ball_length(5, {}, BallSpec(Point(0.1, 1.0), R), R / 20);
        CHECK(g.length >= prev);
        prev = g.length;
    }
    auto unit = pell_unit(5);
    auto cover = geodesic_ball_length(5, {}, BallSpec(Point(0.0, 1.2), 2.0), 0.01);
    CHECK(cover.length == doctest::Approx(2.0 * unit.log_value).epsilon(0.02));
    CHECK_THROWS_AS(geodesic_ball_length(5, {}, BallSpec(Point(0.0, 1.0), 0.2), 0.05), DomainError);
}

TEST_CASE("Weyl sums of Eisenstein series match the L-function oracle") {
    for (std::int64_t D : {-4, -23, -84, 5, 12}) {
        auto rep = weyl_sum_eisenstein(D, std::nullopt, cplx(2.0, 0.0), 0.005);
        REQUIRE_FALSE(rep.entries.empty());
        for (const auto& e : rep.entries) {
            REQUIRE(e.oracle.has_value());
            if (std::abs(*e.oracle) == 0.0)
                CHECK(std::abs(e.direct) < 1e-8);
            else
                CHECK(e.rel_diff < (D == -4 ? 1e-8 : 1e-6));
        }
    }
    // D = -4: 2 zeta(s) L(s, chi_-4) / zeta(2s)
    auto r4 = weyl_sum_eisenstein(-4, std::nullopt, cplx(2.0, 0.0));
    cplx expect = 2.0 * zeta(cplx(2.0, 0)) * dirichlet_L(cplx(2.0, 0), -4) / zeta(cplx(4.0, 0));
    CHECK(std::abs(r4.entries[0].direct - expect) < 1e-10 * std::abs(expect));
}

TEST_CASE("Weyl sum structure across discriminants") {
    for (std::int64_t D : {-84, -420, 60, 105}) {
        auto rep = weyl_sum_eisenstein(D, std::nullopt, cplx(3.0, 0.0), 0.01);
        cplx total = 0.0;
        for (auto a : rep.genus_aggregates) total += a;
        CHECK(rep.entries[0].chi.trivial());
        CHECK(rep.entries[0].direct == total);
        for (const auto& e : rep.entries) CHECK(e.rel_diff < 1e-5);
    }
    // characters with negative d1 vanish on geodesics
    auto rep = weyl_sum_eisenstein(12, GenusChar{-3, -4}, cplx(2.0, 0.0), 0.005);
    CHECK(std::abs(rep.entries[0].direct) < 1e-8);
    auto low = weyl_sum_eisenstein(-23, std::nullopt, cplx(0.5, 3.0));
    CHECK_FALSE(low.entries[0].oracle.has_value());
}

TEST_CASE("Maass Weyl sums on synthetic data") {
    MaassFormData data;
    data.t_f = 9.5;
    for (int n = 1; n <= 60; ++n) data.coeffs.push_back(n == 1 ? 1.0 : std::cos(1.7 * n) / std::sqrt(n));
    data.source = "synthetic";
    data.parity = Parity::Odd;
    CHECK(std::abs(weyl_sum_maass(data, -4, std::nullopt).entries[0].direct) < 1e-14);
    data.parity = Parity::Even;
    auto rep = weyl_sum_maass(data, -4, std::nullopt);
    CHECK(rep.entries[0].direct.real() == doctest::Approx(maass_eval(data, Point(0.0, 1.0))));
}

TEST_CASE("genus variance for D = -4 has a closed form") {
    for (double R : {0.3, 0.45}) {
        // i has a stabilizer of order 2, so it is hit twice on a region of area vol(B)/2
        double exact = 2.0 / ball_vol(R) - 1.0 / kVolModular;
        auto mc = genus_variance_estimator(-4, GenusKind::Heegner, R, small_cfg(6000, 2));
        CHECK(std::abs(mc.estimate - exact) <= 3.0 * mc.std_error);
        auto grid = genus_variance_grid(-4, GenusKind::Heegner, R, 80, 80, small_cfg(1000));
        CHECK(grid.value == doctest::Approx(exact).epsilon(0.15));
    }
    CHECK_THROWS_AS(genus_variance_estimator(5, GenusKind::Heegner, 0.3, small_cfg(200)), DomainError);
}

TEST_CASE("geodesic genus variance is positive and reproducible") {
    auto cfg = small_cfg(300, 4);
    auto a = genus_variance_estimator(12, GenusKind::Geodesic, 0.5, cfg);
    setenv("MODSURF_THREADS", "3", 1);
    auto b = genus_variance_estimator(12, GenusKind::Geodesic, 0.5, cfg);
    unsetenv("MODSURF_THREADS");
    CHECK(a.estimate > 0.0);
    CHECK(a.estimate == b.estimate);
}

TEST_CASE("genus selection") {
    auto table = class_group(-84);
    CHECK(select_classes(table, {}).size() == 4);
    GenusSelection p{GenusSelection::Kind::Principal, 0};
    CHECK(select_classes(table, p) == std::vector<int>{0});
    GenusSelection c{GenusSelection::Kind::Coset, 2};
    CHECK(select_classes(table, c) == std::vector<int>{2});
    CHECK_THROWS_AS(select_classes(table, GenusSelection{GenusSelection::Kind::Coset, 9}), DomainError);
}
