// Acceptance gate: one PASS/FAIL line per criterion. Exit status is nonzero if a gating criterion fails.
#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "modsurf/autoforms.hpp"
#include "modsurf/equilab.hpp"
#include "modsurf/errors.hpp"
#include "modsurf/kernels.hpp"
#include "modsurf/quadinv.hpp"
#include "modsurf/specfun.hpp"
#include "oracles.hpp"

using namespace modsurf;

namespace {

struct Verdict {
    bool pass;
    std::string detail;
};

struct Criterion {
    int id;
    const char* name;
    double budget_s;
    bool gating;
    std::function<Verdict()> run;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::vector<std::int64_t> fundamentals(std::int64_t maxabs) {
    std::vector<std::int64_t> out;
    for (std::int64_t d = -maxabs; d <= maxabs; ++d)
        if (d != 0 && d != 1 && is_fundamental_discriminant(d)) out.push_back(d);
    return out;
}

Verdict maass_selberg() {
    std::vector<cplx> pts{{0.6, 3.0}, {0.55, 2.0}, {0.7, 5.0}};
    double worst = 0.0;
    int n = 0;
    for (cplx s : pts)
        for (cplx r : pts) {
            if (s == r) continue;
            for (double T : {1.5, 3.0}) {
                cplx rhs = maass_selberg_rhs(s, r, T);
                worst = std::max(worst, std::abs(maass_selberg_lhs(s, r, T) - rhs) / std::abs(rhs));
                ++n;
            }
        }
    return {worst <= 1e-3, fmt("%d off-diagonal pairs, max rel %.3g (tol 1e-3)", n, worst)};
}

Verdict truncated_norm() {
    double worst = 0.0;
    for (double t : {1.0, 5.0, 10.0})
        for (double T : {1.5, 3.0}) {
            double q = maass_selberg_lhs(cplx(0.5, t), cplx(0.5, t), T).real();
            double c = l2_norm_truncated(t, T);
            worst = std::max(worst, std::abs(q - c) / std::abs(c));
        }
    return {worst <= 1e-3, fmt("6 (t_g, T) points, max rel %.3g (tol 1e-3)", worst)};
}

Verdict mean_value() {
    double worst = 0.0;
    for (double t : {0.0, 4.2, 9.7}) {
        EisensteinField F(cplx(0.5, t));
        for (double R : {0.05, 0.2, 0.5})
            for (Point w : {Point(0, 1), Point(0.25, 2.0)}) {
                BallSpec b(w, R);
                auto I = ball_integral([&](const Point& p) { return F(p); }, b, 1e-11);
                cplx fw = F(w);
                worst = std::max(worst, std::abs(I.value / b.volume - h_R(t, R) * fw) / (1 + std::abs(fw)));
            }
    }
    return {worst <= 1e-4, fmt("18 points, max |avg - h_R f(w)|/(1+|f(w)|) = %.3g (tol 1e-4)", worst)};
}

Verdict h_asymptotics() {
    const double R = 1e-3;
    double bessel = 0.0;
    for (int k = 0; k < 20; ++k) {
        double x = 0.1 * std::pow(300.0, k / 19.0);  // Rt from 0.1 to 30
        double t = x / R;
        bessel = std::max(bessel, std::abs(h_R(t, R) - 2 * bessel_J(1, x) / x));
    }
    double third = 0.0;
    for (double x : {100.0, 1000.0}) {
        auto a = asymptotic_h(R, x / R);
        third = std::max(third, a.regime == 3 ? std::abs(h_R(x / R, R) - a.value) : 1.0);
    }
    double at0 = std::abs(h_R(0.0, R) - 1.0);
    bool ok = bessel <= 1e-3 && third <= 1e-4 && at0 <= 1e-6;
    return {ok, fmt("Bessel regime max %.3g (1e-3), third regime max %.3g (1e-4), |h_R(0)-1| = %.3g (1e-6)", bessel, third, at0)};
}

Verdict derivative() {
    double lo = 1e9, hi = 0;
    for (double R : {1e-2, 1e-3}) {
        double q = h_R_prime_at_i_half(R) / (R * R / 8);
        lo = std::min(lo, q);
        hi = std::max(hi, q);
    }
    return {lo >= 0.98 && hi <= 1.02, fmt("ratio range [%.6f, %.6f] (need [0.98, 1.02])", lo, hi)};
}

Verdict kronecker() {
    double worst = 0.0;
    for (Point w : {Point(0, 1), Point(0.3, 1.2)})
        for (double eps : {1e-2, 1e-3}) worst = std::max(worst, kronecker_limit_check(w, eps) / (10 * eps));
    return {worst <= 1.0, fmt("max residual/(10 eps) = %.3g (need <= 1)", worst)};
}

Verdict class_number() {
    double worst = 0.0;
    std::int64_t at = 0;
    auto Ds = fundamentals(10000);
    for (auto D : Ds) {
        auto r = class_number_formula_check(D);
        if (r.abs_diff > worst) worst = r.abs_diff, at = D;
    }
    return {worst <= 1e-6, fmt("%zu discriminants, max |h - formula| = %.3g at D = %lld (tol 1e-6)", Ds.size(), worst, (long long)at)};
}

Verdict orthogonality() {
    auto Ds = fundamentals(2000);
    std::size_t bad = 0, pairs = 0;
    for (auto D : Ds) {
        auto table = class_group(D);
        auto chars = genus_characters(D);
        std::vector<std::vector<int>> vals;
        for (const auto& c : chars) {
            std::vector<int> v(table.h);
            for (int i = 0; i < table.h; ++i) v[i] = chi_eval(c, i, table);
            vals.push_back(v);
        }
        for (std::size_t a = 0; a < vals.size(); ++a)
            for (std::size_t b = 0; b < vals.size(); ++b) {
                long s = 0;
                for (int i = 0; i < table.h; ++i) s += vals[a][i] * vals[b][i];
                ++pairs;
                bad += s != (a == b ? table.h : 0);
            }
    }
    return {bad == 0, fmt("%zu discriminants, %zu character pairs, %zu mismatches", Ds.size(), pairs, bad)};
}

Verdict fourier_vs_lattice() {
    std::mt19937_64 g(1);
    std::uniform_real_distribution<double> ux(-0.5, 0.5), uy(0.0, 1.0);
    std::vector<Point> zs;
    while (zs.size() < 10) {
        Point p(ux(g), 0.85 + 2.5 * uy(g));
        if (p.reduced()) zs.push_back(p);
    }
    double worst = 0.0;
    for (double s : {1.5, 2.0, 2.5})
        for (const auto& z : zs) {
            cplx a = eisenstein_eval(z, s), b = oracle::eisenstein_lattice(z, s);
            worst = std::max(worst, std::abs(a - b) / std::abs(b));
        }
    return {worst <= 1e-8, fmt("30 points, max rel %.3g (tol 1e-8)", worst)};
}

Verdict weyl() {
    double worst = 0.0;
    int n = 0;
    for (std::int64_t D : {-4, -23, -84, 5, 12}) {
        auto rep = weyl_sum_eisenstein(D, std::nullopt, cplx(2.0, 0.0), 0.005);
        for (const auto& e : rep.entries) {
            worst = std::max(worst, e.oracle ? e.rel_diff : 1.0);
            ++n;
        }
    }
    return {worst <= 1e-6, fmt("%d (D, chi) pairs at s = 2, max rel %.3g (tol 1e-6)", n, worst)};
}

Verdict planck() {
    int violations = 0, n = 0;
    double worst = -1e300;
    for (double t : {1.0, 5.0, 12.0, 25.0, 50.0})
        for (double R : {1e-3, 1e-2, 0.1, 0.5, 1.0})
            for (Point w : {Point(0, 1), Point(0.3, 1.2)}) {
                auto c = planck_check(t, R, w, 1e-10);
                violations += c.violated;
                worst = std::max(worst, c.lhs - c.rhs);
                ++n;
            }
    return {violations == 0, fmt("%d configurations, %d violations, max lhs - rhs = %.3g (slack 1e-8)", n, violations, worst)};
}

Verdict variance_oracles() {
    ExperimentConfig cfg;
    cfg.samples = 2000;
    cfg.seed = 1;
    auto mc = var_estimator_eisenstein(20.0, 0.3, cfg);
    auto grid = var_grid_eisenstein(20.0, 0.3, 40, 40, cfg);
    double z1 = std::abs(mc.estimate - grid.value) / std::hypot(mc.std_error, grid.error);
    auto gmc = genus_variance_estimator(-4, GenusKind::Heegner, 0.3, cfg);
    auto ggrid = genus_variance_grid(-4, GenusKind::Heegner, 0.3, 40, 40, cfg);
    double z2 = std::abs(gmc.estimate - ggrid.value) / std::hypot(gmc.std_error, ggrid.error);
    return {z1 <= 3 && z2 <= 3,
            fmt("Eisenstein t=20 R=0.3: MC %.4g +- %.2g vs grid %.4g +- %.2g (%.2f sigma); "
                "Heegner D=-4 R=0.3: MC %.4g +- %.2g vs grid %.4g +- %.2g (%.2f sigma)",
                mc.estimate, mc.std_error, grid.value, grid.error, z1, gmc.estimate, gmc.std_error, ggrid.value,
                ggrid.error, z2)};
}

Verdict soft_trend() {
    auto pick = [](std::int64_t around) {
        std::vector<std::int64_t> out;
        for (std::int64_t d = around; out.size() < 5; --d)
            if (is_fundamental_discriminant(d)) out.push_back(d);
        return out;
    };
    ExperimentConfig cfg;
    cfg.samples = 2000;
    cfg.seed = 1;
    auto avg = [&](const std::vector<std::int64_t>& Ds) {
        double s = 0;
        for (auto D : Ds) s += genus_variance_estimator(D, GenusKind::Heegner, 0.3, cfg).estimate;
        return s / static_cast<double>(Ds.size());
    };
    double small = avg(pick(-1000)), large = avg(pick(-100000));
    return {large < small, fmt("mean estimate near |D|=1e3: %.4g, near |D|=1e5: %.4g", small, large)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance gate"};
    std::vector<int> only;
    app.add_option("--only", only, "run just these criteria");
    CLI11_PARSE(app, argc, argv);

    std::vector<Criterion> all{
        {1, "Maass-Selberg off-diagonal", 300, true, maass_selberg},
        {2, "truncated L2 norm", 300, true, truncated_norm},
        {3, "mean-value identity", 120, true, mean_value},
        {4, "h_R asymptotics", 60, true, h_asymptotics},
        {5, "derivative at i/2", 60, true, derivative},
        {6, "Kronecker limit formula", 60, true, kronecker},
        {7, "class number formula", 600, true, class_number},
        {8, "genus orthogonality", 120, true, orthogonality},
        {9, "Eisenstein Fourier vs lattice sum", 60, true, fourier_vs_lattice},
        {10, "Weyl-sum oracle", 120, true, weyl},
        {11, "Planck inequality sweep", 300, true, planck},
        {12, "variance estimator vs grid", 300, true, variance_oracles},
        {13, "genus variance trend (soft)", 1e9, false, soft_trend},
    };
    std::set<int> sel(only.begin(), only.end());
    int failures = 0;
    for (const auto& c : all) {
        if (!sel.empty() && !sel.count(c.id)) continue;
        auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        bool in_time = secs <= c.budget_s;
        bool pass = v.pass && in_time;
        std::string budget = c.gating ? fmt(", %.1f s of %.0f s", secs, c.budget_s) : fmt(", %.1f s", secs);
        std::printf("%s %2d %s: %s%s%s\n", pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(), budget.c_str(),
                    c.gating ? "" : " [non-gating]");
        std::fflush(stdout);
        if (!pass && c.gating) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
