#include "modsurf/equilab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>

#include "modsurf/errors.hpp"
#include "modsurf/kernels.hpp"
#include "modsurf/specfun.hpp"

namespace modsurf {

namespace {

constexpr double kPi = std::numbers::pi;

template <class F>
void parallel_for(std::size_t n, F&& fn) {
    unsigned nt = std::min<std::size_t>(worker_count(), std::max<std::size_t>(n, 1));
    if (nt <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::exception_ptr err;
    std::mutex m;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nt; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = t; i < n; i += nt) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(m);
                if (!err) err = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

struct BallRule {
    int nr, ntheta;
};

// Gauss in r and trapezoid in theta both converge geometrically; size by the oscillation count across the ball.
BallRule ball_rule(double R, double freq, const ExperimentConfig& cfg) {
    if (cfg.ball_nr > 0 && cfg.ball_ntheta > 0) return {cfg.ball_nr, cfg.ball_ntheta};
    int nr = 12 + static_cast<int>(std::ceil(2.0 * R * freq));
    int nth = 2 * (12 + static_cast<int>(std::ceil(2.0 * kPi * std::sinh(R) * freq)));
    return {nr, nth};
}

double fixed_ball_average(const std::function<double(const Point&)>& f, const BallSpec& ball, BallRule rule) {
    auto pts = ball_fixed_rule(ball, rule.nr, rule.ntheta);
    std::vector<double> num(pts.size()), den(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        num[i] = pts[i].w * f(pts[i].p);
        den[i] = pts[i].w;
    }
    return pairwise_sum(num) / pairwise_sum(den);
}

std::vector<double> default_levels(double rms) {
    double base = rms > 0.0 ? rms : 1e-3;
    std::vector<double> out;
    for (double k : {0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0}) out.push_back(k * base);
    return out;
}

void check_config(const ExperimentConfig& cfg) {
    if (cfg.samples < 100) throw DomainError("ExperimentConfig: samples must be >= 100");
    if (cfg.max_samples < cfg.samples) throw DomainError("ExperimentConfig: max_samples < samples");
    if (!(cfg.quadrature_tol > 0.0)) throw DomainError("ExperimentConfig: quadrature_tol must be positive");
}

VarianceReport summarize(const std::vector<double>& dev, Centering centering, const ExperimentConfig& cfg) {
    const std::size_t n = dev.size();
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = dev[i] * dev[i];
    double mean = pairwise_sum(sq) / static_cast<double>(n);
    std::vector<double> var(n);
    for (std::size_t i = 0; i < n; ++i) var[i] = (sq[i] - mean) * (sq[i] - mean);
    double sd = std::sqrt(pairwise_sum(var) / static_cast<double>(n - 1));

    VarianceReport rep;
    rep.n = n;
    rep.centering = centering;
    rep.estimate = kVolModular * mean;
    rep.std_error = kVolModular * sd / std::sqrt(static_cast<double>(n));
    auto levels = cfg.exceedance_levels.empty() ? default_levels(std::sqrt(mean)) : cfg.exceedance_levels;
    std::sort(levels.begin(), levels.end());
    for (double c : levels) {
        if (!(c > 0.0)) throw DomainError("exceedance levels must be positive");
        std::size_t cnt = std::count_if(dev.begin(), dev.end(), [c](double d) { return std::abs(d) > c; });
        double measure = kVolModular * static_cast<double>(cnt) / static_cast<double>(n);
        // Chebyshev holds exactly for the empirical measure
        if (measure > rep.estimate / (c * c) * (1.0 + 1e-12) + 1e-300)
            throw Error("variance report violates the Chebyshev bound");
        rep.exceedance.push_back({c, measure});
    }
    return rep;
}

// Monte Carlo over sample_mu with optional doubling toward a std_error target.
VarianceReport monte_carlo(const std::function<double(const Point&)>& deviation, Centering centering,
                           const ExperimentConfig& cfg) {
    check_config(cfg);
    std::vector<double> dev;
    std::size_t n = cfg.samples;
    while (true) {
        std::size_t old = dev.size();
        dev.resize(n);
        parallel_for(n - old, [&](std::size_t k) { dev[old + k] = deviation(sample_mu_point(cfg.seed, old + k)); });
        for (double d : dev)
            if (!std::isfinite(d)) throw ToleranceNotMet("variance estimator: non-finite deviation");
        VarianceReport rep = summarize(dev, centering, cfg);
        if (cfg.std_error_target <= 0.0 || rep.std_error <= cfg.std_error_target) return rep;
        if (n * 2 > cfg.max_samples) {
            rep.partial = true;
            return rep;
        }
        n *= 2;
    }
}

GridEstimate grid_integral(const std::function<double(const Point&)>& deviation, int nx, int nv) {
    if (nx < 4 || nv < 4) throw DomainError("grid: at least 4 nodes per direction");
    auto run = [&](int mx, int mv) {
        auto pts = domain_grid(mx, mv);
        std::vector<double> terms(pts.size());
        parallel_for(pts.size(), [&](std::size_t i) {
            double d = deviation(pts[i].p);
            terms[i] = pts[i].w * d * d;
        });
        return pairwise_sum(terms);
    };
    double fine = run(nx, nv);
    double coarse = run(nx / 2, nv / 2);
    return {fine, std::abs(fine - coarse)};
}

struct EisensteinDeviation {
    double t, R;
    Centering centering;
    EisensteinField field;
    BallRule rule;
    double deriv;
    cplx osc_factor;  // h_R(2t + i/2) * Lambda(1 - 2it)/Lambda(1 + 2it)

    EisensteinDeviation(double t_g, double R_, Centering c, const ExperimentConfig& cfg)
        : t(t_g), R(R_), centering(c), field(cplx(0.5, t_g)), rule(ball_rule(R_, t_g + 1.0, cfg)) {
        if (!(t_g > 0.0)) throw DomainError("Eisenstein variance: t_g must be positive");
        deriv = 2.0 * h_R_prime_at_i_half(R) / kVolModular;
        cplx s1(1.0, -2.0 * t);
        osc_factor = h_R(cplx(2.0 * t, 0.5), R) * std::exp(log_completed_zeta(s1) - log_completed_zeta(std::conj(s1)));
    }

    double operator()(const Point& w) const {
        double avg = fixed_ball_average([&](const Point& z) { return std::norm(field(z)); }, BallSpec(w, R), rule);
        double center = D_const(t, w);
        if (centering == Centering::CConst)
            center += deriv + 2.0 * (osc_factor * eisenstein_eval(w, cplx(1.0, -2.0 * t))).real();
        return avg - center;
    }
};

bool near_orbit(const Point& z, const Point& w, double R) { return !automorphic_kernel_terms(z, w, R).empty(); }
std::size_t orbit_hits(const Point& z, const Point& w, double R) { return automorphic_kernel_terms(z, w, R).size(); }

// density of the genus family at w, minus 1/vol. Orbit points are counted with multiplicity (vol(B) K_R(z, w)),
// so the density integrates to exactly 1 over the quotient even where the ball wraps around the cusp.
struct GenusDensity {
    GenusKind kind;
    double R;
    double vol_ball;
    std::vector<Point> points;                       // Heegner points
    std::vector<std::vector<GeodesicSample>> arcs;   // geodesic samples per class
    std::vector<double> steps;
    double total_length = 0.0;
    std::size_t classes = 0;

    GenusDensity(std::int64_t D, GenusKind k, double R_, const ExperimentConfig& cfg) : kind(k), R(R_) {
        if (!(R > 0.0) || R > 2.0) throw DomainError("genus variance: R must lie in (0, 2]");
        if ((k == GenusKind::Heegner) != (D < 0)) throw DomainError("genus variance: kind does not match the sign of D");
        vol_ball = ball_volume(R);
        auto table = class_group(D);
        auto cls = select_classes(table, cfg.genus);
        classes = cls.size();
        if (k == GenusKind::Heegner) {
            for (int i : cls) points.push_back(reduce(heegner_point(table.representatives[i])).first);
        } else {
            double step = cfg.geodesic_step > 0.0 ? cfg.geodesic_step : R / 20.0;
            if (step > R / 10.0) throw DomainError("genus variance: geodesic step must be <= R/10");
            auto unit = pell_unit(D);
            for (int i : cls) {
                auto seg = geodesic_of_form(table.representatives[i], unit);
                arcs.push_back(seg.sample(step));
                steps.push_back(seg.length / static_cast<double>(arcs.back().size()));
                total_length += seg.length;
            }
        }
    }

    double operator()(const Point& w) const {
        if (kind == GenusKind::Heegner) {
            std::size_t cnt = 0;
            for (const auto& z : points) cnt += orbit_hits(z, w, R);
            return static_cast<double>(cnt) / (vol_ball * static_cast<double>(classes)) - 1.0 / kVolModular;
        }
        double len = 0.0;
        for (std::size_t a = 0; a < arcs.size(); ++a) {
            std::size_t cnt = 0;
            for (const auto& s : arcs[a]) cnt += orbit_hits(s.z, w, R);
            len += steps[a] * static_cast<double>(cnt);
        }
        return len / (vol_ball * total_length) - 1.0 / kVolModular;
    }
};

cplx beta(cplx a, cplx b) { return std::exp(log_gamma(a) + log_gamma(b) - log_gamma(a + b)); }

cplx lfun(std::int64_t d, cplx s) { return d == 1 ? zeta(s) : dirichlet_L(s, d); }

// Weyl sums from per-class values: genus aggregates, then characters through the genus labels
WeylSumReport assemble_weyl(std::int64_t D, const ClassGroupTable& table, const std::vector<cplx>& values,
                            std::optional<GenusChar> chi, cplx s) {
    WeylSumReport rep;
    rep.D = D;
    rep.s = s;
    rep.genus_aggregates.assign(table.genus_count(), 0.0);
    for (int i = 0; i < table.h; ++i) rep.genus_aggregates[table.genus[i]] += values[i];
    std::vector<int> genus_rep(table.genus_count(), -1);
    for (int i = 0; i < table.h; ++i)
        if (genus_rep[table.genus[i]] < 0) genus_rep[table.genus[i]] = i;
    std::vector<GenusChar> chars = chi ? std::vector<GenusChar>{*chi} : genus_characters(D);
    for (const auto& c : chars) {
        WeylEntry e{c, 0.0, std::nullopt, 0.0};
        for (std::size_t g = 0; g < rep.genus_aggregates.size(); ++g)
            e.direct += static_cast<double>(chi_eval(c, genus_rep[g], table)) * rep.genus_aggregates[g];
        rep.entries.push_back(e);
    }
    return rep;
}

}  // namespace

const char* centering_name(Centering c) {
    switch (c) {
        case Centering::InverseVolume: return "inverse_volume";
        case Centering::DConst: return "D";
        case Centering::CConst: return "C";
    }
    return "?";
}

std::vector<int> select_classes(const ClassGroupTable& table, const GenusSelection& sel) {
    std::vector<int> out;
    int label = 0;
    if (sel.kind == GenusSelection::Kind::Coset) {
        if (sel.coset_rep < 0 || sel.coset_rep >= table.h) throw DomainError("genus selector: class index out of range");
        label = table.genus[sel.coset_rep];
    }
    for (int i = 0; i < table.h; ++i)
        if (sel.kind == GenusSelection::Kind::All || table.genus[i] == label) out.push_back(i);
    return out;
}

double schedule_radius(double param, double delta) {
    if (param == 0.0 || !(delta > 0.0)) throw DomainError("schedule_radius: need param != 0 and delta > 0");
    return std::pow(std::abs(param), -delta);
}

unsigned worker_count() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("MODSURF_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) return static_cast<unsigned>(std::min<long>(v, 1024));
    }
    return hw;
}

double pairwise_sum(const std::vector<double>& v) {
    // fixed binary tree over blocks of 8
    std::function<double(std::size_t, std::size_t)> rec = [&](std::size_t lo, std::size_t hi) -> double {
        if (hi - lo <= 8) {
            double s = 0.0;
            for (std::size_t i = lo; i < hi; ++i) s += v[i];
            return s;
        }
        std::size_t mid = lo + (hi - lo) / 2;
        return rec(lo, mid) + rec(mid, hi);
    };
    return v.empty() ? 0.0 : rec(0, v.size());
}

double ball_average_density(const Evaluable& g, const BallSpec& ball, double tol) {
    auto r = ball_integral([&](const Point& z) { return cplx(std::norm(g(z)), 0.0); }, ball, tol);
    return r.value.real() / ball.volume;
}

PlanckCheck planck_check(double t, double R, const Point& w, double tol, double slack) {
    EisensteinField field(cplx(0.5, t));
    BallSpec ball(w, R);
    auto r = ball_integral([&](const Point& z) { return cplx(std::norm(field(z)), 0.0); }, ball, tol);
    double rhs = r.value.real() / ball.volume;
    double lhs = std::norm(h_R(t, R) * field(w));
    return {lhs, rhs, r.error / ball.volume, lhs > rhs + slack};
}

VarianceReport var_estimator(const Evaluable& g, double R, const ExperimentConfig& cfg) {
    if (!(R > 0.0)) throw DomainError("var_estimator: R must be positive");
    BallRule rule = ball_rule(R, 10.0, cfg);
    auto dev = [&](const Point& w) {
        return fixed_ball_average([&](const Point& z) { return std::norm(g(z)); }, BallSpec(w, R), rule) -
               1.0 / kVolModular;
    };
    return monte_carlo(dev, Centering::InverseVolume, cfg);
}

GridEstimate var_grid(const Evaluable& g, double R, int nx, int nv, const ExperimentConfig& cfg) {
    BallRule rule = ball_rule(R, 10.0, cfg);
    return grid_integral(
        [&](const Point& w) {
            return fixed_ball_average([&](const Point& z) { return std::norm(g(z)); }, BallSpec(w, R), rule) -
                   1.0 / kVolModular;
        },
        nx, nv);
}

VarianceReport var_estimator_eisenstein(double t_g, double R, const ExperimentConfig& cfg, Centering centering) {
    if (centering == Centering::InverseVolume) throw DomainError("Eisenstein variance: centering must be C or D");
    EisensteinDeviation dev(t_g, R, centering, cfg);
    return monte_carlo(std::cref(dev), centering, cfg);
}

GridEstimate var_grid_eisenstein(double t_g, double R, int nx, int nv, const ExperimentConfig& cfg, Centering centering) {
    if (centering == Centering::InverseVolume) throw DomainError("Eisenstein variance: centering must be C or D");
    EisensteinDeviation dev(t_g, R, centering, cfg);
    return grid_integral(std::cref(dev), nx, nv);
}

int heegner_ball_count(std::int64_t D, const GenusSelection& genus, const BallSpec& ball) {
    if (D >= 0) throw DomainError("heegner_ball_count: D must be negative");
    auto table = class_group(D);
    int cnt = 0;
    for (int i : select_classes(table, genus))
        cnt += near_orbit(reduce(heegner_point(table.representatives[i])).first, ball.center, ball.radius);
    return cnt;
}

GeodesicBallLength geodesic_ball_length(std::int64_t D, const GenusSelection& genus, const BallSpec& ball, double step) {
    if (D <= 0) throw DomainError("geodesic_ball_length: D must be positive");
    if (!(step > 0.0) || step > ball.radius / 10.0) throw DomainError("geodesic_ball_length: step must lie in (0, R/10]");
    auto table = class_group(D);
    auto unit = pell_unit(D);
    GeodesicBallLength out{0.0, 0.0, 0};
    for (int i : select_classes(table, genus)) {
        auto seg = geodesic_of_form(table.representatives[i], unit);
        auto samples = seg.sample(step);
        double h = seg.length / static_cast<double>(samples.size());
        std::vector<char> inside(samples.size());
        parallel_for(samples.size(), [&](std::size_t k) { inside[k] = near_orbit(samples[k].z, ball.center, ball.radius); });
        std::size_t cnt = 0, crossings = 0;
        for (std::size_t k = 0; k < samples.size(); ++k) {
            cnt += inside[k];
            crossings += inside[k] != inside[(k + 1) % samples.size()];
        }
        out.length += h * static_cast<double>(cnt);
        out.error += h * static_cast<double>(crossings);
        out.samples += samples.size();
    }
    return out;
}

cplx weyl_oracle(std::int64_t D, const GenusChar& chi, cplx s) {
    if (!(s.real() > 1.0)) throw DomainError("weyl_oracle: needs Re s > 1");
    if (chi.d1 * chi.d2 != D) throw DomainError("weyl_oracle: character does not match D");
    cplx LL = lfun(chi.d1, s) * lfun(chi.d2, s) / zeta(2.0 * s);
    double aD = std::abs(static_cast<double>(D));
    cplx scale = std::pow(aD / 4.0, s / 2.0);
    if (D < 0) return 0.5 * static_cast<double>(units_count(D)) * scale * LL;
    // chi(J) = sign(d1): the negated principal class
    double twist = 1.0 + (chi.d1 > 0 ? 1.0 : -1.0);
    return scale * beta(s / 2.0, 0.5) * twist * LL;
}

WeylSumReport weyl_sum_eisenstein(std::int64_t D, std::optional<GenusChar> chi, cplx s, double geodesic_step) {
    auto table = class_group(D);
    std::vector<cplx> values(table.h);
    if (D < 0) {
        parallel_for(table.h, [&](std::size_t i) { values[i] = eisenstein_eval(heegner_point(table.representatives[i]), s); });
    } else {
        auto unit = pell_unit(D);
        for (int i = 0; i < table.h; ++i) {
            auto seg = geodesic_of_form(table.representatives[i], unit);
            auto samples = seg.sample(geodesic_step);
            std::vector<cplx> f(samples.size());
            parallel_for(samples.size(), [&](std::size_t k) { f[k] = eisenstein_eval(samples[k].z, s); });
            std::vector<double> re(f.size()), im(f.size());
            for (std::size_t k = 0; k < f.size(); ++k) {
                re[k] = f[k].real();
                im[k] = f[k].imag();
            }
            double h = seg.length / static_cast<double>(samples.size());
            values[i] = h * cplx(pairwise_sum(re), pairwise_sum(im));
        }
    }
    auto rep = assemble_weyl(D, table, values, chi, s);
    if (s.real() > 1.0) {
        for (auto& e : rep.entries) {
            e.oracle = weyl_oracle(D, e.chi, s);
            double diff = std::abs(e.direct - *e.oracle);
            e.rel_diff = *e.oracle == 0.0 ? diff : diff / std::abs(*e.oracle);
        }
        rep.note = D < 0 ? "oracle: w_K/2 (|D|/4)^{s/2} L(s,chi_d1) L(s,chi_d2) / zeta(2s)"
                         : "oracle: (D/4)^{s/2} B(s/2,1/2) (1 + sign d1) L(s,chi_d1) L(s,chi_d2) / zeta(2s)";
    } else {
        rep.note = "oracle unsupported for Re s <= 1; direct sums only";
    }
    return rep;
}

WeylSumReport weyl_sum_maass(const MaassFormData& data, std::int64_t D, std::optional<GenusChar> chi, double geodesic_step) {
    auto table = class_group(D);
    std::vector<cplx> values(table.h);
    if (D < 0) {
        for (int i = 0; i < table.h; ++i) values[i] = maass_eval(data, heegner_point(table.representatives[i]));
    } else {
        auto unit = pell_unit(D);
        for (int i = 0; i < table.h; ++i) {
            auto seg = geodesic_of_form(table.representatives[i], unit);
            auto samples = seg.sample(geodesic_step);
            std::vector<double> f(samples.size());
            parallel_for(samples.size(), [&](std::size_t k) { f[k] = maass_eval(data, samples[k].z); });
            values[i] = seg.length / static_cast<double>(samples.size()) * pairwise_sum(f);
        }
    }
    auto rep = assemble_weyl(D, table, values, chi, cplx(0.5, data.t_f));
    rep.note = "direct sums only (source: " + data.source + ")";
    return rep;
}

VarianceReport genus_variance_estimator(std::int64_t D, GenusKind kind, double R, const ExperimentConfig& cfg) {
    GenusDensity dens(D, kind, R, cfg);
    return monte_carlo(std::cref(dens), Centering::InverseVolume, cfg);
}

GridEstimate genus_variance_grid(std::int64_t D, GenusKind kind, double R, int nx, int nv, const ExperimentConfig& cfg) {
    GenusDensity dens(D, kind, R, cfg);
    return grid_integral(std::cref(dens), nx, nv);
}

}  // namespace modsurf
