#include "modsurf/kernels.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "modsurf/errors.hpp"
#include "modsurf/quadrature.hpp"
#include "modsurf/specfun.hpp"

namespace modsurf {

namespace {

constexpr double kPi = std::numbers::pi;

// 1 - (sinh(R rho/2) / sinh(R/2))^2 for rho = sin(theta), theta in [0, pi/2], without cancellation
double profile_sq(double R, double theta) {
    double rho = std::sin(theta);
    double one_minus = 2.0 * std::pow(std::sin(0.25 * kPi - 0.5 * theta), 2);
    double sh = std::sinh(0.5 * R);
    return std::sinh(0.5 * R * one_minus) * std::sinh(0.5 * R * (1.0 + rho)) / (sh * sh);
}

int oscillation_panels(double rate) { return static_cast<int>(std::min(20000.0, std::ceil(rate / 2.0))) + 1; }

std::vector<double> uniform_breaks(double a, double b, int panels) {
    std::vector<double> br;
    for (int k = 1; k < panels; ++k) br.push_back(a + (b - a) * k / panels);
    return br;
}

quad::Options tight() {
    quad::Options o;
    o.abs_tol = 1e-300;
    o.rel_tol = 1e-14;
    o.l1_weight = 1.0;
    o.max_intervals = 50000;
    return o;
}

}  // namespace

KernelProfile::KernelProfile(double R_) : R(R_) {
    if (!(R > 0.0) || !std::isfinite(R)) throw DomainError("kernel radius must be positive");
    u_max = std::pow(std::sinh(0.5 * R), 2);
    normalization = 1.0 / ball_volume(R);
}

double k_R(double u, const KernelProfile& profile) {
    if (u < 0.0) throw DomainError("k_R: u must be non-negative");
    return profile(u);
}

double shc_q(const RadialKernel& k, double v) {
    if (v >= k.support) return 0.0;
    // u = v + s^2 removes the inverse square root
    double smax = std::sqrt(k.support - v);
    auto res = quad::integrate_real([&](double s) { return 2.0 * k.k(v + s * s); }, 0.0, smax, tight());
    if (!res.converged) throw TransformError("q", "quadrature did not converge");
    return res.value.real();
}

double shc_g(const RadialKernel& k, double r) {
    double s = std::sinh(0.5 * r);
    return 2.0 * shc_q(k, s * s);
}

TransformResult shc_pipeline(const RadialKernel& k) {
    if (!(k.support > 0.0)) throw DomainError("shc_pipeline: kernel support must be positive");
    double rmax = 2.0 * std::asinh(std::sqrt(k.support));
    auto h = [k, rmax](cplx t) -> cplx {
        // h(t) = 2 int_0^rmax g(r) cos(r t) dr with r = rmax sin(theta); g has a square-root edge at rmax
        auto f = [&](double th) {
            double r = rmax * std::sin(th);
            return 2.0 * shc_g(k, r) * std::cos(r * t) * rmax * std::cos(th);
        };
        int panels = oscillation_panels(rmax * std::abs(t.real()) * 2.0 / kPi);
        auto res = quad::integrate(f, 0.0, 0.5 * kPi, tight(), uniform_breaks(0.0, 0.5 * kPi, panels));
        if (!res.converged && res.error > 1e-9 * res.l1) throw TransformError("h", "quadrature did not converge");
        if (t.imag() == 0.0) return {res.value.real(), 0.0};
        return res.value;
    };
    return {h, TransformResult::Provenance::Pipeline};
}

cplx h_R(cplx t, double R) {
    if (!(R > 0.0)) throw DomainError("h_R: R must be positive");
    bool real_arg = t.imag() == 0.0;
    if (real_arg) t = std::abs(t.real());
    double pref = R / (kPi * std::sinh(0.5 * R));
    // the integrand is even in rho, so e^{i R rho t} may be replaced by cos(R rho t)
    auto f = [&](double th) -> cplx {
        double w = std::sqrt(profile_sq(R, th)) * std::cos(th);
        double x = R * std::sin(th);
        if (real_arg) return w * std::cos(x * t.real());
        return w * std::cos(x * t);
    };
    int panels = oscillation_panels(R * std::abs(t.real()));
    auto res = quad::integrate(f, 0.0, 0.5 * kPi, tight(), uniform_breaks(0.0, 0.5 * kPi, panels));
    cplx v = 2.0 * pref * res.value;
    if (real_arg) v = cplx(v.real(), 0.0);
    return v;
}

double h_R(double t, double R) { return h_R(cplx(t, 0.0), R).real(); }

TransformResult closed_form_transform(double R) {
    if (!(R > 0.0)) throw DomainError("h_R: R must be positive");
    return {[R](cplx t) { return h_R(t, R); }, TransformResult::Provenance::ClosedForm};
}

double h_R_prime_at_i_half(double R) {
    if (!(R > 0.0)) throw DomainError("h_R': R must be positive");
    double sh = std::sinh(0.5 * R);
    auto f = [&](double th) {
        double rho = std::sin(th);
        return rho * std::sqrt(profile_sq(R, th)) * std::sinh(0.5 * R * rho) / sh * std::cos(th);
    };
    auto res = quad::integrate_real(f, 0.0, 0.5 * kPi, tight());
    return 2.0 * R * R / kPi * res.value.real();
}

AsymptoticH asymptotic_h(double R, double t) {
    if (!(R > 0.0) || R > 0.1) throw DomainError("asymptotic_h requires 0 < R <= 0.1");
    double x = R * std::abs(t);
    if (x < 0.05) return {1, 1.0};
    if (x <= 30.0) return {2, 2.0 * bessel_J(1, x) / x};
    return {3, std::pow(2.0 / x, 1.5) / std::sqrt(kPi) * std::sin(x - 0.25 * kPi)};
}

std::vector<Mat2> automorphic_kernel_terms(const Point& z, const Point& w, double R) {
    if (!(R > 0.0) || R > 2.0) throw DomainError("automorphic_kernel requires 0 < R <= 2");
    KernelProfile prof(R);
    const double slack = 1.0 + 1e-9;
    // Im(gamma z) >= Im(w) e^{-R} bounds |cz + d|^2; Re(gamma z) lies within Im(w) sinh R of Re w
    const double B = z.y * std::exp(R) / w.y * slack;
    const double xr = w.y * std::sinh(R) * slack;
    const std::int64_t cmax = static_cast<std::int64_t>(std::floor(std::sqrt(B) / z.y));
    std::vector<Mat2> out;
    std::int64_t pairs = 0;
    auto add_coset = [&](const Mat2& g0) {
        cplx gz = g0.apply(z.z());
        std::int64_t k0 = static_cast<std::int64_t>(std::ceil(w.x - xr - gz.real()));
        std::int64_t k1 = static_cast<std::int64_t>(std::floor(w.x + xr - gz.real()));
        for (std::int64_t k = k0; k <= k1; ++k) {
            Point p(gz.real() + static_cast<double>(k), gz.imag());
            if (pair_invariant_u(p, w) <= prof.u_max) out.push_back(Mat2{1, k, 0, 1} * g0);
        }
    };
    add_coset(Mat2::identity());
    for (std::int64_t c = 1; c <= cmax; ++c) {
        double rem = B - std::pow(static_cast<double>(c) * z.y, 2);
        if (rem < 0.0) continue;
        double half = std::sqrt(rem), mid = -static_cast<double>(c) * z.x;
        for (auto d = static_cast<std::int64_t>(std::ceil(mid - half)); d <= static_cast<std::int64_t>(std::floor(mid + half)); ++d) {
            if (std::gcd(c, d) != 1) continue;
            if (++pairs > 5000000) throw ResourceError("automorphic_kernel: enumeration budget exceeded");
            // a d - b c = 1 via the inverse of d modulo c
            std::int64_t a = 0;
            if (c == 1) {
                a = 0;
            } else {
                std::int64_t r0 = c, r1 = ((d % c) + c) % c, s0 = 0, s1 = 1;
                while (r1 != 0) {
                    std::int64_t q = r0 / r1;
                    std::tie(r0, r1) = std::make_pair(r1, r0 - q * r1);
                    std::tie(s0, s1) = std::make_pair(s1, s0 - q * s1);
                }
                a = ((s0 % c) + c) % c;
            }
            std::int64_t b = (a * d - 1) / c;
            add_coset(Mat2{a, b, c, d});
        }
    }
    return out;
}

double automorphic_kernel(const Point& z, const Point& w, double R) {
    return static_cast<double>(automorphic_kernel_terms(z, w, R).size()) / ball_volume(R);
}

}  // namespace modsurf
