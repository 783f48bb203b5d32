#include <algorithm>
#include <cmath>
#include <vector>

#include "modsurf/errors.hpp"
#include "modsurf/quadrature.hpp"
#include "modsurf/specfun.hpp"

// K_nu(x) = 1/2 * integral over w of exp(-x cosh w + nu w), taken along a contour
// w(t) = t + i sigma(|t|) that passes through the saddle points of the exponent.
// With a = Im nu >= 0 the saddles sit at +-acosh(a/x) + i pi/2 when a > x and at
// i asin(a/x) otherwise; sigma is piecewise linear and drops to a level with
// cos(sigma) > 0 so both tails decay double-exponentially.

namespace modsurf {

namespace {

constexpr double kPi = std::numbers::pi;

struct Piece {
    double t0, t1;  // parameter range
    double s0;      // sigma at t0
    double slope;   // dsigma/dt
    double sigma(double t) const { return s0 + slope * (t - t0); }
};

struct Exponent {
    double x, a, b;
    // F at w = +t + i sigma and at w = -t + i sigma
    void eval(double t, double sg, cplx& FR, cplx& FL) const {
        double ch = std::cosh(t), sh = std::sinh(t), cs = std::cos(sg), sn = std::sin(sg);
        double re = -x * ch * cs - a * sg;
        double im = -x * sh * sn;
        FR = cplx(re + b * t, im + a * t + b * sg);
        FL = cplx(re - b * t, -im - a * t + b * sg);
    }
    double max_re(double t, double sg) const {
        return -x * std::cosh(t) * std::cos(sg) - a * sg + std::abs(b) * t;
    }
};

}  // namespace

double bessel_K_log_envelope(double a, double x) {
    a = std::abs(a);
    if (a > x) return -0.5 * kPi * a;
    return -std::sqrt((x - a) * (x + a)) - a * std::asin(a / x);
}

cplx BesselK::value() const {
    if (underflow) return 0.0;
    return mantissa * std::exp(log_scale);
}

BesselK bessel_K_scaled(cplx nu, double x) {
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("bessel_K: argument must be positive");
    if (!std::isfinite(nu.real()) || !std::isfinite(nu.imag())) throw DomainError("bessel_K: non-finite order");
    if (std::abs(nu) > 1.0e4) throw DomainError("bessel_K: |order| > 1e4 unsupported");
    if (nu.imag() < 0.0 || (nu.imag() == 0.0 && nu.real() < 0.0)) nu = -nu;
    const double a = nu.imag(), b = nu.real();
    Exponent F{x, a, b};

    std::vector<Piece> pieces;
    double s_last;
    if (a > x) {
        double t0 = std::acosh(a / x);
        pieces.push_back({0.0, t0, 0.5 * kPi, 0.0});
        pieces.push_back({t0, t0 + 0.25 * kPi, 0.5 * kPi, -1.0});
        s_last = 0.25 * kPi;
    } else if (a > 0.0) {
        double al = std::asin(a / x), tb = 0.5;
        pieces.push_back({0.0, tb, al, 0.0});
        pieces.push_back({tb, tb + 0.5 * al, al, -1.0});
        s_last = 0.5 * al;
    } else {
        s_last = 0.0;
    }
    double t_tail = pieces.empty() ? 0.0 : pieces.back().t1;

    // scale: the largest real part of the exponent seen along the contour
    double env = bessel_K_log_envelope(a, x);
    double scale = env;
    double t_peak = std::asinh(std::abs(b) / (x * std::cos(s_last))) + 2.0;
    for (const auto& p : pieces)
        for (int k = 0; k <= 64; ++k) {
            double t = p.t0 + (p.t1 - p.t0) * k / 64.0;
            scale = std::max(scale, F.max_re(t, p.sigma(t)));
        }
    double t_hi = std::max(t_tail, t_peak);
    for (int k = 0; k <= 256; ++k) {
        double t = t_tail + (t_hi - t_tail) * k / 256.0;
        scale = std::max(scale, F.max_re(t, s_last));
    }
    double t_end = std::max(t_tail, t_peak);
    double step = 0.125;
    while (F.max_re(t_end, s_last) - scale > -48.0) {
        t_end += step;
        step *= 1.25;
        if (t_end > 1.0e3) throw ResourceError("bessel_K: tail does not decay");
    }
    pieces.push_back({t_tail, t_end, s_last, 0.0});

    quad::Options opt;
    opt.abs_tol = 1e-300;
    opt.rel_tol = 1e-14;
    opt.l1_weight = 1.0;
    opt.max_intervals = 20000;
    cplx total = 0.0;
    for (const auto& p : pieces) {
        if (p.t1 <= p.t0) continue;
        auto g = [&](double t) {
            cplx FR, FL;
            double sg = p.sigma(t);
            F.eval(t, sg, FR, FL);
            cplx dz(0.0, p.slope);
            return 0.5 * (std::exp(FR - scale) * (1.0 + dz) + std::exp(FL - scale) * (1.0 - dz));
        };
        // split into panels carrying about half an oscillation each
        double rate = 0.0;
        const int ns = 128;
        cplx prevR, prevL;
        for (int k = 0; k <= ns; ++k) {
            double t = p.t0 + (p.t1 - p.t0) * k / ns;
            cplx FR, FL;
            F.eval(t, p.sigma(t), FR, FL);
            if (k > 0) {
                double h = (p.t1 - p.t0) / ns;
                rate = std::max(rate, std::abs(FR.imag() - prevR.imag()) / h);
                rate = std::max(rate, std::abs(FL.imag() - prevL.imag()) / h);
            }
            prevR = FR;
            prevL = FL;
        }
        int panels = static_cast<int>(std::min(50000.0, std::ceil(rate * (p.t1 - p.t0) / kPi))) + 1;
        std::vector<double> br;
        for (int k = 1; k < panels; ++k) br.push_back(p.t0 + (p.t1 - p.t0) * k / panels);
        auto res = quad::integrate(g, p.t0, p.t1, opt, br);
        total += res.value;
        if (!res.converged && res.error > 1e-10 * res.l1) throw ToleranceNotMet("bessel_K: contour quadrature did not converge");
    }
    if (b == 0.0 || a == 0.0) total = cplx(total.real(), 0.0);
    BesselK out{total, scale, false};
    double lm = std::abs(total) > 0.0 ? std::log(std::abs(total)) : -1e300;
    out.underflow = (scale + lm) < -708.0;
    return out;
}

cplx bessel_K(cplx nu, double x) { return bessel_K_scaled(nu, x).value(); }

}  // namespace modsurf
