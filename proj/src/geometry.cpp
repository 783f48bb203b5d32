#include "modsurf/geometry.hpp"

#include <cmath>
#include <numbers>

#include "modsurf/errors.hpp"
#include "modsurf/quadrature.hpp"

namespace modsurf {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kHalfSqrt3 = 0.86602540378443864676372317075294;

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_mul_overflow(a, b, &r)) throw ResourceError("group word matrix overflow");
    return r;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_add_overflow(a, b, &r)) throw ResourceError("group word matrix overflow");
    return r;
}

std::uint64_t splitmix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

Point::Point(double x_, double y_) : x(x_), y(y_) {
    if (!(y > 0.0) || !std::isfinite(x) || !std::isfinite(y))
        throw DomainError("Point requires finite x and y > 0");
}

// the arc test allows a few ulps so that points computed on |z| = 1 count as reduced
bool Point::reduced() const { return std::abs(x) <= 0.5 && x * x + y * y >= 1.0 - 4e-16; }

Mat2 Mat2::of(Letter l) {
    switch (l) {
        case Letter::S: return {0, -1, 1, 0};
        case Letter::T: return {1, 1, 0, 1};
        case Letter::Tinv: return {1, -1, 0, 1};
    }
    return {};
}

Mat2 Mat2::operator*(const Mat2& o) const {
    return {checked_add(checked_mul(a, o.a), checked_mul(b, o.c)), checked_add(checked_mul(a, o.b), checked_mul(b, o.d)),
            checked_add(checked_mul(c, o.a), checked_mul(d, o.c)), checked_add(checked_mul(c, o.b), checked_mul(d, o.d))};
}

cplx Mat2::apply(cplx z) const {
    return (static_cast<double>(a) * z + static_cast<double>(b)) / (static_cast<double>(c) * z + static_cast<double>(d));
}

void GroupWord::push(Letter l, std::int64_t count) {
    if (count == 0) return;
    if (l == Letter::S) {
        // S^2 = -1 acts trivially, but the matrix keeps the sign
        for (std::int64_t i = 0; i < count; ++i) matrix = Mat2::of(Letter::S) * matrix;
    } else {
        std::int64_t k = (l == Letter::T) ? count : -count;
        matrix = Mat2{1, k, 0, 1} * matrix;
    }
    if (!letters.empty() && letters.back().letter == l && l != Letter::S) {
        letters.back().count += count;
    } else {
        letters.push_back({l, count});
    }
}

std::size_t GroupWord::length() const {
    std::size_t n = 0;
    for (const auto& s : letters) n += static_cast<std::size_t>(s.count);
    return n;
}

BallSpec::BallSpec(const Point& c, double R) : center(c), radius(R), volume(ball_volume(R)) {
    if (!(R > 0.0) || R > 10.0) throw DomainError("BallSpec radius must satisfy 0 < R <= 10");
}

double pair_invariant_u(const Point& z, const Point& w) {
    double dx = z.x - w.x, dy = z.y - w.y;
    return (dx * dx + dy * dy) / (4.0 * z.y * w.y);
}

double distance_rho(const Point& z, const Point& w) { return 2.0 * std::asinh(std::sqrt(pair_invariant_u(z, w))); }

double ball_volume(double R) {
    if (R < 0.0) throw DomainError("ball_volume: R < 0");
    double s = std::sinh(0.5 * R);
    return 4.0 * kPi * s * s;
}

std::pair<Point, GroupWord> reduce(const Point& p) {
    GroupWord word;
    cplx z = p.z();
    for (int step = 0; step < 10000; ++step) {
        double n = std::floor(z.real() + 0.5);
        double x = z.real() - n;
        if (x == -0.5) {
            x = 0.5;
            n -= 1.0;
        }
        if (n != 0.0) {
            if (std::abs(n) > 9.0e18) throw ResourceError("reduce: translation out of range");
            auto k = static_cast<std::int64_t>(n);
            word.push(k > 0 ? Letter::Tinv : Letter::T, k > 0 ? k : -k);
        }
        z = cplx(x, z.imag());
        double r2 = x * x + z.imag() * z.imag();
        if (r2 < 1.0) {
            cplx w = -1.0 / z;
            // on the unit circle up to rounding: S would bounce back and forth
            if (std::abs(w.real()) <= 0.5 && std::norm(w) <= 1.0) {
                if (x < 0.0) {
                    z = w;
                    word.push(Letter::S);
                }
                return {Point::from(z), word};
            }
            z = w;
            word.push(Letter::S);
            continue;
        }
        if (r2 == 1.0 && x < 0.0) {
            z = cplx(-x, z.imag());
            word.push(Letter::S);
        }
        return {Point::from(z), word};
    }
    throw ResourceError("reduce: iteration cap exceeded (numerical degeneracy)");
}

Point polar_point(const Point& w, double r, double theta) {
    double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
    cplx iz(0.0, std::exp(r));
    cplx k = (c * iz + s) / (-s * iz + c);
    return Point(w.x + w.y * k.real(), w.y * k.imag());
}

BallIntegral ball_integral(const std::function<cplx(const Point&)>& f, const BallSpec& ball, double tol) {
    double inner_err_sup = 0.0;
    bool inner_ok = true;
    quad::Options in_opt;
    in_opt.abs_tol = 0.05 * tol;
    in_opt.rel_tol = 0.05 * tol;
    in_opt.max_intervals = 400;
    auto ring = [&](double r) -> cplx {
        if (r == 0.0) return 0.0;
        auto res = quad::integrate([&](double th) { return f(polar_point(ball.center, r, th)); }, 0.0, 2.0 * kPi, in_opt,
                                   {0.5 * kPi, kPi, 1.5 * kPi});
        inner_err_sup = std::max(inner_err_sup, res.error);
        inner_ok = inner_ok && res.converged;
        return std::sinh(r) * res.value;
    };
    quad::Options out_opt;
    out_opt.abs_tol = 0.4 * tol;
    out_opt.rel_tol = 0.4 * tol;
    out_opt.max_intervals = 200;
    auto res = quad::integrate(ring, 0.0, ball.radius, out_opt);
    double err = res.error + inner_err_sup * (std::cosh(ball.radius) - 1.0);
    if (!res.converged || !inner_ok || err > tol * (1.0 + std::abs(res.value)))
        throw QuadratureError("ball_quadrature did not converge", res.value.real(), err);
    return {res.value, err};
}

double ball_quadrature(const std::function<double(const Point&)>& f, const BallSpec& ball, double tol) {
    return ball_integral([&](const Point& p) { return cplx(f(p), 0.0); }, ball, tol).value.real();
}

std::vector<WeightedPoint> ball_fixed_rule(const BallSpec& ball, int nr, int ntheta) {
    const auto& gl = quad::gauss_legendre(nr);
    std::vector<WeightedPoint> out;
    out.reserve(static_cast<std::size_t>(nr) * ntheta);
    double R = ball.radius, dth = 2.0 * kPi / ntheta;
    for (int i = 0; i < nr; ++i) {
        double r = 0.5 * R * (gl.x[i] + 1.0);
        double wr = 0.5 * R * gl.w[i] * std::sinh(r);
        for (int j = 0; j < ntheta; ++j) {
            double th = (j + 0.5) * dth;
            out.push_back({polar_point(ball.center, r, th), wr * dth});
        }
    }
    return out;
}

std::vector<WeightedPoint> domain_grid(int nx, int nv) {
    const auto& gx = quad::gauss_legendre(nx);
    const auto& gv = quad::gauss_legendre(nv);
    std::vector<WeightedPoint> out;
    for (int i = 0; i < nx; ++i) {
        double x = 0.5 * gx.x[i];
        double vmax = 1.0 / std::sqrt(1.0 - x * x);
        for (int j = 0; j < nv; ++j) {
            double v = 0.5 * vmax * (gv.x[j] + 1.0);
            out.push_back({Point(x, 1.0 / v), 0.5 * gx.w[i] * 0.5 * vmax * gv.w[j]});
        }
    }
    return out;
}

std::vector<WeightedPoint> domain_grid_below(double T, int nx, int ny) {
    if (T < 1.0) throw DomainError("domain_grid_below: T < 1");
    const auto& gx = quad::gauss_legendre(nx);
    const auto& gy = quad::gauss_legendre(ny);
    std::vector<WeightedPoint> out;
    for (int i = 0; i < nx; ++i) {
        double x = 0.5 * gx.x[i];
        double lo = std::sqrt(1.0 - x * x), h = 0.5 * (T - lo);
        for (int j = 0; j < ny; ++j) {
            double y = lo + h * (gy.x[j] + 1.0);
            out.push_back({Point(x, y), 0.5 * gx.w[i] * h * gy.w[j] / (y * y)});
        }
    }
    return out;
}

std::vector<WeightedPoint> strip_grid(double T, double Y, int nx, int ny) {
    const auto& gx = quad::gauss_legendre(nx);
    const auto& gy = quad::gauss_legendre(ny);
    std::vector<WeightedPoint> out;
    double h = 0.5 * (Y - T);
    for (int i = 0; i < nx; ++i) {
        double x = 0.5 * gx.x[i];
        for (int j = 0; j < ny; ++j) {
            double y = T + h * (gy.x[j] + 1.0);
            out.push_back({Point(x, y), 0.5 * gx.w[i] * h * gy.w[j] / (y * y)});
        }
    }
    return out;
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(splitmix(seed ^ splitmix(stream + 0x632BE59BD9B4E019ULL))) {}

std::uint64_t CounterRng::next() { return splitmix(key_ + 0x9E3779B97F4A7C15ULL * (++counter_)); }

double CounterRng::uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

Point sample_mu_point(std::uint64_t seed, std::uint64_t index, std::uint64_t* proposals) {
    CounterRng rng(seed, index);
    for (;;) {
        double x = rng.uniform() - 0.5;
        double y = kHalfSqrt3 / rng.uniform();
        if (proposals) ++*proposals;
        if (x * x + y * y >= 1.0) return Point(x, y);
    }
}

std::vector<Point> sample_mu(std::size_t n, std::uint64_t seed) {
    if (n < 1) throw DomainError("sample_mu: n must be >= 1");
    std::vector<Point> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(sample_mu_point(seed, i));
    return out;
}

MuSampleStats sample_mu_with_stats(std::size_t n, std::uint64_t seed) {
    if (n < 1) throw DomainError("sample_mu: n must be >= 1");
    MuSampleStats s;
    s.points.reserve(n);
    for (std::size_t i = 0; i < n; ++i) s.points.push_back(sample_mu_point(seed, i, &s.proposals));
    return s;
}

}  // namespace modsurf
