#include "modsurf/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <queue>
#include <stdexcept>

namespace modsurf::quad {

namespace {

Rule build_gl(int n) {
    Rule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) { p1 = z; p0 = 1.0; }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= n; ++k) {
            double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1.0);
        r.x[i] = -z;
        r.x[n - 1 - i] = z;
        r.w[i] = r.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    if (n == 1) { r.x[0] = 0.0; r.w[0] = 2.0; }
    return r;
}

// Kronrod 15-point extension of the 7-point Gauss rule (QUADPACK constants).
constexpr double xgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                           0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                           0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                           0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double wgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                           0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                           0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                           0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double wg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                          0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a, b;
    cplx value;
    double error;
    double l1;
    bool operator<(const Panel& o) const { return error < o.error; }
};

Panel gk15(const std::function<cplx(double)>& f, double a, double b) {
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    cplx fc = f(c), f1[7], f2[7];
    cplx resk = fc * wgk[7];
    cplx resg = fc * wg[3];
    double l1 = std::abs(fc) * wgk[7];
    for (int j = 0; j < 7; ++j) {
        double dx = h * xgk[j];
        f1[j] = f(c - dx);
        f2[j] = f(c + dx);
        resk += (f1[j] + f2[j]) * wgk[j];
        l1 += (std::abs(f1[j]) + std::abs(f2[j])) * wgk[j];
        if (j % 2 == 1) resg += (f1[j] + f2[j]) * wg[j / 2];
    }
    // QUADPACK error scaling; the raw |K - G| overstates the error of a converged panel by orders
    cplx mean = resk * 0.5;
    double asc = wgk[7] * std::abs(fc - mean);
    for (int j = 0; j < 7; ++j) asc += wgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
    double ah = std::abs(h);
    asc *= ah;
    double raw = std::abs((resk - resg) * h);
    double e = raw;
    if (asc != 0.0 && raw != 0.0) e = asc * std::min(1.0, std::pow(200.0 * raw / asc, 1.5));
    double floor = 10.0 * std::numeric_limits<double>::epsilon() * l1 * ah;
    Panel p{a, b, resk * h, std::max(e, floor), l1 * ah};
    if (!std::isfinite(p.error)) p.error = std::numeric_limits<double>::infinity();
    return p;
}

}  // namespace

const Rule& gauss_legendre(int n) {
    if (n < 1 || n > 4096) throw std::invalid_argument("gauss_legendre: bad node count");
    static std::mutex mu;
    static std::map<int, std::unique_ptr<Rule>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, std::make_unique<Rule>(build_gl(n))).first;
    return *it->second;
}

Result integrate(const std::function<cplx(double)>& f, double a, double b, const Options& opt,
                 const std::vector<double>& breaks) {
    std::vector<double> pts{a};
    for (double t : breaks)
        if (t > std::min(a, b) && t < std::max(a, b)) pts.push_back(t);
    pts.push_back(b);
    if (b >= a) std::sort(pts.begin(), pts.end());
    else std::sort(pts.begin(), pts.end(), std::greater<>());

    std::priority_queue<Panel> heap;
    cplx total = 0.0;
    double err = 0.0, l1 = 0.0;
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        if (pts[i] == pts[i + 1]) continue;
        Panel p = gk15(f, pts[i], pts[i + 1]);
        total += p.value;
        err += p.error;
        l1 += p.l1;
        heap.push(p);
    }
    int count = static_cast<int>(heap.size());
    auto target = [&] { return std::max(opt.abs_tol, opt.rel_tol * (std::abs(total) + opt.l1_weight * l1)); };
    while (!heap.empty() && err > target() && count < opt.max_intervals) {
        Panel p = heap.top();
        heap.pop();
        double m = 0.5 * (p.a + p.b);
        if (m == p.a || m == p.b) {
            // cannot split further; keep its error but stop refining it
            count = opt.max_intervals;
            heap.push(p);
            break;
        }
        Panel l = gk15(f, p.a, m), r = gk15(f, m, p.b);
        total += l.value + r.value - p.value;
        err += l.error + r.error - p.error;
        l1 += l.l1 + r.l1 - p.l1;
        heap.push(l);
        heap.push(r);
        ++count;
    }
    // re-sum to shed accumulated drift
    cplx v = 0.0;
    double e = 0.0, s = 0.0;
    std::vector<Panel> all;
    while (!heap.empty()) { all.push_back(heap.top()); heap.pop(); }
    std::sort(all.begin(), all.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
    for (const auto& p : all) { v += p.value; e += p.error; s += p.l1; }
    Result r;
    r.value = v;
    r.error = e;
    r.l1 = s;
    r.intervals = count;
    r.converged = e <= std::max(opt.abs_tol, opt.rel_tol * (std::abs(v) + opt.l1_weight * s)) * 1.0000001;
    return r;
}

Result integrate_real(const std::function<double(double)>& f, double a, double b, const Options& opt,
                      const std::vector<double>& breaks) {
    return integrate([&](double t) { return cplx(f(t), 0.0); }, a, b, opt, breaks);
}

}  // namespace modsurf::quad
