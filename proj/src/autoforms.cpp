#include "modsurf/autoforms.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <sstream>

#include "modsurf/errors.hpp"
#include "modsurf/kernels.hpp"
#include "modsurf/specfun.hpp"

namespace modsurf {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kYMin = 0.86602540378443864676 * (1.0 - 1e-12);
constexpr int kMaxTerms = 200000;

void check_s(cplx s) {
    if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) throw DomainError("Eisenstein: non-finite s");
    if (s == cplx(0.0, 0.0) || s == cplx(1.0, 0.0)) throw PoleError("Eisenstein series has a pole at s = 0, 1");
}

// E(z, 1/2) vanishes identically: phi(1/2) = -1 and 1/Lambda(1) = 0.
bool vanishes_at(cplx s) { return s == cplx(0.5, 0.0); }

// 4 n^{s - 1/2} sigma_{1 - 2s}(n) for n = 1..n_max (index 0 unused); the 1/Lambda(2s) factor is kept apart.
std::vector<cplx> fourier_coefficients(cplx s, std::size_t n_max) {
    std::vector<cplx> sigma(n_max + 1, 0.0);
    for (std::size_t d = 1; d <= n_max; ++d) {
        cplx p = npow_neg(static_cast<double>(d), 2.0 * s - 1.0);
        for (std::size_t m = d; m <= n_max; m += d) sigma[m] += p;
    }
    std::vector<cplx> out(n_max + 1, 0.0);
    for (std::size_t n = 1; n <= n_max; ++n) out[n] = 4.0 * npow_neg(static_cast<double>(n), 0.5 - s) * sigma[n];
    return out;
}

// log of a crude bound for |coefficient(n)|: n^{|Re s - 1/2|} times the divisor-count slack
double log_coef_bound(cplx s, double n) { return (std::abs(s.real() - 0.5) + 0.5) * std::log(n + 1.0) + 1.5; }

// log of a bound for the tail sum starting at x = 2 pi n y, relative to the coefficient scale
double log_tail_bound(cplx nu, double x, double y) {
    double a = std::abs(nu.imag());
    double env = bessel_K_log_envelope(a, x);
    double slope = std::sqrt(std::max(0.0, x * x - a * a)) / x * 2.0 * kPi * y;  // decay rate per n
    double geo = slope > 1e-3 ? -std::log1p(-std::exp(-slope)) : 10.0;
    return env + geo + 1.0;
}

}  // namespace

cplx eisenstein_constant_term(double y, cplx s) {
    check_s(s);
    if (vanishes_at(s)) return 0.0;
    double ly = std::log(y);
    return std::exp(s * ly) + std::exp(log_phi(s) + (1.0 - s) * ly);
}

EisensteinValue eisenstein_eval_detail(const Point& z0, cplx s) {
    check_s(s);
    if (vanishes_at(s)) return {0.0, 0};
    Point z = reduce(z0).first;
    const double x = z.x, y = z.y;
    const cplx nu = s - 0.5;
    const cplx log_c0 = -log_completed_zeta(2.0 * s);
    cplx total = eisenstein_constant_term(y, s);
    double l1 = std::abs(total);
    const double a = std::abs(nu.imag());
    const double sy = std::sqrt(y);
    std::vector<cplx> coef;
    int used = 0;
    for (int n = 1;; ++n) {
        double xn = 2.0 * kPi * n * y;
        if (xn > a + 5.0 || xn > std::abs(nu) + 5.0) {
            double lb = log_tail_bound(nu, xn, y) + log_c0.real() + log_coef_bound(s, n) + std::log(sy);
            if (lb < std::log(1e-17 * std::max(l1, 1e-300))) break;
        }
        if (n > kMaxTerms) throw ToleranceNotMet("eisenstein_eval: Fourier cutoff exceeded");
        if (static_cast<std::size_t>(n) >= coef.size()) coef = fourier_coefficients(s, std::max<std::size_t>(2 * coef.size(), 64));
        auto K = bessel_K_scaled(nu, xn);
        if (K.underflow && xn > a) break;
        cplx term = coef[n] * K.mantissa * std::exp(K.log_scale + log_c0) * sy * std::cos(2.0 * kPi * n * x);
        total += term;
        l1 += std::abs(term);
        used = n;
    }
    if (!std::isfinite(total.real()) || !std::isfinite(total.imag())) throw ToleranceNotMet("eisenstein_eval: non-finite value");
    if (s.imag() == 0.0) total = cplx(total.real(), 0.0);
    return {total, used};
}

cplx eisenstein_eval(const Point& z, cplx s) { return eisenstein_eval_detail(z, s).value; }

// ---------------------------------------------------------------------------------------------

struct EisensteinField::Table {
    struct Panel {
        double p, q;
        double l0, l1;  // linear stand-in for the log envelope on [p, q]
        std::vector<cplx> c;
    };
    cplx nu;
    cplx log_c0;
    double x_lo, x_hi;
    std::vector<Panel> panels;
    std::vector<cplx> coef;

    cplx K(double x) const {
        auto it = std::upper_bound(panels.begin(), panels.end(), x, [](double v, const Panel& P) { return v < P.q; });
        if (it == panels.end()) it = std::prev(panels.end());
        const Panel& P = *it;
        double u = (2.0 * x - P.p - P.q) / (P.q - P.p);
        cplx b1 = 0.0, b2 = 0.0;
        for (std::size_t k = P.c.size(); k-- > 1;) {
            cplx b0 = 2.0 * u * b1 - b2 + P.c[k];
            b2 = b1;
            b1 = b0;
        }
        cplx m = u * b1 - b2 + P.c[0];
        return m * std::exp(cplx(P.l0 + P.l1 * (x - P.p), 0.0) + log_c0);
    }
};

namespace {

constexpr int kCheb = 32;

std::vector<cplx> chebyshev_fit(const std::function<cplx(double)>& f, double p, double q) {
    std::vector<cplx> vals(kCheb), c(kCheb, 0.0);
    for (int j = 0; j < kCheb; ++j) {
        double u = std::cos(kPi * (j + 0.5) / kCheb);
        vals[j] = f(0.5 * (p + q) + 0.5 * (q - p) * u);
    }
    for (int k = 0; k < kCheb; ++k) {
        cplx acc = 0.0;
        for (int j = 0; j < kCheb; ++j) acc += vals[j] * std::cos(kPi * k * (j + 0.5) / kCheb);
        c[k] = acc * (2.0 / kCheb);
    }
    c[0] *= 0.5;
    return c;
}

}  // namespace

EisensteinField::EisensteinField(cplx s) : s_(s) {
    check_s(s);
    vanishes_ = vanishes_at(s);
    phi_ = vanishes_ ? cplx(-1.0, 0.0) : phi(s);
    auto tab = std::make_shared<Table>();
    if (!vanishes_) {
        tab->nu = s - 0.5;
        tab->log_c0 = -log_completed_zeta(2.0 * s);
        const double a = std::abs(tab->nu.imag());
        tab->x_lo = 2.0 * kPi * kYMin;
        // beyond x_hi every term is below 1e-17 of the constant term, whatever the point
        double floor_scale = std::min(std::pow(kYMin, s.real()), std::pow(kYMin, 1.0 - s.real()));
        double x = std::max(tab->x_lo, std::abs(tab->nu) + 5.0);
        auto negligible = [&](double xv) {
            double y = xv / (2.0 * kPi);
            double n = xv / (2.0 * kPi * kYMin);
            double lb = log_tail_bound(tab->nu, xv, y) + tab->log_c0.real() + log_coef_bound(s, n) + 0.5 * std::log(y);
            return lb < std::log(1e-17 * floor_scale);
        };
        while (!negligible(x)) x += 2.0 + 0.25 * x;
        tab->x_hi = x;

        std::vector<double> cuts{tab->x_lo};
        if (a > tab->x_lo && a < tab->x_hi) cuts.push_back(a);
        cuts.push_back(tab->x_hi);
        std::vector<std::pair<double, double>> work;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            int pieces = static_cast<int>(std::ceil((cuts[i + 1] - cuts[i]) / 4.0));
            double h = (cuts[i + 1] - cuts[i]) / pieces;
            for (int k = 0; k < pieces; ++k) work.emplace_back(cuts[i] + h * k, k + 1 == pieces ? cuts[i + 1] : cuts[i] + h * (k + 1));
        }
        // depth-first refinement from the left keeps panels in increasing order
        std::vector<std::pair<double, double>> stack(work.rbegin(), work.rend());
        const cplx nu = tab->nu;
        while (!stack.empty()) {
            auto [p, q] = stack.back();
            stack.pop_back();
            double lp = bessel_K_log_envelope(a, p), lq = bessel_K_log_envelope(a, q);
            double slope = (lq - lp) / (q - p);
            auto f = [&](double xv) {
                auto K = bessel_K_scaled(nu, xv);
                return K.mantissa * std::exp(K.log_scale - (lp + slope * (xv - p)));
            };
            auto c = chebyshev_fit(f, p, q);
            double mx = 0.0;
            for (auto& v : c) mx = std::max(mx, std::abs(v));
            double tail = std::max({std::abs(c[kCheb - 1]), std::abs(c[kCheb - 2]), std::abs(c[kCheb - 3])});
            if (tail > 1e-14 * mx && q - p > 1e-6) {
                double m = 0.5 * (p + q);
                stack.emplace_back(m, q);
                stack.emplace_back(p, m);
                continue;
            }
            if (tab->panels.size() > 50000) throw ResourceError("EisensteinField: too many Chebyshev panels");
            tab->panels.push_back({p, q, lp, slope, std::move(c)});
        }
        auto n_max = static_cast<std::size_t>(tab->x_hi / (2.0 * kPi * kYMin)) + 1;
        tab->coef = fourier_coefficients(s, n_max);
    }
    table_ = tab;
}

std::size_t EisensteinField::panel_count() const { return table_->panels.size(); }

cplx EisensteinField::constant_term(double y) const {
    if (vanishes_) return 0.0;
    double ly = std::log(y);
    return std::exp(s_ * ly) + phi_ * std::exp((1.0 - s_) * ly);
}

cplx EisensteinField::nonconstant(const Point& z) const {
    if (vanishes_) return 0.0;
    if (z.y < kYMin) throw DomainError("EisensteinField::nonconstant needs Im z >= sqrt(3)/2");
    const Table& t = *table_;
    cplx acc = 0.0;
    double sy = std::sqrt(z.y);
    for (std::size_t n = 1; n < t.coef.size(); ++n) {
        double xn = 2.0 * kPi * static_cast<double>(n) * z.y;
        if (xn > t.x_hi) break;
        acc += t.coef[n] * t.K(xn) * std::cos(2.0 * kPi * static_cast<double>(n) * z.x);
    }
    return acc * sy;
}

cplx EisensteinField::operator()(const Point& z) const {
    Point r = reduce(z).first;
    return constant_term(r.y) + nonconstant(r);
}

// ---------------------------------------------------------------------------------------------

TruncatedEisenstein::TruncatedEisenstein(double t, double T_) : t_g(t), T(T_) {
    if (!(T >= 1.0) || !std::isfinite(T)) throw DomainError("truncation height T must be >= 1");
    if (!std::isfinite(t)) throw DomainError("t_g must be finite");
}

// For a reduced point and T >= 1 only the identity coset can reach above height T.
cplx truncated_eval(const Point& z, const TruncatedEisenstein& spec) {
    Point r = reduce(z).first;
    cplx v = eisenstein_eval(r, spec.s());
    if (r.y > spec.T) v -= eisenstein_constant_term(r.y, spec.s());
    return v;
}

cplx truncated_eval(const Point& z, double T, const EisensteinField& field) {
    if (!(T >= 1.0)) throw DomainError("truncation height T must be >= 1");
    Point r = reduce(z).first;
    cplx v = field.nonconstant(r);
    if (r.y <= T) v += field.constant_term(r.y);
    return v;
}

cplx maass_selberg_rhs(cplx s, cplx r, double T) {
    if (!(T >= 1.0)) throw DomainError("maass_selberg_rhs: T must be >= 1");
    cplx rb = std::conj(r);
    if (std::abs(s - rb) == 0.0 || std::abs(s + rb - 1.0) == 0.0)
        throw DomainError("maass_selberg_rhs: excluded diagonal; use l2_norm_truncated");
    cplx ps = phi(s), pr = std::conj(phi(r));
    double lT = std::log(T);
    auto tp = [&](cplx e) { return std::exp(e * lT); };
    return tp(s + rb - 1.0) / (s + rb - 1.0) + pr * tp(s - rb) / (s - rb) + ps * tp(rb - s) / (rb - s) +
           ps * pr * tp(1.0 - s - rb) / (1.0 - s - rb);
}

cplx maass_selberg_lhs(cplx s, cplx r, double T, int nodes) {
    if (!(T >= 1.0)) throw DomainError("maass_selberg_lhs: T must be >= 1");
    EisensteinField Es(s), Er(r);
    cplx acc = 0.0;
    for (const auto& wp : domain_grid_below(T, nodes, nodes)) acc += wp.w * Es(wp.p) * std::conj(Er(wp.p));
    double a = std::max(std::abs(s.imag()), std::abs(r.imag()));
    double Y = T + (a + 45.0) / (2.0 * kPi);
    for (const auto& wp : strip_grid(T, Y, nodes, nodes)) acc += wp.w * Es.nonconstant(wp.p) * std::conj(Er.nonconstant(wp.p));
    return acc;
}

double l2_norm_truncated_main(double t_g, double T) {
    if (!(t_g > 0.0)) throw DomainError("l2_norm_truncated: t_g must be positive");
    if (!(T >= 1.0)) throw DomainError("l2_norm_truncated: T must be >= 1");
    return 2.0 * std::log(T) - 2.0 * std::log(kPi) + 2.0 * digamma(cplx(0.5, t_g)).real() +
           4.0 * zeta_log_derivative(cplx(1.0, 2.0 * t_g)).real();
}

// The two middle Maass-Selberg terms stay finite on the diagonal and add -Im(phi(s) T^{-2it}) / t.
double l2_norm_truncated(double t_g, double T) {
    double main = l2_norm_truncated_main(t_g, T);
    cplx s(0.5, t_g);
    cplx p = std::exp(log_phi(s) - cplx(0.0, 2.0 * t_g * std::log(T)));
    return main - p.imag() / t_g;
}

namespace {

double kronecker_constant(const Point& w) {
    return 2.0 * kEulerGamma - log_abs_4y_eta4(w) - 12.0 * zeta_prime_2() / (kPi * kPi);
}

}  // namespace

double D_const(double t_g, const Point& w) {
    if (!(t_g > 0.0)) throw DomainError("D_const: t_g must be positive");
    double ll = completed_zeta_log_derivative(cplx(1.0, 2.0 * t_g)).real();
    return 2.0 / kVolModular * (2.0 * ll + kronecker_constant(w));
}

EisensteinConstants eisenstein_constants(double t_g, double R, const Point& w) {
    if (!(R > 0.0)) throw DomainError("C_const: R must be positive");
    double D = D_const(t_g, w);
    double deriv = 2.0 * h_R_prime_at_i_half(R) / kVolModular;
    cplx s1 = cplx(1.0, -2.0 * t_g);
    cplx ratio = std::exp(log_completed_zeta(s1) - log_completed_zeta(std::conj(s1)));
    cplx osc = h_R(cplx(2.0 * t_g, 0.5), R) * ratio * eisenstein_eval(w, s1);
    double o = 2.0 * osc.real();
    return {D, D + deriv + o, w, t_g, R, deriv, o};
}

double C_const(double t_g, double R, const Point& w) { return eisenstein_constants(t_g, R, w).C_value; }

double kronecker_limit_check(const Point& w, double eps) {
    if (!(eps > 0.0) || eps > 1e-2) throw DomainError("kronecker_limit_check: eps must be in (0, 1e-2]");
    double e = eisenstein_eval(w, cplx(1.0 + 2.0 * eps, 0.0)).real();
    return std::abs(kVolModular * e - 1.0 / (2.0 * eps) - kronecker_constant(w));
}

// ---------------------------------------------------------------------------------------------

namespace {

std::string strip_comment(const std::string& line) {
    auto pos = line.find('#');
    std::string s = pos == std::string::npos ? line : line.substr(0, pos);
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_decimal(const std::string& text, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw DomainError("maass file: bad " + what + " '" + text + "'");
    }
    if (used != text.size() || !std::isfinite(v)) throw DomainError("maass file: bad " + what + " '" + text + "'");
    return v;
}

}  // namespace

MaassFormData parse_maass(std::istream& in, const std::string& source, double hecke_tol) {
    MaassFormData d;
    d.source = source;
    std::string line;
    int lineno = 0;
    long long N = -1;
    while (std::getline(in, line)) {
        ++lineno;
        std::string body = strip_comment(line);
        if (body.empty()) continue;
        std::istringstream ss(body);
        if (N < 0) {
            std::string tag, tt, pp, nn, extra;
            ss >> tag >> tt >> pp >> nn;
            if (tag != "maass" || tt.rfind("t=", 0) != 0 || pp.rfind("parity=", 0) != 0 || nn.rfind("N=", 0) != 0 || (ss >> extra))
                throw DomainError("maass file line " + std::to_string(lineno) + ": expected header 'maass t=<decimal> parity=<even|odd> N=<int>'");
            d.t_f = parse_decimal(tt.substr(2), "t");
            if (!(d.t_f > 0.0)) throw DomainError("maass file: t must be positive");
            std::string par = pp.substr(7);
            if (par == "even") d.parity = Parity::Even;
            else if (par == "odd") d.parity = Parity::Odd;
            else throw DomainError("maass file: parity must be even or odd");
            double nv = parse_decimal(nn.substr(2), "N");
            if (nv < 1 || nv != std::floor(nv) || nv > 1e7) throw DomainError("maass file: N must be a positive integer");
            N = static_cast<long long>(nv);
            continue;
        }
        std::string ns, ls, extra;
        ss >> ns >> ls;
        if (ls.empty() || (ss >> extra)) throw DomainError("maass file line " + std::to_string(lineno) + ": expected '<n> <lambda_n>'");
        double n = parse_decimal(ns, "n");
        if (n != static_cast<double>(d.coeffs.size() + 1))
            throw DomainError("maass file line " + std::to_string(lineno) + ": coefficients must be contiguous from n = 1");
        d.coeffs.push_back(parse_decimal(ls, "lambda"));
    }
    if (N < 0) throw DomainError("maass file: missing header");
    if (static_cast<long long>(d.coeffs.size()) != N)
        throw DomainError("maass file: header announces N=" + std::to_string(N) + " but " + std::to_string(d.coeffs.size()) + " coefficients found");
    if (std::abs(d.coeffs[0] - 1.0) > 1e-12) throw DomainError("maass file: lambda(1) must be 1");
    if (N >= 6 && std::abs(d.coeffs[1] * d.coeffs[2] - d.coeffs[5]) > hecke_tol)
        throw DomainError("maass file: Hecke relation lambda(2) lambda(3) = lambda(6) fails");
    return d;
}

MaassFormData load_maass_file(const std::string& path, double hecke_tol) {
    std::ifstream f(path);
    if (!f) throw DomainError("cannot open maass file " + path);
    return parse_maass(f, path, hecke_tol);
}

double maass_eval(const MaassFormData& data, const Point& z) {
    if (data.coeffs.empty()) throw DomainError("maass_eval: no coefficients");
    const double t = data.t_f, y = z.y, sy = std::sqrt(y);
    const cplx nu(0.0, t);
    double acc = 0.0, l1 = 0.0;
    std::size_t N = data.N();
    bool done = false;
    for (std::size_t n = 1; n <= N; ++n) {
        double xn = 2.0 * kPi * static_cast<double>(n) * y;
        if (xn > t + 5.0 && n > 1) {
            double lb = log_tail_bound(nu, xn, y) + 0.5 * std::log(static_cast<double>(n)) + std::log(sy) + 1.0;
            if (lb < std::log(1e-16 * std::max(l1, 1e-300))) {
                done = true;
                break;
            }
        }
        double k = bessel_K(nu, xn).real();
        double arg = 2.0 * kPi * static_cast<double>(n) * z.x;
        double term = data.lambda(n) * k * (data.parity == Parity::Even ? std::cos(arg) : std::sin(arg));
        acc += term;
        l1 += std::abs(data.lambda(n) * k);
    }
    acc *= sy;
    l1 *= sy;
    if (!done) {
        double xn = 2.0 * kPi * static_cast<double>(N + 1) * y;
        double lb = log_tail_bound(nu, std::max(xn, 1e-300), y) + 0.5 * std::log(N + 1.0) + std::log(sy) + 1.0;
        if (xn <= t || lb > std::log(1e-10 * std::max(l1, 1e-14)))
            throw ToleranceNotMet("maass_eval: not enough coefficients for Im z = " + std::to_string(y));
    }
    return acc;
}

}  // namespace modsurf
