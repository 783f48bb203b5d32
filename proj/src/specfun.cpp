#include "modsurf/specfun.hpp"

#include <array>
#include <cmath>
#include <vector>

#include "modsurf/errors.hpp"

namespace modsurf {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr long double kTwoPiL = 6.283185307179586476925286766559005768L;

// B_{2k} for k = 1..10
constexpr std::array<double, 10> kB2k = {1.0 / 6.0,        -1.0 / 30.0,   1.0 / 42.0,          -1.0 / 30.0,
                                         5.0 / 66.0,       -691.0 / 2730.0, 7.0 / 6.0,        -3617.0 / 510.0,
                                         43867.0 / 798.0, -174611.0 / 330.0};

// c_k = B_{2k}/(2k)! for k = 1..40, via 2 zeta(2k)/(2 pi)^{2k}
const std::vector<double>& em_coeffs() {
    static const std::vector<double> c = [] {
        std::vector<double> out(41, 0.0);
        for (int k = 1; k <= 40; ++k) {
            double z2k;
            if (k == 1) z2k = kPi * kPi / 6.0;
            else if (k == 2) z2k = std::pow(kPi, 4) / 90.0;
            else {
                z2k = 0.0;
                for (int n = 2000; n >= 1; --n) z2k += std::pow(static_cast<double>(n), -2.0 * k);
            }
            double v = 2.0 * z2k / std::pow(2.0 * kPi, 2.0 * k);
            out[k] = (k % 2 == 1) ? v : -v;
        }
        return out;
    }();
    return c;
}

bool is_nonpositive_integer(cplx s) { return s.imag() == 0.0 && s.real() <= 0.0 && s.real() == std::floor(s.real()); }

}  // namespace

// n^{-s} with the phase t log n carried in extended precision.
cplx npow_neg(double n, cplx s) {
    long double ln = std::log(static_cast<long double>(n));
    long double ph = std::fmod(-static_cast<long double>(s.imag()) * ln, kTwoPiL);
    double mag = std::exp(static_cast<double>(-static_cast<long double>(s.real()) * ln));
    return std::polar(mag, static_cast<double>(ph));
}

void PrecisionPolicy::validate() const {
    if (!(target_abs_tol > 0.0) || !(target_rel_tol > 0.0) || max_terms < 1)
        throw DomainError("PrecisionPolicy: tolerances must be positive");
}

cplx log_gamma(cplx s) {
    if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) throw DomainError("log_gamma: non-finite input");
    if (is_nonpositive_integer(s)) throw PoleError("log_gamma: pole at nonpositive integer");
    cplx z = s, shift = 0.0;
    while (z.real() < 15.0) {
        shift += std::log(z);
        z += 1.0;
    }
    cplx zi = 1.0 / z, zi2 = zi * zi, term = zi, ser = 0.0;
    for (int k = 1; k <= 10; ++k) {
        ser += kB2k[k - 1] / (2.0 * k * (2.0 * k - 1.0)) * term;
        term *= zi2;
    }
    return (z - 0.5) * std::log(z) - z + 0.5 * std::log(2.0 * kPi) + ser - shift;
}

cplx digamma(cplx s) {
    if (is_nonpositive_integer(s)) throw PoleError("digamma: pole at nonpositive integer");
    cplx z = s, acc = 0.0;
    while (z.real() < 15.0) {
        acc -= 1.0 / z;
        z += 1.0;
    }
    cplx zi2 = 1.0 / (z * z), term = zi2, ser = 0.0;
    for (int k = 1; k <= 10; ++k) {
        ser += kB2k[k - 1] / (2.0 * k) * term;
        term *= zi2;
    }
    return acc + std::log(z) - 0.5 / z - ser;
}

double digamma(double x) {
    if (x <= 0.0 && x == std::floor(x)) throw PoleError("digamma: pole at nonpositive integer");
    double acc = 0.0;
    while (x < 15.0) {
        acc -= 1.0 / x;
        x += 1.0;
    }
    double xi2 = 1.0 / (x * x);
    double ser = xi2 * (1.0 / 12.0 - xi2 * (1.0 / 120.0 - xi2 * (1.0 / 252.0 - xi2 * (1.0 / 240.0 - xi2 * (1.0 / 132.0)))));
    return acc + std::log(x) - 0.5 / x - ser;
}

ZetaPair zeta_with_derivative(cplx s, const PrecisionPolicy& pol) {
    pol.validate();
    if (s == cplx(1.0, 0.0)) throw PoleError("zeta: pole at s = 1");
    if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) throw DomainError("zeta: non-finite input");
    const auto& c = em_coeffs();
    int N = 20 + static_cast<int>(std::ceil(0.5 * std::abs(s)));
    if (N > pol.max_terms) throw ToleranceNotMet("zeta: term budget too small for |s|");
    cplx sum = 0.0, dsum = 0.0;
    for (int n = 1; n < N; ++n) {
        cplx t = npow_neg(n, s);
        sum += t;
        dsum -= std::log(static_cast<double>(n)) * t;
    }
    double lN = std::log(static_cast<double>(N));
    cplx NmS = npow_neg(N, s);  // N^{-s}
    cplx N1mS = NmS * static_cast<double>(N);
    sum += N1mS / (s - 1.0) + 0.5 * NmS;
    dsum += -lN * N1mS / (s - 1.0) - N1mS / ((s - 1.0) * (s - 1.0)) - 0.5 * lN * NmS;
    // Bernoulli tail: c_k P_k(s) N^{-s-2k+1}, P_k = s(s+1)...(s+2k-2)
    cplx P = s, dP = 1.0;
    cplx Npow = NmS / static_cast<double>(N);  // N^{-s-1}
    double invN2 = 1.0 / (static_cast<double>(N) * N);
    for (int k = 1; k <= 40; ++k) {
        cplx term = c[k] * P * Npow;
        cplx dterm = c[k] * (dP - lN * P) * Npow;
        sum += term;
        dsum += dterm;
        if (std::abs(term) < 1e-18 * std::abs(sum) && std::abs(dterm) < 1e-18 * (std::abs(dsum) + 1e-300)) break;
        cplx a1 = s + (2.0 * k - 1.0), a2 = s + 2.0 * k;
        dP = dP * a1 * a2 + P * (a1 + a2);
        P = P * a1 * a2;
        Npow *= invN2;
    }
    return {sum, dsum};
}

cplx zeta(cplx s, const PrecisionPolicy& pol) { return zeta_with_derivative(s, pol).value; }

cplx zeta_log_derivative(cplx s, const PrecisionPolicy& pol) {
    auto zp = zeta_with_derivative(s, pol);
    if (zp.value == cplx(0.0, 0.0)) throw PoleError("zeta_log_derivative: zero of zeta");
    return zp.derivative / zp.value;
}

double zeta_prime_2() {
    static const double v = zeta_with_derivative(2.0).derivative.real();
    return v;
}

cplx log_completed_zeta(cplx s) {
    if (s == cplx(0.0, 0.0) || s == cplx(1.0, 0.0)) throw PoleError("completed_zeta: pole at 0 or 1");
    if (s.real() < -1.0 || is_nonpositive_integer(0.5 * s)) s = 1.0 - s;
    cplx z = zeta(s);
    if (z == cplx(0.0, 0.0)) return {-std::numeric_limits<double>::infinity(), 0.0};
    return -0.5 * s * std::log(kPi) + log_gamma(0.5 * s) + std::log(z);
}

cplx completed_zeta(cplx s) { return std::exp(log_completed_zeta(s)); }

cplx completed_zeta_log_derivative(cplx s) {
    if (s == cplx(0.0, 0.0) || s == cplx(1.0, 0.0)) throw PoleError("completed_zeta_log_derivative: pole");
    return -0.5 * std::log(kPi) + 0.5 * digamma(0.5 * s) + zeta_log_derivative(s);
}

cplx log_phi(cplx s) {
    if (s == cplx(0.0, 0.0) || s == cplx(1.0, 0.0)) throw PoleError("phi: pole or zero at s = 0, 1");
    if (s == cplx(0.5, 0.0)) return {0.0, kPi};
    return log_completed_zeta(2.0 - 2.0 * s) - log_completed_zeta(2.0 * s);
}

cplx phi(cplx s) {
    if (s == cplx(0.5, 0.0)) return -1.0;
    return std::exp(log_phi(s));
}

bool is_fundamental_discriminant(std::int64_t d) {
    if (d == 1) return true;
    if (d == 0) return false;
    auto squarefree = [](std::int64_t m) {
        m = m < 0 ? -m : m;
        for (std::int64_t p = 2; p * p <= m; ++p) {
            if (m % (p * p) == 0) return false;
            if (m % p == 0) m /= p;
        }
        return true;
    };
    std::int64_t r = ((d % 4) + 4) % 4;
    if (r == 1) return squarefree(d);
    if (r == 0) {
        std::int64_t m = d / 4;
        std::int64_t r4 = ((m % 4) + 4) % 4;
        return (r4 == 2 || r4 == 3) && squarefree(m);
    }
    return false;
}

int kronecker_symbol(std::int64_t d, std::int64_t n) {
    if (n < 1) throw DomainError("kronecker_symbol: n must be >= 1");
    int res = 1;
    while (n % 2 == 0) {
        n /= 2;
        if (d % 2 == 0) return 0;
        std::int64_t r = ((d % 8) + 8) % 8;
        if (r == 3 || r == 5) res = -res;
    }
    if (n == 1) return res;
    std::int64_t a = ((d % n) + n) % n;
    // Jacobi symbol (a/n), n odd
    while (a != 0) {
        while (a % 2 == 0) {
            a /= 2;
            std::int64_t r = n % 8;
            if (r == 3 || r == 5) res = -res;
        }
        std::swap(a, n);
        if (a % 4 == 3 && n % 4 == 3) res = -res;
        a %= n;
    }
    return n == 1 ? res : 0;
}

cplx hurwitz_zeta(cplx s, double alpha) {
    if (s == cplx(1.0, 0.0)) throw PoleError("hurwitz_zeta: pole at s = 1");
    if (!(alpha > 0.0)) throw DomainError("hurwitz_zeta: alpha must be positive");
    const auto& c = em_coeffs();
    int N = 10 + static_cast<int>(std::ceil((std::abs(s) + 60.0) / kPi));
    cplx sum = 0.0;
    for (int n = 0; n < N; ++n) sum += npow_neg(n + alpha, s);
    double a = N + alpha;
    cplx amS = npow_neg(a, s);
    sum += amS * a / (s - 1.0) + 0.5 * amS;
    cplx P = s, Apow = amS / a;
    for (int k = 1; k <= 40; ++k) {
        cplx term = c[k] * P * Apow;
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
        P = P * (s + (2.0 * k - 1.0)) * (s + 2.0 * k);
        Apow /= a * a;
    }
    return sum;
}

double dirichlet_L1(std::int64_t d) {
    if (!is_fundamental_discriminant(d) || d == 1) throw DomainError("dirichlet_L1: d must be fundamental and != 1");
    std::int64_t q = d < 0 ? -d : d;
    double acc = 0.0;
    for (std::int64_t a = 1; a < q; ++a) {
        int chi = kronecker_symbol(d, a);
        if (chi != 0) acc += chi * digamma(static_cast<double>(a) / q);
    }
    return -acc / static_cast<double>(q);
}

cplx dirichlet_L(cplx s, std::int64_t d) {
    if (!is_fundamental_discriminant(d)) throw DomainError("dirichlet_L: d is not a fundamental discriminant");
    if (d == 1) return zeta(s);
    if (s == cplx(1.0, 0.0)) return dirichlet_L1(d);
    std::int64_t q = d < 0 ? -d : d;
    if (q > 1000000) throw DomainError("dirichlet_L: |d| > 1e6 unsupported");
    cplx acc = 0.0;
    for (std::int64_t a = 1; a < q; ++a) {
        int chi = kronecker_symbol(d, a);
        if (chi != 0) acc += static_cast<double>(chi) * hurwitz_zeta(s, static_cast<double>(a) / q);
    }
    return acc * npow_neg(static_cast<double>(q), s);
}

double bessel_J(int k, double x) {
    if (k != 0 && k != 1) throw DomainError("bessel_J: order must be 0 or 1");
    double v = std::cyl_bessel_j(static_cast<double>(k), std::abs(x));
    return (k == 1 && x < 0.0) ? -v : v;
}

namespace {

// log|eta| and eta itself at a reduced point by the q-product.
cplx eta_product(const Point& w, double* log_abs) {
    cplx q = std::exp(cplx(0.0, 2.0 * kPi) * w.z());
    double aq = std::abs(q);
    cplx prod = 1.0, qm = q;
    double la = 0.0;
    double aqm = aq;
    for (int m = 1; m < 100000; ++m) {
        cplx f = 1.0 - qm;
        prod *= f;
        la += std::log(std::abs(f));
        // remaining factors differ from 1 by at most sum_{j>m} |q|^j
        if (aqm * aq / (1.0 - aq) < 1e-17) break;
        qm *= q;
        aqm *= aq;
    }
    if (log_abs) *log_abs = -kPi * w.y / 12.0 + la;
    return std::exp(cplx(0.0, 2.0 * kPi / 24.0) * w.z()) * prod;
}

}  // namespace

cplx dedekind_eta(const Point& w) {
    auto [wr, word] = reduce(w);
    // eta(w_reduced) = mult * eta(w); track the multiplier along the word
    cplx z = w.z();
    cplx mult = 1.0;
    for (const auto& st : word.letters) {
        if (st.letter == Letter::S) {
            for (std::int64_t i = 0; i < st.count; ++i) {
                mult *= std::sqrt(cplx(0.0, -1.0) * z);
                z = -1.0 / z;
            }
        } else {
            std::int64_t k = st.letter == Letter::T ? st.count : -st.count;
            mult *= std::exp(cplx(0.0, 2.0 * kPi * static_cast<double>(((k % 24) + 24) % 24) / 24.0));
            z += static_cast<double>(k);
        }
    }
    return eta_product(wr, nullptr) / mult;
}

double log_abs_eta(const Point& w) {
    auto wr = reduce(w).first;
    double la;
    eta_product(wr, &la);
    return la + 0.25 * std::log(wr.y / w.y);
}

double log_abs_4y_eta4(const Point& w) { return std::log(4.0 * w.y) + 4.0 * log_abs_eta(w); }

double gamma_factor_omega(const GammaFactorInput& in) {
    if (!(in.t_g > 0.0) || !(in.t_f >= 0.0)) throw DomainError("gamma factor input requires t_g > 0, t_f >= 0");
    return in.t_f > 2.0 * in.t_g ? in.t_f - 2.0 * in.t_g : 0.0;
}

double log_gamma_factor_exact(const GammaFactorInput& in) {
    gamma_factor_omega(in);
    double A = 2.0 * in.t_g + in.t_f, B = 2.0 * in.t_g - in.t_f;
    auto lg = [](double re, double im) { return log_gamma(cplx(re, im)).real(); };
    return std::log(kPi) + 2.0 * lg(0.25, 0.5 * A) + 2.0 * lg(0.25, 0.5 * B) - 4.0 * lg(0.5, in.t_g) +
           4.0 * lg(0.25, 0.5 * in.t_f) - 2.0 * lg(0.5, in.t_f);
}

double log_gamma_factor_main(const GammaFactorInput& in) {
    double om = gamma_factor_omega(in);
    return std::log(8.0 * kPi * kPi) - kPi * om - std::log1p(in.t_f) - 0.5 * std::log1p(2.0 * in.t_g + in.t_f) -
           0.5 * std::log1p(std::abs(2.0 * in.t_g - in.t_f));
}

double gamma_factor_ratio(const GammaFactorInput& in) {
    return std::exp(log_gamma_factor_exact(in) - log_gamma_factor_main(in));
}

}  // namespace modsurf
