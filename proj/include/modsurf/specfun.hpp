#pragma once

#include <complex>
#include <cstdint>
#include <numbers>

#include "modsurf/geometry.hpp"

namespace modsurf {

using cplx = std::complex<double>;

struct PrecisionPolicy {
    double target_abs_tol = 1e-14;
    double target_rel_tol = 1e-13;
    int max_terms = 200000;

    void validate() const;
};

inline constexpr double kEulerGamma = std::numbers::egamma;

// n^{-s}, with the phase s.imag * log n reduced in extended precision.
cplx npow_neg(double n, cplx s);

// Principal branch of log Gamma (continuous off the negative real axis). Honors rel tol.
cplx log_gamma(cplx s);
cplx digamma(cplx s);
double digamma(double x);

// Euler-Maclaurin zeta; honors rel tol on -2 <= Re s <= 3, |Im s| <= 1e4.
cplx zeta(cplx s, const PrecisionPolicy& pol = {});
cplx zeta_log_derivative(cplx s, const PrecisionPolicy& pol = {});
struct ZetaPair {
    cplx value;
    cplx derivative;
};
ZetaPair zeta_with_derivative(cplx s, const PrecisionPolicy& pol = {});

// zeta'(2), computed, not tabulated.
double zeta_prime_2();

// Lambda(s) = pi^{-s/2} Gamma(s/2) zeta(s). The log variant avoids overflow for large |Im s|.
cplx completed_zeta(cplx s);
cplx log_completed_zeta(cplx s);
cplx completed_zeta_log_derivative(cplx s);

// phi(s) = Lambda(2 - 2s) / Lambda(2s); phi(1/2) = -1 by continuity.
cplx phi(cplx s);
cplx log_phi(cplx s);

bool is_fundamental_discriminant(std::int64_t d);
// Kronecker symbol (d/n) for n >= 1.
int kronecker_symbol(std::int64_t d, std::int64_t n);

cplx hurwitz_zeta(cplx s, double alpha);
cplx dirichlet_L(cplx s, std::int64_t d);
// L(1, chi_d) for d != 1 through the digamma sum; real and fast.
double dirichlet_L1(std::int64_t d);

// K_nu(x) = mantissa * exp(log_scale). For underflowing values underflow is set and value() is 0.
struct BesselK {
    cplx mantissa;
    double log_scale;
    bool underflow;
    cplx value() const;
};
BesselK bessel_K_scaled(cplx nu, double x);
cplx bessel_K(cplx nu, double x);
// Reference log-magnitude used for scaling: magnitude of the saddle contribution of K_{ia}(x).
double bessel_K_log_envelope(double a, double x);

double bessel_J(int k, double x);

cplx dedekind_eta(const Point& w);
double log_abs_eta(const Point& w);
// log|4 Im(w) eta(w)^4|, Gamma-invariant.
double log_abs_4y_eta4(const Point& w);

struct GammaFactorInput {
    double t_f;
    double t_g;
};
double gamma_factor_omega(const GammaFactorInput& in);
// log of the exact archimedean product, and log of the main term 8 pi^2 e^{-pi Omega}/(...)
double log_gamma_factor_exact(const GammaFactorInput& in);
double log_gamma_factor_main(const GammaFactorInput& in);
double gamma_factor_ratio(const GammaFactorInput& in);

}  // namespace modsurf
