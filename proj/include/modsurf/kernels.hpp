#pragma once

#include <functional>
#include <vector>

#include "modsurf/geometry.hpp"

namespace modsurf {

// Normalized indicator of the ball of radius R, as a function of the pair invariant u.
struct KernelProfile {
    double R;
    double u_max;          // sinh^2(R/2)
    double normalization;  // 1 / vol(B_R)

    explicit KernelProfile(double R);
    double operator()(double u) const { return (u >= 0.0 && u <= u_max) ? normalization : 0.0; }
};

double k_R(double u, const KernelProfile& profile);

// A radial kernel k(u) supported on [0, support].
struct RadialKernel {
    std::function<double(double)> k;
    double support;
};

struct TransformResult {
    enum class Provenance { ClosedForm, Pipeline };
    std::function<cplx(cplx)> h;
    Provenance provenance;

    cplx operator()(cplx t) const { return h(t); }
};

// Three-step Selberg/Harish-Chandra transform. The stages are exposed for testing.
double shc_q(const RadialKernel& k, double v);
double shc_g(const RadialKernel& k, double r);
TransformResult shc_pipeline(const RadialKernel& k);

// Closed form of the transform of k_R, for |Im t| <= 1 and (2 t_g +- i/2)-type arguments.
cplx h_R(cplx t, double R);
double h_R(double t, double R);
TransformResult closed_form_transform(double R);

// i h_R'(i/2), a positive real number close to R^2/8 for small R.
double h_R_prime_at_i_half(double R);

struct AsymptoticH {
    int regime;  // 1: Rt -> 0, 2: Bessel, 3: oscillatory
    double value;
};
AsymptoticH asymptotic_h(double R, double t);

// Sum over PSL2(Z) of k_R(u(gamma z, w)); every contributing gamma is enumerated exactly.
double automorphic_kernel(const Point& z, const Point& w, double R);
std::vector<Mat2> automorphic_kernel_terms(const Point& z, const Point& w, double R);

}  // namespace modsurf
