#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace modsurf::quad {

using cplx = std::complex<double>;

struct Rule {
    std::vector<double> x;  // nodes on [-1, 1]
    std::vector<double> w;
};

// Gauss-Legendre rule with n nodes. Rules are memoized behind a mutex.
const Rule& gauss_legendre(int n);

struct Result {
    cplx value;
    double error = 0.0;
    double l1 = 0.0;  // integral of |f|, used to judge cancellation
    int intervals = 0;
    bool converged = true;
};

struct Options {
    double abs_tol = 1e-13;
    double rel_tol = 1e-13;
    int max_intervals = 4000;
    // Relative tolerance is measured against |value| + l1_weight * l1.
    double l1_weight = 0.0;
};

// Globally adaptive Gauss-Kronrod (7/15) on [a, b] split first at the given breakpoints.
Result integrate(const std::function<cplx(double)>& f, double a, double b,
                 const Options& opt = {}, const std::vector<double>& breaks = {});

Result integrate_real(const std::function<double(double)>& f, double a, double b,
                      const Options& opt = {}, const std::vector<double>& breaks = {});

}  // namespace modsurf::quad
