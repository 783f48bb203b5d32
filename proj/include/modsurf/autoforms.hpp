#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "modsurf/geometry.hpp"

namespace modsurf {

struct EisensteinValue {
    cplx value;
    int terms;  // Fourier cutoff actually used
};

// E(z, s) through its Fourier expansion at the reduced image of z.
cplx eisenstein_eval(const Point& z, cplx s);
EisensteinValue eisenstein_eval_detail(const Point& z, cplx s);
cplx eisenstein_constant_term(double y, cplx s);

// E(., s) for many points: the K-Bessel factor is tabulated once as piecewise Chebyshev series.
class EisensteinField {
public:
    explicit EisensteinField(cplx s);
    cplx operator()(const Point& z) const;
    // nonconstant part at a point whose imaginary part is at least sqrt(3)/2
    cplx nonconstant(const Point& reduced) const;
    cplx constant_term(double y) const;
    cplx s() const { return s_; }
    std::size_t panel_count() const;

private:
    struct Table;
    cplx s_;
    cplx phi_;
    bool vanishes_;
    std::shared_ptr<const Table> table_;
};

struct TruncatedEisenstein {
    double t_g;
    double T;
    TruncatedEisenstein(double t, double T);
    cplx s() const { return {0.5, t_g}; }
};

cplx truncated_eval(const Point& z, const TruncatedEisenstein& spec);
cplx truncated_eval(const Point& z, double T, const EisensteinField& field);

cplx maass_selberg_rhs(cplx s, cplx r, double T);
// Quadrature of the left side over the fundamental domain (y <= T plus the cusp strip).
cplx maass_selberg_lhs(cplx s, cplx r, double T, int nodes = 64);
// Exact norm of the truncated series on the critical line, and its main part without the O(1/t_g) cross terms.
double l2_norm_truncated(double t_g, double T);
double l2_norm_truncated_main(double t_g, double T);

double D_const(double t_g, const Point& w);
double C_const(double t_g, double R, const Point& w);

struct EisensteinConstants {
    double D_value;
    double C_value;
    Point w;
    double t_g;
    double R;
    // the two correction terms separating C from D
    double derivative_term;
    double oscillatory_term;
};
EisensteinConstants eisenstein_constants(double t_g, double R, const Point& w);

double kronecker_limit_check(const Point& w, double eps);

enum class Parity { Even, Odd };

struct MaassFormData {
    double t_f = 0.0;
    Parity parity = Parity::Even;
    std::vector<double> coeffs;  // coeffs[n - 1] = lambda(n)
    std::string source;

    std::size_t N() const { return coeffs.size(); }
    double lambda(std::size_t n) const { return coeffs.at(n - 1); }
};

// Line-oriented coefficient file; validates lambda(1) = 1, contiguity and the Hecke relation.
MaassFormData parse_maass(std::istream& in, const std::string& source, double hecke_tol = 1e-6);
MaassFormData load_maass_file(const std::string& path, double hecke_tol = 1e-6);

double maass_eval(const MaassFormData& data, const Point& z);

}  // namespace modsurf
