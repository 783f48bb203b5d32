#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "modsurf/geometry.hpp"

namespace modsurf {

using BigInt = boost::multiprecision::cpp_int;

inline constexpr std::int64_t kMaxAbsDiscriminant = 100000000;

struct QuadForm {
    std::int64_t a = 1, b = 0, c = 1;

    std::int64_t D() const;
    bool primitive() const;
    // |b| <= a <= c with b >= 0 on the boundary (D < 0); the cycle condition for D > 0
    bool reduced() const;
    // Q(x, y); throws ResourceError if the value leaves int64
    std::int64_t eval(std::int64_t x, std::int64_t y) const;
    auto operator<=>(const QuadForm&) const = default;
};

bool is_discriminant(std::int64_t D);

// f o g^-1 for g in SL2(Z): the form whose roots are g applied to the roots of f.
QuadForm transform(const QuadForm& f, const Mat2& g);
// one step of the reduction operator for indefinite forms
QuadForm rho(const QuadForm& f);
// equivalent reduced form (unique for D < 0, some member of the cycle for D > 0)
QuadForm reduce_form(const QuadForm& f);
// composition of two primitive forms of the same discriminant, reduced
QuadForm compose(const QuadForm& f, const QuadForm& g);

// primitive reduced forms, one per class, principal form first
std::vector<QuadForm> enumerate_reduced(std::int64_t D);
// D > 0: the reduced primitive forms grouped into cycles; each cycle is one narrow class
std::vector<std::vector<QuadForm>> reduced_cycles(std::int64_t D);
int narrow_class_number(std::int64_t D);

struct ClassGroupTable {
    std::int64_t D = 0;
    bool narrow = true;
    int h = 0;
    std::vector<QuadForm> representatives;  // index 0 is the principal class
    std::vector<std::vector<int>> compose;
    std::vector<int> squares_subgroup;      // sorted class indices
    std::vector<int> genus;                 // genus label per class, 0 = principal genus
    std::map<QuadForm, int> lookup;         // every reduced primitive form -> class index

    int op(int i, int j) const { return compose[i][j]; }
    int inverse(int i) const;
    int index_of(const QuadForm& f) const;  // any primitive form of discriminant D
    int genus_count() const;
};

ClassGroupTable class_group(std::int64_t D, bool narrow = true);

Point heegner_point(const QuadForm& f);

struct PellUnit {
    std::int64_t D = 0;
    BigInt x, y;    // x^2 - D y^2 = 4, smallest with x, y > 0: eps+ = (x + y sqrt D)/2
    BigInt fx, fy;  // the fundamental unit (fx + fy sqrt D)/2
    int norm_of_fundamental_unit = 1;
    double log_value = 0.0;        // log eps+
    double log_fundamental = 0.0;  // log eps
    double value() const;          // may overflow to inf for large D
};

PellUnit pell_unit(std::int64_t D);

struct GeodesicSample {
    Point z;         // reduced
    QuadForm frame;  // equivalent form whose geodesic passes through z
    double t;        // arclength from the start of the period
};

struct GeodesicSegment {
    QuadForm form;
    double root_minus = 0.0, root_plus = 0.0;  // (-b -+ sqrt D)/(2a)
    double center = 0.0, radius = 0.0;
    double length = 0.0;                       // 2 log eps+

    // arclength parameter, t = 0 at the top of the semicircle, increasing toward root_plus
    Point at(double t) const;
    // midpoint rule in arclength over one period with spacing <= step
    std::vector<GeodesicSample> sample(double step, std::size_t max_samples = 1000000) const;
};

GeodesicSegment geodesic_of_form(const QuadForm& f);
GeodesicSegment geodesic_of_form(const QuadForm& f, const PellUnit& unit);

struct GenusChar {
    std::int64_t d1 = 1, d2 = 1;
    bool trivial() const { return d1 == 1 || d2 == 1; }
};

std::vector<std::int64_t> prime_discriminants(std::int64_t D);
std::vector<GenusChar> genus_characters(std::int64_t D);
int chi_eval(const GenusChar& chi, int class_index, const ClassGroupTable& table);

struct MinusCFCycle {
    std::vector<std::int64_t> entries;  // lexicographically least rotation
    int length() const { return static_cast<int>(entries.size()); }
    double volume() const;              // pi * length
};

// seed_shift k >= 1 picks the admissible seed w = x/(kx + 1) for a reduced x in the class
MinusCFCycle minus_cf_cycle(int class_index, const ClassGroupTable& table, int seed_shift = 1);
// the periodic part of the ceiling continued fraction of (P + sqrt D)/Q; Q must divide D - P^2
MinusCFCycle minus_cf_cycle_of(std::int64_t P, std::int64_t Q, std::int64_t D);

struct ClassNumberReport {
    std::int64_t D = 0;
    int h_table = 0;  // narrow class number
    double h_formula = 0.0;
    double abs_diff = 0.0;
    double L1 = 0.0;
    int w_K = 2;              // D < 0 only
    double log_eps_plus = 0;  // D > 0 only
};

ClassNumberReport class_number_formula_check(std::int64_t D);
int units_count(std::int64_t D);  // w_K for D < 0

}  // namespace modsurf
