#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

namespace modsurf {

using cplx = std::complex<double>;

inline constexpr double kVolModular = 1.0471975511965977461542144610932;  // pi/3

struct Point {
    double x = 0.0;
    double y = 1.0;

    Point() = default;
    Point(double x_, double y_);
    static Point from(cplx z) { return Point(z.real(), z.imag()); }
    cplx z() const { return {x, y}; }
    // standard fundamental domain membership: |x| <= 1/2 and x^2 + y^2 >= 1
    bool reduced() const;
};

enum class Letter { S, T, Tinv };

struct Mat2 {
    std::int64_t a = 1, b = 0, c = 0, d = 1;

    static Mat2 identity() { return {}; }
    static Mat2 of(Letter l);
    Mat2 operator*(const Mat2& o) const;  // checked against int64 overflow
    std::int64_t det() const { return a * d - b * c; }
    Mat2 inverse() const { return {d, -b, -c, a}; }
    cplx apply(cplx z) const;
    Point apply(const Point& p) const { return Point::from(apply(p.z())); }
    bool operator==(const Mat2& o) const = default;
};

// A word in S, T, T^-1 stored run-length encoded; letters[0] acts first.
struct GroupWord {
    struct Step {
        Letter letter;
        std::int64_t count;
    };
    Mat2 matrix;
    std::vector<Step> letters;

    void push(Letter l, std::int64_t count = 1);
    Point apply(const Point& p) const { return matrix.apply(p); }
    std::size_t length() const;
    bool is_identity() const { return letters.empty(); }
};

struct BallSpec {
    Point center;
    double radius;
    double volume;

    BallSpec(const Point& c, double R);
};

double pair_invariant_u(const Point& z, const Point& w);
double distance_rho(const Point& z, const Point& w);
double ball_volume(double R);

std::pair<Point, GroupWord> reduce(const Point& z);

// Point at geodesic polar coordinates (r, theta) around w; theta in [0, 2 pi).
Point polar_point(const Point& w, double r, double theta);

struct BallIntegral {
    cplx value;
    double error;
};

// Adaptive geodesic-polar quadrature of f over the closed ball; dmu = sinh r dr dtheta.
BallIntegral ball_integral(const std::function<cplx(const Point&)>& f, const BallSpec& ball, double tol);
double ball_quadrature(const std::function<double(const Point&)>& f, const BallSpec& ball, double tol);

// Fixed tensor rule (Gauss-Legendre in r, trapezoid in theta), no error control.
struct WeightedPoint {
    Point p;
    double w;
};
std::vector<WeightedPoint> ball_fixed_rule(const BallSpec& ball, int nr, int ntheta);

// Tensor Gauss rule over the whole fundamental domain in (x, v = 1/y), weights include dmu.
std::vector<WeightedPoint> domain_grid(int nx, int nv);
// Region of the fundamental domain with y <= T (T >= 1), and the strip T <= y <= Y.
std::vector<WeightedPoint> domain_grid_below(double T, int nx, int ny);
std::vector<WeightedPoint> strip_grid(double T, double Y, int nx, int ny);

// Counter-based generator: the k-th draw of stream (seed, index) is a pure function.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream);
    std::uint64_t next();
    double uniform();  // in (0, 1)

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

// The i-th mu-distributed point of the fundamental domain for this seed.
Point sample_mu_point(std::uint64_t seed, std::uint64_t index, std::uint64_t* proposals = nullptr);
std::vector<Point> sample_mu(std::size_t n, std::uint64_t seed);

struct MuSampleStats {
    std::vector<Point> points;
    std::uint64_t proposals = 0;
    // mu-volume of the proposal region |x| <= 1/2, y >= sqrt(3)/2
    static constexpr double proposal_volume = 1.1547005383792515290182975610039;
};
MuSampleStats sample_mu_with_stats(std::size_t n, std::uint64_t seed);

}  // namespace modsurf
