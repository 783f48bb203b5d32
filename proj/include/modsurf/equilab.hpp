#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "modsurf/autoforms.hpp"
#include "modsurf/geometry.hpp"
#include "modsurf/quadinv.hpp"

namespace modsurf {

using Evaluable = std::function<cplx(const Point&)>;

enum class Centering { InverseVolume, DConst, CConst };
const char* centering_name(Centering c);

struct GenusSelection {
    enum class Kind { All, Principal, Coset } kind = Kind::All;
    int coset_rep = 0;  // class index whose genus is selected (Kind::Coset)
};
std::vector<int> select_classes(const ClassGroupTable& table, const GenusSelection& sel);

// R = |param|^{-delta}
double schedule_radius(double param, double delta);

struct ExperimentConfig {
    std::size_t samples = 1000;
    std::uint64_t seed = 1;
    double quadrature_tol = 1e-6;
    GenusSelection genus;
    // ball rule for Monte-Carlo averages; 0 picks a size from R and the oscillation frequency
    int ball_nr = 0, ball_ntheta = 0;
    // keep doubling the sample count until std_error <= target (0 disables), up to max_samples
    double std_error_target = 0.0;
    std::size_t max_samples = 1000000;
    std::vector<double> exceedance_levels;  // empty: a default ladder scaled by the rms deviation
    double geodesic_step = 0.0;             // 0: R/20
};

struct ExceedancePoint {
    double c;
    double measure;  // vol{w : |deviation(w)| > c}
};

struct VarianceReport {
    double estimate = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
    Centering centering = Centering::InverseVolume;
    std::vector<ExceedancePoint> exceedance;
    bool partial = false;  // std_error target not reached within max_samples
};

struct GridEstimate {
    double value;
    double error;  // |fine - coarse| grid difference
};

// Worker count from MODSURF_THREADS (default: hardware concurrency, at least 1).
unsigned worker_count();
// Fixed-shape pairwise reduction; the result does not depend on the thread count.
double pairwise_sum(const std::vector<double>& v);

double ball_average_density(const Evaluable& g, const BallSpec& ball, double tol);

struct PlanckCheck {
    double lhs;  // |h_R(t) E(w, 1/2 + it)|^2
    double rhs;  // ball average of |E|^2
    double error;
    bool violated;  // lhs > rhs + slack
};
PlanckCheck planck_check(double t, double R, const Point& w, double tol, double slack = 1e-8);

// Cusp-form data (or any L2-normalized g): centering 1/vol.
VarianceReport var_estimator(const Evaluable& g, double R, const ExperimentConfig& cfg);
GridEstimate var_grid(const Evaluable& g, double R, int nx, int nv, const ExperimentConfig& cfg);

// g = E(., 1/2 + i t_g) with centering C (default) or D.
VarianceReport var_estimator_eisenstein(double t_g, double R, const ExperimentConfig& cfg,
                                        Centering centering = Centering::CConst);
GridEstimate var_grid_eisenstein(double t_g, double R, int nx, int nv, const ExperimentConfig& cfg,
                                 Centering centering = Centering::CConst);

int heegner_ball_count(std::int64_t D, const GenusSelection& genus, const BallSpec& ball);

struct GeodesicBallLength {
    double length;
    double error;  // step times the number of boundary crossings
    std::size_t samples;
};
GeodesicBallLength geodesic_ball_length(std::int64_t D, const GenusSelection& genus, const BallSpec& ball, double step);

struct WeylEntry {
    GenusChar chi;
    cplx direct;
    std::optional<cplx> oracle;
    double rel_diff = 0.0;  // |direct - oracle| / |oracle|; the absolute difference when the oracle vanishes
};

struct WeylSumReport {
    std::int64_t D = 0;
    cplx s;
    std::vector<WeylEntry> entries;
    std::vector<cplx> genus_aggregates;  // per genus label, plain sums
    std::string note;
};

// chi == nullopt: every genus character
WeylSumReport weyl_sum_eisenstein(std::int64_t D, std::optional<GenusChar> chi, cplx s, double geodesic_step = 0.01);
cplx weyl_oracle(std::int64_t D, const GenusChar& chi, cplx s);
WeylSumReport weyl_sum_maass(const MaassFormData& data, std::int64_t D, std::optional<GenusChar> chi,
                             double geodesic_step = 0.01);

// Var(G_K(z_A); R) for D < 0 (heegner) or Var(G_K(C_A); R) for D > 0 (geodesic)
enum class GenusKind { Heegner, Geodesic };
VarianceReport genus_variance_estimator(std::int64_t D, GenusKind kind, double R, const ExperimentConfig& cfg);
GridEstimate genus_variance_grid(std::int64_t D, GenusKind kind, double R, int nx, int nv, const ExperimentConfig& cfg);

}  // namespace modsurf
