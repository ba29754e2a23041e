#pragma once

#include "beams/beam_field.hpp"
#include "beams/caustics.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace beams {

struct Series {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void add(std::vector<double> row) { rows.push_back(std::move(row)); }
    std::vector<double> column(const std::string& name) const;
};

std::string to_csv(const Series& series);

struct Fit {
    // Least-squares slope of y against x and its standard error.
    double rate = 0.0;
    double stderr_rate = 0.0;
    double intercept = 0.0;
    double residual = 0.0;
    std::size_t n = 0;
    std::string x;
    std::string y;
    // Range of x actually fitted.
    double window_lo = 0.0;
    double window_hi = 0.0;
};

// OLS on the final fraction of the samples (by count); the window is recorded in the fit.
Fit fit_tail(const std::vector<double>& x, const std::vector<double>& y, double tail_fraction, const std::string& x_name,
             const std::string& y_name);

struct Verdict {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct ScenarioResult {
    std::string name;
    std::map<std::string, double> params;
    std::vector<double> lambda_grid;
    std::map<std::string, Series> series;
    std::map<std::string, Fit> fits;
    std::vector<Verdict> verdicts;
    std::vector<std::string> diagnostics;
    double runtime_seconds = 0.0;

    bool passed() const;
    void check(const std::string& name, bool pass, double value, double threshold, const std::string& detail = {});
    const Verdict* verdict(const std::string& name) const;
};

std::vector<double> default_lambda_grid();

// Photon-orbit seed (E = 1) in the t* chart with the orbit passing t* = t0 at s = 0.
CotangentState photon_sphere_seed(double m, double t0 = 0.0);
// Horizon generator in the t* chart with t* = 4m log s.
CotangentState horizon_generator_seed(double m, double s);

struct BeamRunOptions {
    // Slice spacing for the energy series, in units of m.
    double slice_step = 2.0;
    // Tube radius in units of m.
    double cutoff_radius = 1.0;
    // Record padding beyond the slice window, in affine units of m.
    double padding = 2.0;
    QuadratureSpec quadrature;
};

struct PhotonSphereOptions {
    bool run_beam = true;
    // Time window for the beam energy comparison; 0 uses T.
    double beam_window = 0.0;
    BeamRunOptions beam;
};

ScenarioResult photon_sphere_run(double m, const std::vector<double>& lambda_grid, double T, const PhotonSphereOptions& options = {});

struct RedshiftOptions {
    // Generator fit window starts at t* = fit_start.
    double fit_start = 1.0;
    std::vector<double> lambda_grid;
    // Beam comparison window in units of m.
    double beam_window = 8.0;
    BeamRunOptions beam{1.0, 0.5, 1.0, {}};
    // Outgoing family r0 = 2m (1 + delta).
    std::vector<double> deltas{1e-2, 1e-3, 1e-4, 1e-5};
};

ScenarioResult horizon_redshift_run(double m, double T, const RedshiftOptions& options = {});

// Default advanced-time grid spanning six decades of r - r- along constant u.
std::vector<double> default_rn_v0_grid(double m, double e);
ScenarioResult rn_blueshift_run(double m, double e, const std::vector<double>& v0_grid);

std::vector<double> default_extremal_v0_grid(double m);
ScenarioResult rn_extremal_blueshift_run(double m, const std::vector<double>& v0_grid);

struct KerrOrbitData {
    double m = 0.0;
    double a = 0.0;
    double r0 = 0.0;
    double E = 1.0;
    double L = 0.0;
    double K = 0.0;
    // Theta(pi/2) = K - (L - a)^2.
    double theta_equator = 0.0;
    // R(r0) / m^4 and R'(r0) / m^3.
    std::array<double, 2> residuals{0.0, 0.0};
};

double kerr_radial_potential(double m, double a, double L, double K, double r);
double kerr_radial_potential_derivative(double m, double a, double L, double K, double r);
// p(r) = r (r - 3m)^2 - 4 a^2 m.
double kerr_trapping_polynomial(double m, double a, double r);

KerrOrbitData kerr_spherical_orbit(double m, double a, double r0);
std::pair<double, double> kerr_trapped_interval(double m, double a);
// Orbit seed in Boyer-Lindquist coordinates at (t, r0, pi/2, 0), p = (-1, 0, sign sqrt(Theta), L).
CotangentState kerr_orbit_seed(const KerrOrbitData& orbit, int theta_sign = 1);

ScenarioResult kerr_orbit_run(double m, double a, std::optional<double> r0 = std::nullopt);
ScenarioResult kerr_trapped_run(double m, double a, double r0, double T);

std::vector<double> default_kerr_v0_grid(double m);
ScenarioResult kerr_blueshift_run(double m, double a, const std::vector<double>& v0_grid);

struct BeamStudyOptions {
    BeamRunOptions beam;
    // Residual quadrature; the finest slice level is dropped for cost.
    QuadratureSpec quadrature = [] {
        QuadratureSpec q;
        q.slice_nodes = {16, 32, 64};
        return q;
    }();
};

// Wave-operator residual of the photon-sphere beam over t* in [0, T], raw and normalized.
ScenarioResult beam_study_run(double m, const std::vector<double>& lambda_grid, double T, const BeamStudyOptions& options = {});

// Conjugate points, real-Riccati breakdown and complex det J over `passages` conjugate spacings.
ScenarioResult caustic_scan_run(double m, int passages = 10);

}  // namespace beams
