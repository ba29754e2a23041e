#pragma once

#include "beams/beams.hpp"

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace beams {

// Gamma[mu](a, b) = Gamma^mu_{ab}.
Tensor3 christoffel(const MetricModel& model, const Vec4& x);

// D_s Y = dY/ds + Gamma(gdot, Y).
Vec4 covariant_rate(const MetricModel& model, const Vec4& x, const Vec4& xdot, const Vec4& Y, const Vec4& Ydot);

// Covector part of the linearized flow for a variation Y with covariant rate DY.
Vec4 jacobi_covector(const MetricModel& model, const CotangentState& state, const Vec4& Y, const Vec4& DY);

struct JacobiSample {
    double s = 0.0;
    Vec4 Y = Vec4::Zero();
    Vec4 DY = Vec4::Zero();
};

// Real column solution (dx, dp) of the linearized geodesic flow; dx is the Jacobi field.
struct JacobiField {
    MetricModel model;
    // State (x, p, Y, dp).
    std::shared_ptr<const DenseSolution> dense;
    std::vector<JacobiSample> samples;

    double s_begin() const { return samples.front().s; }
    double s_end() const { return samples.back().s; }
    Vec4 Y_at(double s) const;
    Vec4 DY_at(double s) const;
};

// (Y0, DY0) prescribed at s0 (default: the record start) and carried to the record end.
JacobiField integrate_jacobi(const MetricModel& model, const GeodesicRecord& record, const Vec4& Y0, const Vec4& DY0,
                             std::optional<double> s0 = std::nullopt, double tol = 1e-12);

struct JacobiRun {
    std::shared_ptr<const GeodesicRecord> geodesic;
    // Rates DY(s0) of the two fields seeded with Y(s0) = 0.
    std::array<Vec4, 2> basis;
    std::array<JacobiField, 2> fields;
    std::vector<double> s;
    // det g(Y_i, e_j(s)) against the screen frame along gamma.
    std::vector<double> screen_det;
    std::vector<double> conjugate_points;
    // Local minima of |det| touching zero without a sign change.
    std::vector<double> grazing;
};

// Screen fields seeded at s0 with the screen frame there, or with an explicit basis.
JacobiRun jacobi_screen_run(const MetricModel& model, std::shared_ptr<const GeodesicRecord> record, double s0,
                            const std::optional<std::array<Vec4, 2>>& basis = std::nullopt);
std::vector<double> conjugate_point_scan(const MetricModel& model, const GeodesicRecord& record, double s0);

struct RealRiccatiResult {
    std::vector<double> s;
    std::vector<Mat4> M;
    std::vector<double> det_J;
    double initial_scale = 1.0;
    // First parameter with |det J| below 1e-10 of its initial value.
    std::optional<double> blowup_s;
};

// Real (J, V) system with V(s_begin) = M0_real, the geometric-optics comparison.
RealRiccatiResult geometric_optics_real_riccati(const MetricModel& model, const GeodesicRecord& record, const Mat4& M0_real,
                                                double tol = 1e-12);

// |det J| of the complex beam at s, accumulated across restarts.
double beam_det_J(const BeamJetRecord& jets, double s);

// Columns: s, screen det, |det J| of the complex beam, |det J| of the real comparison (empty where unavailable).
std::string caustic_csv(const JacobiRun& run, const BeamJetRecord* complex_beam, const RealRiccatiResult* real);

}  // namespace beams
