#pragma once

#include "beams/beams.hpp"

#include <functional>
#include <memory>
#include <optional>

namespace beams {

struct BeamField {
    std::shared_ptr<const BeamJetRecord> jets;
    double lambda = 1.0;
    // Support radius of the cutoff, Euclidean in chart coordinates.
    double cutoff_radius = 0.5;
    // Initial slice level and the N-energy target used by normalize().
    double tau0 = 0.0;
    double energy_target = 1.0;
    // Overall amplitude factor (1 before normalization).
    double scale = 1.0;
};

// Energy target defaults to -g(N, gdot) where gamma crosses the slice t* = tau0.
BeamField make_beam_field(std::shared_ptr<const BeamJetRecord> jets, double lambda, double cutoff_radius, double tau0,
                          std::optional<double> energy_target = std::nullopt);

// Parameter where the beam's own geodesic crosses t* = tau.
double beam_slice_crossing(const BeamJetRecord& jets, double tau);

struct FootPoint {
    double s = 0.0;
    // True when the minimizer sits at an end of the record.
    bool clamped = false;
    Vec4 dx = Vec4::Zero();
    double distance = 0.0;
};
// Minimizer of the Euclidean chart distance |x - gamma(s)|, polished by Newton on the dense output.
FootPoint foot_point(const BeamJetRecord& jets, const Vec4& x, std::optional<double> hint = std::nullopt);

// C-infinity cutoff: 1 on [0, 1/2], 0 on [1, inf).
double bump(double q);
double bump_derivative(double q);

cplx phase_at(const BeamField& field, const Vec4& x, std::optional<double> hint = std::nullopt);
cplx u_lambda_at(const BeamField& field, const Vec4& x, std::optional<double> hint = std::nullopt);

struct FieldValue {
    cplx u{0.0, 0.0};
    CVec4 du = CVec4::Zero();
    double s_foot = 0.0;
};
// u and its analytic differential (chain rule through the foot point and the jets).
FieldValue field_value(const BeamField& field, const Vec4& x, std::optional<double> hint = std::nullopt);

enum class BoxStencil {
    // 4th-order central differences of the flux sqrt|g| g^{mn} du_n built from the analytic du.
    FluxFourthOrder,
    // 2nd-order central differences of u itself.
    CentralSecondOrder,
};

using GradientFunction = std::function<CVec4(const Vec4&)>;
using ScalarFunction = std::function<cplx(const Vec4&)>;
cplx box_fd_flux(const MetricModel& model, const GradientFunction& du, const Vec4& x, double h);
cplx box_fd_central(const MetricModel& model, const ScalarFunction& u, const Vec4& x, double h);

// Default difference step 0.5 lambda^{-11/8} / |p|_max.
double default_box_step(const BeamField& field);
// StepTooLarge when h exceeds a twentieth of the wavelength 2 pi / lambda.
cplx box_u_fd(const BeamField& field, const MetricModel& model, const Vec4& x, double h,
              BoxStencil stencil = BoxStencil::FluxFourthOrder);

enum class SliceRule {
    // Hermite nodes in the Gaussian-scaled coordinates.
    GaussHermite,
    // Composite 8-point Legendre panels on a box clipped to the tube.
    GaussLegendre,
};

struct QuadratureSpec {
    SliceRule rule = SliceRule::GaussLegendre;
    // Per-axis node counts tried in turn until two successive levels agree to rel_tol.
    std::vector<int> slice_nodes{16, 32, 64, 128};
    // Gauss-Legendre nodes in tau for the space-time residual, doubled with each level.
    int time_nodes = 8;
    double rel_tol = 0.01;
    BoxStencil stencil = BoxStencil::FluxFourthOrder;
    // Difference step for the residual; 0 selects default_box_step.
    double box_step = 0.0;
};

struct QuadratureResult {
    double value = 0.0;
    double previous = 0.0;
    int level = 0;
};

// N-energy flux through the slice t* = tau, restricted to the tube.
QuadratureResult energy_on_slice_detail(const BeamField& field, const MetricModel& model, const FoliationSpec& foliation,
                                        double tau, const QuadratureSpec& spec = {});
double energy_on_slice(const BeamField& field, const MetricModel& model, const FoliationSpec& foliation, double tau,
                       const QuadratureSpec& spec = {});

// L2 norm of box u over the tube between the slices t* = tau0 and t* = tau1.
QuadratureResult l2_residual_detail(const BeamField& field, const MetricModel& model, double tau0, double tau1,
                                    const QuadratureSpec& spec = {});
double l2_residual(const BeamField& field, const MetricModel& model, double tau0, double tau1, const QuadratureSpec& spec = {});

// Rescales the amplitude so the N-energy on the initial slice equals energy_target.
BeamField normalize(const BeamField& field, const QuadratureSpec& spec = {});

}  // namespace beams
