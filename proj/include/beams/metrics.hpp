#pragma once

#include "beams/errors.hpp"
#include "beams/types.hpp"

#include <array>
#include <string>
#include <vector>

namespace beams {

enum class ModelKind { Minkowski, ReissnerNordstrom, Kerr };

enum class ChartKind {
    MinkowskiCartesian,
    SchwarzschildTStar,
    RNExteriorT,
    RNIngoingV,
    RNOutgoingU,
    KerrBoyerLindquist,
    KerrIngoing,
    KerrOutgoing,
};

const char* to_string(ChartKind chart);
std::array<const char*, 4> coordinate_labels(ChartKind chart);
// Index of the coordinate that plays the role of time (0 for every chart here).
int time_index(ChartKind chart);

struct MetricModel {
    ModelKind kind = ModelKind::Minkowski;
    ChartKind chart = ChartKind::MinkowskiCartesian;
    double m = 0.0;
    double e = 0.0;
    double a = 0.0;

    static MetricModel minkowski();
    static MetricModel schwarzschild(double m, ChartKind chart = ChartKind::SchwarzschildTStar);
    static MetricModel reissner_nordstrom(double m, double e, ChartKind chart = ChartKind::RNIngoingV);
    static MetricModel kerr(double m, double a, ChartKind chart = ChartKind::KerrBoyerLindquist);

    // Same spacetime expressed in another chart of its atlas.
    MetricModel in_chart(ChartKind other) const;

    std::string name() const;
    // Length unit used for tolerances (m, or 1 for flat space).
    double length_scale() const;
    double r_plus() const;
    double r_minus() const;
    bool extremal() const;
};

bool chart_belongs_to(ModelKind kind, ChartKind chart);

// Horizon function: D(r) for the RN family, Delta(r) for Kerr.
double horizon_function(const MetricModel& model, double r);
double horizon_function_derivative(const MetricModel& model, double r);

bool in_domain(const MetricModel& model, const Vec4& x);
// |H(r)| relative to its scale for charts that degenerate at a horizon; infinity otherwise.
double chart_regularity(const MetricModel& model, const Vec4& x);
void require_domain(const MetricModel& model, const Vec4& x);

Mat4 metric_at(const MetricModel& model, const Vec4& x);
Mat4 inverse_metric_at(const MetricModel& model, const Vec4& x);
Tensor3 d_inverse_metric_at(const MetricModel& model, const Vec4& x);
Tensor4 d2_inverse_metric_at(const MetricModel& model, const Vec4& x);
Vec4 log_sqrt_det_gradient_at(const MetricModel& model, const Vec4& x);
double sqrt_abs_det_at(const MetricModel& model, const Vec4& x);

// g^{-1} together with its first (order >= 1) and second (order 2) derivatives.
struct InverseMetricJet {
    Mat4 ginv;
    Tensor3 d;
    Tensor4 dd;
};
InverseMetricJet inverse_metric_jet(const MetricModel& model, const Vec4& x, int order);

// Tortoise-type radial functions with zero additive constant.
// dr*/dr = (r^2 + a^2)/Delta for Kerr and 1/D for the RN family.
double tortoise(const MetricModel& model, double r);
double tortoise_derivative(const MetricModel& model, double r);
// Kerr azimuthal shift rbar with d rbar/dr = a/Delta.
double azimuth_shift(const MetricModel& model, double r);
double azimuth_shift_derivative(const MetricModel& model, double r);

// Every chart time function here has the form t* = c0 x^0 + F(x^1).
struct TimeFunctionShape {
    double c0 = 1.0;
    double F = 0.0;
    double dF = 0.0;
};
TimeFunctionShape time_function_shape(const MetricModel& model, double x1);
double time_function(const MetricModel& model, const Vec4& x);
Vec4 time_function_gradient(const MetricModel& model, const Vec4& x);

enum class EnergyFieldKind {
    // N = -(dt*)^sharp
    TimeFunctionNormal,
    // RN field regular across the Cauchy horizon, given in the ingoing chart.
    CauchyRegular,
    // Extremal RN field d_u + d_r in the outgoing chart.
    ExtremalOutgoing,
};

struct FoliationSpec {
    EnergyFieldKind energy_field = EnergyFieldKind::TimeFunctionNormal;
    std::vector<double> slice_levels;
};

Vec4 energy_field_at(const MetricModel& model, const FoliationSpec& foliation, const Vec4& x);
// Reference field -(dt*)^sharp, the time-function normal direction.
Vec4 time_normal_at(const MetricModel& model, const Vec4& x);

// Re-express a cotangent state given in model.chart in the chart `to`.
CotangentState chart_transition(const MetricModel& model, ChartKind to, const CotangentState& state);
CotangentState chart_transition(const MetricModel& model, ChartKind from, ChartKind to, const CotangentState& state);

}  // namespace beams
