#include "beams/metrics.hpp"

#include "beams/metric_components.hpp"

#include <unsupported/Eigen/AutoDiff>

#include <cmath>
#include <limits>
#include <sstream>

namespace beams {

namespace {

using AD1 = Eigen::AutoDiffScalar<Eigen::Matrix<double, 4, 1>>;
using AD2 = Eigen::AutoDiffScalar<Eigen::Matrix<AD1, 4, 1>>;

constexpr double kPolarEps = 1e-6;

bool spherical(ChartKind chart) { return chart != ChartKind::MinkowskiCartesian; }

bool is_kerr_chart(ChartKind chart)
{
    return chart == ChartKind::KerrBoyerLindquist || chart == ChartKind::KerrIngoing ||
           chart == ChartKind::KerrOutgoing;
}

std::string describe(const Vec4& x)
{
    std::ostringstream os;
    os.precision(12);
    os << "(" << x(0) << ", " << x(1) << ", " << x(2) << ", " << x(3) << ")";
    return os.str();
}

// Offsets of a chart relative to the ingoing chart of its family:
// x^0_chart = x^0_in + F0(r), x^3_chart = x^3_in + F3(r).
struct ChartOffset {
    double F0 = 0.0, dF0 = 0.0, F3 = 0.0, dF3 = 0.0;
};

ChartOffset chart_offset(const MetricModel& model, ChartKind chart, double r)
{
    ChartOffset o;
    switch (chart) {
    case ChartKind::MinkowskiCartesian:
    case ChartKind::RNIngoingV:
    case ChartKind::KerrIngoing:
        break;
    case ChartKind::RNExteriorT:
        o.F0 = -tortoise(model, r);
        o.dF0 = -tortoise_derivative(model, r);
        break;
    case ChartKind::SchwarzschildTStar:
        o.F0 = -r;
        o.dF0 = -1.0;
        break;
    case ChartKind::RNOutgoingU:
        o.F0 = -2.0 * tortoise(model, r);
        o.dF0 = -2.0 * tortoise_derivative(model, r);
        break;
    case ChartKind::KerrBoyerLindquist:
        o.F0 = -tortoise(model, r);
        o.dF0 = -tortoise_derivative(model, r);
        o.F3 = -azimuth_shift(model, r);
        o.dF3 = -azimuth_shift_derivative(model, r);
        break;
    case ChartKind::KerrOutgoing:
        o.F0 = -2.0 * tortoise(model, r);
        o.dF0 = -2.0 * tortoise_derivative(model, r);
        o.F3 = -2.0 * azimuth_shift(model, r);
        o.dF3 = -2.0 * azimuth_shift_derivative(model, r);
        break;
    }
    return o;
}

void check_parameters(const MetricModel& model)
{
    const auto bad = [](const std::string& what) { fail(ErrorKind::ParameterError, what); };
    if (!chart_belongs_to(model.kind, model.chart)) bad(std::string("chart ") + to_string(model.chart) + " does not belong to this model");
    if (model.kind == ModelKind::Minkowski) return;
    if (!(model.m > 0.0) || !std::isfinite(model.m)) bad("mass must be positive");
    if (model.kind == ModelKind::ReissnerNordstrom) {
        if (!(model.e >= 0.0) || model.e > model.m) bad("charge must satisfy 0 <= e <= m");
        if (model.chart == ChartKind::SchwarzschildTStar && model.e != 0.0) bad("the t* chart is defined for e = 0 only");
    }
    if (model.kind == ModelKind::Kerr && (!(model.a >= 0.0) || model.a > model.m)) bad("spin must satisfy 0 <= a <= m");
}

}  // namespace

const char* to_string(ChartKind chart)
{
    switch (chart) {
    case ChartKind::MinkowskiCartesian: return "MinkowskiCartesian";
    case ChartKind::SchwarzschildTStar: return "SchwarzschildTStar";
    case ChartKind::RNExteriorT: return "RNExteriorT";
    case ChartKind::RNIngoingV: return "RNIngoingV";
    case ChartKind::RNOutgoingU: return "RNOutgoingU";
    case ChartKind::KerrBoyerLindquist: return "KerrBoyerLindquist";
    case ChartKind::KerrIngoing: return "KerrIngoing";
    case ChartKind::KerrOutgoing: return "KerrOutgoing";
    }
    return "?";
}

std::array<const char*, 4> coordinate_labels(ChartKind chart)
{
    switch (chart) {
    case ChartKind::MinkowskiCartesian: return {"t", "x", "y", "z"};
    case ChartKind::SchwarzschildTStar: return {"t*", "r", "theta", "phi"};
    case ChartKind::RNExteriorT: return {"t", "r", "theta", "phi"};
    case ChartKind::RNIngoingV: return {"v", "r", "theta", "phi"};
    case ChartKind::RNOutgoingU: return {"u", "r", "theta", "phi"};
    case ChartKind::KerrBoyerLindquist: return {"t", "r", "theta", "phi"};
    case ChartKind::KerrIngoing: return {"v+", "r", "theta", "phi+"};
    case ChartKind::KerrOutgoing: return {"v-", "r", "theta", "phi-"};
    }
    return {"?", "?", "?", "?"};
}

int time_index(ChartKind) { return 0; }

bool chart_belongs_to(ModelKind kind, ChartKind chart)
{
    switch (kind) {
    case ModelKind::Minkowski: return chart == ChartKind::MinkowskiCartesian;
    case ModelKind::ReissnerNordstrom:
        return chart == ChartKind::SchwarzschildTStar || chart == ChartKind::RNExteriorT ||
               chart == ChartKind::RNIngoingV || chart == ChartKind::RNOutgoingU;
    case ModelKind::Kerr: return is_kerr_chart(chart);
    }
    return false;
}

MetricModel MetricModel::minkowski() { return MetricModel{}; }

MetricModel MetricModel::schwarzschild(double m, ChartKind chart)
{
    MetricModel model;
    model.kind = ModelKind::ReissnerNordstrom;
    model.chart = chart;
    model.m = m;
    check_parameters(model);
    return model;
}

MetricModel MetricModel::reissner_nordstrom(double m, double e, ChartKind chart)
{
    MetricModel model;
    model.kind = ModelKind::ReissnerNordstrom;
    model.chart = chart;
    model.m = m;
    model.e = e;
    check_parameters(model);
    return model;
}

MetricModel MetricModel::kerr(double m, double a, ChartKind chart)
{
    MetricModel model;
    model.kind = ModelKind::Kerr;
    model.chart = chart;
    model.m = m;
    model.a = a;
    check_parameters(model);
    return model;
}

MetricModel MetricModel::in_chart(ChartKind other) const
{
    MetricModel model = *this;
    model.chart = other;
    check_parameters(model);
    return model;
}

std::string MetricModel::name() const
{
    switch (kind) {
    case ModelKind::Minkowski: return "minkowski";
    case ModelKind::ReissnerNordstrom: return e == 0.0 ? "schwarzschild" : "reissner-nordstrom";
    case ModelKind::Kerr: return "kerr";
    }
    return "?";
}

double MetricModel::length_scale() const { return kind == ModelKind::Minkowski ? 1.0 : m; }

double MetricModel::r_plus() const
{
    if (kind == ModelKind::Minkowski) return 0.0;
    const double q = kind == ModelKind::Kerr ? a : e;
    return m + std::sqrt(std::max(0.0, m * m - q * q));
}

double MetricModel::r_minus() const
{
    if (kind == ModelKind::Minkowski) return 0.0;
    const double q = kind == ModelKind::Kerr ? a : e;
    return m - std::sqrt(std::max(0.0, m * m - q * q));
}

bool MetricModel::extremal() const
{
    if (kind == ModelKind::Minkowski) return false;
    return (kind == ModelKind::Kerr ? a : e) == m;
}

double horizon_function(const MetricModel& model, double r)
{
    if (model.kind == ModelKind::Kerr) return r * r - 2.0 * model.m * r + model.a * model.a;
    if (model.kind == ModelKind::ReissnerNordstrom) return 1.0 - 2.0 * model.m / r + model.e * model.e / (r * r);
    return 1.0;
}

double horizon_function_derivative(const MetricModel& model, double r)
{
    if (model.kind == ModelKind::Kerr) return 2.0 * r - 2.0 * model.m;
    if (model.kind == ModelKind::ReissnerNordstrom) return 2.0 * model.m / (r * r) - 2.0 * model.e * model.e / (r * r * r);
    return 0.0;
}

bool in_domain(const MetricModel& model, const Vec4& x)
{
    if (!x.allFinite()) return false;
    if (!spherical(model.chart)) return true;
    const double r = x(1);
    const double th = x(2);
    if (!(th >= kPolarEps && th <= M_PI - kPolarEps)) return false;
    if (!(r > 0.0)) return false;
    const double rp = model.r_plus();
    const double rm = model.r_minus();
    const double H = horizon_function(model, r);
    const double hscale = model.kind == ModelKind::Kerr ? r * r + model.m * model.m : 1.0;
    const bool nondegenerate = std::abs(H) > 1e-14 * hscale;
    switch (model.chart) {
    case ChartKind::RNExteriorT:
    case ChartKind::KerrBoyerLindquist: return r > rp && H > 0.0 && nondegenerate;
    case ChartKind::RNOutgoingU:
    case ChartKind::KerrOutgoing: return model.extremal() ? true : r < rp && r > rm && nondegenerate;
    default: return true;
    }
}

double chart_regularity(const MetricModel& model, const Vec4& x)
{
    if (model.chart != ChartKind::RNExteriorT && model.chart != ChartKind::KerrBoyerLindquist &&
        !((model.chart == ChartKind::RNOutgoingU || model.chart == ChartKind::KerrOutgoing) && !model.extremal()))
        return std::numeric_limits<double>::infinity();
    const double r = x(1);
    const double hscale = model.kind == ModelKind::Kerr ? r * r + model.m * model.m : 1.0;
    return std::abs(horizon_function(model, r)) / hscale;
}

void require_domain(const MetricModel& model, const Vec4& x)
{
    if (!in_domain(model, x)) fail(ErrorKind::DomainError, std::string("point ") + describe(x) + " outside the " + to_string(model.chart) + " chart of " + model.name());
}

Mat4 metric_at(const MetricModel& model, const Vec4& x)
{
    require_domain(model, x);
    return metric_components<double>(model, x);
}

Mat4 inverse_metric_at(const MetricModel& model, const Vec4& x)
{
    require_domain(model, x);
    return inverse_metric_components<double>(model, x);
}

InverseMetricJet inverse_metric_jet(const MetricModel& model, const Vec4& x, int order)
{
    require_domain(model, x);
    InverseMetricJet jet;
    for (int k = 0; k < 4; ++k) {
        jet.d[k].setZero();
        for (int l = 0; l < 4; ++l) jet.dd[k][l].setZero();
    }
    if (model.chart == ChartKind::MinkowskiCartesian || order <= 0) {
        jet.ginv = inverse_metric_components<double>(model, x);
        return jet;
    }
    if (order == 1) {
        Vector4<AD1> X;
        for (int i = 0; i < 4; ++i) X(i) = AD1(x(i), 4, i);
        const Matrix4<AD1> h = inverse_metric_components<AD1>(model, X);
        for (int mu = 0; mu < 4; ++mu)
            for (int nu = 0; nu < 4; ++nu) {
                jet.ginv(mu, nu) = h(mu, nu).value();
                const auto& dv = h(mu, nu).derivatives();
                for (int k = 0; k < 4; ++k) jet.d[k](mu, nu) = dv.size() ? dv(k) : 0.0;
            }
        return jet;
    }
    Vector4<AD2> X;
    for (int i = 0; i < 4; ++i) {
        X(i) = AD2(AD1(x(i), 4, i));
        X(i).derivatives().resize(4);
        for (int j = 0; j < 4; ++j) X(i).derivatives()(j) = AD1(i == j ? 1.0 : 0.0, Eigen::Vector4d::Zero());
    }
    const Matrix4<AD2> h = inverse_metric_components<AD2>(model, X);
    for (int mu = 0; mu < 4; ++mu)
        for (int nu = 0; nu < 4; ++nu) {
            const AD2& v = h(mu, nu);
            jet.ginv(mu, nu) = v.value().value();
            const auto& outer = v.derivatives();
            if (outer.size() == 0) continue;
            for (int k = 0; k < 4; ++k) {
                jet.d[k](mu, nu) = outer(k).value();
                const auto& inner = outer(k).derivatives();
                if (inner.size() == 0) continue;
                for (int l = 0; l < 4; ++l) jet.dd[k][l](mu, nu) = inner(l);
            }
        }
    return jet;
}

Tensor3 d_inverse_metric_at(const MetricModel& model, const Vec4& x) { return inverse_metric_jet(model, x, 1).d; }

Tensor4 d2_inverse_metric_at(const MetricModel& model, const Vec4& x) { return inverse_metric_jet(model, x, 2).dd; }

Vec4 log_sqrt_det_gradient_at(const MetricModel& model, const Vec4& x)
{
    require_domain(model, x);
    Vec4 g = Vec4::Zero();
    if (model.chart == ChartKind::MinkowskiCartesian) return g;
    const double r = x(1);
    const double th = x(2);
    const double cot = std::cos(th) / std::sin(th);
    if (model.kind == ModelKind::ReissnerNordstrom) {
        g(1) = 2.0 / r;
        g(2) = cot;
    } else {
        const double a = model.a;
        const double rho2 = r * r + a * a * std::cos(th) * std::cos(th);
        g(1) = 2.0 * r / rho2;
        g(2) = -2.0 * a * a * std::cos(th) * std::sin(th) / rho2 + cot;
    }
    return g;
}

double sqrt_abs_det_at(const MetricModel& model, const Vec4& x)
{
    require_domain(model, x);
    if (model.chart == ChartKind::MinkowskiCartesian) return 1.0;
    const double r = x(1);
    const double th = x(2);
    if (model.kind == ModelKind::ReissnerNordstrom) return r * r * std::sin(th);
    const double a = model.a;
    return (r * r + a * a * std::cos(th) * std::cos(th)) * std::sin(th);
}

double tortoise(const MetricModel& model, double r)
{
    const double m = model.m;
    const double rp = model.r_plus();
    const double rm = model.r_minus();
    const bool kerr = model.kind == ModelKind::Kerr;
    const double a2 = kerr ? model.a * model.a : 0.0;
    if (model.kind == ModelKind::Minkowski) return r;
    if (r == rp || r == rm) fail(ErrorKind::DomainError, "tortoise coordinate is singular on a horizon");
    if (model.extremal()) {
        const double c = kerr ? 2.0 * m * m : m * m;
        return r + 2.0 * m * std::log(std::abs(r - m)) - c / (r - m);
    }
    const double A = (rp * rp + a2) / (rp - rm);
    const double B = -(rm * rm + a2) / (rp - rm);
    double value = r + A * std::log(std::abs(r - rp));
    if (B != 0.0) value += B * std::log(std::abs(r - rm));
    return value;
}

double tortoise_derivative(const MetricModel& model, double r)
{
    if (model.kind == ModelKind::Minkowski) return 1.0;
    const double H = horizon_function(model, r);
    if (H == 0.0) fail(ErrorKind::DomainError, "tortoise coordinate is singular on a horizon");
    return model.kind == ModelKind::Kerr ? (r * r + model.a * model.a) / H : 1.0 / H;
}

double azimuth_shift(const MetricModel& model, double r)
{
    if (model.kind != ModelKind::Kerr || model.a == 0.0) return 0.0;
    const double rp = model.r_plus();
    const double rm = model.r_minus();
    if (r == rp || r == rm) fail(ErrorKind::DomainError, "azimuthal shift is singular on a horizon");
    if (model.extremal()) return -model.a / (r - model.m);
    return model.a / (rp - rm) * std::log(std::abs((r - rp) / (r - rm)));
}

double azimuth_shift_derivative(const MetricModel& model, double r)
{
    if (model.kind != ModelKind::Kerr) return 0.0;
    const double H = horizon_function(model, r);
    if (H == 0.0) fail(ErrorKind::DomainError, "azimuthal shift is singular on a horizon");
    return model.a / H;
}

TimeFunctionShape time_function_shape(const MetricModel& model, double r)
{
    TimeFunctionShape t;
    // Outgoing charts run backwards in x^0 along future-directed curves unless extremal.
    const double sigma = model.extremal() ? 1.0 : -1.0;
    switch (model.chart) {
    case ChartKind::MinkowskiCartesian:
    case ChartKind::SchwarzschildTStar: break;
    case ChartKind::RNExteriorT:
    case ChartKind::KerrBoyerLindquist:
        t.F = tortoise(model, r) - r;
        t.dF = tortoise_derivative(model, r) - 1.0;
        break;
    case ChartKind::RNIngoingV:
    case ChartKind::KerrIngoing:
        t.F = -r;
        t.dF = -1.0;
        break;
    case ChartKind::RNOutgoingU:
    case ChartKind::KerrOutgoing:
        t.c0 = sigma;
        t.F = sigma * r;
        t.dF = sigma;
        break;
    }
    return t;
}

double time_function(const MetricModel& model, const Vec4& x)
{
    require_domain(model, x);
    const TimeFunctionShape t = time_function_shape(model, x(1));
    return t.c0 * x(0) + t.F;
}

Vec4 time_function_gradient(const MetricModel& model, const Vec4& x)
{
    require_domain(model, x);
    const TimeFunctionShape t = time_function_shape(model, x(1));
    return Vec4(t.c0, t.dF, 0.0, 0.0);
}

Vec4 time_normal_at(const MetricModel& model, const Vec4& x)
{
    return -(inverse_metric_at(model, x) * time_function_gradient(model, x));
}

Vec4 energy_field_at(const MetricModel& model, const FoliationSpec& foliation, const Vec4& x)
{
    switch (foliation.energy_field) {
    case EnergyFieldKind::TimeFunctionNormal: return time_normal_at(model, x);
    case EnergyFieldKind::CauchyRegular: {
        if (model.kind != ModelKind::ReissnerNordstrom || model.chart != ChartKind::RNIngoingV || model.extremal() || model.e == 0.0)
            fail(ErrorKind::DomainError, "the Cauchy-regular field is defined in the sub-extremal RN ingoing chart");
        require_domain(model, x);
        const double r = x(1);
        const double rm = model.r_minus();
        if (!(r > rm)) fail(ErrorKind::DomainError, "the Cauchy-regular field requires r > r-");
        return Vec4(1.0 / (r - rm), (rm - model.r_plus()) / (2.0 * r * r), 0.0, 0.0);
    }
    case EnergyFieldKind::ExtremalOutgoing: {
        if (model.chart != ChartKind::RNOutgoingU) fail(ErrorKind::DomainError, "the extremal field is defined in the RN outgoing chart");
        require_domain(model, x);
        return Vec4(1.0, 1.0, 0.0, 0.0);
    }
    }
    return Vec4::Zero();
}

CotangentState chart_transition(const MetricModel& model, ChartKind to, const CotangentState& state)
{
    if (to == model.chart) {
        require_domain(model, state.x);
        return state;
    }
    const MetricModel target = model.in_chart(to);
    require_domain(model, state.x);
    const double r = state.x(1);
    Vec4 y = state.x;
    if (!in_domain(target, y)) fail(ErrorKind::DomainError, std::string("point outside the overlap of ") + to_string(model.chart) + " and " + to_string(to));
    const ChartOffset from_off = chart_offset(model, model.chart, r);
    const ChartOffset to_off = chart_offset(model, to, r);
    const double f = to_off.F0 - from_off.F0;
    const double df = to_off.dF0 - from_off.dF0;
    const double g = to_off.F3 - from_off.F3;
    const double dg = to_off.dF3 - from_off.dF3;
    CotangentState out = state;
    out.x(0) += f;
    out.x(3) += g;
    out.p(1) = state.p(1) - df * state.p(0) - dg * state.p(3);
    return out;
}

CotangentState chart_transition(const MetricModel& model, ChartKind from, ChartKind to, const CotangentState& state)
{
    return chart_transition(model.in_chart(from), to, state);
}

}  // namespace beams
