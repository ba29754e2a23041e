#pragma once

#include "beams/metrics.hpp"

#include <cmath>

namespace beams {

// Component formulas templated on the scalar so that the same expressions
// serve plain evaluation and forward-mode differentiation.

template <typename Scalar>
Matrix4<Scalar> metric_components(const MetricModel& model, const Vector4<Scalar>& x)
{
    using std::cos;
    using std::sin;
    Matrix4<Scalar> g = Matrix4<Scalar>::Zero();
    const double m = model.m;
    const double e = model.e;
    const double a = model.a;

    switch (model.chart) {
    case ChartKind::MinkowskiCartesian:
        g(0, 0) = Scalar(-1.0);
        g(1, 1) = Scalar(1.0);
        g(2, 2) = Scalar(1.0);
        g(3, 3) = Scalar(1.0);
        break;
    case ChartKind::SchwarzschildTStar:
    case ChartKind::RNExteriorT:
    case ChartKind::RNIngoingV:
    case ChartKind::RNOutgoingU: {
        const Scalar r = x(1);
        const Scalar sn = sin(x(2));
        const Scalar D = 1.0 - 2.0 * m / r + e * e / (r * r);
        g(2, 2) = r * r;
        g(3, 3) = r * r * sn * sn;
        g(0, 0) = -D;
        if (model.chart == ChartKind::RNExteriorT) {
            g(1, 1) = 1.0 / D;
        } else if (model.chart == ChartKind::SchwarzschildTStar) {
            g(0, 1) = g(1, 0) = 2.0 * m / r;
            g(1, 1) = 1.0 + 2.0 * m / r;
        } else if (model.chart == ChartKind::RNIngoingV) {
            g(0, 1) = g(1, 0) = Scalar(1.0);
        } else {
            g(0, 1) = g(1, 0) = Scalar(-1.0);
        }
        break;
    }
    case ChartKind::KerrBoyerLindquist:
    case ChartKind::KerrIngoing:
    case ChartKind::KerrOutgoing: {
        const Scalar r = x(1);
        const Scalar sn = sin(x(2));
        const Scalar cs = cos(x(2));
        const Scalar sn2 = sn * sn;
        const Scalar rho2 = r * r + a * a * cs * cs;
        const Scalar Delta = r * r - 2.0 * m * r + a * a;
        g(0, 0) = -(1.0 - 2.0 * m * r / rho2);
        g(0, 3) = g(3, 0) = -2.0 * m * r * a * sn2 / rho2;
        g(2, 2) = rho2;
        g(3, 3) = (r * r + a * a + 2.0 * m * r * a * a * sn2 / rho2) * sn2;
        if (model.chart == ChartKind::KerrBoyerLindquist) {
            g(1, 1) = rho2 / Delta;
        } else if (model.chart == ChartKind::KerrIngoing) {
            g(0, 1) = g(1, 0) = Scalar(1.0);
            g(1, 3) = g(3, 1) = -a * sn2;
        } else {
            g(0, 1) = g(1, 0) = Scalar(-1.0);
            g(1, 3) = g(3, 1) = a * sn2;
        }
        break;
    }
    }
    return g;
}

template <typename Scalar>
Matrix4<Scalar> inverse_metric_components(const MetricModel& model, const Vector4<Scalar>& x)
{
    using std::cos;
    using std::sin;
    Matrix4<Scalar> h = Matrix4<Scalar>::Zero();
    const double m = model.m;
    const double e = model.e;
    const double a = model.a;

    switch (model.chart) {
    case ChartKind::MinkowskiCartesian:
        h(0, 0) = Scalar(-1.0);
        h(1, 1) = Scalar(1.0);
        h(2, 2) = Scalar(1.0);
        h(3, 3) = Scalar(1.0);
        break;
    case ChartKind::SchwarzschildTStar:
    case ChartKind::RNExteriorT:
    case ChartKind::RNIngoingV:
    case ChartKind::RNOutgoingU: {
        const Scalar r = x(1);
        const Scalar sn = sin(x(2));
        const Scalar D = 1.0 - 2.0 * m / r + e * e / (r * r);
        h(2, 2) = 1.0 / (r * r);
        h(3, 3) = 1.0 / (r * r * sn * sn);
        if (model.chart == ChartKind::RNExteriorT) {
            h(0, 0) = -1.0 / D;
            h(1, 1) = D;
        } else if (model.chart == ChartKind::SchwarzschildTStar) {
            h(0, 0) = -(1.0 + 2.0 * m / r);
            h(0, 1) = h(1, 0) = 2.0 * m / r;
            h(1, 1) = D;
        } else if (model.chart == ChartKind::RNIngoingV) {
            h(0, 1) = h(1, 0) = Scalar(1.0);
            h(1, 1) = D;
        } else {
            h(0, 1) = h(1, 0) = Scalar(-1.0);
            h(1, 1) = D;
        }
        break;
    }
    case ChartKind::KerrBoyerLindquist:
    case ChartKind::KerrIngoing:
    case ChartKind::KerrOutgoing: {
        const Scalar r = x(1);
        const Scalar sn = sin(x(2));
        const Scalar cs = cos(x(2));
        const Scalar sn2 = sn * sn;
        const Scalar rho2 = r * r + a * a * cs * cs;
        const Scalar Delta = r * r - 2.0 * m * r + a * a;
        const Scalar ra2 = r * r + a * a;
        h(1, 1) = Delta / rho2;
        h(2, 2) = 1.0 / rho2;
        if (model.chart == ChartKind::KerrBoyerLindquist) {
            h(0, 0) = -(ra2 * ra2 - a * a * Delta * sn2) / (rho2 * Delta);
            h(0, 3) = h(3, 0) = -2.0 * m * a * r / (rho2 * Delta);
            h(3, 3) = (Delta - a * a * sn2) / (rho2 * Delta * sn2);
        } else {
            const double sign = model.chart == ChartKind::KerrIngoing ? 1.0 : -1.0;
            h(0, 0) = a * a * sn2 / rho2;
            h(0, 1) = h(1, 0) = sign * ra2 / rho2;
            h(0, 3) = h(3, 0) = a / rho2;
            h(1, 3) = h(3, 1) = sign * a / rho2;
            h(3, 3) = 1.0 / (rho2 * sn2);
        }
        break;
    }
    }
    return h;
}

}  // namespace beams
