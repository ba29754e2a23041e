#include "beams/geodesics.hpp"

#include "beams/numerics.hpp"

#include <cmath>
#include <sstream>

namespace beams {

double hamiltonian(const MetricModel& model, const CotangentState& state)
{
    return 0.5 * state.p.dot(inverse_metric_at(model, state.x) * state.p);
}

double constraint_drift(const MetricModel& model, const CotangentState& state)
{
    const Mat4 h = inverse_metric_at(model, state.x);
    const double H = 0.5 * state.p.dot(h * state.p);
    const double scale = 0.5 * (state.p.cwiseAbs().transpose() * h.cwiseAbs() * state.p.cwiseAbs())(0, 0);
    return scale > 0.0 ? std::abs(H) / scale : std::abs(H);
}

FlowDerivative flow_rhs(const MetricModel& model, const CotangentState& state)
{
    const InverseMetricJet jet = inverse_metric_jet(model, state.x, 1);
    FlowDerivative d;
    d.xdot = jet.ginv * state.p;
    for (int k = 0; k < 4; ++k) d.pdot(k) = -0.5 * state.p.dot(jet.d[k] * state.p);
    return d;
}

Vec4 velocity(const MetricModel& model, const CotangentState& state) { return inverse_metric_at(model, state.x) * state.p; }

CotangentState null_seed(const MetricModel& model, double s, const Vec4& x, const Vec4& p, int index)
{
    const Mat4 h = inverse_metric_at(model, x);
    Vec4 q = p;
    q(index) = 0.0;
    // H = (1/2)(A c^2 + 2 B c + C) in c = p[index].
    const double A = h(index, index);
    const double B = (h.row(index) * q)(0);
    const double Cq = q.dot(h * q);
    const Vec4 dt = time_function_gradient(model, x);
    std::vector<double> roots;
    if (std::abs(A) < 1e-300) {
        if (B == 0.0) fail(ErrorKind::ConstructionError, "null completion is degenerate for this component");
        roots.push_back(-Cq / (2.0 * B));
    } else {
        const double disc = B * B - A * Cq;
        if (disc < 0.0) fail(ErrorKind::ConstructionError, "no real null completion for the given components");
        const double sq = std::sqrt(disc);
        // Cancellation-free pair of roots.
        const double qroot = -(B + std::copysign(sq, B));
        if (qroot != 0.0) {
            roots.push_back(qroot / A);
            roots.push_back(Cq / qroot);
        } else {
            roots.push_back(0.0);
        }
    }
    for (double c : roots) {
        Vec4 cand = q;
        cand(index) = c;
        const Vec4 v = h * cand;
        if (dt.dot(v) > 0.0) return CotangentState{s, x, cand};
    }
    fail(ErrorKind::ConstructionError, "no future-directed null completion");
}

double n_energy(const MetricModel& model, const FoliationSpec& foliation, const CotangentState& state)
{
    return -energy_field_at(model, foliation, state.x).dot(state.p);
}

bool GeodesicRecord::contains(double s) const { return dense && dense->contains(s); }

CotangentState GeodesicRecord::state_at(double s) const
{
    const Eigen::Matrix<double, 8, 1> y = dense->eval_fixed<8>(s, 0, 0);
    return CotangentState{s, y.head<4>(), y.tail<4>()};
}

FlowDerivative GeodesicRecord::derivative_at(double s) const
{
    const Eigen::Matrix<double, 8, 1> y = dense->eval_fixed<8>(s, 1, 0);
    return FlowDerivative{y.head<4>(), y.tail<4>()};
}

GeodesicRecord integrate_geodesic(const MetricModel& model, const CotangentState& seed, double s_end,
                                  const GeodesicOptions& options, const FoliationSpec& foliation)
{
    require_domain(model, seed.x);
    const double scale = model.length_scale();
    if (options.null_check) {
        const double d0 = constraint_drift(model, seed);
        if (d0 > options.null_tol) fail(ErrorKind::ToleranceFailure, "seed violates the null constraint");
    }

    const OdeRhs rhs = [&model](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        const Vec4 x = y.head<4>();
        const Vec4 p = y.tail<4>();
        const FlowDerivative d = flow_rhs(model, CotangentState{0.0, x, p});
        dy.head<4>() = d.xdot;
        dy.tail<4>() = d.pdot;
    };

    OdeOptions ode;
    ode.rtol = options.tol;
    ode.atol = Eigen::VectorXd::Constant(8, options.tol * scale);
    ode.h_max = options.h_max;

    OdeEvent event;
    if (options.time_end || options.stop_function) {
        event = [&](double s, const Eigen::VectorXd& y) {
            const CotangentState st{s, y.head<4>(), y.tail<4>()};
            if (options.stop_function) return options.stop_function(st);
            if (!in_domain(model, st.x)) return std::numeric_limits<double>::quiet_NaN();
            return *options.time_end - time_function(model, st.x);
        };
    }

    double max_drift = 0.0;
    const OdeStepHook hook = [&](double s, const Eigen::VectorXd& y) {
        if (!options.null_check) return;
        const double d = constraint_drift(model, CotangentState{s, y.head<4>(), y.tail<4>()});
        max_drift = std::max(max_drift, d);
        if (d > 10.0 * options.null_tol) {
            std::ostringstream os;
            os << "null-constraint drift " << d << " at s = " << s;
            if (chart_regularity(model, y.head<4>()) < 1e-6) fail(ErrorKind::DomainError, os.str() + " near the chart boundary");
            fail(ErrorKind::ToleranceFailure, os.str());
        }
    };

    Eigen::VectorXd y0(8);
    y0.head<4>() = seed.x;
    y0.tail<4>() = seed.p;
    const OdeResult res = integrate_dop853(rhs, seed.s, y0, s_end, ode, event, hook);

    GeodesicRecord rec;
    rec.model = model;
    rec.foliation = foliation;
    rec.dense = res.dense;
    rec.max_constraint_drift = max_drift;
    rec.samples.reserve(res.s_steps.size());
    for (std::size_t i = 0; i < res.s_steps.size(); ++i)
        rec.samples.push_back(CotangentState{res.s_steps[i], res.y_steps[i].head<4>(), res.y_steps[i].tail<4>()});
    if (res.status == OdeStatus::DomainBoundary)
        rec.events.push_back(GeodesicEvent{GeodesicEventKind::DomainBoundary, res.s_final, "domain boundary"});
    if (res.status == OdeStatus::EventHit)
        rec.events.push_back(GeodesicEvent{options.stop_function ? GeodesicEventKind::Stop : GeodesicEventKind::SliceCrossing,
                                           res.s_final, options.stop_function ? options.stop_label : "time end"});
    if (rec.samples.size() < 2) fail(ErrorKind::DomainError, "geodesic integration made no progress");
    return rec;
}

std::optional<double> find_crossing(const GeodesicRecord& record, const std::function<double(const CotangentState&)>& level)
{
    double prev = level(record.samples.front());
    if (prev == 0.0) return record.samples.front().s;
    for (std::size_t i = 1; i < record.samples.size(); ++i) {
        const double cur = level(record.samples[i]);
        if (cur == 0.0) return record.samples[i].s;
        if ((cur > 0.0) != (prev > 0.0)) {
            const double lo = record.samples[i - 1].s;
            const double hi = record.samples[i].s;
            // Down to adjacent doubles; near-horizon samples resolve r - r_h at the ulp level.
            return bisect([&](double s) { return level(record.state_at(s)); }, lo, hi, 0.0);
        }
        prev = cur;
    }
    return std::nullopt;
}

double slice_crossing(const GeodesicRecord& record, double tau)
{
    const auto level = [&](const CotangentState& st) { return time_function(record.model, st.x) - tau; };
    const auto s = find_crossing(record, level);
    if (!s) {
        std::ostringstream os;
        os << "slice t* = " << tau << " is not crossed by the geodesic";
        fail(ErrorKind::NotCrossed, os.str());
    }
    return *s;
}

std::string to_csv(const GeodesicRecord& record)
{
    std::ostringstream os;
    os.precision(17);
    os << "s,x0,x1,x2,x3,p0,p1,p2,p3,H,energy\n";
    for (const CotangentState& st : record.samples) {
        os << st.s;
        for (int i = 0; i < 4; ++i) os << ',' << st.x(i);
        for (int i = 0; i < 4; ++i) os << ',' << st.p(i);
        os << ',' << hamiltonian(record.model, st);
        double energy = std::numeric_limits<double>::quiet_NaN();
        try {
            energy = n_energy(record.model, record.foliation, st);
        } catch (const Error&) {
        }
        os << ',' << energy << '\n';
    }
    return os.str();
}

}  // namespace beams
