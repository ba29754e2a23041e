#include "beams/caustics.hpp"

#include "beams/numerics.hpp"

#include <Eigen/LU>

#include <cmath>
#include <iomanip>
#include <sstream>

namespace beams {

namespace {

constexpr int kJacobiSize = 16;
constexpr int kRiccatiSize = 40;
// Grid points per integrator step used when scanning the screen determinant.
constexpr int kScanSubdivision = 4;

CotangentState start_state(const GeodesicRecord& record, std::optional<double> s0)
{
    const double s = s0.value_or(record.s_begin());
    const double lo = std::min(record.s_begin(), record.s_end());
    const double hi = std::max(record.s_begin(), record.s_end());
    if (s < lo - 1e-12 || s > hi + 1e-12) fail(ErrorKind::ParameterError, "start parameter lies outside the geodesic record");
    return record.state_at(s);
}

OdeOptions ode_options(const MetricModel& model, int size, double tol)
{
    OdeOptions ode;
    ode.rtol = tol;
    ode.atol = Eigen::VectorXd::Constant(size, tol);
    ode.atol.head<4>().setConstant(tol * model.length_scale());
    return ode;
}

CotangentState state_from(const DenseSolution& d, double s)
{
    return CotangentState{s, d.eval_fixed<4>(s, 0, 0), d.eval_fixed<4>(s, 0, 4)};
}

}  // namespace

Tensor3 christoffel(const MetricModel& model, const Vec4& x)
{
    const Mat4 g = metric_at(model, x);
    const Mat4 h = inverse_metric_at(model, x);
    const Tensor3 dh = d_inverse_metric_at(model, x);
    Tensor3 dg;
    for (int k = 0; k < 4; ++k) dg[k] = -g * dh[k] * g;
    Tensor3 G;
    for (int mu = 0; mu < 4; ++mu) {
        G[mu].setZero();
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
                double v = 0.0;
                for (int n = 0; n < 4; ++n) v += h(mu, n) * (dg[a](n, b) + dg[b](n, a) - dg[n](a, b));
                G[mu](a, b) = 0.5 * v;
            }
    }
    return G;
}

Vec4 covariant_rate(const MetricModel& model, const Vec4& x, const Vec4& xdot, const Vec4& Y, const Vec4& Ydot)
{
    const Tensor3 G = christoffel(model, x);
    Vec4 out = Ydot;
    for (int mu = 0; mu < 4; ++mu) out(mu) += xdot.dot(G[mu] * Y);
    return out;
}

Vec4 jacobi_covector(const MetricModel& model, const CotangentState& state, const Vec4& Y, const Vec4& DY)
{
    const Tensor3 G = christoffel(model, state.x);
    const Vec4 xdot = velocity(model, state);
    Vec4 Ydot = DY;
    for (int mu = 0; mu < 4; ++mu) Ydot(mu) -= xdot.dot(G[mu] * Y);
    const HessianMatrices hm = hessian_matrices(model, state);
    return metric_at(model, state.x) * (Ydot - hm.B.transpose() * Y);
}

Vec4 JacobiField::Y_at(double s) const { return dense->eval_fixed<4>(s, 0, 8); }

Vec4 JacobiField::DY_at(double s) const
{
    return covariant_rate(model, dense->eval_fixed<4>(s, 0, 0), dense->eval_fixed<4>(s, 1, 0), dense->eval_fixed<4>(s, 0, 8),
                          dense->eval_fixed<4>(s, 1, 8));
}

JacobiField integrate_jacobi(const MetricModel& model, const GeodesicRecord& record, const Vec4& Y0, const Vec4& DY0,
                             std::optional<double> s0, double tol)
{
    const CotangentState st = start_state(record, s0);
    Eigen::VectorXd y(kJacobiSize);
    y << st.x, st.p, Y0, jacobi_covector(model, st, Y0, DY0);
    const OdeRhs rhs = [&](double, const Eigen::VectorXd& z, Eigen::VectorXd& dz) {
        const Vec4 p = z.segment<4>(4);
        const InverseMetricJet jet = inverse_metric_jet(model, z.head<4>(), 2);
        const HessianMatrices hm = hessian_matrices(jet, p);
        const Vec4 Y = z.segment<4>(8);
        const Vec4 dp = z.segment<4>(12);
        dz.resize(kJacobiSize);
        dz.head<4>() = jet.ginv * p;
        for (int k = 0; k < 4; ++k) dz(4 + k) = -0.5 * p.dot(jet.d[k] * p);
        dz.segment<4>(8) = hm.B.transpose() * Y + hm.C * dp;
        dz.segment<4>(12) = -hm.A * Y - hm.B * dp;
    };
    const OdeResult res = integrate_dop853(rhs, st.s, y, record.s_end(), ode_options(model, kJacobiSize, tol));
    if (res.status == OdeStatus::DomainBoundary) fail(ErrorKind::DomainError, "Jacobi field left the chart");
    JacobiField out;
    out.model = model;
    out.dense = res.dense;
    for (double s : res.s_steps) out.samples.push_back(JacobiSample{s, out.Y_at(s), out.DY_at(s)});
    return out;
}

JacobiRun jacobi_screen_run(const MetricModel& model, std::shared_ptr<const GeodesicRecord> record, double s0,
                            const std::optional<std::array<Vec4, 2>>& basis)
{
    JacobiRun run;
    run.geodesic = record;
    const CotangentState st = start_state(*record, s0);
    const ScreenFrame f0 = screen_frame(model, st);
    run.basis = basis.value_or(std::array<Vec4, 2>{f0.e1, f0.e2});
    for (int i = 0; i < 2; ++i) run.fields[i] = integrate_jacobi(model, *record, Vec4::Zero(), run.basis[i], s0);

    const JacobiField& F0 = run.fields[0];
    const auto det_at = [&](double s, const ScreenFrame& prev, ScreenFrame* frame) {
        const CotangentState cs = state_from(*F0.dense, s);
        const ScreenFrame f = screen_frame(model, cs, &prev);
        if (frame) *frame = f;
        const Mat4 g = metric_at(model, cs.x);
        Eigen::Matrix2d Q;
        for (int i = 0; i < 2; ++i) {
            const Vec4 gY = g * run.fields[i].Y_at(s);
            Q(i, 0) = gY.dot(f.e1);
            Q(i, 1) = gY.dot(f.e2);
        }
        return Q.determinant();
    };

    std::vector<double> grid;
    for (std::size_t k = 0; k + 1 < F0.samples.size(); ++k) {
        const double a = F0.samples[k].s, b = F0.samples[k + 1].s;
        for (int j = 0; j < kScanSubdivision; ++j) grid.push_back(a + (b - a) * j / kScanSubdivision);
    }
    grid.push_back(F0.s_end());

    std::vector<ScreenFrame> frames;
    ScreenFrame frame = f0;
    for (double s : grid) {
        run.s.push_back(s);
        run.screen_det.push_back(det_at(s, frame, &frame));
        frames.push_back(frame);
    }
    // The determinant vanishes to second order at s0 itself; the scan starts after it.
    double scale = 0.0;
    for (double d : run.screen_det) scale = std::max(scale, std::abs(d));
    for (std::size_t i = 2; i < grid.size(); ++i) {
        const double d0 = run.screen_det[i - 1], d1 = run.screen_det[i];
        if (d0 != 0.0 && d1 != 0.0 && (d0 > 0.0) != (d1 > 0.0)) {
            const ScreenFrame& prev = frames[i - 1];
            run.conjugate_points.push_back(bisect([&](double s) { return det_at(s, prev, nullptr); }, grid[i - 1], grid[i], 1e-10));
        } else if (i + 1 < grid.size()) {
            const double dm = std::abs(d1);
            if (dm < std::abs(d0) && dm < std::abs(run.screen_det[i + 1]) && dm < 1e-8 * scale &&
                (run.screen_det[i + 1] > 0.0) == (d1 > 0.0))
                run.grazing.push_back(grid[i]);
        }
    }
    return run;
}

std::vector<double> conjugate_point_scan(const MetricModel& model, const GeodesicRecord& record, double s0)
{
    return jacobi_screen_run(model, std::make_shared<const GeodesicRecord>(record), s0).conjugate_points;
}

RealRiccatiResult geometric_optics_real_riccati(const MetricModel& model, const GeodesicRecord& record, const Mat4& M0_real,
                                                double tol)
{
    const CotangentState st = record.samples.front();
    Eigen::VectorXd y(kRiccatiSize);
    y.head<4>() = st.x;
    y.segment<4>(4) = st.p;
    Eigen::Map<Mat4>(y.data() + 8) = Mat4::Identity();
    Eigen::Map<Mat4>(y.data() + 24) = M0_real;
    const OdeRhs rhs = [&](double, const Eigen::VectorXd& z, Eigen::VectorXd& dz) {
        const Vec4 p = z.segment<4>(4);
        const InverseMetricJet jet = inverse_metric_jet(model, z.head<4>(), 2);
        const HessianMatrices hm = hessian_matrices(jet, p);
        const Eigen::Map<const Mat4> J(z.data() + 8);
        const Eigen::Map<const Mat4> V(z.data() + 24);
        dz.resize(kRiccatiSize);
        dz.head<4>() = jet.ginv * p;
        for (int k = 0; k < 4; ++k) dz(4 + k) = -0.5 * p.dot(jet.d[k] * p);
        Eigen::Map<Mat4> Jd(dz.data() + 8);
        Eigen::Map<Mat4> Vd(dz.data() + 24);
        Jd = hm.B.transpose() * J + hm.C * V;
        Vd = -hm.A * J - hm.B * V;
    };
    RealRiccatiResult out;
    out.initial_scale = 1.0;
    const double threshold = 1e-10 * out.initial_scale;
    const OdeEvent event = [&](double, const Eigen::VectorXd& z) {
        return Eigen::Map<const Mat4>(z.data() + 8).determinant() - threshold;
    };
    OdeOptions ode = ode_options(model, kRiccatiSize, tol);
    const OdeResult res = integrate_dop853(rhs, st.s, y, record.s_end(), ode, event);
    if (res.status == OdeStatus::DomainBoundary) fail(ErrorKind::DomainError, "real Riccati comparison left the chart");
    for (std::size_t i = 0; i < res.s_steps.size(); ++i) {
        const Eigen::VectorXd& z = res.y_steps[i];
        const Mat4 J = Eigen::Map<const Mat4>(z.data() + 8);
        const Mat4 V = Eigen::Map<const Mat4>(z.data() + 24);
        out.s.push_back(res.s_steps[i]);
        out.det_J.push_back(J.determinant());
        out.M.push_back(J.transpose().partialPivLu().solve(V.transpose()).transpose());
    }
    if (res.status == OdeStatus::EventHit) out.blowup_s = res.s_final;
    return out;
}

double beam_det_J(const BeamJetRecord& jets, double s)
{
    std::size_t k = 0;
    const bool forward = jets.s_end() >= jets.s_begin();
    for (std::size_t i = 0; i < jets.segments.size(); ++i)
        if (forward ? jets.segments[i].s_start <= s : jets.segments[i].s_start >= s) k = i;
    const double base = jets.segments.empty() ? 0.0 : jets.segments[k].log_det_base;
    return std::abs(jets.jet_at(s, 0).J.determinant()) * std::exp(base);
}

std::string caustic_csv(const JacobiRun& run, const BeamJetRecord* complex_beam, const RealRiccatiResult* real)
{
    std::ostringstream os;
    os << std::setprecision(12) << "s,screen_det,det_J_complex,det_J_real\n";
    std::size_t r = 0;
    for (std::size_t i = 0; i < run.s.size(); ++i) {
        const double s = run.s[i];
        os << s << ',' << run.screen_det[i] << ',';
        if (complex_beam && complex_beam->contains(s)) os << beam_det_J(*complex_beam, s);
        os << ',';
        if (real && !real->s.empty() && s <= real->s.back()) {
            while (r + 1 < real->s.size() && real->s[r + 1] <= s) ++r;
            os << std::abs(real->det_J[r]);
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace beams
