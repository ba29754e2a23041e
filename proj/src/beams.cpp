#include "beams/beams.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <cmath>
#include <sstream>

namespace beams {

namespace {

constexpr int kStateSize = 74;
constexpr int kJre = 8, kJim = 24, kVre = 40, kVim = 56, kEll = 72;

using State = Eigen::VectorXd;

CMat4 read_complex(const double* re, const double* im)
{
    const Eigen::Map<const Mat4> R(re);
    const Eigen::Map<const Mat4> I(im);
    CMat4 out;
    out.real() = R;
    out.imag() = I;
    return out;
}

void write_complex(double* re, double* im, const CMat4& m)
{
    Eigen::Map<Mat4> R(re);
    R = m.real();
    Eigen::Map<Mat4> I(im);
    I = m.imag();
}

State pack(const CotangentState& st, const CMat4& J, const CMat4& V, cplx ell)
{
    State y(kStateSize);
    y.head<4>() = st.x;
    y.segment<4>(4) = st.p;
    write_complex(y.data() + kJre, y.data() + kJim, J);
    write_complex(y.data() + kVre, y.data() + kVim, V);
    y(kEll) = ell.real();
    y(kEll + 1) = ell.imag();
    return y;
}

double divergence_term(const InverseMetricJet& jet, const Vec4& p)
{
    double div = 0.0;
    for (int mu = 0; mu < 4; ++mu) div += jet.d[mu].row(mu).dot(p);
    return div;
}

cplx box_phi_from_jet(const MetricModel& model, const InverseMetricJet& jet, const Vec4& x, const Vec4& p, const CMat4& M)
{
    const cplx trace = (jet.ginv.cast<cplx>().cwiseProduct(M)).sum();
    const Vec4 xdot = jet.ginv * p;
    return trace + divergence_term(jet, p) + xdot.dot(log_sqrt_det_gradient_at(model, x));
}

Vec4 project_screen(const Mat4& g, const ScreenFrame& f, const Vec4& X)
{
    return X + (X.dot(g * f.l)) * f.gdot + (X.dot(g * f.gdot)) * f.l;
}

}  // namespace

HessianMatrices hessian_matrices(const InverseMetricJet& jet, const Vec4& p)
{
    HessianMatrices h;
    h.C = jet.ginv;
    for (int k = 0; k < 4; ++k) {
        h.B.row(k) = (jet.d[k] * p).transpose();
        for (int r = 0; r < 4; ++r) h.A(k, r) = 0.5 * p.dot(jet.dd[k][r] * p);
    }
    return h;
}

HessianMatrices hessian_matrices(const MetricModel& model, const CotangentState& state)
{
    return hessian_matrices(inverse_metric_jet(model, state.x, 2), state.p);
}

Vec4 covector_rate(const MetricModel& model, const CotangentState& state) { return flow_rhs(model, state).pdot; }

ScreenFrame screen_frame(const MetricModel& model, const CotangentState& state, const ScreenFrame* previous)
{
    const Mat4 g = metric_at(model, state.x);
    ScreenFrame f;
    f.gdot = inverse_metric_at(model, state.x) * state.p;
    if (f.gdot.norm() == 0.0) fail(ErrorKind::ConstructionError, "tangent vector vanishes");
    const Vec4 T = time_normal_at(model, state.x);
    const double gT = f.gdot.dot(g * T);
    if (!(std::abs(gT) > 0.0)) fail(ErrorKind::ConstructionError, "time normal is orthogonal to the tangent");
    const double alpha = -1.0 / gT;
    const double beta = -alpha * T.dot(g * T) / (2.0 * gT);
    f.l = alpha * T + beta * f.gdot;

    std::vector<Vec4> candidates;
    if (previous) {
        candidates = {previous->e1, previous->e2};
        for (int k = 0; k < 4; ++k) candidates.push_back(Vec4::Unit(k));
    } else {
        for (int k : {1, 2, 3, 0}) candidates.push_back(Vec4::Unit(k));
    }
    std::vector<Vec4> basis;
    const auto orthogonalize = [&](Vec4 X) {
        X = project_screen(g, f, X);
        for (const Vec4& b : basis) X -= X.dot(g * b) * b;
        return X;
    };
    const auto take_best = [&]() {
        double best = 0.0;
        Vec4 pick = Vec4::Zero();
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            const Vec4 X = orthogonalize(candidates[i]);
            const double n2 = X.dot(g * X) / candidates[i].squaredNorm();
            // Previous frame vectors win whenever their projection is healthy.
            if (previous && i < 2 && i == basis.size() && n2 > 1e-6) return Vec4(X / std::sqrt(X.dot(g * X)));
            if (n2 > best) {
                best = n2;
                pick = X;
            }
        }
        if (!(best > 1e-12)) fail(ErrorKind::ConstructionError, "screen completion failed");
        return Vec4(pick / std::sqrt(pick.dot(g * pick)));
    };
    basis.push_back(take_best());
    basis.push_back(take_best());
    f.e1 = basis[0];
    f.e2 = basis[1];
    return f;
}

CMat4 min_norm_symmetric_solution(const Vec4& v, const CVec4& c)
{
    const double vv = v.squaredNorm();
    if (vv == 0.0) fail(ErrorKind::ConstructionError, "tangent vector vanishes");
    const CVec4 vc = v.cast<cplx>();
    const cplx cv = vc.dot(c);  // v^T c for real v
    return (c * vc.transpose() + vc * c.transpose()) / vv - (cv / (vv * vv)) * (vc * vc.transpose());
}

BeamInitialData build_initial_M(const MetricModel& model, const CotangentState& seed, const TransversalSpec& spec)
{
    const ScreenFrame f = screen_frame(model, seed);
    const Mat4 g = metric_at(model, seed.x);
    const Vec4 b = covector_rate(model, seed);
    const double E = -seed.p.dot(time_normal_at(model, seed.x));
    if (!(E > 0.0)) fail(ErrorKind::ConstructionError, "seed is not future-directed");
    const double w_default = E / model.length_scale();
    std::array<double, 3> w = spec.weights;
    for (double& wk : w)
        if (!(wk > 0.0)) wk = w_default;

    const Vec4 e1 = g * f.e1;
    const Vec4 e2 = g * f.e2;
    const Vec4 q = seed.p / E;
    const Mat4 MI = w[0] * e1 * e1.transpose() + w[1] * e2 * e2.transpose() + w[2] * q * q.transpose();

    BeamInitialData init;
    init.M0 = min_norm_symmetric_solution(f.gdot, b.cast<cplx>());
    init.M0.imag() = MI;
    for (int i = 0; i < 4; ++i)
        for (int k = i + 1; k < 4; ++k) init.M0(k, i) = init.M0(i, k) = 0.5 * (init.M0(i, k) + init.M0(k, i));
    init.s_ref = seed.s;

    const double resid = (init.M0 * f.gdot.cast<cplx>() - b.cast<cplx>()).norm();
    if (!(resid <= 1e-12 * std::max(1.0, b.norm() + init.M0.norm() * f.gdot.norm())))
        fail(ErrorKind::ConstructionError, "initial Hessian violates compatibility");
    return init;
}

CMat4 symplectic_pairing(const CMat4& J1, const CMat4& V1, const CMat4& J2, const CMat4& V2)
{
    return J1.transpose() * V2 - V1.transpose() * J2;
}

double symplectic_drift(const CMat4& pairing, const CMat4& pairing0)
{
    const double n0 = pairing0.norm();
    return n0 > 0.0 ? (pairing - pairing0).norm() / n0 : (pairing - pairing0).norm();
}

cplx box_phi_on_gamma(const MetricModel& model, const CotangentState& state, const CMat4& M)
{
    return box_phi_from_jet(model, inverse_metric_jet(model, state.x, 1), state.x, state.p, M);
}

double riccati_residual(const MetricModel& model, const BeamJet& jet)
{
    const HessianMatrices h = hessian_matrices(model, CotangentState{jet.s, jet.x, jet.p});
    const CMat4 A = h.A.cast<cplx>();
    const CMat4 BM = h.B.cast<cplx>() * jet.M;
    const CMat4 MBt = jet.M * h.B.transpose().cast<cplx>();
    const CMat4 MCM = jet.M * h.C.cast<cplx>() * jet.M;
    const CMat4 R = A + BM + MBt + MCM + jet.Mdot;
    const double scale = std::max({A.norm(), BM.norm(), MCM.norm(), jet.Mdot.norm()});
    return scale > 0.0 ? R.norm() / scale : R.norm();
}

bool BeamJetRecord::contains(double s) const { return dense && dense->contains(s); }

BeamJet BeamJetRecord::jet_at(double s, int order) const
{
    BeamJet j;
    j.s = s;
    const Eigen::VectorXd y = dense->eval(s, 0);
    j.x = y.head<4>();
    j.p = y.segment<4>(4);
    j.J = read_complex(y.data() + kJre, y.data() + kJim);
    j.V = read_complex(y.data() + kVre, y.data() + kVim);
    const Eigen::PartialPivLU<CMat4> lu(j.J.transpose());
    j.M = lu.solve(j.V.transpose()).transpose();
    const cplx ell(y(kEll), y(kEll + 1));
    j.a = init.a0 * std::exp(-0.5 * (ell - ell_ref));
    j.xdot = j.xddot = j.pdot = Vec4::Zero();
    j.Mdot = CMat4::Zero();
    j.adot = 0.0;
    if (order >= 1) {
        const Eigen::VectorXd dy = dense->eval(s, 1);
        j.xdot = dy.head<4>();
        j.pdot = dy.segment<4>(4);
        const CMat4 Jd = read_complex(dy.data() + kJre, dy.data() + kJim);
        const CMat4 Vd = read_complex(dy.data() + kVre, dy.data() + kVim);
        // Mdot J = Vdot - M Jdot.
        j.Mdot = lu.solve((Vd - j.M * Jd).transpose()).transpose();
        j.adot = -0.5 * cplx(dy(kEll), dy(kEll + 1)) * j.a;
    }
    if (order >= 2) j.xddot = dense->eval(s, 2, 0, 4);
    return j;
}

double BeamJetRecord::max_symplectic_drift() const
{
    double v = 0.0;
    for (const auto& b : samples) v = std::max(v, b.symplectic_drift);
    return v;
}

double BeamJetRecord::max_symmetry_error() const
{
    double v = 0.0;
    for (const auto& b : samples) v = std::max(v, b.symmetry_error);
    return v;
}

double BeamJetRecord::min_transversal_eig() const
{
    double v = std::numeric_limits<double>::infinity();
    for (const auto& b : samples) v = std::min(v, b.transversal_min_eig);
    return v;
}

double BeamJetRecord::min_det_J() const
{
    double v = std::numeric_limits<double>::infinity();
    for (const auto& b : samples) v = std::min(v, b.det_J);
    return v;
}

double BeamJetRecord::max_column_error() const
{
    double v = 0.0;
    for (const auto& b : samples) v = std::max({v, b.column_J_error, b.column_V_error});
    return v;
}

double BeamJetRecord::max_riccati_residual() const
{
    double v = 0.0;
    for (const auto& b : samples) v = std::max(v, b.riccati_residual);
    return v;
}

BeamJetRecord integrate_jv(const MetricModel& model, const GeodesicRecord& record, const BeamInitialData& init,
                           const BeamOptions& options)
{
    const double L = model.length_scale();
    const OdeRhs rhs = [&](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        const Vec4 x = y.head<4>();
        const Vec4 p = y.segment<4>(4);
        const InverseMetricJet jet = inverse_metric_jet(model, x, 2);
        const HessianMatrices h = hessian_matrices(jet, p);
        const CMat4 J = read_complex(y.data() + kJre, y.data() + kJim);
        const CMat4 V = read_complex(y.data() + kVre, y.data() + kVim);
        const CMat4 Bt = h.B.transpose().cast<cplx>();
        const CMat4 Jd = Bt * J + h.C.cast<cplx>() * V;
        const CMat4 Vd = -h.A.cast<cplx>() * J - h.B.cast<cplx>() * V;
        // tr(C V J^{-1}) = tr(J^{-1} C V).
        const CMat4 X = J.partialPivLu().solve(h.C.cast<cplx>() * V);
        const cplx box = X.trace() + divergence_term(jet, p) + (jet.ginv * p).dot(log_sqrt_det_gradient_at(model, x));
        dy.resize(kStateSize);
        dy.head<4>() = jet.ginv * p;
        for (int k = 0; k < 4; ++k) dy(4 + k) = -0.5 * p.dot(jet.d[k] * p);
        write_complex(dy.data() + kJre, dy.data() + kJim, Jd);
        write_complex(dy.data() + kVre, dy.data() + kVim, Vd);
        dy(kEll) = box.real();
        dy(kEll + 1) = box.imag();
    };

    OdeOptions ode;
    ode.rtol = options.tol;
    ode.atol = Eigen::VectorXd::Constant(kStateSize, options.tol);
    ode.atol.head<8>().setConstant(options.tol * L);
    ode.atol.segment(kVre, 32).setConstant(options.tol / L);

    const double s0 = record.s_begin();
    const double s1 = record.s_end();
    const double sref = init.s_ref;
    const double span = std::abs(s1 - s0);
    if (!((sref - s0) * (sref - s1) <= 0.0) && std::abs(sref - s0) > 1e-12 * (1.0 + span))
        fail(ErrorKind::ConstructionError, "reference parameter lies outside the geodesic record");

    const CotangentState front = record.samples.front();
    const Vec4 gdot0 = velocity(model, front);
    const Vec4 b0 = covector_rate(model, front);

    const OdeEvent rebase_event = [&](double, const Eigen::VectorXd& y) {
        return read_complex(y.data() + kJre, y.data() + kJim).norm() - options.rebase_norm;
    };
    const auto hessian_of = [](const Eigen::VectorXd& y) {
        const CMat4 J = read_complex(y.data() + kJre, y.data() + kJim);
        const CMat4 V = read_complex(y.data() + kVre, y.data() + kVim);
        CMat4 M = J.transpose().partialPivLu().solve(V.transpose()).transpose();
        return CMat4(0.5 * (M + M.transpose()));
    };
    const auto restart = [&](const Eigen::VectorXd& y, const CMat4& M) {
        const CotangentState st{0.0, y.head<4>(), y.segment<4>(4)};
        return pack(st, CMat4::Identity(), M, cplx(y(kEll), y(kEll + 1)));
    };

    CMat4 M_begin = init.M0;
    cplx ell_begin = 0.0;
    if (std::abs(sref - s0) > 1e-12 * (1.0 + span)) {
        Eigen::VectorXd y = pack(record.state_at(sref), CMat4::Identity(), init.M0, 0.0);
        double s = sref;
        for (;;) {
            const OdeResult back = integrate_dop853(rhs, s, y, s0, ode, std::isfinite(options.rebase_norm) ? rebase_event : OdeEvent{});
            if (back.status == OdeStatus::DomainBoundary) fail(ErrorKind::DomainError, "backward jet propagation left the chart");
            y = back.y_final;
            s = back.s_final;
            if (back.status == OdeStatus::Completed) break;
            y = restart(y, hessian_of(y));
        }
        CMat4 M = hessian_of(y);
        M += min_norm_symmetric_solution(gdot0, b0.cast<cplx>() - M * gdot0.cast<cplx>());
        M_begin = M;
        ell_begin = cplx(y(kEll), y(kEll + 1));
    }

    BeamJetRecord out;
    out.model = model;
    out.foliation = record.foliation;
    out.geodesic = std::make_shared<GeodesicRecord>(record);
    out.init = init;
    out.M_begin = M_begin;
    out.gdot_begin = gdot0;
    out.pairing0 = symplectic_pairing(CMat4::Identity(), M_begin, CMat4::Identity(), M_begin.conjugate());

    BeamSegment seg;
    seg.s_start = s0;
    seg.gdot_start = gdot0;
    seg.pairing_start = out.pairing0;

    double max_drift = 0.0;
    const OdeStepHook hook = [&](double s, const Eigen::VectorXd& y) {
        const CMat4 J = read_complex(y.data() + kJre, y.data() + kJim);
        const CMat4 V = read_complex(y.data() + kVre, y.data() + kVim);
        const double log_det = seg.log_det_base + std::log(std::abs(J.determinant()));
        if (!(log_det > std::log(options.singular_j))) {
            std::ostringstream os;
            os << "|det J| = " << std::exp(log_det) << " at s = " << s;
            fail(ErrorKind::SingularJ, os.str());
        }
        const double drift = symplectic_drift(symplectic_pairing(J, V, J.conjugate(), V.conjugate()), seg.pairing_start);
        if (drift > options.symplectic_guard) {
            std::ostringstream os;
            os << "symplectic drift " << drift << " at s = " << s;
            fail(ErrorKind::ToleranceFailure, os.str());
        }
        const double cd = constraint_drift(model, CotangentState{s, y.head<4>(), y.segment<4>(4)});
        max_drift = std::max(max_drift, cd);
        if (cd > 10.0 * options.null_tol) fail(ErrorKind::ToleranceFailure, "null constraint lost along the beam");
    };

    auto dense = std::make_shared<DenseSolution>();
    std::vector<double> s_steps;
    std::vector<Eigen::VectorXd> y_steps;
    std::vector<int> seg_index;
    Eigen::VectorXd y = pack(front, CMat4::Identity(), M_begin, ell_begin);
    double s = s0;
    for (;;) {
        const OdeResult fw = integrate_dop853(rhs, s, y, s1, ode, std::isfinite(options.rebase_norm) ? rebase_event : OdeEvent{}, hook);
        if (fw.status == OdeStatus::DomainBoundary) fail(ErrorKind::DomainError, "beam left the chart before the record end");
        out.segments.push_back(seg);
        for (std::size_t k = 0; k < fw.dense->segments(); ++k)
            dense->append(fw.dense->segment_start(k), fw.dense->segment_step(k), fw.dense->segment_coefficients(k));
        for (std::size_t i = s_steps.empty() ? 0 : 1; i < fw.s_steps.size(); ++i) {
            s_steps.push_back(fw.s_steps[i]);
            y_steps.push_back(fw.y_steps[i]);
            seg_index.push_back(static_cast<int>(out.segments.size()) - 1);
        }
        y = fw.y_final;
        s = fw.s_final;
        if (fw.status == OdeStatus::Completed) break;
        const CMat4 J = read_complex(y.data() + kJre, y.data() + kJim);
        const CMat4 M = hessian_of(y);
        seg.s_start = s;
        seg.log_det_base += std::log(std::abs(J.determinant()));
        seg.gdot_start = velocity(model, CotangentState{s, y.head<4>(), y.segment<4>(4)});
        seg.pairing_start = symplectic_pairing(CMat4::Identity(), M, CMat4::Identity(), M.conjugate());
        y = restart(y, M);
    }
    out.dense = dense;
    out.max_constraint_drift = max_drift;
    {
        const Eigen::VectorXd yr = dense->eval(sref);
        out.ell_ref = cplx(yr(kEll), yr(kEll + 1));
    }

    const ScreenFrame* prev = nullptr;
    out.samples.reserve(s_steps.size());
    for (std::size_t i = 0; i < s_steps.size(); ++i) {
        const double si = s_steps[i];
        const Eigen::VectorXd& yi = y_steps[i];
        const BeamSegment& sg = out.segments[seg_index[i]];
        BeamSample b;
        b.s = si;
        b.segment = seg_index[i];
        b.x = yi.head<4>();
        b.p = yi.segment<4>(4);
        b.J = read_complex(yi.data() + kJre, yi.data() + kJim);
        b.V = read_complex(yi.data() + kVre, yi.data() + kVim);
        b.M = b.J.transpose().partialPivLu().solve(b.V.transpose()).transpose();
        b.a = init.a0 * std::exp(-0.5 * (cplx(yi(kEll), yi(kEll + 1)) - out.ell_ref));
        const CotangentState st{si, b.x, b.p};
        b.box_phi = box_phi_on_gamma(model, st, b.M);
        b.det_J = std::exp(sg.log_det_base + std::log(std::abs(b.J.determinant())));
        b.symplectic_drift = symplectic_drift(symplectic_pairing(b.J, b.V, b.J.conjugate(), b.V.conjugate()), sg.pairing_start);
        b.symmetry_error = (b.M - b.M.transpose()).norm() / b.M.norm();
        b.frame = screen_frame(model, st, prev);
        Eigen::Matrix<double, 4, 3> W;
        W << b.frame.e1, b.frame.e2, b.frame.l;
        const Eigen::Matrix3d Q = W.transpose() * b.M.imag() * W;
        const Eigen::Vector3d ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(0.5 * (Q + Q.transpose())).eigenvalues();
        b.transversal_min_eig = ev(0);
        b.transversal_max_eig = ev(2);
        const FlowDerivative d = flow_rhs(model, st);
        const CVec4 g0 = sg.gdot_start.cast<cplx>();
        b.column_J_error = (b.J * g0 - d.xdot.cast<cplx>()).norm() / (b.J.norm() * sg.gdot_start.norm());
        b.column_V_error = (b.V * g0 - d.pdot.cast<cplx>()).norm() / (b.V.norm() * sg.gdot_start.norm() + d.pdot.norm());
        out.samples.push_back(b);
        prev = &out.samples.back().frame;
    }
    for (auto& b : out.samples) b.riccati_residual = riccati_residual(model, out.jet_at(b.s, 1));
    return out;
}

std::vector<cplx> transport_amplitude(const BeamJetRecord& jets)
{
    std::vector<cplx> a;
    a.reserve(jets.samples.size());
    for (const auto& b : jets.samples) a.push_back(b.a);
    return a;
}

BeamInvariants beam_invariants(const BeamJetRecord& jets)
{
    BeamInvariants inv;
    inv.symplectic_drift = jets.max_symplectic_drift();
    inv.symmetry_error = jets.max_symmetry_error();
    inv.transversal_min_eig = jets.min_transversal_eig();
    inv.column_error = jets.max_column_error();
    inv.riccati_residual = jets.max_riccati_residual();
    inv.min_det_J = jets.min_det_J();
    return inv;
}

std::string to_csv(const BeamJetRecord& jets)
{
    std::ostringstream os;
    os.precision(17);
    os << "s,det_J,symplectic_drift,symmetry_error,im_m_min,im_m_max,abs_a,re_box_phi,im_box_phi\n";
    for (const auto& b : jets.samples)
        os << b.s << ',' << b.det_J << ',' << b.symplectic_drift << ',' << b.symmetry_error << ',' << b.transversal_min_eig << ','
           << b.transversal_max_eig << ',' << std::abs(b.a) << ',' << b.box_phi.real() << ',' << b.box_phi.imag() << '\n';
    return os.str();
}

}  // namespace beams
