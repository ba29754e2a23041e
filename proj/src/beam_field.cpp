#include "beams/beam_field.hpp"

#include "beams/numerics.hpp"

#include <Eigen/Cholesky>

#include <array>
#include <cmath>
#include <mutex>
#include <sstream>

namespace beams {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;
// Gaussian weight exp(-z^2) below 1e-16.
const double kGaussCut = std::sqrt(16.0 * std::log(10.0));

cplx contract(const CVec4& w, const Vec4& v) { return (w.array() * v.array().cast<cplx>()).sum(); }

double smooth_zero(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

Vec4 slice_point(const MetricModel& model, double tau, const Eigen::Vector3d& y)
{
    const TimeFunctionShape sh = time_function_shape(model, y(0));
    return Vec4((tau - sh.F) / sh.c0, y(0), y(1), y(2));
}

struct SliceFrame {
    Eigen::Vector3d center;
    // y = center + T z, with the beam Gaussian exp(-|z|^2) in z.
    Eigen::Matrix3d T;
    double jacobian = 1.0;
    double s_center = 0.0;
};

SliceFrame slice_frame(const BeamField& field, double tau)
{
    const BeamJetRecord& jets = *field.jets;
    const MetricModel& model = jets.model;
    SliceFrame f;
    f.s_center = beam_slice_crossing(jets, tau);
    const BeamJet j = jets.jet_at(f.s_center, 0);
    f.center = j.x.tail<3>();
    const TimeFunctionShape sh = time_function_shape(model, f.center(0));
    Eigen::Matrix<double, 4, 3> E = Eigen::Matrix<double, 4, 3>::Zero();
    E(0, 0) = -sh.dF / sh.c0;
    E.bottomRows<3>().setIdentity();
    const Eigen::Matrix3d K = E.transpose() * j.M.imag() * E;
    const Eigen::LLT<Eigen::Matrix3d> llt(0.5 * (K + K.transpose()));
    if (llt.info() != Eigen::Success) fail(ErrorKind::QuadratureFailure, "beam Hessian is not positive on the slice");
    const Eigen::Matrix3d Lt = llt.matrixU();
    f.T = Lt.inverse() / std::sqrt(field.lambda);
    f.jacobian = std::abs(f.T.determinant());
    return f;
}

struct AxisRule {
    std::vector<double> z;
    // Weight for integrating an arbitrary function of z.
    std::vector<double> w;
};

AxisRule axis_rule(SliceRule rule, int n, double half_width)
{
    AxisRule r;
    if (rule == SliceRule::GaussHermite) {
        const GaussRule g = gauss_hermite(n);
        r.z = g.nodes;
        for (std::size_t i = 0; i < g.nodes.size(); ++i) r.w.push_back(g.weights[i] * std::exp(g.nodes[i] * g.nodes[i]));
    } else {
        // Composite rule of 8-point panels, which copes with the steep edge of the cutoff.
        const int panels = std::max(1, n / 8);
        const GaussRule g = gauss_legendre(n / panels);
        const double width = 2.0 * half_width / panels;
        for (int k = 0; k < panels; ++k)
            for (std::size_t i = 0; i < g.nodes.size(); ++i) {
                r.z.push_back(-half_width + width * (k + 0.5 * (1.0 + g.nodes[i])));
                r.w.push_back(0.5 * width * g.weights[i]);
            }
    }
    return r;
}

// Integral over the slice t* = tau of integrand(x, hint) d^3y.
double slice_integral(const BeamField& field, double tau, SliceRule rule, int nodes,
                      const std::function<double(const Vec4&, double)>& integrand)
{
    const SliceFrame f = slice_frame(field, tau);
    const MetricModel& model = field.jets->model;
    // Legendre boxes stop at the Gaussian truncation or at the edge of the tube, whichever
    // comes first. Points of the tube lie within 2R of the slice center.
    const Eigen::Matrix3d Tinv = f.T.inverse();
    std::array<AxisRule, 3> ax;
    for (int i = 0; i < 3; ++i)
        ax[i] = axis_rule(rule, nodes, std::min(kGaussCut, 2.0 * field.cutoff_radius * Tinv.row(i).norm()));
    const std::size_t n = ax[0].z.size();
    std::vector<double> partial(n, 0.0);
    parallel_for(n, [&](std::size_t i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k) {
                const Eigen::Vector3d z(ax[0].z[i], ax[1].z[j], ax[2].z[k]);
                if (z.squaredNorm() > kGaussCut * kGaussCut) continue;
                const Eigen::Vector3d y = f.center + f.T * z;
                if ((y - f.center).norm() >= 2.0 * field.cutoff_radius) continue;
                const Vec4 x = slice_point(model, tau, y);
                if (!in_domain(model, x)) continue;
                acc += ax[0].w[i] * ax[1].w[j] * ax[2].w[k] * integrand(x, f.s_center);
            }
        partial[i] = acc;
    });
    double sum = 0.0;
    for (double v : partial) sum += v;
    return sum * f.jacobian;
}

QuadratureResult refine(const QuadratureSpec& spec, const std::function<double(int level)>& evaluate, const char* what)
{
    if (spec.slice_nodes.empty()) fail(ErrorKind::QuadratureFailure, "no quadrature levels configured");
    QuadratureResult r;
    r.value = evaluate(0);
    r.previous = r.value;
    for (std::size_t lv = 1; lv < spec.slice_nodes.size(); ++lv) {
        const double v = evaluate(static_cast<int>(lv));
        r.previous = r.value;
        r.value = v;
        r.level = static_cast<int>(lv);
        const double denom = std::max(std::abs(v), std::abs(r.previous));
        if (denom == 0.0 || std::abs(v - r.previous) <= spec.rel_tol * denom) return r;
    }
    if (spec.slice_nodes.size() == 1) return r;
    std::ostringstream os;
    os << what << " quadrature did not settle: " << r.previous << " vs " << r.value;
    fail(ErrorKind::QuadratureFailure, os.str());
}

}  // namespace

double bump(double q)
{
    if (q <= 0.5) return 1.0;
    if (q >= 1.0) return 0.0;
    const double t = 2.0 * (q - 0.5);
    const double a = smooth_zero(1.0 - t);
    const double b = smooth_zero(t);
    return a / (a + b);
}

double bump_derivative(double q)
{
    if (q <= 0.5 || q >= 1.0) return 0.0;
    const double t = 2.0 * (q - 0.5);
    const double a = smooth_zero(1.0 - t);
    const double b = smooth_zero(t);
    const double da = -a / ((1.0 - t) * (1.0 - t));
    const double db = b / (t * t);
    return 2.0 * (da * (a + b) - a * (da + db)) / ((a + b) * (a + b));
}

double beam_slice_crossing(const BeamJetRecord& jets, double tau)
{
    const MetricModel& model = jets.model;
    const auto level = [&](double s) { return time_function(model, jets.dense->eval_fixed<4>(s, 0, 0)) - tau; };
    double prev = time_function(model, jets.samples.front().x) - tau;
    if (prev == 0.0) return jets.samples.front().s;
    for (std::size_t i = 1; i < jets.samples.size(); ++i) {
        const double cur = time_function(model, jets.samples[i].x) - tau;
        if (cur == 0.0) return jets.samples[i].s;
        if ((cur > 0.0) != (prev > 0.0)) {
            const double lo = jets.samples[i - 1].s, hi = jets.samples[i].s;
            return bisect(level, lo, hi, 1e-15 * (1.0 + std::abs(lo) + std::abs(hi)));
        }
        prev = cur;
    }
    std::ostringstream os;
    os << "slice t* = " << tau << " is not crossed by the beam";
    fail(ErrorKind::NotCrossed, os.str());
}

BeamField make_beam_field(std::shared_ptr<const BeamJetRecord> jets, double lambda, double cutoff_radius, double tau0,
                          std::optional<double> energy_target)
{
    if (!(lambda > 0.0) || !(cutoff_radius > 0.0)) fail(ErrorKind::ParameterError, "lambda and cutoff radius must be positive");
    BeamField f;
    f.jets = std::move(jets);
    f.lambda = lambda;
    f.cutoff_radius = cutoff_radius;
    f.tau0 = tau0;
    if (energy_target) {
        f.energy_target = *energy_target;
    } else {
        const double s = beam_slice_crossing(*f.jets, tau0);
        const BeamJet j = f.jets->jet_at(s, 0);
        f.energy_target = n_energy(f.jets->model, f.jets->foliation, CotangentState{s, j.x, j.p});
    }
    return f;
}

FootPoint foot_point(const BeamJetRecord& jets, const Vec4& x, std::optional<double> hint)
{
    const DenseSolution& d = *jets.dense;
    const double lo = std::min(jets.s_begin(), jets.s_end());
    const double hi = std::max(jets.s_begin(), jets.s_end());
    double s;
    if (hint) {
        s = std::clamp(*hint, lo, hi);
    } else {
        double best = std::numeric_limits<double>::infinity();
        s = jets.samples.front().s;
        for (const auto& b : jets.samples) {
            const double dist = (x - b.x).squaredNorm();
            if (dist < best) {
                best = dist;
                s = b.s;
            }
        }
    }
    FootPoint fp;
    for (int it = 0; it < 50; ++it) {
        const Vec4 X = d.eval_fixed<4>(s, 0, 0);
        const Vec4 Xd = d.eval_fixed<4>(s, 1, 0);
        const Vec4 Xdd = d.eval_fixed<4>(s, 2, 0);
        const Vec4 dx = x - X;
        const double g1 = -dx.dot(Xd);
        double g2 = Xd.squaredNorm() - dx.dot(Xdd);
        if (!(g2 > 0.0)) g2 = Xd.squaredNorm();
        double step = -g1 / g2;
        double next = std::clamp(s + step, lo, hi);
        const bool done = std::abs(next - s) <= 1e-14 * (1.0 + std::abs(s));
        s = next;
        if (done) break;
    }
    fp.s = s;
    fp.dx = x - d.eval_fixed<4>(s, 0, 0);
    fp.distance = fp.dx.norm();
    const double tol = 1e-12 * (1.0 + hi - lo);
    fp.clamped = (s - lo <= tol && fp.dx.dot(d.eval_fixed<4>(s, 1, 0)) < 0.0) ||
                 (hi - s <= tol && fp.dx.dot(d.eval_fixed<4>(s, 1, 0)) > 0.0);
    return fp;
}

cplx phase_at(const BeamField& field, const Vec4& x, std::optional<double> hint)
{
    const FootPoint fp = foot_point(*field.jets, x, hint);
    if (fp.distance >= field.cutoff_radius) fail(ErrorKind::OutsideTube, "point lies outside the beam tube");
    const BeamJet j = field.jets->jet_at(fp.s, 0);
    const CVec4 dx = fp.dx.cast<cplx>();
    return field.jets->phi() + contract(dx, j.p) + 0.5 * (dx.transpose() * j.M * dx)(0);
}

cplx u_lambda_at(const BeamField& field, const Vec4& x, std::optional<double> hint)
{
    const FootPoint fp = foot_point(*field.jets, x, hint);
    const double q = fp.distance / field.cutoff_radius;
    if (q >= 1.0) return 0.0;
    const BeamJet j = field.jets->jet_at(fp.s, 0);
    const CVec4 dx = fp.dx.cast<cplx>();
    const cplx phase = field.jets->phi() + contract(dx, j.p) + 0.5 * (dx.transpose() * j.M * dx)(0);
    return field.scale * j.a * bump(q) * std::exp(cplx(0.0, field.lambda) * phase);
}

FieldValue field_value(const BeamField& field, const Vec4& x, std::optional<double> hint)
{
    FieldValue out;
    const FootPoint fp = foot_point(*field.jets, x, hint);
    out.s_foot = fp.s;
    const double q = fp.distance / field.cutoff_radius;
    if (q >= 1.0) return out;
    const BeamJet j = field.jets->jet_at(fp.s, 1);
    const Vec4 xdd = field.jets->dense->eval_fixed<4>(fp.s, 2, 0);
    const CVec4 dx = fp.dx.cast<cplx>();
    const CVec4 Mdx = j.M * dx;
    const cplx phase = field.jets->phi() + contract(dx, j.p) + 0.5 * (dx.transpose() * Mdx)(0);

    // d s*/dx; zero when the foot point is pinned to an end of the record.
    Vec4 ds = Vec4::Zero();
    if (!fp.clamped) ds = j.xdot / (j.xdot.squaredNorm() - fp.dx.dot(xdd));
    const cplx along = contract(dx, j.pdot) - j.p.dot(j.xdot) + 0.5 * (dx.transpose() * j.Mdot * dx)(0) - contract(Mdx, j.xdot);
    const CVec4 dphase = j.p.cast<cplx>() + Mdx + along * ds.cast<cplx>();

    const double chi = bump(q);
    const double dchi = bump_derivative(q);
    const Vec4 dq = fp.distance > 0.0 ? Vec4(fp.dx / (fp.distance * field.cutoff_radius)) : Vec4::Zero();
    const cplx wave = field.scale * std::exp(cplx(0.0, field.lambda) * phase);
    out.u = wave * j.a * chi;
    out.du = out.u * cplx(0.0, field.lambda) * dphase + wave * (j.adot * chi * ds.cast<cplx>() + j.a * dchi * dq.cast<cplx>());
    return out;
}

cplx box_fd_flux(const MetricModel& model, const GradientFunction& du, const Vec4& x, double h)
{
    const auto flux = [&](const Vec4& y, int mu) {
        return sqrt_abs_det_at(model, y) * contract(du(y), inverse_metric_at(model, y).row(mu).transpose());
    };
    cplx div = 0.0;
    for (int mu = 0; mu < 4; ++mu) {
        const Vec4 e = Vec4::Unit(mu) * h;
        div += (8.0 * (flux(x + e, mu) - flux(x - e, mu)) - (flux(x + 2.0 * e, mu) - flux(x - 2.0 * e, mu))) / (12.0 * h);
    }
    return div / sqrt_abs_det_at(model, x);
}

cplx box_fd_central(const MetricModel& model, const ScalarFunction& u, const Vec4& x, double h)
{
    const InverseMetricJet jet = inverse_metric_jet(model, x, 1);
    const Vec4 lg = log_sqrt_det_gradient_at(model, x);
    Vec4 Gamma;
    for (int nu = 0; nu < 4; ++nu) {
        double v = 0.0;
        for (int mu = 0; mu < 4; ++mu) v += jet.d[mu](mu, nu) + jet.ginv(mu, nu) * lg(mu);
        Gamma(nu) = v;
    }
    const cplx u0 = u(x);
    cplx box = 0.0;
    for (int mu = 0; mu < 4; ++mu) {
        const Vec4 em = Vec4::Unit(mu) * h;
        const cplx up = u(x + em), um = u(x - em);
        box += jet.ginv(mu, mu) * (up - 2.0 * u0 + um) / (h * h);
        box += Gamma(mu) * (up - um) / (2.0 * h);
        for (int nu = mu + 1; nu < 4; ++nu) {
            if (jet.ginv(mu, nu) == 0.0) continue;
            const Vec4 en = Vec4::Unit(nu) * h;
            const cplx mixed = (u(x + em + en) - u(x + em - en) - u(x - em + en) + u(x - em - en)) / (4.0 * h * h);
            box += 2.0 * jet.ginv(mu, nu) * mixed;
        }
    }
    return box;
}

double default_box_step(const BeamField& field)
{
    double kmax = 0.0;
    for (const auto& b : field.jets->samples) kmax = std::max(kmax, b.p.norm());
    return 0.5 * std::pow(field.lambda, -11.0 / 8.0) / kmax;
}

cplx box_u_fd(const BeamField& field, const MetricModel& model, const Vec4& x, double h, BoxStencil stencil)
{
    if (!(h > 0.0) || h > kTwoPi / field.lambda / 20.0) {
        std::ostringstream os;
        os << "difference step " << h << " does not resolve the wavelength for lambda = " << field.lambda;
        fail(ErrorKind::StepTooLarge, os.str());
    }
    const double hint = foot_point(*field.jets, x).s;
    if (stencil == BoxStencil::FluxFourthOrder)
        return box_fd_flux(model, [&](const Vec4& y) { return field_value(field, y, hint).du; }, x, h);
    return box_fd_central(model, [&](const Vec4& y) { return u_lambda_at(field, y, hint); }, x, h);
}

QuadratureResult energy_on_slice_detail(const BeamField& field, const MetricModel& model, const FoliationSpec& foliation,
                                        double tau, const QuadratureSpec& spec)
{
    const auto density = [&](const Vec4& x, double hint) {
        const FieldValue fv = field_value(field, x, hint);
        if (fv.u == 0.0 && fv.du.isZero()) return 0.0;
        const Vec4 N = energy_field_at(model, foliation, x);
        const Mat4 h = inverse_metric_at(model, x);
        const Vec4 G = h * time_function_gradient(model, x);
        const Mat4 g = metric_at(model, x);
        const double duN_duG = (contract(fv.du, N) * std::conj(contract(fv.du, G))).real();
        const double du2 = (fv.du.transpose() * h.cast<cplx>() * fv.du.conjugate())(0).real();
        return -(duN_duG - 0.5 * N.dot(g * G) * du2) * sqrt_abs_det_at(model, x);
    };
    return refine(
        spec,
        [&](int level) { return slice_integral(field, tau, spec.rule, spec.slice_nodes[level], density); },
        "slice energy");
}

double energy_on_slice(const BeamField& field, const MetricModel& model, const FoliationSpec& foliation, double tau,
                       const QuadratureSpec& spec)
{
    return energy_on_slice_detail(field, model, foliation, tau, spec).value;
}

QuadratureResult l2_residual_detail(const BeamField& field, const MetricModel& model, double tau0, double tau1,
                                    const QuadratureSpec& spec)
{
    const double h = spec.box_step > 0.0 ? spec.box_step : default_box_step(field);
    const auto integrand = [&](const Vec4& x, double) {
        const double q = foot_point(*field.jets, x).distance / field.cutoff_radius;
        if (q >= 1.0) return 0.0;
        return std::norm(box_u_fd(field, model, x, h, spec.stencil)) * sqrt_abs_det_at(model, x);
    };
    const auto evaluate = [&](int level) {
        const GaussRule gt = gauss_legendre(spec.time_nodes << level);
        double total = 0.0;
        for (std::size_t i = 0; i < gt.nodes.size(); ++i) {
            const double tau = 0.5 * (tau0 + tau1) + 0.5 * (tau1 - tau0) * gt.nodes[i];
            total += 0.5 * std::abs(tau1 - tau0) * gt.weights[i] * slice_integral(field, tau, spec.rule, spec.slice_nodes[level], integrand);
        }
        return total;
    };
    QuadratureResult r = refine(spec, evaluate, "residual");
    r.value = std::sqrt(r.value);
    r.previous = std::sqrt(r.previous);
    return r;
}

double l2_residual(const BeamField& field, const MetricModel& model, double tau0, double tau1, const QuadratureSpec& spec)
{
    return l2_residual_detail(field, model, tau0, tau1, spec).value;
}

BeamField normalize(const BeamField& field, const QuadratureSpec& spec)
{
    const double E0 = energy_on_slice(field, field.jets->model, field.jets->foliation, field.tau0, spec);
    if (!(E0 > 0.0)) fail(ErrorKind::ZeroEnergy, "initial slice energy vanishes");
    BeamField out = field;
    out.scale = field.scale * std::sqrt(field.energy_target / E0);
    return out;
}

}  // namespace beams
