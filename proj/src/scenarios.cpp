#include "beams/scenarios.hpp"

#include "beams/numerics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace beams {

namespace {

const double kPi = 3.14159265358979323846;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v)
{
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

bool non_increasing(const std::vector<double>& v)
{
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[i - 1]) return false;
    return true;
}

bool strictly_decreasing(const std::vector<double>& v)
{
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] < v[i - 1])) return false;
    return true;
}

bool strictly_increasing(const std::vector<double>& v)
{
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] > v[i - 1])) return false;
    return true;
}

double rel_err(double value, double expected) { return std::abs(value - expected) / std::abs(expected); }

void require_positive_mass(double m)
{
    if (!(m > 0.0) || !std::isfinite(m)) fail(ErrorKind::ParameterError, "mass must be positive");
}

void add_invariant_verdicts(ScenarioResult& out, const BeamJetRecord& jets, const std::string& prefix)
{
    const BeamInvariants inv = beam_invariants(jets);
    out.check(prefix + "symplectic_drift", inv.symplectic_drift < 1e-8, inv.symplectic_drift, 1e-8);
    out.check(prefix + "symmetry_error", inv.symmetry_error < 1e-8, inv.symmetry_error, 1e-8);
    out.check(prefix + "transversal_min_eig", inv.transversal_min_eig > 0.0, inv.transversal_min_eig, 0.0);
    out.check(prefix + "column_error", inv.column_error < 1e-8, inv.column_error, 1e-8);
    out.check(prefix + "riccati_residual", inv.riccati_residual < 1e-6, inv.riccati_residual, 1e-6);
    out.check(prefix + "min_det_J", inv.min_det_J > 0.0, inv.min_det_J, 0.0);
}

// Photon-orbit beam focused at the middle of a record that covers [0, window] with padding on both sides.
std::shared_ptr<const BeamJetRecord> photon_beam(const MetricModel& model, double m, double window, double padding)
{
    const double pad = padding * m;
    const GeodesicRecord rec = integrate_geodesic(model, photon_sphere_seed(m, -pad), window + 2.0 * pad);
    const double mid = 0.5 * (window + 2.0 * pad);
    BeamInitialData init = build_initial_M(model, rec.state_at(mid));
    init.s_ref = mid;
    return std::make_shared<const BeamJetRecord>(integrate_jv(model, rec, init));
}

}  // namespace

std::vector<double> Series::column(const std::string& name) const
{
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) fail(ErrorKind::ParameterError, "series has no column " + name);
    const std::size_t k = static_cast<std::size_t>(it - columns.begin());
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& row : rows) out.push_back(k < row.size() ? row[k] : std::numeric_limits<double>::quiet_NaN());
    return out;
}

std::string to_csv(const Series& series)
{
    std::ostringstream os;
    os << std::setprecision(17);
    for (std::size_t i = 0; i < series.columns.size(); ++i) os << (i ? "," : "") << series.columns[i];
    os << '\n';
    for (const auto& row : series.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
        os << '\n';
    }
    return os.str();
}

Fit fit_tail(const std::vector<double>& x, const std::vector<double>& y, double tail_fraction, const std::string& x_name,
             const std::string& y_name)
{
    if (x.size() != y.size()) fail(ErrorKind::ParameterError, "fit abscissae and ordinates differ in length");
    if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) fail(ErrorKind::ParameterError, "tail fraction must lie in (0, 1]");
    const std::size_t n = x.size();
    const std::size_t k = std::min(n, std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(tail_fraction * n - 1e-9))));
    const std::vector<double> xs(x.end() - k, x.end()), ys(y.end() - k, y.end());
    const LineFit lf = fit_line(xs, ys);
    Fit f;
    f.rate = lf.slope;
    f.stderr_rate = lf.slope_stderr;
    f.intercept = lf.intercept;
    f.residual = lf.residual;
    f.n = lf.n;
    f.x = x_name;
    f.y = y_name;
    f.window_lo = *std::min_element(xs.begin(), xs.end());
    f.window_hi = *std::max_element(xs.begin(), xs.end());
    return f;
}

bool ScenarioResult::passed() const
{
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

void ScenarioResult::check(const std::string& verdict_name, bool pass, double value, double threshold, const std::string& detail)
{
    verdicts.push_back(Verdict{verdict_name, pass, value, threshold, detail});
}

const Verdict* ScenarioResult::verdict(const std::string& verdict_name) const
{
    for (const Verdict& v : verdicts)
        if (v.name == verdict_name) return &v;
    return nullptr;
}

std::vector<double> default_lambda_grid() { return {100.0, 200.0, 400.0, 800.0, 1600.0}; }

CotangentState photon_sphere_seed(double m, double t0)
{
    const MetricModel model = MetricModel::schwarzschild(m);
    const TimeFunctionShape ts = time_function_shape(model, 3.0 * m);
    return CotangentState{0.0, Vec4((t0 - ts.F) / ts.c0, 3.0 * m, kPi / 2, 0.0),
                          Vec4(-1.0 / 3.0, 2.0 / 3.0, 0.0, std::sqrt(3.0) * m)};
}

CotangentState horizon_generator_seed(double m, double s)
{
    if (!(s > 0.0)) fail(ErrorKind::ParameterError, "generator parameter must be positive");
    const MetricModel model = MetricModel::schwarzschild(m);
    const TimeFunctionShape ts = time_function_shape(model, 2.0 * m);
    return CotangentState{s, Vec4((4.0 * m * std::log(s) - ts.F) / ts.c0, 2.0 * m, kPi / 2, 0.0), Vec4(0.0, 4.0 * m / s, 0.0, 0.0)};
}

ScenarioResult photon_sphere_run(double m, const std::vector<double>& lambda_grid, double T, const PhotonSphereOptions& options)
{
    require_positive_mass(m);
    if (!(T > 0.0)) fail(ErrorKind::ParameterError, "time horizon must be positive");
    const auto t0 = Clock::now();
    const MetricModel model = MetricModel::schwarzschild(m);
    ScenarioResult out;
    out.name = "photon-sphere";
    out.params = {{"m", m}, {"T", T}};
    out.lambda_grid = lambda_grid;

    // Orbit over t* in [0, T]; t*dot = 1 on the orbit.
    GeodesicOptions gopt;
    gopt.time_end = T;
    const GeodesicRecord rec = integrate_geodesic(model, photon_sphere_seed(m, 0.0), 2.0 * T + 10.0 * m, gopt);
    Series orbit{{"s", "t_star", "r", "energy", "constraint"}, {}};
    double r_drift = 0.0, e_err = 0.0;
    for (const CotangentState& st : rec.samples) {
        const double E = n_energy(model, rec.foliation, st);
        r_drift = std::max(r_drift, std::abs(st.x(1) - 3.0 * m) / m);
        e_err = std::max(e_err, std::abs(E - 1.0));
        orbit.add({st.s, time_function(model, st.x), st.x(1), E, constraint_drift(model, st)});
    }
    const double t_end = time_function(model, rec.samples.back().x);
    out.series["orbit"] = std::move(orbit);
    out.check("time_window_reached", std::abs(t_end - T) < 1e-8 * std::max(1.0, T), t_end, T);
    out.check("r_drift", r_drift < 1e-6, r_drift, 1e-6, "max |r - 3m| / m");
    out.check("energy_unit", e_err < 1e-8, e_err, 1e-8, "max |E - 1|");

    // Conjugate points along a record long enough for two of them.
    const double spacing = kPi * std::sqrt(27.0) * m;
    {
        const auto longrec = std::make_shared<const GeodesicRecord>(integrate_geodesic(model, photon_sphere_seed(m, 0.0), 2.1 * spacing));
        const JacobiRun run = jacobi_screen_run(model, longrec, 0.0);
        Series conj{{"k", "s", "expected"}, {}};
        for (std::size_t k = 0; k < run.conjugate_points.size(); ++k)
            conj.add({static_cast<double>(k + 1), run.conjugate_points[k], (k + 1) * spacing});
        out.series["conjugate_points"] = std::move(conj);
        const bool two = run.conjugate_points.size() >= 2;
        const double first_err = run.conjugate_points.empty() ? 1.0 : rel_err(run.conjugate_points[0], spacing);
        const double gap_err = two ? rel_err(run.conjugate_points[1] - run.conjugate_points[0], spacing) : 1.0;
        out.check("conjugate_first", first_err < 1e-3, first_err, 1e-3, "relative to pi sqrt(27) m");
        out.check("conjugate_spacing", gap_err < 1e-3, gap_err, 1e-3, "relative to pi sqrt(27) m");
    }

    if (options.run_beam && !lambda_grid.empty()) {
        const double window = options.beam_window > 0.0 ? options.beam_window : T;
        const auto jets = photon_beam(model, m, window, options.beam.padding);
        add_invariant_verdicts(out, *jets, "beam_");
        std::vector<double> taus;
        for (double tau = 0.0; tau <= window * (1.0 + 1e-12); tau += options.beam.slice_step * m) taus.push_back(tau);
        Series energy{{"tau", "geodesic"}, {}};
        for (double lam : lambda_grid) energy.columns.push_back("lambda_" + fmt(lam));
        for (double tau : taus) energy.add({tau, n_energy(model, jets->foliation, jets->geodesic->state_at(beam_slice_crossing(*jets, tau)))});
        Series errors{{"lambda", "max_error"}, {}};
        std::vector<double> maxerr;
        for (double lam : lambda_grid) {
            const BeamField f = normalize(make_beam_field(jets, lam, options.beam.cutoff_radius * m, 0.0), options.beam.quadrature);
            double mx = 0.0;
            for (std::size_t i = 0; i < taus.size(); ++i) {
                const double E = energy_on_slice(f, model, jets->foliation, taus[i], options.beam.quadrature);
                energy.rows[i].push_back(E);
                mx = std::max(mx, std::abs(E - energy.rows[i][1]));
            }
            errors.add({lam, mx});
            maxerr.push_back(mx);
        }
        out.series["beam_energy"] = std::move(energy);
        out.series["beam_error"] = std::move(errors);
        out.check("beam_error_largest_lambda", maxerr.back() < 0.05, maxerr.back(), 0.05,
                  "max over slices of |E - 1| at lambda = " + fmt(lambda_grid.back()));
        out.check("beam_error_non_increasing", non_increasing(maxerr), maxerr.front() - maxerr.back(), 0.0);
    }
    out.runtime_seconds = seconds_since(t0);
    return out;
}

ScenarioResult horizon_redshift_run(double m, double T, const RedshiftOptions& options)
{
    require_positive_mass(m);
    if (!(T > options.fit_start)) fail(ErrorKind::ParameterError, "time horizon must exceed the fit start");
    const auto t0 = Clock::now();
    const MetricModel model = MetricModel::schwarzschild(m);
    const double kappa = 1.0 / (4.0 * m);
    ScenarioResult out;
    out.name = "redshift";
    out.params = {{"m", m}, {"T", T}, {"kappa", kappa}};
    out.lambda_grid = options.lambda_grid;

    // Generator from s = 1 (t* = 0) to past t* = T.
    GeodesicOptions gopt;
    gopt.time_end = T + m;
    const CotangentState seed = horizon_generator_seed(m, 1.0);
    const GeodesicRecord rec = integrate_geodesic(model, seed, 2.0 * std::exp(kappa * (T + m)), gopt);
    const double E1 = n_energy(model, rec.foliation, seed);
    out.check("energy_at_s1", rel_err(E1, 4.0 * m) < 1e-10, E1, 4.0 * m, "1 / kappa");
    constexpr int kSamples = 41;
    Series gen{{"t_star", "s", "energy", "log_energy", "predicted"}, {}};
    std::vector<double> ts, logE;
    double max_pred = 0.0;
    for (int k = 0; k < kSamples; ++k) {
        const double tau = options.fit_start + (T - options.fit_start) * k / (kSamples - 1);
        const double s = slice_crossing(rec, tau);
        const double E = n_energy(model, rec.foliation, rec.state_at(s));
        const double pred = std::exp(-kappa * tau) / kappa;
        max_pred = std::max(max_pred, rel_err(E, pred));
        gen.add({tau, s, E, std::log(E), pred});
        ts.push_back(tau);
        logE.push_back(std::log(E));
    }
    out.series["generator"] = std::move(gen);
    const Fit fit = fit_tail(ts, logE, 1.0, "t_star", "log_energy");
    out.fits["redshift_rate"] = fit;
    const double slope_err = rel_err(fit.rate, -kappa);
    out.check("redshift_slope", slope_err < 1e-6, fit.rate, -kappa, "relative error " + fmt(slope_err));
    out.check("fit_residual", fit.residual < 1e-8, fit.residual, 1e-8);
    out.check("energy_closed_form", max_pred < 1e-8, max_pred, 1e-8, "E = (1/kappa) exp(-kappa t*)");

    // Outgoing radial family from just outside the horizon, run until r = 4m.
    {
        Series fam{{"delta", "r0", "escape_time", "blueshift_factor"}, {}};
        std::vector<double> esc(options.deltas.size()), blue(options.deltas.size());
        std::vector<std::string> errs(options.deltas.size());
        parallel_for(options.deltas.size(), [&](std::size_t i) {
            try {
                const double r0 = 2.0 * m * (1.0 + options.deltas[i]);
                const Vec4 x(0.0, r0, kPi / 2, 0.0);
                const Mat4 h = inverse_metric_at(model, x);
                // Radial null covector with p_t = -1 and outward tangent.
                const double A = h(1, 1), B = -h(0, 1), C = h(0, 0);
                const double q = -(B + std::copysign(std::sqrt(B * B - A * C), B));
                CotangentState st{0.0, x, Vec4(-1.0, 0.0, 0.0, 0.0)};
                for (double pr : {q / A, C / q}) {
                    st.p(1) = pr;
                    const Vec4 v = velocity(model, st);
                    if (v(1) > 0.0 && time_function_gradient(model, x).dot(v) > 0.0) break;
                }
                // Roundoff in D near r = 2m, times p_r^2 ~ 1/delta^2, sets the constraint floor at ~eps/delta^2.
                GeodesicOptions o;
                o.null_tol = 1e-4;
                o.stop_function = [&](const CotangentState& c) { return c.x(1) - 4.0 * m; };
                o.stop_label = "r = 4m";
                const GeodesicRecord g = integrate_geodesic(model, st, 1e4 * m / options.deltas[i], o);
                if (std::abs(g.samples.back().x(1) - 4.0 * m) > 1e-8 * m) fail(ErrorKind::NotCrossed, "outgoing ray did not reach r = 4m");
                esc[i] = time_function(model, g.samples.back().x) - time_function(model, x);
                blue[i] = n_energy(model, g.foliation, g.samples.front()) / n_energy(model, g.foliation, g.samples.back());
            } catch (const Error& e) {
                errs[i] = e.what();
            }
        });
        bool ok = true;
        for (std::size_t i = 0; i < options.deltas.size(); ++i) {
            if (!errs[i].empty()) {
                out.diagnostics.push_back("outgoing delta " + fmt(options.deltas[i]) + ": " + errs[i]);
                ok = false;
                continue;
            }
            fam.add({options.deltas[i], 2.0 * m * (1.0 + options.deltas[i]), esc[i], blue[i]});
        }
        out.series["outgoing_family"] = std::move(fam);
        out.check("outgoing_family_complete", ok, static_cast<double>(options.deltas.size()), 0.0);
        if (ok) {
            out.check("escape_time_grows", strictly_increasing(esc), esc.back(), esc.front());
            out.check("blueshift_factor_grows", strictly_increasing(blue), blue.back(), blue.front(), "E(r0) / E(4m)");
            std::vector<double> ld;
            for (double d : options.deltas) ld.push_back(std::log(1.0 / d));
            if (ld.size() >= 2) {
                // Escape time ~ (1/kappa) log(1/delta) near the horizon.
                const Fit esc_fit = fit_tail(ld, esc, 1.0, "log_inverse_delta", "escape_time");
                out.fits["escape_time"] = esc_fit;
                out.check("escape_time_rate", rel_err(esc_fit.rate, 1.0 / kappa) < 0.05, esc_fit.rate, 1.0 / kappa);
            }
        }
    }

    if (!options.lambda_grid.empty()) {
        const double W = options.beam_window * m;
        const double pad = options.beam.padding * m;
        const CotangentState bseed = horizon_generator_seed(m, std::exp(-kappa * pad));
        const GeodesicRecord brec = integrate_geodesic(model, bseed, std::exp(kappa * (W + pad)));
        const double s_ref = std::exp(kappa * 0.5 * W);
        BeamInitialData init = build_initial_M(model, brec.state_at(s_ref));
        init.s_ref = s_ref;
        const auto jets = std::make_shared<const BeamJetRecord>(integrate_jv(model, brec, init));
        add_invariant_verdicts(out, *jets, "beam_");
        std::vector<double> taus;
        for (double tau = 0.0; tau <= W * (1.0 + 1e-12); tau += options.beam.slice_step * m) taus.push_back(tau);
        Series ratio{{"tau", "predicted"}, {}};
        for (double lam : options.lambda_grid) ratio.columns.push_back("lambda_" + fmt(lam));
        for (double tau : taus) ratio.add({tau, std::exp(-kappa * tau)});
        Series errors{{"lambda", "max_rel_error"}, {}};
        std::vector<double> maxerr;
        for (double lam : options.lambda_grid) {
            const BeamField f = normalize(make_beam_field(jets, lam, options.beam.cutoff_radius * m, 0.0), options.beam.quadrature);
            double mx = 0.0;
            for (std::size_t i = 0; i < taus.size(); ++i) {
                const double q = energy_on_slice(f, model, jets->foliation, taus[i], options.beam.quadrature) / f.energy_target;
                ratio.rows[i].push_back(q);
                mx = std::max(mx, rel_err(q, ratio.rows[i][1]));
            }
            errors.add({lam, mx});
            maxerr.push_back(mx);
        }
        out.series["beam_ratio"] = std::move(ratio);
        out.series["beam_error"] = std::move(errors);
        out.check("beam_ratio_largest_lambda", maxerr.back() < 0.1, maxerr.back(), 0.1,
                  "relative error against exp(-kappa tau) at lambda = " + fmt(options.lambda_grid.back()));
        out.check("beam_error_non_increasing", non_increasing(maxerr), maxerr.front() - maxerr.back(), 0.0);
    }
    out.runtime_seconds = seconds_since(t0);
    return out;
}

namespace {

struct ConstantUSample {
    double v0 = 0.0;
    double r = 0.0;
    double energy = 0.0;
    double predicted = 0.0;
    double pointwise = 0.0;
    std::string error;
};

// Ingoing radial geodesic x = (v0, r_start - s, ...) with p = -dv, sampled where it crosses u = u0.
ConstantUSample constant_u_sample(const MetricModel& ingoing, double v0, double u0, double r_start, double r_stop,
                                  const std::function<bool(double)>& in_region, double outside, const FoliationSpec& energy_foliation,
                                  ChartKind energy_chart, const std::function<double(double)>& predicted)
{
    ConstantUSample out;
    out.v0 = v0;
    try {
        const CotangentState seed{0.0, Vec4(v0, r_start, kPi / 2, 0.0), Vec4(-1.0, 0.0, 0.0, 0.0)};
        GeodesicOptions o;
        o.stop_function = [r_stop](const CotangentState& c) { return c.x(1) - r_stop; };
        o.stop_label = "sampling radius";
        const GeodesicRecord g = integrate_geodesic(ingoing, seed, 2.0 * (r_start - r_stop), o);
        const auto level = [&](const CotangentState& c) {
            if (!in_region(c.x(1))) return outside;
            return chart_transition(ingoing, ChartKind::RNOutgoingU, c).x(0) - u0;
        };
        // `outside` has the sign u - u0 takes on entering the region, so the first sign change is u = u0.
        const std::optional<double> s = find_crossing(g, level);
        if (!s) fail(ErrorKind::NotCrossed, "geodesic ended before reaching the constant-u surface");
        const CotangentState st = g.state_at(*s);
        out.r = st.x(1);
        const CotangentState sampled = energy_chart == ingoing.chart ? st : chart_transition(ingoing, energy_chart, st);
        out.energy = n_energy(ingoing.in_chart(energy_chart), energy_foliation, sampled);
        out.predicted = predicted(out.r);
        if (energy_foliation.energy_field == EnergyFieldKind::CauchyRegular) {
            for (const CotangentState& c : g.samples)
                out.pointwise = std::max(out.pointwise, rel_err(n_energy(ingoing, energy_foliation, c), predicted(c.x(1))));
        }
    } catch (const Error& e) {
        out.error = e.what();
    }
    return out;
}

}  // namespace

std::vector<double> default_rn_v0_grid(double m, double e)
{
    const MetricModel model = MetricModel::reissner_nordstrom(m, e);
    const double rp = model.r_plus(), rm = model.r_minus();
    const double kappa_m = (rm - rp) / (2.0 * rm * rm);
    // r - r- ~ exp(kappa_m (v - u)); six decades keep r - r- well above the ulp of the affine parameter.
    const double span = 6.0 * std::log(10.0) / std::abs(kappa_m);
    std::vector<double> grid;
    constexpr int kPoints = 15;
    for (int k = 0; k < kPoints; ++k) grid.push_back(span * k / (kPoints - 1));
    return grid;
}

ScenarioResult rn_blueshift_run(double m, double e, const std::vector<double>& v0_grid)
{
    require_positive_mass(m);
    if (!(e > 0.0 && e < m)) fail(ErrorKind::ParameterError, "the sub-extremal blue-shift needs 0 < e < m");
    if (v0_grid.size() < 3) fail(ErrorKind::ParameterError, "advanced-time grid needs at least three points");
    const auto t0 = Clock::now();
    const MetricModel model = MetricModel::reissner_nordstrom(m, e, ChartKind::RNIngoingV);
    const double rp = model.r_plus(), rm = model.r_minus();
    const double kappa_m = (rm - rp) / (2.0 * rm * rm);
    ScenarioResult out;
    out.name = "rn-blueshift";
    out.params = {{"m", m}, {"e", e}, {"r_plus", rp}, {"r_minus", rm}, {"kappa_minus", kappa_m}};

    // The first advanced time crosses u0 at r = r- + 0.1 (r+ - r-); differences of r* keep this scale-free.
    const double r_ref = rm + 0.1 * (rp - rm);
    const double u0 = v0_grid.front() - 2.0 * tortoise(model, r_ref);
    out.params["u0"] = u0;
    const FoliationSpec cauchy{EnergyFieldKind::CauchyRegular, {}};
    std::vector<ConstantUSample> samples(v0_grid.size());
    parallel_for(v0_grid.size(), [&](std::size_t i) {
        samples[i] = constant_u_sample(
            model, v0_grid[i], u0, 3.0 * m, rm + 1e-11 * m, [&](double r) { return r > rm && r < rp; }, 1.0, cauchy, ChartKind::RNIngoingV,
            [rm](double r) { return 1.0 / (r - rm); });
    });
    Series series{{"v0", "r_minus_rm", "energy", "predicted", "log_energy"}, {}};
    std::vector<double> v, logE;
    double pointwise = 0.0, sampled = 0.0;
    bool ok = true;
    for (const ConstantUSample& s : samples) {
        if (!s.error.empty()) {
            out.diagnostics.push_back("v0 = " + fmt(s.v0) + ": " + s.error);
            ok = false;
            continue;
        }
        series.add({s.v0, s.r - rm, s.energy, s.predicted, std::log(s.energy)});
        v.push_back(s.v0);
        logE.push_back(std::log(s.energy));
        pointwise = std::max(pointwise, s.pointwise);
        sampled = std::max(sampled, rel_err(s.energy, s.predicted));
    }
    out.series["constant_u"] = std::move(series);
    out.check("family_complete", ok, static_cast<double>(v.size()), static_cast<double>(v0_grid.size()));
    out.check("pointwise_energy", ok && pointwise < 1e-8 && sampled < 1e-8, std::max(pointwise, sampled), 1e-8,
              "relative error against 1 / (r - r-)");
    if (v.size() >= 3) {
        const Fit fit = fit_tail(v, logE, 0.6, "v0", "log_energy");
        out.fits["blueshift_rate"] = fit;
        const double err = rel_err(fit.rate, -kappa_m);
        out.check("blueshift_rate", err < 0.02, fit.rate, -kappa_m, "relative error " + fmt(err));
    }
    out.runtime_seconds = seconds_since(t0);
    return out;
}

std::vector<double> default_extremal_v0_grid(double m)
{
    std::vector<double> grid;
    for (int k = 0; k <= 20; ++k) grid.push_back(10.0 * m * std::pow(2.0, 0.5 * k));
    return grid;
}

ScenarioResult rn_extremal_blueshift_run(double m, const std::vector<double>& v0_grid)
{
    require_positive_mass(m);
    if (v0_grid.size() < 3) fail(ErrorKind::ParameterError, "advanced-time grid needs at least three points");
    if (!(v0_grid.front() > 0.0)) fail(ErrorKind::ParameterError, "the power-law fit needs positive advanced times");
    const auto t0 = Clock::now();
    const MetricModel model = MetricModel::reissner_nordstrom(m, m, ChartKind::RNIngoingV);
    ScenarioResult out;
    out.name = "rn-extremal";
    const double inv_D_2m = 1.0 / horizon_function(model, 2.0 * m);
    out.check("inverse_D_at_2m", rel_err(inv_D_2m, 4.0) < 1e-14, inv_D_2m, 4.0);

    const double r_ref = 0.9 * m;
    const double u0 = v0_grid.front() - 2.0 * tortoise(model, r_ref);
    out.params = {{"m", m}, {"e", m}, {"u0", u0}};
    const FoliationSpec field{EnergyFieldKind::ExtremalOutgoing, {}};
    std::vector<ConstantUSample> samples(v0_grid.size());
    parallel_for(v0_grid.size(), [&](std::size_t i) {
        samples[i] = constant_u_sample(
            model, v0_grid[i], u0, 2.0 * m, 0.5 * m, [m](double r) { return r < m; }, -1.0, field, ChartKind::RNOutgoingU,
            [&model](double r) { return 1.0 + 2.0 / horizon_function(model, r); });
    });
    Series series{{"v0", "m_minus_r", "energy", "predicted", "coefficient_2_over_D"}, {}};
    std::vector<double> lv, lE;
    double sampled = 0.0;
    bool ok = true;
    for (const ConstantUSample& s : samples) {
        if (!s.error.empty()) {
            out.diagnostics.push_back("v0 = " + fmt(s.v0) + ": " + s.error);
            ok = false;
            continue;
        }
        series.add({s.v0, m - s.r, s.energy, s.predicted, 2.0 / horizon_function(model, s.r)});
        lv.push_back(std::log(s.v0));
        lE.push_back(std::log(s.energy));
        sampled = std::max(sampled, rel_err(s.energy, s.predicted));
    }
    out.series["constant_u"] = std::move(series);
    out.check("family_complete", ok, static_cast<double>(lv.size()), static_cast<double>(v0_grid.size()));
    out.check("energy_formula", ok && sampled < 1e-8, sampled, 1e-8, "relative error against 1 + 2/D");
    if (lv.size() >= 3) {
        const Fit fit = fit_tail(lv, lE, 0.6, "log_v0", "log_energy");
        out.fits["power_law"] = fit;
        const double err = rel_err(fit.rate, 2.0);
        out.check("power_law_exponent", err < 0.05, fit.rate, 2.0, "relative error " + fmt(err));
    }
    out.runtime_seconds = seconds_since(t0);
    return out;
}

double kerr_radial_potential(double m, double a, double L, double K, double r)
{
    const double Delta = r * r - 2.0 * m * r + a * a;
    const double P = r * r + a * a - L * a;
    return -K * Delta + P * P;
}

double kerr_radial_potential_derivative(double m, double a, double L, double K, double r)
{
    const double P = r * r + a * a - L * a;
    return -K * (2.0 * r - 2.0 * m) + 4.0 * r * P;
}

double kerr_trapping_polynomial(double m, double a, double r) { return r * (r - 3.0 * m) * (r - 3.0 * m) - 4.0 * a * a * m; }

std::pair<double, double> kerr_trapped_interval(double m, double a)
{
    require_positive_mass(m);
    if (!(a >= 0.0 && a <= m)) fail(ErrorKind::ParameterError, "spin must satisfy 0 <= a <= m");
    if (a == 0.0) return {3.0 * m, 3.0 * m};
    const auto p = [&](double r) { return kerr_trapping_polynomial(m, a, r); };
    const auto root = [&](double lo, double hi) {
        if (p(lo) == 0.0) return lo;
        if (p(hi) == 0.0) return hi;
        double r = bisect(p, lo, hi, 1e-15 * m);
        // Newton polish on the simple root.
        for (int i = 0; i < 3; ++i) {
            const double dp = (r - 3.0 * m) * (3.0 * r - 3.0 * m);
            if (dp == 0.0) break;
            const double next = r - p(r) / dp;
            if (!(next >= lo && next <= hi) || std::abs(p(next)) >= std::abs(p(r))) break;
            r = next;
        }
        return r;
    };
    // p(m) = 4m (m^2 - a^2) >= 0, p(3m) < 0, p(4m) = 4m (m^2 - a^2) >= 0.
    return {root(m, 3.0 * m), root(3.0 * m, 4.0 * m)};
}

KerrOrbitData kerr_spherical_orbit(double m, double a, double r0)
{
    require_positive_mass(m);
    if (a == 0.0) fail(ErrorKind::DegenerateSpin, "a = 0 has no closed-form L; use the Schwarzschild photon sphere");
    if (!(a > 0.0 && a <= m)) fail(ErrorKind::ParameterError, "spin must satisfy 0 < a <= m");
    const MetricModel model = MetricModel::kerr(m, a);
    if (!(r0 > model.r_plus())) fail(ErrorKind::InadmissibleOrbit, "orbit radius must lie outside the event horizon");
    const auto [rd, rr] = kerr_trapped_interval(m, a);
    if (r0 < rd || r0 > rr) fail(ErrorKind::InadmissibleOrbit, "orbit radius " + fmt(r0) + " outside the trapped interval");
    const double Delta = r0 * r0 - 2.0 * m * r0 + a * a;
    const double dDelta = 2.0 * r0 - 2.0 * m;
    const double P0 = 4.0 * r0 * Delta / dDelta;
    KerrOrbitData d;
    d.m = m;
    d.a = a;
    d.r0 = r0;
    d.K = P0 * P0 / Delta;
    d.L = (r0 * r0 + a * a - P0) / a;
    d.theta_equator = d.K - (d.L - a) * (d.L - a);
    // The interval ends carry equatorial orbits with Theta(pi/2) = 0 up to roundoff.
    if (d.theta_equator < 0.0 && d.theta_equator > -1e-10 * m * m) d.theta_equator = 0.0;
    d.residuals = {kerr_radial_potential(m, a, d.L, d.K, r0) / std::pow(m, 4),
                   kerr_radial_potential_derivative(m, a, d.L, d.K, r0) / std::pow(m, 3)};
    if (d.theta_equator < 0.0) fail(ErrorKind::InadmissibleOrbit, "Theta(pi/2) is negative");
    return d;
}

CotangentState kerr_orbit_seed(const KerrOrbitData& orbit, int theta_sign)
{
    const double pth = (theta_sign >= 0 ? 1.0 : -1.0) * std::sqrt(std::max(0.0, orbit.theta_equator));
    return CotangentState{0.0, Vec4(0.0, orbit.r0, kPi / 2, 0.0), Vec4(-orbit.E, 0.0, pth, orbit.L)};
}

namespace {

// Schwarzschild reduction: equatorial photon orbit with L = sqrt(27) m and K = 27 m^2.
KerrOrbitData schwarzschild_orbit(double m, double r0)
{
    if (std::abs(r0 - 3.0 * m) > 1e-12 * m) fail(ErrorKind::InadmissibleOrbit, "the non-rotating trapped set is r = 3m");
    KerrOrbitData d;
    d.m = m;
    d.r0 = 3.0 * m;
    d.L = std::sqrt(27.0) * m;
    d.K = 27.0 * m * m;
    d.theta_equator = d.K - d.L * d.L;
    d.residuals = {kerr_radial_potential(m, 0.0, d.L, d.K, d.r0) / std::pow(m, 4),
                   kerr_radial_potential_derivative(m, 0.0, d.L, d.K, d.r0) / std::pow(m, 3)};
    return d;
}

}  // namespace

ScenarioResult kerr_orbit_run(double m, double a, std::optional<double> r0)
{
    const auto t0 = Clock::now();
    ScenarioResult out;
    out.name = "kerr-orbit";
    const auto [rd, rr] = kerr_trapped_interval(m, a);
    const double r = r0.value_or(0.5 * (rd + rr));
    out.params = {{"m", m}, {"a", a}, {"r0", r}, {"r_delta", rd}, {"r_rho", rr}};
    const double pscale = m * m * m;
    const double pd = std::abs(kerr_trapping_polynomial(m, a, rd)) / pscale;
    const double pr = std::abs(kerr_trapping_polynomial(m, a, rr)) / pscale;
    out.check("interval_residual", std::max(pd, pr) < 1e-12, std::max(pd, pr), 1e-12, "|p(r)| / m^3 at both ends");
    const double pm = kerr_trapping_polynomial(m, m, m), p4 = kerr_trapping_polynomial(m, m, 4.0 * m);
    out.check("extremal_endpoints", pm == 0.0 && p4 == 0.0, std::abs(pm) + std::abs(p4), 0.0, "p(m) = p(4m) = 0 at a = m");
    const KerrOrbitData d = a == 0.0 ? schwarzschild_orbit(m, r) : kerr_spherical_orbit(m, a, r);
    out.params["L"] = d.L;
    out.params["K"] = d.K;
    out.params["theta_equator"] = d.theta_equator;
    out.check("radial_potential", std::abs(d.residuals[0]) < 1e-10, d.residuals[0], 1e-10, "R(r0) / m^4");
    out.check("radial_potential_derivative", std::abs(d.residuals[1]) < 1e-10, d.residuals[1], 1e-10, "R'(r0) / m^3");
    out.check("theta_admissible", d.theta_equator >= 0.0, d.theta_equator, 0.0);
    Series sweep{{"r0", "L", "K", "theta_equator", "R", "dR"}, {}};
    if (rr > rd) {
        for (int k = 0; k <= 16; ++k) {
            const double rk = rd + (rr - rd) * k / 16.0;
            try {
                const KerrOrbitData dk = kerr_spherical_orbit(m, a, rk);
                sweep.add({rk, dk.L, dk.K, dk.theta_equator, dk.residuals[0], dk.residuals[1]});
            } catch (const Error& e) {
                out.diagnostics.push_back("r0 = " + fmt(rk) + ": " + e.what());
            }
        }
    }
    out.series["orbits"] = std::move(sweep);
    out.runtime_seconds = seconds_since(t0);
    return out;
}

ScenarioResult kerr_trapped_run(double m, double a, double r0, double T)
{
    require_positive_mass(m);
    if (!(T > 0.0)) fail(ErrorKind::ParameterError, "time horizon must be positive");
    const auto t0 = Clock::now();
    ScenarioResult out;
    out.name = "kerr-trapped";
    const KerrOrbitData d = a == 0.0 ? schwarzschild_orbit(m, r0) : kerr_spherical_orbit(m, a, r0);
    out.params = {{"m", m}, {"a", a}, {"r0", d.r0}, {"T", T}, {"L", d.L}, {"K", d.K}};
    out.check("radial_potential", std::abs(d.residuals[0]) < 1e-10, d.residuals[0], 1e-10, "R(r0) / m^4");
    out.check("radial_potential_derivative", std::abs(d.residuals[1]) < 1e-10, d.residuals[1], 1e-10, "R'(r0) / m^3");

    const MetricModel bl = a == 0.0 ? MetricModel::kerr(m, 0.0) : MetricModel::kerr(m, a);
    const MetricModel ing = bl.in_chart(ChartKind::KerrIngoing);
    const CotangentState seed = chart_transition(bl, ChartKind::KerrIngoing, kerr_orbit_seed(d));
    out.check("seed_null", constraint_drift(ing, seed) < 1e-12, constraint_drift(ing, seed), 1e-12);
    // Trapped orbits are unstable; at 1e-12 the radial error reaches ~1e-5 m by t* = 100m.
    GeodesicOptions gopt;
    gopt.tol = 1e-14;
    const double tstart = time_function(ing, seed.x);
    gopt.time_end = tstart + T;
    const GeodesicRecord rec = integrate_geodesic(ing, seed, 1e3 * (T + m), gopt);
    const double t_reached = time_function(ing, rec.samples.back().x) - tstart;
    out.check("time_window_reached", std::abs(t_reached - T) < 1e-8 * std::max(1.0, T), t_reached, T);

    Series orbit{{"s", "t_star", "r", "theta", "energy", "teq_residual"}, {}};
    double drift = 0.0, emin = std::numeric_limits<double>::infinity(), emax = 0.0, teq = 0.0;
    for (const CotangentState& st : rec.samples) {
        const double E = n_energy(ing, rec.foliation, st);
        const double r = st.x(1), th = st.x(2);
        const CotangentState b = chart_transition(ing, ChartKind::KerrBoyerLindquist, st);
        const double rho2 = r * r + a * a * std::cos(th) * std::cos(th);
        const double Delta = r * r - 2.0 * m * r + a * a;
        const double P = r * r + a * a - d.L * a;
        const double pred = a * (d.L - a * std::sin(th) * std::sin(th)) + (r * r + a * a) * P / Delta;
        const double res = rel_err(rho2 * velocity(bl, b)(0), pred);
        drift = std::max(drift, std::abs(r - d.r0) / m);
        emin = std::min(emin, E);
        emax = std::max(emax, E);
        teq = std::max(teq, res);
        orbit.add({st.s, time_function(ing, st.x) - tstart, r, th, E, res});
    }
    out.series["orbit"] = std::move(orbit);
    out.params["energy_min"] = emin;
    out.params["energy_max"] = emax;
    out.params["energy_ratio"] = emin / emax;
    out.check("r_drift", drift < 1e-5, drift, 1e-5, "max |r - r0| / m");
    out.check("energy_positive", emin > 0.0, emin, 0.0);
    out.check("energy_finite", std::isfinite(emax), emax, 0.0, "min/max ratio " + fmt(emin / emax));
    out.check("teq_residual", teq < 1e-8, teq, 1e-8, "rho^2 tdot against a D + (r^2 + a^2) P / Delta");
    out.runtime_seconds = seconds_since(t0);
    return out;
}

std::vector<double> default_kerr_v0_grid(double m) { return {0.0, 5.0 * m, 10.0 * m}; }

ScenarioResult kerr_blueshift_run(double m, double a, const std::vector<double>& v0_grid)
{
    require_positive_mass(m);
    if (!(a > 0.0 && a <= m)) fail(ErrorKind::ParameterError, "the Kerr blue-shift needs 0 < a <= m");
    if (v0_grid.empty()) fail(ErrorKind::ParameterError, "advanced-time grid is empty");
    const auto t0 = Clock::now();
    const MetricModel ing = MetricModel::kerr(m, a, ChartKind::KerrIngoing);
    const MetricModel outc = ing.in_chart(ChartKind::KerrOutgoing);
    const double rm = ing.r_minus();
    const bool ext = ing.extremal();
    ScenarioResult out;
    out.name = "kerr-blueshift";
    out.params = {{"m", m}, {"a", a}, {"r_plus", ing.r_plus()}, {"r_minus", rm}};
    const std::vector<double> deltas{1e-2, 1e-3, 1e-4};
    // Sub-extremal samples approach r- from above inside region II, extremal ones approach r = m from below.
    const auto radius = [&](double delta) { return ext ? rm - delta * m : rm + delta * m; };

    struct Row {
        std::vector<double> coef, pred, phi;
        std::string error;
    };
    std::vector<Row> rows(v0_grid.size());
    parallel_for(v0_grid.size(), [&](std::size_t i) {
        Row& row = rows[i];
        try {
            const Vec4 x(v0_grid[i], ing.r_plus() + m, kPi / 2, 0.0);
            const CotangentState seed{0.0, x, -metric_at(ing, x).col(1)};
            GeodesicOptions o;
            const double r_stop = ext ? radius(2.0 * deltas.front()) : radius(0.5 * deltas.back());
            o.stop_function = [r_stop](const CotangentState& c) { return c.x(1) - r_stop; };
            const GeodesicRecord g = integrate_geodesic(ing, seed, 2.0 * (x(1) - r_stop), o);
            for (double delta : deltas) {
                const double rs = radius(delta);
                const auto s = find_crossing(g, [rs](const CotangentState& c) { return c.x(1) - rs; });
                if (!s) fail(ErrorKind::NotCrossed, "geodesic ended before r - r- = " + fmt(delta) + " m");
                const CotangentState st = chart_transition(ing, ChartKind::KerrOutgoing, g.state_at(*s));
                const Vec4 v = velocity(outc, st);
                const double r = st.x(1);
                const double Delta = horizon_function(ing, r);
                row.coef.push_back(v(0));
                row.pred.push_back(2.0 * (r * r + a * a) / Delta);
                row.phi.push_back(rel_err(v(3), 2.0 * a / Delta) + std::abs(v(1) + 1.0));
            }
        } catch (const Error& e) {
            row.error = e.what();
        }
    });
    Series series{{"v0", "delta", "coefficient", "predicted"}, {}};
    bool ok = true;
    double formula = 0.0, spread = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!rows[i].error.empty()) {
            ok = false;
            out.diagnostics.push_back("v0 = " + fmt(v0_grid[i]) + ": " + rows[i].error);
            continue;
        }
        for (std::size_t k = 0; k < deltas.size(); ++k) {
            series.add({v0_grid[i], deltas[k], rows[i].coef[k], rows[i].pred[k]});
            formula = std::max({formula, rel_err(rows[i].coef[k], rows[i].pred[k]), rows[i].phi[k]});
            spread = std::max(spread, rel_err(rows[i].coef[k], rows[0].coef[k]));
        }
    }
    out.series["coefficient"] = std::move(series);
    out.check("family_complete", ok, static_cast<double>(rows.size()), 0.0);
    if (ok) {
        const std::vector<double> mag{std::abs(rows[0].coef[0]), std::abs(rows[0].coef[1]), std::abs(rows[0].coef[2])};
        out.check("coefficient_formula", formula < 1e-8, formula, 1e-8, "velocity against 2(r^2+a^2)/Delta, -1, 2a/Delta");
        out.check("monotone_growth", strictly_increasing(mag), mag.back(), mag.front());
        std::vector<double> ld, lc;
        for (std::size_t k = 0; k < deltas.size(); ++k) {
            ld.push_back(std::log(deltas[k]));
            lc.push_back(std::log(mag[k]));
        }
        const Fit fit = fit_tail(ld, lc, 1.0, "log_delta", "log_coefficient");
        out.fits["divergence"] = fit;
        const double expected = ext ? -2.0 : -1.0;
        out.check("divergence_slope", rel_err(fit.rate, expected) < 0.05, fit.rate, expected);
        out.check("advanced_time_independence", spread < 1e-8, spread, 1e-8);
    }
    out.runtime_seconds = seconds_since(t0);
    return out;
}

ScenarioResult beam_study_run(double m, const std::vector<double>& lambda_grid, double T, const BeamStudyOptions& options)
{
    require_positive_mass(m);
    if (!(T > 0.0)) fail(ErrorKind::ParameterError, "time horizon must be positive");
    if (lambda_grid.size() < 2) fail(ErrorKind::ParameterError, "the residual study needs at least two frequencies");
    const auto t0 = Clock::now();
    const MetricModel model = MetricModel::schwarzschild(m);
    ScenarioResult out;
    out.name = "beam-study";
    out.params = {{"m", m}, {"T", T}};
    out.lambda_grid = lambda_grid;
    const auto jets = photon_beam(model, m, T, options.beam.padding);
    add_invariant_verdicts(out, *jets, "beam_");
    Series series{{"lambda", "raw", "normalized", "scale", "energy0"}, {}};
    std::vector<double> ll, lraw, lnorm, raw, norm;
    for (double lam : lambda_grid) {
        const BeamField f = make_beam_field(jets, lam, options.beam.cutoff_radius * m, 0.0);
        const QuadratureResult r = l2_residual_detail(f, model, 0.0, T, options.quadrature);
        const double E0 = energy_on_slice(f, model, jets->foliation, 0.0, options.beam.quadrature);
        const double scale = std::sqrt(f.energy_target / E0);
        series.add({lam, r.value, r.value * scale, scale, E0});
        ll.push_back(std::log(lam));
        lraw.push_back(std::log(r.value));
        lnorm.push_back(std::log(r.value * scale));
        raw.push_back(r.value);
        norm.push_back(r.value * scale);
    }
    out.series["residual"] = std::move(series);
    const Fit fr = fit_tail(ll, lraw, 1.0, "log_lambda", "log_raw_residual");
    const Fit fn = fit_tail(ll, lnorm, 1.0, "log_lambda", "log_normalized_residual");
    out.fits["raw_slope"] = fr;
    out.fits["normalized_slope"] = fn;
    const double variation = *std::max_element(raw.begin(), raw.end()) / *std::min_element(raw.begin(), raw.end());
    out.check("raw_bounded", variation < 2.0, variation, 2.0, "max/min of the raw residual over the grid");
    out.check("normalized_decreasing", strictly_decreasing(norm), norm.front() / norm.back(), 1.0);
    out.check("normalized_slope", std::abs(fn.rate + 0.25) <= 0.15, fn.rate, -0.25, "tolerance 0.15");
    out.runtime_seconds = seconds_since(t0);
    return out;
}

ScenarioResult caustic_scan_run(double m, int passages)
{
    require_positive_mass(m);
    if (passages < 1) fail(ErrorKind::ParameterError, "need at least one conjugate passage");
    const auto t0 = Clock::now();
    const MetricModel model = MetricModel::schwarzschild(m);
    const double spacing = kPi * std::sqrt(27.0) * m;
    ScenarioResult out;
    out.name = "caustic-scan";
    out.params = {{"m", m}, {"passages", static_cast<double>(passages)}};
    const auto rec = std::make_shared<const GeodesicRecord>(integrate_geodesic(model, photon_sphere_seed(m, 0.0), (passages + 0.5) * spacing));
    const JacobiRun run = jacobi_screen_run(model, rec, 0.0);
    const double first_err = run.conjugate_points.empty() ? 1.0 : rel_err(run.conjugate_points.front(), spacing);
    out.check("conjugate_first", first_err < 1e-3, first_err, 1e-3, "relative to pi sqrt(27) m");
    out.check("conjugate_count", static_cast<int>(run.conjugate_points.size()) >= passages,
              static_cast<double>(run.conjugate_points.size()), passages);
    Series conj{{"k", "s", "expected"}, {}};
    for (std::size_t k = 0; k < run.conjugate_points.size(); ++k) conj.add({static_cast<double>(k + 1), run.conjugate_points[k], (k + 1) * spacing});
    out.series["conjugate_points"] = std::move(conj);

    const BeamInitialData init = build_initial_M(model, rec->samples.front());
    const BeamJetRecord jets = integrate_jv(model, *rec, init);
    const double complex_min = jets.min_det_J();
    out.check("complex_det_J_bounded", complex_min > 1e-3, complex_min, 1e-3, "min |det J| over the record, initial scale 1");
    const GeodesicRecord shortrec = integrate_geodesic(model, photon_sphere_seed(m, 0.0), 1.2 * spacing);
    const RealRiccatiResult real = geometric_optics_real_riccati(model, shortrec, init.M0.real());
    const double limit = 1.1 * (run.conjugate_points.empty() ? spacing : run.conjugate_points.front());
    const double blow = real.blowup_s.value_or(std::numeric_limits<double>::infinity());
    out.check("real_riccati_breakdown", blow <= limit, blow, limit, "first |det J| <= 1e-10 of the real comparison");

    const BeamInvariants inv = beam_invariants(jets);
    out.params["symplectic_drift"] = inv.symplectic_drift;
    out.params["symmetry_error"] = inv.symmetry_error;
    out.params["transversal_min_eig"] = inv.transversal_min_eig;
    out.params["column_error"] = inv.column_error;
    out.params["riccati_residual"] = inv.riccati_residual;
    Series csv{{"s", "screen_det", "det_J_complex", "det_J_real"}, {}};
    std::size_t r = 0;
    for (std::size_t i = 0; i < run.s.size(); ++i) {
        const double s = run.s[i];
        double re = std::numeric_limits<double>::quiet_NaN();
        if (!real.s.empty() && s <= real.s.back()) {
            while (r + 1 < real.s.size() && real.s[r + 1] <= s) ++r;
            re = std::abs(real.det_J[r]);
        }
        csv.add({s, run.screen_det[i], jets.contains(s) ? beam_det_J(jets, s) : std::numeric_limits<double>::quiet_NaN(), re});
    }
    out.series["caustics"] = std::move(csv);
    out.runtime_seconds = seconds_since(t0);
    return out;
}

}  // namespace beams
