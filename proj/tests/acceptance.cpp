#include "beams/geodesics.hpp"
#include "beams/scenarios.hpp"
#include "test_support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace beams;

namespace {

struct Criterion {
    int id;
    std::string title;
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what)
    {
        pass = pass && ok;
        detail << (ok ? "" : "[fail] ") << what << "; ";
    }
};

std::string g(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

// Requires the named verdicts of a scenario and reports their values.
void require_verdicts(Criterion& c, const ScenarioResult& r, const std::vector<std::string>& names, const std::string& label)
{
    for (const auto& n : names) {
        const Verdict* v = r.verdict(n);
        if (!v) {
            c.require(false, label + " " + n + " missing");
            continue;
        }
        c.require(v->pass, label + " " + n + " = " + g(v->value) + " (threshold " + g(v->threshold) + ")");
    }
}

void require_beam_invariants(Criterion& c, const ScenarioResult& r, const std::string& label)
{
    require_verdicts(c, r, {"beam_symplectic_drift", "beam_symmetry_error", "beam_transversal_min_eig", "beam_column_error", "beam_riccati_residual"},
                     label);
}

double max_rel_scaled(const Series& a, const Series& b, std::size_t col, double factor)
{
    if (a.rows.size() != b.rows.size() || a.rows.empty()) return std::numeric_limits<double>::infinity();
    double worst = 0.0;
    for (std::size_t i = 0; i < a.rows.size(); ++i) worst = std::max(worst, testing::rel_err(b.rows[i][col], factor * a.rows[i][col], 0.0));
    return worst;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main()
{
    std::vector<Criterion> all;
    const auto criterion = [&](int id, const std::string& title, const std::function<void(Criterion&)>& body) {
        all.push_back(Criterion{id, title});
        Criterion& c = all.back();
        try {
            body(c);
        } catch (const std::exception& e) {
            c.require(false, std::string("exception: ") + e.what());
        }
        std::printf("criterion %2d %s: %s | %s\n", c.id, c.pass ? "PASS" : "FAIL", c.title.c_str(), c.detail.str().c_str());
        std::fflush(stdout);
    };
    const std::vector<double> grid = default_lambda_grid();

    criterion(1, "photon-sphere trapping over t* in [0, 50m]", [](Criterion& c) {
        PhotonSphereOptions o;
        o.run_beam = false;
        const ScenarioResult r = photon_sphere_run(1.0, {}, 50.0, o);
        require_verdicts(c, r, {"time_window_reached", "r_drift", "energy_unit"}, "orbit");
        c.require(r.runtime_seconds < 10.0, "runtime " + g(r.runtime_seconds) + " s < 10 s");
    });

    ScenarioResult caustics1;
    criterion(2, "conjugate points, complex det J and real-Riccati breakdown", [&](Criterion& c) {
        caustics1 = caustic_scan_run(1.0, 10);
        require_verdicts(c, caustics1, {"conjugate_first", "conjugate_count", "complex_det_J_bounded", "real_riccati_breakdown"}, "scan");
    });

    ScenarioResult redshift_m1, redshift_m2;
    criterion(3, "horizon red-shift slope -1/(4m) for m = 1, 2", [&](Criterion& c) {
        RedshiftOptions o2;
        o2.fit_start = 2.0;
        redshift_m1 = horizon_redshift_run(1.0, 40.0);
        redshift_m2 = horizon_redshift_run(2.0, 80.0, o2);
        for (const auto* r : {&redshift_m1, &redshift_m2}) {
            const std::string label = "m = " + g(r->params.at("m"));
            require_verdicts(c, *r, {"redshift_slope"}, label);
            c.require(r->runtime_seconds < 5.0, label + " runtime " + g(r->runtime_seconds) + " s < 5 s");
        }
    });

    criterion(4, "sub-extremal RN blue-shift for e = 0.8, 0.6", [](Criterion& c) {
        for (double e : {0.8, 0.6}) {
            const ScenarioResult r = rn_blueshift_run(1.0, e, default_rn_v0_grid(1.0, e));
            require_verdicts(c, r, {"family_complete", "pointwise_energy", "blueshift_rate"}, "e = " + g(e));
        }
    });

    criterion(5, "extremal RN power-law exponent 2", [](Criterion& c) {
        const ScenarioResult r = rn_extremal_blueshift_run(1.0, default_extremal_v0_grid(1.0));
        require_verdicts(c, r, {"family_complete", "power_law_exponent"}, "extremal");
    });

    criterion(6, "Kerr trapped orbits for a = 0.5, 0.9", [](Criterion& c) {
        for (double a : {0.5, 0.9}) {
            const std::string label = "a = " + g(a);
            const ScenarioResult orbit = kerr_orbit_run(1.0, a);
            require_verdicts(c, orbit, {"interval_residual", "extremal_endpoints", "radial_potential", "radial_potential_derivative"}, label);
            const auto [lo, hi] = kerr_trapped_interval(1.0, a);
            const ScenarioResult run = kerr_trapped_run(1.0, a, 0.5 * (lo + hi), 100.0);
            require_verdicts(c, run, {"time_window_reached", "r_drift", "energy_positive", "energy_finite"}, label);
        }
    });

    ScenarioResult photon_beam, horizon_beam;
    criterion(7, "beam energy tracks the geodesic energy", [&](Criterion& c) {
        photon_beam = photon_sphere_run(1.0, grid, 20.0);
        require_verdicts(c, photon_beam, {"beam_error_largest_lambda", "beam_error_non_increasing"}, "photon sphere");
        RedshiftOptions o;
        o.lambda_grid = grid;
        horizon_beam = horizon_redshift_run(1.0, 40.0, o);
        require_verdicts(c, horizon_beam, {"beam_ratio_largest_lambda"}, "horizon");
    });

    ScenarioResult study;
    criterion(8, "wave-operator residual scaling", [&](Criterion& c) {
        study = beam_study_run(1.0, grid, 4.0);
        require_verdicts(c, study, {"raw_bounded", "normalized_decreasing", "normalized_slope"}, "study");
    });

    criterion(9, "structural invariants on every beam run", [&](Criterion& c) {
        require_beam_invariants(c, photon_beam, "photon sphere");
        require_beam_invariants(c, horizon_beam, "horizon");
        require_beam_invariants(c, study, "study");
        const auto& p = caustics1.params;
        c.require(p.at("symplectic_drift") < 1e-8, "caustic scan symplectic_drift = " + g(p.at("symplectic_drift")));
        c.require(p.at("symmetry_error") < 1e-8, "caustic scan symmetry_error = " + g(p.at("symmetry_error")));
        c.require(p.at("transversal_min_eig") > 0.0, "caustic scan transversal_min_eig = " + g(p.at("transversal_min_eig")));
        c.require(p.at("column_error") < 1e-8, "caustic scan column_error = " + g(p.at("column_error")));
        c.require(p.at("riccati_residual") < 1e-6, "caustic scan riccati_residual = " + g(p.at("riccati_residual")));
        const double t = photon_beam.runtime_seconds + horizon_beam.runtime_seconds + caustics1.runtime_seconds;
        c.require(t < 60.0, "photon, horizon and caustic beam runs " + g(t) + " s < 60 s");
    });

    criterion(10, "oracle suite", [&](Criterion& c) {
        std::mt19937_64 rng(20240611);
        double d1 = 0.0, d2 = 0.0, lg = 0.0;
        for (const auto& cc : testing::chart_cases())
            for (int n = 0; n < 1000; ++n) {
                const testing::OracleErrors e = testing::derivative_oracle_errors(cc.model, testing::random_point(cc, rng));
                d1 = std::max(d1, e.d1);
                d2 = std::max(d2, e.d2);
                lg = std::max(lg, e.log_det);
            }
        c.require(std::max({d1, d2, lg}) < 1e-7,
                  "derivative oracles over " + std::to_string(testing::chart_cases().size()) + " charts x 1000 points: " + g(d1) + ", " + g(d2) +
                      ", " + g(lg));

        std::uniform_real_distribution<double> u(-1.0, 1.0);
        double worst_H = 0.0;
        for (const auto& pr : testing::transition_pairs()) {
            const MetricModel target = pr.from.in_chart(pr.to);
            const testing::ChartCase cc{pr.from, pr.r_lo, pr.r_hi};
            for (int n = 0; n < 1000; ++n) {
                const CotangentState st{0.0, testing::random_point(cc, rng), Vec4(u(rng), u(rng), u(rng), u(rng))};
                const CotangentState out = chart_transition(pr.from, pr.to, st);
                const double scale = 0.5 * (st.p.cwiseAbs().transpose() * inverse_metric_at(pr.from, st.x).cwiseAbs() * st.p.cwiseAbs())(0, 0);
                worst_H = std::max(worst_H, std::abs(hamiltonian(pr.from, st) - hamiltonian(target, out)) / scale);
            }
        }
        c.require(worst_H < 1e-10, "chart transitions relative H change " + g(worst_H));

        const double gen = max_rel_scaled(redshift_m1.series.at("generator"), redshift_m2.series.at("generator"), 2, 2.0);
        c.require(gen < 1e-8, "generator energy E(2m) = 2 E(m): " + g(gen));
        const double slope = testing::rel_err(2.0 * redshift_m2.fits.at("redshift_rate").rate, redshift_m1.fits.at("redshift_rate").rate);
        c.require(slope < 1e-8, "red-shift rate m kappa: " + g(slope));

        std::vector<double> v1 = default_rn_v0_grid(1.0, 0.8), v2;
        for (double v : v1) v2.push_back(2.0 * v);
        const Series r1 = rn_blueshift_run(1.0, 0.8, v1).series.at("constant_u");
        const Series r2 = rn_blueshift_run(2.0, 1.6, v2).series.at("constant_u");
        const double rn = std::max(max_rel_scaled(r1, r2, 1, 2.0), max_rel_scaled(r1, r2, 2, 0.5));
        c.require(rn < 1e-8, "RN constant-u (r - r-)/m and m E: " + g(rn));

        const ScenarioResult c2 = caustic_scan_run(2.0, 3);
        const Series& s1 = caustics1.series.at("conjugate_points");
        Series s1_short{s1.columns, {s1.rows.begin(), s1.rows.begin() + std::min<std::size_t>(s1.rows.size(), c2.series.at("conjugate_points").rows.size())}};
        const double conj = max_rel_scaled(s1_short, c2.series.at("conjugate_points"), 1, 2.0);
        c.require(conj < 1e-8, "conjugate points s/m: " + g(conj));

        const KerrOrbitData k1 = kerr_spherical_orbit(1.0, 0.5, 3.0), k2 = kerr_spherical_orbit(2.0, 1.0, 6.0);
        const double kerr = std::max(testing::rel_err(k2.L, 2.0 * k1.L), testing::rel_err(k2.K, 4.0 * k1.K));
        c.require(kerr < 1e-8, "Kerr orbit L/m and K/m^2: " + g(kerr));

        const Series b1 = kerr_blueshift_run(1.0, 0.5, {0.0}).series.at("coefficient");
        const Series b2 = kerr_blueshift_run(2.0, 1.0, {0.0}).series.at("coefficient");
        const double coeff = max_rel_scaled(b1, b2, 2, 1.0);
        c.require(coeff < 1e-8, "Kerr Cauchy-horizon coefficient: " + g(coeff));
    });

    int passed = 0;
    for (const auto& c : all) passed += c.pass ? 1 : 0;
    std::printf("acceptance: %d of %zu criteria pass\n", passed, all.size());
    return 0;
}
