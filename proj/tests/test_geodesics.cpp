#include "beams/geodesics.hpp"
#include "beams/numerics.hpp"
#include "doctest.h"

#include <cmath>

using namespace beams;

namespace {

CotangentState photon_sphere(double m)
{
    return CotangentState{0.0, Vec4(0.0, 3.0 * m, M_PI / 2, 0.0), Vec4(-1.0 / 3.0, 2.0 / 3.0, 0.0, std::sqrt(3.0) * m)};
}

}  // namespace

TEST_SUITE("geodesics")
{
    TEST_CASE("Hamiltonian values")
    {
        const MetricModel mink = MetricModel::minkowski();
        CHECK(hamiltonian(mink, CotangentState{0.0, Vec4::Zero(), Vec4(-1, 1, 0, 0)}) == 0.0);
        CHECK(hamiltonian(mink, CotangentState{0.0, Vec4::Zero(), Vec4(-1, 0, 0, 0)}) == -0.5);
        const MetricModel schw = MetricModel::schwarzschild(1.0);
        CHECK(std::abs(hamiltonian(schw, photon_sphere(1.0))) < 1e-14);
    }

    TEST_CASE("flow right-hand side fixed points")
    {
        const MetricModel mink = MetricModel::minkowski();
        const FlowDerivative d0 = flow_rhs(mink, CotangentState{0.0, Vec4::Zero(), Vec4(-1, 1, 0, 0)});
        CHECK((d0.xdot - Vec4(1, 1, 0, 0)).norm() == 0.0);
        CHECK(d0.pdot.norm() == 0.0);
        const FlowDerivative d = flow_rhs(MetricModel::schwarzschild(1.0), photon_sphere(1.0));
        CHECK(std::abs(d.xdot(1)) < 1e-15);
        CHECK(std::abs(d.pdot(1)) < 1e-15);
        CHECK(d.xdot(0) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(d.xdot(3) == doctest::Approx(1.0 / std::sqrt(27.0)).epsilon(1e-15));
    }

    TEST_CASE("Minkowski straight line")
    {
        const MetricModel mink = MetricModel::minkowski();
        const GeodesicRecord rec = integrate_geodesic(mink, CotangentState{0.0, Vec4::Zero(), Vec4(-1, 1, 0, 0)}, 10.0);
        CHECK((rec.samples.back().x - Vec4(10, 10, 0, 0)).norm() < 1e-12);
        CHECK(slice_crossing(rec, 4.25) == doctest::Approx(4.25).epsilon(1e-13));
        CHECK(n_energy(mink, FoliationSpec{}, rec.state_at(3.0)) == doctest::Approx(1.0).epsilon(1e-14));
    }

    TEST_CASE("photon sphere: radius, energy, slices, constraint")
    {
        const MetricModel schw = MetricModel::schwarzschild(1.0);
        const GeodesicRecord rec = integrate_geodesic(schw, photon_sphere(1.0), 100.0);
        double max_dr = 0.0, max_de = 0.0;
        for (const auto& st : rec.samples) {
            max_dr = std::max(max_dr, std::abs(st.x(1) - 3.0));
            max_de = std::max(max_de, std::abs(n_energy(schw, rec.foliation, st) - 1.0));
        }
        for (int i = 0; i <= 400; ++i) max_dr = std::max(max_dr, std::abs(rec.state_at(0.25 * i).x(1) - 3.0));
        CHECK(max_dr < 1e-6);
        CHECK(max_de < 1e-8);
        CHECK(rec.max_constraint_drift < 1e-10);
        // t* = s along the orbit.
        const double s1 = slice_crossing(rec, 10.0);
        const double s2 = slice_crossing(rec, 30.0);
        CHECK(s1 == doctest::Approx(10.0).epsilon(1e-10));
        CHECK((s2 - s1) / 20.0 == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(std::abs(time_function(schw, rec.state_at(s2).x) - 30.0) < 1e-10);
        CHECK_THROWS_AS(slice_crossing(rec, -1.0), Error);
    }

    TEST_CASE("horizon generator: log clock and red-shifted energy")
    {
        const double m = 1.0;
        const MetricModel schw = MetricModel::schwarzschild(m);
        const CotangentState seed{1.0, Vec4(0.0, 2.0 * m, M_PI / 2, 0.0), Vec4(0.0, 4.0 * m, 0.0, 0.0)};
        const GeodesicRecord rec = integrate_geodesic(schw, seed, 100.0);
        for (const auto& st : rec.samples) {
            CHECK(st.x(1) == 2.0 * m);
            CHECK(st.x(0) == doctest::Approx(4.0 * m * std::log(st.s)).epsilon(1e-10));
            CHECK(n_energy(schw, rec.foliation, st) == doctest::Approx(4.0 * m / st.s).epsilon(1e-10));
        }
    }

    TEST_CASE("null completion picks the future root")
    {
        const MetricModel kerr = MetricModel::kerr(1.0, 0.7, ChartKind::KerrIngoing);
        const Vec4 x(0.0, 4.0, 1.2, 0.3);
        const CotangentState st = null_seed(kerr, 0.0, x, Vec4(0.0, 0.3, -0.2, 0.5));
        CHECK(std::abs(hamiltonian(kerr, st)) < 1e-14);
        CHECK(time_function_gradient(kerr, x).dot(velocity(kerr, st)) > 0.0);
        // Ingoing RN chart has g^{vv} = 0: the constraint is linear in p_v.
        const MetricModel rn = MetricModel::reissner_nordstrom(1.0, 0.5, ChartKind::RNIngoingV);
        const CotangentState s2 = null_seed(rn, 0.0, Vec4(0.0, 3.0, 1.0, 0.0), Vec4(0.0, 0.2, 0.1, 0.4));
        CHECK(std::abs(hamiltonian(rn, s2)) < 1e-15);
    }

    TEST_CASE("affine reparametrization scales the energy exactly")
    {
        const MetricModel kerr = MetricModel::kerr(1.0, 0.6, ChartKind::KerrIngoing);
        const CotangentState st = null_seed(kerr, 0.0, Vec4(0.0, 6.0, 1.3, 0.0), Vec4(-1.0, 0.0, 0.3, 1.5), 1);
        const double c = 2.5;
        CotangentState scaled = st;
        scaled.p *= c;
        const GeodesicRecord r1 = integrate_geodesic(kerr, st, 30.0);
        const GeodesicRecord r2 = integrate_geodesic(kerr, scaled, 30.0 / c);
        const double t0 = time_function(kerr, st.x);
        for (double tau : {t0 + 2.0, t0 + 5.0, t0 + 9.0}) {
            const CotangentState a = r1.state_at(slice_crossing(r1, tau));
            const CotangentState b = r2.state_at(slice_crossing(r2, tau));
            CHECK((a.x - b.x).norm() < 1e-9);
            CHECK(n_energy(kerr, r2.foliation, b) == doctest::Approx(c * n_energy(kerr, r1.foliation, a)).epsilon(1e-9));
        }
    }

    TEST_CASE("time reversal returns to the seed")
    {
        const MetricModel kerr = MetricModel::kerr(1.0, 0.9);
        const CotangentState st = null_seed(kerr, 0.0, Vec4(0.0, 8.0, 1.0, 0.0), Vec4(0.0, -0.3, 0.5, 2.0));
        const GeodesicRecord fw = integrate_geodesic(kerr, st, 40.0);
        const GeodesicRecord bw = integrate_geodesic(kerr, fw.samples.back(), 0.0);
        CHECK((bw.samples.back().x - st.x).norm() < 1e-8);
        CHECK((bw.samples.back().p - st.p).norm() < 1e-8);
    }

    TEST_CASE("chart degeneration ends the run with a boundary event")
    {
        const MetricModel bl = MetricModel::schwarzschild(1.0, ChartKind::RNExteriorT);
        const Vec4 x(0.0, 6.0, M_PI / 2, 0.0);
        const CotangentState st = null_seed(bl, 0.0, x, Vec4(0.0, -1.0, 0.0, 0.0));
        const GeodesicRecord rec = integrate_geodesic(bl, st, 100.0);
        REQUIRE(!rec.events.empty());
        CHECK(rec.events.back().kind == GeodesicEventKind::DomainBoundary);
        CHECK(rec.samples.back().x(1) > 2.0);
        CHECK(rec.samples.back().x(1) < 2.01);
    }
}
