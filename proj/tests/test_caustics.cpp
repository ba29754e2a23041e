#include "beams/caustics.hpp"
#include "doctest.h"

#include <algorithm>
#include <cmath>

using namespace beams;

namespace {

const double kPi = 3.14159265358979323846;
const double kR27 = std::sqrt(27.0);

CotangentState photon_sphere_state()
{
    return CotangentState{0.0, Vec4(0.0, 3.0, kPi / 2, 0.0), Vec4(-1.0 / 3.0, 2.0 / 3.0, 0.0, std::sqrt(3.0))};
}

// R^mu_{nu rho sigma} from centered differences of the connection.
std::array<Tensor3, 4> riemann_fd(const MetricModel& model, const Vec4& x, double h)
{
    const Tensor3 G = christoffel(model, x);
    std::array<Tensor3, 4> dG;
    for (int k = 0; k < 4; ++k) {
        const Vec4 e = Vec4::Unit(k) * h;
        const Tensor3 Gp = christoffel(model, x + e), Gm = christoffel(model, x - e);
        const Tensor3 Gp2 = christoffel(model, x + 2 * e), Gm2 = christoffel(model, x - 2 * e);
        for (int mu = 0; mu < 4; ++mu) dG[k][mu] = (8.0 * (Gp[mu] - Gm[mu]) - (Gp2[mu] - Gm2[mu])) / (12.0 * h);
    }
    // R[mu][nu](rho, sigma)
    std::array<Tensor3, 4> R;
    for (int mu = 0; mu < 4; ++mu)
        for (int nu = 0; nu < 4; ++nu)
            for (int r = 0; r < 4; ++r)
                for (int s = 0; s < 4; ++s) {
                    double v = dG[r][mu](s, nu) - dG[s][mu](r, nu);
                    for (int l = 0; l < 4; ++l) v += G[mu](r, l) * G[l](s, nu) - G[mu](s, l) * G[l](r, nu);
                    R[mu][nu](r, s) = v;
                }
    return R;
}

}  // namespace

TEST_SUITE("caustics")
{
    TEST_CASE("connection coefficients in the static Schwarzschild chart")
    {
        const MetricModel schw = MetricModel::schwarzschild(1.0, ChartKind::RNExteriorT);
        const double r = 5.0, th = 1.0;
        const Tensor3 G = christoffel(schw, Vec4(0.0, r, th, 0.0));
        CHECK(G[1](0, 0) == doctest::Approx((r - 2.0) / (r * r * r)).epsilon(1e-13));
        CHECK(G[0](0, 1) == doctest::Approx(1.0 / (r * (r - 2.0))).epsilon(1e-13));
        CHECK(G[2](1, 2) == doctest::Approx(1.0 / r).epsilon(1e-13));
        CHECK(G[3](2, 3) == doctest::Approx(std::cos(th) / std::sin(th)).epsilon(1e-13));
        CHECK(G[1](2, 2) == doctest::Approx(-(r - 2.0)).epsilon(1e-13));
        for (int mu = 0; mu < 4; ++mu) CHECK((G[mu] - G[mu].transpose()).norm() < 1e-15);
        const Tensor3 flat = christoffel(MetricModel::minkowski(), Vec4(1, 2, 3, 4));
        for (int mu = 0; mu < 4; ++mu) CHECK(flat[mu].norm() == 0.0);
    }

    TEST_CASE("flat Jacobi fields grow linearly")
    {
        const MetricModel mink = MetricModel::minkowski();
        const CotangentState st = null_seed(mink, 0.0, Vec4::Zero(), Vec4(0, 1, 0, 0));
        const GeodesicRecord rec = integrate_geodesic(mink, st, 20.0);
        const Vec4 e(0, 0, 1, 0.5);
        const JacobiField jf = integrate_jacobi(mink, rec, Vec4::Zero(), e);
        for (double s : {0.5, 7.0, 20.0}) {
            CHECK((jf.Y_at(s) - s * e).norm() < 1e-12 * (1 + s));
            CHECK((jf.DY_at(s) - e).norm() < 1e-12);
        }
        CHECK(conjugate_point_scan(mink, rec, 0.0).empty());
    }

    TEST_CASE("photon-sphere Jacobi field has the closed form")
    {
        const MetricModel schw = MetricModel::schwarzschild(1.0);
        const GeodesicRecord rec = integrate_geodesic(schw, photon_sphere_state(), 40.0);
        const JacobiField jf = integrate_jacobi(schw, rec, Vec4::Zero(), Vec4(0, 0, 1, 0));
        for (double s : {1.0, 8.0, 16.0, 30.0, 40.0}) {
            const Vec4 Y = jf.Y_at(s);
            CHECK(Y(2) == doctest::Approx(kR27 * std::sin(s / kR27)).epsilon(1e-9));
            CHECK(std::abs(Y(0)) + std::abs(Y(1)) + std::abs(Y(3)) < 1e-10);
        }
    }

    TEST_CASE("Jacobi equation residual from finite differences")
    {
        const MetricModel kerr = MetricModel::kerr(1.0, 0.6, ChartKind::KerrIngoing);
        const CotangentState st = null_seed(kerr, 0.0, Vec4(0, 6, 1.2, 0), Vec4(-1, 0, 0.4, 2.0), 1);
        const GeodesicRecord rec = integrate_geodesic(kerr, st, 6.0);
        const JacobiField jf = integrate_jacobi(kerr, rec, Vec4(0, 0.1, 0.02, 0.0), Vec4(0.0, 0.0, 0.01, 0.03));
        const double h = 1e-3;
        for (double s : {1.0, 3.0, 5.0}) {
            const Vec4 x = jf.dense->eval_fixed<4>(s, 0, 0);
            const Vec4 xd = jf.dense->eval_fixed<4>(s, 1, 0);
            const Vec4 Y = jf.Y_at(s);
            const Vec4 dDY = (8.0 * (jf.DY_at(s + h) - jf.DY_at(s - h)) - (jf.DY_at(s + 2 * h) - jf.DY_at(s - 2 * h))) / (12.0 * h);
            const Vec4 D2Y = covariant_rate(kerr, x, xd, jf.DY_at(s), dDY);
            const auto R = riemann_fd(kerr, x, 1e-3);
            Vec4 curv = Vec4::Zero();
            for (int mu = 0; mu < 4; ++mu)
                for (int nu = 0; nu < 4; ++nu) curv(mu) += xd(nu) * Y.dot(R[mu][nu] * xd);
            // D^2 Y + R(Y, gdot) gdot with R(X, Z)W = R^mu_{nu rho sigma} W^nu X^rho Z^sigma.
            CHECK((D2Y + curv).norm() < 1e-6 * (D2Y.norm() + curv.norm() + 1e-12));
        }
    }

    TEST_CASE("conjugate points of the photon sphere")
    {
        const MetricModel schw = MetricModel::schwarzschild(1.0);
        const auto rec = std::make_shared<const GeodesicRecord>(integrate_geodesic(schw, photon_sphere_state(), 60.0));
        const JacobiRun run = jacobi_screen_run(schw, rec, 0.0);
        REQUIRE(run.conjugate_points.size() == 3);
        for (int k = 0; k < 3; ++k) CHECK(run.conjugate_points[k] == doctest::Approx((k + 1) * kPi * kR27).epsilon(1e-8));
        CHECK(run.grazing.empty());
        // Representatives shifted along gdot and mixed give the same points.
        const ScreenFrame f = screen_frame(schw, rec->samples.front());
        const std::array<Vec4, 2> other{f.e1 + 0.3 * f.e2 + 0.5 * f.gdot, -0.2 * f.e1 + f.e2 - 0.7 * f.gdot};
        const JacobiRun run2 = jacobi_screen_run(schw, rec, 0.0, other);
        REQUIRE(run2.conjugate_points.size() == 3);
        for (int k = 0; k < 3; ++k) CHECK(std::abs(run2.conjugate_points[k] - run.conjugate_points[k]) < 1e-6);
        // Seeded later, the first point moves with the seed.
        const auto later = conjugate_point_scan(schw, *rec, 5.0);
        REQUIRE_FALSE(later.empty());
        CHECK(later.front() == doctest::Approx(5.0 + kPi * kR27).epsilon(1e-8));
    }

    TEST_CASE("radial null geodesics have no conjugate points")
    {
        const MetricModel schw = MetricModel::schwarzschild(1.0);
        const CotangentState st = null_seed(schw, 0.0, Vec4(0, 3.0, kPi / 2, 0), Vec4(-1, 0, 0, 0), 1);
        REQUIRE(velocity(schw, st)(1) > 0.0);
        const GeodesicRecord rec = integrate_geodesic(schw, st, 100.0);
        CHECK(conjugate_point_scan(schw, rec, 0.0).empty());
    }

    TEST_CASE("real Riccati comparison breaks down, the complex beam does not")
    {
        const MetricModel schw = MetricModel::schwarzschild(1.0);
        const double first = kPi * kR27;
        const GeodesicRecord rec = integrate_geodesic(schw, photon_sphere_state(), 10.5 * first);
        const BeamInitialData init = build_initial_M(schw, rec.samples.front());
        const GeodesicRecord shortrec = integrate_geodesic(schw, photon_sphere_state(), 1.1 * first);
        const RealRiccatiResult real = geometric_optics_real_riccati(schw, shortrec, init.M0.real());
        REQUIRE(real.blowup_s.has_value());
        CHECK(*real.blowup_s <= 1.1 * first);
        CHECK(std::abs(real.det_J.back()) <= 1e-10 * 1.0001);

        const BeamJetRecord jets = integrate_jv(schw, rec, init);
        CHECK(jets.min_det_J() > 1e-3);
        for (double s = 0.0; s <= 10.0 * first; s += 0.5) CHECK(beam_det_J(jets, s) > 1e-3);
        for (std::size_t i = 0; i < jets.samples.size(); i += 7)
            CHECK(beam_det_J(jets, jets.samples[i].s) == doctest::Approx(jets.samples[i].det_J).epsilon(1e-9));
    }

    TEST_CASE("flat real Riccati with vanishing Hessian")
    {
        const MetricModel mink = MetricModel::minkowski();
        const CotangentState st = null_seed(mink, 0.0, Vec4::Zero(), Vec4(0, 0.6, 0.8, 0));
        const GeodesicRecord rec = integrate_geodesic(mink, st, 50.0);
        const RealRiccatiResult real = geometric_optics_real_riccati(mink, rec, Mat4::Zero());
        CHECK_FALSE(real.blowup_s.has_value());
        for (double d : real.det_J) CHECK(d == doctest::Approx(1.0).epsilon(1e-13));
        for (const Mat4& M : real.M) CHECK(M.norm() < 1e-14);
    }

    TEST_CASE("caustic CSV has one row per scan sample")
    {
        const MetricModel schw = MetricModel::schwarzschild(1.0);
        const auto rec = std::make_shared<const GeodesicRecord>(integrate_geodesic(schw, photon_sphere_state(), 20.0));
        const JacobiRun run = jacobi_screen_run(schw, rec, 0.0);
        const BeamJetRecord jets = integrate_jv(schw, *rec, build_initial_M(schw, rec->samples.front()));
        const RealRiccatiResult real = geometric_optics_real_riccati(schw, *rec, jets.init.M0.real());
        const std::string csv = caustic_csv(run, &jets, &real);
        CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(run.s.size()) + 1);
        CHECK(csv.rfind("s,screen_det,det_J_complex,det_J_real\n", 0) == 0);
    }
}
