#include "beams/geodesics.hpp"
#include "beams/metric_components.hpp"
#include "beams/metrics.hpp"
#include "doctest.h"
#include "test_support.hpp"

#include <random>

using namespace beams;
using beams::testing::chart_cases;
using beams::testing::random_point;

namespace {

double max_abs(const Tensor3& t)
{
    double v = 0.0;
    for (const auto& m : t) v = std::max(v, m.cwiseAbs().maxCoeff());
    return v;
}

// Coordinate map between two charts applied to a point.
Vec4 map_point(const MetricModel& from, ChartKind to, const Vec4& x)
{
    return chart_transition(from, to, CotangentState{0.0, x, Vec4::Zero()}).x;
}

}  // namespace

TEST_SUITE("metrics")
{
    TEST_CASE("flat and Schwarzschild component values")
    {
        const MetricModel mink = MetricModel::minkowski();
        const Vec4 x0(0.3, -1.0, 2.0, 0.5);
        CHECK((metric_at(mink, x0) - Vec4(-1, 1, 1, 1).asDiagonal().toDenseMatrix()).norm() == 0.0);
        CHECK((inverse_metric_at(mink, x0) - Vec4(-1, 1, 1, 1).asDiagonal().toDenseMatrix()).norm() == 0.0);
        CHECK(max_abs(d_inverse_metric_at(mink, x0)) == 0.0);
        CHECK(log_sqrt_det_gradient_at(mink, x0).norm() == 0.0);

        const MetricModel schw = MetricModel::schwarzschild(1.0, ChartKind::RNExteriorT);
        const Vec4 x(0.0, 3.0, M_PI / 2, 0.0);
        CHECK(metric_at(schw, x)(0, 0) == doctest::Approx(-1.0 / 3.0).epsilon(1e-15));
        CHECK(inverse_metric_at(schw, x)(1, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
        CHECK(d_inverse_metric_at(schw, x)[1](1, 1) == doctest::Approx(2.0 / 9.0).epsilon(1e-14));
        const Vec4 lg = log_sqrt_det_gradient_at(schw, x);
        CHECK(lg(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
        CHECK(std::abs(lg(2)) < 1e-15);
    }

    TEST_CASE("Kerr Boyer-Lindquist frame-dragging component")
    {
        const MetricModel kerr = MetricModel::kerr(1.0, 0.5);
        const Vec4 x(0.0, 2.0, M_PI / 2, 0.0);
        CHECK(metric_at(kerr, x)(0, 3) == doctest::Approx(-0.5).epsilon(1e-15));
    }

    TEST_CASE("degenerate charts raise DomainError")
    {
        const MetricModel rn = MetricModel::reissner_nordstrom(1.0, 0.8, ChartKind::RNExteriorT);
        const Vec4 xh(0.0, 1.6, M_PI / 2, 0.0);
        CHECK_THROWS_AS(inverse_metric_at(rn, xh), Error);
        try {
            inverse_metric_at(rn, xh);
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::DomainError);
        }
        const MetricModel kerr = MetricModel::kerr(1.0, 0.5);
        CHECK_THROWS_AS(metric_at(kerr, Vec4(0.0, kerr.r_plus(), 1.0, 0.0)), Error);
        CHECK_THROWS_AS(metric_at(kerr, Vec4(0.0, 5.0, 1e-7, 0.0)), Error);
        CHECK_THROWS_AS(metric_at(kerr, Vec4(0.0, 5.0, M_PI - 1e-7, 0.0)), Error);
        CHECK_THROWS_AS(metric_at(MetricModel::schwarzschild(1.0), Vec4(0.0, 0.0, 1.0, 0.0)), Error);
        CHECK_THROWS_AS(MetricModel::reissner_nordstrom(1.0, 1.2), Error);
        CHECK_THROWS_AS(MetricModel::kerr(1.0, 1.1), Error);
    }

    TEST_CASE("random-point invariants: symmetry, signature, inverse, derivative oracles")
    {
        std::mt19937_64 rng(20240611);
        for (const auto& c : chart_cases()) {
            CAPTURE(std::string(to_string(c.model.chart)));
            CAPTURE(c.model.e);
            CAPTURE(c.model.a);
            double worst_inv = 0.0, worst_d1 = 0.0, worst_d2 = 0.0, worst_lg = 0.0;
            int bad_signature = 0;
            for (int n = 0; n < 1000; ++n) {
                const Vec4 x = random_point(c, rng);
                REQUIRE(in_domain(c.model, x));
                const Mat4 g = metric_at(c.model, x);
                const Mat4 h = inverse_metric_at(c.model, x);
                CHECK((g - g.transpose()).norm() == 0.0);
                CHECK((h - h.transpose()).norm() == 0.0);
                const Eigen::Vector4d ev = Eigen::SelfAdjointEigenSolver<Mat4>(g).eigenvalues();
                if (!(ev(0) < 0.0 && ev(1) > 0.0)) ++bad_signature;
                worst_inv = std::max(worst_inv, (g * h - Mat4::Identity()).cwiseAbs().maxCoeff() /
                                                    std::max(1.0, g.cwiseAbs().maxCoeff() * h.cwiseAbs().maxCoeff() * 1e-4));

                const InverseMetricJet jet = inverse_metric_jet(c.model, x, 2);
                for (int k = 0; k < 4; ++k)
                    for (int l = 0; l < 4; ++l)
                        CHECK((jet.dd[k][l] - jet.dd[l][k]).cwiseAbs().maxCoeff() <= 1e-12 * jet.dd[k][l].cwiseAbs().maxCoeff() + 1e-300);
                const testing::OracleErrors err = testing::derivative_oracle_errors(c.model, x);
                worst_d1 = std::max(worst_d1, err.d1);
                worst_d2 = std::max(worst_d2, err.d2);
                worst_lg = std::max(worst_lg, err.log_det);
                CHECK(sqrt_abs_det_at(c.model, x) == doctest::Approx(std::sqrt(std::abs(g.determinant()))).epsilon(1e-12));
            }
            CHECK(bad_signature == 0);
            CHECK(worst_inv < 1e-12);
            CHECK(worst_d1 < 1e-7);
            CHECK(worst_d2 < 1e-7);
            CHECK(worst_lg < 1e-7);
        }
    }

    TEST_CASE("tortoise functions differentiate to their defining ratios")
    {
        const std::vector<MetricModel> models = {MetricModel::schwarzschild(1.0), MetricModel::reissner_nordstrom(1.0, 0.8),
                                                 MetricModel::reissner_nordstrom(1.0, 1.0), MetricModel::kerr(1.0, 0.5),
                                                 MetricModel::kerr(1.0, 1.0)};
        for (const auto& model : models) {
            for (double r : {0.3, 0.7, 1.3, 2.5, 4.0, 9.0}) {
                if (std::abs(r - model.r_plus()) < 0.05 || std::abs(r - model.r_minus()) < 0.05) continue;
                const double h = 1e-4;
                const double fd = (8.0 * (tortoise(model, r + h) - tortoise(model, r - h)) -
                                   (tortoise(model, r + 2 * h) - tortoise(model, r - 2 * h))) / (12.0 * h);
                CHECK(fd == doctest::Approx(tortoise_derivative(model, r)).epsilon(1e-8));
                const double fdb = (8.0 * (azimuth_shift(model, r + h) - azimuth_shift(model, r - h)) -
                                    (azimuth_shift(model, r + 2 * h) - azimuth_shift(model, r - 2 * h))) / (12.0 * h);
                CHECK(fdb == doctest::Approx(azimuth_shift_derivative(model, r)).epsilon(1e-8));
            }
        }
        // Schwarzschild: the t* offset equals 2m log(r - 2m).
        const MetricModel s = MetricModel::schwarzschild(1.0);
        CHECK(tortoise(s, 5.0) - 5.0 == doctest::Approx(2.0 * std::log(3.0)).epsilon(1e-15));
    }

    TEST_CASE("chart transitions: metric pull-back, H and energy invariance")
    {
        const std::vector<testing::ChartPair> pairs = testing::transition_pairs();
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (const auto& pr : pairs) {
            CAPTURE(std::string(to_string(pr.from.chart)));
            CAPTURE(std::string(to_string(pr.to)));
            const MetricModel target = pr.from.in_chart(pr.to);
            const testing::ChartCase c{pr.from, pr.r_lo, pr.r_hi};
            double worst_H = 0.0, worst_g = 0.0, worst_rt = 0.0;
            for (int n = 0; n < 100; ++n) {
                const Vec4 x = random_point(c, rng);
                const Vec4 p(u(rng), u(rng), u(rng), u(rng));
                const CotangentState st{0.0, x, p};
                const CotangentState out = chart_transition(pr.from, pr.to, st);
                const double H0 = hamiltonian(pr.from, st);
                const double H1 = hamiltonian(target, out);
                const double Hs = 0.5 * (p.cwiseAbs().transpose() * inverse_metric_at(pr.from, x).cwiseAbs() * p.cwiseAbs())(0, 0);
                worst_H = std::max(worst_H, std::abs(H0 - H1) / Hs);

                // Numeric Jacobian of the coordinate change; the metrics must agree as tensors.
                Mat4 Jac;
                const double h = 1e-5;
                for (int k = 0; k < 4; ++k) {
                    Vec4 e = Vec4::Zero();
                    e(k) = h;
                    Jac.col(k) = (8.0 * (map_point(pr.from, pr.to, x + e) - map_point(pr.from, pr.to, x - e)) -
                                  (map_point(pr.from, pr.to, x + 2 * e) - map_point(pr.from, pr.to, x - 2 * e))) / (12.0 * h);
                }
                const Mat4 g0 = metric_at(pr.from, x);
                const Mat4 g1 = metric_at(target, out.x);
                worst_g = std::max(worst_g, (Jac.transpose() * g1 * Jac - g0).cwiseAbs().maxCoeff() / g0.cwiseAbs().maxCoeff());
                // Covector rule p_old = Jac^T p_new.
                CHECK((Jac.transpose() * out.p - p).norm() < 1e-7 * (1.0 + out.p.norm()));

                const CotangentState back = chart_transition(target, pr.from.chart, out);
                worst_rt = std::max(worst_rt, (back.x - x).norm() + (back.p - p).norm());
            }
            CHECK(worst_H < 1e-10);
            CHECK(worst_g < 1e-7);
            CHECK(worst_rt < 1e-9);
        }
    }

    TEST_CASE("Kerr BL to ingoing keeps p_t and the N-energy")
    {
        const MetricModel bl = MetricModel::kerr(1.0, 0.5);
        const Vec4 x(1.0, 5.0, 1.1, 0.4);
        const Vec4 p(-0.7, 0.3, 0.2, 1.1);
        const CotangentState out = chart_transition(bl, ChartKind::KerrIngoing, CotangentState{0.0, x, p});
        CHECK(out.p(0) == p(0));
        CHECK(out.p(3) == p(3));
        const FoliationSpec fol;
        const MetricModel in = bl.in_chart(ChartKind::KerrIngoing);
        CHECK(n_energy(in, fol, out) == doctest::Approx(n_energy(bl, fol, CotangentState{0.0, x, p})).epsilon(1e-12));
        CHECK(time_function(in, out.x) == doctest::Approx(time_function(bl, x)).epsilon(1e-13));

        const MetricModel rt = MetricModel::reissner_nordstrom(1.0, 0.6, ChartKind::RNExteriorT);
        const CotangentState o2 = chart_transition(rt, ChartKind::RNIngoingV, CotangentState{0.0, x, p});
        CHECK(n_energy(rt.in_chart(ChartKind::RNIngoingV), fol, o2) ==
              doctest::Approx(n_energy(rt, fol, CotangentState{0.0, x, p})).epsilon(1e-12));
        CHECK_THROWS_AS(chart_transition(rt, ChartKind::RNOutgoingU, CotangentState{0.0, x, p}), Error);
        CHECK(chart_transition(rt, ChartKind::RNExteriorT, CotangentState{0.0, x, p}).p == p);
    }

    TEST_CASE("energy fields are timelike and match their definitions")
    {
        std::mt19937_64 rng(11);
        const FoliationSpec fol;
        for (const auto& c : chart_cases()) {
            CAPTURE(std::string(to_string(c.model.chart)));
            for (int n = 0; n < 200; ++n) {
                const Vec4 x = random_point(c, rng);
                const Vec4 N = energy_field_at(c.model, fol, x);
                const Mat4 g = metric_at(c.model, x);
                CHECK(N.dot(g * N) < 0.0);
                const Vec4 ref = -(inverse_metric_at(c.model, x) * time_function_gradient(c.model, x));
                CHECK((N - ref).norm() <= 1e-12 * std::max(1.0, ref.norm()));
            }
        }
        const MetricModel rn = MetricModel::reissner_nordstrom(1.0, 0.8, ChartKind::RNIngoingV);
        FoliationSpec cr;
        cr.energy_field = EnergyFieldKind::CauchyRegular;
        for (double r : {0.45, 0.8, 1.2, 1.5}) {
            const Vec4 x(0.0, r, 1.0, 0.0);
            const Vec4 N = energy_field_at(rn, cr, x);
            CHECK(N.dot(metric_at(rn, x) * N) == doctest::Approx(-1.0 / (r * r)).epsilon(1e-12));
            // Ingoing tangent -d_r has covector (-1, 0, 0, 0).
            CHECK(-N.dot(Vec4(-1.0, 0.0, 0.0, 0.0)) == doctest::Approx(1.0 / (r - 0.4)).epsilon(1e-14));
        }
    }
}
