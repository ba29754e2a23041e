#include "beams/errors.hpp"
#include "beams/integrator.hpp"
#include "doctest.h"

#include <cmath>

using namespace beams;
using Eigen::VectorXd;

TEST_SUITE("integrator")
{
    TEST_CASE("harmonic oscillator: endpoint, dense values and dense derivatives")
    {
        const OdeRhs rhs = [](double, const VectorXd& y, VectorXd& dy) {
            dy(0) = y(1);
            dy(1) = -y(0);
        };
        VectorXd y0(2);
        y0 << 0.0, 1.0;
        OdeOptions opt;
        opt.rtol = 1e-12;
        opt.atol = VectorXd::Constant(1, 1e-12);
        const OdeResult res = integrate_dop853(rhs, 0.0, y0, 20.0, opt);
        REQUIRE(res.status == OdeStatus::Completed);
        CHECK(res.s_final == 20.0);
        CHECK(std::abs(res.y_final(0) - std::sin(20.0)) < 1e-10);
        double worst0 = 0.0, worst1 = 0.0, worst2 = 0.0;
        for (int i = 0; i <= 997; ++i) {
            const double s = 20.0 * i / 997.0;
            worst0 = std::max(worst0, std::abs(res.dense->eval(s)(0) - std::sin(s)));
            worst1 = std::max(worst1, std::abs(res.dense->eval(s, 1)(0) - std::cos(s)));
            worst2 = std::max(worst2, std::abs(res.dense->eval(s, 2)(0) + std::sin(s)));
        }
        CHECK(worst0 < 1e-10);
        CHECK(worst1 < 1e-8);
        CHECK(worst2 < 1e-6);
        CHECK(std::abs(res.dense->eval_fixed<2>(3.3, 0, 0)(1) - std::cos(3.3)) < 1e-10);
    }

    TEST_CASE("backward integration and exponential growth")
    {
        const OdeRhs rhs = [](double, const VectorXd& y, VectorXd& dy) { dy = y; };
        VectorXd y0(1);
        y0 << 1.0;
        OdeOptions opt;
        opt.rtol = 1e-12;
        opt.atol = VectorXd::Constant(1, 1e-14);
        const OdeResult fw = integrate_dop853(rhs, 0.0, y0, 5.0, opt);
        CHECK(std::abs(fw.y_final(0) / std::exp(5.0) - 1.0) < 1e-10);
        const OdeResult bw = integrate_dop853(rhs, 5.0, fw.y_final, 0.0, opt);
        CHECK(std::abs(bw.y_final(0) - 1.0) < 1e-10);
        CHECK(bw.dense->direction() < 0.0);
        CHECK(std::abs(bw.dense->eval(2.5)(0) - std::exp(2.5)) < 1e-9);
    }

    TEST_CASE("terminal events are located on the dense output")
    {
        const OdeRhs rhs = [](double, const VectorXd& y, VectorXd& dy) {
            dy(0) = y(1);
            dy(1) = -y(0);
        };
        VectorXd y0(2);
        y0 << 0.0, 1.0;
        OdeOptions opt;
        const OdeEvent ev = [](double s, const VectorXd& y) { return s > 1.0 ? y(0) : 1.0; };
        const OdeResult res = integrate_dop853(rhs, 0.0, y0, 10.0, opt, ev);
        REQUIRE(res.status == OdeStatus::EventHit);
        CHECK(std::abs(res.s_final - M_PI) < 1e-10);
        CHECK(std::abs(res.dense->back() - M_PI) < 1e-10);
    }

    TEST_CASE("domain errors shrink the step and end the run at the boundary")
    {
        const OdeRhs rhs = [](double, const VectorXd& y, VectorXd& dy) {
            if (y(0) >= 2.0) fail(ErrorKind::DomainError, "outside");
            dy(0) = 1.0;
        };
        VectorXd y0(1);
        y0 << 0.0;
        OdeOptions opt;
        const OdeResult res = integrate_dop853(rhs, 0.0, y0, 10.0, opt);
        CHECK(res.status == OdeStatus::DomainBoundary);
        CHECK(res.y_final(0) < 2.0);
        CHECK(res.y_final(0) > 2.0 - 1e-9);
    }
}
