#pragma once

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <memory>
#include <vector>

namespace beams {

// Piecewise degree-7 dense output of an explicit Runge-Kutta run.
// Each segment stores power-basis coefficients in theta = (s - s0)/h.
class DenseSolution {
public:
    using Coefficients = Eigen::Matrix<double, Eigen::Dynamic, 8>;

    void append(double s0, double h, Coefficients coeffs);
    // Drop everything after s_cut, which lies inside the last segment.
    void truncate(double s_cut);

    bool empty() const { return starts_.empty(); }
    std::size_t segments() const { return starts_.size(); }
    int dimension() const { return coeffs_.empty() ? 0 : static_cast<int>(coeffs_.front().rows()); }
    double front() const;
    double back() const;
    double direction() const;
    bool contains(double s) const;

    // deriv-th derivative in s of components [first, first + count).
    Eigen::VectorXd eval(double s, int deriv = 0, int first = 0, int count = -1) const;

    template <int N>
    Eigen::Matrix<double, N, 1> eval_fixed(double s, int deriv, int first) const
    {
        const std::size_t k = segment_of(s);
        const double h = steps_[k];
        const double th = (s - starts_[k]) / h;
        Eigen::Matrix<double, N, 1> out;
        const Coefficients& c = coeffs_[k];
        for (int i = 0; i < N; ++i) out(i) = horner(c, first + i, th, deriv);
        if (deriv >= 1) out /= h;
        if (deriv >= 2) out /= h;
        return out;
    }

    std::size_t segment_of(double s) const;
    double segment_start(std::size_t k) const { return starts_[k]; }
    double segment_step(std::size_t k) const { return steps_[k]; }
    const Coefficients& segment_coefficients(std::size_t k) const { return coeffs_[k]; }

private:
    static double horner(const Coefficients& c, int row, double th, int deriv);

    std::vector<double> starts_;
    std::vector<double> steps_;
    std::vector<Coefficients> coeffs_;
    double end_ = 0.0;
};

using OdeRhs = std::function<void(double s, const Eigen::VectorXd& y, Eigen::VectorXd& dy)>;
// Terminal event: integration stops where the function changes sign.
using OdeEvent = std::function<double(double s, const Eigen::VectorXd& y)>;
// Called after every accepted step; may throw to abort.
using OdeStepHook = std::function<void(double s, const Eigen::VectorXd& y)>;

struct OdeOptions {
    double rtol = 1e-12;
    // Per-component absolute tolerance; a single entry is broadcast.
    Eigen::VectorXd atol = Eigen::VectorXd::Constant(1, 1e-12);
    double h_init = 0.0;
    double h_max = std::numeric_limits<double>::infinity();
    long max_steps = 2000000;
};

enum class OdeStatus { Completed, EventHit, DomainBoundary };

struct OdeResult {
    OdeStatus status = OdeStatus::Completed;
    double s_final = 0.0;
    Eigen::VectorXd y_final;
    std::vector<double> s_steps;
    std::vector<Eigen::VectorXd> y_steps;
    std::shared_ptr<DenseSolution> dense;
    long rhs_evaluations = 0;
    long accepted = 0;
    long rejected = 0;
};

// Dormand-Prince 8(5,3) with step-size control and 7th-order dense output.
// A DomainError thrown by the right-hand side rejects the trial step; when the
// step size collapses the run ends with status DomainBoundary. A DomainError from the step hook
// ends the run the same way after the step.
OdeResult integrate_dop853(const OdeRhs& rhs, double s0, const Eigen::VectorXd& y0, double s_end,
                           const OdeOptions& options, const OdeEvent& event = {}, const OdeStepHook& hook = {});

}  // namespace beams
