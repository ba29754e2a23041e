#pragma once

#include "beams/integrator.hpp"
#include "beams/metrics.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace beams {

double hamiltonian(const MetricModel& model, const CotangentState& state);
// |H| relative to (1/2) sum |g^{mu nu} p_mu p_nu|, a scale-free constraint measure.
double constraint_drift(const MetricModel& model, const CotangentState& state);

struct FlowDerivative {
    Vec4 xdot;
    Vec4 pdot;
};
FlowDerivative flow_rhs(const MetricModel& model, const CotangentState& state);

// Tangent vector g^{-1} p.
Vec4 velocity(const MetricModel& model, const CotangentState& state);

// Completes p so that H = 0, solving for the component p[index] and choosing the
// root whose tangent is future-directed (dt*(xdot) > 0).
CotangentState null_seed(const MetricModel& model, double s, const Vec4& x, const Vec4& p, int index = 0);

double n_energy(const MetricModel& model, const FoliationSpec& foliation, const CotangentState& state);

enum class GeodesicEventKind { SliceCrossing, DomainBoundary, Stop };

struct GeodesicEvent {
    GeodesicEventKind kind = GeodesicEventKind::Stop;
    double s = 0.0;
    std::string label;
};

struct GeodesicOptions {
    double tol = 1e-12;
    double null_tol = 1e-10;
    // Null-constraint monitoring; off for non-null test geodesics.
    bool null_check = true;
    // Terminal condition t*(x) = time_end, when set.
    std::optional<double> time_end;
    // Terminal condition stop_function(state) = 0, when set.
    std::function<double(const CotangentState&)> stop_function;
    std::string stop_label = "stop";
    double h_max = std::numeric_limits<double>::infinity();
};

struct GeodesicRecord {
    MetricModel model;
    FoliationSpec foliation;
    std::vector<CotangentState> samples;
    std::vector<GeodesicEvent> events;
    std::shared_ptr<const DenseSolution> dense;
    double max_constraint_drift = 0.0;

    double s_begin() const { return samples.front().s; }
    double s_end() const { return samples.back().s; }
    bool contains(double s) const;
    CotangentState state_at(double s) const;
    FlowDerivative derivative_at(double s) const;
};

GeodesicRecord integrate_geodesic(const MetricModel& model, const CotangentState& seed, double s_end,
                                  const GeodesicOptions& options = {}, const FoliationSpec& foliation = {});

// Root of t*(gamma(s)) = tau along the record.
double slice_crossing(const GeodesicRecord& record, double tau);

// First parameter where level(state) crosses zero, searched on the record samples and polished on the dense output.
std::optional<double> find_crossing(const GeodesicRecord& record, const std::function<double(const CotangentState&)>& level);

// Columns: s, x0..x3, p0..p3, H, energy.
std::string to_csv(const GeodesicRecord& record);

}  // namespace beams
