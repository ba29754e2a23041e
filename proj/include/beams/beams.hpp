#pragma once

#include "beams/geodesics.hpp"

#include <array>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

namespace beams {

// A = 1/2 d_k d_r g^{mn} p_m p_n, B_kr = d_k g^{rn} p_n, C = g^{-1}.
struct HessianMatrices {
    Mat4 A;
    Mat4 B;
    Mat4 C;
};
HessianMatrices hessian_matrices(const MetricModel& model, const CotangentState& state);
HessianMatrices hessian_matrices(const InverseMetricJet& jet, const Vec4& p);

// d(dphi)/ds along gamma, -1/2 (d g^{mk}) p_m p_k.
Vec4 covector_rate(const MetricModel& model, const CotangentState& state);

// Null frame along gamma: l null with g(gdot, l) = -1 built from the time normal,
// e1, e2 g-orthonormal and orthogonal to gdot and l.
struct ScreenFrame {
    Vec4 gdot;
    Vec4 l;
    Vec4 e1;
    Vec4 e2;
};
// Without a previous frame the screen is built from coordinate directions; with one,
// from the previous screen vectors, which keeps the frame continuous along a run.
ScreenFrame screen_frame(const MetricModel& model, const CotangentState& state, const ScreenFrame* previous = nullptr);

struct BeamInitialData {
    CMat4 M0 = CMat4::Zero();
    double phi0 = 0.0;
    cplx a0{1.0, 0.0};
    // Parameter at which M0 and a0 are prescribed. A value inside the geodesic record
    // places the data there and the jets are first carried back to the record start.
    double s_ref = 0.0;
};

struct TransversalSpec {
    // Im M0 = w1 e1' e1' + w2 e2' e2' + w3 (p/E)(p/E), e' the lowered screen vectors and
    // E = -p(T) for the time normal T. Non-positive entries default to E / length_scale.
    std::array<double, 3> weights{0.0, 0.0, 0.0};
};

BeamInitialData build_initial_M(const MetricModel& model, const CotangentState& seed, const TransversalSpec& spec = {});

// Minimum-Frobenius-norm symmetric S with S v = c.
CMat4 min_norm_symmetric_solution(const Vec4& v, const CVec4& c);

struct BeamOptions {
    double tol = 1e-12;
    double null_tol = 1e-10;
    // SingularJ when |det J| falls below this fraction of |det J(s_begin)|.
    double singular_j = 1e-12;
    // ToleranceFailure when the symplectic drift exceeds this; infinity disables the guard.
    double symplectic_guard = 1e-6;
    // Restart (J, V) = (1, M) once the Frobenius norm of J exceeds this. M and a are
    // unaffected; J and V then refer to the latest restart, and det J is accumulated.
    double rebase_norm = 1e3;
};

// One stretch of the (J, V) integration between restarts.
struct BeamSegment {
    double s_start = 0.0;
    // log |det| of the total J at s_start.
    double log_det_base = 0.0;
    Vec4 gdot_start = Vec4::Zero();
    CMat4 pairing_start = CMat4::Zero();
};

struct BeamSample {
    double s = 0.0;
    int segment = 0;
    Vec4 x = Vec4::Zero();
    Vec4 p = Vec4::Zero();
    CMat4 J = CMat4::Identity();
    CMat4 V = CMat4::Zero();
    CMat4 M = CMat4::Zero();
    cplx a{1.0, 0.0};
    cplx box_phi{0.0, 0.0};
    // |det| of the total J, accumulated across restarts.
    double det_J = 1.0;
    double symplectic_drift = 0.0;
    double symmetry_error = 0.0;
    // Eigenvalues of Im M restricted to the transversal frame {e1, e2, l}.
    double transversal_min_eig = 0.0;
    double transversal_max_eig = 0.0;
    double column_J_error = 0.0;
    double column_V_error = 0.0;
    double riccati_residual = 0.0;
    ScreenFrame frame;
};

// Jets at an arbitrary parameter, read from the dense output.
struct BeamJet {
    double s = 0.0;
    Vec4 x, xdot, xddot, p, pdot;
    CMat4 J, V, M, Mdot;
    cplx a;
    cplx adot;
};

struct BeamJetRecord {
    MetricModel model;
    FoliationSpec foliation;
    std::shared_ptr<const GeodesicRecord> geodesic;
    BeamInitialData init;
    // Data actually used at the record start.
    CMat4 M_begin = CMat4::Zero();
    Vec4 gdot_begin = Vec4::Zero();
    CMat4 pairing0 = CMat4::Zero();
    cplx ell_ref{0.0, 0.0};
    std::vector<BeamSegment> segments;
    std::vector<BeamSample> samples;
    // State (x, p, Re J, Im J, Re V, Im V, Re l, Im l), 74 components, l = integral of box phi.
    std::shared_ptr<const DenseSolution> dense;
    double max_constraint_drift = 0.0;

    double s_begin() const { return samples.front().s; }
    double s_end() const { return samples.back().s; }
    bool contains(double s) const;
    // order 0: x, p, J, V, M, a; order 1 adds xdot, pdot, Mdot, adot; order 2 adds xddot.
    BeamJet jet_at(double s, int order = 1) const;
    double phi() const { return init.phi0; }

    double max_symplectic_drift() const;
    double max_symmetry_error() const;
    double min_transversal_eig() const;
    double min_det_J() const;
    double max_column_error() const;
    double max_riccati_residual() const;
};

BeamJetRecord integrate_jv(const MetricModel& model, const GeodesicRecord& record, const BeamInitialData& init,
                           const BeamOptions& options = {});

// J1^T V2 - V1^T J2.
CMat4 symplectic_pairing(const CMat4& J1, const CMat4& V1, const CMat4& J2, const CMat4& V2);
double symplectic_drift(const CMat4& pairing, const CMat4& pairing0);

// g^{mn} M_mn + (d_m g^{mn}) p_n + g^{mn} p_n d_m log sqrt|g|.
cplx box_phi_on_gamma(const MetricModel& model, const CotangentState& state, const CMat4& M);

// a(s) at the record samples, a = a0 exp(-1/2 (l(s) - l(s_ref))).
std::vector<cplx> transport_amplitude(const BeamJetRecord& jets);

// Riccati residual A + BM + MB^T + MCM + dM/ds relative to the largest term.
double riccati_residual(const MetricModel& model, const BeamJet& jet);

// Reference-free invariant summary used by the structural suite.
struct BeamInvariants {
    double symplectic_drift = 0.0;
    double symmetry_error = 0.0;
    double transversal_min_eig = 0.0;
    double column_error = 0.0;
    double riccati_residual = 0.0;
    double min_det_J = 0.0;
};
BeamInvariants beam_invariants(const BeamJetRecord& jets);

// Columns: s, |det J|, symplectic drift, symmetry error, transversal eigenvalues, |a|, Re box phi, Im box phi.
std::string to_csv(const BeamJetRecord& jets);

}  // namespace beams
