#include "clparam/closedloop.hpp"

#include <algorithm>

#include <Eigen/SVD>

namespace clp {

std::string to_string(Signal s) {
    switch (s) {
        case Signal::x: return "x";
        case Signal::y: return "y";
        case Signal::u: return "u";
    }
    return "?";
}

std::string to_string(Disturbance d) {
    switch (d) {
        case Disturbance::dx: return "dx";
        case Disturbance::dy: return "dy";
        case Disturbance::du: return "du";
    }
    return "?";
}

ClosedLoopMaps::ClosedLoopMaps(const StateSpace& plant, const StateSpace& controller)
    : n_(plant.states()), m_(plant.inputs()), p_(plant.outputs()), q_(controller.states()) {
    require(plant.strictly_proper(), ErrorCode::PlantNotStrictlyProper, "closed loop needs a plant with D = 0");
    require(controller.inputs() == p_ && controller.outputs() == m_, ErrorCode::DimensionMismatch,
            "controller must map " + std::to_string(p_) + " outputs to " + std::to_string(m_) + " inputs");
    const Matrix& a = plant.a();
    const Matrix& b = plant.b();
    const Matrix& c = plant.c();
    b_ = b;
    c_ = c;
    dk_ = controller.d();
    a_cl_.resize(n_ + q_, n_ + q_);
    a_cl_.topLeftCorner(n_, n_) = a + b * dk_ * c;
    a_cl_.topRightCorner(n_, q_) = b * controller.c();
    a_cl_.bottomLeftCorner(q_, n_) = controller.b() * c;
    a_cl_.bottomRightCorner(q_, q_) = controller.a();
    ck_ = controller.c();
    bk_ = controller.b();
}

Index ClosedLoopMaps::size(Signal s) const {
    switch (s) {
        case Signal::x: return n_;
        case Signal::y: return p_;
        case Signal::u: return m_;
    }
    return 0;
}

Index ClosedLoopMaps::size(Disturbance d) const {
    switch (d) {
        case Disturbance::dx: return n_;
        case Disturbance::dy: return p_;
        case Disturbance::du: return m_;
    }
    return 0;
}

Matrix ClosedLoopMaps::input_matrix(Disturbance d) const {
    Matrix out = Matrix::Zero(n_ + q_, size(d));
    switch (d) {
        case Disturbance::dx: out.topRows(n_).setIdentity(); break;
        case Disturbance::dy:
            out.topRows(n_) = b_ * dk_;
            out.bottomRows(q_) = bk_;
            break;
        case Disturbance::du: out.topRows(n_) = b_; break;
    }
    return out;
}

Matrix ClosedLoopMaps::output_matrix(Signal s) const {
    Matrix out = Matrix::Zero(size(s), n_ + q_);
    switch (s) {
        case Signal::x: out.leftCols(n_).setIdentity(); break;
        case Signal::y: out.leftCols(n_) = c_; break;
        case Signal::u:
            out.leftCols(n_) = dk_ * c_;
            out.rightCols(q_) = ck_;
            break;
    }
    return out;
}

Matrix ClosedLoopMaps::feedthrough(Signal s, Disturbance d) const {
    Matrix out = Matrix::Zero(size(s), size(d));
    if (s == Signal::y && d == Disturbance::dy) out.setIdentity();
    if (s == Signal::u && d == Disturbance::du) out.setIdentity();
    if (s == Signal::u && d == Disturbance::dy) out = dk_;
    return out;
}

StateSpace ClosedLoopMaps::block(Signal s, Disturbance d) const {
    return StateSpace(a_cl_, input_matrix(d), output_matrix(s), feedthrough(s, d));
}

StateSpace ClosedLoopMaps::group(std::array<Signal, 2> outputs, std::array<Disturbance, 2> inputs) const {
    const Index r0 = size(outputs[0]);
    const Index r1 = size(outputs[1]);
    const Index c0 = size(inputs[0]);
    const Index c1 = size(inputs[1]);
    Matrix b(n_ + q_, c0 + c1);
    b << input_matrix(inputs[0]), input_matrix(inputs[1]);
    Matrix c(r0 + r1, n_ + q_);
    c << output_matrix(outputs[0]), output_matrix(outputs[1]);
    Matrix d(r0 + r1, c0 + c1);
    d << feedthrough(outputs[0], inputs[0]), feedthrough(outputs[0], inputs[1]), feedthrough(outputs[1], inputs[0]),
        feedthrough(outputs[1], inputs[1]);
    return StateSpace(a_cl_, std::move(b), std::move(c), std::move(d));
}

ClosedLoopMaps assemble_closed_loop(const StateSpace& plant, const StateSpace& controller) {
    return ClosedLoopMaps(plant, controller);
}

std::string to_string(const MapGroup& g) {
    return "(" + to_string(g.inputs[0]) + "," + to_string(g.inputs[1]) + ")->(" + to_string(g.outputs[0]) + "," +
           to_string(g.outputs[1]) + ")";
}

const std::array<MapGroup, 9>& all_groups() {
    using D = Disturbance;
    using S = Signal;
    static const std::array<MapGroup, 9> groups{{
        {{D::dx, D::dy}, {S::x, S::y}},
        {{D::dx, D::dy}, {S::x, S::u}},
        {{D::dx, D::dy}, {S::y, S::u}},
        {{D::dx, D::du}, {S::x, S::y}},
        {{D::dx, D::du}, {S::x, S::u}},
        {{D::dx, D::du}, {S::y, S::u}},
        {{D::dy, D::du}, {S::x, S::y}},
        {{D::dy, D::du}, {S::x, S::u}},
        {{D::dy, D::du}, {S::y, S::u}},
    }};
    return groups;
}

bool is_certifying(const MapGroup& g) {
    const bool inputs_ok = g.inputs[1] == Disturbance::dy || g.inputs[0] == Disturbance::dy;
    const bool outputs_ok = g.outputs[1] == Signal::u;
    return inputs_ok && outputs_ok;
}

namespace {

// Orthonormal basis of the smallest A-invariant subspace containing range(B).
Matrix reachable_basis(const Matrix& a, const Matrix& b, double rel_tol) {
    const Index n = a.rows();
    const double tol_a = rel_tol * std::max(1.0, a.norm());
    const double tol_b = rel_tol * std::max(1.0, b.norm());
    Matrix basis(n, 0);

    auto extend = [&](Matrix candidates, double tol) -> Matrix {
        for (int pass = 0; pass < 2 && basis.cols() > 0; ++pass) {
            candidates -= basis * (basis.transpose() * candidates);
        }
        if (candidates.cols() == 0) return Matrix(n, 0);
        const Eigen::JacobiSVD<Matrix> svd(candidates, Eigen::ComputeThinU);
        const auto& s = svd.singularValues();
        Index rank = 0;
        while (rank < s.size() && s(rank) > tol) ++rank;
        rank = std::min(rank, n - basis.cols());
        Matrix fresh = svd.matrixU().leftCols(rank);
        if (basis.cols() > 0) fresh -= basis * (basis.transpose() * fresh);
        // Re-orthonormalize after the cleanup projection.
        if (rank > 0) fresh = Eigen::HouseholderQR<Matrix>(fresh).householderQ() * Matrix::Identity(n, rank);
        return fresh;
    };

    Matrix frontier = extend(b, tol_b);
    while (frontier.cols() > 0) {
        Matrix grown(n, basis.cols() + frontier.cols());
        grown << basis, frontier;
        basis = std::move(grown);
        if (basis.cols() >= n) break;
        frontier = extend(a * frontier, tol_a);
    }
    return basis;
}

}  // namespace

StateSpace minimal_realization(const StateSpace& g, double rel_tol) {
    if (g.states() == 0) return g;
    const Matrix vc = reachable_basis(g.a(), g.b(), rel_tol);
    const Matrix ac = vc.transpose() * g.a() * vc;
    const Matrix bc = vc.transpose() * g.b();
    const Matrix cc = g.c() * vc;
    if (ac.rows() == 0) return StateSpace::gain(g.d());
    const Matrix vo = reachable_basis(ac.transpose(), cc.transpose(), rel_tol);
    if (vo.cols() == 0) return StateSpace::gain(g.d());
    return StateSpace(vo.transpose() * ac * vo, vo.transpose() * bc, cc * vo, g.d());
}

CVector transfer_poles(const StateSpace& g) {
    if (g.states() == 0) return CVector(0);
    return eigenvalues(minimal_realization(g).a());
}

double transfer_pole_radius(const StateSpace& g) {
    if (g.states() == 0) return 0.0;
    if (is_stable(g.a())) return spectral_radius(g.a());
    return spectral_radius(minimal_realization(g).a());
}

bool transfer_is_stable(const StateSpace& g) { return transfer_pole_radius(g) < 1.0 - kStabilityMargin; }

bool StabilityVerdict::has_discrepancy() const {
    if (internally_stable) return false;
    return std::any_of(per_group.begin(), per_group.end(), [](const GroupVerdict& v) { return v.stable; });
}

bool StabilityVerdict::certifying_groups_stable() const {
    return std::all_of(per_group.begin(), per_group.end(),
                       [](const GroupVerdict& v) { return !v.certifying || v.stable; });
}

StabilityVerdict internal_stability(const StateSpace& plant, const StateSpace& controller) {
    const ClosedLoopMaps loop(plant, controller);
    StabilityVerdict verdict;
    verdict.spectral_radius = spectral_radius(loop.a_cl());
    verdict.internally_stable = verdict.spectral_radius < 1.0 - kStabilityMargin;
    for (const auto& g : all_groups()) {
        const StateSpace map = loop.group(g.outputs, g.inputs);
        GroupVerdict gv{g, true, is_certifying(g), verdict.spectral_radius, map.states()};
        if (!verdict.internally_stable) {
            const StateSpace reduced = minimal_realization(map);
            gv.minimal_order = reduced.states();
            gv.pole_radius = reduced.states() == 0 ? 0.0 : spectral_radius(reduced.a());
            gv.stable = gv.pole_radius < 1.0 - kStabilityMargin;
        }
        verdict.per_group.push_back(gv);
    }
    return verdict;
}

bool stable_plant_check(const StateSpace& plant, const StateSpace& controller) {
    require(plant.states() == 0 || is_stable(plant.a()), ErrorCode::PlantUnstable,
            "stable-plant check needs an open-loop stable plant");
    const ClosedLoopMaps loop(plant, controller);
    return transfer_is_stable(loop.block(Signal::u, Disturbance::dy));
}

bool state_feedback_check(const StateSpace& plant, const StateSpace& controller) {
    const Index n = plant.states();
    require(plant.outputs() == n && plant.c().isIdentity(0.0), ErrorCode::NotStateFeedback,
            "state-feedback check needs C = I");
    const ClosedLoopMaps loop(plant, controller);
    Matrix c(n + plant.inputs(), loop.a_cl().rows());
    c << loop.output_matrix(Signal::x), loop.output_matrix(Signal::u);
    Matrix d(n + plant.inputs(), n);
    d << loop.feedthrough(Signal::x, Disturbance::dx), loop.feedthrough(Signal::u, Disturbance::dx);
    return transfer_is_stable(StateSpace(loop.a_cl(), loop.input_matrix(Disturbance::dx), std::move(c), std::move(d)));
}

}  // namespace clp
