#pragma once

#include <array>
#include <string>
#include <vector>

#include "clparam/lti.hpp"

namespace clp {

enum class Signal { x, y, u };
enum class Disturbance { dx, dy, du };

[[nodiscard]] std::string to_string(Signal s);
[[nodiscard]] std::string to_string(Disturbance d);

// Nine disturbance-to-signal maps of a plant/controller loop, all sharing A_cl.
class ClosedLoopMaps {
public:
    ClosedLoopMaps(const StateSpace& plant, const StateSpace& controller);

    [[nodiscard]] const Matrix& a_cl() const noexcept { return a_cl_; }
    [[nodiscard]] Index plant_states() const noexcept { return n_; }
    [[nodiscard]] Index controller_states() const noexcept { return q_; }

    [[nodiscard]] Index size(Signal s) const;
    [[nodiscard]] Index size(Disturbance d) const;
    [[nodiscard]] Matrix input_matrix(Disturbance d) const;
    [[nodiscard]] Matrix output_matrix(Signal s) const;
    [[nodiscard]] Matrix feedthrough(Signal s, Disturbance d) const;

    [[nodiscard]] StateSpace block(Signal s, Disturbance d) const;
    // Stacked map [s0; s1] <- [d0, d1].
    [[nodiscard]] StateSpace group(std::array<Signal, 2> outputs, std::array<Disturbance, 2> inputs) const;

private:
    Matrix a_cl_;
    Matrix b_;
    Matrix c_;
    Matrix ck_;
    Matrix bk_;
    Matrix dk_;
    Index n_;
    Index m_;
    Index p_;
    Index q_;
};

[[nodiscard]] ClosedLoopMaps assemble_closed_loop(const StateSpace& plant, const StateSpace& controller);

struct MapGroup {
    std::array<Disturbance, 2> inputs;
    std::array<Signal, 2> outputs;
};

[[nodiscard]] std::string to_string(const MapGroup& g);
[[nodiscard]] const std::array<MapGroup, 9>& all_groups();
// Groups whose stability alone implies internal stability.
[[nodiscard]] bool is_certifying(const MapGroup& g);

// Kalman reduction: restrict to the controllable subspace, then to its observable part.
// Directions are dropped when their norm falls below rel_tol * max(1, ||A||).
[[nodiscard]] StateSpace minimal_realization(const StateSpace& g, double rel_tol = 1e-8);
// Poles of the transfer matrix: eigenvalues of the minimal realization.
[[nodiscard]] CVector transfer_poles(const StateSpace& g);
// Largest pole magnitude of the transfer matrix (hidden modes excluded); 0 for a static map.
[[nodiscard]] double transfer_pole_radius(const StateSpace& g);
[[nodiscard]] bool transfer_is_stable(const StateSpace& g);

struct GroupVerdict {
    MapGroup group;
    bool stable;
    bool certifying;
    double pole_radius;
    Index minimal_order;
};

struct StabilityVerdict {
    bool internally_stable;
    double spectral_radius;
    std::vector<GroupVerdict> per_group;
    // A group is stable although A_cl is not (only non-certifying groups can do this).
    [[nodiscard]] bool has_discrepancy() const;
    [[nodiscard]] bool certifying_groups_stable() const;
};

[[nodiscard]] StabilityVerdict internal_stability(const StateSpace& plant, const StateSpace& controller);
[[nodiscard]] bool stable_plant_check(const StateSpace& plant, const StateSpace& controller);
[[nodiscard]] bool state_feedback_check(const StateSpace& plant, const StateSpace& controller);

}  // namespace clp
