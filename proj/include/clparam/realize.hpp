#pragma once

#include "clparam/param.hpp"

namespace clp {

// How a controller is recovered from closed-loop blocks.
enum class ControllerForm {
    iop,             // Phi_uy Phi_yy^-1
    mixed_i,         // Phi_uy Phi_yy^-1
    mixed_ii,        // Phi_uu^-1 Phi_uy
    four_block,      // Phi_uy - Phi_ux Phi_xx^-1 Phi_xy
    state_feedback,  // Phi_ux Phi_xx^-1
    alternative,     // Phi_uy (I + C Phi_xy)^-1
};

[[nodiscard]] std::string to_string(ControllerForm form);
[[nodiscard]] ControllerForm parse_form(const std::string& name);
[[nodiscard]] ControllerForm default_form(Kind kind);

struct ControllerRealization {
    StateSpace controller;
    Kind kind;
    int horizon;

    [[nodiscard]] Index states() const noexcept { return controller.states(); }
};

// Shift-register realization of Phi_uy Phi_yy^-1 with p*T states; needs Phi_yy[0] = I.
[[nodiscard]] ControllerRealization realize_iop(const FirMatrix& phi_uy, const FirMatrix& phi_yy);

// Realization of Phi_uy - Phi_ux Phi_xx^-1 Phi_xy with n*(T-1) + p*T states; needs Phi_xx[1] = I and T >= 2.
[[nodiscard]] ControllerRealization realize_slp(const FirMatrix& phi_uy, const FirMatrix& phi_ux,
                                                const FirMatrix& phi_xx, const FirMatrix& phi_xy);

// Realization of Phi_ux Phi_xx^-1 with n*(T-1) states.
[[nodiscard]] ControllerRealization realize_state_feedback(const FirMatrix& phi_ux, const FirMatrix& phi_xx);

// Rational recovery by composing FIR realizations (cascade, parallel, inverse).
[[nodiscard]] StateSpace recover_controller_tf(ControllerForm form, const BlockSet& blocks, const StateSpace& plant);

// Dispatches on kind: shift-register forms where available, composition for Mixed II.
[[nodiscard]] ControllerRealization realize(Kind kind, const BlockSet& blocks, const StateSpace& plant);

struct RealizationDiagnostics {
    Index states;
    Index minimal_states;
};

[[nodiscard]] RealizationDiagnostics diagnose(const StateSpace& controller);

}  // namespace clp
