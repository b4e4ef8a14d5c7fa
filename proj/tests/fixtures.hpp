#pragma once
// Shared plants and block sets for the test suites.

#include <initializer_list>

#include "clparam/io.hpp"

namespace fixtures {

inline clp::StateSpace car_following() { return clp::parse_problem(clp::example_problem("car-following")).plant; }

// A = diag(0.5, 1), B = [0; 1], C = [0, 1]: the mode at 0.5 is neither controllable nor observable.
inline clp::StateSpace uncontrollable_mode() {
    return clp::parse_problem(clp::example_problem("uncontrollable-mode")).plant;
}

inline clp::StateSpace integrator_plant() {
    return clp::StateSpace(clp::Matrix::Zero(1, 1), clp::Matrix::Ones(1, 1), clp::Matrix::Ones(1, 1), clp::Matrix::Zero(1, 1));
}

inline clp::FirMatrix scalar_fir(std::initializer_list<double> coeffs) {
    std::vector<clp::Matrix> out;
    for (const double c : coeffs) out.push_back(clp::Matrix::Constant(1, 1, c));
    return {1, 1, std::move(out)};
}

// Approximate SLP solution for A = 0, B = C = 1 with a destabilizing four-block controller.
inline clp::BlockSet counterexample_blocks() {
    return clp::parse_problem(clp::example_problem("slp-counterexample")).fixture->blocks;
}

inline clp::StateSpace with_identity_output(const clp::StateSpace& g) {
    const clp::Index n = g.states();
    return {g.a(), g.b(), clp::Matrix::Identity(n, n), clp::Matrix::Zero(n, g.inputs())};
}

}  // namespace fixtures
