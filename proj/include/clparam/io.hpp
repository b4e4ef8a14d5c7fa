#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "clparam/closedloop.hpp"
#include "clparam/param.hpp"
#include "clparam/robust.hpp"

namespace clp {

using Json = nlohmann::json;

struct ProblemOptions {
    int grid_size = kDefaultGridSize;
    double feasibility_tol = kDefaultFeasibilityTol;
    std::uint64_t seed = 0;
};

// Blocks shipped with a problem for auditing (e.g. a known approximate solution).
struct Fixture {
    Kind kind;
    BlockSet blocks;
};

struct Problem {
    StateSpace plant;
    Matrix q;
    Matrix r;
    int horizon;
    Kind kind;
    ProblemOptions options;
    std::optional<StateSpace> k0;
    std::optional<Fixture> fixture;
};

// Default feasibility tolerance, overridable through CLP_FEAS_TOL.
[[nodiscard]] double default_feasibility_tol();

[[nodiscard]] StateSpace forward_euler(const Matrix& a, const Matrix& b, const Matrix& c, double dt);

[[nodiscard]] Matrix matrix_from_json(const Json& j, const std::string& what);
[[nodiscard]] Json matrix_to_json(const Matrix& m);
[[nodiscard]] Problem parse_problem(const Json& j);
[[nodiscard]] Problem load_problem(const std::string& path);

// Built-in problem files: car-following, uncontrollable-mode, slp-counterexample, random-integer.
[[nodiscard]] Json example_problem(const std::string& name, std::uint64_t seed = 0);
[[nodiscard]] const std::vector<std::string>& example_names();

// Text format: "statespace <n> <m> <p>" then sections A, B, C, D with one matrix row per line.
void write_controller(std::ostream& os, const StateSpace& k);
[[nodiscard]] StateSpace read_controller(std::istream& is);
[[nodiscard]] StateSpace load_controller(const std::string& path);

// block,lag,row,col,value
void write_coefficients_csv(std::ostream& os, const BlockSet& blocks);
// t,x1..xn,y1..yp,u1..um
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
// MatrixMarket coordinate format.
void write_matrix_market(std::ostream& os, const Matrix& m);

void write_residual_report(std::ostream& os, const ResidualReport& report);
void write_verdict(std::ostream& os, const StabilityVerdict& verdict);

// %.17g
[[nodiscard]] std::string format_number(double value);

}  // namespace clp
