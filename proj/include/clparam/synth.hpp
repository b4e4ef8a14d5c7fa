#pragma once

#include "clparam/param.hpp"

namespace clp {

struct H2Problem {
    StateSpace plant;
    Matrix q;  // output weight, PSD (n x n for the state-feedback form)
    Matrix r;  // input weight, PD
    Kind kind;
    int horizon;
};

// Quadratic cost kept in least-squares form: ||J x + c||^2.
struct LeastSquaresCost {
    Matrix j;
    Vector c;

    [[nodiscard]] double value(const Vector& x) const { return (j * x + c).squaredNorm(); }
    [[nodiscard]] Vector gradient(const Vector& x) const { return 2.0 * j.transpose() * (j * x + c); }
};

// Symmetric square root of a PSD matrix; throws when the matrix is not symmetric or has a negative eigenvalue.
[[nodiscard]] Matrix psd_sqrt(const Matrix& m);

[[nodiscard]] LeastSquaresCost assemble_cost(const H2Problem& problem, const CoefficientProgram& program);

struct QpSolution {
    Vector x;
    Vector multipliers;      // one per retained constraint row
    double cost;
    double kkt_residual;     // ||grad + E' lambda|| / (1 + ||grad||)
    double constraint_residual;  // ||E x - f|| / max(1, ||f||)
    Index retained_rows;
    bool rank_deficient_hessian;  // flat directions on the constraint nullspace; minimum-norm point returned
};

// min ||J x + c||^2 subject to E x = f by the nullspace method.
[[nodiscard]] QpSolution solve_equality_qp(const LeastSquaresCost& cost, const Matrix& e, const Vector& f,
                                           double feasibility_tol = kDefaultFeasibilityTol);

struct SynthesisResult {
    Kind kind;
    int horizon;
    BlockSet blocks;
    double cost_squared;
    double h2_norm;
    double kkt_residual;
    double constraint_residual;
    bool rank_deficient_hessian;
};

struct SynthesisOptions {
    double feasibility_tol = kDefaultFeasibilityTol;
};

[[nodiscard]] SynthesisResult synthesize(const H2Problem& problem, const SynthesisOptions& options = {});

}  // namespace clp
