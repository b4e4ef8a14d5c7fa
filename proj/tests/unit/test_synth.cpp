#include <doctest.h>

#include "clparam/synth.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace clp;

namespace {

H2Problem car_problem(Kind kind, int horizon) {
    return {fixtures::car_following(), Matrix::Identity(2, 2), Matrix::Identity(2, 2), kind, horizon};
}

H2Problem integrator_problem(Kind kind, int horizon) {
    return {fixtures::integrator_plant(), Matrix::Identity(1, 1), Matrix::Identity(1, 1), kind, horizon};
}

}  // namespace

TEST_CASE("cost at the zero point is Tr Q + Tr R") {
    std::mt19937_64 rng(3);
    const Matrix l = oracle::random_matrix(rng, 2, 2);
    const Matrix q = l * l.transpose();
    const Matrix r = q + Matrix::Identity(2, 2);
    for (const Kind kind : {Kind::slp, Kind::iop, Kind::mixed_i, Kind::mixed_ii}) {
        const H2Problem problem{fixtures::car_following(), q, r, kind, 4};
        const CoefficientProgram program = build_constraints(kind, problem.plant, 4);
        const LeastSquaresCost cost = assemble_cost(problem, program);
        CHECK(cost.value(Vector::Zero(program.layout.size())) == doctest::Approx(q.trace() + r.trace()));
    }
}

TEST_CASE("one-variable QP") {
    // (x - 1)^2 + (x + 1)^2
    const LeastSquaresCost cost{Matrix::Ones(2, 1), (Vector(2) << -1, 1).finished()};
    const QpSolution free = solve_equality_qp(cost, Matrix(0, 1), Vector(0));
    CHECK(free.x(0) == doctest::Approx(0.0));
    CHECK(free.cost == doctest::Approx(2.0));
    const QpSolution pinned = solve_equality_qp(cost, Matrix::Constant(1, 1, 2.0), Vector::Constant(1, 4.0));
    CHECK(pinned.x(0) == doctest::Approx(2.0));
    CHECK(pinned.cost == doctest::Approx(10.0));
    CHECK(pinned.kkt_residual < 1e-12);
    CHECK(std::abs(pinned.multipliers(0)) == doctest::Approx(4.0));
    CHECK_THROWS_AS(static_cast<void>(solve_equality_qp(cost, Matrix::Ones(2, 1), (Vector(2) << 1, 2).finished())),
                    Error);
}

TEST_CASE("integrator plant at T = 2") {
    const SynthesisResult res = synthesize(integrator_problem(Kind::iop, 2));
    // y = du delayed once is unavoidable: cost 1 (yy) + 1 (yu) + 1 (uu).
    CHECK(res.cost_squared == doctest::Approx(3.0));
    for (const Matrix& c : res.blocks.at(Block::uy).coeffs()) CHECK(c.norm() < 1e-10);
    CHECK(res.kkt_residual < 1e-10);
}

TEST_CASE("car-following at T = 10") {
    const SynthesisResult res = synthesize(car_problem(Kind::iop, 10));
    CHECK(res.h2_norm == doctest::Approx(54.20).epsilon(1e-3));
    CHECK(res.constraint_residual < 1e-10);
    CHECK(res.h2_norm * res.h2_norm >= 4.0);
}

TEST_CASE("optimal cost decreases with the horizon") {
    double previous = std::numeric_limits<double>::infinity();
    for (const int horizon : {6, 8, 10, 12, 15}) {
        const double cost = synthesize(car_problem(Kind::iop, horizon)).h2_norm;
        CHECK(cost <= previous * (1.0 + 1e-9));
        CHECK(cost >= 2.0);
        previous = cost;
    }
}

TEST_CASE("the four parameterizations share an optimum") {
    const double iop = synthesize(car_problem(Kind::iop, 12)).h2_norm;
    for (const Kind kind : {Kind::slp, Kind::mixed_i, Kind::mixed_ii}) {
        CHECK(synthesize(car_problem(kind, 12)).h2_norm == doctest::Approx(iop).epsilon(1e-8));
    }
}

TEST_CASE("KKT point agrees with finite differences") {
    const H2Problem problem = car_problem(Kind::mixed_i, 6);
    const CoefficientProgram program = build_constraints(problem.kind, problem.plant, problem.horizon);
    const LeastSquaresCost cost = assemble_cost(problem, program);
    const QpSolution sol = solve_equality_qp(cost, program.e, program.f);
    const Matrix kernel = Eigen::FullPivLU<Matrix>(program.e).kernel();
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 5; ++trial) {
        Vector dir = kernel * oracle::random_matrix(rng, kernel.cols(), 1);
        dir.normalize();
        constexpr double h = 1e-4;
        const double slope = (cost.value(sol.x + h * dir) - cost.value(sol.x - h * dir)) / (2 * h);
        CHECK(std::abs(slope) < 1e-6 * (1.0 + sol.cost));
        CHECK(cost.value(sol.x + h * dir) >= sol.cost);
    }
    CHECK(sol.kkt_residual < 1e-9);
}

TEST_CASE("weights are validated") {
    CHECK_THROWS_AS(static_cast<void>(psd_sqrt((Matrix(2, 2) << 1, 2, 0, 1).finished())), Error);
    CHECK_THROWS_AS(static_cast<void>(psd_sqrt((Matrix(2, 2) << 1, 0, 0, -1).finished())), Error);
    const Matrix root = psd_sqrt((Matrix(2, 2) << 2, 1, 1, 2).finished());
    CHECK((root * root - (Matrix(2, 2) << 2, 1, 1, 2).finished()).norm() < 1e-12);
    H2Problem singular_r = car_problem(Kind::iop, 3);
    singular_r.r = Matrix::Zero(2, 2);
    CHECK_THROWS_AS(static_cast<void>(synthesize(singular_r)), Error);
}

TEST_CASE("infeasible programs are reported") {
    const H2Problem problem{fixtures::uncontrollable_mode(), Matrix::Identity(1, 1), Matrix::Identity(1, 1), Kind::slp, 10};
    try {
        static_cast<void>(synthesize(problem));
        FAIL("expected Infeasible");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Infeasible);
    }
}
