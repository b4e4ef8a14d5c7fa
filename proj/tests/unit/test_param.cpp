#include <doctest.h>

#include "clparam/param.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace clp;

namespace {

double max_abs(const CMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

std::vector<Complex> random_points(std::uint64_t seed, int count) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> radius(0.6, 2.0);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    std::vector<Complex> out;
    for (int i = 0; i < count; ++i) out.push_back(std::polar(radius(rng), angle(rng)));
    return out;
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no clp::Error thrown");
    return ErrorCode::InvalidArgument;
}

// Least-squares point plus a random nullspace component: a generic member of the affine set.
Vector generic_feasible_point(const CoefficientProgram& program, std::uint64_t seed) {
    const FeasibilityDiagnosis diag = check_feasibility(program);
    REQUIRE(diag.feasible);
    const Eigen::FullPivLU<Matrix> lu(program.e);
    const Matrix kernel = lu.kernel();
    std::mt19937_64 rng(seed);
    return diag.solution + kernel * oracle::random_matrix(rng, kernel.cols(), 1, 0.3);
}

std::map<Block, CMatrix> at(const BlockSet& blocks, Complex z) {
    std::map<Block, CMatrix> out;
    for (const auto& [b, h] : blocks) out.emplace(b, oracle::fir_response(h.coeffs(), z));
    return out;
}

}  // namespace

TEST_CASE("IOP is feasible on the uncontrollable-mode plant at T = 1") {
    const CoefficientProgram program = build_constraints(Kind::iop, fixtures::uncontrollable_mode(), 1);
    const FeasibilityDiagnosis diag = check_feasibility(program);
    CHECK(diag.feasible);
    CHECK(diag.blocking_constraints.empty());
}

TEST_CASE("SLP is infeasible on the uncontrollable-mode plant at T = 10") {
    const CoefficientProgram program = build_constraints(Kind::slp, fixtures::uncontrollable_mode(), 10);
    const FeasibilityDiagnosis diag = check_feasibility(program);
    CHECK_FALSE(diag.feasible);
    CHECK(diag.min_residual > 1e-4);
    CHECK_FALSE(diag.blocking_constraints.empty());
}

TEST_CASE("input validation") {
    const StateSpace car = fixtures::car_following();
    CHECK(code_of([&] { static_cast<void>(build_constraints(Kind::iop, car, 0)); }) == ErrorCode::HorizonTooShort);
    CHECK(code_of([&] { static_cast<void>(build_constraints(Kind::state_feedback, car, 3)); }) ==
          ErrorCode::NotStateFeedback);
    const StateSpace unstable(Matrix::Constant(1, 1, 2.0), Matrix::Ones(1, 1), Matrix::Ones(1, 1), Matrix::Zero(1, 1));
    CHECK(code_of([&] { static_cast<void>(build_constraints(Kind::stable_plant, unstable, 3)); }) ==
          ErrorCode::PlantUnstable);
    const StateSpace biproper(Matrix::Zero(1, 1), Matrix::Ones(1, 1), Matrix::Ones(1, 1), Matrix::Ones(1, 1));
    CHECK(code_of([&] { static_cast<void>(build_constraints(Kind::iop, biproper, 3)); }) ==
          ErrorCode::PlantNotStrictlyProper);
    CHECK(parse_kind(to_string(Kind::mixed_ii)) == Kind::mixed_ii);
    CHECK_THROWS_AS(static_cast<void>(parse_kind("youla")), Error);
}

TEST_CASE("vectorize inverts extract_blocks") {
    const CoefficientProgram program = build_constraints(Kind::slp, fixtures::car_following(), 4);
    std::mt19937_64 rng(9);
    const Vector x = oracle::random_matrix(rng, program.layout.size(), 1);
    const BlockSet blocks = extract_blocks(program, x);
    CHECK((vectorize(program.layout, blocks) - x).norm() == 0.0);
    CHECK(blocks.at(Block::xx)[0].isZero(0.0));
    CHECK(blocks.size() == 4);

    BlockSet bad = blocks;
    bad.erase(Block::uy);
    CHECK_THROWS_AS(static_cast<void>(vectorize(program.layout, bad)), Error);
}

TEST_CASE("constraint rows encode the frequency-domain identities") {
    const StateSpace plant = fixtures::car_following();
    const Index n = plant.states();
    const CMatrix a = plant.a().cast<Complex>();
    const CMatrix b = plant.b().cast<Complex>();
    const CMatrix c = plant.c().cast<Complex>();
    const CMatrix in = CMatrix::Identity(n, n);
    const CMatrix ip = CMatrix::Identity(2, 2);
    const CMatrix im = CMatrix::Identity(2, 2);
    const auto points = random_points(31, 32);

    SUBCASE("SLP") {
        const CoefficientProgram program = build_constraints(Kind::slp, plant, 6);
        const BlockSet blocks = extract_blocks(program, generic_feasible_point(program, 1));
        for (const Complex z : points) {
            const auto v = at(blocks, z);
            const CMatrix zi = z * in - a;
            CHECK(max_abs(zi * v.at(Block::xx) - b * v.at(Block::ux) - in) < 1e-8);
            CHECK(max_abs(zi * v.at(Block::xy) - b * v.at(Block::uy)) < 1e-8);
            CHECK(max_abs(v.at(Block::xx) * zi - v.at(Block::xy) * c - in) < 1e-8);
            CHECK(max_abs(v.at(Block::ux) * zi - v.at(Block::uy) * c) < 1e-8);
        }
    }
    SUBCASE("IOP") {
        const CoefficientProgram program = build_constraints(Kind::iop, plant, 6);
        const BlockSet blocks = extract_blocks(program, generic_feasible_point(program, 2));
        for (const Complex z : points) {
            const auto v = at(blocks, z);
            const CMatrix g = oracle::response(plant.a(), plant.b(), plant.c(), plant.d(), z);
            CHECK(max_abs(v.at(Block::yy) - g * v.at(Block::uy) - ip) < 1e-8);
            CHECK(max_abs(v.at(Block::yu) - g * v.at(Block::uu)) < 1e-8);
            CHECK(max_abs(v.at(Block::yu) - v.at(Block::yy) * g) < 1e-8);
            CHECK(max_abs(v.at(Block::uu) - v.at(Block::uy) * g - im) < 1e-8);
        }
    }
    SUBCASE("Mixed I") {
        const CoefficientProgram program = build_constraints(Kind::mixed_i, plant, 6);
        const BlockSet blocks = extract_blocks(program, generic_feasible_point(program, 3));
        for (const Complex z : points) {
            const auto v = at(blocks, z);
            const CMatrix r = (z * in - a).inverse();
            CHECK(max_abs(v.at(Block::yx) - c * r * (b * v.at(Block::ux) + in)) < 1e-8);
            CHECK(max_abs(v.at(Block::yy) - c * r * b * v.at(Block::uy) - ip) < 1e-8);
            CHECK(max_abs(v.at(Block::yx) * (z * in - a) - v.at(Block::yy) * c) < 1e-8);
            CHECK(max_abs(v.at(Block::ux) * (z * in - a) - v.at(Block::uy) * c) < 1e-8);
        }
    }
    SUBCASE("Mixed II") {
        const CoefficientProgram program = build_constraints(Kind::mixed_ii, plant, 6);
        const BlockSet blocks = extract_blocks(program, generic_feasible_point(program, 4));
        for (const Complex z : points) {
            const auto v = at(blocks, z);
            const CMatrix r = (z * in - a).inverse();
            CHECK(max_abs((z * in - a) * v.at(Block::xy) - b * v.at(Block::uy)) < 1e-8);
            CHECK(max_abs((z * in - a) * v.at(Block::xu) - b * v.at(Block::uu)) < 1e-8);
            CHECK(max_abs(v.at(Block::xu) - (v.at(Block::xy) * c + in) * r * b) < 1e-8);
            CHECK(max_abs(v.at(Block::uu) - v.at(Block::uy) * c * r * b - im) < 1e-8);
        }
    }
}

TEST_CASE("lifting SLP solutions preserves feasibility") {
    const StateSpace plant = fixtures::car_following();
    const CoefficientProgram slp = build_constraints(Kind::slp, plant, 8);
    const BlockSet blocks = extract_blocks(slp, generic_feasible_point(slp, 5));
    for (const Kind to : {Kind::iop, Kind::mixed_i, Kind::mixed_ii}) {
        const BlockSet lifted = lift_solution(Kind::slp, to, blocks, plant);
        const int horizon = [&] {
            int h = 0;
            for (const auto& [b, fir] : lifted) h = std::max(h, fir.horizon());
            return h;
        }();
        CHECK(program_residual(build_constraints(to, plant, horizon), lifted) < 1e-10);
    }
    const BlockSet iop = lift_solution(Kind::slp, Kind::iop, blocks, plant);
    const BlockSet via_mixed =
        lift_solution(Kind::mixed_i, Kind::iop, lift_solution(Kind::slp, Kind::mixed_i, blocks, plant), plant);
    for (const Block b : blocks_of(Kind::iop)) {
        const FirMatrix diff = iop.at(b) - via_mixed.at(b);
        for (const Matrix& m : diff.coeffs()) CHECK(m.norm() < 1e-12);
    }
}

TEST_CASE("lifting against the inclusion chain is rejected") {
    const StateSpace plant = fixtures::car_following();
    const CoefficientProgram iop = build_constraints(Kind::iop, plant, 3);
    const BlockSet blocks = extract_blocks(iop, check_feasibility(iop).solution);
    CHECK(code_of([&] { static_cast<void>(lift_solution(Kind::iop, Kind::slp, blocks, plant)); }) ==
          ErrorCode::UnsupportedDirection);
    CHECK(code_of([&] { static_cast<void>(lift_solution(Kind::iop, Kind::mixed_i, blocks, plant)); }) ==
          ErrorCode::UnsupportedDirection);
}

TEST_CASE("affine matrix algebra") {
    std::mt19937_64 rng(4);
    AffineMatrix m(2, 3, 5);
    m.lin() = oracle::random_matrix(rng, 6, 5);
    m.cst() = oracle::random_matrix(rng, 6, 1);
    const Matrix p = oracle::random_matrix(rng, 4, 2);
    const Matrix q = oracle::random_matrix(rng, 3, 2);
    const Vector x = oracle::random_matrix(rng, 5, 1);
    CHECK((m.left(p).value(x) - p * m.value(x)).norm() < 1e-12);
    CHECK((m.right(q).value(x) - m.value(x) * q).norm() < 1e-12);
    CHECK(((m + m).value(x) - 2.0 * m.value(x)).norm() < 1e-12);
    CHECK((m - m).is_zero());
    CHECK(AffineMatrix::constant(Matrix::Zero(2, 2), 3).is_zero());
}
