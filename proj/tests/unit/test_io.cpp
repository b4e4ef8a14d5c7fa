#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include "clparam/io.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace clp;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no clp::Error thrown");
    return ErrorCode::InvalidArgument;
}

Json scalar_problem() {
    return Json::parse(R"({"plant": {"A": [[0.5]], "B": [[1]], "C": [[1]]}})");
}

// Restores an environment variable on scope exit.
class EnvGuard {
public:
    explicit EnvGuard(const char* name) : name_(name) {
        if (const char* v = std::getenv(name)) saved_ = v;
    }
    EnvGuard(const EnvGuard&) = delete;
    EnvGuard& operator=(const EnvGuard&) = delete;
    ~EnvGuard() {
        if (saved_) ::setenv(name_, saved_->c_str(), 1);
        else ::unsetenv(name_);
    }

private:
    const char* name_;
    std::optional<std::string> saved_;
};

}  // namespace

TEST_CASE("minimal problem uses defaults") {
    const Problem p = parse_problem(scalar_problem());
    CHECK(p.horizon == 10);
    CHECK(p.kind == Kind::iop);
    CHECK(p.q.isIdentity());
    CHECK(p.r.isIdentity());
    CHECK_FALSE(p.k0.has_value());
    CHECK_FALSE(p.fixture.has_value());
}

TEST_CASE("malformed problems raise ParseError") {
    const auto parse_code = [](const char* text) {
        return code_of([&] { static_cast<void>(parse_problem(Json::parse(text))); });
    };
    CHECK(parse_code(R"([1, 2])") == ErrorCode::ParseError);
    CHECK(parse_code(R"({"horizon": 3})") == ErrorCode::ParseError);
    CHECK(parse_code(R"({"plant": {"A": [[1]], "B": [[1]]}})") == ErrorCode::ParseError);
    CHECK(parse_code(R"({"plant": {"A": [[1, 2], [3]], "B": [[1]], "C": [[1]]}})") == ErrorCode::ParseError);
    CHECK(parse_code(R"({"plant": {"A": [["x"]], "B": [[1]], "C": [[1]]}})") == ErrorCode::ParseError);
    CHECK(parse_code(R"({"plant": {"A": [[1]], "B": [[1]], "C": [[1]]}, "horizon": "ten"})") == ErrorCode::ParseError);
    CHECK(parse_code(R"({"plant": {"A": [[1]], "B": [[1]], "C": [[1]]},
                         "discretization": {"method": "forward-euler", "dt": 0.1, "source": {}}})") ==
          ErrorCode::ParseError);
    CHECK(parse_code(R"({"discretization": {"method": "tustin", "dt": 0.1,
                         "source": {"A": [[1]], "B": [[1]], "C": [[1]]}}})") == ErrorCode::ParseError);
    CHECK(parse_code(R"({"plant": {"A": [[1]], "B": [[1]], "C": [[1]]}, "options": {"grid_size": 2}})") ==
          ErrorCode::ParseError);
    CHECK(parse_code(R"({"plant": {"A": [[1]], "B": [[1]], "C": [[1]], "D": [[1]]}})") ==
          ErrorCode::PlantNotStrictlyProper);
    CHECK(code_of([] { static_cast<void>(load_problem("/nonexistent/problem.json")); }) == ErrorCode::ParseError);
}

TEST_CASE("forward-Euler discretization") {
    const Json j = Json::parse(R"({"discretization": {"method": "forward-euler", "dt": 0.5,
                                   "source": {"A": [[-1]], "B": [[2]], "C": [[3]]}}})");
    const Problem p = parse_problem(j);
    CHECK(p.plant.a()(0, 0) == doctest::Approx(0.5));
    CHECK(p.plant.b()(0, 0) == doctest::Approx(1.0));
    CHECK(p.plant.c()(0, 0) == doctest::Approx(3.0));
}

TEST_CASE("every built-in example parses") {
    for (const std::string& name : example_names()) {
        CAPTURE(name);
        const Json j = example_problem(name, 3);
        const Problem p = parse_problem(Json::parse(j.dump()));
        CHECK(p.plant.strictly_proper());
    }
    const Problem car = parse_problem(example_problem("car-following"));
    CHECK(car.plant.states() == 4);
    CHECK(car.horizon == 30);
    const Problem ex = parse_problem(example_problem("slp-counterexample"));
    REQUIRE(ex.fixture.has_value());
    CHECK(ex.fixture->kind == Kind::slp);
    CHECK(ex.fixture->blocks.at(Block::xy)[1](0, 0) == doctest::Approx(0.999));
    CHECK(code_of([] { static_cast<void>(example_problem("nope")); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("controller files round-trip exactly") {
    std::mt19937_64 rng(6);
    const StateSpace k(oracle::random_matrix(rng, 3, 3), oracle::random_matrix(rng, 3, 2),
                       oracle::random_matrix(rng, 1, 3), oracle::random_matrix(rng, 1, 2));
    std::stringstream buffer;
    write_controller(buffer, k);
    const StateSpace back = read_controller(buffer);
    CHECK(back.a() == k.a());
    CHECK(back.b() == k.b());
    CHECK(back.c() == k.c());
    CHECK(back.d() == k.d());

    std::stringstream truncated("statespace 1 1 1\nA\n0.5\nB\n1\n");
    CHECK(code_of([&] { static_cast<void>(read_controller(truncated)); }) == ErrorCode::ParseError);
    std::stringstream wrong_header("ss 1 1 1\n");
    CHECK(code_of([&] { static_cast<void>(read_controller(wrong_header)); }) == ErrorCode::ParseError);
}

TEST_CASE("static controllers round-trip") {
    std::stringstream buffer;
    write_controller(buffer, StateSpace::gain(Matrix::Constant(1, 1, -2.0)));
    CHECK(buffer.str().rfind("statespace 0 1 1\n", 0) == 0);
    const StateSpace back = read_controller(buffer);
    CHECK(back.states() == 0);
    CHECK(back.d()(0, 0) == -2.0);
}

TEST_CASE("CLP_FEAS_TOL overrides the default tolerance") {
    const EnvGuard guard("CLP_FEAS_TOL");
    ::unsetenv("CLP_FEAS_TOL");
    CHECK(default_feasibility_tol() == kDefaultFeasibilityTol);
    ::setenv("CLP_FEAS_TOL", "1e-3", 1);
    CHECK(default_feasibility_tol() == 1e-3);
    CHECK(parse_problem(scalar_problem()).options.feasibility_tol == 1e-3);
    ::setenv("CLP_FEAS_TOL", "abc", 1);
    CHECK(code_of([] { static_cast<void>(default_feasibility_tol()); }) == ErrorCode::ParseError);
    ::setenv("CLP_FEAS_TOL", "-1", 1);
    CHECK(code_of([] { static_cast<void>(default_feasibility_tol()); }) == ErrorCode::ParseError);
}

TEST_CASE("tabular writers") {
    std::ostringstream csv;
    write_coefficients_csv(csv, {{Block::uy, fixtures::scalar_fir({1.5, -2})}});
    CHECK(csv.str() == "block,lag,row,col,value\nPhi_uy,0,0,0,1.5\nPhi_uy,1,0,0,-2\n");

    std::ostringstream mm;
    write_matrix_market(mm, (Matrix(2, 2) << 0, 3, 0, 0).finished());
    CHECK(mm.str() == "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 2 3\n");

    Trajectory traj;
    traj.x = {Vector::Ones(1), Vector::Zero(1)};
    traj.y = {Vector::Ones(1), Vector::Zero(1)};
    traj.u = {Vector::Constant(1, -1.0), Vector::Zero(1)};
    std::ostringstream tcsv;
    write_trajectory_csv(tcsv, traj);
    CHECK(tcsv.str() == "t,x1,y1,u1\n0,1,1,-1\n1,0,0,0\n");

    CHECK(format_number(0.1) == "0.10000000000000001");
    CHECK(matrix_from_json(Json::parse("[1, 2, 3]"), "v").cols() == 1);
    CHECK(matrix_to_json(Matrix::Identity(2, 2)).dump() == "[[1.0,0.0],[0.0,1.0]]");
}
