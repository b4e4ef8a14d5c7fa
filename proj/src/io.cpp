#include "clparam/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace clp {

std::string format_number(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

double default_feasibility_tol() {
    if (const char* env = std::getenv("CLP_FEAS_TOL")) {
        char* end = nullptr;
        const double tol = std::strtod(env, &end);
        require(end != env && *end == '\0' && tol > 0.0, ErrorCode::ParseError,
                std::string("CLP_FEAS_TOL is not a positive number: ") + env);
        return tol;
    }
    return kDefaultFeasibilityTol;
}

StateSpace forward_euler(const Matrix& a, const Matrix& b, const Matrix& c, double dt) {
    require(dt > 0.0, ErrorCode::InvalidArgument, "dt must be positive");
    require(a.rows() == a.cols() && b.rows() == a.rows() && c.cols() == a.rows(), ErrorCode::DimensionMismatch,
            "continuous-time matrices have inconsistent shapes");
    return StateSpace(Matrix::Identity(a.rows(), a.cols()) + dt * a, dt * b, c, Matrix::Zero(c.rows(), b.cols()));
}

Matrix matrix_from_json(const Json& j, const std::string& what) {
    require(j.is_array(), ErrorCode::ParseError, what + ": expected an array of rows");
    if (j.empty()) return Matrix(0, 0);
    // A flat numeric array is read as a column.
    if (j.front().is_number()) {
        Matrix m(static_cast<Index>(j.size()), 1);
        for (std::size_t i = 0; i < j.size(); ++i) {
            require(j[i].is_number(), ErrorCode::ParseError, what + ": non-numeric entry");
            m(static_cast<Index>(i), 0) = j[i].get<double>();
        }
        return m;
    }
    const std::size_t cols = j.front().size();
    Matrix m(static_cast<Index>(j.size()), static_cast<Index>(cols));
    for (std::size_t i = 0; i < j.size(); ++i) {
        require(j[i].is_array() && j[i].size() == cols, ErrorCode::ParseError, what + ": rows must have equal length");
        for (std::size_t k = 0; k < cols; ++k) {
            require(j[i][k].is_number(), ErrorCode::ParseError, what + ": non-numeric entry");
            m(static_cast<Index>(i), static_cast<Index>(k)) = j[i][k].get<double>();
        }
    }
    require(m.allFinite(), ErrorCode::NonFinite, what + ": non-finite entry");
    return m;
}

Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

const Json& field(const Json& j, const char* key, const std::string& where) {
    require(j.is_object() && j.contains(key), ErrorCode::ParseError, where + ": missing \"" + key + "\"");
    return j.at(key);
}

StateSpace state_space_from_json(const Json& j, const std::string& where) {
    const Matrix a = matrix_from_json(field(j, "A", where), where + ".A");
    const Matrix b = matrix_from_json(field(j, "B", where), where + ".B");
    const Matrix c = matrix_from_json(field(j, "C", where), where + ".C");
    Matrix d = j.contains("D") ? matrix_from_json(j.at("D"), where + ".D") : Matrix::Zero(c.rows(), b.cols());
    return StateSpace(a, b, c, std::move(d));
}

StateSpace plant_from_json(const Json& j) {
    const bool has_plant = j.contains("plant");
    const bool has_disc = j.contains("discretization");
    require(has_plant != has_disc, ErrorCode::ParseError, "give exactly one of \"plant\" or \"discretization\"");
    if (has_plant) {
        StateSpace g = state_space_from_json(j.at("plant"), "plant");
        require(g.strictly_proper(), ErrorCode::PlantNotStrictlyProper, "plant must have D = 0");
        return g;
    }
    const Json& d = j.at("discretization");
    const std::string method = field(d, "method", "discretization").get<std::string>();
    require(method == "forward-euler", ErrorCode::ParseError, "unsupported discretization method \"" + method + "\"");
    const Json& src = field(d, "source", "discretization");
    return forward_euler(matrix_from_json(field(src, "A", "source"), "source.A"),
                         matrix_from_json(field(src, "B", "source"), "source.B"),
                         matrix_from_json(field(src, "C", "source"), "source.C"),
                         field(d, "dt", "discretization").get<double>());
}

Block parse_block(const std::string& name) {
    for (const Block b : {Block::xx, Block::xy, Block::xu, Block::yx, Block::yy, Block::yu, Block::ux, Block::uy, Block::uu})
        if (to_string(b) == name) return b;
    throw Error(ErrorCode::ParseError, "unknown block \"" + name + "\"");
}

Fixture fixture_from_json(const Json& j) {
    Fixture f{parse_kind(field(j, "kind", "fixture").get<std::string>()), {}};
    for (const auto& [name, lags] : field(j, "blocks", "fixture").items()) {
        require(lags.is_array() && !lags.empty(), ErrorCode::ParseError, "fixture." + name + ": expected coefficient list");
        std::vector<Matrix> coeffs;
        for (const Json& c : lags) coeffs.push_back(matrix_from_json(c, "fixture." + name));
        const Index rows = coeffs.front().rows();
        const Index cols = coeffs.front().cols();
        f.blocks.emplace(parse_block(name), FirMatrix(rows, cols, std::move(coeffs)));
    }
    return f;
}

}  // namespace

namespace {

Problem problem_from_json(const Json& j) {
    require(j.is_object(), ErrorCode::ParseError, "problem file must be a JSON object");
    StateSpace plant = plant_from_json(j);
    const Index out_dim = plant.outputs();
    Kind kind = j.contains("kind") ? parse_kind(j.at("kind").get<std::string>()) : Kind::iop;
    Matrix q = Matrix::Identity(kind == Kind::state_feedback ? plant.states() : out_dim,
                                kind == Kind::state_feedback ? plant.states() : out_dim);
    Matrix r = Matrix::Identity(plant.inputs(), plant.inputs());
    if (j.contains("weights")) {
        const Json& w = j.at("weights");
        if (w.contains("Q")) q = matrix_from_json(w.at("Q"), "weights.Q");
        if (w.contains("R")) r = matrix_from_json(w.at("R"), "weights.R");
    }
    const int horizon = j.value("horizon", 10);
    ProblemOptions options;
    options.feasibility_tol = default_feasibility_tol();
    if (j.contains("options")) {
        const Json& o = j.at("options");
        options.grid_size = o.value("grid_size", options.grid_size);
        options.feasibility_tol = o.value("feasibility_tol", options.feasibility_tol);
        options.seed = o.value("seed", options.seed);
        require(options.grid_size >= 8, ErrorCode::ParseError, "options.grid_size must be at least 8");
        require(options.feasibility_tol > 0.0, ErrorCode::ParseError, "options.feasibility_tol must be positive");
    }
    std::optional<StateSpace> k0;
    if (j.contains("k0")) k0 = state_space_from_json(j.at("k0"), "k0");
    std::optional<Fixture> fixture;
    if (j.contains("fixture")) fixture = fixture_from_json(j.at("fixture"));
    return Problem{std::move(plant), std::move(q), std::move(r), horizon, kind, options, std::move(k0), std::move(fixture)};
}

}  // namespace

Problem parse_problem(const Json& j) {
    try {
        return problem_from_json(j);
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
}

Problem load_problem(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), ErrorCode::ParseError, "cannot open " + path);
    Json j;
    try {
        in >> j;
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::ParseError, path + ": " + e.what());
    }
    return parse_problem(j);
}

const std::vector<std::string>& example_names() {
    static const std::vector<std::string> names{"car-following", "uncontrollable-mode", "slp-counterexample",
                                                "random-integer"};
    return names;
}

Json example_problem(const std::string& name, std::uint64_t seed) {
    Json j;
    if (name == "car-following") {
        constexpr double a1 = 0.94;
        constexpr double a2 = 1.5;
        constexpr double a3 = 0.9;
        Matrix a = Matrix::Zero(4, 4);
        a.topLeftCorner(2, 2) << 0, -1, a1, -a2;
        a.bottomLeftCorner(2, 2) << 0, 1, 0, a3;
        a.bottomRightCorner(2, 2) << 0, -1, a1, -a2;
        Matrix b = Matrix::Zero(4, 2);
        b(1, 0) = 1;
        b(3, 1) = 1;
        Matrix c = Matrix::Zero(2, 4);
        c(0, 0) = 1;
        c(1, 2) = 1;
        j["discretization"] = {{"method", "forward-euler"},
                               {"dt", 0.1},
                               {"source", {{"A", matrix_to_json(a)}, {"B", matrix_to_json(b)}, {"C", matrix_to_json(c)}}}};
        j["weights"] = {{"Q", matrix_to_json(Matrix::Identity(2, 2))}, {"R", matrix_to_json(Matrix::Identity(2, 2))}};
        j["horizon"] = 30;
        j["kind"] = "iop";
    } else if (name == "uncontrollable-mode") {
        Matrix a = Matrix::Zero(2, 2);
        a(0, 0) = 0.5;
        a(1, 1) = 1.0;
        j["plant"] = {{"A", matrix_to_json(a)}, {"B", Json::array({Json::array({0}), Json::array({1})})},
                      {"C", Json::array({Json::array({0, 1})})}};
        j["horizon"] = 10;
        j["kind"] = "iop";
    } else if (name == "slp-counterexample") {
        j["plant"] = {{"A", Json::array({Json::array({0})})}, {"B", Json::array({Json::array({1})})},
                      {"C", Json::array({Json::array({1})})}};
        j["horizon"] = 5;
        j["kind"] = "slp";
        const auto scalar_lags = [](std::initializer_list<double> values) {
            Json lags = Json::array();
            for (const double v : values) lags.push_back(Json::array({Json::array({v})}));
            return lags;
        };
        j["fixture"] = {{"kind", "slp"},
                        {"blocks",
                         {{"Phi_xx", scalar_lags({0, 1, 1, 7, -24, -180})},
                          {"Phi_ux", scalar_lags({0, 1, 7, -24, -180, 0})},
                          {"Phi_xy", scalar_lags({0, 0.999, 6.996, -24.004, -180, 0})},
                          {"Phi_uy", scalar_lags({1, 7, -24, -180, 0, 0})}}}};
    } else if (name == "random-integer") {
        const StateSpace g = random_integer_plant(seed);
        j["plant"] = {{"A", matrix_to_json(g.a())}, {"B", matrix_to_json(g.b())}, {"C", matrix_to_json(g.c())}};
        j["weights"] = {{"Q", matrix_to_json(Matrix::Identity(1, 1))}, {"R", matrix_to_json(Matrix::Identity(1, 1))}};
        j["horizon"] = 10;
        j["kind"] = "iop";
        j["options"] = {{"seed", seed}};
    } else {
        throw Error(ErrorCode::InvalidArgument, "unknown example \"" + name + "\"");
    }
    return j;
}

namespace {

void write_matrix_rows(std::ostream& os, const char* label, const Matrix& m) {
    os << label << '\n';
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index k = 0; k < m.cols(); ++k) os << (k ? " " : "") << format_number(m(i, k));
        os << '\n';
    }
}

Matrix read_matrix_rows(std::istream& is, const char* label, Index rows, Index cols) {
    std::string tag;
    require(static_cast<bool>(is >> tag) && tag == label, ErrorCode::ParseError,
            std::string("controller file: expected section ") + label);
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index k = 0; k < cols; ++k)
            require(static_cast<bool>(is >> m(i, k)), ErrorCode::ParseError,
                    std::string("controller file: short section ") + label);
    return m;
}

}  // namespace

void write_controller(std::ostream& os, const StateSpace& k) {
    os << "statespace " << k.states() << ' ' << k.inputs() << ' ' << k.outputs() << '\n';
    write_matrix_rows(os, "A", k.a());
    write_matrix_rows(os, "B", k.b());
    write_matrix_rows(os, "C", k.c());
    write_matrix_rows(os, "D", k.d());
}

StateSpace read_controller(std::istream& is) {
    std::string tag;
    Index n = -1;
    Index m = -1;
    Index p = -1;
    require(static_cast<bool>(is >> tag >> n >> m >> p) && tag == "statespace" && n >= 0 && m >= 0 && p >= 0,
            ErrorCode::ParseError, "controller file: expected header \"statespace n m p\"");
    Matrix a = read_matrix_rows(is, "A", n, n);
    Matrix b = read_matrix_rows(is, "B", n, m);
    Matrix c = read_matrix_rows(is, "C", p, n);
    Matrix d = read_matrix_rows(is, "D", p, m);
    return StateSpace(std::move(a), std::move(b), std::move(c), std::move(d));
}

StateSpace load_controller(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), ErrorCode::ParseError, "cannot open " + path);
    return read_controller(in);
}

void write_coefficients_csv(std::ostream& os, const BlockSet& blocks) {
    os << "block,lag,row,col,value\n";
    for (const auto& [block, fir] : blocks)
        for (int k = 0; k <= fir.horizon(); ++k)
            for (Index i = 0; i < fir.rows(); ++i)
                for (Index j = 0; j < fir.cols(); ++j)
                    os << to_string(block) << ',' << k << ',' << i << ',' << j << ',' << format_number(fir[k](i, j))
                       << '\n';
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    const auto width = [](const std::vector<Vector>& v) { return v.empty() ? Index{0} : v.front().size(); };
    os << 't';
    for (Index i = 0; i < width(traj.x); ++i) os << ",x" << i + 1;
    for (Index i = 0; i < width(traj.y); ++i) os << ",y" << i + 1;
    for (Index i = 0; i < width(traj.u); ++i) os << ",u" << i + 1;
    os << '\n';
    for (std::size_t t = 0; t < traj.x.size(); ++t) {
        os << t;
        for (const auto* series : {&traj.x, &traj.y, &traj.u})
            if (t < series->size())
                for (Index i = 0; i < (*series)[t].size(); ++i) os << ',' << format_number((*series)[t](i));
        os << '\n';
    }
}

void write_matrix_market(std::ostream& os, const Matrix& m) {
    Index nnz = 0;
    for (Index j = 0; j < m.cols(); ++j)
        for (Index i = 0; i < m.rows(); ++i) nnz += m(i, j) != 0.0;
    os << "%%MatrixMarket matrix coordinate real general\n" << m.rows() << ' ' << m.cols() << ' ' << nnz << '\n';
    for (Index j = 0; j < m.cols(); ++j)
        for (Index i = 0; i < m.rows(); ++i)
            if (m(i, j) != 0.0) os << i + 1 << ' ' << j + 1 << ' ' << format_number(m(i, j)) << '\n';
}

void write_residual_report(std::ostream& os, const ResidualReport& report) {
    os << "residual_kind: " << to_string(report.kind) << '\n';
    for (std::size_t i = 0; i < report.deltas.size(); ++i) {
        const Residual& r = report.deltas[i];
        if (r.name == "-") continue;
        os << "delta_" << i + 1 << ": " << r.name << " | hinf " << format_number(r.hinf) << (r.zero ? " (zero)" : "")
           << '\n';
    }
}

void write_verdict(std::ostream& os, const StabilityVerdict& verdict) {
    os << "internally_stable: " << (verdict.internally_stable ? "yes" : "no") << '\n'
       << "spectral_radius: " << format_number(verdict.spectral_radius) << '\n';
    for (const GroupVerdict& g : verdict.per_group)
        os << "group " << to_string(g.group) << ": " << (g.stable ? "stable" : "unstable")
           << (g.certifying ? " [certifying]" : "") << " pole_radius " << format_number(g.pole_radius) << " order "
           << g.minimal_order << '\n';
}

}  // namespace clp
