#include "clparam/param.hpp"

#include <algorithm>
#include <cctype>
#include <utility>

namespace clp {

std::string to_string(Kind kind) {
    switch (kind) {
        case Kind::slp: return "slp";
        case Kind::iop: return "iop";
        case Kind::mixed_i: return "mixed-i";
        case Kind::mixed_ii: return "mixed-ii";
        case Kind::stable_plant: return "stable-plant";
        case Kind::state_feedback: return "state-feedback";
    }
    return "?";
}

Kind parse_kind(const std::string& name) {
    std::string key = name;
    std::transform(key.begin(), key.end(), key.begin(), [](unsigned char ch) {
        return ch == '_' ? '-' : static_cast<char>(std::tolower(ch));
    });
    for (Kind k : {Kind::slp, Kind::iop, Kind::mixed_i, Kind::mixed_ii, Kind::stable_plant, Kind::state_feedback}) {
        if (to_string(k) == key) return k;
    }
    if (key == "mixed1") return Kind::mixed_i;
    if (key == "mixed2") return Kind::mixed_ii;
    throw Error(ErrorCode::InvalidArgument, "unknown parameterization kind '" + name + "'");
}

std::string to_string(Block block) {
    switch (block) {
        case Block::xx: return "Phi_xx";
        case Block::xy: return "Phi_xy";
        case Block::xu: return "Phi_xu";
        case Block::yx: return "Phi_yx";
        case Block::yy: return "Phi_yy";
        case Block::yu: return "Phi_yu";
        case Block::ux: return "Phi_ux";
        case Block::uy: return "Phi_uy";
        case Block::uu: return "Phi_uu";
    }
    return "?";
}

Index BlockLayout::index(int lag, Index i, Index j) const {
    return offset + static_cast<Index>(lag - first_lag()) * rows * cols + i + rows * j;
}

void VariableLayout::add(Block block, Index rows, Index cols, int horizon, DirectTerm direct) {
    require(!has(block), ErrorCode::InvalidArgument, "duplicate block " + to_string(block));
    require(direct != DirectTerm::identity || rows == cols, ErrorCode::DimensionMismatch,
            "identity direct term needs a square block");
    blocks_.push_back({block, rows, cols, horizon, direct, size_});
    size_ += blocks_.back().size();
}

bool VariableLayout::has(Block block) const {
    return std::any_of(blocks_.begin(), blocks_.end(), [&](const BlockLayout& b) { return b.block == block; });
}

const BlockLayout& VariableLayout::at(Block block) const {
    for (const auto& b : blocks_) {
        if (b.block == block) return b;
    }
    throw Error(ErrorCode::InvalidArgument, "layout has no block " + to_string(block));
}

AffineMatrix::AffineMatrix(Index rows, Index cols, Index nvars)
    : rows_(rows), cols_(cols), lin_(Matrix::Zero(rows * cols, nvars)), cst_(Vector::Zero(rows * cols)) {}

AffineMatrix AffineMatrix::constant(const Matrix& value, Index nvars) {
    AffineMatrix out(value.rows(), value.cols(), nvars);
    out.cst_ = value.reshaped();
    return out;
}

AffineMatrix AffineMatrix::left(const Matrix& p) const {
    require(p.cols() == rows_, ErrorCode::DimensionMismatch, "affine left product shape mismatch");
    AffineMatrix out(p.rows(), cols_, lin_.cols());
    const Index r = p.rows();
    for (Index j = 0; j < cols_; ++j) {
        out.lin_.middleRows(r * j, r).noalias() = p * lin_.middleRows(rows_ * j, rows_);
        out.cst_.segment(r * j, r).noalias() = p * cst_.segment(rows_ * j, rows_);
    }
    return out;
}

AffineMatrix AffineMatrix::right(const Matrix& p) const {
    require(p.rows() == cols_, ErrorCode::DimensionMismatch, "affine right product shape mismatch");
    AffineMatrix out(rows_, p.cols(), lin_.cols());
    for (Index jn = 0; jn < p.cols(); ++jn) {
        for (Index l = 0; l < cols_; ++l) {
            const double w = p(l, jn);
            if (w == 0.0) continue;
            out.lin_.middleRows(rows_ * jn, rows_) += w * lin_.middleRows(rows_ * l, rows_);
            out.cst_.segment(rows_ * jn, rows_) += w * cst_.segment(rows_ * l, rows_);
        }
    }
    return out;
}

Matrix AffineMatrix::value(const Vector& x) const {
    require(x.size() == lin_.cols(), ErrorCode::DimensionMismatch, "affine evaluation length mismatch");
    const Vector v = lin_ * x + cst_;
    return v.reshaped(rows_, cols_);
}

bool AffineMatrix::is_zero() const { return lin_.isZero(0.0) && cst_.isZero(0.0); }

AffineMatrix& AffineMatrix::operator+=(const AffineMatrix& other) {
    require(other.rows_ == rows_ && other.cols_ == cols_, ErrorCode::DimensionMismatch, "affine sum shape mismatch");
    lin_ += other.lin_;
    cst_ += other.cst_;
    return *this;
}

AffineMatrix& AffineMatrix::operator-=(const AffineMatrix& other) {
    require(other.rows_ == rows_ && other.cols_ == cols_, ErrorCode::DimensionMismatch, "affine sum shape mismatch");
    lin_ -= other.lin_;
    cst_ -= other.cst_;
    return *this;
}

AffineMatrix& AffineMatrix::operator+=(const Matrix& value) {
    require(value.rows() == rows_ && value.cols() == cols_, ErrorCode::DimensionMismatch, "affine shift mismatch");
    cst_ += value.reshaped();
    return *this;
}

AffineMatrix& AffineMatrix::operator-=(const Matrix& value) {
    require(value.rows() == rows_ && value.cols() == cols_, ErrorCode::DimensionMismatch, "affine shift mismatch");
    cst_ -= value.reshaped();
    return *this;
}

AffineMatrix operator+(AffineMatrix lhs, const AffineMatrix& rhs) { return lhs += rhs; }
AffineMatrix operator-(AffineMatrix lhs, const AffineMatrix& rhs) { return lhs -= rhs; }

AffineMatrix coefficient(const VariableLayout& layout, Block block, int lag) {
    const BlockLayout& b = layout.at(block);
    AffineMatrix out(b.rows, b.cols, layout.size());
    if (lag < 0 || lag > b.horizon) return out;
    if (lag < b.first_lag()) {
        if (b.direct == DirectTerm::identity) out += Matrix::Identity(b.rows, b.cols);
        return out;
    }
    for (Index j = 0; j < b.cols; ++j) {
        for (Index i = 0; i < b.rows; ++i) out.lin()(i + b.rows * j, b.index(lag, i, j)) = 1.0;
    }
    return out;
}

namespace {

VariableLayout layout_for(Kind kind, Index n, Index m, Index p, int horizon) {
    VariableLayout layout;
    const auto add = [&](Block b, Index r, Index c, DirectTerm d) { layout.add(b, r, c, horizon, d); };
    switch (kind) {
        case Kind::slp:
            add(Block::xx, n, n, DirectTerm::zero);
            add(Block::xy, n, p, DirectTerm::zero);
            add(Block::ux, m, n, DirectTerm::zero);
            add(Block::uy, m, p, DirectTerm::free);
            break;
        case Kind::iop:
            add(Block::yy, p, p, DirectTerm::identity);
            add(Block::yu, p, m, DirectTerm::zero);
            add(Block::uy, m, p, DirectTerm::free);
            add(Block::uu, m, m, DirectTerm::identity);
            break;
        case Kind::mixed_i:
            add(Block::yx, p, n, DirectTerm::zero);
            add(Block::yy, p, p, DirectTerm::identity);
            add(Block::ux, m, n, DirectTerm::zero);
            add(Block::uy, m, p, DirectTerm::free);
            break;
        case Kind::mixed_ii:
            add(Block::xy, n, p, DirectTerm::zero);
            add(Block::xu, n, m, DirectTerm::zero);
            add(Block::uy, m, p, DirectTerm::free);
            add(Block::uu, m, m, DirectTerm::identity);
            break;
        case Kind::stable_plant:
            add(Block::yy, p, p, DirectTerm::identity);
            add(Block::uy, m, p, DirectTerm::free);
            break;
        case Kind::state_feedback:
            add(Block::xx, n, n, DirectTerm::zero);
            add(Block::ux, m, n, DirectTerm::zero);
            break;
    }
    return layout;
}

Matrix observability(const Matrix& a, const Matrix& c) {
    const Index n = a.rows();
    Matrix out(c.rows() * n, n);
    Matrix row = c;
    for (Index k = 0; k < n; ++k) {
        out.middleRows(k * c.rows(), c.rows()) = row;
        row = (row * a).eval();
    }
    return out;
}

Matrix controllability(const Matrix& a, const Matrix& b) {
    return observability(a.transpose(), b.transpose()).transpose();
}

class ProgramBuilder {
public:
    ProgramBuilder(const StateSpace& plant, const VariableLayout& layout, int horizon)
        : a_(plant.a()), b_(plant.b()), c_(plant.c()), layout_(layout), horizon_(horizon) {}

    AffineMatrix coeff(Block block, int lag) const { return coefficient(layout_, block, lag); }

    void equal_zero(const std::string& label, const AffineMatrix& expr) {
        if (expr.is_zero()) return;
        rows_.emplace_back(label, expr);
    }

    // (zI - A) X - B Y = D.
    void left_poly(const std::string& label, Block x, Block y, const Matrix& d) {
        for (int j = 0; j <= horizon_; ++j) {
            AffineMatrix expr = coeff(x, j + 1) - coeff(x, j).left(a_) - coeff(y, j).left(b_);
            if (j == 0) expr -= d;
            equal_zero(label, expr);
        }
    }

    // X (zI - A) - Y C = D.
    void right_poly(const std::string& label, Block x, Block y, const Matrix& d) {
        for (int j = 0; j <= horizon_; ++j) {
            AffineMatrix expr = coeff(x, j + 1) - coeff(x, j).right(a_) - coeff(y, j).right(c_);
            if (j == 0) expr -= d;
            equal_zero(label, expr);
        }
    }

    // Out = C (zI - A)^{-1} (S0 + B In) + D, with the convolution state eliminated.
    void left_g(const std::string& label, Block out, Block in, const std::optional<Matrix>& s0, const Matrix& d) {
        equal_zero(label, coeff(out, 0) - AffineMatrix::constant(d, layout_.size()));
        AffineMatrix state = coeff(in, 0).left(b_);
        if (s0) state += *s0;
        for (int k = 1; k <= horizon_; ++k) {
            equal_zero(label, coeff(out, k) - state.left(c_));
            state = state.left(a_) + coeff(in, k).left(b_);
        }
        equal_zero(label + " (tail)", state.left(observability(a_, c_)));
    }

    // Out = (P0 + In C) (zI - A)^{-1} B + D.
    void right_g(const std::string& label, Block out, Block in, const std::optional<Matrix>& p0, const Matrix& d) {
        equal_zero(label, coeff(out, 0) - AffineMatrix::constant(d, layout_.size()));
        AffineMatrix state = coeff(in, 0).right(c_);
        if (p0) state += *p0;
        for (int k = 1; k <= horizon_; ++k) {
            equal_zero(label, coeff(out, k) - state.right(b_));
            state = state.right(a_) + coeff(in, k).right(c_);
        }
        equal_zero(label + " (tail)", state.right(controllability(a_, b_)));
    }

    void finish(CoefficientProgram& program) const {
        Index total = 0;
        for (const auto& [label, expr] : rows_) total += expr.lin().rows();
        program.e = Matrix::Zero(total, layout_.size());
        program.f = Vector::Zero(total);
        Index row = 0;
        for (const auto& [label, expr] : rows_) {
            const Index r = expr.lin().rows();
            program.e.middleRows(row, r) = expr.lin();
            program.f.segment(row, r) = -expr.cst();
            if (program.groups.empty() || program.groups.back().label != label) {
                program.groups.push_back({label, row, 0});
            }
            program.groups.back().rows += r;
            row += r;
        }
    }

private:
    const Matrix& a_;
    const Matrix& b_;
    const Matrix& c_;
    const VariableLayout& layout_;
    int horizon_;
    std::vector<std::pair<std::string, AffineMatrix>> rows_;
};

}  // namespace

std::vector<Block> blocks_of(Kind kind) {
    switch (kind) {
        case Kind::slp: return {Block::xx, Block::xy, Block::ux, Block::uy};
        case Kind::iop: return {Block::yy, Block::yu, Block::uy, Block::uu};
        case Kind::mixed_i: return {Block::yx, Block::yy, Block::ux, Block::uy};
        case Kind::mixed_ii: return {Block::xy, Block::xu, Block::uy, Block::uu};
        case Kind::stable_plant: return {Block::yy, Block::uy};
        case Kind::state_feedback: return {Block::xx, Block::ux};
    }
    return {};
}

CoefficientProgram build_constraints(Kind kind, const StateSpace& plant, int horizon) {
    require(horizon >= 1, ErrorCode::HorizonTooShort, "FIR horizon must be at least 1");
    require(plant.strictly_proper(), ErrorCode::PlantNotStrictlyProper, "plant must have D = 0");
    const Index n = plant.states();
    const Index m = plant.inputs();
    const Index p = plant.outputs();
    if (kind == Kind::stable_plant) {
        require(is_stable(plant.a()), ErrorCode::PlantUnstable, "stable-plant form needs an open-loop stable plant");
    }
    if (kind == Kind::state_feedback) {
        require(p == n && plant.c().isIdentity(0.0), ErrorCode::NotStateFeedback, "state-feedback form needs C = I");
    }

    CoefficientProgram program{kind, horizon, plant, layout_for(kind, n, m, p, horizon), Matrix(), Vector(), {}};
    ProgramBuilder builder(plant, program.layout, horizon);
    const Matrix in = Matrix::Identity(n, n);
    const Matrix ip = Matrix::Identity(p, p);
    const Matrix im = Matrix::Identity(m, m);
    switch (kind) {
        case Kind::slp:
            builder.left_poly("row: (zI-A)Phi_xx - B Phi_ux = I", Block::xx, Block::ux, in);
            builder.left_poly("row: (zI-A)Phi_xy - B Phi_uy = 0", Block::xy, Block::uy, Matrix::Zero(n, p));
            builder.right_poly("column: Phi_xx(zI-A) - Phi_xy C = I", Block::xx, Block::xy, in);
            builder.right_poly("column: Phi_ux(zI-A) - Phi_uy C = 0", Block::ux, Block::uy, Matrix::Zero(m, n));
            break;
        case Kind::iop:
            builder.left_g("row: Phi_yy - G Phi_uy = I", Block::yy, Block::uy, std::nullopt, ip);
            builder.left_g("row: Phi_yu - G Phi_uu = 0", Block::yu, Block::uu, std::nullopt, Matrix::Zero(p, m));
            builder.right_g("column: Phi_yu - Phi_yy G = 0", Block::yu, Block::yy, std::nullopt, Matrix::Zero(p, m));
            builder.right_g("column: Phi_uu - Phi_uy G = I", Block::uu, Block::uy, std::nullopt, im);
            break;
        case Kind::mixed_i:
            builder.left_g("row: Phi_yx - G Phi_ux = C(zI-A)^-1", Block::yx, Block::ux, in, Matrix::Zero(p, n));
            builder.left_g("row: Phi_yy - G Phi_uy = I", Block::yy, Block::uy, std::nullopt, ip);
            builder.right_poly("column: Phi_yx(zI-A) - Phi_yy C = 0", Block::yx, Block::yy, Matrix::Zero(p, n));
            builder.right_poly("column: Phi_ux(zI-A) - Phi_uy C = 0", Block::ux, Block::uy, Matrix::Zero(m, n));
            break;
        case Kind::mixed_ii:
            builder.left_poly("row: (zI-A)Phi_xy - B Phi_uy = 0", Block::xy, Block::uy, Matrix::Zero(n, p));
            builder.left_poly("row: (zI-A)Phi_xu - B Phi_uu = 0", Block::xu, Block::uu, Matrix::Zero(n, m));
            builder.right_g("column: Phi_xu - Phi_xy G = (zI-A)^-1 B", Block::xu, Block::xy, in, Matrix::Zero(n, m));
            builder.right_g("column: Phi_uu - Phi_uy G = I", Block::uu, Block::uy, std::nullopt, im);
            break;
        case Kind::stable_plant:
            builder.left_g("row: Phi_yy - G Phi_uy = I", Block::yy, Block::uy, std::nullopt, ip);
            break;
        case Kind::state_feedback:
            builder.left_poly("row: (zI-A)Phi_xx - B Phi_ux = I", Block::xx, Block::ux, in);
            break;
    }
    builder.finish(program);
    return program;
}

FeasibilityDiagnosis check_feasibility(const CoefficientProgram& program, double tolerance) {
    FeasibilityDiagnosis diag{false, 0.0, {}, Vector::Zero(program.layout.size())};
    const double scale = std::max(1.0, program.f.norm());
    if (program.e.rows() > 0) diag.solution = program.e.completeOrthogonalDecomposition().solve(program.f);
    const Vector r = program.e * diag.solution - program.f;
    diag.min_residual = r.norm() / scale;
    diag.feasible = diag.min_residual < tolerance;
    for (const auto& g : program.groups) {
        if (r.segment(g.first_row, g.rows).norm() / scale >= tolerance) diag.blocking_constraints.push_back(g.label);
    }
    return diag;
}

BlockSet extract_blocks(const VariableLayout& layout, const Vector& x) {
    require(x.size() == layout.size(), ErrorCode::DimensionMismatch,
            "solution length " + std::to_string(x.size()) + " differs from layout size " +
                std::to_string(layout.size()));
    BlockSet out;
    for (const auto& b : layout.blocks()) {
        std::vector<Matrix> coeffs;
        for (int lag = 0; lag <= b.horizon; ++lag) coeffs.push_back(coefficient(layout, b.block, lag).value(x));
        out.emplace(b.block, FirMatrix(b.rows, b.cols, std::move(coeffs)));
    }
    return out;
}

BlockSet extract_blocks(const CoefficientProgram& program, const Vector& x) {
    return extract_blocks(program.layout, x);
}

Vector vectorize(const VariableLayout& layout, const BlockSet& blocks) {
    Vector x = Vector::Zero(layout.size());
    for (const auto& b : layout.blocks()) {
        const auto it = blocks.find(b.block);
        require(it != blocks.end(), ErrorCode::InvalidArgument, "missing block " + to_string(b.block));
        const FirMatrix& h = it->second;
        require(h.rows() == b.rows && h.cols() == b.cols, ErrorCode::DimensionMismatch,
                "block " + to_string(b.block) + " has the wrong shape");
        for (int lag = b.horizon + 1; lag <= h.horizon(); ++lag) {
            require(h[lag].isZero(0.0), ErrorCode::InvalidArgument,
                    "block " + to_string(b.block) + " exceeds the layout horizon");
        }
        if (b.direct != DirectTerm::free) {
            Matrix expected = Matrix::Zero(b.rows, b.cols);
            if (b.direct == DirectTerm::identity) expected.setIdentity();
            require((h.coeff(0) - expected).cwiseAbs().maxCoeff() <= 1e-12, ErrorCode::InvalidArgument,
                    "block " + to_string(b.block) + " has a direct term that the layout fixes differently");
        }
        for (int lag = b.first_lag(); lag <= b.horizon; ++lag) {
            const Matrix c = h.coeff(lag);
            for (Index j = 0; j < b.cols; ++j) {
                for (Index i = 0; i < b.rows; ++i) x(b.index(lag, i, j)) = c(i, j);
            }
        }
    }
    return x;
}

double program_residual(const CoefficientProgram& program, const BlockSet& blocks) {
    const Vector x = vectorize(program.layout, blocks);
    return (program.e * x - program.f).norm() / std::max(1.0, program.f.norm());
}

namespace {

bool lift_allowed(Kind from, Kind to) {
    if (from == to) return true;
    switch (from) {
        case Kind::slp: return true;
        case Kind::mixed_i:
        case Kind::mixed_ii: return to == Kind::iop || to == Kind::stable_plant;
        case Kind::iop: return to == Kind::stable_plant;
        default: return false;
    }
}

}  // namespace

BlockSet lift_solution(Kind from, Kind to, const BlockSet& blocks, const StateSpace& plant) {
    require(lift_allowed(from, to), ErrorCode::UnsupportedDirection,
            "cannot lift " + to_string(from) + " solutions to " + to_string(to));
    if (to == Kind::state_feedback) {
        require(plant.outputs() == plant.states() && plant.c().isIdentity(0.0), ErrorCode::NotStateFeedback,
                "state-feedback form needs C = I");
    }
    BlockSet full;
    for (Block b : blocks_of(from)) {
        const auto it = blocks.find(b);
        require(it != blocks.end(), ErrorCode::InvalidArgument, "missing block " + to_string(b));
        full.emplace(b, it->second);
    }
    const Matrix& bm = plant.b();
    const Matrix& cm = plant.c();
    const FirMatrix ip = FirMatrix::constant(Matrix::Identity(plant.outputs(), plant.outputs()));
    const FirMatrix im = FirMatrix::constant(Matrix::Identity(plant.inputs(), plant.inputs()));
    auto derive = [&](Block b, auto&& make) {
        if (!full.contains(b)) full.emplace(b, make());
    };
    if (from == Kind::slp) {
        derive(Block::yx, [&] { return cm * full.at(Block::xx); });
        derive(Block::yy, [&] { return cm * full.at(Block::xy) + ip; });
        derive(Block::xu, [&] { return full.at(Block::xx) * bm; });
        derive(Block::uu, [&] { return full.at(Block::ux) * bm + im; });
        derive(Block::yu, [&] { return cm * full.at(Block::xx) * bm; });
    } else if (from == Kind::mixed_i) {
        derive(Block::yu, [&] { return full.at(Block::yx) * bm; });
        derive(Block::uu, [&] { return full.at(Block::ux) * bm + im; });
    } else if (from == Kind::mixed_ii) {
        derive(Block::yy, [&] { return cm * full.at(Block::xy) + ip; });
        derive(Block::yu, [&] { return cm * full.at(Block::xu); });
    }
    BlockSet out;
    for (Block b : blocks_of(to)) out.emplace(b, full.at(b));
    return out;
}

}  // namespace clp
