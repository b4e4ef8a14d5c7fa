#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "clparam/lti.hpp"

namespace clp {

enum class Kind { slp, iop, mixed_i, mixed_ii, stable_plant, state_feedback };

[[nodiscard]] std::string to_string(Kind kind);
[[nodiscard]] Kind parse_kind(const std::string& name);

// The nine closed-loop maps, named signal-then-disturbance (yu: du -> y).
enum class Block { xx, xy, xu, yx, yy, yu, ux, uy, uu };

[[nodiscard]] std::string to_string(Block block);

using BlockSet = std::map<Block, FirMatrix>;

// Lag-0 coefficient handling; fixed terms are layout constants, not unknowns.
enum class DirectTerm { free, zero, identity };

struct BlockLayout {
    Block block;
    Index rows;
    Index cols;
    int horizon;
    DirectTerm direct;
    Index offset;

    [[nodiscard]] int first_lag() const noexcept { return direct == DirectTerm::free ? 0 : 1; }
    [[nodiscard]] Index size() const noexcept { return rows * cols * (horizon + 1 - first_lag()); }
    // Stacked index of entry (i, j) of coefficient `lag`; column-major within a coefficient.
    [[nodiscard]] Index index(int lag, Index i, Index j) const;
};

class VariableLayout {
public:
    VariableLayout() = default;
    void add(Block block, Index rows, Index cols, int horizon, DirectTerm direct);

    [[nodiscard]] const std::vector<BlockLayout>& blocks() const noexcept { return blocks_; }
    [[nodiscard]] Index size() const noexcept { return size_; }
    [[nodiscard]] bool has(Block block) const;
    [[nodiscard]] const BlockLayout& at(Block block) const;

private:
    std::vector<BlockLayout> blocks_;
    Index size_ = 0;
};

// Matrix-valued affine function of the stacked unknowns: vec(M) = lin * x + cst (column-major vec).
class AffineMatrix {
public:
    AffineMatrix(Index rows, Index cols, Index nvars);
    [[nodiscard]] static AffineMatrix constant(const Matrix& value, Index nvars);

    [[nodiscard]] Index rows() const noexcept { return rows_; }
    [[nodiscard]] Index cols() const noexcept { return cols_; }
    [[nodiscard]] const Matrix& lin() const noexcept { return lin_; }
    [[nodiscard]] const Vector& cst() const noexcept { return cst_; }
    [[nodiscard]] Matrix& lin() noexcept { return lin_; }
    [[nodiscard]] Vector& cst() noexcept { return cst_; }

    // P * M and M * P.
    [[nodiscard]] AffineMatrix left(const Matrix& p) const;
    [[nodiscard]] AffineMatrix right(const Matrix& p) const;
    [[nodiscard]] Matrix value(const Vector& x) const;
    [[nodiscard]] bool is_zero() const;

    AffineMatrix& operator+=(const AffineMatrix& other);
    AffineMatrix& operator-=(const AffineMatrix& other);
    AffineMatrix& operator+=(const Matrix& value);
    AffineMatrix& operator-=(const Matrix& value);

private:
    Index rows_;
    Index cols_;
    Matrix lin_;
    Vector cst_;
};

[[nodiscard]] AffineMatrix operator+(AffineMatrix lhs, const AffineMatrix& rhs);
[[nodiscard]] AffineMatrix operator-(AffineMatrix lhs, const AffineMatrix& rhs);

// Coefficient `lag` of a block as an affine expression (fixed direct terms and lags past the horizon are constant).
[[nodiscard]] AffineMatrix coefficient(const VariableLayout& layout, Block block, int lag);

struct ConstraintGroup {
    std::string label;
    Index first_row;
    Index rows;
};

// Stacked equality constraints E x = f over FIR coefficients.
struct CoefficientProgram {
    Kind kind;
    int horizon;
    StateSpace plant;
    VariableLayout layout;
    Matrix e;
    Vector f;
    std::vector<ConstraintGroup> groups;
};

[[nodiscard]] CoefficientProgram build_constraints(Kind kind, const StateSpace& plant, int horizon);

struct FeasibilityDiagnosis {
    bool feasible;
    double min_residual;  // ||E x - f|| / max(1, ||f||) at the least-squares point
    std::vector<std::string> blocking_constraints;
    Vector solution;
};

inline constexpr double kDefaultFeasibilityTol = 1e-8;

[[nodiscard]] FeasibilityDiagnosis check_feasibility(const CoefficientProgram& program,
                                                     double tolerance = kDefaultFeasibilityTol);

[[nodiscard]] BlockSet extract_blocks(const CoefficientProgram& program, const Vector& x);
[[nodiscard]] BlockSet extract_blocks(const VariableLayout& layout, const Vector& x);
// Inverse of extract_blocks; throws if a fixed direct term disagrees with the layout.
[[nodiscard]] Vector vectorize(const VariableLayout& layout, const BlockSet& blocks);

// Relative residual ||E x - f|| / max(1, ||f||) of a block set.
[[nodiscard]] double program_residual(const CoefficientProgram& program, const BlockSet& blocks);

// Maps a solution along the inclusion chain (SLP -> Mixed I/II -> IOP) or to the simplified forms.
[[nodiscard]] BlockSet lift_solution(Kind from, Kind to, const BlockSet& blocks, const StateSpace& plant);

// Blocks each kind solves for, in declaration order.
[[nodiscard]] std::vector<Block> blocks_of(Kind kind);

}  // namespace clp
