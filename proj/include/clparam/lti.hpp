#pragma once

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "clparam/error.hpp"

namespace clp {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// A discrete-time system is treated as stable when its spectral radius is below 1 - kStabilityMargin.
inline constexpr double kStabilityMargin = 1e-9;

// Real state-space model x+ = A x + B u, y = C x + D u. Zero states are allowed (static gain).
class StateSpace {
public:
    StateSpace(Matrix a, Matrix b, Matrix c, Matrix d);

    [[nodiscard]] static StateSpace gain(const Matrix& d);
    // (zI - A)^{-1}
    [[nodiscard]] static StateSpace resolvent(const Matrix& a);

    [[nodiscard]] const Matrix& a() const noexcept { return a_; }
    [[nodiscard]] const Matrix& b() const noexcept { return b_; }
    [[nodiscard]] const Matrix& c() const noexcept { return c_; }
    [[nodiscard]] const Matrix& d() const noexcept { return d_; }

    [[nodiscard]] Index states() const noexcept { return a_.rows(); }
    [[nodiscard]] Index inputs() const noexcept { return b_.cols(); }
    [[nodiscard]] Index outputs() const noexcept { return c_.rows(); }
    [[nodiscard]] bool strictly_proper() const { return d_.isZero(0.0); }

private:
    Matrix a_;
    Matrix b_;
    Matrix c_;
    Matrix d_;
};

// FIR transfer matrix H_0 + H_1 z^-1 + ... + H_T z^-T.
class FirMatrix {
public:
    FirMatrix(Index rows, Index cols, std::vector<Matrix> coeffs);

    [[nodiscard]] static FirMatrix zero(Index rows, Index cols, int horizon);
    [[nodiscard]] static FirMatrix constant(const Matrix& direct);

    [[nodiscard]] Index rows() const noexcept { return rows_; }
    [[nodiscard]] Index cols() const noexcept { return cols_; }
    [[nodiscard]] int horizon() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
    [[nodiscard]] const std::vector<Matrix>& coeffs() const noexcept { return coeffs_; }
    // Coefficient at lag k; zero outside 0..horizon.
    [[nodiscard]] Matrix coeff(int k) const;
    [[nodiscard]] const Matrix& operator[](int k) const { return coeffs_.at(static_cast<std::size_t>(k)); }
    [[nodiscard]] bool strictly_proper() const { return coeffs_.front().isZero(0.0); }

private:
    Index rows_;
    Index cols_;
    std::vector<Matrix> coeffs_;
};

[[nodiscard]] FirMatrix operator+(const FirMatrix& lhs, const FirMatrix& rhs);
[[nodiscard]] FirMatrix operator-(const FirMatrix& lhs, const FirMatrix& rhs);
[[nodiscard]] FirMatrix operator-(const FirMatrix& h);
[[nodiscard]] FirMatrix operator*(const Matrix& lhs, const FirMatrix& rhs);
[[nodiscard]] FirMatrix operator*(const FirMatrix& lhs, const Matrix& rhs);

[[nodiscard]] FirMatrix fir_multiply(const FirMatrix& lhs, const FirMatrix& rhs);
// z * H; requires H_0 = 0.
[[nodiscard]] FirMatrix advance(const FirMatrix& h);
// Pads with zero coefficients or drops trailing ones; throws if a dropped coefficient is nonzero.
[[nodiscard]] FirMatrix with_horizon(const FirMatrix& h, int horizon);
// Shift-register realization: states cols*T, A = block down-shift, B = [I; 0], C = [H_1 .. H_T], D = H_0.
[[nodiscard]] StateSpace to_state_space(const FirMatrix& h);

// y = G1 G2 u.
[[nodiscard]] StateSpace ss_cascade(const StateSpace& g1, const StateSpace& g2);
// y = (G1 - G2) u.
[[nodiscard]] StateSpace ss_parallel_sub(const StateSpace& g1, const StateSpace& g2);
[[nodiscard]] StateSpace ss_parallel_add(const StateSpace& g1, const StateSpace& g2);
[[nodiscard]] StateSpace ss_inverse(const StateSpace& g, double max_condition = 1e12);
[[nodiscard]] StateSpace ss_negate(const StateSpace& g);
// L * G and G * R for constant matrices.
[[nodiscard]] StateSpace ss_left(const Matrix& l, const StateSpace& g);
[[nodiscard]] StateSpace ss_right(const StateSpace& g, const Matrix& r);

[[nodiscard]] inline Complex unit_point(double omega) { return std::polar(1.0, omega); }
// `points` frequencies spread uniformly over [0, pi].
[[nodiscard]] std::vector<double> frequency_grid(int points);

[[nodiscard]] CMatrix evaluate(const StateSpace& g, Complex z);
[[nodiscard]] CMatrix evaluate(const FirMatrix& h, Complex z);

// Repeated evaluation of one model; A is reduced to Hessenberg form once.
class FrequencyResponse {
public:
    explicit FrequencyResponse(const StateSpace& g);
    [[nodiscard]] CMatrix at(Complex z) const;
    [[nodiscard]] CMatrix at_frequency(double omega) const { return at(unit_point(omega)); }

private:
    Matrix hess_;
    Matrix b_;
    Matrix c_;
    Matrix d_;
};

struct FrequencySample {
    double omega;
    CMatrix value;
};

[[nodiscard]] std::vector<FrequencySample> sample(const StateSpace& g, const std::vector<double>& omegas);

[[nodiscard]] CVector eigenvalues(const Matrix& a);
[[nodiscard]] double spectral_radius(const Matrix& a);
// Upper bound min_k ||A^k||_F^(1/k) over k = 1, 2, 4, ...; exact zero for nilpotent matrices whose powers
// are computed without rounding.
[[nodiscard]] double spectral_radius_bound(const Matrix& a, int squarings = 12);
[[nodiscard]] bool is_stable(const Matrix& a);

[[nodiscard]] double h2_norm_squared(const FirMatrix& h, bool include_feedthrough);
// Sum_k A^k B B' A'^k for stable A.
[[nodiscard]] Matrix controllability_gramian(const Matrix& a, const Matrix& b);

[[nodiscard]] double sigma_max(const CMatrix& m);

struct HinfNorm {
    double value;
    double omega;
};

inline constexpr int kDefaultGridSize = 2048;

[[nodiscard]] HinfNorm hinf_norm(const StateSpace& g, int grid_size = kDefaultGridSize);
[[nodiscard]] HinfNorm hinf_norm(const FirMatrix& h, int grid_size = kDefaultGridSize);

// Optional per-step disturbance sequences; missing samples count as zero.
struct Disturbances {
    std::vector<Vector> dx;
    std::vector<Vector> dy;
    std::vector<Vector> du;
};

// Samples t = 0..steps of the plant/controller interconnection.
struct Trajectory {
    std::vector<Vector> x;
    std::vector<Vector> y;
    std::vector<Vector> u;
    std::vector<Vector> xi;
};

[[nodiscard]] Trajectory simulate(const StateSpace& plant, const StateSpace& controller, const Vector& x0, int steps,
                                  const Disturbances& disturbances = {}, const std::optional<Vector>& xi0 = std::nullopt);

}  // namespace clp
