#include "clparam/lti.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace clp {

namespace {

void require_finite(const Matrix& m, const char* what) {
    require(m.allFinite(), ErrorCode::NonFinite, std::string(what) + " has non-finite entries");
}

std::string shape(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

StateSpace::StateSpace(Matrix a, Matrix b, Matrix c, Matrix d)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), d_(std::move(d)) {
    require(a_.rows() == a_.cols(), ErrorCode::DimensionMismatch, "A must be square, got " + shape(a_));
    require(b_.rows() == a_.rows(), ErrorCode::DimensionMismatch, "B rows must equal states, got " + shape(b_));
    require(c_.cols() == a_.rows(), ErrorCode::DimensionMismatch, "C cols must equal states, got " + shape(c_));
    require(d_.rows() == c_.rows() && d_.cols() == b_.cols(), ErrorCode::DimensionMismatch,
            "D must be " + std::to_string(c_.rows()) + "x" + std::to_string(b_.cols()) + ", got " + shape(d_));
    require_finite(a_, "A");
    require_finite(b_, "B");
    require_finite(c_, "C");
    require_finite(d_, "D");
}

StateSpace StateSpace::gain(const Matrix& d) {
    return StateSpace(Matrix(0, 0), Matrix(0, d.cols()), Matrix(d.rows(), 0), d);
}

StateSpace StateSpace::resolvent(const Matrix& a) {
    const Index n = a.rows();
    return StateSpace(a, Matrix::Identity(n, n), Matrix::Identity(n, n), Matrix::Zero(n, n));
}

FirMatrix::FirMatrix(Index rows, Index cols, std::vector<Matrix> coeffs)
    : rows_(rows), cols_(cols), coeffs_(std::move(coeffs)) {
    require(rows_ >= 0 && cols_ >= 0, ErrorCode::DimensionMismatch, "negative FIR shape");
    require(!coeffs_.empty(), ErrorCode::InvalidArgument, "FIR needs at least the lag-0 coefficient");
    for (const auto& h : coeffs_) {
        require(h.rows() == rows_ && h.cols() == cols_, ErrorCode::DimensionMismatch,
                "FIR coefficient shape " + shape(h) + " differs from declared " + std::to_string(rows_) + "x" +
                    std::to_string(cols_));
        require_finite(h, "FIR coefficient");
    }
}

FirMatrix FirMatrix::zero(Index rows, Index cols, int horizon) {
    require(horizon >= 0, ErrorCode::InvalidArgument, "negative horizon");
    return FirMatrix(rows, cols, std::vector<Matrix>(static_cast<std::size_t>(horizon) + 1, Matrix::Zero(rows, cols)));
}

FirMatrix FirMatrix::constant(const Matrix& direct) { return FirMatrix(direct.rows(), direct.cols(), {direct}); }

Matrix FirMatrix::coeff(int k) const {
    if (k < 0 || k > horizon()) return Matrix::Zero(rows_, cols_);
    return coeffs_[static_cast<std::size_t>(k)];
}

namespace {

template <typename Op>
FirMatrix combine(const FirMatrix& lhs, const FirMatrix& rhs, Op op) {
    require(lhs.rows() == rhs.rows() && lhs.cols() == rhs.cols(), ErrorCode::DimensionMismatch,
            "FIR shapes differ in elementwise combination");
    const int horizon = std::max(lhs.horizon(), rhs.horizon());
    std::vector<Matrix> out;
    out.reserve(static_cast<std::size_t>(horizon) + 1);
    for (int k = 0; k <= horizon; ++k) out.push_back(op(lhs.coeff(k), rhs.coeff(k)));
    return FirMatrix(lhs.rows(), lhs.cols(), std::move(out));
}

}  // namespace

FirMatrix operator+(const FirMatrix& lhs, const FirMatrix& rhs) {
    return combine(lhs, rhs, [](const Matrix& a, const Matrix& b) -> Matrix { return a + b; });
}

FirMatrix operator-(const FirMatrix& lhs, const FirMatrix& rhs) {
    return combine(lhs, rhs, [](const Matrix& a, const Matrix& b) -> Matrix { return a - b; });
}

FirMatrix operator-(const FirMatrix& h) {
    std::vector<Matrix> out;
    for (const auto& c : h.coeffs()) out.push_back(-c);
    return FirMatrix(h.rows(), h.cols(), std::move(out));
}

FirMatrix operator*(const Matrix& lhs, const FirMatrix& rhs) {
    require(lhs.cols() == rhs.rows(), ErrorCode::DimensionMismatch, "constant * FIR shape mismatch");
    std::vector<Matrix> out;
    for (const auto& c : rhs.coeffs()) out.push_back(lhs * c);
    return FirMatrix(lhs.rows(), rhs.cols(), std::move(out));
}

FirMatrix operator*(const FirMatrix& lhs, const Matrix& rhs) {
    require(lhs.cols() == rhs.rows(), ErrorCode::DimensionMismatch, "FIR * constant shape mismatch");
    std::vector<Matrix> out;
    for (const auto& c : lhs.coeffs()) out.push_back(c * rhs);
    return FirMatrix(lhs.rows(), rhs.cols(), std::move(out));
}

FirMatrix fir_multiply(const FirMatrix& lhs, const FirMatrix& rhs) {
    require(lhs.cols() == rhs.rows(), ErrorCode::DimensionMismatch,
            "fir_multiply: lhs has " + std::to_string(lhs.cols()) + " cols, rhs has " + std::to_string(rhs.rows()) +
                " rows");
    const int horizon = lhs.horizon() + rhs.horizon();
    std::vector<Matrix> out(static_cast<std::size_t>(horizon) + 1, Matrix::Zero(lhs.rows(), rhs.cols()));
    for (int i = 0; i <= lhs.horizon(); ++i) {
        for (int j = 0; j <= rhs.horizon(); ++j) out[static_cast<std::size_t>(i + j)].noalias() += lhs[i] * rhs[j];
    }
    return FirMatrix(lhs.rows(), rhs.cols(), std::move(out));
}

FirMatrix advance(const FirMatrix& h) {
    require(h.strictly_proper(), ErrorCode::InvalidArgument, "advance needs a zero lag-0 coefficient");
    if (h.horizon() == 0) return h;
    std::vector<Matrix> out(h.coeffs().begin() + 1, h.coeffs().end());
    return FirMatrix(h.rows(), h.cols(), std::move(out));
}

FirMatrix with_horizon(const FirMatrix& h, int horizon) {
    require(horizon >= 0, ErrorCode::InvalidArgument, "negative horizon");
    for (int k = horizon + 1; k <= h.horizon(); ++k) {
        require(h[k].isZero(0.0), ErrorCode::InvalidArgument, "truncation would drop nonzero coefficient");
    }
    std::vector<Matrix> out;
    for (int k = 0; k <= horizon; ++k) out.push_back(h.coeff(k));
    return FirMatrix(h.rows(), h.cols(), std::move(out));
}

StateSpace to_state_space(const FirMatrix& h) {
    const int horizon = h.horizon();
    const Index c = h.cols();
    const Index n = c * horizon;
    Matrix a = Matrix::Zero(n, n);
    Matrix b = Matrix::Zero(n, c);
    Matrix cc = Matrix::Zero(h.rows(), n);
    for (int k = 1; k < horizon; ++k) a.block(k * c, (k - 1) * c, c, c).setIdentity();
    if (n > 0) b.topRows(c).setIdentity();
    for (int k = 1; k <= horizon; ++k) cc.middleCols((k - 1) * c, c) = h[k];
    return StateSpace(std::move(a), std::move(b), std::move(cc), h[0]);
}

StateSpace ss_cascade(const StateSpace& g1, const StateSpace& g2) {
    require(g1.inputs() == g2.outputs(), ErrorCode::DimensionMismatch,
            "cascade: g1 inputs " + std::to_string(g1.inputs()) + " vs g2 outputs " + std::to_string(g2.outputs()));
    const Index n1 = g1.states();
    const Index n2 = g2.states();
    Matrix a = Matrix::Zero(n1 + n2, n1 + n2);
    a.topLeftCorner(n1, n1) = g1.a();
    a.topRightCorner(n1, n2) = g1.b() * g2.c();
    a.bottomRightCorner(n2, n2) = g2.a();
    Matrix b(n1 + n2, g2.inputs());
    b.topRows(n1) = g1.b() * g2.d();
    b.bottomRows(n2) = g2.b();
    Matrix c(g1.outputs(), n1 + n2);
    c.leftCols(n1) = g1.c();
    c.rightCols(n2) = g1.d() * g2.c();
    return StateSpace(std::move(a), std::move(b), std::move(c), g1.d() * g2.d());
}

namespace {

StateSpace parallel(const StateSpace& g1, const StateSpace& g2, double sign) {
    require(g1.inputs() == g2.inputs() && g1.outputs() == g2.outputs(), ErrorCode::DimensionMismatch,
            "parallel connection needs equal input/output dimensions");
    const Index n1 = g1.states();
    const Index n2 = g2.states();
    Matrix a = Matrix::Zero(n1 + n2, n1 + n2);
    a.topLeftCorner(n1, n1) = g1.a();
    a.bottomRightCorner(n2, n2) = g2.a();
    Matrix b(n1 + n2, g1.inputs());
    b.topRows(n1) = g1.b();
    b.bottomRows(n2) = g2.b();
    Matrix c(g1.outputs(), n1 + n2);
    c.leftCols(n1) = g1.c();
    c.rightCols(n2) = sign * g2.c();
    return StateSpace(std::move(a), std::move(b), std::move(c), g1.d() + sign * g2.d());
}

}  // namespace

StateSpace ss_parallel_sub(const StateSpace& g1, const StateSpace& g2) { return parallel(g1, g2, -1.0); }

StateSpace ss_parallel_add(const StateSpace& g1, const StateSpace& g2) { return parallel(g1, g2, 1.0); }

StateSpace ss_inverse(const StateSpace& g, double max_condition) {
    const Matrix& d = g.d();
    require(d.rows() == d.cols(), ErrorCode::NonInvertibleFeedthrough, "feedthrough is not square");
    if (d.size() > 0) {
        const Eigen::JacobiSVD<Matrix> svd(d);
        const auto& s = svd.singularValues();
        require(s(0) > 0.0 && s(s.size() - 1) * max_condition > s(0), ErrorCode::NonInvertibleFeedthrough,
                "feedthrough is singular or ill-conditioned");
    }
    const Matrix d_inv = d.fullPivLu().inverse();
    return StateSpace(g.a() - g.b() * d_inv * g.c(), -g.b() * d_inv, d_inv * g.c(), d_inv);
}

StateSpace ss_negate(const StateSpace& g) { return StateSpace(g.a(), g.b(), -g.c(), -g.d()); }

StateSpace ss_left(const Matrix& l, const StateSpace& g) {
    require(l.cols() == g.outputs(), ErrorCode::DimensionMismatch, "left factor shape mismatch");
    return StateSpace(g.a(), g.b(), l * g.c(), l * g.d());
}

StateSpace ss_right(const StateSpace& g, const Matrix& r) {
    require(r.rows() == g.inputs(), ErrorCode::DimensionMismatch, "right factor shape mismatch");
    return StateSpace(g.a(), g.b() * r, g.c(), g.d() * r);
}

std::vector<double> frequency_grid(int points) {
    require(points >= 2, ErrorCode::InvalidArgument, "frequency grid needs at least two points");
    std::vector<double> grid(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = std::numbers::pi * i / (points - 1);
    return grid;
}

CMatrix evaluate(const StateSpace& g, Complex z) { return FrequencyResponse(g).at(z); }

CMatrix evaluate(const FirMatrix& h, Complex z) {
    // Horner in w = 1/z.
    const Complex w = 1.0 / z;
    CMatrix acc = h[h.horizon()].cast<Complex>();
    for (int k = h.horizon() - 1; k >= 0; --k) acc = (acc * w).eval() + h[k].cast<Complex>();
    return acc;
}

FrequencyResponse::FrequencyResponse(const StateSpace& g) : d_(g.d()) {
    const Index n = g.states();
    if (n == 0) {
        hess_ = Matrix(0, 0);
        b_ = Matrix(0, g.inputs());
        c_ = Matrix(g.outputs(), 0);
        return;
    }
    const Eigen::HessenbergDecomposition<Matrix> hd(g.a());
    const Matrix q = hd.matrixQ();
    hess_ = hd.matrixH();
    b_ = q.transpose() * g.b();
    c_ = g.c() * q;
}

CMatrix FrequencyResponse::at(Complex z) const {
    const Index n = hess_.rows();
    CMatrix out = d_.cast<Complex>();
    if (n == 0) return out;
    CMatrix m = -hess_.cast<Complex>();
    m.diagonal().array() += z;
    CMatrix x = b_.cast<Complex>();
    // LU with partial pivoting restricted to the single subdiagonal.
    for (Index k = 0; k + 1 < n; ++k) {
        if (std::abs(m(k + 1, k)) > std::abs(m(k, k))) {
            m.row(k).tail(n - k).swap(m.row(k + 1).tail(n - k));
            x.row(k).swap(x.row(k + 1));
        }
        const Complex pivot = m(k, k);
        require(pivot != Complex(0.0), ErrorCode::UnstableSystem, "evaluation point is a pole");
        const Complex l = m(k + 1, k) / pivot;
        if (l != Complex(0.0)) {
            m.row(k + 1).tail(n - k - 1) -= l * m.row(k).tail(n - k - 1);
            x.row(k + 1) -= l * x.row(k);
        }
        m(k + 1, k) = 0.0;
    }
    require(m(n - 1, n - 1) != Complex(0.0), ErrorCode::UnstableSystem, "evaluation point is a pole");
    m.triangularView<Eigen::Upper>().solveInPlace(x);
    out.noalias() += c_.cast<Complex>() * x;
    return out;
}

std::vector<FrequencySample> sample(const StateSpace& g, const std::vector<double>& omegas) {
    const FrequencyResponse response(g);
    std::vector<FrequencySample> out;
    out.reserve(omegas.size());
    for (double w : omegas) {
        require(std::isfinite(w), ErrorCode::NonFinite, "non-finite frequency");
        out.push_back({w, response.at_frequency(w)});
    }
    return out;
}

CVector eigenvalues(const Matrix& a) {
    require(a.rows() == a.cols(), ErrorCode::DimensionMismatch, "eigenvalues need a square matrix");
    require_finite(a, "matrix");
    if (a.rows() == 0) return CVector(0);
    const Eigen::EigenSolver<Matrix> solver(a, false);
    require(solver.info() == Eigen::Success, ErrorCode::NonFinite, "eigenvalue iteration failed to converge");
    return solver.eigenvalues();
}

double spectral_radius(const Matrix& a) {
    const CVector ev = eigenvalues(a);
    return ev.size() == 0 ? 0.0 : ev.cwiseAbs().maxCoeff();
}

double spectral_radius_bound(const Matrix& a, int squarings) {
    require(a.rows() == a.cols(), ErrorCode::DimensionMismatch, "square matrix required");
    require_finite(a, "matrix");
    if (a.rows() == 0) return 0.0;
    // power = A^k / exp(log_scale); rescaled only when the magnitude drifts far from 1.
    Matrix power = a;
    double log_scale = 0.0;
    double k = 1.0;
    double best = a.norm();
    for (int i = 0; i <= squarings; ++i) {
        const double nrm = power.norm();
        if (nrm == 0.0) return 0.0;
        best = std::min(best, std::exp((std::log(nrm) + log_scale) / k));
        if (nrm > 1e100 || nrm < 1e-100) {
            power /= nrm;
            log_scale += std::log(nrm);
        }
        power = (power * power).eval();
        log_scale *= 2.0;
        k *= 2.0;
    }
    return best;
}

bool is_stable(const Matrix& a) { return spectral_radius(a) < 1.0 - kStabilityMargin; }

double h2_norm_squared(const FirMatrix& h, bool include_feedthrough) {
    double total = 0.0;
    for (int k = include_feedthrough ? 0 : 1; k <= h.horizon(); ++k) total += h[k].squaredNorm();
    return total;
}

Matrix controllability_gramian(const Matrix& a, const Matrix& b) {
    require(a.rows() == b.rows(), ErrorCode::DimensionMismatch, "gramian: A and B row mismatch");
    require(a.rows() == 0 || is_stable(a), ErrorCode::UnstableSystem, "gramian needs a stable A");
    // Smith doubling: W <- W + A^(2^j) W A^(2^j)'.
    Matrix w = b * b.transpose();
    Matrix power = a;
    for (int i = 0; i < 64; ++i) {
        const Matrix step = power * w * power.transpose();
        w += step;
        power = (power * power).eval();
        if (step.norm() <= 1e-18 * w.norm() || power.norm() == 0.0) break;
    }
    return w;
}

double sigma_max(const CMatrix& m) {
    if (m.size() == 0) return 0.0;
    const Eigen::JacobiSVD<CMatrix> svd(m);
    return svd.singularValues()(0);
}

namespace {

template <typename Eval>
HinfNorm grid_refine(Eval&& gain, int grid_size) {
    const std::vector<double> grid = frequency_grid(grid_size);
    std::vector<double> values(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) values[i] = gain(grid[i]);
    const auto best = static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
    HinfNorm result{values[best], grid[best]};
    // Golden-section search on the bracketing cells.
    double lo = grid[best == 0 ? 0 : best - 1];
    double hi = grid[std::min(best + 1, grid.size() - 1)];
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - ratio * (hi - lo);
    double x2 = lo + ratio * (hi - lo);
    double f1 = gain(x1);
    double f2 = gain(x2);
    for (int it = 0; it < 80 && hi - lo > 1e-13; ++it) {
        if (f1 >= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = gain(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = gain(x2);
        }
    }
    if (f1 > result.value) result = {f1, x1};
    if (f2 > result.value) result = {f2, x2};
    return result;
}

}  // namespace

HinfNorm hinf_norm(const StateSpace& g, int grid_size) {
    require(g.states() == 0 || is_stable(g.a()), ErrorCode::UnstableSystem,
            "H-infinity norm undefined: spectral radius " + std::to_string(spectral_radius(g.a())));
    const FrequencyResponse response(g);
    return grid_refine([&](double w) { return sigma_max(response.at_frequency(w)); }, grid_size);
}

HinfNorm hinf_norm(const FirMatrix& h, int grid_size) {
    return grid_refine([&](double w) { return sigma_max(evaluate(h, unit_point(w))); }, grid_size);
}

Trajectory simulate(const StateSpace& plant, const StateSpace& controller, const Vector& x0, int steps,
                    const Disturbances& disturbances, const std::optional<Vector>& xi0) {
    require(steps >= 0, ErrorCode::InvalidArgument, "negative step count");
    require(x0.size() == plant.states(), ErrorCode::DimensionMismatch, "x0 length differs from plant states");
    require(controller.inputs() == plant.outputs() && controller.outputs() == plant.inputs(),
            ErrorCode::DimensionMismatch, "controller dimensions do not match plant");
    require(plant.strictly_proper(), ErrorCode::PlantNotStrictlyProper, "simulation needs a strictly proper plant");
    const Vector xi_init = xi0.value_or(Vector::Zero(controller.states()));
    require(xi_init.size() == controller.states(), ErrorCode::DimensionMismatch, "xi0 length mismatch");

    auto pick = [](const std::vector<Vector>& seq, int t, Index size) -> Vector {
        const auto idx = static_cast<std::size_t>(t);
        if (idx >= seq.size()) return Vector::Zero(size);
        require(seq[idx].size() == size, ErrorCode::DimensionMismatch, "disturbance sample has wrong length");
        return seq[idx];
    };

    Trajectory traj;
    Vector x = x0;
    Vector xi = xi_init;
    for (int t = 0; t <= steps; ++t) {
        const Vector y = plant.c() * x + pick(disturbances.dy, t, plant.outputs());
        const Vector u = controller.c() * xi + controller.d() * y + pick(disturbances.du, t, plant.inputs());
        traj.x.push_back(x);
        traj.y.push_back(y);
        traj.u.push_back(u);
        traj.xi.push_back(xi);
        x = (plant.a() * x + plant.b() * u + pick(disturbances.dx, t, plant.states())).eval();
        xi = (controller.a() * xi + controller.b() * y).eval();
    }
    return traj;
}

}  // namespace clp
