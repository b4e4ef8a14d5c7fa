#include "clparam/synth.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

namespace clp {

Matrix psd_sqrt(const Matrix& m) {
    require(m.rows() == m.cols(), ErrorCode::DimensionMismatch, "weight must be square");
    require(m.allFinite(), ErrorCode::NonFinite, "weight has non-finite entries");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    require((m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale, ErrorCode::InvalidArgument,
            "weight must be symmetric");
    if (m.size() == 0) return m;
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
    Vector ev = eig.eigenvalues();
    require(ev.minCoeff() >= -1e-12 * scale, ErrorCode::InvalidArgument, "weight must be positive semidefinite");
    ev = ev.cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * ev.asDiagonal() * eig.eigenvectors().transpose();
}

namespace {

// Terms whose squared Frobenius norms add up to the cost.
class CostBuilder {
public:
    explicit CostBuilder(Index nvars) : nvars_(nvars) {}

    void add(const AffineMatrix& term) {
        if (!term.is_zero()) terms_.push_back(term);
    }

    LeastSquaresCost finish() const {
        Index rows = 0;
        for (const auto& t : terms_) rows += t.lin().rows();
        LeastSquaresCost cost{Matrix::Zero(rows, nvars_), Vector::Zero(rows)};
        Index at = 0;
        for (const auto& t : terms_) {
            cost.j.middleRows(at, t.lin().rows()) = t.lin();
            cost.c.segment(at, t.lin().rows()) = t.cst();
            at += t.lin().rows();
        }
        return cost;
    }

private:
    Index nvars_;
    std::vector<AffineMatrix> terms_;
};

}  // namespace

LeastSquaresCost assemble_cost(const H2Problem& problem, const CoefficientProgram& program) {
    require(problem.kind == program.kind, ErrorCode::InvalidArgument, "program was built for a different kind");
    const StateSpace& g = problem.plant;
    const Index n = g.states();
    const Index m = g.inputs();
    const Index p = g.outputs();
    const Index out_dim = problem.kind == Kind::state_feedback ? n : p;
    require(problem.q.rows() == out_dim, ErrorCode::DimensionMismatch,
            "Q must be " + std::to_string(out_dim) + "x" + std::to_string(out_dim));
    require(problem.r.rows() == m, ErrorCode::DimensionMismatch, "R must be " + std::to_string(m) + "x" + std::to_string(m));
    const Matrix qh = psd_sqrt(problem.q);
    const Matrix rh = psd_sqrt(problem.r);
    require(Eigen::SelfAdjointEigenSolver<Matrix>(problem.r).eigenvalues().minCoeff() > 0.0, ErrorCode::InvalidArgument,
            "R must be positive definite");

    const VariableLayout& layout = program.layout;
    const Index nv = layout.size();
    const int horizon = program.horizon;
    const Matrix& a = g.a();
    const Matrix& b = g.b();
    const Matrix& c = g.c();
    auto coeff = [&](Block block, int lag) { return coefficient(layout, block, lag); };
    auto delta = [&](Index dim, int lag) {
        return AffineMatrix::constant(lag == 0 ? Matrix(Matrix::Identity(dim, dim)) : Matrix(Matrix::Zero(dim, dim)), nv);
    };

    CostBuilder cost(nv);
    if (problem.kind == Kind::stable_plant) {
        // Phi_yu = Phi_yy G and Phi_uu = I + Phi_uy G carry infinite tails; their energy is folded in
        // through a square root of the controllability Gramian.
        const Matrix tail_root = psd_sqrt(controllability_gramian(a, b));
        AffineMatrix pyy = coeff(Block::yy, 0).right(c);
        AffineMatrix puy = coeff(Block::uy, 0).right(c);
        cost.add(coeff(Block::yy, 0).left(qh));
        cost.add(coeff(Block::uy, 0).left(rh));
        cost.add(AffineMatrix::constant(rh, nv));
        for (int k = 1; k <= horizon; ++k) {
            cost.add(coeff(Block::yy, k).left(qh));
            cost.add(coeff(Block::uy, k).left(rh));
            cost.add(pyy.right(b).left(qh));
            cost.add(puy.right(b).left(rh));
            pyy = pyy.right(a) + coeff(Block::yy, k).right(c);
            puy = puy.right(a) + coeff(Block::uy, k).right(c);
        }
        cost.add(pyy.right(tail_root).left(qh));
        cost.add(puy.right(tail_root).left(rh));
        return cost.finish();
    }

    for (int k = 0; k <= horizon; ++k) {
        switch (problem.kind) {
            case Kind::slp:
                cost.add((coeff(Block::xy, k).left(c) + delta(p, k)).left(qh));
                cost.add(coeff(Block::xx, k).left(c).right(b).left(qh));
                cost.add(coeff(Block::uy, k).left(rh));
                cost.add((coeff(Block::ux, k).right(b) + delta(m, k)).left(rh));
                break;
            case Kind::iop:
                cost.add(coeff(Block::yy, k).left(qh));
                cost.add(coeff(Block::yu, k).left(qh));
                cost.add(coeff(Block::uy, k).left(rh));
                cost.add(coeff(Block::uu, k).left(rh));
                break;
            case Kind::mixed_i:
                cost.add(coeff(Block::yy, k).left(qh));
                cost.add(coeff(Block::yx, k).right(b).left(qh));
                cost.add(coeff(Block::uy, k).left(rh));
                cost.add((coeff(Block::ux, k).right(b) + delta(m, k)).left(rh));
                break;
            case Kind::mixed_ii:
                cost.add((coeff(Block::xy, k).left(c) + delta(p, k)).left(qh));
                cost.add(coeff(Block::xu, k).left(c).left(qh));
                cost.add(coeff(Block::uy, k).left(rh));
                cost.add(coeff(Block::uu, k).left(rh));
                break;
            case Kind::state_feedback:
                cost.add(coeff(Block::xx, k).left(qh));
                cost.add(coeff(Block::ux, k).left(rh));
                break;
            case Kind::stable_plant: break;
        }
    }
    return cost.finish();
}

QpSolution solve_equality_qp(const LeastSquaresCost& cost, const Matrix& e, const Vector& f, double feasibility_tol) {
    const Index nv = cost.j.cols();
    require(e.cols() == nv && e.rows() == f.size(), ErrorCode::DimensionMismatch, "constraint shape mismatch");
    require(cost.c.size() == cost.j.rows(), ErrorCode::DimensionMismatch, "cost shape mismatch");
    const double f_scale = std::max(1.0, f.norm());

    QpSolution sol;
    Matrix q1;
    Matrix r11;
    Matrix z;
    Vector xp = Vector::Zero(nv);
    Index rank = 0;
    if (e.rows() > 0) {
        // E' P = Q R; leading pivoted columns are the independent constraint rows.
        Eigen::ColPivHouseholderQR<Matrix> qr(e.transpose());
        qr.setThreshold(1e-10);
        rank = qr.rank();
        const Matrix q = qr.householderQ();
        q1 = q.leftCols(rank);
        z = q.rightCols(nv - rank);
        r11 = qr.matrixR().topLeftCorner(rank, rank).triangularView<Eigen::Upper>();
        Vector f_sel(rank);
        for (Index i = 0; i < rank; ++i) f_sel(i) = f(qr.colsPermutation().indices()(i));
        const Vector y = r11.transpose().triangularView<Eigen::Lower>().solve(f_sel);
        xp = q1 * y;
        const double residual = (e * xp - f).norm() / f_scale;
        require(residual < feasibility_tol, ErrorCode::Infeasible,
                "infeasible: equality constraints are inconsistent (relative residual " + std::to_string(residual) + ")");
    } else {
        z = Matrix::Identity(nv, nv);
    }

    Vector x = xp;
    sol.rank_deficient_hessian = false;
    if (z.cols() > 0) {
        const Matrix jz = cost.j * z;
        const Vector rhs = -(cost.j * xp + cost.c);
        Eigen::CompleteOrthogonalDecomposition<Matrix> cod(jz);
        cod.setThreshold(1e-12);
        sol.rank_deficient_hessian = cod.rank() < jz.cols();
        x += z * cod.solve(rhs);
    }

    const Vector grad = cost.gradient(x);
    sol.multipliers = Vector::Zero(rank);
    Vector lagrangian = grad;
    if (rank > 0) {
        sol.multipliers = r11.triangularView<Eigen::Upper>().solve(q1.transpose() * (-grad));
        lagrangian += q1 * (r11 * sol.multipliers);
    }
    sol.x = std::move(x);
    sol.cost = cost.value(sol.x);
    sol.kkt_residual = lagrangian.norm() / (1.0 + grad.norm());
    sol.constraint_residual = e.rows() > 0 ? (e * sol.x - f).norm() / f_scale : 0.0;
    sol.retained_rows = rank;
    return sol;
}

SynthesisResult synthesize(const H2Problem& problem, const SynthesisOptions& options) {
    const CoefficientProgram program = build_constraints(problem.kind, problem.plant, problem.horizon);
    const LeastSquaresCost cost = assemble_cost(problem, program);
    const QpSolution sol = solve_equality_qp(cost, program.e, program.f, options.feasibility_tol);
    require(sol.constraint_residual < options.feasibility_tol, ErrorCode::Infeasible,
            "infeasible: solution violates the constraints (relative residual " + std::to_string(sol.constraint_residual) + ")");
    return SynthesisResult{problem.kind,
                           problem.horizon,
                           extract_blocks(program, sol.x),
                           sol.cost,
                           std::sqrt(sol.cost),
                           sol.kkt_residual,
                           sol.constraint_residual,
                           sol.rank_deficient_hessian};
}

}  // namespace clp
