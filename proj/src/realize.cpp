#include "clparam/realize.hpp"

#include <algorithm>

#include "clparam/closedloop.hpp"

namespace clp {

std::string to_string(ControllerForm form) {
    switch (form) {
        case ControllerForm::iop: return "iop";
        case ControllerForm::mixed_i: return "mixed-i";
        case ControllerForm::mixed_ii: return "mixed-ii";
        case ControllerForm::four_block: return "four-block";
        case ControllerForm::state_feedback: return "state-feedback";
        case ControllerForm::alternative: return "alternative";
    }
    return "?";
}

ControllerForm parse_form(const std::string& name) {
    for (const ControllerForm f : {ControllerForm::iop, ControllerForm::mixed_i, ControllerForm::mixed_ii,
                                   ControllerForm::four_block, ControllerForm::state_feedback, ControllerForm::alternative})
        if (to_string(f) == name) return f;
    throw Error(ErrorCode::InvalidArgument, "unknown controller form '" + name + "'");
}

ControllerForm default_form(Kind kind) {
    switch (kind) {
        case Kind::slp: return ControllerForm::four_block;
        case Kind::iop: return ControllerForm::iop;
        case Kind::mixed_i: return ControllerForm::mixed_i;
        case Kind::mixed_ii: return ControllerForm::mixed_ii;
        case Kind::stable_plant: return ControllerForm::iop;
        case Kind::state_feedback: return ControllerForm::state_feedback;
    }
    return ControllerForm::iop;
}

namespace {

// Block down-shift with identity blocks of size `block` on the subdiagonal.
Matrix shift(Index block, int count) {
    Matrix z = Matrix::Zero(block * count, block * count);
    for (int k = 1; k < count; ++k) z.block(k * block, (k - 1) * block, block, block).setIdentity();
    return z;
}

// [I; 0; ...; 0] with `count` blocks.
Matrix injector(Index block, int count) {
    Matrix out = Matrix::Zero(block * count, block);
    if (count > 0) out.topRows(block).setIdentity();
    return out;
}

// [H_first, ..., H_last] side by side.
Matrix row_stack(const FirMatrix& h, int first, int last) {
    Matrix out(h.rows(), h.cols() * std::max(0, last - first + 1));
    for (int k = first; k <= last; ++k) out.middleCols((k - first) * h.cols(), h.cols()) = h.coeff(k);
    return out;
}

const FirMatrix& block_of(const BlockSet& blocks, Block b) {
    const auto it = blocks.find(b);
    require(it != blocks.end(), ErrorCode::InvalidArgument, "missing block " + to_string(b));
    return it->second;
}

constexpr double kDirectTol = 1e-9;

}  // namespace

ControllerRealization realize_iop(const FirMatrix& phi_uy, const FirMatrix& phi_yy) {
    const Index p = phi_yy.rows();
    require(phi_yy.cols() == p && phi_uy.cols() == p, ErrorCode::DimensionMismatch, "Phi_yy must be p x p, Phi_uy m x p");
    require((phi_yy[0] - Matrix::Identity(p, p)).cwiseAbs().maxCoeff() <= kDirectTol, ErrorCode::Y0NotIdentity,
            "Phi_yy lag-0 coefficient must be the identity");
    const int horizon = std::max(phi_uy.horizon(), phi_yy.horizon());
    const Matrix y_hat = row_stack(phi_yy, 1, horizon);
    const Matrix u_hat = row_stack(phi_uy, 1, horizon);
    const Matrix u0 = phi_uy[0];
    const Matrix ip = injector(p, horizon);
    StateSpace k(shift(p, horizon) - ip * y_hat, -ip, u0 * y_hat - u_hat, u0);
    return {std::move(k), Kind::iop, horizon};
}

ControllerRealization realize_slp(const FirMatrix& phi_uy, const FirMatrix& phi_ux, const FirMatrix& phi_xx,
                                  const FirMatrix& phi_xy) {
    const Index n = phi_xx.rows();
    const Index p = phi_xy.cols();
    const Index m = phi_uy.rows();
    require(phi_xx.cols() == n && phi_xy.rows() == n && phi_ux.rows() == m && phi_ux.cols() == n &&
                phi_uy.cols() == p,
            ErrorCode::DimensionMismatch, "inconsistent SLP block shapes");
    require(phi_xx.strictly_proper() && phi_xy.strictly_proper() && phi_ux.strictly_proper(), ErrorCode::InvalidArgument,
            "Phi_xx, Phi_xy and Phi_ux must be strictly proper");
    const int horizon = std::max({phi_uy.horizon(), phi_ux.horizon(), phi_xx.horizon(), phi_xy.horizon()});
    require(horizon >= 2, ErrorCode::HorizonTooShort, "SLP realization needs T >= 2");
    require((phi_xx.coeff(1) - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() <= kDirectTol, ErrorCode::R1NotIdentity,
            "Phi_xx lag-1 coefficient must be the identity");

    const Matrix r_hat = row_stack(phi_xx, 2, horizon);
    const Matrix m_hat = row_stack(phi_ux, 2, horizon);
    const Matrix n_hat = row_stack(phi_xy, 1, horizon);
    const Matrix l_hat = row_stack(phi_uy, 1, horizon);
    const Matrix m1 = phi_ux.coeff(1);
    const Index qx = n * (horizon - 1);
    const Index qy = p * horizon;
    const Matrix in = injector(n, horizon - 1);

    Matrix a = Matrix::Zero(qx + qy, qx + qy);
    a.topLeftCorner(qx, qx) = shift(n, horizon - 1) - in * r_hat;
    a.topRightCorner(qx, qy) = -in * n_hat;
    a.bottomRightCorner(qy, qy) = shift(p, horizon);
    Matrix b = Matrix::Zero(qx + qy, p);
    b.bottomRows(qy) = injector(p, horizon);
    Matrix c(m, qx + qy);
    c << m_hat - m1 * r_hat, l_hat - m1 * n_hat;
    StateSpace k(std::move(a), std::move(b), std::move(c), phi_uy[0]);
    return {std::move(k), Kind::slp, horizon};
}

ControllerRealization realize_state_feedback(const FirMatrix& phi_ux, const FirMatrix& phi_xx) {
    const Index n = phi_xx.rows();
    require(phi_xx.cols() == n && phi_ux.cols() == n, ErrorCode::DimensionMismatch, "inconsistent block shapes");
    require(phi_xx.strictly_proper() && phi_ux.strictly_proper(), ErrorCode::InvalidArgument,
            "Phi_xx and Phi_ux must be strictly proper");
    const int horizon = std::max(phi_ux.horizon(), phi_xx.horizon());
    require((phi_xx.coeff(1) - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() <= kDirectTol, ErrorCode::R1NotIdentity,
            "Phi_xx lag-1 coefficient must be the identity");
    const Matrix r_hat = row_stack(phi_xx, 2, horizon);
    const Matrix m_hat = row_stack(phi_ux, 2, horizon);
    const Matrix m1 = phi_ux.coeff(1);
    const Matrix in = injector(n, horizon - 1);
    StateSpace k(shift(n, horizon - 1) - in * r_hat, -in, m1 * r_hat - m_hat, m1);
    return {std::move(k), Kind::state_feedback, horizon};
}

StateSpace recover_controller_tf(ControllerForm form, const BlockSet& blocks, const StateSpace& plant) {
    const auto ss = [&](Block b) { return to_state_space(block_of(blocks, b)); };
    switch (form) {
        case ControllerForm::iop:
        case ControllerForm::mixed_i: return ss_cascade(ss(Block::uy), ss_inverse(ss(Block::yy)));
        case ControllerForm::mixed_ii: return ss_cascade(ss_inverse(ss(Block::uu)), ss(Block::uy));
        case ControllerForm::four_block: {
            const StateSpace zux = to_state_space(advance(block_of(blocks, Block::ux)));
            const StateSpace zxx = to_state_space(advance(block_of(blocks, Block::xx)));
            return ss_parallel_sub(ss(Block::uy), ss_cascade(zux, ss_cascade(ss_inverse(zxx), ss(Block::xy))));
        }
        case ControllerForm::state_feedback: {
            const StateSpace zux = to_state_space(advance(block_of(blocks, Block::ux)));
            const StateSpace zxx = to_state_space(advance(block_of(blocks, Block::xx)));
            return ss_cascade(zux, ss_inverse(zxx));
        }
        case ControllerForm::alternative: {
            const FirMatrix& xy = block_of(blocks, Block::xy);
            const FirMatrix loop = plant.c() * xy + FirMatrix::constant(Matrix::Identity(plant.outputs(), plant.outputs()));
            return ss_cascade(ss(Block::uy), ss_inverse(to_state_space(loop)));
        }
    }
    throw Error(ErrorCode::InvalidArgument, "unknown controller form");
}

ControllerRealization realize(Kind kind, const BlockSet& blocks, const StateSpace& plant) {
    switch (kind) {
        case Kind::slp:
            return realize_slp(block_of(blocks, Block::uy), block_of(blocks, Block::ux), block_of(blocks, Block::xx),
                               block_of(blocks, Block::xy));
        case Kind::iop:
        case Kind::mixed_i:
        case Kind::stable_plant: {
            ControllerRealization r = realize_iop(block_of(blocks, Block::uy), block_of(blocks, Block::yy));
            r.kind = kind;
            return r;
        }
        case Kind::mixed_ii: {
            const int horizon = std::max(block_of(blocks, Block::uy).horizon(), block_of(blocks, Block::uu).horizon());
            return {recover_controller_tf(ControllerForm::mixed_ii, blocks, plant), kind, horizon};
        }
        case Kind::state_feedback:
            return realize_state_feedback(block_of(blocks, Block::ux), block_of(blocks, Block::xx));
    }
    throw Error(ErrorCode::InvalidArgument, "unknown kind");
}

RealizationDiagnostics diagnose(const StateSpace& controller) {
    return {controller.states(), minimal_realization(controller).states()};
}

}  // namespace clp
