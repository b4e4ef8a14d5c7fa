#include "clparam/robust.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/LU>

namespace clp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kCheckGrid = 64;

const FirMatrix& need(const BlockSet& blocks, Block b) {
    const auto it = blocks.find(b);
    require(it != blocks.end(), ErrorCode::InvalidArgument, "missing block " + to_string(b));
    return it->second;
}

FirMatrix identity_fir(Index n) { return FirMatrix::constant(Matrix::Identity(n, n)); }

// z^-1 H
FirMatrix delay(const FirMatrix& h) {
    std::vector<Matrix> coeffs;
    coeffs.reserve(h.coeffs().size() + 1);
    coeffs.push_back(Matrix::Zero(h.rows(), h.cols()));
    for (const Matrix& c : h.coeffs()) coeffs.push_back(c);
    return {h.rows(), h.cols(), std::move(coeffs)};
}

// z H for strictly proper H; perturbed blocks keep the zero direct term of their layout.
FirMatrix shifted(const FirMatrix& h, Block b) {
    require(h.strictly_proper(), ErrorCode::InvalidArgument, to_string(b) + " must be strictly proper");
    return advance(h);
}

double coefficient_scale(const BlockSet& blocks) {
    double scale = 1.0;
    for (const auto& [block, fir] : blocks)
        for (const Matrix& c : fir.coeffs())
            if (c.size() > 0) scale = std::max(scale, c.cwiseAbs().maxCoeff());
    return scale;
}

double grid_peak(const StateSpace& g, int points) {
    const FrequencyResponse response(g);
    double peak = 0.0;
    for (const double w : frequency_grid(points)) peak = std::max(peak, response.at_frequency(w).cwiseAbs().maxCoeff());
    return peak;
}

Residual fir_residual(std::string name, FirMatrix fir, double zero_tol, int grid_size) {
    double peak = 0.0;
    for (const Matrix& c : fir.coeffs())
        if (c.size() > 0) peak = std::max(peak, c.cwiseAbs().maxCoeff());
    const bool zero = peak <= zero_tol;
    const double hinf = zero ? 0.0 : hinf_norm(fir, grid_size).value;
    StateSpace model = to_state_space(fir);
    return {std::move(name), std::move(model), std::move(fir), hinf, zero};
}

Residual rational_residual(std::string name, const StateSpace& model, double zero_tol, int grid_size) {
    const StateSpace reduced = minimal_realization(model);
    double hinf = kInf;
    if (is_stable(reduced.a())) hinf = hinf_norm(reduced, grid_size).value;
    const bool zero = std::isfinite(hinf) && grid_peak(model, kCheckGrid) <= zero_tol &&
                      (reduced.states() == 0 || hinf <= zero_tol);
    return {std::move(name), model, std::nullopt, zero ? 0.0 : hinf, zero};
}

Residual unused_residual(Index rows, Index cols) {
    return {"-", StateSpace::gain(Matrix::Zero(rows, cols)), FirMatrix::zero(rows, cols, 0), 0.0, true};
}

// G * H for FIR H.
StateSpace plant_times(const StateSpace& g, const FirMatrix& h) { return ss_cascade(g, to_state_space(h)); }
StateSpace times_plant(const FirMatrix& h, const StateSpace& g) { return ss_cascade(to_state_space(h), g); }

// C (zI - A)^-1 and (zI - A)^-1 B.
StateSpace output_resolvent(const StateSpace& g) {
    return StateSpace(g.a(), Matrix::Identity(g.states(), g.states()), g.c(), Matrix::Zero(g.outputs(), g.states()));
}
StateSpace input_resolvent(const StateSpace& g) {
    return StateSpace(g.a(), g.b(), Matrix::Identity(g.states(), g.states()), Matrix::Zero(g.states(), g.inputs()));
}

// Largest pole magnitude of (I + D)^-1, or NaN if I + D(inf) is singular.
double inverse_pole_radius(const StateSpace& delta) {
    const Index n = delta.outputs();
    const StateSpace loop = ss_parallel_add(StateSpace::gain(Matrix::Identity(n, n)), delta);
    return transfer_pole_radius(ss_inverse(loop));
}

bool radius_stable(double radius) { return radius < 1.0 - kStabilityMargin; }

CMatrix resolvent_at(const Matrix& a, Complex z) {
    const Index n = a.rows();
    CMatrix m = z * CMatrix::Identity(n, n) - a.cast<Complex>();
    return m.partialPivLu().inverse();
}

}  // namespace

bool ResidualReport::all_zero() const {
    return std::all_of(deltas.begin(), deltas.end(), [](const Residual& r) { return r.zero; });
}

ResidualReport compute_residuals(Kind kind, const StateSpace& plant, const BlockSet& blocks, int grid_size) {
    const Index n = plant.states();
    const Index m = plant.inputs();
    const Index p = plant.outputs();
    const Matrix& a = plant.a();
    const Matrix& b = plant.b();
    const Matrix& c = plant.c();
    const double tol = kZeroResidual * coefficient_scale(blocks);
    const auto fir = [&](std::string name, FirMatrix h) { return fir_residual(std::move(name), std::move(h), tol, grid_size); };
    const auto rational = [&](std::string name, const StateSpace& g) {
        return rational_residual(std::move(name), g, tol, grid_size);
    };

    ResidualReport report{kind, {}};
    auto& d = report.deltas;
    switch (kind) {
        case Kind::slp: {
            const FirMatrix& xx = need(blocks, Block::xx);
            const FirMatrix& xy = need(blocks, Block::xy);
            const FirMatrix& ux = need(blocks, Block::ux);
            const FirMatrix& uy = need(blocks, Block::uy);
            d.push_back(fir("(zI-A)Phi_xx - B Phi_ux - I", shifted(xx, Block::xx) - a * xx - b * ux - identity_fir(n)));
            d.push_back(fir("(zI-A)Phi_xy - B Phi_uy", shifted(xy, Block::xy) - a * xy - b * uy));
            d.push_back(fir("Phi_xx(zI-A) - Phi_xy C - I", shifted(xx, Block::xx) - xx * a - xy * c - identity_fir(n)));
            d.push_back(fir("Phi_ux(zI-A) - Phi_uy C", shifted(ux, Block::ux) - ux * a - uy * c));
            break;
        }
        case Kind::iop:
        case Kind::stable_plant: {
            const FirMatrix& yy = need(blocks, Block::yy);
            const FirMatrix& uy = need(blocks, Block::uy);
            d.push_back(rational("Phi_yy - G Phi_uy - I",
                                 ss_parallel_sub(to_state_space(yy - identity_fir(p)), plant_times(plant, uy))));
            if (kind == Kind::stable_plant) {
                for (int i = 0; i < 3; ++i) d.push_back(unused_residual(p, p));
                break;
            }
            const FirMatrix& yu = need(blocks, Block::yu);
            const FirMatrix& uu = need(blocks, Block::uu);
            d.push_back(rational("Phi_yu - G Phi_uu", ss_parallel_sub(to_state_space(yu), plant_times(plant, uu))));
            d.push_back(rational("Phi_yu - Phi_yy G", ss_parallel_sub(to_state_space(yu), times_plant(yy, plant))));
            d.push_back(rational("Phi_uu - Phi_uy G - I",
                                 ss_parallel_sub(to_state_space(uu - identity_fir(m)), times_plant(uy, plant))));
            break;
        }
        case Kind::mixed_i: {
            const FirMatrix& yx = need(blocks, Block::yx);
            const FirMatrix& yy = need(blocks, Block::yy);
            const FirMatrix& ux = need(blocks, Block::ux);
            const FirMatrix& uy = need(blocks, Block::uy);
            // Phi_yx - C (zI-A)^-1 (B Phi_ux + I)
            const StateSpace forced = ss_cascade(output_resolvent(plant), to_state_space(b * ux + identity_fir(n)));
            d.push_back(rational("Phi_yx - G Phi_ux - C(zI-A)^-1", ss_parallel_sub(to_state_space(yx), forced)));
            d.push_back(rational("Phi_yy - G Phi_uy - I",
                                 ss_parallel_sub(to_state_space(yy - identity_fir(p)), plant_times(plant, uy))));
            d.push_back(fir("Phi_yx(zI-A) - Phi_yy C", shifted(yx, Block::yx) - yx * a - yy * c));
            d.push_back(fir("Phi_ux(zI-A) - Phi_uy C", shifted(ux, Block::ux) - ux * a - uy * c));
            break;
        }
        case Kind::mixed_ii: {
            const FirMatrix& xy = need(blocks, Block::xy);
            const FirMatrix& xu = need(blocks, Block::xu);
            const FirMatrix& uy = need(blocks, Block::uy);
            const FirMatrix& uu = need(blocks, Block::uu);
            d.push_back(fir("(zI-A)Phi_xy - B Phi_uy", shifted(xy, Block::xy) - a * xy - b * uy));
            d.push_back(fir("(zI-A)Phi_xu - B Phi_uu", shifted(xu, Block::xu) - a * xu - b * uu));
            // Phi_xu - (Phi_xy C + I)(zI-A)^-1 B
            const StateSpace forced = ss_cascade(to_state_space(xy * c + identity_fir(n)), input_resolvent(plant));
            d.push_back(rational("Phi_xu - Phi_xy G - (zI-A)^-1 B", ss_parallel_sub(to_state_space(xu), forced)));
            d.push_back(rational("Phi_uu - Phi_uy G - I",
                                 ss_parallel_sub(to_state_space(uu - identity_fir(m)), times_plant(uy, plant))));
            break;
        }
        case Kind::state_feedback: {
            const FirMatrix& xx = need(blocks, Block::xx);
            const FirMatrix& ux = need(blocks, Block::ux);
            d.push_back(fir("(zI-A)Phi_xx - B Phi_ux - I", shifted(xx, Block::xx) - a * xx - b * ux - identity_fir(n)));
            for (int i = 0; i < 3; ++i) d.push_back(unused_residual(n, n));
            break;
        }
    }
    return report;
}

std::string to_string(Certificate c) {
    switch (c) {
        case Certificate::certified_stable: return "CertifiedStable";
        case Certificate::certified_unstable: return "CertifiedUnstable";
        case Certificate::inconclusive: return "Inconclusive";
    }
    return "?";
}

namespace {

// Small-gain bound first, then the exact pole test of (I + delta)^-1.
CertificateResult two_parameter_test(const StateSpace& delta, double delta_norm, const std::string& basis) {
    if (delta_norm < 1.0) return {Certificate::certified_stable, "small gain: " + basis, delta_norm, kNaN};
    const double radius = inverse_pole_radius(delta);
    return {radius_stable(radius) ? Certificate::certified_stable : Certificate::certified_unstable,
            "pole test: " + basis, delta_norm, radius};
}

void require_kind(bool ok, Kind kind, ControllerForm form) {
    require(ok, ErrorCode::InvalidArgument,
            "controller form " + to_string(form) + " does not apply to kind " + to_string(kind));
}

}  // namespace

CertificateResult certify(Kind kind, const StateSpace& plant, const BlockSet& blocks, const ResidualReport& report,
                          ControllerForm form) {
    require(report.kind == kind && report.deltas.size() == 4, ErrorCode::InvalidArgument,
            "residual report does not match kind " + to_string(kind));
    const bool plant_stable = is_stable(plant.a());

    switch (form) {
        case ControllerForm::iop:
        case ControllerForm::mixed_i:
        case ControllerForm::mixed_ii: {
            require_kind((form == ControllerForm::iop && (kind == Kind::iop || kind == Kind::stable_plant)) ||
                             (form == ControllerForm::mixed_i && kind == Kind::mixed_i) ||
                             (form == ControllerForm::mixed_ii && kind == Kind::mixed_ii),
                         kind, form);
            if (report.all_zero()) return {Certificate::certified_stable, "exact feasibility", 0.0, kNaN};
            require(plant_stable, ErrorCode::PreconditionViolated,
                    "nonzero residuals on an open-loop unstable plant: no certificate applies");
            const int slot = form == ControllerForm::iop ? 1 : form == ControllerForm::mixed_i ? 2 : 4;
            const Residual& r = report[slot];
            return two_parameter_test(r.model, r.hinf, "(I + Delta_" + std::to_string(slot) + ")^-1");
        }
        case ControllerForm::state_feedback: {
            require_kind(kind == Kind::slp || kind == Kind::state_feedback, kind, form);
            require(plant.outputs() == plant.states() &&
                        plant.c().isApprox(Matrix::Identity(plant.states(), plant.states()), 0.0),
                    ErrorCode::PreconditionViolated, "state-feedback certificate needs C = I");
            const Residual& r = report[1];
            if (r.zero) return {Certificate::certified_stable, "exact feasibility", 0.0, kNaN};
            return two_parameter_test(r.model, r.hinf, "(I + Delta_1)^-1, state feedback");
        }
        case ControllerForm::alternative: {
            require_kind(kind == Kind::slp, kind, form);
            if (report.all_zero()) return {Certificate::certified_stable, "exact feasibility", 0.0, kNaN};
            require(plant_stable, ErrorCode::PreconditionViolated,
                    "nonzero residuals on an open-loop unstable plant: no certificate applies");
            const StateSpace weighted = ss_cascade(output_resolvent(plant), report[2].model);
            const double norm = hinf_norm(minimal_realization(weighted)).value;
            return two_parameter_test(weighted, norm, "(I + C(zI-A)^-1 Delta_2)^-1");
        }
        case ControllerForm::four_block: {
            require_kind(kind == Kind::slp, kind, form);
            if (report.all_zero()) return {Certificate::certified_stable, "exact feasibility", 0.0, kNaN};
            const SlpDeltaHat dh = slp_delta_hat(plant, blocks, report);
            double radius = 0.0;
            for (Index i = 0; i < dh.poles.size(); ++i) radius = std::max(radius, std::abs(dh.poles(i)));
            if (radius <= 1.0 + kBorderlineBand)
                return {Certificate::inconclusive, "(I + Delta_hat)^-1 stable or borderline; no necessity result", kNaN,
                        radius};
            // The unstable poles must survive in the assembled dx -> x map before instability is certain.
            const Index n = plant.states();
            const StateSpace loop1 = ss_parallel_add(StateSpace::gain(Matrix::Identity(n, n)), report[1].model);
            const StateSpace loop = ss_parallel_add(StateSpace::gain(Matrix::Identity(n, n)), dh.delta_hat);
            const StateSpace dx_to_x = ss_cascade(ss_inverse(loop), ss_cascade(to_state_space(need(blocks, Block::xx)),
                                                                                ss_inverse(loop1)));
            const double map_radius = transfer_pole_radius(dx_to_x);
            if (map_radius > 1.0 + kBorderlineBand)
                return {Certificate::certified_unstable, "unstable (I + Delta_hat)^-1 in the dx -> x map", kNaN,
                        map_radius};
            return {Certificate::inconclusive, "unstable poles of (I + Delta_hat)^-1 cancel in the dx -> x map", kNaN,
                    radius};
        }
    }
    throw Error(ErrorCode::InvalidArgument, "unknown controller form");
}

SlpDeltaHat slp_delta_hat(const StateSpace& plant, const BlockSet& blocks, const ResidualReport& report) {
    require(report.kind == Kind::slp, ErrorCode::InvalidArgument, "slp_delta_hat needs an SLP residual report");
    const Index n = plant.states();
    const FirMatrix& xx = need(blocks, Block::xx);
    const FirMatrix& d1 = *report[1].fir;
    const FirMatrix& d3 = *report[3].fir;
    const FirMatrix& d4 = *report[4].fir;
    const Matrix& a = plant.a();
    const Matrix& b = plant.b();

    // Phi_xx (I + D1)^-1 (B D4 - (zI - A) D3) = (z Phi_xx)(I + D1)^-1 (z^-1 (B D4 + A D3) - D3)
    const FirMatrix tail = delay(b * d4 + a * d3) - d3;
    const StateSpace inv1 = ss_inverse(to_state_space(identity_fir(n) + d1));
    const StateSpace delta_hat =
        ss_parallel_add(to_state_space(d3),
                        ss_cascade(to_state_space(shifted(xx, Block::xx)), ss_cascade(inv1, to_state_space(tail))));
    const StateSpace inverse = ss_inverse(ss_parallel_add(StateSpace::gain(Matrix::Identity(n, n)), delta_hat));
    const CVector poles = transfer_poles(inverse);

    // Factorization check against the directly assembled loop with the four-block controller.
    const StateSpace k = recover_controller_tf(ControllerForm::four_block, blocks, plant);
    const FrequencyResponse k_resp(k);
    double mismatch = 0.0;
    const CMatrix bc = b.cast<Complex>();
    const CMatrix cc = plant.c().cast<Complex>();
    const CMatrix ac = a.cast<Complex>();
    const CMatrix eye = CMatrix::Identity(n, n);
    for (const double w : frequency_grid(kCheckGrid)) {
        const Complex z = unit_point(w);
        const CMatrix direct = (z * eye - ac - bc * k_resp.at(z) * cc).partialPivLu().inverse();
        const CMatrix pxx = evaluate(xx, z);
        const CMatrix e1 = evaluate(d1, z);
        const CMatrix e3 = evaluate(d3, z);
        const CMatrix e4 = evaluate(d4, z);
        const CMatrix inv_e1 = (eye + e1).partialPivLu().inverse();
        const CMatrix dh = e3 + pxx * inv_e1 * (bc * e4 - (z * eye - ac) * e3);
        const CMatrix factored = (eye + dh).partialPivLu().solve(pxx * inv_e1);
        mismatch = std::max(mismatch, (direct - factored).cwiseAbs().maxCoeff() / std::max(1.0, direct.cwiseAbs().maxCoeff()));
    }
    return {delta_hat, poles, mismatch};
}

StateSpace prestabilize(const StateSpace& plant, const StateSpace& k0) {
    require(k0.inputs() == plant.outputs() && k0.outputs() == plant.inputs(), ErrorCode::DimensionMismatch,
            "K0 must map outputs to inputs");
    require(k0.states() == 0 || is_stable(k0.a()), ErrorCode::K0NotStable, "K0 realization is not stable");
    require(internal_stability(plant, k0).internally_stable, ErrorCode::K0NotStabilizing,
            "K0 does not internally stabilize the plant");
    return ClosedLoopMaps(plant, k0).block(Signal::y, Disturbance::du);
}

StateSpace compose(const StateSpace& k0, const StateSpace& k1) { return ss_parallel_add(k0, k1); }

CoprimeFactorization coprime_from_k0(const StateSpace& plant, const StateSpace& k0) {
    const StateSpace g_hat = prestabilize(plant, k0);
    const ClosedLoopMaps loop(plant, k0);
    const Index m = plant.inputs();
    const Index p = plant.outputs();
    return CoprimeFactorization{
        StateSpace::gain(-Matrix::Identity(m, m)),
        ss_negate(k0),
        g_hat,
        loop.block(Signal::y, Disturbance::dy),
        StateSpace::gain(Matrix::Identity(p, p)),
        k0,
        ss_negate(g_hat),
        ss_negate(loop.block(Signal::u, Disturbance::du)),
    };
}

double bezout_residual(const CoprimeFactorization& f, const StateSpace& plant, int grid_points) {
    const Index m = plant.inputs();
    const Index p = plant.outputs();
    double worst = 0.0;
    for (const double w : frequency_grid(grid_points)) {
        const Complex z = unit_point(w);
        const CMatrix ul = evaluate(f.ul, z), vl = evaluate(f.vl, z), nl = evaluate(f.nl, z), ml = evaluate(f.ml, z);
        const CMatrix ur = evaluate(f.ur, z), vr = evaluate(f.vr, z), nr = evaluate(f.nr, z), mr = evaluate(f.mr, z);
        CMatrix left(m + p, m + p);
        left << ul, -vl, -nl, ml;
        CMatrix right(m + p, m + p);
        right << mr, vr, nr, ur;
        worst = std::max(worst, (left * right - CMatrix::Identity(m + p, m + p)).cwiseAbs().maxCoeff());
        const CMatrix g = evaluate(plant, z);
        worst = std::max(worst, (nr * mr.partialPivLu().inverse() - g).cwiseAbs().maxCoeff());
        worst = std::max(worst, (ml.partialPivLu().solve(nl) - g).cwiseAbs().maxCoeff());
    }
    return worst;
}

StateSpace youla_controller(const CoprimeFactorization& f, const StateSpace& q) {
    const StateSpace num = ss_parallel_sub(f.vr, ss_cascade(f.mr, q));
    const StateSpace den = ss_parallel_sub(f.ur, ss_cascade(f.nr, q));
    return ss_cascade(num, ss_inverse(den));
}

RationalBlocks youla_to_blocks(const CoprimeFactorization& f, const StateSpace& q, const StateSpace& plant) {
    require(q.states() == 0 || is_stable(q.a()), ErrorCode::QUnstable, "Youla parameter Q must be stable");
    require(q.outputs() == plant.inputs() && q.inputs() == plant.outputs(), ErrorCode::DimensionMismatch,
            "Q must map outputs to inputs");
    const Index m = plant.inputs();
    const StateSpace left_y = ss_parallel_sub(f.ur, ss_cascade(f.nr, q));  // U_r - N_r Q
    const StateSpace left_u = ss_parallel_sub(f.vr, ss_cascade(f.mr, q));  // V_r - M_r Q
    const StateSpace uy = ss_cascade(left_u, f.ml);
    const StateSpace res = StateSpace::resolvent(plant.a());
    const StateSpace cr = ss_left(plant.c(), res);
    const StateSpace rb = ss_right(res, plant.b());
    const StateSpace uu = ss_parallel_add(StateSpace::gain(Matrix::Identity(m, m)), ss_cascade(left_u, f.nl));
    const StateSpace yy = ss_cascade(left_y, f.ml);

    RationalBlocks out;
    out.emplace(Block::yy, yy);
    out.emplace(Block::uy, uy);
    out.emplace(Block::yu, ss_cascade(left_y, f.nl));
    out.emplace(Block::uu, uu);
    out.emplace(Block::xx, ss_parallel_add(res, ss_cascade(rb, ss_cascade(uy, cr))));
    out.emplace(Block::ux, ss_cascade(uy, cr));
    out.emplace(Block::xy, ss_cascade(rb, uy));
    out.emplace(Block::xu, ss_cascade(rb, uu));
    out.emplace(Block::yx, ss_cascade(yy, cr));
    return out;
}

std::map<Block, CMatrix> evaluate_blocks(const BlockSet& blocks, Complex z) {
    std::map<Block, CMatrix> out;
    for (const auto& [block, fir] : blocks) out.emplace(block, evaluate(fir, z));
    return out;
}

std::map<Block, CMatrix> evaluate_blocks(const RationalBlocks& blocks, Complex z) {
    std::map<Block, CMatrix> out;
    for (const auto& [block, g] : blocks) out.emplace(block, evaluate(g, z));
    return out;
}

double subspace_mismatch(Kind kind, const StateSpace& plant, const std::map<Block, CMatrix>& at, Complex z) {
    const Index n = plant.states();
    const Index m = plant.inputs();
    const Index p = plant.outputs();
    const CMatrix a = plant.a().cast<Complex>();
    const CMatrix b = plant.b().cast<Complex>();
    const CMatrix c = plant.c().cast<Complex>();
    const CMatrix zia = z * CMatrix::Identity(n, n) - a;
    const CMatrix res = resolvent_at(plant.a(), z);
    const CMatrix g = c * res * b;
    const CMatrix in = CMatrix::Identity(n, n);
    const CMatrix ip = CMatrix::Identity(p, p);
    const CMatrix im = CMatrix::Identity(m, m);
    const auto get = [&](Block blk) -> const CMatrix& {
        const auto it = at.find(blk);
        require(it != at.end(), ErrorCode::InvalidArgument, "missing block " + to_string(blk));
        return it->second;
    };

    std::vector<CMatrix> mismatch;
    switch (kind) {
        case Kind::slp:
            mismatch = {zia * get(Block::xx) - b * get(Block::ux) - in, zia * get(Block::xy) - b * get(Block::uy),
                        get(Block::xx) * zia - get(Block::xy) * c - in, get(Block::ux) * zia - get(Block::uy) * c};
            break;
        case Kind::iop:
            mismatch = {get(Block::yy) - g * get(Block::uy) - ip, get(Block::yu) - g * get(Block::uu),
                        get(Block::yu) - get(Block::yy) * g, get(Block::uu) - get(Block::uy) * g - im};
            break;
        case Kind::mixed_i:
            mismatch = {get(Block::yx) - g * get(Block::ux) - c * res, get(Block::yy) - g * get(Block::uy) - ip,
                        get(Block::yx) * zia - get(Block::yy) * c, get(Block::ux) * zia - get(Block::uy) * c};
            break;
        case Kind::mixed_ii:
            mismatch = {zia * get(Block::xy) - b * get(Block::uy), zia * get(Block::xu) - b * get(Block::uu),
                        get(Block::xu) - get(Block::xy) * g - res * b, get(Block::uu) - get(Block::uy) * g - im};
            break;
        case Kind::stable_plant: mismatch = {get(Block::yy) - g * get(Block::uy) - ip}; break;
        case Kind::state_feedback: mismatch = {zia * get(Block::xx) - b * get(Block::ux) - in}; break;
    }
    double worst = 0.0;
    for (const CMatrix& e : mismatch)
        if (e.size() > 0) worst = std::max(worst, e.cwiseAbs().maxCoeff());
    return worst;
}

BlockSet perturb(const VariableLayout& layout, const BlockSet& blocks, double magnitude, std::mt19937_64& rng) {
    Vector x = vectorize(layout, blocks);
    std::uniform_real_distribution<double> noise(-magnitude, magnitude);
    for (Index i = 0; i < x.size(); ++i) x(i) += noise(rng);
    return extract_blocks(layout, x);
}

bool is_minimal(const StateSpace& g) { return minimal_realization(g).states() == g.states(); }

StateSpace random_integer_plant(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> entry(-5, 5);
    const auto draw = [&](Index r, Index c) {
        Matrix out(r, c);
        for (Index j = 0; j < c; ++j)
            for (Index i = 0; i < r; ++i) out(i, j) = entry(rng);
        return out;
    };
    Matrix a = draw(3, 3);
    Matrix b = draw(3, 1);
    Matrix c = draw(1, 3);
    return StateSpace(std::move(a), std::move(b), std::move(c), Matrix::Zero(1, 1));
}

namespace {

Matrix gaussian(std::mt19937_64& rng, Index r, Index c) {
    std::normal_distribution<double> normal;
    Matrix out(r, c);
    for (Index j = 0; j < c; ++j)
        for (Index i = 0; i < r; ++i) out(i, j) = normal(rng);
    return out;
}

Matrix with_radius(const Matrix& a, double radius) {
    const double rho = spectral_radius(a);
    return rho > 0.0 ? Matrix(a * (radius / rho)) : a;
}

constexpr int kMaxDraws = 1000;

}  // namespace

StateSpace random_stable_plant(std::uint64_t seed, Index states, Index inputs, Index outputs) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> radius(0.3, 0.9);
    for (int draw = 0; draw < kMaxDraws; ++draw) {
        StateSpace g(with_radius(gaussian(rng, states, states), radius(rng)), gaussian(rng, states, inputs),
                     gaussian(rng, outputs, states), Matrix::Zero(outputs, inputs));
        if (is_minimal(g)) return g;
    }
    throw Error(ErrorCode::InvalidArgument, "no minimal stable plant drawn");
}

PlantWithController random_unstable_plant(std::uint64_t seed, Index states, Index inputs, Index outputs) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> radius(0.2, 0.8);
    for (int draw = 0; draw < kMaxDraws; ++draw) {
        const Matrix a_cl = with_radius(gaussian(rng, states, states), radius(rng));
        const Matrix b = gaussian(rng, states, inputs);
        const Matrix c = gaussian(rng, outputs, states);
        const Matrix k = gaussian(rng, inputs, outputs);
        // A + B K C = A_cl, so u = K y stabilizes.
        StateSpace g(a_cl - b * k * c, b, c, Matrix::Zero(outputs, inputs));
        if (spectral_radius(g.a()) < 1.05 || !is_minimal(g)) continue;
        return {std::move(g), StateSpace::gain(k)};
    }
    throw Error(ErrorCode::InvalidArgument, "no minimal unstable plant drawn");
}

}  // namespace clp
