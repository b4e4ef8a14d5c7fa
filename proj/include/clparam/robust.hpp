#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>

#include "clparam/closedloop.hpp"
#include "clparam/param.hpp"
#include "clparam/realize.hpp"

namespace clp {

// Residuals below this (coefficient magnitude or grid response) count as exactly zero.
inline constexpr double kZeroResidual = 1e-13;
// Pole magnitudes within this distance of 1 make a pole test borderline.
inline constexpr double kBorderlineBand = 1e-6;

struct Residual {
    std::string name;
    StateSpace model;
    std::optional<FirMatrix> fir;  // set when the residual is polynomial in z^-1
    double hinf;                   // +inf when the residual transfer matrix is unstable
    bool zero;
};

struct ResidualReport {
    Kind kind;
    std::vector<Residual> deltas;  // Delta_1 .. Delta_4 (unused slots are zero)

    [[nodiscard]] bool all_zero() const;
    [[nodiscard]] const Residual& operator[](int i) const { return deltas.at(static_cast<std::size_t>(i - 1)); }
};

// Constraint mismatches of approximately feasible blocks, kept as exact state-space interconnections.
[[nodiscard]] ResidualReport compute_residuals(Kind kind, const StateSpace& plant, const BlockSet& blocks,
                                               int grid_size = kDefaultGridSize);

enum class Certificate { certified_stable, certified_unstable, inconclusive };

[[nodiscard]] std::string to_string(Certificate c);

struct CertificateResult {
    Certificate verdict;
    std::string basis;
    double small_gain_norm;  // NaN when no small-gain bound applies
    double pole_radius;      // NaN when no pole test ran
};

[[nodiscard]] CertificateResult certify(Kind kind, const StateSpace& plant, const BlockSet& blocks,
                                        const ResidualReport& report, ControllerForm form);

struct SlpDeltaHat {
    StateSpace delta_hat;
    CVector poles;              // poles of (I + delta_hat)^-1
    double identity_mismatch;   // factorization error relative to max(1, |direct loop|), 64-point grid
};

// Four-block SLP uncertainty and the factorization (zI - A - BKC)^-1 = (I + D)^-1 Phi_xx (I + D1)^-1.
[[nodiscard]] SlpDeltaHat slp_delta_hat(const StateSpace& plant, const BlockSet& blocks, const ResidualReport& report);

// (I - G K0)^-1 G for a stable, stabilizing K0.
[[nodiscard]] StateSpace prestabilize(const StateSpace& plant, const StateSpace& k0);
[[nodiscard]] StateSpace compose(const StateSpace& k0, const StateSpace& k1);

struct CoprimeFactorization {
    StateSpace ul, vl, nl, ml, ur, vr, nr, mr;
};

[[nodiscard]] CoprimeFactorization coprime_from_k0(const StateSpace& plant, const StateSpace& k0);
// Max over the grid of the Bezout mismatch and of the two plant factorization mismatches.
[[nodiscard]] double bezout_residual(const CoprimeFactorization& f, const StateSpace& plant, int grid_points = 64);

using RationalBlocks = std::map<Block, StateSpace>;

[[nodiscard]] RationalBlocks youla_to_blocks(const CoprimeFactorization& f, const StateSpace& q,
                                             const StateSpace& plant);
// (V_r - M_r Q)(U_r - N_r Q)^-1
[[nodiscard]] StateSpace youla_controller(const CoprimeFactorization& f, const StateSpace& q);

// Largest entry of the affine-subspace mismatch of `kind` for block values taken at the point z.
[[nodiscard]] double subspace_mismatch(Kind kind, const StateSpace& plant, const std::map<Block, CMatrix>& at_z,
                                       Complex z);
[[nodiscard]] std::map<Block, CMatrix> evaluate_blocks(const BlockSet& blocks, Complex z);
[[nodiscard]] std::map<Block, CMatrix> evaluate_blocks(const RationalBlocks& blocks, Complex z);

// Adds uniform noise in [-magnitude, magnitude] to every free coefficient of the layout.
[[nodiscard]] BlockSet perturb(const VariableLayout& layout, const BlockSet& blocks, double magnitude,
                               std::mt19937_64& rng);

// 3-state SISO plant with integer entries drawn from [-5, 5].
[[nodiscard]] StateSpace random_integer_plant(std::uint64_t seed);

// Controllable and observable plant with spectral radius in [0.3, 0.9].
[[nodiscard]] StateSpace random_stable_plant(std::uint64_t seed, Index states, Index inputs, Index outputs);

struct PlantWithController {
    StateSpace plant;
    StateSpace k0;  // static, hence stable, and stabilizing
};

// Open-loop unstable, controllable and observable plant built around a stabilizing static gain.
[[nodiscard]] PlantWithController random_unstable_plant(std::uint64_t seed, Index states, Index inputs, Index outputs);

[[nodiscard]] bool is_minimal(const StateSpace& g);

}  // namespace clp
