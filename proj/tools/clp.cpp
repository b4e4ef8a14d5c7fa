// clp: synthesis, verification, auditing and simulation of closed-loop parameterized controllers.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "clparam/io.hpp"
#include "clparam/realize.hpp"
#include "clparam/robust.hpp"
#include "clparam/synth.hpp"

namespace {

using namespace clp;

enum ExitCode : int { kStable = 0, kFailure = 1, kUnstable = 2, kInconclusive = 3 };

int exit_code(Certificate c) {
    switch (c) {
        case Certificate::certified_stable: return kStable;
        case Certificate::certified_unstable: return kUnstable;
        case Certificate::inconclusive: return kInconclusive;
    }
    return kFailure;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw Error(ErrorCode::ParseError, "not a number: '" + item + "'");
        }
    }
    return out;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    require(out.good(), ErrorCode::InvalidArgument, "cannot write " + path);
    return out;
}

// Certificate of the residuals; a violated precondition is reported as inconclusive.
CertificateResult certify_or_explain(Kind kind, const StateSpace& plant, const BlockSet& blocks,
                                     const ResidualReport& report, ControllerForm form) {
    try {
        return certify(kind, plant, blocks, report, form);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::PreconditionViolated) throw;
        return {Certificate::inconclusive, e.what(), std::nan(""), std::nan("")};
    }
}

void print_certificate(std::ostream& os, const CertificateResult& c) {
    os << "certificate: " << to_string(c.verdict) << '\n' << "certificate_basis: " << c.basis << '\n';
    if (!std::isnan(c.small_gain_norm)) os << "small_gain_norm: " << format_number(c.small_gain_norm) << '\n';
    if (!std::isnan(c.pole_radius)) os << "pole_radius: " << format_number(c.pole_radius) << '\n';
}

struct SynthOptions {
    std::string problem;
    std::string kind;
    int horizon = -1;
    std::string out;
    std::string form;
    std::string dump_program;
};

int cmd_synth(const SynthOptions& o) {
    Problem pb = load_problem(o.problem);
    if (!o.kind.empty()) pb.kind = parse_kind(o.kind);
    if (o.horizon >= 0) pb.horizon = o.horizon;
    // With K0 the design runs on the prestabilized plant and the result is K0 + K1.
    const StateSpace design_plant = pb.k0 ? prestabilize(pb.plant, *pb.k0) : pb.plant;
    if (pb.kind == Kind::state_feedback && pb.q.rows() != design_plant.states())
        pb.q = Matrix::Identity(design_plant.states(), design_plant.states());

    const H2Problem problem{design_plant, pb.q, pb.r, pb.kind, pb.horizon};
    if (!o.dump_program.empty()) {
        std::ofstream out = open_out(o.dump_program);
        write_matrix_market(out, build_constraints(pb.kind, design_plant, pb.horizon).e);
    }
    const SynthesisResult result = synthesize(problem, {pb.options.feasibility_tol});
    const ControllerRealization k1 = realize(pb.kind, result.blocks, design_plant);
    const StateSpace controller = pb.k0 ? compose(*pb.k0, k1.controller) : k1.controller;

    const ResidualReport report = compute_residuals(pb.kind, design_plant, result.blocks, pb.options.grid_size);
    const ControllerForm form = o.form.empty() ? default_form(pb.kind) : parse_form(o.form);
    const CertificateResult cert = certify_or_explain(pb.kind, design_plant, result.blocks, report, form);
    const StabilityVerdict verdict = internal_stability(pb.plant, controller);

    std::ostringstream record;
    record << "kind: " << to_string(pb.kind) << '\n'
           << "horizon: " << pb.horizon << '\n'
           << "h2_norm: " << format_number(result.h2_norm) << '\n'
           << "cost: " << format_number(result.cost_squared) << '\n'
           << "kkt_residual: " << format_number(result.kkt_residual) << '\n'
           << "constraint_residual: " << format_number(result.constraint_residual) << '\n'
           << "controller_form: " << to_string(form) << '\n'
           << "controller_states: " << controller.states() << '\n'
           << "prestabilized: " << (pb.k0 ? "yes" : "no") << '\n';
    write_residual_report(record, report);
    print_certificate(record, cert);
    record << "direct_internally_stable: " << (verdict.internally_stable ? "yes" : "no") << '\n'
           << "direct_spectral_radius: " << format_number(verdict.spectral_radius) << '\n';
    std::cout << record.str();

    if (!o.out.empty()) {
        std::ofstream ctrl = open_out(o.out + ".ctrl");
        write_controller(ctrl, controller);
        std::ofstream coeffs = open_out(o.out + ".coeffs.csv");
        write_coefficients_csv(coeffs, result.blocks);
        std::ofstream rec = open_out(o.out + ".report.txt");
        rec << record.str();
    }
    return exit_code(cert.verdict);
}

int cmd_table(const std::string& path, const std::string& kinds_text, const std::string& horizons_text) {
    Problem pb = load_problem(path);
    std::vector<Kind> kinds;
    {
        std::stringstream ss(kinds_text);
        std::string item;
        while (std::getline(ss, item, ',')) kinds.push_back(parse_kind(item));
    }
    std::vector<int> horizons;
    for (const double t : parse_list(horizons_text)) horizons.push_back(static_cast<int>(t));
    require(!kinds.empty() && !horizons.empty(), ErrorCode::InvalidArgument, "empty kind or horizon list");

    std::cout << "kind,T,h2_norm,max_rel_deviation\n";
    for (const int horizon : horizons) {
        std::vector<std::string> cells;
        std::vector<double> values;
        for (const Kind kind : kinds) {
            Matrix q = kind == Kind::state_feedback ? Matrix(Matrix::Identity(pb.plant.states(), pb.plant.states())) : pb.q;
            try {
                const double h2 = synthesize({pb.plant, q, pb.r, kind, horizon}, {pb.options.feasibility_tol}).h2_norm;
                values.push_back(h2);
                cells.push_back(format_number(h2));
            } catch (const Error& e) {
                cells.push_back(e.code() == ErrorCode::Infeasible ? "infeasible" : "error:" + std::string(to_string(e.code())));
            }
        }
        double deviation = 0.0;
        if (!values.empty()) {
            const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
            deviation = (*hi - *lo) / std::max(*lo, 1e-300);
        }
        for (std::size_t i = 0; i < kinds.size(); ++i)
            std::cout << to_string(kinds[i]) << ',' << horizon << ',' << cells[i] << ',' << format_number(deviation)
                      << '\n';
    }
    return kStable;
}

int cmd_verify(const std::string& problem_path, const std::string& controller_path) {
    const Problem pb = load_problem(problem_path);
    const StateSpace k = load_controller(controller_path);
    const StabilityVerdict verdict = internal_stability(pb.plant, k);
    write_verdict(std::cout, verdict);
    return verdict.internally_stable ? kStable : kUnstable;
}

int cmd_simulate(const std::string& problem_path, const std::string& controller_path, const std::string& x0_text,
                 int steps, std::optional<std::uint64_t> noise_seed, double noise_scale, const std::string& out_path) {
    const Problem pb = load_problem(problem_path);
    const StateSpace k = load_controller(controller_path);
    Vector x0 = Vector::Zero(pb.plant.states());
    if (!x0_text.empty()) {
        const std::vector<double> values = parse_list(x0_text);
        require(static_cast<Index>(values.size()) == pb.plant.states(), ErrorCode::DimensionMismatch,
                "x0 needs " + std::to_string(pb.plant.states()) + " entries");
        x0 = Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
    }
    Disturbances dist;
    if (noise_seed && noise_scale > 0.0) {
        std::mt19937_64 rng(*noise_seed);
        std::normal_distribution<double> normal(0.0, noise_scale);
        const auto draw = [&](Index dim) {
            Vector v(dim);
            for (Index i = 0; i < dim; ++i) v(i) = normal(rng);
            return v;
        };
        for (int t = 0; t <= steps; ++t) {
            dist.dx.push_back(draw(pb.plant.states()));
            dist.dy.push_back(draw(pb.plant.outputs()));
            dist.du.push_back(draw(pb.plant.inputs()));
        }
    }
    const Trajectory traj = simulate(pb.plant, k, x0, steps, dist);
    if (out_path.empty()) {
        write_trajectory_csv(std::cout, traj);
    } else {
        std::ofstream out = open_out(out_path);
        write_trajectory_csv(out, traj);
    }
    return kStable;
}

int cmd_audit(const std::string& path, const std::string& form_text) {
    const Problem pb = load_problem(path);
    require(pb.fixture.has_value(), ErrorCode::InvalidArgument, path + " has no fixture blocks to audit");
    const Fixture& fx = *pb.fixture;
    const ControllerForm form = form_text.empty() ? default_form(fx.kind) : parse_form(form_text);
    const ResidualReport report = compute_residuals(fx.kind, pb.plant, fx.blocks, pb.options.grid_size);
    write_residual_report(std::cout, report);
    if (fx.kind == Kind::slp && !report.all_zero()) {
        const SlpDeltaHat dh = slp_delta_hat(pb.plant, fx.blocks, report);
        std::cout << "delta_hat_poles:";
        for (Index i = 0; i < dh.poles.size(); ++i)
            std::cout << ' ' << format_number(dh.poles(i).real()) << (dh.poles(i).imag() < 0 ? "" : "+")
                      << format_number(dh.poles(i).imag()) << 'i';
        std::cout << "\nfactorization_mismatch: " << format_number(dh.identity_mismatch) << '\n';
    }
    const CertificateResult cert = certify_or_explain(fx.kind, pb.plant, fx.blocks, report, form);
    std::cout << "controller_form: " << to_string(form) << '\n';
    print_certificate(std::cout, cert);
    const StateSpace k = recover_controller_tf(form, fx.blocks, pb.plant);
    const StabilityVerdict verdict = internal_stability(pb.plant, k);
    std::cout << "direct_internally_stable: " << (verdict.internally_stable ? "yes" : "no") << '\n'
              << "direct_spectral_radius: " << format_number(verdict.spectral_radius) << '\n';
    return exit_code(cert.verdict);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Closed-loop parameterization toolkit for discrete-time LTI output feedback"};
    app.require_subcommand(1);

    SynthOptions synth_opts;
    auto* synth = app.add_subcommand("synth", "FIR-constrained H2 synthesis, realization and certification");
    synth->add_option("problem", synth_opts.problem, "problem file (JSON)")->required();
    synth->add_option("--kind", synth_opts.kind, "slp | iop | mixed-i | mixed-ii | stable-plant | state-feedback");
    synth->add_option("--T", synth_opts.horizon, "FIR horizon");
    synth->add_option("--out", synth_opts.out, "output prefix for .ctrl, .coeffs.csv, .report.txt");
    synth->add_option("--form", synth_opts.form, "controller form to certify");
    synth->add_option("--dump-program", synth_opts.dump_program, "write the equality constraint matrix (MatrixMarket)");

    std::string table_problem;
    std::string table_kinds = "slp,iop,mixed-i,mixed-ii";
    std::string table_horizons = "10,15,20,25,30,50,75";
    auto* table = app.add_subcommand("table", "CSV table of optimal H2 norms per kind and horizon");
    table->add_option("problem", table_problem, "problem file")->required();
    table->add_option("--kinds", table_kinds, "comma-separated kinds");
    table->add_option("--horizons", table_horizons, "comma-separated horizons");

    std::string verify_problem;
    std::string verify_ctrl;
    auto* verify = app.add_subcommand("verify", "internal stability of a plant/controller pair");
    verify->add_option("problem", verify_problem, "problem file")->required();
    verify->add_option("controller", verify_ctrl, "controller file")->required();

    std::string sim_problem;
    std::string sim_ctrl;
    std::string sim_x0;
    std::string sim_out;
    int sim_steps = 100;
    std::optional<std::uint64_t> sim_seed;
    double sim_scale = 0.01;
    auto* sim = app.add_subcommand("simulate", "closed-loop trajectory as CSV");
    sim->add_option("problem", sim_problem, "problem file")->required();
    sim->add_option("controller", sim_ctrl, "controller file")->required();
    sim->add_option("--x0", sim_x0, "initial state, comma-separated");
    sim->add_option("--steps", sim_steps, "number of steps")->check(CLI::NonNegativeNumber);
    sim->add_option("--noise-seed", sim_seed, "enable Gaussian disturbances with this seed");
    sim->add_option("--noise-scale", sim_scale, "disturbance standard deviation");
    sim->add_option("--out", sim_out, "CSV path (default stdout)");

    std::string example_name;
    std::uint64_t example_seed = 0;
    auto* example = app.add_subcommand("example", "emit a built-in problem file");
    example->add_option("name", example_name, "car-following | uncontrollable-mode | slp-counterexample | random-integer")
        ->required();
    example->add_option("--seed", example_seed, "seed for random-integer");

    std::string audit_problem;
    std::string audit_form;
    auto* audit = app.add_subcommand("audit", "residuals and certificate of the fixture blocks in a problem file");
    audit->add_option("problem", audit_problem, "problem file with a fixture")->required();
    audit->add_option("--form", audit_form, "controller form");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kFailure;
    }

    try {
        if (*synth) return cmd_synth(synth_opts);
        if (*table) return cmd_table(table_problem, table_kinds, table_horizons);
        if (*verify) return cmd_verify(verify_problem, verify_ctrl);
        if (*sim) return cmd_simulate(sim_problem, sim_ctrl, sim_x0, sim_steps, sim_seed, sim_scale, sim_out);
        if (*example) {
            std::cout << example_problem(example_name, example_seed).dump(2) << '\n';
            return kStable;
        }
        if (*audit) return cmd_audit(audit_problem, audit_form);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
    return kFailure;
}
