#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "gridrisk/attack.hpp"
#include "gridrisk/measurement.hpp"

namespace gridrisk {

// Reactance-perturbation capability. Each equipped branch's susceptance may
// be scaled within [1 - rho, 1 + rho] of nominal; rho is capped at 0.5 so
// susceptances never approach zero.
struct MtdLimits {
    std::vector<std::size_t> perturbable_branches;  // indices into net.branches()
    double rho = 0.0;

    static MtdLimits all_branches(const PowerNetwork& net, double rho);
};

struct MtdOptions {
    std::uint64_t seed = 0;
    int restarts = 5;
    int max_iterations = 500;
    double step_tolerance = 1e-6;
    // Susceptance scale factors (one per branch) to seed the search with,
    // e.g. the optimum found at a smaller rho.
    std::optional<Eigen::VectorXd> warm_start;
};

struct MtdOutcome {
    Eigen::MatrixXd h_star;       // post-perturbation topology at the maximum
    double r_star = 0.0;          // maximized residual, p.u.
    Eigen::MatrixXd gain_star;    // WLS gain (H*^T W H*)^-1 H*^T W
    Eigen::MatrixXd delta_h;      // H - H*
    double div = 0.0;             // column-space projection norm of H* onto H
    double div_rel = 0.0;         // ||H - H*||_F / ||H||_F
    double rho_used = 0.0;
    Eigen::VectorXd scales;       // per-branch susceptance scale at the maximum
};

// Residual of the attacked measurement set evaluated against a perturbed
// topology: WLS residual of (z + a) under H_mtd with the model's weights.
// The attack a is crafted against the original topology.
double post_mtd_residual(const MeasurementModel& model, const Eigen::MatrixXd& H_mtd,
                         const Eigen::VectorXd& z, const Eigen::VectorXd& a);

// Maximizes the post-perturbation residual over the susceptance box. The
// legitimate flow component is re-solved under each candidate topology from
// the given injection profile, so only the stale attack contributes. Search:
// box vertices over the branches the attack touches, then projected
// finite-difference ascent over every perturbable branch.
MtdOutcome max_residual_over_mtd(const MeasurementModel& model, const PowerNetwork& net,
                                 const Eigen::VectorXd& injections_pu, const Eigen::VectorXd& a,
                                 const MtdLimits& limits, const MtdOptions& options = {});

struct Divergence {
    double projected = 0.0;  // || H (H^T H)^-1 H^T H_mtd ||_F
    double relative = 0.0;   // || H - H_mtd ||_F / || H ||_F
};

Divergence divergence(const Eigen::MatrixXd& H, const Eigen::MatrixXd& H_mtd);

// Per-attack outcome of the capacity sweep.
struct AttackProtection {
    int target_bus = 0;
    std::size_t target_branch = 0;
    std::string branch;                     // "<from>-<to>" label
    double attack_norm = 0.0;               // ||a||_2
    double co_pu = 0.0;                     // target-branch headroom at assessment
    std::optional<double> min_rho;          // smallest protective grid point
    double r_star_at_min_rho = 0.0;         // r* there, or at the last grid point
    double div = 0.0;
    double div_rel = 0.0;
    std::vector<std::pair<double, double>> curve;  // (rho, r_star) along the grid

    bool unprotectable() const { return !min_rho.has_value(); }
};

struct ProtectionProfile {
    std::string case_name;
    double eta = 0.0;
    std::vector<double> grid;
    std::vector<AttackProtection> entries;
};

std::vector<double> default_rho_grid();  // {0.01, 0.02, ..., 0.50}

// Sweeps MTD capacity for each attack, warm-starting each grid point with the
// previous optimum, and reports the smallest protective rho (r* > eta) or
// marks the attack unprotectable. z_assess is the measurement vector the
// attacks were built against; its injection entries define the loading that
// is re-solved under each candidate topology.
ProtectionProfile mtd_protection_sweep(const MeasurementModel& model, const PowerNetwork& net,
                                       const Eigen::VectorXd& z_assess,
                                       const std::vector<OverloadAttack>& attacks,
                                       const MtdLimits& limits_template, double eta,
                                       const std::vector<double>& grid = default_rho_grid(),
                                       std::uint64_t seed = 0);

}  // namespace gridrisk
