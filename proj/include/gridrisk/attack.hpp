#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gridrisk/measurement.hpp"

namespace gridrisk {

// State-space perturbation. For single-bus attacks exactly one entry is
// nonzero, at the target bus's state column.
struct StatePerturbation {
    Eigen::VectorXd c;   // length n, rad
    int target_bus = 0;
};

// Per-branch headroom between rating and present flow magnitude (p.u.).
// Negative entries mean the branch is already loaded past its rating.
struct CapacityOverhead {
    Eigen::VectorXd co;  // length = branch count
};

struct OverloadAttack {
    int target_bus = 0;
    std::size_t target_branch = 0;
    StatePerturbation c;
    Eigen::VectorXd a;       // = H * c, length m
    double overload_margin = 0.0;
};

// a = H c. Adding a to any measurement vector leaves the WLS residual
// unchanged as long as the topology H is unchanged.
Eigen::VectorXd craft_attack(const MeasurementModel& model, const Eigen::VectorXd& c);

// z_a = z + a, elementwise; lengths must match.
Eigen::VectorXd apply_attack(const Eigen::VectorXd& z, const Eigen::VectorXd& a);

CapacityOverhead capacity_overhead(const Eigen::VectorXd& z, const PowerNetwork& net,
                                   const MeasurementModel& model);

// Smallest single-bus perturbation that drives the target branch flow
// magnitude to cap * (1 + epsilon), pushing in the prevailing flow direction.
// The target bus must be a non-reference endpoint with a nonzero topology
// coefficient on the target branch row.
OverloadAttack min_overload_attack(const MeasurementModel& model, const PowerNetwork& net,
                                   const Eigen::VectorXd& z, int target_bus,
                                   std::size_t target_branch, double epsilon);

// All valid (bus, branch) single-bus overload attacks: both endpoints of every
// branch, reference bus excluded. Deterministic order (branch, then endpoint).
std::vector<OverloadAttack> enumerate_overload_attacks(const MeasurementModel& model,
                                                       const PowerNetwork& net,
                                                       const Eigen::VectorXd& z, double epsilon);

}  // namespace gridrisk
