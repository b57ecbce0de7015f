#include "gridrisk/attack.hpp"

#include <cmath>

#include "gridrisk/error.hpp"

namespace gridrisk {

Eigen::VectorXd craft_attack(const MeasurementModel& model, const Eigen::VectorXd& c) {
    if (c.size() != model.H.cols())
        throw ValidationError("perturbation length does not match the state dimension");
    return model.H * c;
}

Eigen::VectorXd apply_attack(const Eigen::VectorXd& z, const Eigen::VectorXd& a) {
    if (z.size() != a.size())
        throw ValidationError("attack vector length does not match the measurement vector");
    return z + a;
}

CapacityOverhead capacity_overhead(const Eigen::VectorXd& z, const PowerNetwork& net,
                                   const MeasurementModel& model) {
    if (static_cast<std::size_t>(z.size()) != model.m())
        throw ValidationError("measurement vector length does not match the model");
    CapacityOverhead out;
    out.co.resize(static_cast<Eigen::Index>(net.branch_count()));
    for (std::size_t l = 0; l < net.branch_count(); ++l) {
        const double flow = z[static_cast<Eigen::Index>(model.flow_row[l])];
        out.co[static_cast<Eigen::Index>(l)] = net.branches()[l].cap_pu() - std::abs(flow);
    }
    return out;
}

OverloadAttack min_overload_attack(const MeasurementModel& model, const PowerNetwork& net,
                                   const Eigen::VectorXd& z, int target_bus,
                                   std::size_t target_branch, double epsilon) {
    if (target_branch >= net.branch_count())
        throw ValidationError("target branch index out of range");
    const Branch& br = net.branches()[target_branch];
    if (br.from != target_bus && br.to != target_bus)
        throw ValidationError("target branch " + net.branch_label(target_branch) +
                              " is not incident to bus " + std::to_string(target_bus));
    if (target_bus == net.reference_bus())
        throw ValidationError("reference bus angle is not a state; pick the other endpoint");
    if (epsilon < 0.0) throw ValidationError("overload margin must be >= 0");

    const int col = model.state_column[net.bus_index(target_bus)];
    const Eigen::Index flow_row = static_cast<Eigen::Index>(model.flow_row[target_branch]);
    const double h = model.H(flow_row, col);
    if (h == 0.0)
        throw ValidationError("target branch has no topology coefficient at bus " +
                              std::to_string(target_bus));

    const double flow = z[flow_row];
    const double limit = br.cap_pu() * (1.0 + epsilon);

    OverloadAttack attack;
    attack.target_bus = target_bus;
    attack.target_branch = target_branch;
    attack.overload_margin = epsilon;
    attack.c.target_bus = target_bus;
    attack.c.c = Eigen::VectorXd::Zero(model.H.cols());

    if (std::abs(flow) < limit) {
        // Push the flow further in its prevailing direction; that direction
        // needs the smaller angle change.
        const double target = flow >= 0.0 ? limit : -limit;
        attack.c.c[col] = (target - flow) / h;
    }
    attack.a = model.H * attack.c.c;
    return attack;
}

std::vector<OverloadAttack> enumerate_overload_attacks(const MeasurementModel& model,
                                                       const PowerNetwork& net,
                                                       const Eigen::VectorXd& z, double epsilon) {
    std::vector<OverloadAttack> attacks;
    for (std::size_t l = 0; l < net.branch_count(); ++l) {
        const Branch& br = net.branches()[l];
        for (int bus : {br.from, br.to}) {
            if (bus == net.reference_bus()) continue;
            attacks.push_back(min_overload_attack(model, net, z, bus, l, epsilon));
        }
    }
    return attacks;
}

}  // namespace gridrisk
