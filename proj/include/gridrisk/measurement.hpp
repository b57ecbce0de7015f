#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "gridrisk/network.hpp"

namespace gridrisk {

enum class MeterKind { BusInjection, BranchFlow };

// One telemetered quantity. BusInjection carries the bus id; BranchFlow the
// index into PowerNetwork::branches(), measured at the from end.
struct MeasurementDescriptor {
    MeterKind kind;
    int bus = 0;
    std::size_t branch = 0;

    static MeasurementDescriptor injection(int bus_id) {
        return {MeterKind::BusInjection, bus_id, 0};
    }
    static MeasurementDescriptor flow(std::size_t branch_index) {
        return {MeterKind::BranchFlow, 0, branch_index};
    }
};

// Canonical descriptor string: "inj:<bus>" or "flow:<from>-<to>". These are
// the meter ids used by the cyber graph and by scenario CSV headers.
std::string descriptor_string(const PowerNetwork& net, const MeasurementDescriptor& d);

// Linear measurement model z = Hx + e over the reduced state (reference bus
// angle eliminated). Rows are ordered: all bus injections in bus order, then
// all branch flows in branch order.
struct MeasurementModel {
    std::vector<MeasurementDescriptor> measurements;
    Eigen::MatrixXd H;        // m x n
    Eigen::VectorXd weights;  // diagonal of W, all > 0
    double sigma = 0.0;       // measurement noise standard deviation (p.u.)

    std::vector<int> state_column;       // per bus position; -1 for the reference bus
    std::vector<std::size_t> inj_row;    // per bus position
    std::vector<std::size_t> flow_row;   // per branch index

    std::size_t m() const { return measurements.size(); }
    std::size_t n() const { return static_cast<std::size_t>(H.cols()); }
};

// Assembles the reduced topology matrix for the full placement from per-branch
// susceptances. Flow row of branch l (i -> j): +b_l at column(i), -b_l at
// column(j); injection rows are the signed sums of incident flow rows.
Eigen::MatrixXd assemble_topology(const PowerNetwork& net, const Eigen::VectorXd& susceptances);

// Builds the measurement model. The only placement rule in scope is "full":
// one injection meter per bus plus one from-end flow meter per branch.
MeasurementModel build_measurement_model(const PowerNetwork& net,
                                         const std::string& placement = "full",
                                         double sigma = 0.01,
                                         std::optional<Eigen::VectorXd> weights = std::nullopt);

// Solves the reduced DC network equations for the state given per-bus net
// injections (p.u., bus order). The slack absorbs any imbalance. H may be a
// perturbed topology with the same row/column layout as the model.
Eigen::VectorXd solve_dc_state(const MeasurementModel& model, const Eigen::MatrixXd& H,
                               const PowerNetwork& net, const Eigen::VectorXd& injections_pu);

struct DcSolution {
    Eigen::VectorXd x;  // reduced state, rad
    Eigen::VectorXd z;  // measurement vector, p.u. (z = Hx, noiseless)
};

// Base-case DC power flow for a per-bus net injection profile in MW.
DcSolution dc_power_flow(const PowerNetwork& net, const MeasurementModel& model,
                         const Eigen::VectorXd& injections_mw);

// Net injections (gen - load, MW) straight from the case data, bus order.
Eigen::VectorXd case_injections_mw(const PowerNetwork& net);

// Historical loading snapshots, or a parametric mean/spread description.
// All values per-unit, measurement order of the model.
struct LoadScenarioSet {
    std::vector<Eigen::VectorXd> scenarios;
    std::optional<Eigen::VectorXd> mean;
    std::optional<Eigen::VectorXd> sd;
};

// z_s = mean + k * sd, elementwise. For sampled sets the mean and population
// standard deviation are computed first. Default k = 3.
Eigen::VectorXd statistical_peak(const LoadScenarioSet& scenarios, double k = 3.0);

// Default synthesis when no history is available: sd = 0.1 * |mean|.
LoadScenarioSet synthesize_scenarios(const Eigen::VectorXd& z_base);

// CSV loader: one row per snapshot, one column per measurement, header cells
// are descriptor strings. Values in MW, converted to p.u.
LoadScenarioSet load_scenarios_csv(const std::string& csv_text, const PowerNetwork& net,
                                   const MeasurementModel& model);

}  // namespace gridrisk
