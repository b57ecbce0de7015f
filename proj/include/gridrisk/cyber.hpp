#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "gridrisk/measurement.hpp"
#include "gridrisk/network.hpp"

namespace gridrisk {

struct Rtu {
    std::string id;
    int bus = 0;
    double weight = 1.0;
};

// Overlaid communications graph: RTU nodes with the meters they aggregate,
// plus per-meter capture weights. Meter ids are descriptor strings
// ("inj:<bus>", "flow:<from>-<to>"). Every meter has exactly one owner.
struct CyberGraph {
    std::vector<Rtu> rtus;
    std::map<std::string, double> meter_weights;
    std::map<std::string, std::string> owner;              // meter id -> rtu id
    std::map<std::string, std::set<std::string>> owned;    // rtu id -> meter ids

    void validate() const;
    double rtu_weight(const std::string& rtu_id) const;
    double meter_weight(const std::string& meter_id) const;
};

// Default layout: one RTU per bus ("rtu:<bus>"); the RTU at bus i owns
// inj:<i> and every flow metered at i (from-end rule).
CyberGraph default_cyber_graph(const PowerNetwork& net, const MeasurementModel& model,
                               double rtu_weight = 1.0, double meter_weight = 1.0);

// JSON override:
//   {"rtus": [{"id", "bus", "weight", "meters": [...]}, ...],
//    "meter_weights": {"<meter id>": w, ...}}
// Meters not listed under any RTU keep the default owner; weights not listed
// keep the supplied default.
CyberGraph load_cyber_config(const std::string& json_text, const PowerNetwork& net,
                             const MeasurementModel& model, double default_rtu_weight = 1.0,
                             double default_meter_weight = 1.0);

// Meters an intruder must control to change the target bus state without
// tripping residual checks: the target injection, every incident flow, and
// every neighbour injection. Size 2*deg+1 under full placement.
struct AttackSubgraph {
    int target_bus = 0;
    std::vector<std::string> required_meters;  // sorted
};

AttackSubgraph attacking_subgraph(const PowerNetwork& net, const MeasurementModel& model,
                                  int target_bus);

// Unweighted meter count and weighted capture cost of a subgraph.
struct CaptureCost {
    std::size_t unweighted = 0;  // MuC
    double weighted = 0.0;       // MwC
};

CaptureCost capture_cost(const AttackSubgraph& subgraph, const CyberGraph& graph);

enum class CaptureStrategy { MeterOnly, RtuOnly, Combined };

CaptureStrategy parse_strategy(const std::string& s);
std::string strategy_name(CaptureStrategy s);

struct CapturePlan {
    int target_bus = 0;
    CaptureStrategy strategy = CaptureStrategy::MeterOnly;
    std::vector<std::string> rtus;    // sorted
    std::vector<std::string> meters;  // sorted, individually captured meters
    double total_cost = 0.0;
};

// Minimum-cost capture for one subgraph. RTU-only and combined searches are
// exhaustive over the RTUs owning at least one required meter; combined buys
// every uncovered meter individually. Ties break toward fewer RTUs, then the
// lexicographically smallest RTU id set.
CapturePlan min_cost_capture(const AttackSubgraph& subgraph, const CyberGraph& graph,
                             CaptureStrategy strategy);

struct CyberRanking {
    std::string case_name;
    CaptureStrategy strategy = CaptureStrategy::Combined;
    std::vector<CapturePlan> plans;  // ascending cost, ties by bus id
};

// Ranks every non-reference bus by optimal capture cost.
CyberRanking rank_cyber_targets(const PowerNetwork& net, const MeasurementModel& model,
                                const CyberGraph& graph, CaptureStrategy strategy);

}  // namespace gridrisk
