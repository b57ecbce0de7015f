#include "gridrisk/cyber.hpp"

#include <algorithm>
#include <cstdint>

#include <nlohmann/json.hpp>

#include "gridrisk/error.hpp"

namespace gridrisk {

using nlohmann::json;

void CyberGraph::validate() const {
    std::set<std::string> rtu_ids;
    for (const Rtu& r : rtus) {
        if (!(r.weight > 0.0))
            throw ValidationError("RTU '" + r.id + "' has nonpositive weight");
        if (!rtu_ids.insert(r.id).second)
            throw ValidationError("duplicate RTU id '" + r.id + "'");
    }
    for (const auto& [meter, w] : meter_weights)
        if (!(w > 0.0)) throw ValidationError("meter '" + meter + "' has nonpositive weight");
    for (const auto& [meter, rtu] : owner) {
        if (!rtu_ids.count(rtu))
            throw ValidationError("meter '" + meter + "' owned by unknown RTU '" + rtu + "'");
        if (!meter_weights.count(meter))
            throw ValidationError("owned meter '" + meter + "' has no weight entry");
    }
    for (const auto& [meter, w] : meter_weights)
        if (!owner.count(meter))
            throw ValidationError("meter '" + meter + "' has no owning RTU");
}

double CyberGraph::rtu_weight(const std::string& rtu_id) const {
    for (const Rtu& r : rtus)
        if (r.id == rtu_id) return r.weight;
    throw ValidationError("unknown RTU id '" + rtu_id + "'");
}

double CyberGraph::meter_weight(const std::string& meter_id) const {
    auto it = meter_weights.find(meter_id);
    if (it == meter_weights.end())
        throw ValidationError("meter '" + meter_id + "' is not in the cyber graph");
    return it->second;
}

CyberGraph default_cyber_graph(const PowerNetwork& net, const MeasurementModel& model,
                               double rtu_weight, double meter_weight) {
    CyberGraph g;
    for (const Bus& bus : net.buses())
        g.rtus.push_back({"rtu:" + std::to_string(bus.id), bus.id, rtu_weight});

    for (const MeasurementDescriptor& d : model.measurements) {
        const std::string meter = descriptor_string(net, d);
        g.meter_weights[meter] = meter_weight;
        const int host =
            d.kind == MeterKind::BusInjection ? d.bus : net.branches()[d.branch].from;
        const std::string rtu = "rtu:" + std::to_string(host);
        g.owner[meter] = rtu;
        g.owned[rtu].insert(meter);
    }
    g.validate();
    return g;
}

CyberGraph load_cyber_config(const std::string& json_text, const PowerNetwork& net,
                             const MeasurementModel& model, double default_rtu_weight,
                             double default_meter_weight) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("malformed cyber config: ") + e.what());
    }
    CyberGraph g = default_cyber_graph(net, model, default_rtu_weight, default_meter_weight);

    if (doc.contains("rtus")) {
        for (const json& r : doc["rtus"]) {
            const std::string id = r.at("id").get<std::string>();
            const int bus = r.at("bus").get<int>();
            const double w = r.value("weight", default_rtu_weight);
            auto it = std::find_if(g.rtus.begin(), g.rtus.end(),
                                   [&](const Rtu& x) { return x.id == id; });
            if (it == g.rtus.end())
                g.rtus.push_back({id, bus, w});
            else
                *it = {id, bus, w};
            if (r.contains("meters")) {
                for (const json& m : r["meters"]) {
                    const std::string meter = m.get<std::string>();
                    if (!g.meter_weights.count(meter))
                        throw ValidationError("cyber config assigns unknown meter '" + meter +
                                              "'");
                    g.owned[g.owner[meter]].erase(meter);
                    g.owner[meter] = id;
                    g.owned[id].insert(meter);
                }
            }
        }
    }
    if (doc.contains("meter_weights")) {
        for (auto& [meter, w] : doc["meter_weights"].items()) {
            if (!g.meter_weights.count(meter))
                throw ValidationError("cyber config weights unknown meter '" + meter + "'");
            g.meter_weights[meter] = w.get<double>();
        }
    }
    g.validate();
    return g;
}

AttackSubgraph attacking_subgraph(const PowerNetwork& net,
                                  const MeasurementModel& /*model*/, int target_bus) {
    if (!net.has_bus(target_bus))
        throw ValidationError("unknown target bus " + std::to_string(target_bus));
    if (target_bus == net.reference_bus())
        throw ValidationError("reference bus is excluded from target ranking");

    AttackSubgraph sg;
    sg.target_bus = target_bus;
    std::set<std::string> meters;
    meters.insert("inj:" + std::to_string(target_bus));
    for (std::size_t l : net.incident_branches(target_bus)) {
        meters.insert(descriptor_string(net, MeasurementDescriptor::flow(l)));
        const Branch& br = net.branches()[l];
        const int neighbor = br.from == target_bus ? br.to : br.from;
        meters.insert("inj:" + std::to_string(neighbor));
    }
    sg.required_meters.assign(meters.begin(), meters.end());
    return sg;
}

CaptureCost capture_cost(const AttackSubgraph& subgraph, const CyberGraph& graph) {
    CaptureCost cost;
    cost.unweighted = subgraph.required_meters.size();
    for (const std::string& meter : subgraph.required_meters)
        cost.weighted += graph.meter_weight(meter);
    return cost;
}

CaptureStrategy parse_strategy(const std::string& s) {
    if (s == "meter-only") return CaptureStrategy::MeterOnly;
    if (s == "rtu-only") return CaptureStrategy::RtuOnly;
    if (s == "combined") return CaptureStrategy::Combined;
    throw ValidationError("unknown capture strategy '" + s +
                          "' (expected meter-only, rtu-only or combined)");
}

std::string strategy_name(CaptureStrategy s) {
    switch (s) {
        case CaptureStrategy::MeterOnly: return "meter-only";
        case CaptureStrategy::RtuOnly: return "rtu-only";
        case CaptureStrategy::Combined: return "combined";
    }
    return "?";
}

namespace {

struct Candidate {
    double cost = 0.0;
    std::vector<std::string> rtus;
    std::vector<std::string> meters;

    // Ordering for ties: fewer RTUs first, then the lexicographically
    // smallest RTU id set.
    bool better_than(const Candidate& other) const {
        if (cost != other.cost) return cost < other.cost;
        if (rtus.size() != other.rtus.size()) return rtus.size() < other.rtus.size();
        return rtus < other.rtus;
    }
};

}  // namespace

CapturePlan min_cost_capture(const AttackSubgraph& subgraph, const CyberGraph& graph,
                             CaptureStrategy strategy) {
    for (const std::string& meter : subgraph.required_meters)
        if (!graph.meter_weights.count(meter))
            throw ValidationError("required meter '" + meter + "' is not in the cyber graph");

    CapturePlan plan;
    plan.target_bus = subgraph.target_bus;
    plan.strategy = strategy;

    if (strategy == CaptureStrategy::MeterOnly) {
        plan.meters = subgraph.required_meters;
        plan.total_cost = capture_cost(subgraph, graph).weighted;
        return plan;
    }

    // RTUs owning at least one required meter, in deterministic id order.
    std::set<std::string> relevant_set;
    for (const std::string& meter : subgraph.required_meters) {
        auto it = graph.owner.find(meter);
        if (it != graph.owner.end()) relevant_set.insert(it->second);
    }
    const std::vector<std::string> relevant(relevant_set.begin(), relevant_set.end());
    if (relevant.size() > 24)
        throw ValidationError("capture search space too large: " +
                              std::to_string(relevant.size()) + " relevant RTUs");

    std::optional<Candidate> best;
    const std::uint32_t subsets = 1u << relevant.size();
    for (std::uint32_t mask = 0; mask < subsets; ++mask) {
        Candidate cand;
        std::set<std::string> covered;
        for (std::size_t i = 0; i < relevant.size(); ++i) {
            if (!(mask & (1u << i))) continue;
            cand.rtus.push_back(relevant[i]);
            cand.cost += graph.rtu_weight(relevant[i]);
            auto it = graph.owned.find(relevant[i]);
            if (it != graph.owned.end())
                covered.insert(it->second.begin(), it->second.end());
        }
        if (strategy == CaptureStrategy::RtuOnly) {
            bool feasible = true;
            for (const std::string& meter : subgraph.required_meters)
                if (!covered.count(meter)) {
                    feasible = false;
                    break;
                }
            if (!feasible) continue;
        } else {
            for (const std::string& meter : subgraph.required_meters) {
                if (covered.count(meter)) continue;
                cand.meters.push_back(meter);
                cand.cost += graph.meter_weight(meter);
            }
        }
        if (!best || cand.better_than(*best)) best = std::move(cand);
    }
    if (!best)
        throw ValidationError("rtu-only capture infeasible for bus " +
                              std::to_string(subgraph.target_bus) +
                              ": some required meter has no owning RTU");

    plan.rtus = std::move(best->rtus);
    plan.meters = std::move(best->meters);
    plan.total_cost = best->cost;
    return plan;
}

CyberRanking rank_cyber_targets(const PowerNetwork& net, const MeasurementModel& model,
                                const CyberGraph& graph, CaptureStrategy strategy) {
    CyberRanking ranking;
    ranking.case_name = net.name();
    ranking.strategy = strategy;
    for (const Bus& bus : net.buses()) {
        if (bus.id == net.reference_bus()) continue;
        const AttackSubgraph sg = attacking_subgraph(net, model, bus.id);
        ranking.plans.push_back(min_cost_capture(sg, graph, strategy));
    }
    std::stable_sort(ranking.plans.begin(), ranking.plans.end(),
                     [](const CapturePlan& a, const CapturePlan& b) {
                         if (a.total_cost != b.total_cost) return a.total_cost < b.total_cost;
                         return a.target_bus < b.target_bus;
                     });
    return ranking;
}

}  // namespace gridrisk
