#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace gridrisk {

// System-wide MVA base. Case files carry MW; everything internal is per-unit.
inline constexpr double kMvaBase = 100.0;

struct Bus {
    int id = 0;
    double load_mw = 0.0;
    double gen_mw = 0.0;
};

struct Branch {
    int from = 0;
    int to = 0;
    double x_pu = 0.0;    // series reactance, must be > 0
    double cap_mw = 0.0;  // thermal rating, must be > 0

    double susceptance() const { return 1.0 / x_pu; }
    double cap_pu() const;
};

// Immutable physical network: buses, branches and the reference (slack) bus.
// Construction validates endpoint references, positivity of reactance and
// rating, absence of self-loops and connectivity of the graph.
class PowerNetwork {
public:
    PowerNetwork(std::string name, std::vector<Bus> buses, std::vector<Branch> branches,
                 int reference_bus);

    const std::string& name() const { return name_; }
    const std::vector<Bus>& buses() const { return buses_; }
    const std::vector<Branch>& branches() const { return branches_; }
    int reference_bus() const { return reference_bus_; }

    std::size_t bus_count() const { return buses_.size(); }
    std::size_t branch_count() const { return branches_.size(); }

    bool has_bus(int id) const { return bus_index_.count(id) != 0; }
    // Position of a bus id in buses(); throws for unknown ids.
    std::size_t bus_index(int id) const;

    // Indices into branches() of all branches touching the given bus.
    const std::vector<std::size_t>& incident_branches(int bus_id) const;
    std::size_t degree(int bus_id) const { return incident_branches(bus_id).size(); }

    // Neighbouring bus ids, ordered by incident branch position.
    std::vector<int> neighbors(int bus_id) const;

    std::string branch_label(std::size_t branch_index) const;

private:
    std::string name_;
    std::vector<Bus> buses_;
    std::vector<Branch> branches_;
    int reference_bus_;
    std::unordered_map<int, std::size_t> bus_index_;
    std::vector<std::vector<std::size_t>> incident_;  // per bus position
};

// Parses the native JSON case document:
//   {"name": ..., "ref_bus": ..., "buses": [{id, load_mw, gen_mw}, ...],
//    "branches": [{from, to, x_pu, cap_mw}, ...]}
// Malformed documents and invalid records are rejected with the offending
// record identified in the message.
PowerNetwork parse_case(const std::string& case_text);

// Serializes back to the JSON document form accepted by parse_case.
std::string serialize_case(const PowerNetwork& net);

// Converter for the MATPOWER-style table layout (mpc.bus / mpc.gen /
// mpc.branch matrices). Reads bus ids and Pd from mpc.bus, aggregates Pg per
// bus from mpc.gen, and takes x and rateA from mpc.branch. The bus with
// type 3 becomes the reference bus.
PowerNetwork parse_matpower_case(const std::string& case_text, const std::string& name = "case");

// Loads a case from disk, dispatching on content (MATPOWER .m vs JSON).
PowerNetwork load_case_file(const std::string& path);

}  // namespace gridrisk
