#include "gridrisk/network.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <queue>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gridrisk/error.hpp"

namespace gridrisk {

using nlohmann::json;

double Branch::cap_pu() const { return cap_mw / kMvaBase; }

PowerNetwork::PowerNetwork(std::string name, std::vector<Bus> buses, std::vector<Branch> branches,
                           int reference_bus)
    : name_(std::move(name)),
      buses_(std::move(buses)),
      branches_(std::move(branches)),
      reference_bus_(reference_bus) {
    if (buses_.empty()) throw ValidationError("case has no buses");

    for (std::size_t i = 0; i < buses_.size(); ++i) {
        auto [it, inserted] = bus_index_.emplace(buses_[i].id, i);
        if (!inserted)
            throw ValidationError("duplicate bus id " + std::to_string(buses_[i].id));
    }
    if (!has_bus(reference_bus_))
        throw ValidationError("reference bus " + std::to_string(reference_bus_) +
                              " is not in the bus table");

    incident_.resize(buses_.size());
    for (std::size_t l = 0; l < branches_.size(); ++l) {
        const Branch& br = branches_[l];
        const std::string label =
            "branch " + std::to_string(br.from) + "-" + std::to_string(br.to);
        if (!has_bus(br.from) || !has_bus(br.to))
            throw ValidationError(label + " references a nonexistent bus");
        if (br.from == br.to) throw ValidationError(label + " is a self-loop");
        if (!(br.x_pu > 0.0)) throw ValidationError(label + " has nonpositive reactance");
        if (!(br.cap_mw > 0.0)) throw ValidationError(label + " has nonpositive capacity");
        incident_[bus_index_.at(br.from)].push_back(l);
        incident_[bus_index_.at(br.to)].push_back(l);
    }

    // connectivity check
    std::vector<char> seen(buses_.size(), 0);
    std::queue<std::size_t> frontier;
    frontier.push(0);
    seen[0] = 1;
    std::size_t reached = 1;
    while (!frontier.empty()) {
        std::size_t i = frontier.front();
        frontier.pop();
        for (std::size_t l : incident_[i]) {
            const Branch& br = branches_[l];
            std::size_t j = bus_index_.at(br.from) == i ? bus_index_.at(br.to)
                                                        : bus_index_.at(br.from);
            if (!seen[j]) {
                seen[j] = 1;
                ++reached;
                frontier.push(j);
            }
        }
    }
    if (reached != buses_.size()) {
        for (std::size_t i = 0; i < buses_.size(); ++i)
            if (!seen[i])
                throw ValidationError("graph is disconnected: bus " +
                                      std::to_string(buses_[i].id) +
                                      " is unreachable from bus " + std::to_string(buses_[0].id));
    }
}

std::size_t PowerNetwork::bus_index(int id) const {
    auto it = bus_index_.find(id);
    if (it == bus_index_.end())
        throw ValidationError("unknown bus id " + std::to_string(id));
    return it->second;
}

const std::vector<std::size_t>& PowerNetwork::incident_branches(int bus_id) const {
    return incident_[bus_index(bus_id)];
}

std::vector<int> PowerNetwork::neighbors(int bus_id) const {
    std::vector<int> out;
    for (std::size_t l : incident_branches(bus_id)) {
        const Branch& br = branches_[l];
        out.push_back(br.from == bus_id ? br.to : br.from);
    }
    return out;
}

std::string PowerNetwork::branch_label(std::size_t branch_index) const {
    const Branch& br = branches_.at(branch_index);
    return std::to_string(br.from) + "-" + std::to_string(br.to);
}

namespace {

double require_number(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key) || !j[key].is_number())
        throw ValidationError(where + ": missing or non-numeric field '" + key + "'");
    return j[key].get<double>();
}

int require_int(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key) || !j[key].is_number_integer())
        throw ValidationError(where + ": missing or non-integer field '" + key + "'");
    return j[key].get<int>();
}

}  // namespace

PowerNetwork parse_case(const std::string& case_text) {
    json doc;
    try {
        doc = json::parse(case_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("malformed case document: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("buses") || !doc.contains("branches"))
        throw ValidationError("case document must contain 'buses' and 'branches' arrays");

    std::vector<Bus> buses;
    for (std::size_t i = 0; i < doc["buses"].size(); ++i) {
        const json& b = doc["buses"][i];
        const std::string where = "bus record " + std::to_string(i);
        Bus bus;
        bus.id = require_int(b, "id", where);
        bus.load_mw = b.value("load_mw", 0.0);
        bus.gen_mw = b.value("gen_mw", 0.0);
        buses.push_back(bus);
    }
    std::vector<Branch> branches;
    for (std::size_t i = 0; i < doc["branches"].size(); ++i) {
        const json& b = doc["branches"][i];
        const std::string where = "branch record " + std::to_string(i);
        Branch br;
        br.from = require_int(b, "from", where);
        br.to = require_int(b, "to", where);
        br.x_pu = require_number(b, "x_pu", where);
        br.cap_mw = require_number(b, "cap_mw", where);
        branches.push_back(br);
    }
    int ref = doc.contains("ref_bus") ? doc["ref_bus"].get<int>()
                                      : (buses.empty() ? 0 : buses.front().id);
    return PowerNetwork(doc.value("name", "case"), std::move(buses), std::move(branches), ref);
}

std::string serialize_case(const PowerNetwork& net) {
    json doc;
    doc["name"] = net.name();
    doc["ref_bus"] = net.reference_bus();
    doc["buses"] = json::array();
    for (const Bus& b : net.buses())
        doc["buses"].push_back({{"id", b.id}, {"load_mw", b.load_mw}, {"gen_mw", b.gen_mw}});
    doc["branches"] = json::array();
    for (const Branch& br : net.branches())
        doc["branches"].push_back(
            {{"from", br.from}, {"to", br.to}, {"x_pu", br.x_pu}, {"cap_mw", br.cap_mw}});
    return doc.dump(2);
}

namespace {

// Extracts the numeric rows of "mpc.<table> = [ ... ];".
std::vector<std::vector<double>> matpower_table(const std::string& text,
                                                const std::string& table) {
    const std::string key = "mpc." + table;
    std::size_t pos = text.find(key);
    if (pos == std::string::npos)
        throw ValidationError("MATPOWER case: table '" + key + "' not found");
    pos = text.find('[', pos);
    std::size_t end = text.find(']', pos);
    if (pos == std::string::npos || end == std::string::npos)
        throw ValidationError("MATPOWER case: unterminated table '" + key + "'");

    std::vector<std::vector<double>> rows;
    std::istringstream body(text.substr(pos + 1, end - pos - 1));
    std::string line;
    while (std::getline(body, line, ';')) {
        // strip comments
        auto cut = line.find('%');
        if (cut != std::string::npos) line.erase(cut);
        std::istringstream cells(line);
        std::vector<double> row;
        double v;
        while (cells >> v) row.push_back(v);
        if (!row.empty()) rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

PowerNetwork parse_matpower_case(const std::string& case_text, const std::string& name) {
    auto bus_rows = matpower_table(case_text, "bus");
    auto branch_rows = matpower_table(case_text, "branch");

    std::map<int, double> gen_by_bus;
    try {
        for (const auto& row : matpower_table(case_text, "gen")) {
            if (row.size() < 2) continue;
            gen_by_bus[static_cast<int>(row[0])] += row[1];  // Pg
        }
    } catch (const ValidationError&) {
        // no generator table: all buses are pure load
    }

    std::vector<Bus> buses;
    int ref = 0;
    for (const auto& row : bus_rows) {
        if (row.size() < 3)
            throw ValidationError("MATPOWER bus row needs at least [id type Pd]");
        Bus b;
        b.id = static_cast<int>(row[0]);
        b.load_mw = row[2];
        auto g = gen_by_bus.find(b.id);
        b.gen_mw = g == gen_by_bus.end() ? 0.0 : g->second;
        if (static_cast<int>(row[1]) == 3) ref = b.id;
        buses.push_back(b);
    }
    if (ref == 0 && !buses.empty()) ref = buses.front().id;

    std::vector<Branch> branches;
    for (const auto& row : branch_rows) {
        if (row.size() < 6)
            throw ValidationError("MATPOWER branch row needs at least [f t r x b rateA]");
        Branch br;
        br.from = static_cast<int>(row[0]);
        br.to = static_cast<int>(row[1]);
        br.x_pu = row[3];
        br.cap_mw = row[5];
        branches.push_back(br);
    }
    return PowerNetwork(name, std::move(buses), std::move(branches), ref);
}

PowerNetwork load_case_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open case file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();

    // MATPOWER case files declare "mpc.bus"; everything else is treated as JSON.
    if (text.find("mpc.bus") != std::string::npos) {
        std::string name = path;
        auto slash = name.find_last_of("/\\");
        if (slash != std::string::npos) name.erase(0, slash + 1);
        auto dot = name.find_last_of('.');
        if (dot != std::string::npos) name.erase(dot);
        return parse_matpower_case(text, name);
    }
    return parse_case(text);
}

}  // namespace gridrisk
