#pragma once

#include <random>
#include <string>
#include <vector>

#include "gridrisk/measurement.hpp"
#include "gridrisk/network.hpp"

#ifndef GRIDRISK_DATA_DIR
#define GRIDRISK_DATA_DIR "."
#endif

namespace testutil {

inline std::string data_path(const std::string& name) {
    return std::string(GRIDRISK_DATA_DIR) + "/" + name;
}

// bus 1 (ref, generator) --- bus 2 (load), x = 0.5, rating 100 MW
inline gridrisk::PowerNetwork two_bus() {
    return gridrisk::PowerNetwork(
        "two-bus", {{1, 0.0, 80.0}, {2, 80.0, 0.0}}, {{1, 2, 0.5, 100.0}}, 1);
}

// 3-bus loop: branches 1-2, 1-3, 2-3, all x = 1, bus 1 is the reference.
inline gridrisk::PowerNetwork triangle(double cap_mw = 100.0) {
    return gridrisk::PowerNetwork("triangle",
                                  {{1, 0.0, 80.0}, {2, 50.0, 0.0}, {3, 30.0, 0.0}},
                                  {{1, 2, 1.0, cap_mw}, {1, 3, 1.0, cap_mw}, {2, 3, 1.0, cap_mw}},
                                  1);
}

inline gridrisk::PowerNetwork ieee14() {
    return gridrisk::load_case_file(data_path("case14.m"));
}

// Path graph 1-2-...-n with small loads, used for scaling measurements.
inline gridrisk::PowerNetwork chain(int n_buses) {
    std::vector<gridrisk::Bus> buses;
    std::vector<gridrisk::Branch> branches;
    buses.push_back({1, 0.0, 10.0 * (n_buses - 1)});
    for (int i = 2; i <= n_buses; ++i) buses.push_back({i, 10.0, 0.0});
    for (int i = 1; i < n_buses; ++i) branches.push_back({i, i + 1, 0.1, 1000.0});
    return gridrisk::PowerNetwork("chain" + std::to_string(n_buses), std::move(buses),
                                  std::move(branches), 1);
}

// Random connected sparse network: spanning tree plus a few extra edges,
// degrees kept small so exhaustive capture searches stay tiny.
inline gridrisk::PowerNetwork random_sparse(std::mt19937_64& rng, int max_buses = 8) {
    std::uniform_int_distribution<int> nd(2, max_buses);
    const int n = nd(rng);
    std::vector<gridrisk::Bus> buses;
    for (int i = 1; i <= n; ++i) buses.push_back({i, i == 1 ? 0.0 : 10.0, i == 1 ? 10.0 * n : 0.0});

    std::vector<gridrisk::Branch> branches;
    std::vector<int> degree(n + 1, 0);
    auto connected = [&](int a, int b) {
        for (const auto& br : branches)
            if ((br.from == a && br.to == b) || (br.from == b && br.to == a)) return true;
        return false;
    };
    for (int i = 2; i <= n; ++i) {
        std::uniform_int_distribution<int> pd(1, i - 1);
        const int parent = pd(rng);
        branches.push_back({parent, i, 0.2, 100.0});
        ++degree[parent];
        ++degree[i];
    }
    std::uniform_int_distribution<int> extra(0, 2);
    const int extras = extra(rng);
    std::uniform_int_distribution<int> pick(1, n);
    for (int e = 0; e < extras; ++e) {
        const int a = pick(rng), b = pick(rng);
        if (a == b || connected(a, b) || degree[a] >= 4 || degree[b] >= 4) continue;
        branches.push_back({std::min(a, b), std::max(a, b), 0.2, 100.0});
        ++degree[a];
        ++degree[b];
    }
    return gridrisk::PowerNetwork("random", std::move(buses), std::move(branches), 1);
}

}  // namespace testutil
