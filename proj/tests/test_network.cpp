#include <doctest.h>

#include "gridrisk/error.hpp"
#include "gridrisk/network.hpp"
#include "helpers.hpp"

using namespace gridrisk;

TEST_CASE("ieee 14-bus fixture loads with expected dimensions") {
    const PowerNetwork net = testutil::ieee14();
    CHECK(net.bus_count() == 14);
    CHECK(net.branch_count() == 20);
    CHECK(net.reference_bus() == 1);
    CHECK(net.degree(6) == 4);
    CHECK(net.degree(8) == 1);
}

TEST_CASE("two-bus json document parses to one reduced state") {
    const std::string doc = R"({
        "name": "tiny",
        "ref_bus": 1,
        "buses": [{"id": 1, "gen_mw": 80}, {"id": 2, "load_mw": 80}],
        "branches": [{"from": 1, "to": 2, "x_pu": 0.5, "cap_mw": 100}]
    })";
    const PowerNetwork net = parse_case(doc);
    CHECK(net.bus_count() == 2);
    CHECK(net.branch_count() == 1);
    CHECK(net.bus_count() - 1 == 1);  // single state after reference elimination
}

TEST_CASE("branch to a nonexistent bus is rejected naming the branch") {
    const std::string doc = R"({
        "buses": [{"id": 1}, {"id": 2}],
        "branches": [{"from": 1, "to": 99, "x_pu": 0.5, "cap_mw": 100}],
        "ref_bus": 1
    })";
    CHECK_THROWS_WITH_AS(parse_case(doc), doctest::Contains("1-99"), ValidationError);
}

TEST_CASE("invalid records are rejected") {
    CHECK_THROWS_AS(PowerNetwork("t", {{1, 0, 0}, {2, 0, 0}}, {{1, 2, -0.1, 10}}, 1),
                    ValidationError);
    CHECK_THROWS_AS(PowerNetwork("t", {{1, 0, 0}, {2, 0, 0}}, {{1, 2, 0.1, 0}}, 1),
                    ValidationError);
    CHECK_THROWS_AS(PowerNetwork("t", {{1, 0, 0}, {2, 0, 0}}, {{1, 1, 0.1, 10}}, 1),
                    ValidationError);
    // disconnected
    CHECK_THROWS_WITH_AS(
        PowerNetwork("t", {{1, 0, 0}, {2, 0, 0}, {3, 0, 0}}, {{1, 2, 0.1, 10}}, 1),
        doctest::Contains("disconnected"), ValidationError);
    // unknown reference
    CHECK_THROWS_AS(PowerNetwork("t", {{1, 0, 0}, {2, 0, 0}}, {{1, 2, 0.1, 10}}, 9),
                    ValidationError);
    // malformed document
    CHECK_THROWS_AS(parse_case("not json"), ValidationError);
}

TEST_CASE("parse -> serialize -> parse round-trips identically") {
    const PowerNetwork net = testutil::ieee14();
    const PowerNetwork again = parse_case(serialize_case(net));
    REQUIRE(again.bus_count() == net.bus_count());
    REQUIRE(again.branch_count() == net.branch_count());
    CHECK(again.reference_bus() == net.reference_bus());
    CHECK(again.name() == net.name());
    for (std::size_t i = 0; i < net.bus_count(); ++i) {
        CHECK(again.buses()[i].id == net.buses()[i].id);
        CHECK(again.buses()[i].load_mw == net.buses()[i].load_mw);
        CHECK(again.buses()[i].gen_mw == net.buses()[i].gen_mw);
    }
    for (std::size_t l = 0; l < net.branch_count(); ++l) {
        CHECK(again.branches()[l].from == net.branches()[l].from);
        CHECK(again.branches()[l].to == net.branches()[l].to);
        CHECK(again.branches()[l].x_pu == net.branches()[l].x_pu);
        CHECK(again.branches()[l].cap_mw == net.branches()[l].cap_mw);
    }
}

TEST_CASE("matpower converter picks up loads, generation and ratings") {
    const PowerNetwork net = testutil::ieee14();
    const Bus& bus3 = net.buses()[net.bus_index(3)];
    CHECK(bus3.load_mw == doctest::Approx(94.2));
    const Bus& bus1 = net.buses()[net.bus_index(1)];
    CHECK(bus1.gen_mw == doctest::Approx(232.4));
    CHECK(net.branches()[0].x_pu == doctest::Approx(0.05917));
    CHECK(net.branches()[0].cap_mw > 0.0);
}
