#include <doctest.h>

#include <random>

#include "gridrisk/error.hpp"
#include "gridrisk/measurement.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace gridrisk;

TEST_CASE("two-bus topology matrix matches hand algebra") {
    const PowerNetwork net = testutil::two_bus();
    const MeasurementModel model = build_measurement_model(net);
    REQUIRE(model.m() == 3);
    REQUIRE(model.n() == 1);
    // rows: inj 1, inj 2, flow 1->2; single state column for bus 2
    CHECK(model.H(0, 0) == doctest::Approx(-2.0));
    CHECK(model.H(1, 0) == doctest::Approx(2.0));
    CHECK(model.H(2, 0) == doctest::Approx(-2.0));
    CHECK(descriptor_string(net, model.measurements[0]) == "inj:1");
    CHECK(descriptor_string(net, model.measurements[2]) == "flow:1-2");
}

TEST_CASE("full placement on the 14-bus case") {
    const PowerNetwork net = testutil::ieee14();
    const MeasurementModel model = build_measurement_model(net);
    CHECK(model.m() == 34);  // 14 injections + 20 flows
    CHECK(model.n() == 13);
    CHECK(model.m() - model.n() == 21);
}

TEST_CASE("unknown placement rule is rejected") {
    CHECK_THROWS_AS(build_measurement_model(testutil::two_bus(), "sparse"), ValidationError);
    CHECK_THROWS_AS(build_measurement_model(testutil::two_bus(), "full", -0.01),
                    ValidationError);
    CHECK_THROWS_AS(
        build_measurement_model(testutil::two_bus(), "full", 0.01, Eigen::VectorXd::Zero(3)),
        ValidationError);
}

TEST_CASE("injection rows are signed sums of incident flow rows") {
    for (const PowerNetwork& net : {testutil::triangle(), testutil::ieee14()}) {
        const MeasurementModel model = build_measurement_model(net);
        for (std::size_t i = 0; i < net.bus_count(); ++i) {
            Eigen::RowVectorXd expected = Eigen::RowVectorXd::Zero(model.H.cols());
            const int bus = net.buses()[i].id;
            for (std::size_t l : net.incident_branches(bus)) {
                const double sign = net.branches()[l].from == bus ? 1.0 : -1.0;
                expected += sign * model.H.row(static_cast<Eigen::Index>(model.flow_row[l]));
            }
            const Eigen::RowVectorXd actual =
                model.H.row(static_cast<Eigen::Index>(model.inj_row[i]));
            CHECK((actual - expected).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("dc power flow: trivial and closed-form cases") {
    const PowerNetwork net = testutil::two_bus();
    const MeasurementModel model = build_measurement_model(net);

    SUBCASE("zero injections give the zero solution") {
        const DcSolution sol = dc_power_flow(net, model, Eigen::VectorXd::Zero(2));
        CHECK(sol.x.cwiseAbs().maxCoeff() == 0.0);
        CHECK(sol.z.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("single branch behaves like a conductor") {
        Eigen::VectorXd inj(2);
        inj << 80.0, -80.0;  // 0.8 p.u. load at bus 2
        const DcSolution sol = dc_power_flow(net, model, inj);
        CHECK(sol.x[0] == doctest::Approx(-0.4).epsilon(1e-12));
        CHECK(sol.z[2] == doctest::Approx(0.8).epsilon(1e-12));  // flow 1->2
    }
}

TEST_CASE("dc power flow matches the independent oracle on the 14-bus case") {
    const PowerNetwork net = testutil::ieee14();
    const MeasurementModel model = build_measurement_model(net);
    const Eigen::VectorXd inj_mw = case_injections_mw(net);
    const DcSolution sol = dc_power_flow(net, model, inj_mw);

    std::map<int, double> inj_pu;
    for (std::size_t i = 0; i < net.bus_count(); ++i)
        inj_pu[net.buses()[i].id] = inj_mw[static_cast<Eigen::Index>(i)] / kMvaBase;
    // the oracle ignores the reference-bus injection just like the engine
    const oracle::DcOracleResult ref = oracle::dc_flow(net, inj_pu);

    for (std::size_t l = 0; l < net.branch_count(); ++l)
        CHECK(std::abs(sol.z[static_cast<Eigen::Index>(model.flow_row[l])] -
                       ref.branch_flow[l]) < 1e-8);

    SUBCASE("z = Hx and nodal balance hold") {
        CHECK((sol.z - model.H * sol.x).cwiseAbs().maxCoeff() < 1e-10);
        // non-reference injections equal the requested profile
        for (std::size_t i = 0; i < net.bus_count(); ++i) {
            if (net.buses()[i].id == net.reference_bus()) continue;
            CHECK(sol.z[static_cast<Eigen::Index>(model.inj_row[i])] ==
                  doctest::Approx(inj_pu[net.buses()[i].id]).epsilon(1e-10));
        }
    }
}

TEST_CASE("statistical peak") {
    SUBCASE("zero spread is the mean") {
        LoadScenarioSet set;
        set.mean = Eigen::VectorXd::Constant(3, 2.0);
        set.sd = Eigen::VectorXd::Zero(3);
        CHECK((statistical_peak(set, 3.0) - *set.mean).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("three-sigma arithmetic") {
        LoadScenarioSet set;
        set.mean = Eigen::VectorXd::Constant(1, 1.00);
        set.sd = Eigen::VectorXd::Constant(1, 0.05);
        CHECK(statistical_peak(set, 3.0)[0] == doctest::Approx(1.15).epsilon(1e-12));
    }
    SUBCASE("sampled scenarios approach the analytic peak") {
        std::mt19937_64 rng(7);
        std::normal_distribution<double> noise(0.0, 0.2);
        LoadScenarioSet set;
        for (int s = 0; s < 1000; ++s) {
            Eigen::VectorXd z(2);
            z << 1.0 + noise(rng), -0.5 + 0.5 * noise(rng);
            set.scenarios.push_back(z);
        }
        const Eigen::VectorXd peak = statistical_peak(set, 3.0);
        CHECK(peak[0] == doctest::Approx(1.0 + 3 * 0.2).epsilon(0.05));
        CHECK(peak[1] == doctest::Approx(-0.5 + 3 * 0.1).epsilon(0.05));
    }
    SUBCASE("monotone in the multiplier") {
        LoadScenarioSet set;
        set.mean = Eigen::VectorXd::Constant(4, -1.0);
        set.sd = Eigen::VectorXd::Constant(4, 0.3);
        const Eigen::VectorXd a = statistical_peak(set, 1.0);
        const Eigen::VectorXd b = statistical_peak(set, 2.5);
        CHECK(((b - a).array() >= 0.0).all());
    }
    SUBCASE("empty set is rejected") {
        CHECK_THROWS_AS(statistical_peak(LoadScenarioSet{}, 3.0), ValidationError);
        LoadScenarioSet set;
        set.mean = Eigen::VectorXd::Zero(2);
        set.sd = Eigen::VectorXd::Zero(2);
        CHECK_THROWS_AS(statistical_peak(set, -1.0), ValidationError);
    }
    SUBCASE("negative spread is rejected") {
        LoadScenarioSet set;
        set.mean = Eigen::VectorXd::Zero(2);
        set.sd = Eigen::VectorXd::Constant(2, -0.1);
        CHECK_THROWS_AS(statistical_peak(set, 3.0), ValidationError);
    }
}

TEST_CASE("scenario csv loading") {
    const PowerNetwork net = testutil::two_bus();
    const MeasurementModel model = build_measurement_model(net);

    SUBCASE("valid file converts MW to per-unit") {
        const std::string csv =
            "inj:1,inj:2,flow:1-2\n"
            "80,-80,80\n"
            "90,-90,90\n";
        const LoadScenarioSet set = load_scenarios_csv(csv, net, model);
        REQUIRE(set.scenarios.size() == 2);
        CHECK(set.scenarios[0][2] == doctest::Approx(0.8));
        const Eigen::VectorXd peak = statistical_peak(set, 0.0);  // mean only
        CHECK(peak[0] == doctest::Approx(0.85));
    }
    SUBCASE("bad header is rejected") {
        CHECK_THROWS_AS(load_scenarios_csv("inj:1,inj:2,flow:2-1\n1,2,3\n", net, model),
                        ValidationError);
    }
    SUBCASE("non-numeric cell is rejected") {
        CHECK_THROWS_AS(load_scenarios_csv("inj:1,inj:2,flow:1-2\n1,x,3\n", net, model),
                        ValidationError);
    }
}
