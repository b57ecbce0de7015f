#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "gridrisk/error.hpp"
#include "gridrisk/report.hpp"
#include "helpers.hpp"

using namespace gridrisk;

namespace {

CyberRanking fake_cyber(const std::string& case_name) {
    CyberRanking r;
    r.case_name = case_name;
    r.strategy = CaptureStrategy::Combined;
    auto plan = [&](int bus, double cost) {
        CapturePlan p;
        p.target_bus = bus;
        p.strategy = CaptureStrategy::Combined;
        p.total_cost = cost;
        return p;
    };
    r.plans = {plan(4, 2.0), plan(2, 5.0), plan(3, 8.0)};
    return r;
}

ProtectionProfile fake_physical(const std::string& case_name) {
    ProtectionProfile p;
    p.case_name = case_name;
    p.eta = 0.05;
    p.grid = {0.1, 0.2, 0.3, 0.4, 0.5};
    auto entry = [&](int bus, std::optional<double> rho, double norm) {
        AttackProtection e;
        e.target_bus = bus;
        e.target_branch = 0;
        e.branch = "x-y";
        e.attack_norm = norm;
        e.min_rho = rho;
        return e;
    };
    p.entries = {entry(2, 0.10, 1.0), entry(3, 0.40, 0.2), entry(4, std::nullopt, 0.1)};
    return p;
}

}  // namespace

TEST_CASE("combined index mixes normalized cost and exposure") {
    const CyberRanking cyber = fake_cyber("c");
    const ProtectionProfile physical = fake_physical("c");

    SUBCASE("pure cyber view ranks by cost alone") {
        const RiskReport r = combined_risk_index(cyber, physical, 1.0);
        REQUIRE(r.buses.size() == 3);
        CHECK(r.buses[0].bus == 4);  // cheapest capture
        CHECK(r.buses[1].bus == 2);
        CHECK(r.buses[2].bus == 3);
        CHECK(r.buses[0].combined_index == doctest::Approx(1.0));
        CHECK(r.buses[2].combined_index == doctest::Approx(0.0));
    }
    SUBCASE("pure physical view ranks by exposure alone") {
        const RiskReport r = combined_risk_index(cyber, physical, 0.0);
        CHECK(r.buses[0].bus == 4);  // no protective capacity exists
        CHECK(r.buses[1].bus == 3);  // needs more capacity than bus 2
        CHECK(r.buses[2].bus == 2);
        CHECK(r.buses[0].combined_index == doctest::Approx(1.0));
    }
    SUBCASE("indices stay inside the unit interval and hit both ends") {
        for (double mix : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            const RiskReport r = combined_risk_index(cyber, physical, mix);
            double lo = 1e9, hi = -1e9;
            for (const BusRisk& b : r.buses) {
                CHECK(b.combined_index >= 0.0);
                CHECK(b.combined_index <= 1.0);
                lo = std::min(lo, b.combined_index);
                hi = std::max(hi, b.combined_index);
            }
            CHECK(hi == doctest::Approx(1.0));  // bus 4 is extreme on both axes
        }
    }
    SUBCASE("case mismatch is rejected") {
        CHECK_THROWS_AS(combined_risk_index(fake_cyber("a"), fake_physical("b"), 0.5),
                        ValidationError);
        CHECK_THROWS_AS(combined_risk_index(cyber, physical, 1.5), ValidationError);
    }
}

TEST_CASE("report json round-trips the ranking") {
    RiskReport report = combined_risk_index(fake_cyber("c"), fake_physical("c"), 0.5);
    report.seed = 991;
    report.config_echo = PipelineConfig{}.to_json();
    const RiskReport again = report_from_json(report_to_json(report));
    REQUIRE(again.buses.size() == report.buses.size());
    CHECK(again.case_name == report.case_name);
    CHECK(again.seed == report.seed);
    for (std::size_t i = 0; i < report.buses.size(); ++i) {
        CHECK(again.buses[i].bus == report.buses[i].bus);
        CHECK(again.buses[i].combined_index == report.buses[i].combined_index);
        CHECK(again.buses[i].cyber_cost == report.buses[i].cyber_cost);
        CHECK(again.buses[i].physical_min_rho == report.buses[i].physical_min_rho);
    }
}

TEST_CASE("cyber ranking order is invariant to uniform weight scaling") {
    const PowerNetwork net = testutil::ieee14();
    const MeasurementModel model = build_measurement_model(net);
    const CyberGraph g1 = default_cyber_graph(net, model, 3.0, 1.0);
    const CyberGraph g2 = default_cyber_graph(net, model, 7.5, 2.5);  // everything x2.5
    const CyberRanking r1 = rank_cyber_targets(net, model, g1, CaptureStrategy::Combined);
    const CyberRanking r2 = rank_cyber_targets(net, model, g2, CaptureStrategy::Combined);
    REQUIRE(r1.plans.size() == r2.plans.size());
    for (std::size_t i = 0; i < r1.plans.size(); ++i) {
        CHECK(r1.plans[i].target_bus == r2.plans[i].target_bus);
        CHECK(r2.plans[i].total_cost == doctest::Approx(2.5 * r1.plans[i].total_cost));
    }
}

TEST_CASE("pipeline configuration parsing") {
    PipelineConfig cfg;
    cfg.case_path = "case.m";
    cfg.sweep_begin = 0.05;
    cfg.sweep_step = 0.05;
    cfg.sweep_end = 0.2;
    const PipelineConfig again = PipelineConfig::from_json(cfg.to_json());
    CHECK(again.case_path == "case.m");
    const std::vector<double> grid = again.rho_grid();
    const std::vector<double> expect = {0.05, 0.1, 0.15, 0.2};
    REQUIRE(grid.size() == expect.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(grid[i] == doctest::Approx(expect[i]).epsilon(1e-12));
    CHECK_THROWS_AS(PipelineConfig::from_json("nope"), ValidationError);

    PipelineConfig bad;
    bad.sweep_step = -1.0;
    CHECK_THROWS_AS(bad.rho_grid(), ValidationError);
}

TEST_CASE("pipeline writes all artifacts end to end") {
    namespace fs = std::filesystem;
    const fs::path out = fs::temp_directory_path() / "gridrisk_test_pipeline";
    fs::remove_all(out);

    PipelineConfig cfg;
    cfg.case_path = testutil::data_path("case14.m");
    cfg.out_dir = out.string();
    cfg.sweep_begin = 0.25;  // coarse grid keeps this test quick
    cfg.sweep_step = 0.25;
    cfg.sweep_end = 0.5;
    cfg.seed = 5;

    const PipelineArtifacts artifacts = run_pipeline(cfg);
    CHECK(artifacts.written_files.size() == 4);
    for (const std::string& f : artifacts.written_files) CHECK(fs::exists(f));
    CHECK(fs::exists(out / "rankings.csv"));
    CHECK(fs::exists(out / "mtd.csv"));
    CHECK(fs::exists(out / "mtd_curves.csv"));
    CHECK(fs::exists(out / "report.json"));

    // the cheapest capture that is also beyond reactance-based protection
    // tops the combined view
    REQUIRE(!artifacts.report.buses.empty());
    CHECK(artifacts.report.buses.front().bus == 8);
    CHECK(artifacts.report.buses.front().combined_index == doctest::Approx(1.0));
    CHECK(!artifacts.report.buses.front().physical_min_rho.has_value());

    // the report on disk reproduces the in-memory ranking
    std::ifstream in(out / "report.json");
    std::stringstream buf;
    buf << in.rdbuf();
    const RiskReport reread = report_from_json(buf.str());
    REQUIRE(reread.buses.size() == artifacts.report.buses.size());
    for (std::size_t i = 0; i < reread.buses.size(); ++i)
        CHECK(reread.buses[i].bus == artifacts.report.buses[i].bus);

    SUBCASE("strategy and weight flags reach the plans") {
        PipelineConfig weighted = cfg;
        weighted.strategy = "rtu-only";
        weighted.rtu_weight = 3.0;
        weighted.out_dir = (out / "weighted").string();
        const PipelineArtifacts a = run_pipeline(weighted);
        for (const CapturePlan& p : a.cyber.plans) {
            CHECK(p.strategy == CaptureStrategy::RtuOnly);
            CHECK(p.meters.empty());
            // every cost is a multiple of the RTU weight
            CHECK(std::abs(p.total_cost / 3.0 - std::round(p.total_cost / 3.0)) < 1e-12);
        }
    }
    SUBCASE("a loading history file replaces the synthesized peak") {
        const PowerNetwork net = load_case_file(cfg.case_path);
        const MeasurementModel model = build_measurement_model(net);
        const DcSolution base = dc_power_flow(net, model, case_injections_mw(net));
        std::string csv;
        for (std::size_t j = 0; j < model.m(); ++j) {
            if (j) csv += ',';
            csv += descriptor_string(net, model.measurements[j]);
        }
        csv += '\n';
        for (int row = 0; row < 3; ++row) {
            for (Eigen::Index j = 0; j < base.z.size(); ++j) {
                if (j) csv += ',';
                csv += std::to_string(base.z[j] * kMvaBase);
            }
            csv += '\n';
        }
        const fs::path scen = out / "history.csv";
        std::ofstream(scen) << csv;

        PipelineConfig with_history = cfg;
        with_history.scenarios_path = scen.string();
        with_history.out_dir = (out / "history_run").string();
        const PipelineArtifacts a = run_pipeline(with_history);
        // identical snapshots: zero spread, peak equals the base case, so
        // headroom is wider than at the synthesized peak
        REQUIRE(!a.physical.entries.empty());
        CHECK(a.physical.entries.front().co_pu >
              artifacts.physical.entries.front().co_pu);
    }
    fs::remove_all(out);
}

TEST_CASE("attack list export") {
    const PowerNetwork net = testutil::two_bus();
    const MeasurementModel model = build_measurement_model(net);
    const DcSolution base = dc_power_flow(net, model, case_injections_mw(net));
    const auto attacks = enumerate_overload_attacks(model, net, base.z, 0.0);
    const std::string csv = attacks_csv(attacks, model, net, base.z);
    CHECK(csv ==
          "bus,branch,c_n,a_norm,co\n"
          "2,1-2,-0.1,0.346410161514,0.2\n");
}

TEST_CASE("pipeline failures name the failing stage") {
    PipelineConfig cfg;
    cfg.case_path = "/nonexistent/case.m";
    try {
        run_pipeline(cfg);
        FAIL("expected a stage error");
    } catch (const StageError& e) {
        CHECK(e.stage() == "parse_case");
    }

    PipelineConfig bad_strategy;
    bad_strategy.case_path = testutil::data_path("case14.m");
    bad_strategy.strategy = "everything";
    try {
        run_pipeline(bad_strategy);
        FAIL("expected a stage error");
    } catch (const StageError& e) {
        CHECK(e.stage() == "cyber_assessment");
    }
}
