#include "gridrisk/report.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gridrisk/attack.hpp"
#include "gridrisk/error.hpp"
#include "gridrisk/estimation.hpp"
#include "gridrisk/version.hpp"

namespace gridrisk {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& items, char sep = ';') {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out.push_back(sep);
        out += items[i];
    }
    return out;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

}  // namespace

RiskReport combined_risk_index(const CyberRanking& cyber, const ProtectionProfile& physical,
                               double mix) {
    if (cyber.case_name != physical.case_name)
        throw ValidationError("cyber assessment is for case '" + cyber.case_name +
                              "' but physical assessment is for case '" + physical.case_name +
                              "'");
    if (mix < 0.0 || mix > 1.0) throw ValidationError("mix must lie in [0, 1]");

    struct Exposure {
        std::optional<double> min_rho;
        bool unprotectable = false;
        double attack_norm = 0.0;
        std::string branch;
    };
    // Worst incident attack per bus: unprotectable beats any finite rho,
    // larger protective rho beats smaller.
    std::map<int, Exposure> exposure;
    for (const AttackProtection& e : physical.entries) {
        Exposure& x = exposure[e.target_bus];
        const bool worse = e.unprotectable() ? !x.unprotectable
                                             : (!x.unprotectable && x.min_rho &&
                                                *e.min_rho > *x.min_rho);
        const bool first = !x.unprotectable && !x.min_rho;
        if (first || worse) {
            x.min_rho = e.min_rho;
            x.unprotectable = e.unprotectable();
            x.attack_norm = e.attack_norm;
            x.branch = e.branch;
        }
    }

    RiskReport report;
    report.case_name = cyber.case_name;
    report.engine_version = kEngineVersion;
    report.mix = mix;

    double cost_lo = 0.0, cost_hi = 0.0;
    if (!cyber.plans.empty()) {
        cost_lo = cyber.plans.front().total_cost;
        cost_hi = cyber.plans.front().total_cost;
        for (const CapturePlan& p : cyber.plans) {
            cost_lo = std::min(cost_lo, p.total_cost);
            cost_hi = std::max(cost_hi, p.total_cost);
        }
    }
    // Exposure values are the protective rho levels; a bus no capacity level
    // protects sits one grid step beyond the sweep maximum so it normalizes
    // strictly above every protectable bus.
    double unprotectable_value = 1.0;
    if (!physical.grid.empty()) {
        const std::size_t g = physical.grid.size();
        const double step =
            g >= 2 ? physical.grid[g - 1] - physical.grid[g - 2] : physical.grid.back();
        unprotectable_value = physical.grid.back() + step;
    }
    auto exposure_value = [&](const Exposure& x) {
        if (x.unprotectable) return unprotectable_value;
        return x.min_rho ? *x.min_rho : 0.0;
    };
    double rho_lo = 0.0, rho_hi = 0.0;
    bool have_rho = false;
    for (const auto& [bus, x] : exposure) {
        if (!x.unprotectable && !x.min_rho) continue;
        const double v = exposure_value(x);
        if (!have_rho) {
            rho_lo = rho_hi = v;
            have_rho = true;
        } else {
            rho_lo = std::min(rho_lo, v);
            rho_hi = std::max(rho_hi, v);
        }
    }

    for (const CapturePlan& plan : cyber.plans) {
        BusRisk risk;
        risk.bus = plan.target_bus;
        risk.cyber_cost = plan.total_cost;
        risk.cyber_strategy = strategy_name(plan.strategy);

        const double c_norm =
            cost_hi > cost_lo ? (plan.total_cost - cost_lo) / (cost_hi - cost_lo) : 0.0;

        double e_norm = 0.0;
        auto it = exposure.find(plan.target_bus);
        if (it != exposure.end()) {
            const Exposure& x = it->second;
            risk.attack_norm = x.attack_norm;
            risk.worst_branch = x.branch;
            if (!x.unprotectable) risk.physical_min_rho = x.min_rho;
            if (x.unprotectable || x.min_rho) {
                if (rho_hi > rho_lo)
                    e_norm = (exposure_value(x) - rho_lo) / (rho_hi - rho_lo);
                else
                    e_norm = x.unprotectable ? 1.0 : 0.0;
            }
        }
        risk.combined_index = mix * (1.0 - c_norm) + (1.0 - mix) * e_norm;
        report.buses.push_back(std::move(risk));
    }
    std::stable_sort(report.buses.begin(), report.buses.end(),
                     [](const BusRisk& a, const BusRisk& b) {
                         if (a.combined_index != b.combined_index)
                             return a.combined_index > b.combined_index;
                         return a.bus < b.bus;
                     });
    return report;
}

std::string report_to_json(const RiskReport& report) {
    json doc;
    doc["case"] = report.case_name;
    doc["engine_version"] = report.engine_version;
    doc["schema_version"] = kSchemaVersion;
    doc["seed"] = report.seed;
    doc["mix"] = report.mix;
    if (!report.config_echo.empty()) doc["config"] = json::parse(report.config_echo);
    doc["buses"] = json::array();
    for (const BusRisk& b : report.buses) {
        json jb;
        jb["bus"] = b.bus;
        jb["cyber_cost"] = b.cyber_cost;
        jb["cyber_strategy"] = b.cyber_strategy;
        if (b.physical_min_rho)
            jb["min_rho"] = *b.physical_min_rho;
        else
            jb["min_rho"] = nullptr;
        jb["attack_norm"] = b.attack_norm;
        jb["worst_branch"] = b.worst_branch;
        jb["combined_index"] = b.combined_index;
        doc["buses"].push_back(std::move(jb));
    }
    return doc.dump(2);
}

RiskReport report_from_json(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("malformed report JSON: ") + e.what());
    }
    RiskReport report;
    report.case_name = doc.at("case").get<std::string>();
    report.engine_version = doc.at("engine_version").get<std::string>();
    report.seed = doc.value("seed", 0ULL);
    report.mix = doc.value("mix", 0.5);
    if (doc.contains("config")) report.config_echo = doc["config"].dump();
    for (const json& jb : doc.at("buses")) {
        BusRisk b;
        b.bus = jb.at("bus").get<int>();
        b.cyber_cost = jb.at("cyber_cost").get<double>();
        b.cyber_strategy = jb.at("cyber_strategy").get<std::string>();
        if (!jb.at("min_rho").is_null()) b.physical_min_rho = jb["min_rho"].get<double>();
        b.attack_norm = jb.value("attack_norm", 0.0);
        b.worst_branch = jb.value("worst_branch", "");
        b.combined_index = jb.at("combined_index").get<double>();
        report.buses.push_back(std::move(b));
    }
    return report;
}

std::string rankings_csv(const CyberRanking& ranking) {
    std::ostringstream os;
    os << "bus,strategy,cost,rtus,meters\n";
    for (const CapturePlan& p : ranking.plans)
        os << p.target_bus << ',' << strategy_name(p.strategy) << ',' << fmt(p.total_cost) << ','
           << join(p.rtus) << ',' << join(p.meters) << '\n';
    return os.str();
}

std::string protection_csv(const ProtectionProfile& profile) {
    std::ostringstream os;
    os << "bus,branch,a_norm,co,min_rho,r_star_at_min_rho,div_rel,div_proj\n";
    for (const AttackProtection& e : profile.entries) {
        os << e.target_bus << ',' << e.branch << ',' << fmt(e.attack_norm) << ','
           << fmt(e.co_pu) << ',';
        if (e.min_rho)
            os << fmt(*e.min_rho);
        else
            os << "UNPROTECTABLE";
        os << ',' << fmt(e.r_star_at_min_rho) << ',' << fmt(e.div_rel) << ',' << fmt(e.div)
           << '\n';
    }
    return os.str();
}

std::string curves_csv(const ProtectionProfile& profile) {
    std::ostringstream os;
    os << "bus,branch,rho,r_star\n";
    for (const AttackProtection& e : profile.entries)
        for (const auto& [rho, r] : e.curve)
            os << e.target_bus << ',' << e.branch << ',' << fmt(rho) << ',' << fmt(r)
               << '\n';
    return os.str();
}

std::string attacks_csv(const std::vector<OverloadAttack>& attacks,
                        const MeasurementModel& model, const PowerNetwork& net,
                        const Eigen::VectorXd& z) {
    const CapacityOverhead co = capacity_overhead(z, net, model);
    std::ostringstream os;
    os << "bus,branch,c_n,a_norm,co\n";
    for (const OverloadAttack& atk : attacks) {
        const int col = model.state_column[net.bus_index(atk.target_bus)];
        os << atk.target_bus << ',' << net.branch_label(atk.target_branch) << ','
           << fmt(atk.c.c[col]) << ',' << fmt(atk.a.norm()) << ','
           << fmt(co.co[static_cast<Eigen::Index>(atk.target_branch)]) << '\n';
    }
    return os.str();
}

namespace {

json ranking_to_json_value(const CyberRanking& ranking) {
    json arr = json::array();
    for (const CapturePlan& p : ranking.plans)
        arr.push_back({{"bus", p.target_bus},
                       {"strategy", strategy_name(p.strategy)},
                       {"cost", p.total_cost},
                       {"rtus", p.rtus},
                       {"meters", p.meters}});
    return arr;
}

}  // namespace

std::string rankings_json(const CyberRanking& ranking) {
    return ranking_to_json_value(ranking).dump(2);
}

std::string protection_json(const ProtectionProfile& profile) {
    json arr = json::array();
    for (const AttackProtection& e : profile.entries) {
        json je;
        je["bus"] = e.target_bus;
        je["branch"] = e.branch;
        je["a_norm"] = e.attack_norm;
        je["co"] = e.co_pu;
        if (e.min_rho)
            je["min_rho"] = *e.min_rho;
        else
            je["min_rho"] = nullptr;
        je["r_star_at_min_rho"] = e.r_star_at_min_rho;
        je["div_rel"] = e.div_rel;
        je["div_eq_projected"] = e.div;
        arr.push_back(std::move(je));
    }
    return arr.dump(2);
}

std::string curves_json(const ProtectionProfile& profile) {
    json arr = json::array();
    for (const AttackProtection& e : profile.entries) {
        json curve = json::array();
        for (const auto& [rho, r] : e.curve) curve.push_back({{"rho", rho}, {"r_star", r}});
        arr.push_back(
            {{"bus", e.target_bus}, {"branch", e.branch}, {"curve", std::move(curve)}});
    }
    return arr.dump(2);
}

std::vector<double> PipelineConfig::rho_grid() const {
    if (!(sweep_step > 0.0) || sweep_begin <= 0.0 || sweep_end < sweep_begin)
        throw ValidationError("invalid sweep range");
    std::vector<double> grid;
    for (int i = 0;; ++i) {
        const double rho = sweep_begin + i * sweep_step;
        if (rho > sweep_end + 1e-12) break;
        grid.push_back(rho);
    }
    return grid;
}

std::string PipelineConfig::to_json() const {
    json doc;
    doc["case"] = case_path;
    doc["cyber"] = cyber_config_path;
    doc["scenarios"] = scenarios_path;
    doc["strategy"] = strategy;
    doc["rtu_weight"] = rtu_weight;
    doc["meter_weight"] = meter_weight;
    doc["epsilon"] = epsilon;
    doc["alpha"] = alpha;
    doc["sigma"] = sigma;
    doc["sd_mult"] = sd_multiplier;
    doc["sweep"] = {{"begin", sweep_begin}, {"step", sweep_step}, {"end", sweep_end}};
    doc["mix"] = mix;
    doc["seed"] = seed;
    doc["out_dir"] = out_dir;
    doc["format"] = format;
    return doc.dump(2);
}

PipelineConfig PipelineConfig::from_json(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("malformed config: ") + e.what());
    }
    PipelineConfig cfg;
    cfg.case_path = doc.value("case", cfg.case_path);
    cfg.cyber_config_path = doc.value("cyber", cfg.cyber_config_path);
    cfg.scenarios_path = doc.value("scenarios", cfg.scenarios_path);
    cfg.strategy = doc.value("strategy", cfg.strategy);
    cfg.rtu_weight = doc.value("rtu_weight", cfg.rtu_weight);
    cfg.meter_weight = doc.value("meter_weight", cfg.meter_weight);
    cfg.epsilon = doc.value("epsilon", cfg.epsilon);
    cfg.alpha = doc.value("alpha", cfg.alpha);
    cfg.sigma = doc.value("sigma", cfg.sigma);
    cfg.sd_multiplier = doc.value("sd_mult", cfg.sd_multiplier);
    if (doc.contains("sweep")) {
        cfg.sweep_begin = doc["sweep"].value("begin", cfg.sweep_begin);
        cfg.sweep_step = doc["sweep"].value("step", cfg.sweep_step);
        cfg.sweep_end = doc["sweep"].value("end", cfg.sweep_end);
    }
    cfg.mix = doc.value("mix", cfg.mix);
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.out_dir = doc.value("out_dir", cfg.out_dir);
    cfg.format = doc.value("format", cfg.format);
    return cfg;
}

namespace {

template <typename Fn>
auto stage(const std::string& name, Fn&& fn) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write file: " + path);
    out << content;
}

}  // namespace

PipelineArtifacts run_pipeline(const PipelineConfig& config) {
    if (config.format != "csv" && config.format != "json")
        throw StageError("report", "unknown output format '" + config.format + "'");

    const PowerNetwork net =
        stage("parse_case", [&] { return load_case_file(config.case_path); });

    const MeasurementModel model = stage("build_measurement_model", [&] {
        return build_measurement_model(net, "full", config.sigma);
    });

    const Eigen::VectorXd z_peak = stage("statistical_peak", [&] {
        LoadScenarioSet scenarios;
        if (!config.scenarios_path.empty()) {
            scenarios = load_scenarios_csv(read_file(config.scenarios_path), net, model);
        } else {
            const DcSolution base = dc_power_flow(net, model, case_injections_mw(net));
            scenarios = synthesize_scenarios(base.z);
        }
        return statistical_peak(scenarios, config.sd_multiplier);
    });

    const CyberRanking cyber = stage("cyber_assessment", [&] {
        const CaptureStrategy strategy = parse_strategy(config.strategy);
        CyberGraph graph;
        if (!config.cyber_config_path.empty())
            graph = load_cyber_config(read_file(config.cyber_config_path), net, model,
                                      config.rtu_weight, config.meter_weight);
        else
            graph = default_cyber_graph(net, model, config.rtu_weight, config.meter_weight);
        return rank_cyber_targets(net, model, graph, strategy);
    });

    const std::vector<OverloadAttack> attacks = stage("attack_synthesis", [&] {
        return enumerate_overload_attacks(model, net, z_peak, config.epsilon);
    });

    const ProtectionProfile physical = stage("mtd_sweep", [&] {
        const double eta = detection_threshold(model.m(), model.n(), config.alpha, config.sigma);
        MtdLimits limits = MtdLimits::all_branches(net, 0.0);
        return mtd_protection_sweep(model, net, z_peak, attacks, limits, eta,
                                    config.rho_grid(), config.seed);
    });

    PipelineArtifacts artifacts;
    artifacts.cyber = cyber;
    artifacts.physical = physical;
    artifacts.report = stage("report", [&] {
        RiskReport report = combined_risk_index(cyber, physical, config.mix);
        report.seed = config.seed;
        report.config_echo = config.to_json();
        return report;
    });

    stage("report", [&] {
        namespace fs = std::filesystem;
        fs::create_directories(config.out_dir);
        const bool csv = config.format == "csv";
        auto emit = [&](const std::string& name, const std::string& content) {
            const std::string path = (fs::path(config.out_dir) / name).string();
            write_file(path, content);
            artifacts.written_files.push_back(path);
        };
        emit(csv ? "rankings.csv" : "rankings.json",
             csv ? rankings_csv(cyber) : rankings_json(cyber));
        emit(csv ? "mtd.csv" : "mtd.json",
             csv ? protection_csv(physical) : protection_json(physical));
        emit(csv ? "mtd_curves.csv" : "mtd_curves.json",
             csv ? curves_csv(physical) : curves_json(physical));
        emit("report.json", report_to_json(artifacts.report));
        return 0;
    });
    return artifacts;
}

}  // namespace gridrisk
