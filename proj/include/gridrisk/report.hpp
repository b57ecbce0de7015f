#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gridrisk/cyber.hpp"
#include "gridrisk/mtd.hpp"

namespace gridrisk {

struct BusRisk {
    int bus = 0;
    double cyber_cost = 0.0;
    std::string cyber_strategy;
    std::optional<double> physical_min_rho;  // nullopt: no MTD level protects this bus
    double attack_norm = 0.0;                // of the worst incident attack
    std::string worst_branch;
    double combined_index = 0.0;             // in [0, 1], higher = more exposed
};

struct RiskReport {
    std::string case_name;
    std::string engine_version;
    std::uint64_t seed = 0;
    double mix = 0.5;
    std::string config_echo;                 // JSON snapshot of the run configuration
    std::vector<BusRisk> buses;              // descending combined_index
};

// Convex mix of normalized intrusion cost and normalized MTD exposure:
//   index = mix * (1 - c_norm) + (1 - mix) * e_norm
// with c_norm the min-max normalized capture cost and e_norm the min-max
// normalized protective rho (buses no MTD level protects map to 1).
RiskReport combined_risk_index(const CyberRanking& cyber, const ProtectionProfile& physical,
                               double mix);

std::string report_to_json(const RiskReport& report);
RiskReport report_from_json(const std::string& json_text);

// CSV writers. Headers are fixed; see README for the schema version.
std::string rankings_csv(const CyberRanking& ranking);
std::string protection_csv(const ProtectionProfile& profile);
std::string curves_csv(const ProtectionProfile& profile);
std::string attacks_csv(const std::vector<OverloadAttack>& attacks,
                        const MeasurementModel& model, const PowerNetwork& net,
                        const Eigen::VectorXd& z);

// JSON equivalents used when the output format is "json".
std::string rankings_json(const CyberRanking& ranking);
std::string protection_json(const ProtectionProfile& profile);
std::string curves_json(const ProtectionProfile& profile);

struct PipelineConfig {
    std::string case_path;
    std::string cyber_config_path;  // optional
    std::string scenarios_path;     // optional history CSV
    std::string strategy = "combined";
    double rtu_weight = 1.0;
    double meter_weight = 1.0;
    double epsilon = 0.01;
    double alpha = 0.95;
    double sigma = 0.01;
    double sd_multiplier = 3.0;
    double sweep_begin = 0.01;
    double sweep_step = 0.01;
    double sweep_end = 0.50;
    double mix = 0.5;
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    std::string format = "csv";  // csv | json

    std::vector<double> rho_grid() const;
    std::string to_json() const;
    static PipelineConfig from_json(const std::string& json_text);
};

struct PipelineArtifacts {
    CyberRanking cyber;
    ProtectionProfile physical;
    RiskReport report;
    std::vector<std::string> written_files;
};

// Runs parse -> model -> peak -> cyber ranking -> attack synthesis -> MTD
// sweep -> combined report, writing artifacts under config.out_dir. Errors
// from any stage surface as StageError naming that stage.
PipelineArtifacts run_pipeline(const PipelineConfig& config);

}  // namespace gridrisk
