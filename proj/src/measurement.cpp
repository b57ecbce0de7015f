#include "gridrisk/measurement.hpp"

#include <cmath>
#include <sstream>

#include "gridrisk/error.hpp"

namespace gridrisk {

std::string descriptor_string(const PowerNetwork& net, const MeasurementDescriptor& d) {
    if (d.kind == MeterKind::BusInjection) return "inj:" + std::to_string(d.bus);
    return "flow:" + net.branch_label(d.branch);
}

Eigen::MatrixXd assemble_topology(const PowerNetwork& net, const Eigen::VectorXd& susceptances) {
    const std::size_t n_bus = net.bus_count();
    const std::size_t n_branch = net.branch_count();
    if (static_cast<std::size_t>(susceptances.size()) != n_branch)
        throw ValidationError("susceptance vector length does not match branch count");

    const std::size_t ref_pos = net.bus_index(net.reference_bus());
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n_bus + n_branch, n_bus - 1);

    auto column_of = [&](std::size_t bus_pos) -> int {
        if (bus_pos == ref_pos) return -1;
        return static_cast<int>(bus_pos < ref_pos ? bus_pos : bus_pos - 1);
    };

    for (std::size_t l = 0; l < n_branch; ++l) {
        const Branch& br = net.branches()[l];
        const double b = susceptances[static_cast<Eigen::Index>(l)];
        const std::size_t fi = net.bus_index(br.from);
        const std::size_t ti = net.bus_index(br.to);
        const std::size_t flow_row = n_bus + l;
        const int fc = column_of(fi);
        const int tc = column_of(ti);
        // flow i->j = b * (theta_i - theta_j)
        if (fc >= 0) H(flow_row, fc) += b;
        if (tc >= 0) H(flow_row, tc) -= b;
        // injections: +flow at the from end, -flow at the to end
        H.row(fi) += H.row(flow_row);
        H.row(ti) -= H.row(flow_row);
    }
    return H;
}

MeasurementModel build_measurement_model(const PowerNetwork& net, const std::string& placement,
                                         double sigma, std::optional<Eigen::VectorXd> weights) {
    if (placement != "full")
        throw ValidationError("unknown meter placement rule '" + placement + "'");

    MeasurementModel model;
    const std::size_t n_bus = net.bus_count();
    const std::size_t n_branch = net.branch_count();

    model.inj_row.resize(n_bus);
    model.flow_row.resize(n_branch);
    for (std::size_t i = 0; i < n_bus; ++i) {
        model.inj_row[i] = model.measurements.size();
        model.measurements.push_back(MeasurementDescriptor::injection(net.buses()[i].id));
    }
    for (std::size_t l = 0; l < n_branch; ++l) {
        model.flow_row[l] = model.measurements.size();
        model.measurements.push_back(MeasurementDescriptor::flow(l));
    }

    Eigen::VectorXd b(n_branch);
    for (std::size_t l = 0; l < n_branch; ++l)
        b[static_cast<Eigen::Index>(l)] = net.branches()[l].susceptance();
    model.H = assemble_topology(net, b);

    const std::size_t ref_pos = net.bus_index(net.reference_bus());
    model.state_column.resize(n_bus);
    for (std::size_t i = 0; i < n_bus; ++i) {
        if (i == ref_pos)
            model.state_column[i] = -1;
        else
            model.state_column[i] = static_cast<int>(i < ref_pos ? i : i - 1);
    }

    const std::size_t m = model.measurements.size();
    if (weights) {
        if (static_cast<std::size_t>(weights->size()) != m)
            throw ValidationError("weight vector length does not match measurement count");
        if ((weights->array() <= 0.0).any())
            throw ValidationError("measurement weights must be strictly positive");
        model.weights = *weights;
    } else {
        model.weights = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(m));
    }
    if (!(sigma > 0.0)) throw ValidationError("sigma must be positive");
    model.sigma = sigma;
    return model;
}

Eigen::VectorXd solve_dc_state(const MeasurementModel& model, const Eigen::MatrixXd& H,
                               const PowerNetwork& net, const Eigen::VectorXd& injections_pu) {
    const std::size_t n_bus = net.bus_count();
    if (static_cast<std::size_t>(injections_pu.size()) != n_bus)
        throw ValidationError("injection vector length does not match bus count");

    const Eigen::Index n = H.cols();
    Eigen::MatrixXd B(n, n);
    Eigen::VectorXd p(n);
    for (std::size_t i = 0; i < n_bus; ++i) {
        const int col = model.state_column[i];
        if (col < 0) continue;
        B.row(col) = H.row(static_cast<Eigen::Index>(model.inj_row[i]));
        p[col] = injections_pu[static_cast<Eigen::Index>(i)];
    }

    Eigen::LDLT<Eigen::MatrixXd> ldlt(B);
    if (ldlt.info() != Eigen::Success)
        throw NumericalError("reduced susceptance matrix is singular");
    const Eigen::VectorXd d = ldlt.vectorD();
    if (d.minCoeff() <= d.maxCoeff() * 1e-12)
        throw NumericalError("reduced susceptance matrix is singular (network disconnected?)");
    return ldlt.solve(p);
}

DcSolution dc_power_flow(const PowerNetwork& net, const MeasurementModel& model,
                         const Eigen::VectorXd& injections_mw) {
    DcSolution sol;
    const Eigen::VectorXd p = injections_mw / kMvaBase;
    // Only non-reference entries drive the reduced solve; the slack bus
    // implicitly absorbs any imbalance in the profile.
    sol.x = solve_dc_state(model, model.H, net, p);
    sol.z = model.H * sol.x;
    return sol;
}

Eigen::VectorXd case_injections_mw(const PowerNetwork& net) {
    Eigen::VectorXd p(static_cast<Eigen::Index>(net.bus_count()));
    for (std::size_t i = 0; i < net.bus_count(); ++i) {
        const Bus& b = net.buses()[i];
        p[static_cast<Eigen::Index>(i)] = b.gen_mw - b.load_mw;
    }
    return p;
}

Eigen::VectorXd statistical_peak(const LoadScenarioSet& scenarios, double k) {
    if (k < 0.0) throw ValidationError("standard-deviation multiplier must be >= 0");

    Eigen::VectorXd mean, sd;
    if (scenarios.mean && scenarios.sd) {
        mean = *scenarios.mean;
        sd = *scenarios.sd;
        if (mean.size() != sd.size())
            throw ValidationError("scenario mean and sd lengths differ");
    } else if (!scenarios.scenarios.empty()) {
        const Eigen::Index m = scenarios.scenarios.front().size();
        mean = Eigen::VectorXd::Zero(m);
        for (const auto& z : scenarios.scenarios) {
            if (z.size() != m) throw ValidationError("scenario vectors have mixed lengths");
            mean += z;
        }
        mean /= static_cast<double>(scenarios.scenarios.size());
        Eigen::VectorXd var = Eigen::VectorXd::Zero(m);
        for (const auto& z : scenarios.scenarios) var += (z - mean).cwiseAbs2();
        var /= static_cast<double>(scenarios.scenarios.size());
        sd = var.cwiseSqrt();
    } else {
        throw ValidationError("scenario set is empty and no parametric form was supplied");
    }
    if ((sd.array() < 0.0).any())
        throw ValidationError("scenario standard deviations must be >= 0");
    return mean + k * sd;
}

LoadScenarioSet synthesize_scenarios(const Eigen::VectorXd& z_base) {
    LoadScenarioSet set;
    set.mean = z_base;
    set.sd = 0.1 * z_base.cwiseAbs();
    return set;
}

LoadScenarioSet load_scenarios_csv(const std::string& csv_text, const PowerNetwork& net,
                                   const MeasurementModel& model) {
    std::istringstream in(csv_text);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("scenario CSV is empty");

    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::istringstream row(s);
        std::string cell;
        while (std::getline(row, cell, ',')) cells.push_back(cell);
        return cells;
    };

    const auto header = split(line);
    if (header.size() != model.m())
        throw ValidationError("scenario CSV has " + std::to_string(header.size()) +
                              " columns, expected " + std::to_string(model.m()));
    for (std::size_t j = 0; j < header.size(); ++j) {
        const std::string expect = descriptor_string(net, model.measurements[j]);
        if (header[j] != expect)
            throw ValidationError("scenario CSV column " + std::to_string(j) + " is '" +
                                  header[j] + "', expected '" + expect + "'");
    }

    LoadScenarioSet set;
    std::size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != model.m())
            throw ValidationError("scenario CSV row " + std::to_string(row_no) +
                                  " has wrong cell count");
        Eigen::VectorXd z(static_cast<Eigen::Index>(model.m()));
        for (std::size_t j = 0; j < cells.size(); ++j) {
            try {
                z[static_cast<Eigen::Index>(j)] = std::stod(cells[j]) / kMvaBase;
            } catch (const std::exception&) {
                throw ValidationError("scenario CSV row " + std::to_string(row_no) +
                                      ": non-numeric cell '" + cells[j] + "'");
            }
        }
        set.scenarios.push_back(std::move(z));
    }
    if (set.scenarios.empty()) throw ValidationError("scenario CSV has no data rows");
    return set;
}

}  // namespace gridrisk
