#include "gridrisk/mtd.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "gridrisk/error.hpp"
#include "gridrisk/estimation.hpp"

namespace gridrisk {

MtdLimits MtdLimits::all_branches(const PowerNetwork& net, double rho) {
    MtdLimits limits;
    limits.rho = rho;
    limits.perturbable_branches.resize(net.branch_count());
    for (std::size_t l = 0; l < net.branch_count(); ++l) limits.perturbable_branches[l] = l;
    return limits;
}

double post_mtd_residual(const MeasurementModel& model, const Eigen::MatrixXd& H_mtd,
                         const Eigen::VectorXd& z, const Eigen::VectorXd& a) {
    if (H_mtd.rows() != model.H.rows() || H_mtd.cols() != model.H.cols())
        throw ValidationError("perturbed topology shape does not match the model");
    const Eigen::VectorXd z_a = apply_attack(z, a);
    return wls_estimate(H_mtd, model.weights, z_a).r;
}

Divergence divergence(const Eigen::MatrixXd& H, const Eigen::MatrixXd& H_mtd) {
    if (H.rows() != H_mtd.rows() || H.cols() != H_mtd.cols())
        throw ValidationError("topology shapes differ");
    Eigen::LDLT<Eigen::MatrixXd> ldlt(H.transpose() * H);
    if (ldlt.info() != Eigen::Success)
        throw NumericalError("H^T H factorization failed");
    const Eigen::VectorXd d = ldlt.vectorD();
    if (d.minCoeff() <= d.maxCoeff() * 1e-12)
        throw NumericalError("H^T H is rank deficient");

    Divergence out;
    out.projected = (H * ldlt.solve(H.transpose() * H_mtd)).norm();  // Frobenius
    out.relative = (H - H_mtd).norm() / H.norm();
    return out;
}

namespace {

void validate_limits(const PowerNetwork& net, const MtdLimits& limits) {
    if (limits.rho < 0.0 || limits.rho > 0.5)
        throw ValidationError("MTD capacity fraction must lie in [0, 0.5]");
    for (std::size_t l : limits.perturbable_branches)
        if (l >= net.branch_count())
            throw ValidationError("perturbable branch index out of range");
}

// Residual of the stale attack under a candidate topology, with the
// legitimate flows re-solved under that topology's physics. The evaluation
// sits in the optimizer's inner loop, so all workspace is preallocated.
class ResidualObjective {
public:
    ResidualObjective(const MeasurementModel& model, const PowerNetwork& net,
                      const Eigen::VectorXd& injections_pu, const Eigen::VectorXd& a,
                      std::vector<std::size_t> vars)
        : model_(model), net_(net), a_(a), vars_(std::move(vars)) {
        const Eigen::Index m = static_cast<Eigen::Index>(model.m());
        const Eigen::Index n = static_cast<Eigen::Index>(model.n());
        base_b_.resize(static_cast<Eigen::Index>(net.branch_count()));
        for (std::size_t l = 0; l < net.branch_count(); ++l)
            base_b_[static_cast<Eigen::Index>(l)] = net.branches()[l].susceptance();

        H_.resize(m, n);
        Hw_.resize(m, n);
        B_.resize(n, n);
        A_.resize(n, n);
        p_red_.resize(n);
        rhs_.resize(n);
        x_.resize(n);
        za_.resize(m);
        unit_weights_ = (model.weights.array() == 1.0).all();
        for (std::size_t i = 0; i < net.bus_count(); ++i) {
            const int col = model.state_column[i];
            if (col >= 0) p_red_[col] = injections_pu[static_cast<Eigen::Index>(i)];
        }
    }

    const std::vector<std::size_t>& vars() const { return vars_; }

    Eigen::VectorXd full_scales(const Eigen::VectorXd& v) const {
        Eigen::VectorXd s = Eigen::VectorXd::Ones(base_b_.size());
        for (std::size_t i = 0; i < vars_.size(); ++i)
            s[static_cast<Eigen::Index>(vars_[i])] = v[static_cast<Eigen::Index>(i)];
        return s;
    }

    Eigen::VectorXd var_slice(const Eigen::VectorXd& full) const {
        Eigen::VectorXd v(static_cast<Eigen::Index>(vars_.size()));
        for (std::size_t i = 0; i < vars_.size(); ++i)
            v[static_cast<Eigen::Index>(i)] = full[static_cast<Eigen::Index>(vars_[i])];
        return v;
    }

    Eigen::MatrixXd topology(const Eigen::VectorXd& v) const {
        Eigen::VectorXd b = base_b_;
        for (std::size_t i = 0; i < vars_.size(); ++i)
            b[static_cast<Eigen::Index>(vars_[i])] *= v[static_cast<Eigen::Index>(i)];
        return assemble_topology(net_, b);
    }

    double operator()(const Eigen::VectorXd& v) const {
        assemble(v);
        // legitimate component: state under the candidate physics
        for (std::size_t i = 0; i < net_.bus_count(); ++i) {
            const int col = model_.state_column[i];
            if (col >= 0) B_.row(col) = H_.row(static_cast<Eigen::Index>(model_.inj_row[i]));
        }
        llt_.compute(B_);
        if (llt_.info() != Eigen::Success)
            throw NumericalError("perturbed susceptance matrix is singular");
        x_.noalias() = llt_.solve(p_red_);
        za_.noalias() = H_ * x_;
        za_ += a_;
        // generic WLS residual of the attacked measurements
        if (unit_weights_) {
            A_.noalias() = H_.transpose() * H_;
            rhs_.noalias() = H_.transpose() * za_;
        } else {
            Hw_.noalias() = model_.weights.asDiagonal() * H_;
            A_.noalias() = H_.transpose() * Hw_;
            rhs_.noalias() = Hw_.transpose() * za_;
        }
        llt_.compute(A_);
        if (llt_.info() != Eigen::Success)
            throw NumericalError("gain matrix factorization failed");
        x_.noalias() = llt_.solve(rhs_);
        za_.noalias() -= H_ * x_;
        return za_.norm();
    }

private:
    void assemble(const Eigen::VectorXd& v) const {
        H_.setZero();
        const std::size_t ref_pos = net_.bus_index(net_.reference_bus());
        auto column_of = [&](std::size_t bus_pos) -> int {
            if (bus_pos == ref_pos) return -1;
            return static_cast<int>(bus_pos < ref_pos ? bus_pos : bus_pos - 1);
        };
        Eigen::VectorXd b = base_b_;
        for (std::size_t i = 0; i < vars_.size(); ++i)
            b[static_cast<Eigen::Index>(vars_[i])] *= v[static_cast<Eigen::Index>(i)];
        for (std::size_t l = 0; l < net_.branch_count(); ++l) {
            const Branch& br = net_.branches()[l];
            const std::size_t fi = net_.bus_index(br.from);
            const std::size_t ti = net_.bus_index(br.to);
            const Eigen::Index flow_row = static_cast<Eigen::Index>(model_.flow_row[l]);
            const int fc = column_of(fi);
            const int tc = column_of(ti);
            const double bl = b[static_cast<Eigen::Index>(l)];
            if (fc >= 0) H_(flow_row, fc) += bl;
            if (tc >= 0) H_(flow_row, tc) -= bl;
            H_.row(static_cast<Eigen::Index>(model_.inj_row[fi])) += H_.row(flow_row);
            H_.row(static_cast<Eigen::Index>(model_.inj_row[ti])) -= H_.row(flow_row);
        }
    }

    const MeasurementModel& model_;
    const PowerNetwork& net_;
    Eigen::VectorXd a_;
    std::vector<std::size_t> vars_;
    Eigen::VectorXd base_b_;
    bool unit_weights_ = false;

    mutable Eigen::MatrixXd H_, Hw_, B_, A_;
    mutable Eigen::VectorXd p_red_, rhs_, x_, za_;
    mutable Eigen::LLT<Eigen::MatrixXd> llt_;
};

struct AscentPoint {
    Eigen::VectorXd v;
    double value = 0.0;
};

// Projected finite-difference ascent on the box [lo, hi]^k. Converged when
// the projected gradient vanishes (boundary optimum), the accepted step drops
// below the tolerance, or the value stops moving.
AscentPoint project_ascent(const ResidualObjective& f, const Eigen::VectorXd& start, double lo,
                           double hi, int max_iterations, double step_tolerance) {
    AscentPoint cur;
    cur.v = start.cwiseMax(lo).cwiseMin(hi);
    cur.value = f(cur.v);

    const Eigen::Index k = cur.v.size();
    const double fd_h = 1e-6;
    double step = 0.25 * (hi - lo);
    int stalled = 0;

    for (int iter = 0; iter < max_iterations; ++iter) {
        Eigen::VectorXd grad(k);
        for (Eigen::Index i = 0; i < k; ++i) {
            double h = fd_h;
            if (cur.v[i] + h > hi) h = -fd_h;  // one-sided at the upper face
            Eigen::VectorXd probe = cur.v;
            probe[i] += h;
            grad[i] = (f(probe) - cur.value) / h;
        }
        // feasible-direction component only: moves pushing past an active
        // bound cannot change the iterate
        for (Eigen::Index i = 0; i < k; ++i) {
            if (cur.v[i] >= hi && grad[i] > 0.0) grad[i] = 0.0;
            if (cur.v[i] <= lo && grad[i] < 0.0) grad[i] = 0.0;
        }
        const double gnorm = grad.cwiseAbs().maxCoeff();
        if (gnorm < 1e-9) break;

        bool improved = false;
        double moved = 0.0;
        double alpha = step / gnorm;
        const double before = cur.value;
        for (int t = 0; t < 25; ++t) {
            Eigen::VectorXd next = (cur.v + alpha * grad).cwiseMax(lo).cwiseMin(hi);
            moved = (next - cur.v).cwiseAbs().maxCoeff();
            if (moved == 0.0) break;
            const double value = f(next);
            if (value > cur.value) {
                cur.v = std::move(next);
                cur.value = value;
                improved = true;
                step = std::min(0.5 * (hi - lo), alpha * gnorm * 1.5);
                break;
            }
            alpha *= 0.5;
        }
        if (!improved || moved < step_tolerance) break;
        if (cur.value - before < 1e-12 * (1.0 + cur.value)) {
            if (++stalled >= 2) break;
        } else {
            stalled = 0;
        }
    }
    return cur;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    // splitmix64 finalizer
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

MtdOutcome max_residual_over_mtd(const MeasurementModel& model, const PowerNetwork& net,
                                 const Eigen::VectorXd& injections_pu, const Eigen::VectorXd& a,
                                 const MtdLimits& limits, const MtdOptions& options) {
    validate_limits(net, limits);
    if (static_cast<std::size_t>(a.size()) != model.m())
        throw ValidationError("attack vector length does not match the model");

    const double lo = 1.0 - limits.rho;
    const double hi = 1.0 + limits.rho;

    ResidualObjective objective(model, net, injections_pu, a, limits.perturbable_branches);

    auto finish = [&](const Eigen::VectorXd& v, double value) {
        MtdOutcome out;
        out.rho_used = limits.rho;
        out.scales = objective.full_scales(v);
        out.h_star = objective.topology(v);
        out.r_star = value;
        out.delta_h = model.H - out.h_star;
        const Eigen::MatrixXd HtW = out.h_star.transpose() * model.weights.asDiagonal();
        out.gain_star = (HtW * out.h_star).ldlt().solve(HtW);
        const Divergence div = divergence(model.H, out.h_star);
        out.div = div.projected;
        out.div_rel = div.relative;
        return out;
    };

    const Eigen::Index k = static_cast<Eigen::Index>(limits.perturbable_branches.size());
    AscentPoint best;
    best.v = Eigen::VectorXd::Ones(k);
    best.value = objective(best.v);

    if (limits.rho == 0.0 || k == 0 || a.norm() == 0.0) return finish(best.v, best.value);

    auto consider = [&](const Eigen::VectorXd& v, double value) {
        if (value > best.value) {
            best.v = v;
            best.value = value;
        }
    };

    if (options.warm_start) {
        if (options.warm_start->size() != static_cast<Eigen::Index>(net.branch_count()))
            throw ValidationError("warm start must hold one scale per branch");
        Eigen::VectorXd v = objective.var_slice(*options.warm_start).cwiseMax(lo).cwiseMin(hi);
        consider(v, objective(v));
    }

    // Box vertices over the branches the attack actually touches: only their
    // susceptance changes move the stale attack out of the candidate column
    // space, so the maximum is usually pinned to one of these corners.
    std::vector<Eigen::Index> affected;
    {
        const Eigen::VectorXd c_hat = wls_estimate(model, a).x_hat;
        const double c_scale = c_hat.cwiseAbs().maxCoeff();
        std::vector<char> bus_in_support(net.bus_count(), 0);
        for (std::size_t i = 0; i < net.bus_count(); ++i) {
            const int col = model.state_column[i];
            if (col >= 0 && std::abs(c_hat[col]) > 1e-9 * c_scale) bus_in_support[i] = 1;
        }
        for (Eigen::Index i = 0; i < k; ++i) {
            const Branch& br = net.branches()[limits.perturbable_branches[i]];
            if (bus_in_support[net.bus_index(br.from)] || bus_in_support[net.bus_index(br.to)])
                affected.push_back(i);
        }
        if (affected.size() > 12) affected.resize(12);
    }
    const std::size_t corners = std::size_t{1} << affected.size();
    for (std::size_t mask = 0; mask < corners; ++mask) {
        Eigen::VectorXd v = Eigen::VectorXd::Ones(k);
        for (std::size_t i = 0; i < affected.size(); ++i)
            v[affected[i]] = (mask & (std::size_t{1} << i)) ? hi : lo;
        consider(v, objective(v));
    }

    // Refinement: ascent from the best point so far, then from random
    // interior seeds.
    std::vector<Eigen::VectorXd> seeds;
    seeds.push_back(best.v);
    std::mt19937_64 rng(mix_seed(options.seed, 0));
    std::uniform_real_distribution<double> unif(lo, hi);
    for (int rs = 0; rs < options.restarts; ++rs) {
        Eigen::VectorXd v(k);
        for (Eigen::Index i = 0; i < k; ++i) v[i] = unif(rng);
        seeds.push_back(std::move(v));
    }
    for (const Eigen::VectorXd& seed : seeds) {
        const AscentPoint p = project_ascent(objective, seed, lo, hi, options.max_iterations,
                                             options.step_tolerance);
        consider(p.v, p.value);
    }
    return finish(best.v, best.value);
}

std::vector<double> default_rho_grid() {
    std::vector<double> grid;
    for (int i = 1; i <= 50; ++i) grid.push_back(i / 100.0);
    return grid;
}

ProtectionProfile mtd_protection_sweep(const MeasurementModel& model, const PowerNetwork& net,
                                       const Eigen::VectorXd& z_assess,
                                       const std::vector<OverloadAttack>& attacks,
                                       const MtdLimits& limits_template, double eta,
                                       const std::vector<double>& grid, std::uint64_t seed) {
    if (!(eta > 0.0)) throw ValidationError("detection threshold must be > 0");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (grid[i] <= grid[i - 1]) throw ValidationError("rho grid must be ascending");
    if (!grid.empty() && (grid.front() <= 0.0 || grid.back() > 0.5))
        throw ValidationError("rho grid must lie in (0, 0.5]");

    ProtectionProfile profile;
    profile.case_name = net.name();
    profile.eta = eta;
    profile.grid = grid;

    // Loading profile implied by the assessment vector.
    Eigen::VectorXd injections(static_cast<Eigen::Index>(net.bus_count()));
    for (std::size_t i = 0; i < net.bus_count(); ++i)
        injections[static_cast<Eigen::Index>(i)] =
            z_assess[static_cast<Eigen::Index>(model.inj_row[i])];
    const CapacityOverhead co = capacity_overhead(z_assess, net, model);

    for (std::size_t ai = 0; ai < attacks.size(); ++ai) {
        const OverloadAttack& attack = attacks[ai];
        AttackProtection entry;
        entry.target_bus = attack.target_bus;
        entry.target_branch = attack.target_branch;
        entry.branch = net.branch_label(attack.target_branch);
        entry.attack_norm = attack.a.norm();
        entry.co_pu = co.co[static_cast<Eigen::Index>(attack.target_branch)];

        MtdOptions options;
        std::optional<Eigen::VectorXd> warm;
        bool div_recorded = false;
        for (std::size_t gi = 0; gi < grid.size(); ++gi) {
            MtdLimits limits = limits_template;
            limits.rho = grid[gi];
            options.seed = mix_seed(seed, ai * 1024 + gi);
            options.warm_start = warm;
            // After the first grid point the warm start and corner sweep carry
            // the search; a single fresh seed guards against stagnation.
            options.restarts = gi == 0 ? 5 : 1;

            const MtdOutcome outcome =
                max_residual_over_mtd(model, net, injections, attack.a, limits, options);
            warm = outcome.scales;
            entry.curve.emplace_back(grid[gi], outcome.r_star);
            if (!div_recorded) {
                // remember the first protective point (or keep updating until
                // the end of the grid when none protects)
                entry.r_star_at_min_rho = outcome.r_star;
                entry.div = outcome.div;
                entry.div_rel = outcome.div_rel;
                if (outcome.r_star > eta) {
                    entry.min_rho = grid[gi];
                    div_recorded = true;
                }
            }
        }
        profile.entries.push_back(std::move(entry));
    }
    return profile;
}

}  // namespace gridrisk
