#include "milldyn/simulator.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "milldyn/cutting.hpp"
#include "milldyn/discovery.hpp"

namespace milldyn {

namespace {

// Evaluation slots a discovered equation may reference in the stepping loop.
enum Slot : int { kX, kVx, kY, kVy, kB, kFx, kFy, kDn, kNdot, kSinphi, kSlotCount };

int slot_of(const std::string& name) {
    if (name == "x") return kX;
    if (name == "vx") return kVx;
    if (name == "y") return kY;
    if (name == "vy") return kVy;
    if (name == "b") return kB;
    if (name == "Fx") return kFx;
    if (name == "Fy") return kFy;
    if (name == "dn") return kDn;
    if (name == "ndot") return kNdot;
    if (name == "sinphi") return kSinphi;
    return -1;
}

// One discovered equation compiled to (coefficient, factor list) form.
struct CompiledEquation {
    struct Entry {
        double coeff;
        std::vector<std::pair<int, int>> factors;  // (slot, exponent)
    };
    std::vector<Entry> entries;

    double eval(const std::array<double, kSlotCount>& v) const {
        double sum = 0.0;
        for (const auto& e : entries) {
            double term = e.coeff;
            for (auto [slot, exp] : e.factors)
                for (int i = 0; i < exp; ++i) term *= v[slot];
            sum += term;
        }
        return sum;
    }
};

CompiledEquation compile_equation(const SparseSolution& sol, EquationId id) {
    const bool is_force = (id == EquationId::Ft || id == EquationId::Fn);
    CompiledEquation out;
    for (std::size_t i = 0; i < sol.terms.size(); ++i) {
        CompiledEquation::Entry e;
        e.coeff = sol.coefficients[i];
        if (!std::isfinite(e.coeff))
            throw std::invalid_argument("simulate_discovered: non-finite coefficient in " +
                                        std::string(to_string(id)));
        const Term term = parse_term(sol.terms[i]);
        for (const auto& [var, exp] : term.factors) {
            const int slot = slot_of(var);
            const bool allowed =
                is_force ? (slot == kDn || slot == kNdot || slot == kB || slot == kSinphi)
                         : (slot >= kX && slot <= kFy);
            if (slot < 0 || !allowed)
                throw std::invalid_argument("simulate_discovered: equation " +
                                            std::string(to_string(id)) +
                                            " references unevaluable term '" + sol.terms[i] + "'");
            e.factors.emplace_back(slot, exp);
        }
        out.entries.push_back(std::move(e));
    }
    return out;
}

struct Recorder {
    std::shared_ptr<TimeSeriesDataset> ds = std::make_shared<TimeSeriesDataset>();

    void row(double t, double x, double vx, double ax, double y, double vy, double ay,
             double Fx, double Fy, double Ft, double Fn, const ToothKinematics& tk) {
        ds->t.push_back(t);
        ds->x.push_back(x); ds->vx.push_back(vx); ds->ax.push_back(ax);
        ds->y.push_back(y); ds->vy.push_back(vy); ds->ay.push_back(ay);
        ds->Fx.push_back(Fx); ds->Fy.push_back(Fy);
        ds->Ft.push_back(Ft); ds->Fn.push_back(Fn);
        ds->phi.push_back(tk.phi);
        ds->engaged.push_back(tk.engaged ? 1 : 0);
        ds->delta_n.push_back(tk.delta_n);
        ds->n_dot.push_back(tk.n_dot);
    }
};

void check_kinematic_validity(const ToolGeometry& g) {
    const auto [ps, pe] = engagement_window(g);
    if (pe - ps > g.tooth_pitch() + 1e-12)
        throw std::invalid_argument(
            "run_simulation: engagement arc exceeds the tooth pitch; per-sample tooth "
            "kinematics require at most one engaged tooth");
}

}  // namespace

StateVector step(const StateVector& state, std::pair<double, double> forces,
                 const StructuralModel& structure, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be > 0");
    StateVector out = state;
    for (std::size_t i = 0; i < structure.x_modes.size(); ++i) {
        const auto& m = structure.x_modes[i];
        const double a = (-m.damping * state.vx[i] - m.stiffness * state.x[i] + forces.first) / m.mass;
        out.vx[i] = state.vx[i] + a * dt;
        out.x[i] = state.x[i] + out.vx[i] * dt;
    }
    for (std::size_t i = 0; i < structure.y_modes.size(); ++i) {
        const auto& m = structure.y_modes[i];
        const double a = (-m.damping * state.vy[i] - m.stiffness * state.y[i] + forces.second) / m.mass;
        out.vy[i] = state.vy[i] + a * dt;
        out.y[i] = state.y[i] + out.vy[i] * dt;
    }
    return out;
}

std::pair<double, double> tip_accelerations(const StateVector& state,
                                            std::pair<double, double> forces,
                                            const StructuralModel& structure) {
    double ax = 0.0, ay = 0.0;
    for (std::size_t i = 0; i < structure.x_modes.size(); ++i) {
        const auto& m = structure.x_modes[i];
        ax += (-m.damping * state.vx[i] - m.stiffness * state.x[i] + forces.first) / m.mass;
    }
    for (std::size_t i = 0; i < structure.y_modes.size(); ++i) {
        const auto& m = structure.y_modes[i];
        ay += (-m.damping * state.vy[i] - m.stiffness * state.y[i] + forces.second) / m.mass;
    }
    return {ax, ay};
}

TimeSeriesDataset run_simulation(const StructuralModel& structure,
                                 const ForceModelSpec& force_model,
                                 const ToolGeometry& geometry,
                                 const ProcessPoint& process,
                                 const SimulationConfig& config) {
    structure.validate();
    force_model.validate();
    geometry.validate();
    process.validate();
    config.validate(geometry.teeth);
    check_kinematic_validity(geometry);

    const std::size_t p = structure.x_modes.size(), q = structure.y_modes.size();
    StateVector state = config.initial_state.x.empty() ? StateVector::zeros(p, q)
                                                       : config.initial_state;
    if (state.x.size() != p || state.vx.size() != p || state.y.size() != q || state.vy.size() != q)
        throw std::invalid_argument("run_simulation: initial_state size mismatch");

    const double dt = 60.0 / (process.omega_rpm * config.steps_per_rev);
    const int D = delay_in_samples(config, geometry.teeth);
    const auto [phi_start, phi_exit] = engagement_window(geometry);
    const double V = process.cutting_speed(geometry);
    const std::size_t n_steps =
        static_cast<std::size_t>(config.revolutions) * config.steps_per_rev;

    SurfaceMemory surface(D);
    Recorder rec;
    rec.ds->reserve(n_steps);
    rec.ds->meta.process = process;
    rec.ds->meta.geometry = geometry;
    rec.ds->meta.config = config;

    for (std::size_t i = 0; i < n_steps; ++i) {
        const double t = static_cast<double>(i) * dt;
        double Ft = 0.0, Fn = 0.0, Fx = 0.0, Fy = 0.0;
        ToothKinematics tk;
        for (int j = 0; j < geometry.teeth; ++j) {
            const double phi = tooth_angle(t, process.omega_rpm, j, geometry.teeth);
            if (phi < phi_start || phi > phi_exit) continue;
            const double n_cur = normal_projection(state.tip_x(), state.tip_y(), phi);
            const double n_prev = surface.read(i);
            const double h = chip_thickness(process.feed_per_tooth, phi, n_prev, n_cur);
            if (h <= 0.0) continue;  // jumped out of the cut; surface persists
            const double n_dot = normal_projection(state.tip_vx(), state.tip_vy(), phi);
            const auto [ft_j, fn_j] = tooth_forces(h, n_dot, process.axial_depth, V, force_model);
            const auto [fx_j, fy_j] = project_forces(ft_j, fn_j, phi);
            Ft += ft_j; Fn += fn_j; Fx += fx_j; Fy += fy_j;
            surface.write(i, n_cur);
            tk = ToothKinematics{phi, true, n_prev - n_cur, n_dot};
        }
        const auto [ax, ay] = tip_accelerations(state, {Fx, Fy}, structure);
        rec.row(t, state.tip_x(), state.tip_vx(), ax, state.tip_y(), state.tip_vy(), ay,
                Fx, Fy, Ft, Fn, tk);
        state = step(state, {Fx, Fy}, structure, dt);
        if (!state.finite()) {
            rec.ds->meta.diverged_at_step = static_cast<std::int64_t>(i);
            throw SimulationDiverged(i, rec.ds);
        }
    }
    return std::move(*rec.ds);
}

TimeSeriesDataset simulate_discovered(const DiscoveredSystem& system,
                                      const ToolGeometry& geometry,
                                      const ProcessPoint& process,
                                      const SimulationConfig& config) {
    geometry.validate();
    process.validate();
    config.validate(geometry.teeth);
    check_kinematic_validity(geometry);
    for (EquationId id : kAllEquations)
        if (!system.equations.count(id))
            throw std::invalid_argument("simulate_discovered: system is missing equation " +
                                        std::string(to_string(id)));

    const CompiledEquation f_x = compile_equation(system.at(EquationId::x_dot), EquationId::x_dot);
    const CompiledEquation f_vx = compile_equation(system.at(EquationId::vx_dot), EquationId::vx_dot);
    const CompiledEquation f_y = compile_equation(system.at(EquationId::y_dot), EquationId::y_dot);
    const CompiledEquation f_vy = compile_equation(system.at(EquationId::vy_dot), EquationId::vy_dot);
    const CompiledEquation g_t = compile_equation(system.at(EquationId::Ft), EquationId::Ft);
    const CompiledEquation g_n = compile_equation(system.at(EquationId::Fn), EquationId::Fn);

    const double dt = 60.0 / (process.omega_rpm * config.steps_per_rev);
    const int D = delay_in_samples(config, geometry.teeth);
    const auto [phi_start, phi_exit] = engagement_window(geometry);
    const std::size_t n_steps =
        static_cast<std::size_t>(config.revolutions) * config.steps_per_rev;

    SurfaceMemory surface(D);
    Recorder rec;
    rec.ds->reserve(n_steps);
    rec.ds->meta.process = process;
    rec.ds->meta.geometry = geometry;
    rec.ds->meta.config = config;
    rec.ds->meta.case_label = to_string(system.case_label);

    std::array<double, kSlotCount> v{};
    v[kB] = process.axial_depth;
    double x = 0, vx = 0, y = 0, vy = 0;
    if (!config.initial_state.x.empty()) {
        x = config.initial_state.tip_x(); vx = config.initial_state.tip_vx();
        y = config.initial_state.tip_y(); vy = config.initial_state.tip_vy();
    }

    for (std::size_t i = 0; i < n_steps; ++i) {
        const double t = static_cast<double>(i) * dt;
        double Ft = 0.0, Fn = 0.0, Fx = 0.0, Fy = 0.0;
        ToothKinematics tk;
        for (int j = 0; j < geometry.teeth; ++j) {
            const double phi = tooth_angle(t, process.omega_rpm, j, geometry.teeth);
            if (phi < phi_start || phi > phi_exit) continue;
            const double n_cur = normal_projection(x, y, phi);
            const double n_prev = surface.read(i);
            const double h = chip_thickness(process.feed_per_tooth, phi, n_prev, n_cur);
            if (h <= 0.0) continue;
            v[kDn] = n_prev - n_cur;
            v[kNdot] = normal_projection(vx, vy, phi);
            v[kSinphi] = std::sin(phi);
            const double ft_j = g_t.eval(v);
            const double fn_j = g_n.eval(v);
            const auto [fx_j, fy_j] = project_forces(ft_j, fn_j, phi);
            Ft += ft_j; Fn += fn_j; Fx += fx_j; Fy += fy_j;
            surface.write(i, n_cur);
            tk = ToothKinematics{phi, true, n_prev - n_cur, v[kNdot]};
        }
        v[kX] = x; v[kVx] = vx; v[kY] = y; v[kVy] = vy; v[kFx] = Fx; v[kFy] = Fy;
        const double dvx = f_vx.eval(v);
        const double dvy = f_vy.eval(v);
        rec.row(t, x, vx, dvx, y, vy, dvy, Fx, Fy, Ft, Fn, tk);
        // Velocity-first update mirroring run_simulation: positions advance
        // with the already-updated velocities.
        vx += dvx * dt;
        vy += dvy * dt;
        v[kVx] = vx; v[kVy] = vy;
        x += f_x.eval(v) * dt;
        y += f_y.eval(v) * dt;
        if (!(std::isfinite(x) && std::isfinite(vx) && std::isfinite(y) && std::isfinite(vy))) {
            rec.ds->meta.diverged_at_step = static_cast<std::int64_t>(i);
            throw SimulationDiverged(i, rec.ds);
        }
    }
    return std::move(*rec.ds);
}

std::vector<std::pair<double, double>> once_per_tooth_sample(const TimeSeriesDataset& ds,
                                                             double discard_fraction) {
    if (discard_fraction < 0.0 || discard_fraction >= 1.0)
        throw std::invalid_argument("once_per_tooth_sample: discard_fraction in [0, 1)");
    const std::size_t n = ds.size();
    const int stride = ds.delay_samples();
    std::vector<std::pair<double, double>> pts;
    if (n == 0 || stride <= 0) return pts;
    const auto start = static_cast<std::size_t>(discard_fraction * static_cast<double>(n));
    for (std::size_t i = start; i < n; i += static_cast<std::size_t>(stride))
        pts.emplace_back(ds.x[i], ds.vx[i]);
    return pts;
}

}  // namespace milldyn
