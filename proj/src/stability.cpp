#include "milldyn/stability.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "milldyn/cutting.hpp"

namespace milldyn {

namespace {

std::complex<double> modal_frf(const std::vector<ModalAxis>& modes, double omega) {
    std::complex<double> sum = 0.0;
    for (const auto& m : modes)
        sum += 1.0 / std::complex<double>(m.stiffness - m.mass * omega * omega,
                                          m.damping * omega);
    return sum;
}

std::set<std::string> support_of(const SparseSolution& sol) {
    return {sol.terms.begin(), sol.terms.end()};
}

double coeff_of(const SparseSolution& sol, const std::string& term) {
    for (std::size_t i = 0; i < sol.terms.size(); ++i)
        if (sol.terms[i] == term) return sol.coefficients[i];
    throw std::logic_error("coeff_of: term not in support");
}

}  // namespace

std::complex<double> LinearMillingModel::frf_x(double omega) const {
    return modal_frf(structure.x_modes, omega);
}
std::complex<double> LinearMillingModel::frf_y(double omega) const {
    return modal_frf(structure.y_modes, omega);
}

LinearMillingModel LinearMillingModel::from_parameters(const StructuralModel& s,
                                                       const ForceModelSpec& fm,
                                                       const ToolGeometry& g) {
    s.validate();
    fm.validate();
    const auto [ps, pe] = engagement_window(g);
    return LinearMillingModel{s, fm.ktc, fm.knc, g.teeth, ps, pe};
}

LinearMillingModel extract_linear_model(const DiscoveredSystem& system,
                                        const ToolGeometry& geometry) {
    auto expect = [&](EquationId id, const std::set<std::string>& want) -> const SparseSolution& {
        auto it = system.equations.find(id);
        if (it == system.equations.end() || support_of(it->second) != want) {
            std::string msg = "extract_linear_model: nonlinear or mismatched support in ";
            msg += to_string(id);
            throw std::invalid_argument(msg);
        }
        return it->second;
    };
    expect(EquationId::x_dot, {"vx"});
    expect(EquationId::y_dot, {"vy"});
    const auto& fx = expect(EquationId::vx_dot, {"Fx", "vx", "x"});
    const auto& fy = expect(EquationId::vy_dot, {"Fy", "vy", "y"});
    const auto& ft = expect(EquationId::Ft, {"b*dn", "b*sinphi"});
    const auto& fn = expect(EquationId::Fn, {"b*dn", "b*sinphi"});

    auto modal = [](double ax_coeff, double av_coeff, double af_coeff) {
        if (!(af_coeff > 0.0))
            throw std::invalid_argument("extract_linear_model: force coefficient must be > 0");
        ModalAxis m;
        m.mass = 1.0 / af_coeff;
        m.stiffness = -ax_coeff / af_coeff;
        m.damping = -av_coeff / af_coeff;
        m.validate();
        return m;
    };
    StructuralModel structure;
    structure.x_modes = {modal(coeff_of(fx, "x"), coeff_of(fx, "vx"), coeff_of(fx, "Fx"))};
    structure.y_modes = {modal(coeff_of(fy, "y"), coeff_of(fy, "vy"), coeff_of(fy, "Fy"))};

    const auto [ps, pe] = engagement_window(geometry);
    LinearMillingModel model{structure,
                             std::abs(coeff_of(ft, "b*dn")),
                             std::abs(coeff_of(fn, "b*dn")),
                             geometry.teeth, ps, pe};
    if (!(model.ktc > 0.0) || !(model.knc > 0.0))
        throw std::invalid_argument("extract_linear_model: zero cutting coefficient");
    return model;
}

std::array<double, 4> directional_factors(double Kr, double phi_start, double phi_exit) {
    if (!(phi_start >= 0.0 && phi_start < phi_exit && phi_exit <= M_PI + 1e-12))
        throw std::invalid_argument("directional_factors: window must satisfy 0 <= start < exit <= pi");
    auto bracket = [Kr](double p) {
        const double s2 = std::sin(2.0 * p), c2 = std::cos(2.0 * p);
        return std::array<double, 4>{
            0.5 * (c2 - 2.0 * Kr * p + Kr * s2),
            0.5 * (-s2 - 2.0 * p + Kr * c2),
            0.5 * (-s2 + 2.0 * p + Kr * c2),
            0.5 * (-c2 - 2.0 * Kr * p - Kr * s2),
        };
    };
    const auto hi = bracket(phi_exit), lo = bracket(phi_start);
    return {hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2], hi[3] - lo[3]};
}

LobeDiagram zero_order_lobes(const LinearMillingModel& model, const LobeSweep& sweep) {
    if (model.teeth < 1) throw std::invalid_argument("zero_order_lobes: invalid tooth count");
    double freq_min = sweep.freq_min, freq_max = sweep.freq_max;
    if (freq_min <= 0.0 || freq_max <= freq_min) {
        double wd_max = 0.0;
        for (const auto* modes : {&model.structure.x_modes, &model.structure.y_modes})
            for (const auto& m : *modes) {
                const double zeta = m.damping_ratio();
                wd_max = std::max(wd_max,
                                  m.natural_freq_rad() * std::sqrt(std::max(0.0, 1.0 - zeta * zeta)));
            }
        freq_min = 0.5 * wd_max;
        freq_max = 1.5 * wd_max;
    }
    const int n = std::max(2, sweep.freq_samples);
    const auto [axx, axy, ayx, ayy] = directional_factors(model.Kr(), model.phi_start, model.phi_exit);

    LobeDiagram diagram;
    diagram.freq_min = freq_min;
    diagram.freq_max = freq_max;
    diagram.freq_samples = n;
    for (int i = 0; i < n; ++i) {
        const double w = freq_min + (freq_max - freq_min) * i / (n - 1);
        const std::complex<double> Gx = model.frf_x(w), Gy = model.frf_y(w);
        const std::complex<double> a0 = Gx * Gy * (axx * ayy - axy * ayx);
        const std::complex<double> a1 = axx * Gx + ayy * Gy;
        // a0 L^2 + a1 L + 1 = 0
        std::vector<std::complex<double>> roots;
        if (std::abs(a0) < 1e-300) {
            if (std::abs(a1) > 1e-300) roots.push_back(-1.0 / a1);
        } else {
            const std::complex<double> disc = std::sqrt(a1 * a1 - 4.0 * a0);
            roots.push_back((-a1 + disc) / (2.0 * a0));
            roots.push_back((-a1 - disc) / (2.0 * a0));
        }
        for (std::size_t ri = 0; ri < roots.size(); ++ri) {
            const auto& lambda = roots[ri];
            if (lambda.real() == 0.0) continue;
            const double kappa = lambda.imag() / lambda.real();
            const double b_lim = -(2.0 * M_PI * lambda.real() / (model.teeth * model.ktc)) *
                                 (1.0 + kappa * kappa);
            if (!(b_lim > 0.0) || !std::isfinite(b_lim)) continue;
            const double psi = std::atan(kappa);
            const double eps = M_PI - 2.0 * psi;
            for (int k = 0; k <= sweep.lobe_max; ++k) {
                const double T = (eps + 2.0 * M_PI * k) / w;
                if (!(T > 0.0)) continue;
                const double rpm = 60.0 / (model.teeth * T);
                if (sweep.rpm_min > 0.0 && rpm < sweep.rpm_min) continue;
                if (sweep.rpm_max > 0.0 && rpm > sweep.rpm_max) continue;
                diagram.points.push_back({k, rpm, b_lim, i, static_cast<int>(ri)});
            }
        }
    }
    if (diagram.points.empty())
        throw std::runtime_error("zero_order_lobes: empty diagram (sweep misconfigured?)");
    std::sort(diagram.points.begin(), diagram.points.end(), [](const LobePoint& a, const LobePoint& b) {
        if (a.lobe_index != b.lobe_index) return a.lobe_index < b.lobe_index;
        if (a.omega_rpm != b.omega_rpm) return a.omega_rpm < b.omega_rpm;
        return a.b_lim < b.b_lim;
    });
    return diagram;
}

void write_lobes_csv(const LobeDiagram& d, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << "lobe_index,omega_rpm,b_lim_m\n";
    char buf[96];
    for (const auto& p : d.points) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", p.lobe_index, p.omega_rpm, p.b_lim);
        f << buf;
    }
}

std::vector<double> lobe_envelope(const LobeDiagram& d, const std::vector<double>& rpm_grid) {
    std::vector<double> env(rpm_grid.size(), std::numeric_limits<double>::quiet_NaN());
    if (rpm_grid.empty()) return env;
    auto bin_of = [&](double rpm) -> std::ptrdiff_t {
        // nearest grid point by midpoint boundaries
        auto it = std::lower_bound(rpm_grid.begin(), rpm_grid.end(), rpm);
        if (it == rpm_grid.begin()) return 0;
        if (it == rpm_grid.end()) return static_cast<std::ptrdiff_t>(rpm_grid.size()) - 1;
        const auto hi = it - rpm_grid.begin();
        return (rpm - rpm_grid[hi - 1] < rpm_grid[hi] - rpm) ? hi - 1 : hi;
    };
    for (const auto& p : d.points) {
        const auto b = bin_of(p.omega_rpm);
        if (std::isnan(env[static_cast<std::size_t>(b)]) || p.b_lim < env[static_cast<std::size_t>(b)])
            env[static_cast<std::size_t>(b)] = p.b_lim;
    }
    return env;
}

StabilityClass classify_stability(const TimeSeriesDataset& ds, double tolerance) {
    if (ds.meta.diverged_at_step) return StabilityClass::divergent;
    const auto pts = once_per_tooth_sample(ds, 0.5);
    if (pts.size() < 20)
        throw std::runtime_error("classify_stability: record too short for 20 retained points");

    double x_peak = 0.0, vx_peak = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        x_peak = std::max(x_peak, std::abs(ds.x[i]));
        vx_peak = std::max(vx_peak, std::abs(ds.vx[i]));
    }
    if (x_peak == 0.0) x_peak = 1.0;
    if (vx_peak == 0.0) vx_peak = 1.0;

    const std::size_t first = pts.size() - 20;
    double max_dist = 0.0;
    for (std::size_t a = first; a < pts.size(); ++a)
        for (std::size_t b = a + 1; b < pts.size(); ++b) {
            const double dx = (pts[a].first - pts[b].first) / x_peak;
            const double dv = (pts[a].second - pts[b].second) / vx_peak;
            max_dist = std::max(max_dist, std::hypot(dx, dv));
        }
    return max_dist < tolerance ? StabilityClass::stable : StabilityClass::unstable;
}

void write_poincare_csv(const std::vector<std::pair<double, double>>& pts,
                        const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << "x,vx\n";
    char buf[80];
    for (const auto& [x, vx] : pts) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", x, vx);
        f << buf;
    }
}

}  // namespace milldyn
