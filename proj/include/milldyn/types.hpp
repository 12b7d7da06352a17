// Domain types for milling dynamics: modal structure, force model
// coefficients, tool geometry, and process parameters. All quantities SI
// unless a field name says otherwise (omega_rpm).
#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace milldyn {

// One structural vibration mode at the tool tip.
struct ModalAxis {
    double mass = 0.0;       // kg
    double damping = 0.0;    // N s/m
    double stiffness = 0.0;  // N/m

    void validate() const {
        if (!(mass > 0.0)) throw std::invalid_argument("ModalAxis: mass must be > 0");
        if (!(stiffness > 0.0)) throw std::invalid_argument("ModalAxis: stiffness must be > 0");
        if (!(damping >= 0.0)) throw std::invalid_argument("ModalAxis: damping must be >= 0");
    }
    double natural_freq_rad() const { return std::sqrt(stiffness / mass); }
    double damping_ratio() const { return damping / (2.0 * std::sqrt(stiffness * mass)); }
};

// Modal model of the machine/tool structure, p modes in x and q modes in y.
struct StructuralModel {
    std::vector<ModalAxis> x_modes;
    std::vector<ModalAxis> y_modes;

    void validate() const {
        if (x_modes.empty() || y_modes.empty())
            throw std::invalid_argument("StructuralModel: at least one mode per axis");
        for (const auto& m : x_modes) m.validate();
        for (const auto& m : y_modes) m.validate();
    }
    static StructuralModel symmetric(double mass, double damping, double stiffness) {
        ModalAxis a{mass, damping, stiffness};
        return StructuralModel{{a}, {a}};
    }
};

// Cutting, edge, and process-damping coefficients of the tangential/normal
// force laws. A purely regenerative model has kte = kne = Ct = Cn = 0.
struct ForceModelSpec {
    double ktc = 0.0;  // N/m^2, tangential cutting
    double knc = 0.0;  // N/m^2, normal cutting
    double kte = 0.0;  // N/m, tangential edge
    double kne = 0.0;  // N/m, normal edge
    double Ct = 0.0;   // N s/m^2, tangential process damping
    double Cn = 0.0;   // N s/m^2, normal process damping

    void validate() const {
        if (!(ktc > 0.0) || !(knc > 0.0))
            throw std::invalid_argument("ForceModelSpec: cutting coefficients must be > 0");
        if (kte < 0.0 || kne < 0.0 || Ct < 0.0 || Cn < 0.0)
            throw std::invalid_argument("ForceModelSpec: edge/damping coefficients must be >= 0");
    }
    bool purely_regenerative() const {
        return kte == 0.0 && kne == 0.0 && Ct == 0.0 && Cn == 0.0;
    }
};

enum class MillingDirection { up, down };

inline std::string to_string(MillingDirection d) {
    return d == MillingDirection::up ? "up" : "down";
}
inline MillingDirection milling_direction_from_string(const std::string& s) {
    if (s == "up") return MillingDirection::up;
    if (s == "down") return MillingDirection::down;
    throw std::invalid_argument("milling_direction must be 'up' or 'down'");
}

struct ToolGeometry {
    double diameter = 0.0;          // m
    int teeth = 0;                  // Nt
    double radial_immersion = 0.0;  // fraction of diameter, (0, 1]
    MillingDirection milling_direction = MillingDirection::up;

    void validate() const {
        if (!(diameter > 0.0)) throw std::invalid_argument("ToolGeometry: diameter must be > 0");
        if (teeth < 1) throw std::invalid_argument("ToolGeometry: teeth must be >= 1");
        if (!(radial_immersion > 0.0) || radial_immersion > 1.0)
            throw std::invalid_argument("ToolGeometry: radial_immersion must be in (0, 1]");
    }
    double tooth_pitch() const { return 2.0 * M_PI / teeth; }
};

struct ProcessPoint {
    double omega_rpm = 0.0;      // spindle speed, rev/min
    double axial_depth = 0.0;    // b, m
    double feed_per_tooth = 0.0; // ft, m

    void validate() const {
        if (!(omega_rpm > 0.0) || !(axial_depth > 0.0) || !(feed_per_tooth > 0.0))
            throw std::invalid_argument("ProcessPoint: all fields must be > 0");
    }
    // Surface cutting speed, constant over a cut.
    double cutting_speed(const ToolGeometry& g) const {
        return M_PI * g.diameter * omega_rpm / 60.0;
    }
};

// Full state of the structure: per-mode displacement and velocity on each
// axis (2p + 2q entries). The physical tool-tip deflection is the sum over
// modes of an axis.
struct StateVector {
    std::vector<double> x, vx, y, vy;

    static StateVector zeros(std::size_t p, std::size_t q) {
        StateVector s;
        s.x.assign(p, 0.0); s.vx.assign(p, 0.0);
        s.y.assign(q, 0.0); s.vy.assign(q, 0.0);
        return s;
    }
    static StateVector single(double x0, double vx0, double y0, double vy0) {
        return StateVector{{x0}, {vx0}, {y0}, {vy0}};
    }
    double tip_x() const { double s = 0; for (double v : x) s += v; return s; }
    double tip_vx() const { double s = 0; for (double v : vx) s += v; return s; }
    double tip_y() const { double s = 0; for (double v : y) s += v; return s; }
    double tip_vy() const { double s = 0; for (double v : vy) s += v; return s; }
    bool finite() const {
        for (const auto* vec : {&x, &vx, &y, &vy})
            for (double v : *vec)
                if (!std::isfinite(v)) return false;
        return true;
    }
};

// Per-sample kinematics of the engaged tooth. When no tooth cuts, phi is NaN
// and the derived quantities are zero.
struct ToothKinematics {
    double phi = std::numeric_limits<double>::quiet_NaN();  // rad
    bool engaged = false;
    double delta_n = 0.0;  // n(t - tau) - n(t), m
    double n_dot = 0.0;    // normal velocity, m/s
};

}  // namespace milldyn
