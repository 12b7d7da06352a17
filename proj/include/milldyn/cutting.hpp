// Pure cutting-mechanics functions: tooth rotation, engagement window,
// normal-direction projection, chip thickness, and force laws.
//
// Conventions used throughout the project:
//   n   = x sin(phi) + y cos(phi)           (normal / chip-thickness direction)
//   h   = ft sin(phi) + n(t - tau) - n(t)   (instantaneous chip thickness)
//   Fx  = -Ft cos(phi) + Fn sin(phi)
//   Fy  =  Ft sin(phi) + Fn cos(phi)
#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

#include "milldyn/types.hpp"

namespace milldyn {

// Rotation angle of tooth `tooth_index` at time t, in [0, 2*pi).
inline double tooth_angle(double t, double omega_rpm, int tooth_index, int teeth) {
    if (!(omega_rpm > 0.0)) throw std::invalid_argument("tooth_angle: omega must be > 0");
    if (tooth_index < 0 || tooth_index >= teeth)
        throw std::invalid_argument("tooth_angle: tooth_index out of range");
    const double raw = (2.0 * M_PI * omega_rpm / 60.0) * t
                     + tooth_index * 2.0 * M_PI / teeth;
    double phi = std::fmod(raw, 2.0 * M_PI);
    if (phi < 0.0) phi += 2.0 * M_PI;
    return phi;
}

// Entry/exit angles of the radial engagement arc.
// Up milling enters at zero chip thickness (phi = 0); down milling exits at pi.
inline std::pair<double, double> engagement_window(const ToolGeometry& g) {
    g.validate();
    const double arc = std::acos(1.0 - 2.0 * g.radial_immersion);
    if (g.milling_direction == MillingDirection::up) return {0.0, arc};
    return {M_PI - arc, M_PI};
}

// Projection of a (x, y) deflection onto the chip-thickness direction at
// tooth angle phi. Applying it to (vx, vy) yields the normal velocity.
inline double normal_projection(double x, double y, double phi) {
    return x * std::sin(phi) + y * std::cos(phi);
}

// Instantaneous chip thickness; may be negative (loss of contact), the
// caller gates on h > 0. Grouped as static part plus regenerative difference
// so the n_prev = n_cur case reduces to ft sin(phi) exactly.
inline double chip_thickness(double ft, double phi, double n_prev, double n_cur) {
    return ft * std::sin(phi) + (n_prev - n_cur);
}

// Tangential/normal force on one cutting tooth. Valid only while material is
// being removed (h > 0); out-of-cut teeth contribute zero force instead.
inline std::pair<double, double> tooth_forces(double h, double n_dot, double b,
                                              double cutting_speed,
                                              const ForceModelSpec& fm) {
    if (!(h > 0.0)) throw std::invalid_argument("tooth_forces: requires h > 0 (engaged, cutting)");
    if (!(b > 0.0)) throw std::invalid_argument("tooth_forces: requires b > 0");
    if (!(cutting_speed > 0.0)) throw std::invalid_argument("tooth_forces: requires cutting_speed > 0");
    const double damping = (b / cutting_speed) * n_dot * n_dot;
    const double Ft = fm.ktc * b * h + fm.kte * b - fm.Ct * damping;
    const double Fn = fm.knc * b * h + fm.kne * b - fm.Cn * damping;
    return {Ft, Fn};
}

// Rotate cutter-frame forces into the machine frame.
inline std::pair<double, double> project_forces(double Ft, double Fn, double phi) {
    const double c = std::cos(phi), s = std::sin(phi);
    return {-Ft * c + Fn * s, Ft * s + Fn * c};
}

}  // namespace milldyn
