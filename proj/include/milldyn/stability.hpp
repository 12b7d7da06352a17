// Chatter stability tools: analytical lobe diagrams by the zero-order
// (averaged directional factor) frequency-domain method for linear models,
// and a time-domain Poincare classifier that also covers nonlinear models.
#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "milldyn/discovery.hpp"
#include "milldyn/simulator.hpp"
#include "milldyn/types.hpp"

namespace milldyn {

struct LinearMillingModel {
    StructuralModel structure;
    double ktc = 0.0;
    double knc = 0.0;
    int teeth = 0;
    double phi_start = 0.0;
    double phi_exit = 0.0;

    double Kr() const { return knc / ktc; }
    std::complex<double> frf_x(double omega) const;
    std::complex<double> frf_y(double omega) const;

    static LinearMillingModel from_parameters(const StructuralModel& s,
                                              const ForceModelSpec& fm,
                                              const ToolGeometry& g);
};

// Modal and cutting parameters recovered from a discovered linear system.
// Requires exactly the regenerative case-I support pattern; systems with
// edge or process-damping terms are rejected.
LinearMillingModel extract_linear_model(const DiscoveredSystem& system,
                                        const ToolGeometry& geometry);

// Integrated directional factors (axx, axy, ayx, ayy) of the averaged
// force-direction matrix over the engagement arc.
std::array<double, 4> directional_factors(double Kr, double phi_start, double phi_exit);

struct LobePoint {
    int lobe_index = 0;
    double omega_rpm = 0.0;
    double b_lim = 0.0;  // m
    // provenance of the sample within the sweep, for pointwise comparison of
    // diagrams computed on a shared grid
    int freq_index = 0;
    int root_index = 0;
};

struct LobeDiagram {
    std::vector<LobePoint> points;  // sorted by (lobe_index, omega_rpm)
    double freq_min = 0.0, freq_max = 0.0;
    int freq_samples = 0;
};

struct LobeSweep {
    // Chatter-frequency sweep; zeros mean 0.5x..1.5x the highest damped
    // natural frequency.
    double freq_min = 0.0;
    double freq_max = 0.0;
    int freq_samples = 2000;
    int lobe_max = 10;
    double rpm_min = 0.0;   // 0 -> unbounded
    double rpm_max = 0.0;
};

LobeDiagram zero_order_lobes(const LinearMillingModel& model, const LobeSweep& sweep = {});

void write_lobes_csv(const LobeDiagram& d, const std::string& path);

// Minimum stable depth over an rpm grid (the stability boundary envelope);
// NaN for grid cells no lobe crosses.
std::vector<double> lobe_envelope(const LobeDiagram& d, const std::vector<double>& rpm_grid);

enum class StabilityClass { stable, unstable, divergent };
inline const char* to_string(StabilityClass c) {
    switch (c) {
        case StabilityClass::stable: return "stable";
        case StabilityClass::unstable: return "unstable";
        case StabilityClass::divergent: return "divergent";
    }
    return "?";
}

// Poincare-based classification: divergent if the producing simulation
// aborted; otherwise stable when the last 20 once-per-tooth samples cluster
// within `tolerance` in amplitude-normalized (x, vx) coordinates.
StabilityClass classify_stability(const TimeSeriesDataset& ds, double tolerance = 0.01);

void write_poincare_csv(const std::vector<std::pair<double, double>>& pts,
                        const std::string& path);

}  // namespace milldyn
