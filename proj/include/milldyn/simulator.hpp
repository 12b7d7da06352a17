// Time-domain milling simulator: integrates the regenerative milling
// equations with a per-angular-slot surface memory, and re-simulates
// discovered equation systems through the same kinematic loop.
#pragma once

#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "milldyn/dataset.hpp"
#include "milldyn/types.hpp"

namespace milldyn {

struct DiscoveredSystem;  // discovery.hpp

// Raised when the integrated state goes non-finite. Unstable cuts blowing up
// under the explicit integrator are expected; stability checks catch this and
// classify the cut from the partial record.
class SimulationDiverged : public std::runtime_error {
public:
    SimulationDiverged(std::size_t step, std::shared_ptr<TimeSeriesDataset> partial)
        : std::runtime_error("divergent simulation at step " + std::to_string(step)),
          step_(step), partial_(std::move(partial)) {}
    std::size_t step() const { return step_; }
    const TimeSeriesDataset& partial() const { return *partial_; }
    std::shared_ptr<TimeSeriesDataset> partial_ptr() const { return partial_; }

private:
    std::size_t step_;
    std::shared_ptr<TimeSeriesDataset> partial_;
};

// Surface left by the previous tooth pass, one slot per sample of the tooth
// period. Slots update only when a cut actually removes material, so the old
// surface persists through loss-of-contact.
class SurfaceMemory {
public:
    explicit SurfaceMemory(int slots) : ring_(static_cast<std::size_t>(slots), 0.0) {
        if (slots < 1) throw std::invalid_argument("SurfaceMemory: need >= 1 slot");
    }
    int slots() const { return static_cast<int>(ring_.size()); }
    double read(std::size_t step) const { return ring_[step % ring_.size()]; }
    void write(std::size_t step, double n) { ring_[step % ring_.size()] = n; }

private:
    std::vector<double> ring_;
};

// One integrator step. Acceleration is evaluated at the pre-step state;
// velocity updates first and the position update uses the new velocity
// (the standard time-domain milling scheme; the fully explicit order is
// numerically anti-damped at practical step counts).
StateVector step(const StateVector& state, std::pair<double, double> forces,
                 const StructuralModel& structure, double dt);

// Modal-summed accelerations (ax, ay) from the equations of motion at the
// given state and force level.
std::pair<double, double> tip_accelerations(const StateVector& state,
                                            std::pair<double, double> forces,
                                            const StructuralModel& structure);

TimeSeriesDataset run_simulation(const StructuralModel& structure,
                                 const ForceModelSpec& force_model,
                                 const ToolGeometry& geometry,
                                 const ProcessPoint& process,
                                 const SimulationConfig& config);

// Same stepping loop, but forces and state derivatives come from the
// discovered term-library expressions; Fx/Fy from the projection identities.
TimeSeriesDataset simulate_discovered(const DiscoveredSystem& system,
                                      const ToolGeometry& geometry,
                                      const ProcessPoint& process,
                                      const SimulationConfig& config);

// Stroboscopic (x, vx) samples at the tooth-passing period, after discarding
// the first discard_fraction of the record.
std::vector<std::pair<double, double>> once_per_tooth_sample(const TimeSeriesDataset& ds,
                                                             double discard_fraction);

}  // namespace milldyn
