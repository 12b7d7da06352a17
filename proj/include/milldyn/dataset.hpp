// Sampled milling measurement records: one column per measured channel plus
// tooth kinematics, with the process metadata needed to reproduce the cut.
// CSV layout is fixed:
//   t,x,vx,ax,y,vy,ay,Fx,Fy,Ft,Fn,phi,engaged,delta_n,n_dot
// with a JSON sidecar holding the metadata.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "milldyn/types.hpp"

namespace milldyn {

struct SimulationConfig {
    int revolutions = 40;
    int steps_per_rev = 1000;
    StateVector initial_state;  // empty -> all zeros sized from the structure

    void validate(int teeth) const {
        if (revolutions < 1) throw std::invalid_argument("SimulationConfig: revolutions >= 1");
        if (steps_per_rev < 1) throw std::invalid_argument("SimulationConfig: steps_per_rev >= 1");
        if (steps_per_rev % teeth != 0)
            throw std::invalid_argument(
                "SimulationConfig: steps_per_rev must be divisible by the tooth count");
    }
};

// Tooth-period delay expressed in samples.
inline int delay_in_samples(const SimulationConfig& config, int teeth) {
    config.validate(teeth);
    return config.steps_per_rev / teeth;
}

struct DatasetMeta {
    ProcessPoint process;
    ToolGeometry geometry;
    SimulationConfig config;
    std::string case_label = "I";
    double noise_ratio = 0.0;
    std::uint64_t seed = 0;
    // Set when the producing simulation aborted on non-finite state.
    std::optional<std::int64_t> diverged_at_step;
};

struct TimeSeriesDataset {
    std::vector<double> t, x, vx, ax, y, vy, ay, Fx, Fy, Ft, Fn;
    std::vector<double> phi, delta_n, n_dot;
    std::vector<std::uint8_t> engaged;
    DatasetMeta meta;

    std::size_t size() const { return t.size(); }
    double dt() const {
        return 60.0 / (meta.process.omega_rpm * meta.config.steps_per_rev);
    }
    int delay_samples() const {
        return meta.config.steps_per_rev / meta.geometry.teeth;
    }

    void reserve(std::size_t n);
    // First n samples (n clamped to size); metadata carried over.
    TimeSeriesDataset head(std::size_t n) const;
    void validate_consistent() const;
};

// CSV + JSON sidecar round trip. `path` is the CSV file; the sidecar lives at
// path with its extension replaced by ".json" (data.csv -> data.json).
void write_dataset_csv(const TimeSeriesDataset& ds, const std::string& path);
TimeSeriesDataset read_dataset_csv(const std::string& path);

std::string sidecar_path(const std::string& csv_path);

}  // namespace milldyn
