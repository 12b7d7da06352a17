// Experiment orchestration: case presets, measurement-noise injection, the
// exact-discovery metric, and the speed x noise sweep with report emission.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "milldyn/discovery.hpp"
#include "milldyn/simulator.hpp"

namespace milldyn {

// Parameter set of one simulated milling configuration.
struct CasePreset {
    CaseLabel case_label = CaseLabel::I;
    StructuralModel structure;
    ForceModelSpec force_model;
    ToolGeometry geometry;
    double feed_per_tooth = 1e-4;
    SimulationConfig sim;

    ProcessPoint process(double omega_rpm, double depth) const {
        return ProcessPoint{omega_rpm, depth, feed_per_tooth};
    }
};

// Symmetric single-mode structure with the standard benchmark parameters;
// case II adds edge force and nonlinear process damping.
CasePreset make_case_preset(CaseLabel c);

struct NoiseSpec {
    double ratio = 0.0;
    std::uint64_t seed = 0;
};

// Adds r*sigma_column*eps Gaussian noise to every measurable column
// (x, vx, ax, y, vy, ay, Fx, Fy, Ft, Fn) of one dataset, with one stream per
// column derived from the seed. delta_n and n_dot are recomputed from the
// noisy states by replaying the surface memory over the recorded engagement
// pattern. Rejects datasets that already carry noise.
TimeSeriesDataset inject_noise(const TimeSeriesDataset& ds, const NoiseSpec& spec);

// True supports and coefficients implied by a preset at one spindle speed,
// generated from the same parameter set the simulator integrates.
struct GroundTruth {
    std::map<EquationId, std::map<std::string, double>> equations;

    const std::map<std::string, double>& at(EquationId id) const { return equations.at(id); }
    DiscoveredSystem as_discovered_system(CaseLabel c, double omega_rpm) const;
};

GroundTruth ground_truth(const CasePreset& preset, double omega_rpm);

// Number of equations whose discovered support matches truth exactly (0..6).
int a_metric(const DiscoveredSystem& discovered, const GroundTruth& truth);

struct CoefficientDeviation {
    // term -> relative error, per equation; only terms present in both.
    std::map<EquationId, std::map<std::string, double>> per_term;
    std::vector<std::string> mismatched_terms;  // "<eq>:<term>" diagnostics
    double mean = 0.0;
};

CoefficientDeviation coefficient_deviation(const DiscoveredSystem& discovered,
                                           const GroundTruth& truth);

struct SweepCell {
    double omega_rpm = 0.0;
    double noise_ratio = 0.0;
    std::uint64_t seed = 0;
    int a_value = -1;
    double mean_coefficient_deviation = 0.0;
    double wall_time_s = 0.0;
    std::string error;  // non-empty when the cell failed
    std::optional<DiscoveredSystem> system;

    bool ok() const { return error.empty(); }
};

struct SweepReport {
    CaseLabel case_label = CaseLabel::I;
    std::vector<double> speeds;
    std::vector<double> depths;
    std::vector<double> noise_ratios;
    std::vector<std::uint64_t> seeds;
    std::vector<SweepCell> cells;  // ordered (speed, ratio, seed)

    const SweepCell* find(double omega, double ratio, std::uint64_t seed) const;
    std::string to_json() const;
};

// Noise-ratio grid of the benchmark tables (0 .. 1000%).
extern const std::vector<double> kNoiseRatioSweep;

struct CaseStudyOptions {
    std::vector<double> speeds = {4000, 6000, 8000, 10000, 12000};
    std::vector<double> depths = {0.002, 0.004, 0.006, 0.008, 0.010, 0.012};
    std::vector<double> noise_ratios = kNoiseRatioSweep;
    std::vector<std::uint64_t> seeds = {1};
    std::size_t training_samples = 2000;  // per cut, taken from the start
    double lambda2 = 100.0;
    double bound_M = 1000.0;
    std::map<EquationId, int> k_overrides;  // merged over the case defaults
};

SweepReport run_case_study(CaseLabel case_label, const CaseStudyOptions& options);

// Simulates the preset's depth grid at one speed and truncates each cut to
// the training window. The building block run_case_study iterates.
std::vector<TimeSeriesDataset> training_datasets(const CasePreset& preset, double omega_rpm,
                                                 const std::vector<double>& depths,
                                                 std::size_t training_samples);

enum class ReportFormat { csv, markdown };

// Writes the A-value grid, deviation summary, and per-cell equation listings
// under out_dir; returns the paths written.
std::vector<std::string> emit_report(const SweepReport& report, ReportFormat format,
                                     const std::string& out_dir);

}  // namespace milldyn
