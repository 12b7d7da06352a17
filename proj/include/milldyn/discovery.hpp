// Cardinality-constrained sparse regression solved to certified global
// optimality by subset enumeration, the two-stage select-then-refit
// algorithm, and the six-equation system assembly.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "milldyn/feature_library.hpp"

namespace milldyn {

struct DiscoveryConfig {
    int k = 1;                   // active terms per equation
    double lambda2 = 100.0;      // l2 weight of the selection objective
    double bound_M = 1000.0;     // coefficient bound on the normalized scale
    // Enumeration refuses problems with more subsets than this.
    std::uint64_t enumeration_guard = 10'000'000;

    void validate(std::size_t P) const {
        if (k < 1 || static_cast<std::size_t>(k) > P)
            throw std::invalid_argument("DiscoveryConfig: need 1 <= k <= P");
        if (lambda2 < 0.0) throw std::invalid_argument("DiscoveryConfig: lambda2 >= 0");
        if (!(bound_M > 0.0)) throw std::invalid_argument("DiscoveryConfig: bound_M > 0");
    }
};

// Ridge weight applied on the unit-norm normalized scale per unit of
// lambda2. The selection stage is insensitive to the exact value across
// [0, 1e-6]; larger values let the penalty distort support selection.
constexpr double kSelectionRidgeScale = 1e-6;

struct SparseSolution {
    std::vector<int> support;                    // ascending column indices
    std::vector<double> coefficients_normalized; // on the normalized scale
    std::vector<double> coefficients;            // original scale, after refit
    std::vector<std::string> terms;              // canonical labels of support
    double objective = 0.0;                      // normalized ridge objective
};

struct DiscoveredSystem {
    CaseLabel case_label = CaseLabel::I;
    double omega_rpm = 0.0;
    double noise_ratio = 0.0;
    std::uint64_t seed = 0;
    std::map<EquationId, int> k_per_equation;
    double lambda2 = 100.0;
    double bound_M = 1000.0;
    double wall_time_s = 0.0;
    std::map<EquationId, SparseSolution> equations;

    const SparseSolution& at(EquationId id) const { return equations.at(id); }
    std::optional<double> coefficient(EquationId id, const std::string& term) const;
    std::string to_json() const;
    static DiscoveredSystem from_json(const std::string& text);
};

// Globally optimal k-subset of the normalized problem under the ridge
// objective, enumerated exhaustively. Subsets whose coefficients exceed
// bound_M are infeasible; ties break to the lexicographically smallest
// support.
SparseSolution solve_best_subset(const NormalizedProblem& problem, const DiscoveryConfig& config);

// Plain least squares on the selected columns of the original-scale problem.
std::vector<double> refit_original_scale(const RegressionProblem& problem,
                                         const std::vector<int>& support);

// normalize -> select -> refit.
SparseSolution discover_equation(const RegressionProblem& problem, const DiscoveryConfig& config);

std::map<EquationId, int> default_k_per_equation(CaseLabel case_label);

// Per-equation noise applied to an assembled problem's target: the Eq-style
// ratio r times the std of the stacked target column (sigma may be supplied
// when the assembled target omits rows of the underlying column, as for the
// engaged-only force equations). Streams are keyed (seed, dataset, equation)
// through the row provenance.
void add_target_noise(RegressionProblem& problem, double noise_ratio, std::uint64_t seed,
                      int equation_index, std::optional<double> sigma_override = {});

struct SystemDiscoveryOptions {
    double lambda2 = 100.0;
    double bound_M = 1000.0;
    double noise_ratio = 0.0;
    std::uint64_t seed = 1;
};

// Runs discover_equation for all six equations, with per-equation target
// noise when noise_ratio > 0. Datasets must share speed, geometry, and case.
DiscoveredSystem discover_system(const std::vector<TimeSeriesDataset>& datasets,
                                 CaseLabel case_label,
                                 const std::map<EquationId, int>& k_per_equation,
                                 const SystemDiscoveryOptions& options = {});

}  // namespace milldyn
