#include "milldyn/discovery.hpp"

#include <json.hpp>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <numeric>

#include "milldyn/rng.hpp"

namespace milldyn {

namespace {

// C(n, k) with saturation at 2^63-ish; plenty for guard comparisons.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    long double acc = 1.0L;
    for (std::uint64_t i = 1; i <= k; ++i) acc = acc * static_cast<long double>(n - k + i) / i;
    if (acc > 9e18L) return UINT64_MAX;
    return static_cast<std::uint64_t>(acc + 0.5L);
}

constexpr double kSubsetConditionFloor = 1e-10;

}  // namespace

std::optional<double> DiscoveredSystem::coefficient(EquationId id, const std::string& term) const {
    auto it = equations.find(id);
    if (it == equations.end()) return std::nullopt;
    for (std::size_t i = 0; i < it->second.terms.size(); ++i)
        if (it->second.terms[i] == term) return it->second.coefficients[i];
    return std::nullopt;
}

SparseSolution solve_best_subset(const NormalizedProblem& problem, const DiscoveryConfig& config) {
    const Eigen::Index P = problem.design.cols();
    config.validate(static_cast<std::size_t>(P));
    const int k = config.k;

    std::vector<int> selectable;
    for (Eigen::Index c = 0; c < P; ++c)
        if (!problem.excluded[static_cast<std::size_t>(c)]) selectable.push_back(static_cast<int>(c));
    if (static_cast<int>(selectable.size()) < k)
        throw std::runtime_error("solve_best_subset: fewer selectable columns than k");

    const std::uint64_t n_subsets = binomial(selectable.size(), static_cast<std::uint64_t>(k));
    if (n_subsets > config.enumeration_guard)
        throw std::runtime_error("solve_best_subset: " + std::to_string(n_subsets) +
                                 " subsets exceed the enumeration guard (" +
                                 std::to_string(config.enumeration_guard) + ")");

    const Eigen::MatrixXd gram = problem.design.transpose() * problem.design;
    const Eigen::VectorXd corr = problem.design.transpose() * problem.target;
    const double target_sq = problem.target.squaredNorm();

    // Ascending-lexicographic enumeration; the first optimum seen wins ties,
    // which is exactly the lexicographically-smallest-support rule.
    std::vector<int> pos(static_cast<std::size_t>(k));
    std::iota(pos.begin(), pos.end(), 0);
    const int m = static_cast<int>(selectable.size());

    Eigen::MatrixXd A(k, k);
    Eigen::VectorXd rhs(k);
    SparseSolution best;
    double best_obj = std::numeric_limits<double>::infinity();
    bool found = false;

    while (true) {
        for (int i = 0; i < k; ++i) {
            rhs(i) = corr(selectable[static_cast<std::size_t>(pos[static_cast<std::size_t>(i)])]);
            for (int j = 0; j < k; ++j)
                A(i, j) = gram(selectable[static_cast<std::size_t>(pos[static_cast<std::size_t>(i)])],
                               selectable[static_cast<std::size_t>(pos[static_cast<std::size_t>(j)])]);
            A(i, i) += config.lambda2;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A);
        const auto& evals = eig.eigenvalues();
        const double ev_max = evals(k - 1);
        if (evals(0) > kSubsetConditionFloor * ev_max && ev_max > 0.0) {
            const Eigen::VectorXd xi =
                eig.eigenvectors() * (eig.eigenvectors().transpose() * rhs).cwiseQuotient(evals);
            if (xi.cwiseAbs().maxCoeff() <= config.bound_M) {
                // At the ridge optimum the objective collapses to y'y - xi'b.
                const double obj = target_sq - xi.dot(rhs);
                if (!found || obj < best_obj - 1e-12 * std::abs(best_obj)) {
                    best_obj = obj;
                    best.support.resize(static_cast<std::size_t>(k));
                    for (int i = 0; i < k; ++i)
                        best.support[static_cast<std::size_t>(i)] =
                            selectable[static_cast<std::size_t>(pos[static_cast<std::size_t>(i)])];
                    best.coefficients_normalized.assign(xi.data(), xi.data() + k);
                    best.objective = obj;
                    found = true;
                }
            }
        }
        // next combination
        int i = k - 1;
        while (i >= 0 && pos[static_cast<std::size_t>(i)] == m - k + i) --i;
        if (i < 0) break;
        ++pos[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j)
            pos[static_cast<std::size_t>(j)] = pos[static_cast<std::size_t>(j - 1)] + 1;
    }

    if (!found)
        throw std::runtime_error(
            "solve_best_subset: every subset infeasible (bound or rank); relax bound_M?");
    best.terms.reserve(best.support.size());
    for (int c : best.support) best.terms.push_back(problem.labels[static_cast<std::size_t>(c)]);
    return best;
}

std::vector<double> refit_original_scale(const RegressionProblem& problem,
                                         const std::vector<int>& support) {
    if (support.empty()) throw std::invalid_argument("refit_original_scale: empty support");
    Eigen::MatrixXd sub(problem.design.rows(), static_cast<Eigen::Index>(support.size()));
    for (std::size_t i = 0; i < support.size(); ++i)
        sub.col(static_cast<Eigen::Index>(i)) = problem.design.col(support[i]);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sub, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (sv(0) <= 0.0 || sv(sv.size() - 1) / sv(0) <= kSubsetConditionFloor) {
        std::string terms;
        for (int c : support) terms += problem.labels[static_cast<std::size_t>(c)] + " ";
        throw std::runtime_error("refit_original_scale: rank-deficient submatrix over {" + terms +
                                 "} (sv ratio <= 1e-10)");
    }
    const Eigen::VectorXd xi = svd.solve(problem.target);
    return {xi.data(), xi.data() + xi.size()};
}

SparseSolution discover_equation(const RegressionProblem& problem, const DiscoveryConfig& config) {
    NormalizedProblem normalized = normalize_columns(problem);
    // The selection-stage ridge lives on the normalized Gram's scale; see
    // kSelectionRidgeScale.
    DiscoveryConfig selection = config;
    selection.lambda2 = config.lambda2 * kSelectionRidgeScale;
    SparseSolution sol = solve_best_subset(normalized, selection);
    sol.coefficients = refit_original_scale(problem, sol.support);
    return sol;
}

std::map<EquationId, int> default_k_per_equation(CaseLabel case_label) {
    std::map<EquationId, int> k = {
        {EquationId::x_dot, 1}, {EquationId::vx_dot, 3},
        {EquationId::y_dot, 1}, {EquationId::vy_dot, 3},
        {EquationId::Ft, 2},    {EquationId::Fn, 2},
    };
    if (case_label == CaseLabel::II) {
        k[EquationId::Ft] = 4;
        k[EquationId::Fn] = 4;
    }
    return k;
}

void add_target_noise(RegressionProblem& problem, double noise_ratio, std::uint64_t seed,
                      int equation_index, std::optional<double> sigma_override) {
    if (noise_ratio == 0.0) return;
    if (noise_ratio < 0.0) throw std::invalid_argument("add_target_noise: ratio >= 0");
    double sigma;
    if (sigma_override) {
        sigma = *sigma_override;
    } else {
        const double mean = problem.target.mean();
        sigma = std::sqrt((problem.target.array() - mean).square().mean());
    }
    int current_cut = -1;
    std::optional<GaussianStream> stream;
    for (Eigen::Index r = 0; r < problem.target.size(); ++r) {
        const int cut = problem.provenance[static_cast<std::size_t>(r)].first;
        if (cut != current_cut) {
            current_cut = cut;
            stream.emplace(derive_stream_seed(seed, cut, equation_index));
        }
        problem.target(r) += noise_ratio * sigma * stream->next();
    }
}

namespace {

double stacked_column_std(const std::vector<TimeSeriesDataset>& datasets, EquationId eq) {
    const bool tangential = (eq == EquationId::Ft);
    double sum = 0.0, n = 0.0;
    for (const auto& ds : datasets)
        for (double v : (tangential ? ds.Ft : ds.Fn)) { sum += v; n += 1.0; }
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& ds : datasets)
        for (double v : (tangential ? ds.Ft : ds.Fn)) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / n);
}

}  // namespace

DiscoveredSystem discover_system(const std::vector<TimeSeriesDataset>& datasets,
                                 CaseLabel case_label,
                                 const std::map<EquationId, int>& k_per_equation,
                                 const SystemDiscoveryOptions& options) {
    for (EquationId id : kAllEquations)
        if (!k_per_equation.count(id))
            throw std::invalid_argument("discover_system: missing k for equation " +
                                        std::string(to_string(id)));
    const auto t0 = std::chrono::steady_clock::now();

    DiscoveredSystem system;
    system.case_label = case_label;
    system.omega_rpm = datasets.empty() ? 0.0 : datasets.front().meta.process.omega_rpm;
    system.noise_ratio = options.noise_ratio;
    system.seed = options.seed;
    system.k_per_equation = k_per_equation;
    system.lambda2 = options.lambda2;
    system.bound_M = options.bound_M;

    int eq_index = 0;
    for (EquationId id : kAllEquations) {
        RegressionProblem problem = assemble_problem(id, datasets, case_label);
        if (options.noise_ratio > 0.0) {
            // Force targets keep only engaged rows; their Eq-style sigma is
            // still the std of the full stacked column, zeros included.
            std::optional<double> sigma;
            if (id == EquationId::Ft || id == EquationId::Fn)
                sigma = stacked_column_std(datasets, id);
            add_target_noise(problem, options.noise_ratio, options.seed, eq_index, sigma);
        }
        DiscoveryConfig config;
        config.k = k_per_equation.at(id);
        config.lambda2 = options.lambda2;
        config.bound_M = options.bound_M;
        try {
            system.equations[id] = discover_equation(problem, config);
        } catch (const std::exception& e) {
            throw std::runtime_error("discover_system: equation " +
                                     std::string(to_string(id)) + " failed: " + e.what());
        }
        ++eq_index;
    }
    system.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return system;
}

std::string DiscoveredSystem::to_json() const {
    nlohmann::ordered_json j;
    j["case"] = to_string(case_label);
    j["omega_rpm"] = omega_rpm;
    j["noise_ratio"] = noise_ratio;
    j["seed"] = seed;
    nlohmann::ordered_json kj;
    for (const auto& [id, kv] : k_per_equation) kj[to_string(id)] = kv;
    j["config"] = {{"k_per_equation", kj}, {"lambda2", lambda2}, {"bound_M", bound_M}};
    j["wall_time_s"] = wall_time_s;
    nlohmann::ordered_json eqs;
    for (const auto& [id, sol] : equations) {
        nlohmann::ordered_json terms = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < sol.terms.size(); ++i)
            terms.push_back({{"term", sol.terms[i]}, {"coeff", sol.coefficients[i]}});
        eqs[to_string(id)] = {{"terms", terms}, {"objective", sol.objective}};
    }
    j["equations"] = eqs;
    return j.dump(2);
}

DiscoveredSystem DiscoveredSystem::from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    DiscoveredSystem s;
    s.case_label = case_from_string(j.at("case").get<std::string>());
    s.omega_rpm = j.at("omega_rpm").get<double>();
    s.noise_ratio = j.at("noise_ratio").get<double>();
    s.seed = j.at("seed").get<std::uint64_t>();
    const auto& cfg = j.at("config");
    for (const auto& [key, val] : cfg.at("k_per_equation").items())
        s.k_per_equation[equation_id_from_string(key)] = val.get<int>();
    s.lambda2 = cfg.at("lambda2").get<double>();
    s.bound_M = cfg.at("bound_M").get<double>();
    s.wall_time_s = j.at("wall_time_s").get<double>();
    for (const auto& [key, val] : j.at("equations").items()) {
        SparseSolution sol;
        for (const auto& tj : val.at("terms")) {
            sol.terms.push_back(tj.at("term").get<std::string>());
            sol.coefficients.push_back(tj.at("coeff").get<double>());
        }
        sol.objective = val.at("objective").get<double>();
        s.equations[equation_id_from_string(key)] = std::move(sol);
    }
    return s;
}

}  // namespace milldyn
