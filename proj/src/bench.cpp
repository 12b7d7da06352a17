#include "milldyn/bench.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "milldyn/cutting.hpp"
#include "milldyn/rng.hpp"

namespace milldyn {

const std::vector<double> kNoiseRatioSweep = {0.0,  0.0001, 0.001, 0.01, 0.1,
                                              0.5,  1.0,    5.0,   10.0};

CasePreset make_case_preset(CaseLabel c) {
    CasePreset p;
    p.case_label = c;
    p.structure = StructuralModel::symmetric(0.198, 19.91, 5e6);
    const double Ks = 750e6;
    const double beta = 68.0 * M_PI / 180.0;
    p.force_model.ktc = Ks * std::sin(beta);
    p.force_model.knc = Ks * std::cos(beta);
    if (c == CaseLabel::II) {
        p.force_model.kte = 2.5e4;
        p.force_model.kne = 2.5e4;
        p.force_model.Ct = 1.4e3;
        p.force_model.Cn = 1.4e3;
    }
    p.geometry = ToolGeometry{0.02, 4, 0.25, MillingDirection::up};
    p.feed_per_tooth = 1e-4;
    p.sim = SimulationConfig{40, 1000, {}};
    return p;
}

namespace {
double column_std(const std::vector<double>& col) {
    double mean = 0.0;
    for (double v : col) mean += v;
    mean /= static_cast<double>(col.size());
    double ss = 0.0;
    for (double v : col) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(col.size()));
}
}  // namespace

TimeSeriesDataset inject_noise(const TimeSeriesDataset& ds, const NoiseSpec& spec) {
    if (spec.ratio < 0.0) throw std::invalid_argument("inject_noise: ratio >= 0");
    if (ds.meta.noise_ratio != 0.0)
        throw std::invalid_argument("inject_noise: dataset already carries noise");
    ds.validate_consistent();

    TimeSeriesDataset out = ds;
    out.meta.noise_ratio = spec.ratio;
    out.meta.seed = spec.seed;

    std::vector<std::vector<double>*> columns = {&out.x,  &out.vx, &out.ax, &out.y,  &out.vy,
                                                 &out.ay, &out.Fx, &out.Fy, &out.Ft, &out.Fn};
    for (std::size_t c = 0; c < columns.size(); ++c) {
        auto& col = *columns[c];
        const double sigma = column_std(col);
        GaussianStream stream(derive_stream_seed(spec.seed, c));
        for (double& v : col) v += spec.ratio * sigma * stream.next();
    }

    // Derived features follow the (possibly noisy) measured states: replay the
    // surface memory over the recorded engagement pattern.
    const int D = out.delay_samples();
    SurfaceMemory surface(D);
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out.engaged[i]) {
            const double phi = out.phi[i];
            const double n_cur = normal_projection(out.x[i], out.y[i], phi);
            out.delta_n[i] = surface.read(i) - n_cur;
            out.n_dot[i] = normal_projection(out.vx[i], out.vy[i], phi);
            surface.write(i, n_cur);
        } else {
            out.delta_n[i] = 0.0;
            out.n_dot[i] = 0.0;
        }
    }
    return out;
}

GroundTruth ground_truth(const CasePreset& preset, double omega_rpm) {
    GroundTruth gt;
    const auto& s = preset.structure;
    if (s.x_modes.size() != 1 || s.y_modes.size() != 1)
        throw std::invalid_argument("ground_truth: single-mode-per-axis presets only");
    const auto& mx = s.x_modes[0];
    const auto& my = s.y_modes[0];
    gt.equations[EquationId::x_dot] = {{"vx", 1.0}};
    gt.equations[EquationId::y_dot] = {{"vy", 1.0}};
    gt.equations[EquationId::vx_dot] = {{"x", -mx.stiffness / mx.mass},
                                        {"vx", -mx.damping / mx.mass},
                                        {"Fx", 1.0 / mx.mass}};
    gt.equations[EquationId::vy_dot] = {{"y", -my.stiffness / my.mass},
                                        {"vy", -my.damping / my.mass},
                                        {"Fy", 1.0 / my.mass}};
    const auto& fm = preset.force_model;
    const double ft = preset.feed_per_tooth;
    std::map<std::string, double> Ft = {{"b*dn", fm.ktc}, {"b*sinphi", fm.ktc * ft}};
    std::map<std::string, double> Fn = {{"b*dn", fm.knc}, {"b*sinphi", fm.knc * ft}};
    if (preset.case_label == CaseLabel::II) {
        const double V = ProcessPoint{omega_rpm, 1.0, ft}.cutting_speed(preset.geometry);
        Ft["b"] = fm.kte;
        Fn["b"] = fm.kne;
        Ft["b*ndot^2"] = -fm.Ct / V;
        Fn["b*ndot^2"] = -fm.Cn / V;
    }
    gt.equations[EquationId::Ft] = std::move(Ft);
    gt.equations[EquationId::Fn] = std::move(Fn);
    return gt;
}

DiscoveredSystem GroundTruth::as_discovered_system(CaseLabel c, double omega_rpm) const {
    DiscoveredSystem s;
    s.case_label = c;
    s.omega_rpm = omega_rpm;
    for (const auto& [id, terms] : equations) {
        SparseSolution sol;
        for (const auto& [term, coeff] : terms) {
            sol.terms.push_back(term);
            sol.coefficients.push_back(coeff);
        }
        s.k_per_equation[id] = static_cast<int>(terms.size());
        s.equations[id] = std::move(sol);
    }
    return s;
}

int a_metric(const DiscoveredSystem& discovered, const GroundTruth& truth) {
    int a = 0;
    for (const auto& [id, true_terms] : truth.equations) {
        auto it = discovered.equations.find(id);
        if (it == discovered.equations.end())
            throw std::invalid_argument("a_metric: discovered system lacks equation " +
                                        std::string(to_string(id)));
        std::set<std::string> found(it->second.terms.begin(), it->second.terms.end());
        std::set<std::string> want;
        for (const auto& [term, _] : true_terms) want.insert(term);
        if (found == want) ++a;
    }
    return a;
}

CoefficientDeviation coefficient_deviation(const DiscoveredSystem& discovered,
                                           const GroundTruth& truth) {
    CoefficientDeviation out;
    double sum = 0.0;
    int count = 0;
    for (const auto& [id, true_terms] : truth.equations) {
        for (const auto& [term, true_coeff] : true_terms) {
            if (true_coeff == 0.0)
                throw std::invalid_argument("coefficient_deviation: zero true coefficient");
            const auto found = discovered.coefficient(id, term);
            if (!found) {
                out.mismatched_terms.push_back(std::string(to_string(id)) + ":" + term);
                continue;
            }
            const double rel = std::abs(*found - true_coeff) / std::abs(true_coeff);
            out.per_term[id][term] = rel;
            sum += rel;
            ++count;
        }
        auto it = discovered.equations.find(id);
        if (it != discovered.equations.end())
            for (const auto& term : it->second.terms)
                if (!true_terms.count(term))
                    out.mismatched_terms.push_back(std::string(to_string(id)) + ":" + term +
                                                   " (spurious)");
    }
    out.mean = count ? sum / count : 0.0;
    return out;
}

std::vector<TimeSeriesDataset> training_datasets(const CasePreset& preset, double omega_rpm,
                                                 const std::vector<double>& depths,
                                                 std::size_t training_samples) {
    std::vector<TimeSeriesDataset> out;
    out.reserve(depths.size());
    for (double b : depths) {
        TimeSeriesDataset ds = run_simulation(preset.structure, preset.force_model,
                                              preset.geometry, preset.process(omega_rpm, b),
                                              preset.sim);
        ds.meta.case_label = to_string(preset.case_label);
        out.push_back(ds.head(training_samples));
    }
    return out;
}

const SweepCell* SweepReport::find(double omega, double ratio, std::uint64_t seed) const {
    for (const auto& c : cells)
        if (c.omega_rpm == omega && c.noise_ratio == ratio && c.seed == seed) return &c;
    return nullptr;
}

SweepReport run_case_study(CaseLabel case_label, const CaseStudyOptions& options) {
    const CasePreset preset = make_case_preset(case_label);
    std::map<EquationId, int> k = default_k_per_equation(case_label);
    for (const auto& [id, kv] : options.k_overrides) k[id] = kv;

    SweepReport report;
    report.case_label = case_label;
    report.speeds = options.speeds;
    report.depths = options.depths;
    report.noise_ratios = options.noise_ratios;
    report.seeds = options.seeds;

    for (double omega : options.speeds) {
        std::vector<TimeSeriesDataset> cuts;
        std::string sim_error;
        try {
            cuts = training_datasets(preset, omega, options.depths, options.training_samples);
        } catch (const std::exception& e) {
            sim_error = e.what();
        }
        const GroundTruth truth = ground_truth(preset, omega);
        for (double ratio : options.noise_ratios) {
            for (std::uint64_t seed : options.seeds) {
                SweepCell cell;
                cell.omega_rpm = omega;
                cell.noise_ratio = ratio;
                cell.seed = seed;
                if (!sim_error.empty()) {
                    cell.error = sim_error;
                    report.cells.push_back(std::move(cell));
                    continue;
                }
                try {
                    SystemDiscoveryOptions dopt;
                    dopt.lambda2 = options.lambda2;
                    dopt.bound_M = options.bound_M;
                    dopt.noise_ratio = ratio;
                    dopt.seed = seed;
                    DiscoveredSystem sys = discover_system(cuts, case_label, k, dopt);
                    cell.a_value = a_metric(sys, truth);
                    cell.mean_coefficient_deviation = coefficient_deviation(sys, truth).mean;
                    cell.wall_time_s = sys.wall_time_s;
                    cell.system = std::move(sys);
                } catch (const std::exception& e) {
                    cell.error = e.what();
                }
                report.cells.push_back(std::move(cell));
            }
        }
    }
    return report;
}

namespace {

std::string format_ratio(double r) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g%%", r * 100.0);
    return buf;
}

std::string equation_listing(const DiscoveredSystem& sys) {
    std::ostringstream os;
    for (EquationId id : kAllEquations) {
        auto it = sys.equations.find(id);
        if (it == sys.equations.end()) continue;
        os << "    " << to_string(id) << " =";
        bool first = true;
        for (std::size_t i = 0; i < it->second.terms.size(); ++i) {
            const double c = it->second.coefficients[i];
            char buf[48];
            std::snprintf(buf, sizeof(buf), "%.6g", std::abs(c));
            os << (c < 0 ? (first ? " -" : " - ") : (first ? " " : " + ")) << buf;
            if (it->second.terms[i] != "1") os << "*" << it->second.terms[i];
            first = false;
        }
        os << "\n";
    }
    return os.str();
}

}  // namespace

std::string SweepReport::to_json() const {
    nlohmann::ordered_json j;
    j["case"] = to_string(case_label);
    j["speeds"] = speeds;
    j["depths"] = depths;
    j["noise_ratios"] = noise_ratios;
    j["seeds"] = seeds;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& c : cells) {
        nlohmann::ordered_json cj;
        cj["omega_rpm"] = c.omega_rpm;
        cj["noise_ratio"] = c.noise_ratio;
        cj["seed"] = c.seed;
        cj["A"] = c.a_value;
        cj["mean_coefficient_deviation"] = c.mean_coefficient_deviation;
        cj["wall_time_s"] = c.wall_time_s;
        if (!c.error.empty()) cj["error"] = c.error;
        if (c.system) cj["system"] = nlohmann::ordered_json::parse(c.system->to_json());
        arr.push_back(std::move(cj));
    }
    j["cells"] = std::move(arr);
    return j.dump(2);
}

std::vector<std::string> emit_report(const SweepReport& report, ReportFormat format,
                                     const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::vector<std::string> written;
    auto open = [&](const std::string& name) {
        const std::string path = (fs::path(out_dir) / name).string();
        written.push_back(path);
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open for writing: " + path);
        return f;
    };

    if (format == ReportFormat::csv) {
        {
            auto f = open("a_grid.csv");
            f << "noise_ratio,seed";
            for (double s : report.speeds) f << ",omega_" << s;
            f << "\n";
            for (double r : report.noise_ratios)
                for (auto seed : report.seeds) {
                    f << r << "," << seed;
                    for (double s : report.speeds) {
                        const SweepCell* c = report.find(s, r, seed);
                        f << ",";
                        if (c && c->ok()) f << c->a_value;
                    }
                    f << "\n";
                }
        }
        {
            auto f = open("cells.csv");
            f << "omega_rpm,noise_ratio,seed,A,mean_coefficient_deviation,wall_time_s,error\n";
            for (const auto& c : report.cells) {
                char buf[160];
                std::snprintf(buf, sizeof(buf), "%g,%g,%llu,%d,%.9g,%.3f,", c.omega_rpm,
                              c.noise_ratio, static_cast<unsigned long long>(c.seed), c.a_value,
                              c.mean_coefficient_deviation, c.wall_time_s);
                f << buf << c.error << "\n";
            }
        }
        return written;
    }

    auto f = open("report.md");
    f << "# Discovery sweep, case " << to_string(report.case_label) << "\n\n";
    f << "A values (number of exactly recovered equations, max 6)\n\n";
    f << "| noise ratio | seed |";
    for (double s : report.speeds) f << " " << s << " rpm |";
    f << "\n|---|---|";
    for (std::size_t i = 0; i < report.speeds.size(); ++i) f << "---|";
    f << "\n";
    for (double r : report.noise_ratios)
        for (auto seed : report.seeds) {
            f << "| " << format_ratio(r) << " | " << seed << " |";
            for (double s : report.speeds) {
                const SweepCell* c = report.find(s, r, seed);
                if (c && c->ok()) f << " " << c->a_value << " |";
                else f << " - |";
            }
            f << "\n";
        }
    f << "\n## Discovered systems\n\n";
    for (const auto& c : report.cells) {
        if (!c.system) continue;
        f << "- " << c.omega_rpm << " rpm, r = " << format_ratio(c.noise_ratio)
          << ", seed " << c.seed << ", A = " << c.a_value << ", mean coefficient deviation "
          << c.mean_coefficient_deviation << "\n\n";
        f << "```\n" << equation_listing(*c.system) << "```\n\n";
    }
    return written;
}

}  // namespace milldyn
