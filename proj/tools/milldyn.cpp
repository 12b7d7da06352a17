// milldyn command line: time-domain milling simulation, governing-equation
// discovery from the simulated cuts, stability lobes, Poincare sampling, and
// the full speed x noise sweep report.
//
//   milldyn simulate --case I --omega-rpm 6000 --depth-mm 2 --out cut.csv
//   milldyn discover --case I --omega-rpm 6000 --noise-ratio 0.01 --out sys.json
//   milldyn lobes --system sys.json --rpm-min 4000 --rpm-max 12000 --out lobes.csv
//   milldyn poincare --dataset cut.csv --discard 0.5 --out poincare.csv
//   milldyn report --case I --out-dir out/
//
// Exit codes: 0 success, 1 usage error, 2 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

#include "milldyn/bench.hpp"
#include "milldyn/stability.hpp"

using namespace milldyn;

namespace {

struct Config {
    CasePreset preset;
    CaseStudyOptions study;
};

// JSON config mirroring the benchmark parameters; every key optional.
Config load_config(const std::string& path, CaseLabel c) {
    Config cfg;
    cfg.preset = make_case_preset(c);
    if (path.empty()) return cfg;
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot open config: " + path);
    const auto j = nlohmann::json::parse(f);

    auto get = [&](const char* key, double dflt) { return j.value(key, dflt); };
    const double m = get("m", 0.198), k = get("k", 5e6), cdamp = get("c", 19.91);
    cfg.preset.structure = StructuralModel::symmetric(m, cdamp, k);
    const double Ks = get("Ks", 750e6);
    const double beta = get("beta_deg", 68.0) * M_PI / 180.0;
    cfg.preset.force_model.ktc = Ks * std::sin(beta);
    cfg.preset.force_model.knc = Ks * std::cos(beta);
    if (c == CaseLabel::II) {
        cfg.preset.force_model.Ct = get("Ct", 1400.0);
        cfg.preset.force_model.Cn = get("Cn", 1400.0);
        cfg.preset.force_model.kte = get("kte", 25000.0);
        cfg.preset.force_model.kne = get("kne", 25000.0);
    }
    cfg.preset.geometry.diameter = get("diameter_m", 0.02);
    cfg.preset.geometry.teeth = j.value("teeth", 4);
    cfg.preset.geometry.radial_immersion = get("radial_immersion", 0.25);
    cfg.preset.geometry.milling_direction =
        milling_direction_from_string(j.value("direction", std::string("up")));
    cfg.preset.feed_per_tooth = get("ft_m", 1e-4);
    cfg.preset.sim.revolutions = j.value("revolutions", 40);
    cfg.preset.sim.steps_per_rev = j.value("steps_per_rev", 1000);

    if (j.contains("speeds")) cfg.study.speeds = j.at("speeds").get<std::vector<double>>();
    if (j.contains("depths_mm")) {
        cfg.study.depths.clear();
        for (double mm : j.at("depths_mm").get<std::vector<double>>())
            cfg.study.depths.push_back(mm * 1e-3);
    }
    if (j.contains("noise_ratios"))
        cfg.study.noise_ratios = j.at("noise_ratios").get<std::vector<double>>();
    if (j.contains("seeds")) cfg.study.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    cfg.study.training_samples = j.value("training_samples", std::size_t{2000});
    cfg.study.lambda2 = get("lambda2", 100.0);
    cfg.study.bound_M = get("bound_M", 1000.0);
    return cfg;
}

std::map<EquationId, int> parse_k_overrides(const std::string& text) {
    std::map<EquationId, int> out;
    if (text.empty()) return out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("--k-overrides entries look like Ft=3");
        out[equation_id_from_string(item.substr(0, eq))] = std::stoi(item.substr(eq + 1));
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"milling dynamics workbench"};
    app.require_subcommand(1);

    std::string case_name = "I", config_path, out_path, system_path, dataset_path, out_dir;
    std::string k_overrides_text;
    double omega_rpm = 6000.0, depth_mm = 2.0, noise_ratio = 0.0;
    double lambda2 = 100.0, bound_m = 1000.0, discard = 0.5;
    double rpm_min = 4000.0, rpm_max = 12000.0;
    int revolutions = 40, steps_per_rev = 1000, lobe_max = 10;
    std::uint64_t seed = 1;

    auto* sim = app.add_subcommand("simulate", "run one time-domain cut and write CSV");
    sim->add_option("--case", case_name)->check(CLI::IsMember({"I", "II"}));
    sim->add_option("--omega-rpm", omega_rpm);
    sim->add_option("--depth-mm", depth_mm);
    sim->add_option("--revolutions", revolutions);
    sim->add_option("--steps-per-rev", steps_per_rev);
    sim->add_option("--config", config_path);
    sim->add_option("--out", out_path)->required();

    auto* disc = app.add_subcommand("discover", "discover the six governing equations");
    disc->add_option("--case", case_name)->check(CLI::IsMember({"I", "II"}));
    disc->add_option("--omega-rpm", omega_rpm);
    disc->add_option("--noise-ratio", noise_ratio);
    disc->add_option("--seed", seed);
    disc->add_option("--k-overrides", k_overrides_text, "e.g. Ft=3,Fn=3");
    disc->add_option("--lambda2", lambda2);
    disc->add_option("--bound-m", bound_m);
    disc->add_option("--config", config_path);
    disc->add_option("--out", out_path)->required();

    auto* lobes = app.add_subcommand("lobes", "zero-order stability lobes of a linear system");
    lobes->add_option("--system", system_path)->required();
    lobes->add_option("--rpm-min", rpm_min);
    lobes->add_option("--rpm-max", rpm_max);
    lobes->add_option("--lobe-max", lobe_max);
    lobes->add_option("--config", config_path);
    lobes->add_option("--out", out_path)->required();

    auto* poin = app.add_subcommand("poincare", "once-per-tooth samples of a dataset");
    poin->add_option("--dataset", dataset_path)->required();
    poin->add_option("--discard", discard);
    poin->add_option("--out", out_path)->required();

    auto* rep = app.add_subcommand("report", "speed x noise discovery sweep");
    rep->add_option("--case", case_name)->check(CLI::IsMember({"I", "II"}));
    rep->add_option("--config", config_path);
    rep->add_option("--out-dir", out_dir)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        const CaseLabel c = case_from_string(case_name);
        Config cfg = load_config(config_path, c);

        if (sim->parsed()) {
            if (sim->count("--revolutions")) cfg.preset.sim.revolutions = revolutions;
            if (sim->count("--steps-per-rev")) cfg.preset.sim.steps_per_rev = steps_per_rev;
            TimeSeriesDataset ds =
                run_simulation(cfg.preset.structure, cfg.preset.force_model, cfg.preset.geometry,
                               cfg.preset.process(omega_rpm, depth_mm * 1e-3), cfg.preset.sim);
            ds.meta.case_label = to_string(c);
            write_dataset_csv(ds, out_path);
            std::cout << "wrote " << out_path << " (" << ds.size() << " samples)\n";
        } else if (disc->parsed()) {
            auto cuts = training_datasets(cfg.preset, omega_rpm, cfg.study.depths,
                                          cfg.study.training_samples);
            auto k = default_k_per_equation(c);
            for (const auto& [id, kv] : parse_k_overrides(k_overrides_text)) k[id] = kv;
            SystemDiscoveryOptions opt;
            opt.lambda2 = lambda2;
            opt.bound_M = bound_m;
            opt.noise_ratio = noise_ratio;
            opt.seed = seed;
            DiscoveredSystem sys = discover_system(cuts, c, k, opt);
            std::ofstream f(out_path, std::ios::binary);
            if (!f) throw std::runtime_error("cannot open for writing: " + out_path);
            f << sys.to_json() << "\n";
            const GroundTruth truth = ground_truth(cfg.preset, omega_rpm);
            std::cout << "wrote " << out_path << "  A = " << a_metric(sys, truth)
                      << "/6, wall " << sys.wall_time_s << " s\n";
        } else if (lobes->parsed()) {
            std::ifstream f(system_path);
            if (!f) throw std::invalid_argument("cannot open system: " + system_path);
            std::stringstream buf;
            buf << f.rdbuf();
            const DiscoveredSystem sys = DiscoveredSystem::from_json(buf.str());
            const LinearMillingModel model = extract_linear_model(sys, cfg.preset.geometry);
            LobeSweep sweep;
            sweep.rpm_min = rpm_min;
            sweep.rpm_max = rpm_max;
            sweep.lobe_max = lobe_max;
            const LobeDiagram diagram = zero_order_lobes(model, sweep);
            write_lobes_csv(diagram, out_path);
            std::cout << "wrote " << out_path << " (" << diagram.points.size() << " points)\n";
        } else if (poin->parsed()) {
            const TimeSeriesDataset ds = read_dataset_csv(dataset_path);
            const auto pts = once_per_tooth_sample(ds, discard);
            write_poincare_csv(pts, out_path);
            std::cout << "wrote " << out_path << " (" << pts.size() << " points)\n";
        } else if (rep->parsed()) {
            const SweepReport report = run_case_study(c, cfg.study);
            auto files = emit_report(report, ReportFormat::csv, out_dir);
            auto more = emit_report(report, ReportFormat::markdown, out_dir);
            files.insert(files.end(), more.begin(), more.end());
            for (const auto& p : files) std::cout << "wrote " << p << "\n";
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
