#include "milldyn/dataset.hpp"

#include <json.hpp>

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace milldyn {

namespace {
using nlohmann::json;

constexpr const char* kHeader = "t,x,vx,ax,y,vy,ay,Fx,Fy,Ft,Fn,phi,engaged,delta_n,n_dot";

void append_full(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}
}  // namespace

void TimeSeriesDataset::reserve(std::size_t n) {
    for (auto* c : {&t, &x, &vx, &ax, &y, &vy, &ay, &Fx, &Fy, &Ft, &Fn, &phi, &delta_n, &n_dot})
        c->reserve(n);
    engaged.reserve(n);
}

TimeSeriesDataset TimeSeriesDataset::head(std::size_t n) const {
    if (n >= size()) return *this;
    TimeSeriesDataset out;
    out.meta = meta;
    auto cut = [n](const std::vector<double>& src) {
        return std::vector<double>(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(n));
    };
    out.t = cut(t); out.x = cut(x); out.vx = cut(vx); out.ax = cut(ax);
    out.y = cut(y); out.vy = cut(vy); out.ay = cut(ay);
    out.Fx = cut(Fx); out.Fy = cut(Fy); out.Ft = cut(Ft); out.Fn = cut(Fn);
    out.phi = cut(phi); out.delta_n = cut(delta_n); out.n_dot = cut(n_dot);
    out.engaged.assign(engaged.begin(), engaged.begin() + static_cast<std::ptrdiff_t>(n));
    return out;
}

void TimeSeriesDataset::validate_consistent() const {
    const std::size_t n = t.size();
    for (const auto* c : {&x, &vx, &ax, &y, &vy, &ay, &Fx, &Fy, &Ft, &Fn, &phi, &delta_n, &n_dot})
        if (c->size() != n) throw std::runtime_error("TimeSeriesDataset: ragged columns");
    if (engaged.size() != n) throw std::runtime_error("TimeSeriesDataset: ragged columns");
}

std::string sidecar_path(const std::string& csv_path) {
    const auto dot = csv_path.find_last_of('.');
    const auto slash = csv_path.find_last_of('/');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return csv_path + ".json";
    return csv_path.substr(0, dot) + ".json";
}

void write_dataset_csv(const TimeSeriesDataset& ds, const std::string& path) {
    ds.validate_consistent();
    std::string out;
    out.reserve(ds.size() * 200 + 64);
    out += kHeader;
    out += '\n';
    for (std::size_t i = 0; i < ds.size(); ++i) {
        append_full(out, ds.t[i]); out += ',';
        append_full(out, ds.x[i]); out += ',';
        append_full(out, ds.vx[i]); out += ',';
        append_full(out, ds.ax[i]); out += ',';
        append_full(out, ds.y[i]); out += ',';
        append_full(out, ds.vy[i]); out += ',';
        append_full(out, ds.ay[i]); out += ',';
        append_full(out, ds.Fx[i]); out += ',';
        append_full(out, ds.Fy[i]); out += ',';
        append_full(out, ds.Ft[i]); out += ',';
        append_full(out, ds.Fn[i]); out += ',';
        append_full(out, ds.phi[i]); out += ',';
        out += ds.engaged[i] ? '1' : '0'; out += ',';
        append_full(out, ds.delta_n[i]); out += ',';
        append_full(out, ds.n_dot[i]); out += '\n';
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << out;
    if (!f) throw std::runtime_error("write failed: " + path);

    json meta;
    meta["omega_rpm"] = ds.meta.process.omega_rpm;
    meta["b_m"] = ds.meta.process.axial_depth;
    meta["ft_m"] = ds.meta.process.feed_per_tooth;
    meta["teeth"] = ds.meta.geometry.teeth;
    meta["diameter_m"] = ds.meta.geometry.diameter;
    meta["radial_immersion"] = ds.meta.geometry.radial_immersion;
    meta["milling_direction"] = to_string(ds.meta.geometry.milling_direction);
    meta["revolutions"] = ds.meta.config.revolutions;
    meta["steps_per_rev"] = ds.meta.config.steps_per_rev;
    meta["case"] = ds.meta.case_label;
    meta["noise_ratio"] = ds.meta.noise_ratio;
    meta["seed"] = ds.meta.seed;
    std::ofstream mf(sidecar_path(path), std::ios::binary);
    if (!mf) throw std::runtime_error("cannot open for writing: " + sidecar_path(path));
    mf << meta.dump(2) << '\n';
}

TimeSeriesDataset read_dataset_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open: " + path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("empty dataset file: " + path);
    if (line != kHeader)
        throw std::runtime_error("unexpected dataset header in " + path);

    TimeSeriesDataset ds;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        double v[14];
        int eng = 0;
        const char* p = line.c_str();
        char* end = nullptr;
        auto next = [&](double& dst) {
            dst = std::strtod(p, &end);
            if (end == p) throw std::runtime_error("bad CSV row in " + path);
            p = (*end == ',') ? end + 1 : end;
        };
        for (int c = 0; c < 12; ++c) next(v[c]);
        eng = static_cast<int>(std::strtol(p, &end, 10));
        p = (*end == ',') ? end + 1 : end;
        for (int c = 12; c < 14; ++c) next(v[c]);
        ds.t.push_back(v[0]); ds.x.push_back(v[1]); ds.vx.push_back(v[2]);
        ds.ax.push_back(v[3]); ds.y.push_back(v[4]); ds.vy.push_back(v[5]);
        ds.ay.push_back(v[6]); ds.Fx.push_back(v[7]); ds.Fy.push_back(v[8]);
        ds.Ft.push_back(v[9]); ds.Fn.push_back(v[10]); ds.phi.push_back(v[11]);
        ds.engaged.push_back(eng ? 1 : 0);
        ds.delta_n.push_back(v[12]); ds.n_dot.push_back(v[13]);
    }

    std::ifstream mf(sidecar_path(path));
    if (mf) {
        json meta = json::parse(mf);
        ds.meta.process.omega_rpm = meta.at("omega_rpm").get<double>();
        ds.meta.process.axial_depth = meta.at("b_m").get<double>();
        ds.meta.process.feed_per_tooth = meta.at("ft_m").get<double>();
        ds.meta.geometry.teeth = meta.at("teeth").get<int>();
        ds.meta.geometry.diameter = meta.at("diameter_m").get<double>();
        ds.meta.geometry.radial_immersion = meta.at("radial_immersion").get<double>();
        ds.meta.geometry.milling_direction =
            milling_direction_from_string(meta.at("milling_direction").get<std::string>());
        ds.meta.config.revolutions = meta.at("revolutions").get<int>();
        ds.meta.config.steps_per_rev = meta.at("steps_per_rev").get<int>();
        ds.meta.case_label = meta.at("case").get<std::string>();
        ds.meta.noise_ratio = meta.at("noise_ratio").get<double>();
        ds.meta.seed = meta.at("seed").get<std::uint64_t>();
    }
    ds.validate_consistent();
    return ds;
}

}  // namespace milldyn
