#include "milldyn/feature_library.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace milldyn {

const std::vector<std::string> kKnownVariables = {
    "x", "vx", "y", "vy", "b", "Fx", "Fy", "dn", "ndot", "sinphi"};

int Term::degree() const {
    int d = 0;
    for (const auto& [_, e] : factors) d += e;
    return d;
}

int Term::exponent_of(const std::string& var) const {
    auto it = factors.find(var);
    return it == factors.end() ? 0 : it->second;
}

std::string Term::canonical() const {
    if (factors.empty()) return "1";
    std::string out;
    for (const auto& [var, exp] : factors) {  // std::map iterates in sorted order
        if (!out.empty()) out += '*';
        out += var;
        if (exp > 1) {
            out += '^';
            out += std::to_string(exp);
        }
    }
    return out;
}

Term parse_term(const std::string& canonical) {
    Term t;
    if (canonical == "1") return t;
    std::stringstream ss(canonical);
    std::string factor;
    while (std::getline(ss, factor, '*')) {
        std::string var = factor;
        int exp = 1;
        if (auto caret = factor.find('^'); caret != std::string::npos) {
            var = factor.substr(0, caret);
            exp = std::stoi(factor.substr(caret + 1));
        }
        if (std::find(kKnownVariables.begin(), kKnownVariables.end(), var) ==
            kKnownVariables.end())
            throw std::invalid_argument("parse_term: unknown variable '" + var + "'");
        if (exp < 1) throw std::invalid_argument("parse_term: exponent must be >= 1");
        if (t.factors.count(var)) throw std::invalid_argument("parse_term: repeated factor");
        t.factors[var] = exp;
    }
    return t;
}

namespace {

void enumerate_grade(const std::vector<Variable>& vars, std::size_t i, int remaining,
                     std::vector<int>& exps, std::vector<Term>& out) {
    if (i + 1 == vars.size()) {
        exps[i] = remaining;
        Term t;
        for (std::size_t v = 0; v < vars.size(); ++v)
            if (exps[v] > 0) t.factors[vars[v].name] = exps[v];
        out.push_back(std::move(t));
        return;
    }
    for (int e = remaining; e >= 0; --e) {
        exps[i] = e;
        enumerate_grade(vars, i + 1, remaining - e, exps, out);
    }
}

}  // namespace

TermLibrary build_library(std::vector<Variable> variables, int max_degree) {
    if (max_degree < 1) throw std::invalid_argument("build_library: max_degree >= 1");
    if (variables.empty()) throw std::invalid_argument("build_library: variables non-empty");
    std::sort(variables.begin(), variables.end());
    for (std::size_t i = 1; i < variables.size(); ++i)
        if (variables[i].name == variables[i - 1].name)
            throw std::invalid_argument("build_library: duplicate variable '" +
                                        variables[i].name + "'");
    for (const auto& v : variables)
        if (std::find(kKnownVariables.begin(), kKnownVariables.end(), v.name) ==
            kKnownVariables.end())
            throw std::invalid_argument("build_library: unknown variable '" + v.name + "'");

    TermLibrary lib;
    lib.variables = variables;
    lib.max_degree = max_degree;
    std::vector<int> exps(variables.size(), 0);
    for (int grade = 0; grade <= max_degree; ++grade)
        enumerate_grade(variables, 0, grade, exps, lib.terms);
    return lib;
}

namespace {

// Resolve one variable into a column over the retained rows.
std::vector<double> resolve_variable(const std::string& var, const TimeSeriesDataset& ds,
                                     const std::vector<std::int64_t>& rows) {
    std::vector<double> col(rows.size());
    auto fill = [&](const std::vector<double>& src) {
        for (std::size_t i = 0; i < rows.size(); ++i) col[i] = src[static_cast<std::size_t>(rows[i])];
    };
    if (var == "x") fill(ds.x);
    else if (var == "vx") fill(ds.vx);
    else if (var == "y") fill(ds.y);
    else if (var == "vy") fill(ds.vy);
    else if (var == "Fx") fill(ds.Fx);
    else if (var == "Fy") fill(ds.Fy);
    else if (var == "dn") fill(ds.delta_n);
    else if (var == "ndot") fill(ds.n_dot);
    else if (var == "sinphi") {
        for (std::size_t i = 0; i < rows.size(); ++i)
            col[i] = std::sin(ds.phi[static_cast<std::size_t>(rows[i])]);
    } else if (var == "b") {
        std::fill(col.begin(), col.end(), ds.meta.process.axial_depth);
    } else {
        throw std::invalid_argument("evaluate_library: unresolvable variable '" + var + "'");
    }
    return col;
}

}  // namespace

RegressionProblem evaluate_library(const TermLibrary& lib, const TimeSeriesDataset& ds,
                                   RowFilter filter) {
    ds.validate_consistent();
    std::vector<std::int64_t> rows;
    for (std::size_t i = 0; i < ds.size(); ++i)
        if (filter == RowFilter::all || ds.engaged[i]) rows.push_back(static_cast<std::int64_t>(i));
    if (rows.empty()) throw std::runtime_error("evaluate_library: no rows after filtering");

    std::map<std::string, std::vector<double>> cache;
    for (const auto& v : lib.variables) cache[v.name] = resolve_variable(v.name, ds, rows);

    RegressionProblem out;
    out.design.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(lib.size()));
    for (std::size_t c = 0; c < lib.size(); ++c) {
        const Term& term = lib.terms[c];
        for (std::size_t r = 0; r < rows.size(); ++r) {
            double v = 1.0;
            for (const auto& [var, exp] : term.factors) {
                const double base = cache[var][r];
                for (int e = 0; e < exp; ++e) v *= base;
            }
            out.design(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
        }
        out.labels.push_back(term.canonical());
    }
    if (!out.design.allFinite())
        throw std::runtime_error(
            "evaluate_library: non-finite design entries (sinphi outside engaged rows?)");
    out.provenance.reserve(rows.size());
    for (auto r : rows) out.provenance.emplace_back(0, r);
    return out;
}

EquationId equation_id_from_string(const std::string& s) {
    for (EquationId id : kAllEquations)
        if (s == to_string(id)) return id;
    throw std::invalid_argument("unknown equation id '" + s + "'");
}

CaseLabel case_from_string(const std::string& s) {
    if (s == "I") return CaseLabel::I;
    if (s == "II") return CaseLabel::II;
    throw std::invalid_argument("case must be 'I' or 'II'");
}

TermLibrary equation_library(EquationId equation, CaseLabel case_label) {
    switch (equation) {
        case EquationId::x_dot:
        case EquationId::vx_dot:
        case EquationId::y_dot:
        case EquationId::vy_dot: {
            const bool xaxis = (equation == EquationId::x_dot || equation == EquationId::vx_dot);
            const std::string fvar = xaxis ? "Fx" : "Fy";
            std::vector<Variable> vars = xaxis
                ? std::vector<Variable>{{"x"}, {"vx"}, {"b"}, {fvar}}
                : std::vector<Variable>{{"y"}, {"vy"}, {"b"}, {fvar}};
            TermLibrary full = build_library(vars, 2);
            // Forces excite the structure linearly: keep polynomials of the
            // state/process variables plus the bare force term only.
            TermLibrary lib;
            lib.variables = full.variables;
            lib.max_degree = full.max_degree;
            for (const auto& t : full.terms) {
                const int fe = t.exponent_of(fvar);
                if (fe == 0 || (fe == 1 && t.degree() == 1)) lib.terms.push_back(t);
            }
            return lib;
        }
        case EquationId::Ft:
        case EquationId::Fn:
            if (case_label == CaseLabel::I)
                return build_library({{"dn"}, {"b"}, {"sinphi"}}, 2);
            return build_library({{"dn"}, {"ndot"}, {"b"}, {"sinphi"}}, 3);
    }
    throw std::logic_error("equation_library: unreachable");
}

namespace {

const std::vector<double>& target_column(EquationId eq, const TimeSeriesDataset& ds) {
    switch (eq) {
        case EquationId::x_dot: return ds.vx;
        case EquationId::vx_dot: return ds.ax;
        case EquationId::y_dot: return ds.vy;
        case EquationId::vy_dot: return ds.ay;
        case EquationId::Ft: return ds.Ft;
        case EquationId::Fn: return ds.Fn;
    }
    throw std::logic_error("target_column: unreachable");
}

}  // namespace

RegressionProblem assemble_problem(EquationId equation,
                                   const std::vector<TimeSeriesDataset>& datasets,
                                   CaseLabel case_label) {
    if (datasets.empty()) throw std::invalid_argument("assemble_problem: no datasets");
    const auto& first = datasets.front();
    std::set<double> depths;
    for (const auto& ds : datasets) {
        if (ds.meta.process.omega_rpm != first.meta.process.omega_rpm ||
            ds.meta.geometry.teeth != first.meta.geometry.teeth ||
            ds.meta.geometry.diameter != first.meta.geometry.diameter ||
            ds.meta.geometry.radial_immersion != first.meta.geometry.radial_immersion ||
            ds.meta.geometry.milling_direction != first.meta.geometry.milling_direction ||
            ds.meta.process.feed_per_tooth != first.meta.process.feed_per_tooth)
            throw std::invalid_argument("assemble_problem: datasets mix speeds or geometry");
        depths.insert(ds.meta.process.axial_depth);
    }
    if (depths.size() < 2)
        throw std::invalid_argument(
            "assemble_problem: need >= 2 distinct axial depths (terms T and T*b are "
            "collinear on single-depth data)");

    const bool is_force = (equation == EquationId::Ft || equation == EquationId::Fn);
    const RowFilter filter = is_force ? RowFilter::engaged_only : RowFilter::all;
    const TermLibrary lib = equation_library(equation, case_label);

    std::vector<RegressionProblem> fragments;
    std::vector<Eigen::Index> sizes;
    Eigen::Index total = 0;
    for (std::size_t d = 0; d < datasets.size(); ++d) {
        RegressionProblem frag = evaluate_library(lib, datasets[d], filter);
        const auto& tcol = target_column(equation, datasets[d]);
        frag.target.resize(frag.design.rows());
        for (std::size_t r = 0; r < frag.provenance.size(); ++r) {
            frag.provenance[r].first = static_cast<int>(d);
            frag.target(static_cast<Eigen::Index>(r)) =
                tcol[static_cast<std::size_t>(frag.provenance[r].second)];
        }
        total += frag.design.rows();
        sizes.push_back(frag.design.rows());
        fragments.push_back(std::move(frag));
    }

    RegressionProblem out;
    out.labels = fragments.front().labels;
    out.target_name = to_string(equation);
    out.design.resize(total, fragments.front().design.cols());
    out.target.resize(total);
    out.provenance.reserve(static_cast<std::size_t>(total));
    Eigen::Index row = 0;
    for (std::size_t f = 0; f < fragments.size(); ++f) {
        out.design.middleRows(row, sizes[f]) = fragments[f].design;
        out.target.segment(row, sizes[f]) = fragments[f].target;
        out.provenance.insert(out.provenance.end(), fragments[f].provenance.begin(),
                              fragments[f].provenance.end());
        row += sizes[f];
    }
    if (out.rows() <= out.cols())
        std::fprintf(stderr, "assemble_problem: warning, %zu rows <= %zu columns for %s\n",
                     out.rows(), out.cols(), out.target_name.c_str());
    return out;
}

NormalizedProblem normalize_columns(const RegressionProblem& problem) {
    const Eigen::Index n = problem.design.rows(), P = problem.design.cols();
    const double target_norm = problem.target.norm();
    if (target_norm == 0.0) throw std::invalid_argument("normalize_columns: zero target vector");

    NormalizedProblem out;
    out.design = problem.design;
    out.target = problem.target / target_norm;
    out.target_scale = target_norm;
    out.labels = problem.labels;
    out.column_scales.resize(P);
    out.excluded.assign(static_cast<std::size_t>(P), false);
    const double zero_threshold = 1e-14 * std::sqrt(static_cast<double>(n));
    for (Eigen::Index c = 0; c < P; ++c) {
        const double norm = out.design.col(c).norm();
        if (norm < zero_threshold) {
            out.excluded[static_cast<std::size_t>(c)] = true;
            out.column_scales(c) = 1.0;
        } else {
            out.column_scales(c) = norm;
            out.design.col(c) /= norm;
        }
    }
    return out;
}

}  // namespace milldyn
