// Candidate-term libraries and their evaluation into regression problems.
//
// Canonical term grammar (also used in discovered-system JSON): variables
// x, vx, y, vy, b, Fx, Fy, dn, ndot, sinphi; products written with '*',
// integer powers with '^', factors sorted by byte-wise string order, and the
// constant term written "1" (e.g. "b*dn", "b*ndot^2", "Fx*x").
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "milldyn/dataset.hpp"

namespace milldyn {

extern const std::vector<std::string> kKnownVariables;

struct Variable {
    std::string name;
    bool operator<(const Variable& o) const { return name < o.name; }
    bool operator==(const Variable& o) const { return name == o.name; }
};

// A monomial over library variables (possibly the empty product, "1").
struct Term {
    std::map<std::string, int> factors;  // variable -> exponent >= 1

    int degree() const;
    int exponent_of(const std::string& var) const;
    std::string canonical() const;
    bool operator==(const Term& o) const { return factors == o.factors; }
    bool operator<(const Term& o) const { return factors < o.factors; }
};

Term parse_term(const std::string& canonical);

struct TermLibrary {
    std::vector<Term> terms;          // constant first, graded-lex order
    std::vector<Variable> variables;  // sorted by name
    int max_degree = 0;

    std::size_t size() const { return terms.size(); }
};

// All monomials of the variable set up to max_degree; |result| = C(n+d, d).
TermLibrary build_library(std::vector<Variable> variables, int max_degree);

enum class RowFilter { all, engaged_only };

struct RegressionProblem {
    Eigen::MatrixXd design;            // N_rows x P
    Eigen::VectorXd target;
    std::vector<std::string> labels;   // canonical terms, one per column
    // (dataset index, sample index) per row.
    std::vector<std::pair<int, std::int64_t>> provenance;
    std::string target_name;

    std::size_t rows() const { return static_cast<std::size_t>(design.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(design.cols()); }
};

// A design-matrix fragment from a single dataset. b and ft broadcast as
// per-dataset constants; sinphi resolves only on engaged rows.
RegressionProblem evaluate_library(const TermLibrary& lib, const TimeSeriesDataset& ds,
                                   RowFilter filter);

enum class EquationId { x_dot, vx_dot, y_dot, vy_dot, Ft, Fn };
enum class CaseLabel { I, II };

inline const char* to_string(EquationId id) {
    switch (id) {
        case EquationId::x_dot: return "x_dot";
        case EquationId::vx_dot: return "vx_dot";
        case EquationId::y_dot: return "y_dot";
        case EquationId::vy_dot: return "vy_dot";
        case EquationId::Ft: return "Ft";
        case EquationId::Fn: return "Fn";
    }
    return "?";
}
EquationId equation_id_from_string(const std::string& s);
inline const char* to_string(CaseLabel c) { return c == CaseLabel::I ? "I" : "II"; }
CaseLabel case_from_string(const std::string& s);

constexpr std::array<EquationId, 6> kAllEquations = {
    EquationId::x_dot, EquationId::vx_dot, EquationId::y_dot,
    EquationId::vy_dot, EquationId::Ft, EquationId::Fn};

// Per-equation regression problem stacked over datasets that share spindle
// speed, geometry, and case. Structural equations: polynomials of
// {state, b} up to degree 2 plus the force variable as a bare linear term,
// all rows. Force equations: full monomial library of {dn[, ndot], b,
// sinphi} (degree 2 for case I, 3 for case II), engaged rows only.
RegressionProblem assemble_problem(EquationId equation,
                                   const std::vector<TimeSeriesDataset>& datasets,
                                   CaseLabel case_label);

// The candidate library used by assemble_problem for one equation.
TermLibrary equation_library(EquationId equation, CaseLabel case_label);

struct NormalizedProblem {
    Eigen::MatrixXd design;          // columns scaled to unit Euclidean norm
    Eigen::VectorXd target;          // scaled to unit Euclidean norm
    Eigen::VectorXd column_scales;   // original column norms (1 for excluded)
    double target_scale = 1.0;
    std::vector<bool> excluded;      // all-zero columns, never selectable
    std::vector<std::string> labels;
};

NormalizedProblem normalize_columns(const RegressionProblem& problem);

}  // namespace milldyn
