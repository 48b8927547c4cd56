#include "relumip/milp_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "relumip/error.hpp"

namespace relumip {

LinearExpr& LinearExpr::add(const LinearExpr& other, double scale)
{
    for (const auto& [v, c] : other.terms_)
        terms_.emplace_back(v, c * scale);
    constant_ += other.constant_ * scale;
    return *this;
}

std::vector<Term> LinearExpr::canonical_terms() const
{
    std::vector<Term> sorted = terms_;
    std::stable_sort(sorted.begin(), sorted.end(), [](const Term& a, const Term& b) { return a.first < b.first; });
    std::vector<Term> merged;
    for (const auto& t : sorted) {
        if (!merged.empty() && merged.back().first == t.first)
            merged.back().second += t.second;
        else
            merged.push_back(t);
    }
    std::erase_if(merged, [](const Term& t) { return t.second == 0.0; });
    return merged;
}

double LinearExpr::evaluate(const Eigen::Ref<const Eigen::VectorXd>& point) const
{
    double s = constant_;
    for (const auto& [v, c] : terms_)
        s += c * point[v];
    return s;
}

double Constraint::activity(const Eigen::Ref<const Eigen::VectorXd>& point) const
{
    double s = 0.0;
    for (const auto& [v, c] : terms)
        s += c * point[v];
    return s;
}

double Constraint::violation(const Eigen::Ref<const Eigen::VectorXd>& point) const
{
    const double a = activity(point);
    switch (sense) {
    case RowSense::LessEqual: return std::max(0.0, a - rhs);
    case RowSense::GreaterEqual: return std::max(0.0, rhs - a);
    case RowSense::Equal: return std::abs(a - rhs);
    }
    return 0.0;
}

int MilpModel::add_variable(std::string name, double lower, double upper, VarKind kind)
{
    if (std::isnan(lower) || std::isnan(upper) || lower > upper)
        throw Error("add_variable " + name + ": invalid bounds [" + format_number(lower) + ", " +
                    format_number(upper) + "]");
    if (kind == VarKind::Binary && (lower < 0.0 || upper > 1.0))
        throw Error("add_variable " + name + ": binary bounds must lie in [0, 1]");
    variables_.push_back({kind, lower, upper, std::move(name)});
    return static_cast<int>(variables_.size()) - 1;
}

void MilpModel::check_var(int var, const char* where) const
{
    if (var < 0 || var >= num_variables())
        throw Error(std::string(where) + ": reference to missing variable " + std::to_string(var));
}

int MilpModel::add_constraint(const LinearExpr& lhs, RowSense sense, double rhs, std::string name)
{
    Constraint row;
    row.terms = lhs.canonical_terms();
    row.sense = sense;
    row.rhs = rhs - lhs.constant();
    row.name = std::move(name);
    return add_constraint(std::move(row));
}

int MilpModel::add_constraint(Constraint row)
{
    for (const auto& t : row.terms) {
        check_var(t.first, "add_constraint");
        if (!std::isfinite(t.second))
            throw Error("add_constraint " + row.name + ": non-finite coefficient");
    }
    if (!std::isfinite(row.rhs))
        throw Error("add_constraint " + row.name + ": non-finite right-hand side");
    constraints_.push_back(std::move(row));
    return static_cast<int>(constraints_.size()) - 1;
}

void MilpModel::set_objective(ObjSense sense, const LinearExpr& expr)
{
    objective_.sense = sense;
    objective_.terms = expr.canonical_terms();
    objective_.constant = expr.constant();
    for (const auto& t : objective_.terms)
        check_var(t.first, "set_objective");
}

void MilpModel::set_bounds(int var, double lower, double upper)
{
    check_var(var, "set_bounds");
    if (lower > upper)
        throw Error("set_bounds: lower > upper");
    variables_[static_cast<std::size_t>(var)].lower = lower;
    variables_[static_cast<std::size_t>(var)].upper = upper;
}

int MilpModel::num_binaries() const
{
    return static_cast<int>(
        std::count_if(variables_.begin(), variables_.end(), [](const Variable& v) { return v.kind == VarKind::Binary; }));
}

double MilpModel::objective_value(const Eigen::Ref<const Eigen::VectorXd>& point) const
{
    double s = objective_.constant;
    for (const auto& [v, c] : objective_.terms)
        s += c * point[v];
    return s;
}

double MilpModel::max_violation(const Eigen::Ref<const Eigen::VectorXd>& point, bool check_integrality) const
{
    double worst = 0.0;
    for (int j = 0; j < num_variables(); ++j) {
        const Variable& v = variables_[static_cast<std::size_t>(j)];
        worst = std::max({worst, v.lower - point[j], point[j] - v.upper});
        if (check_integrality && v.kind == VarKind::Binary)
            worst = std::max(worst, std::abs(point[j] - std::round(point[j])));
    }
    for (const auto& row : constraints_)
        worst = std::max(worst, row.violation(point));
    return worst;
}

void MilpModel::validate() const
{
    for (const auto& row : constraints_)
        for (const auto& t : row.terms)
            check_var(t.first, "validate");
    for (const auto& t : objective_.terms)
        check_var(t.first, "validate");
    for (const auto& v : variables_)
        if (v.kind == VarKind::Binary && (v.lower < 0.0 || v.upper > 1.0))
            throw Error("validate: binary " + v.name + " has bounds outside [0, 1]");
}

std::string format_number(double v)
{
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string lp_name(const std::string& raw, char fallback_prefix, int id)
{
    std::string s;
    for (char c : raw) {
        const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '[' || c == ']';
        s.push_back(ok ? c : '_');
    }
    if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0])) || s[0] == '.' || s[0] == 'e' || s[0] == 'E')
        s = std::string(1, fallback_prefix) + std::to_string(id) + "_" + s;
    if (s.size() > 255)
        s.resize(255);
    return s;
}

void write_terms(std::ostream& out, const std::vector<Term>& terms, const std::vector<std::string>& names)
{
    if (terms.empty()) {
        out << " 0 " << names.at(0);
        return;
    }
    for (const auto& [v, c] : terms)
        out << (c < 0 ? " - " : " + ") << format_number(std::abs(c)) << ' ' << names[static_cast<std::size_t>(v)];
}

}  // namespace

void MilpModel::write_lp(std::ostream& out) const
{
    std::vector<std::string> names;
    names.reserve(variables_.size());
    for (int j = 0; j < num_variables(); ++j)
        names.push_back(lp_name(variables_[static_cast<std::size_t>(j)].name, 'v', j));

    out << "\\ relumip model: " << num_variables() << " variables, " << num_constraints() << " constraints, "
        << num_binaries() << " binaries\n";
    out << (objective_.sense == ObjSense::Maximize ? "Maximize\n" : "Minimize\n");
    out << " obj:";
    if (objective_.terms.empty() && names.empty())
        out << " 0";
    else
        write_terms(out, objective_.terms, names);
    if (objective_.constant != 0.0)
        out << (objective_.constant < 0 ? " - " : " + ") << format_number(std::abs(objective_.constant));
    out << "\nSubject To\n";
    for (int i = 0; i < num_constraints(); ++i) {
        const Constraint& row = constraints_[static_cast<std::size_t>(i)];
        out << ' ' << lp_name(row.name, 'c', i) << ':';
        write_terms(out, row.terms, names);
        switch (row.sense) {
        case RowSense::LessEqual: out << " <= "; break;
        case RowSense::GreaterEqual: out << " >= "; break;
        case RowSense::Equal: out << " = "; break;
        }
        out << format_number(row.rhs) << '\n';
    }
    out << "Bounds\n";
    for (int j = 0; j < num_variables(); ++j) {
        const Variable& v = variables_[static_cast<std::size_t>(j)];
        const std::string& n = names[static_cast<std::size_t>(j)];
        if (v.kind == VarKind::Binary && v.lower == 0.0 && v.upper == 1.0)
            continue;
        if (std::isinf(v.lower) && std::isinf(v.upper))
            out << ' ' << n << " free\n";
        else if (v.lower == v.upper)
            out << ' ' << n << " = " << format_number(v.lower) << '\n';
        else
            out << ' ' << (std::isinf(v.lower) ? "-inf" : format_number(v.lower)) << " <= " << n << " <= "
                << (std::isinf(v.upper) ? "+inf" : format_number(v.upper)) << '\n';
    }
    bool any_binary = false;
    for (int j = 0; j < num_variables(); ++j)
        if (variables_[static_cast<std::size_t>(j)].kind == VarKind::Binary) {
            if (!any_binary)
                out << "Binaries\n";
            any_binary = true;
            out << ' ' << names[static_cast<std::size_t>(j)] << '\n';
        }
    out << "End\n";
}

std::string MilpModel::to_lp_string() const
{
    std::ostringstream os;
    write_lp(os);
    return os.str();
}

}  // namespace relumip
