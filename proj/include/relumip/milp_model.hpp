#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace relumip {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarKind { Continuous, Binary };
enum class RowSense { LessEqual, Equal, GreaterEqual };
enum class ObjSense { Maximize, Minimize };

struct Variable
{
    VarKind kind = VarKind::Continuous;
    double lower = 0.0;
    double upper = kInf;
    std::string name;
};

using Term = std::pair<int, double>;

/// Sparse linear expression sum(coef * var) + constant.
class LinearExpr
{
public:
    LinearExpr() = default;
    explicit LinearExpr(double constant) : constant_(constant) {}

    LinearExpr& add(int var, double coef)
    {
        terms_.emplace_back(var, coef);
        return *this;
    }
    LinearExpr& add_constant(double c)
    {
        constant_ += c;
        return *this;
    }
    LinearExpr& add(const LinearExpr& other, double scale = 1.0);

    const std::vector<Term>& terms() const { return terms_; }
    double constant() const { return constant_; }

    /// Terms sorted by variable, duplicates merged, zero coefficients dropped.
    std::vector<Term> canonical_terms() const;

    double evaluate(const Eigen::Ref<const Eigen::VectorXd>& point) const;

private:
    std::vector<Term> terms_;
    double constant_ = 0.0;
};

/// Row: sum(coef * var) <sense> rhs, terms canonical.
struct Constraint
{
    std::vector<Term> terms;
    RowSense sense = RowSense::LessEqual;
    double rhs = 0.0;
    std::string name;

    double activity(const Eigen::Ref<const Eigen::VectorXd>& point) const;
    /// Amount by which the point violates the row (0 if satisfied).
    double violation(const Eigen::Ref<const Eigen::VectorXd>& point) const;
};

struct Objective
{
    ObjSense sense = ObjSense::Maximize;
    std::vector<Term> terms;
    double constant = 0.0;
};

/// Solver-agnostic MILP: bounded continuous/binary variables, linear rows, linear objective.
class MilpModel
{
public:
    int add_variable(std::string name, double lower, double upper, VarKind kind = VarKind::Continuous);
    int add_binary(std::string name) { return add_variable(std::move(name), 0.0, 1.0, VarKind::Binary); }

    /// Adds lhs <sense> rhs; the expression constant moves to the right-hand side.
    int add_constraint(const LinearExpr& lhs, RowSense sense, double rhs, std::string name);
    int add_constraint(Constraint row);

    void set_objective(ObjSense sense, const LinearExpr& expr);

    void set_bounds(int var, double lower, double upper);

    int num_variables() const { return static_cast<int>(variables_.size()); }
    int num_constraints() const { return static_cast<int>(constraints_.size()); }
    int num_binaries() const;

    const Variable& variable(int id) const { return variables_.at(static_cast<std::size_t>(id)); }
    const std::vector<Variable>& variables() const { return variables_; }
    const Constraint& constraint(int id) const { return constraints_.at(static_cast<std::size_t>(id)); }
    const std::vector<Constraint>& constraints() const { return constraints_; }
    const Objective& objective() const { return objective_; }

    double objective_value(const Eigen::Ref<const Eigen::VectorXd>& point) const;

    /// Largest bound, row or integrality violation of a point.
    double max_violation(const Eigen::Ref<const Eigen::VectorXd>& point, bool check_integrality = true) const;

    /// Throws if a row references a missing variable or a binary has bounds outside [0, 1].
    void validate() const;

    /// CPLEX LP-format text.
    void write_lp(std::ostream& out) const;
    std::string to_lp_string() const;

private:
    void check_var(int var, const char* where) const;

    std::vector<Variable> variables_;
    std::vector<Constraint> constraints_;
    Objective objective_;
};

std::string format_number(double v);

}  // namespace relumip
