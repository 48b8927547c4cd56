#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "relumip/milp_model.hpp"

namespace relumip {

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

const char* to_string(LpStatus s);

enum class Pricing { SteepestEdge, Dantzig };

struct LpLimits
{
    long max_iterations = 50000;
    double time_limit = kInf;  // seconds
    double tol_feas = 1e-7;
    double tol_opt = 1e-7;
    /// Consecutive degenerate pivots before switching to Bland's rule.
    int bland_after = 1000;
    int refactor_interval = 64;
    Pricing pricing = Pricing::SteepestEdge;
};

enum class VarStatus : std::uint8_t { Basic, AtLower, AtUpper, Free };

/// Simplex basis over structural columns followed by one logical column per row.
struct Basis
{
    std::vector<VarStatus> status;

    bool empty() const { return status.empty(); }
    friend bool operator==(const Basis&, const Basis&) = default;
};

struct LpResult
{
    LpStatus status = LpStatus::IterationLimit;
    double objective = 0.0;  // in the model's own sense, constant included
    Eigen::VectorXd point;   // structural values
    long iterations = 0;
    Basis basis;
};

/// Bounded-variable primal simplex on a dense tableau.
///
/// Rows are held as a x - r = 0 with a bounded logical r per row, so every
/// constraint sense, free rows and range rows are variable bounds. Bound,
/// row-bound and objective changes keep the factorization; added rows extend
/// it in place. Not thread-safe; copies are independent.
class LpSolver
{
public:
    LpSolver(const MilpModel& model, bool relax_binaries);

    int num_columns() const { return static_cast<int>(cols_); }
    int num_rows() const { return static_cast<int>(rows_); }

    void set_bounds(int var, double lower, double upper);
    double lower(int var) const { return lo_[var]; }
    double upper(int var) const { return hi_[var]; }
    void set_row_bounds(int row, double lower, double upper);

    /// Row with activity bounded to [lower, upper]; either side may be infinite.
    int add_row(const std::vector<Term>& terms, double lower, double upper);
    int add_row(const Constraint& row);

    void set_objective(ObjSense sense, const std::vector<Term>& terms, double constant = 0.0);

    const Basis& basis() const { return basis_; }
    /// Installs a basis; sizes shorter than the current row count are extended with basic logicals.
    void set_basis(const Basis& basis);
    /// Drops the basis; the next solve starts from the all-logical basis.
    void reset_basis()
    {
        basis_.status.clear();
        factored_ = false;
    }

    LpResult solve(const LpLimits& limits = {});

private:
    enum class Step { Continue, Optimal, Infeasible, Unbounded };

    void refactor();
    void slack_basis();
    void normalize_nonbasic();
    void compute_basic_values();
    Step iterate(const LpLimits& limits, bool bland);
    Eigen::VectorXd structural_point() const;
    /// Scaled residual of the row definitions at the current point.
    double drift() const;

    Eigen::Index cols_ = 0;  // structural columns
    Eigen::Index rows_ = 0;
    Eigen::MatrixXd a_;      // rows_ x cols_
    Eigen::VectorXd lo_, hi_;  // cols_ + rows_
    Eigen::VectorXd cost_;     // minimization form, structural only
    double obj_constant_ = 0.0;
    double obj_sign_ = 1.0;    // +1 minimize, -1 maximize

    Basis basis_;
    std::vector<Eigen::Index> basic_;  // row position -> column
    Eigen::MatrixXd tab_;              // B^-1 [A | -I]
    Eigen::VectorXd x_;
    bool factored_ = false;
    long since_refactor_ = 0;
};

/// One-shot LP solve. With relax_binaries = false the model must not contain binaries.
LpResult solve_lp(const MilpModel& model, bool relax_binaries, const Basis* warm_start = nullptr,
                  const LpLimits& limits = {});

}  // namespace relumip
