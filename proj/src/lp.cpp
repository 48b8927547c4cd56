#include "relumip/lp.hpp"

#include <chrono>
#include <cmath>

#include "relumip/error.hpp"

namespace relumip {

const char* to_string(LpStatus s)
{
    switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::IterationLimit: return "iteration_limit";
    }
    return "?";
}

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kDegenerateStep = 1e-12;
constexpr double kDriftTol = 1e-10;

}  // namespace

LpSolver::LpSolver(const MilpModel& model, bool relax_binaries)
    : cols_(model.num_variables()), rows_(model.num_constraints())
{
    if (!relax_binaries && model.num_binaries() > 0)
        throw Error("solve_lp: model has binaries; pass relax_binaries = true to solve the relaxation");
    a_ = Eigen::MatrixXd::Zero(rows_, cols_);
    lo_.resize(cols_ + rows_);
    hi_.resize(cols_ + rows_);
    for (Eigen::Index j = 0; j < cols_; ++j) {
        lo_[j] = model.variable(static_cast<int>(j)).lower;
        hi_[j] = model.variable(static_cast<int>(j)).upper;
    }
    for (Eigen::Index i = 0; i < rows_; ++i) {
        const Constraint& row = model.constraint(static_cast<int>(i));
        for (const auto& [v, c] : row.terms)
            a_(i, v) += c;
        lo_[cols_ + i] = row.sense == RowSense::LessEqual ? -kInf : row.rhs;
        hi_[cols_ + i] = row.sense == RowSense::GreaterEqual ? kInf : row.rhs;
    }
    cost_ = Eigen::VectorXd::Zero(cols_);
    set_objective(model.objective().sense, model.objective().terms, model.objective().constant);
    x_ = Eigen::VectorXd::Zero(cols_ + rows_);
}

void LpSolver::set_bounds(int var, double lower, double upper)
{
    if (var < 0 || var >= cols_ || lower > upper)
        throw Error("LpSolver::set_bounds: invalid variable or bounds");
    lo_[var] = lower;
    hi_[var] = upper;
}

void LpSolver::set_row_bounds(int row, double lower, double upper)
{
    if (row < 0 || row >= rows_ || lower > upper)
        throw Error("LpSolver::set_row_bounds: invalid row or bounds");
    lo_[cols_ + row] = lower;
    hi_[cols_ + row] = upper;
}

void LpSolver::set_objective(ObjSense sense, const std::vector<Term>& terms, double constant)
{
    obj_sign_ = sense == ObjSense::Minimize ? 1.0 : -1.0;
    obj_constant_ = constant;
    cost_.setZero();
    for (const auto& [v, c] : terms) {
        if (v < 0 || v >= cols_)
            throw Error("LpSolver::set_objective: reference to missing variable");
        cost_[v] += obj_sign_ * c;
    }
}

int LpSolver::add_row(const Constraint& row)
{
    return add_row(row.terms, row.sense == RowSense::LessEqual ? -kInf : row.rhs,
                   row.sense == RowSense::GreaterEqual ? kInf : row.rhs);
}

int LpSolver::add_row(const std::vector<Term>& terms, double lower, double upper)
{
    Eigen::RowVectorXd coeffs = Eigen::RowVectorXd::Zero(cols_);
    for (const auto& [v, c] : terms) {
        if (v < 0 || v >= cols_)
            throw Error("LpSolver::add_row: reference to missing variable");
        coeffs[v] += c;
    }
    const Eigen::Index m = rows_, n = cols_;

    a_.conservativeResize(m + 1, n);
    a_.row(m) = coeffs;
    lo_.conservativeResize(n + m + 1);
    hi_.conservativeResize(n + m + 1);
    lo_[n + m] = lower;
    hi_[n + m] = upper;
    x_.conservativeResize(n + m + 1);
    x_[n + m] = 0.0;

    if (!basis_.empty())
        basis_.status.push_back(VarStatus::Basic);

    if (factored_) {
        // New logical enters the basis: its tableau row is -[a, 0] + a_B^T T.
        Eigen::VectorXd a_basic = Eigen::VectorXd::Zero(m);
        for (Eigen::Index i = 0; i < m; ++i)
            if (basic_[static_cast<std::size_t>(i)] < n)
                a_basic[i] = coeffs[basic_[static_cast<std::size_t>(i)]];
        Eigen::RowVectorXd new_row = a_basic.transpose() * tab_;
        new_row.head(n) -= coeffs;
        tab_.conservativeResize(m + 1, n + m + 1);
        tab_.col(n + m).setZero();
        tab_.row(m).head(n + m) = new_row;
        tab_(m, n + m) = 1.0;
        basic_.push_back(n + m);
    }
    rows_ = m + 1;
    return static_cast<int>(m);
}

void LpSolver::set_basis(const Basis& basis)
{
    Basis extended = basis;
    const auto total = static_cast<std::size_t>(cols_ + rows_);
    if (extended.status.size() < total && extended.status.size() >= static_cast<std::size_t>(cols_))
        extended.status.resize(total, VarStatus::Basic);
    if (extended.status.size() != total)
        return;  // unusable, keep the current basis
    if (factored_ && extended == basis_)
        return;
    basis_ = std::move(extended);
    factored_ = false;
}

void LpSolver::slack_basis()
{
    const Eigen::Index n = cols_, m = rows_;
    basis_.status.assign(static_cast<std::size_t>(n + m), VarStatus::Basic);
    for (Eigen::Index j = 0; j < n; ++j)
        basis_.status[static_cast<std::size_t>(j)] = std::isfinite(lo_[j])   ? VarStatus::AtLower
                                                     : std::isfinite(hi_[j]) ? VarStatus::AtUpper
                                                                             : VarStatus::Free;
    basic_.resize(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i)
        basic_[static_cast<std::size_t>(i)] = n + i;
    tab_.resize(m, n + m);
    tab_.leftCols(n) = -a_;
    tab_.rightCols(m).setIdentity();
    factored_ = true;
    since_refactor_ = 0;
}

void LpSolver::refactor()
{
    const Eigen::Index n = cols_, m = rows_;
    if (basis_.status.size() != static_cast<std::size_t>(n + m)) {
        slack_basis();
        return;
    }
    std::vector<Eigen::Index> basic;
    for (Eigen::Index k = 0; k < n + m; ++k)
        if (basis_.status[static_cast<std::size_t>(k)] == VarStatus::Basic)
            basic.push_back(k);
    if (static_cast<Eigen::Index>(basic.size()) != m) {
        slack_basis();
        return;
    }
    bool all_logical = true;
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const Eigen::Index k = basic[static_cast<std::size_t>(i)];
        if (k < n) {
            b.col(i) = a_.col(k);
            all_logical = false;
        } else {
            b(k - n, i) = -1.0;
        }
    }
    if (all_logical) {
        slack_basis();
        return;
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(b);
    if (!(lu.rcond() > 1e-13)) {
        slack_basis();
        return;
    }
    Eigen::MatrixXd full(m, n + m);
    full.leftCols(n) = a_;
    full.rightCols(m) = -Eigen::MatrixXd::Identity(m, m);
    tab_ = lu.solve(full);
    basic_ = std::move(basic);
    factored_ = true;
    since_refactor_ = 0;
}

void LpSolver::normalize_nonbasic()
{
    for (Eigen::Index k = 0; k < cols_ + rows_; ++k) {
        auto& st = basis_.status[static_cast<std::size_t>(k)];
        if (st == VarStatus::Basic)
            continue;
        const bool has_lo = std::isfinite(lo_[k]), has_hi = std::isfinite(hi_[k]);
        if (st == VarStatus::AtLower && !has_lo)
            st = has_hi ? VarStatus::AtUpper : VarStatus::Free;
        else if (st == VarStatus::AtUpper && !has_hi)
            st = has_lo ? VarStatus::AtLower : VarStatus::Free;
        else if (st == VarStatus::Free && (has_lo || has_hi))
            st = has_lo ? VarStatus::AtLower : VarStatus::AtUpper;
        x_[k] = st == VarStatus::AtLower ? lo_[k] : st == VarStatus::AtUpper ? hi_[k] : 0.0;
    }
}

void LpSolver::compute_basic_values()
{
    Eigen::VectorXd nonbasic = x_;
    for (Eigen::Index b : basic_)
        nonbasic[b] = 0.0;
    const Eigen::VectorXd xb = -(tab_ * nonbasic);
    for (std::size_t i = 0; i < basic_.size(); ++i)
        x_[basic_[i]] = xb[static_cast<Eigen::Index>(i)];
}

Eigen::VectorXd LpSolver::structural_point() const { return x_.head(cols_); }

double LpSolver::drift() const
{
    if (rows_ == 0)
        return 0.0;
    const Eigen::VectorXd r = a_ * x_.head(cols_) - x_.tail(rows_);
    return r.lpNorm<Eigen::Infinity>() / (1.0 + x_.lpNorm<Eigen::Infinity>());
}

LpSolver::Step LpSolver::iterate(const LpLimits& limits, bool bland)
{
    const Eigen::Index n = cols_, m = rows_;
    const double tol = limits.tol_feas;

    Eigen::VectorXd cb = Eigen::VectorXd::Zero(m);
    bool phase1 = false;
    for (Eigen::Index i = 0; i < m; ++i) {
        const Eigen::Index k = basic_[static_cast<std::size_t>(i)];
        if (x_[k] < lo_[k] - tol) {
            cb[i] = -1.0;
            phase1 = true;
        } else if (x_[k] > hi_[k] + tol) {
            cb[i] = 1.0;
            phase1 = true;
        }
    }
    if (!phase1)
        for (Eigen::Index i = 0; i < m; ++i) {
            const Eigen::Index k = basic_[static_cast<std::size_t>(i)];
            cb[i] = k < n ? cost_[k] : 0.0;
        }

    Eigen::VectorXd d = -(tab_.transpose() * cb);
    if (!phase1)
        d.head(n) += cost_;

    // Entering column.
    Eigen::Index enter = -1;
    int dir = 0;
    double best_score = 0.0;
    for (Eigen::Index k = 0; k < n + m; ++k) {
        const VarStatus st = basis_.status[static_cast<std::size_t>(k)];
        if (st == VarStatus::Basic || lo_[k] == hi_[k])
            continue;
        int kdir = 0;
        if ((st == VarStatus::AtLower || st == VarStatus::Free) && d[k] < -limits.tol_opt)
            kdir = 1;
        else if ((st == VarStatus::AtUpper || st == VarStatus::Free) && d[k] > limits.tol_opt)
            kdir = -1;
        if (kdir == 0)
            continue;
        if (bland) {
            enter = k;
            dir = kdir;
            break;
        }
        const double score = limits.pricing == Pricing::SteepestEdge
                                 ? d[k] * d[k] / (1.0 + tab_.col(k).squaredNorm())
                                 : std::abs(d[k]);
        if (score > best_score) {
            best_score = score;
            enter = k;
            dir = kdir;
        }
    }
    if (enter < 0)
        return phase1 ? Step::Infeasible : Step::Optimal;

    // Ratio test: alpha[i] is the rate of change of basic i per unit step.
    const Eigen::VectorXd alpha = -static_cast<double>(dir) * tab_.col(enter);
    auto target_of = [&](Eigen::Index i, double& target) {
        const Eigen::Index k = basic_[static_cast<std::size_t>(i)];
        const double v = x_[k];
        if (alpha[i] > 0) {
            if (v < lo_[k] - tol)
                target = lo_[k];
            else if (v > hi_[k] + tol)
                return false;
            else
                target = hi_[k];
        } else {
            if (v > hi_[k] + tol)
                target = hi_[k];
            else if (v < lo_[k] - tol)
                return false;
            else
                target = lo_[k];
        }
        return std::isfinite(target);
    };

    double relaxed_min = kInf;
    if (!bland)
        for (Eigen::Index i = 0; i < m; ++i) {
            double target = 0.0;
            if (std::abs(alpha[i]) < kPivotTol || !target_of(i, target))
                continue;
            const Eigen::Index k = basic_[static_cast<std::size_t>(i)];
            const double shifted = alpha[i] > 0 ? target + tol : target - tol;
            relaxed_min = std::min(relaxed_min, std::max(0.0, (shifted - x_[k]) / alpha[i]));
        }

    Eigen::Index leave = -1;
    double step = kInf, leave_target = 0.0, leave_alpha = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        double target = 0.0;
        if (std::abs(alpha[i]) < kPivotTol || !target_of(i, target))
            continue;
        const Eigen::Index k = basic_[static_cast<std::size_t>(i)];
        const double ratio = std::max(0.0, (target - x_[k]) / alpha[i]);
        if (bland) {
            const bool better = ratio < step - kDegenerateStep ||
                                (ratio <= step + kDegenerateStep && leave >= 0 && k < basic_[static_cast<std::size_t>(leave)]);
            if (leave < 0 || better) {
                leave = i;
                step = ratio;
                leave_target = target;
            }
        } else if (ratio <= relaxed_min && std::abs(alpha[i]) > std::abs(leave_alpha)) {
            leave = i;
            step = ratio;
            leave_target = target;
            leave_alpha = alpha[i];
        }
    }

    const double range = hi_[enter] - lo_[enter];
    const bool flip = std::isfinite(range) && range <= step;
    if (leave < 0 && !flip)
        return phase1 ? Step::Infeasible : Step::Unbounded;
    if (flip)
        step = range;

    x_[enter] += dir * step;
    if (flip) {
        auto& st = basis_.status[static_cast<std::size_t>(enter)];
        st = dir > 0 ? VarStatus::AtUpper : VarStatus::AtLower;
        x_[enter] = dir > 0 ? hi_[enter] : lo_[enter];
    } else {
        const Eigen::Index out = basic_[static_cast<std::size_t>(leave)];
        basis_.status[static_cast<std::size_t>(out)] =
            leave_target == lo_[out] ? VarStatus::AtLower : VarStatus::AtUpper;
        x_[out] = leave_target;
        basis_.status[static_cast<std::size_t>(enter)] = VarStatus::Basic;
        basic_[static_cast<std::size_t>(leave)] = enter;

        const double pivot = tab_(leave, enter);
        tab_.row(leave) /= pivot;
        Eigen::VectorXd col = tab_.col(enter);
        col[leave] = 0.0;
        const Eigen::RowVectorXd prow = tab_.row(leave);
        tab_.noalias() -= col * prow;
        ++since_refactor_;
        if (since_refactor_ % limits.refactor_interval == 0 &&
            (since_refactor_ >= 8 * limits.refactor_interval || drift() > kDriftTol)) {
            refactor();
            normalize_nonbasic();
        }
    }
    compute_basic_values();
    return Step::Continue;
}

LpResult LpSolver::solve(const LpLimits& limits)
{
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();

    if (basis_.status.size() != static_cast<std::size_t>(cols_ + rows_))
        slack_basis();
    normalize_nonbasic();
    if (!factored_)
        refactor();
    normalize_nonbasic();
    compute_basic_values();

    LpResult result;
    long degenerate_run = 0;
    int verify_rounds = 0;
    while (true) {
        if (result.iterations >= limits.max_iterations) {
            result.status = LpStatus::IterationLimit;
            break;
        }
        if (std::isfinite(limits.time_limit) && result.iterations % 32 == 0 &&
            std::chrono::duration<double>(clock::now() - start).count() > limits.time_limit) {
            result.status = LpStatus::IterationLimit;
            break;
        }
        const bool bland = degenerate_run >= limits.bland_after;
        const Eigen::VectorXd before = x_;
        const Step step = iterate(limits, bland);
        if (step == Step::Continue) {
            ++result.iterations;
            const double moved = (x_ - before).lpNorm<Eigen::Infinity>();
            degenerate_run = moved <= kDegenerateStep ? degenerate_run + 1 : 0;
            continue;
        }
        // Confirm a terminal answer on a fresh factorization once updates have drifted.
        if (since_refactor_ > 0 && verify_rounds < 3 && drift() > kDriftTol) {
            ++verify_rounds;
            refactor();
            normalize_nonbasic();
            compute_basic_values();
            continue;
        }
        result.status = step == Step::Optimal      ? LpStatus::Optimal
                        : step == Step::Infeasible ? LpStatus::Infeasible
                                                   : LpStatus::Unbounded;
        break;
    }
    result.point = structural_point();
    result.objective = obj_sign_ * cost_.dot(result.point) + obj_constant_;
    result.basis = basis_;
    return result;
}

LpResult solve_lp(const MilpModel& model, bool relax_binaries, const Basis* warm_start, const LpLimits& limits)
{
    LpSolver solver(model, relax_binaries);
    if (warm_start)
        solver.set_basis(*warm_start);
    return solver.solve(limits);
}

}  // namespace relumip
