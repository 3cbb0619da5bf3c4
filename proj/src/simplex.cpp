#include "poc/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <cstdio>
#include <cstdlib>

namespace poc {

std::string to_string(LpStatus status) {
    switch (status) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::iteration_limit: return "iteration_limit";
    }
    return "?";
}

namespace {

enum class State : std::uint8_t { basic, lower, upper };

constexpr double kDropTiny = 1e-14;
constexpr std::size_t kRefactorEvery = 100;

/// Dense tableau over [structural | slack | artificial] columns. Basic values
/// are tracked explicitly, so nonbasic columns may sit at either bound.
class Tableau {
public:
    Tableau(std::size_t rows, std::size_t cols, const LpOptions& options)
        : m_(rows), n_(cols), opt_(options), t_(rows * cols, 0.0), d_(cols, 0.0),
          ub_(cols, kInf), beta_(rows, 0.0), basis_(rows, 0), state_(cols, State::lower) {}

    double& at(std::size_t i, std::size_t j) { return t_[i * n_ + j]; }
    double at(std::size_t i, std::size_t j) const { return t_[i * n_ + j]; }
    std::vector<double>& upper() { return ub_; }
    std::vector<double>& beta() { return beta_; }
    std::vector<std::size_t>& basis() { return basis_; }
    std::vector<State>& state() { return state_; }
    const std::vector<double>& reduced_costs() const { return d_; }
    std::size_t iterations() const { return iterations_; }

    void price(const std::vector<double>& cost) {
        for (std::size_t j = 0; j < n_; ++j) d_[j] = cost[j];
        for (std::size_t i = 0; i < m_; ++i) {
            const double cb = cost[basis_[i]];
            if (cb == 0.0) continue;
            const double* row = &t_[i * n_];
            for (std::size_t j = 0; j < n_; ++j) d_[j] -= cb * row[j];
        }
        for (std::size_t i = 0; i < m_; ++i) d_[basis_[i]] = 0.0;
    }

    LpStatus run(const std::vector<double>& cost, std::size_t max_iterations) {
        bool bland = false;
        std::size_t degenerate = 0;
        std::size_t since_refactor = 0;
        price(cost);
        for (;;) {
            if (iterations_ >= max_iterations) return LpStatus::iteration_limit;
            if (since_refactor >= kRefactorEvery) {
                refactor();
                price(cost);
                since_refactor = 0;
            }
            std::size_t q = choose_entering(bland);
            if (q == n_ && since_refactor > 0) {
                refactor();
                price(cost);
                since_refactor = 0;
                q = choose_entering(bland);
            }
            if (q == n_) return LpStatus::optimal;
            ++since_refactor;
            const double dir = state_[q] == State::lower ? 1.0 : -1.0;

            // Harris two-pass ratio test: bound the step with a feasibility
            // allowance, then take the largest pivot among rows within it.
            const double delta = opt_.feas_tol;
            double theta_max = kInf;
            for (std::size_t i = 0; i < m_; ++i) {
                const double alpha = dir * at(i, q);
                if (alpha > opt_.pivot_tol)
                    theta_max = std::min(theta_max, (std::max(beta_[i], 0.0) + delta) / alpha);
                else if (alpha < -opt_.pivot_tol && std::isfinite(ub_[basis_[i]]))
                    theta_max = std::min(theta_max, (std::max(ub_[basis_[i]] - beta_[i], 0.0) + delta) / -alpha);
            }
            std::size_t r = m_;
            double theta = kInf;
            bool to_upper = false;
            double best = 0.0;
            for (std::size_t i = 0; i < m_; ++i) {
                const double alpha = dir * at(i, q);
                double limit;
                bool hits_upper;
                if (alpha > opt_.pivot_tol) {
                    limit = std::max(beta_[i], 0.0) / alpha;
                    hits_upper = false;
                } else if (alpha < -opt_.pivot_tol && std::isfinite(ub_[basis_[i]])) {
                    limit = std::max(ub_[basis_[i]] - beta_[i], 0.0) / -alpha;
                    hits_upper = true;
                } else {
                    continue;
                }
                if (limit > theta_max) continue;
                const double mag = std::abs(alpha);
                const bool take = r == m_ || (bland ? basis_[i] < basis_[r] : mag > best);
                if (take) {
                    best = mag;
                    theta = limit;
                    r = i;
                    to_upper = hits_upper;
                }
            }
            if (ub_[q] <= theta) {
                r = m_;
                theta = ub_[q];
            }
            if (!std::isfinite(theta)) return LpStatus::unbounded;

            for (std::size_t i = 0; i < m_; ++i) {
                const double a = at(i, q);
                if (a != 0.0) beta_[i] -= dir * a * theta;
            }
            if (r == m_) {
                state_[q] = state_[q] == State::lower ? State::upper : State::lower;
            } else {
                const std::size_t leaving = basis_[r];
                beta_[r] = dir > 0 ? theta : ub_[q] - theta;
                state_[leaving] = to_upper ? State::upper : State::lower;
                state_[q] = State::basic;
                basis_[r] = q;
                pivot(r, q);
            }
            ++iterations_;
            if (theta <= 1e-12) {
                if (++degenerate > opt_.degenerate_limit) bland = true;
            } else {
                degenerate = 0;
                bland = false;
            }
        }
    }

    /// Records the starting tableau: row i owns unit column unit[i] with
    /// coefficient sigma[i], so the current basis inverse can be read back.
    void snapshot(std::vector<std::size_t> unit, std::vector<double> sigma, std::vector<double> rhs) {
        a0_ = t_;
        unit_ = std::move(unit);
        sigma_ = std::move(sigma);
        rhs_ = std::move(rhs);
    }

    /// Rebuilds the tableau as B^-1 A from the starting matrix by Gauss-Jordan
    /// elimination with partial pivoting; keeps the old one if B looks singular.
    void refactor() {
        std::vector<double> t = a0_;
        std::vector<std::size_t> order(m_);
        for (std::size_t i = 0; i < m_; ++i) order[i] = i;
        for (std::size_t k = 0; k < m_; ++k) {
            const std::size_t col = basis_[k];
            std::size_t best = k;
            for (std::size_t i = k + 1; i < m_; ++i)
                if (std::abs(t[i * n_ + col]) > std::abs(t[best * n_ + col])) best = i;
            if (std::abs(t[best * n_ + col]) < 1e-11) return;
            if (best != k)
                std::swap_ranges(t.begin() + static_cast<std::ptrdiff_t>(k * n_),
                                 t.begin() + static_cast<std::ptrdiff_t>((k + 1) * n_),
                                 t.begin() + static_cast<std::ptrdiff_t>(best * n_));
            double* pr = &t[k * n_];
            const double inv = 1.0 / pr[col];
            for (std::size_t j = 0; j < n_; ++j) pr[j] *= inv;
            pr[col] = 1.0;
            for (std::size_t i = 0; i < m_; ++i) {
                if (i == k) continue;
                double* row = &t[i * n_];
                const double f = row[col];
                if (f == 0.0) continue;
                for (std::size_t j = 0; j < n_; ++j)
                    if (pr[j] != 0.0) row[j] -= f * pr[j];
                row[col] = 0.0;
            }
        }
        for (auto& v : t)
            if (std::abs(v) < kDropTiny) v = 0.0;
        t_ = std::move(t);
        recompute_beta();
    }

    /// beta = B^-1 (b - sum of nonbasic columns at their upper bound).
    void recompute_beta() {
        std::vector<double> b = rhs_;
        for (std::size_t j = 0; j < n_; ++j) {
            if (state_[j] != State::upper) continue;
            for (std::size_t i = 0; i < m_; ++i) b[i] -= a0_[i * n_ + j] * ub_[j];
        }
        for (std::size_t i = 0; i < m_; ++i) {
            double v = 0.0;
            const double* row = &t_[i * n_];
            for (std::size_t k = 0; k < m_; ++k)
                if (b[k] != 0.0) v += row[unit_[k]] / sigma_[k] * b[k];
            beta_[i] = v;
        }
    }

    /// Degenerate pivot of basic row r onto column q (used to expel artificials).
    void exchange(std::size_t r, std::size_t q) {
        const std::size_t leaving = basis_[r];
        beta_[r] = state_[q] == State::upper ? ub_[q] : 0.0;
        state_[leaving] = State::lower;
        state_[q] = State::basic;
        basis_[r] = q;
        pivot(r, q);
    }

private:
    std::size_t choose_entering(bool bland) const {
        std::size_t q = n_;
        double best = 0.0;
        for (std::size_t j = 0; j < n_; ++j) {
            if (state_[j] == State::basic || ub_[j] <= 0.0) continue;
            double score;
            if (state_[j] == State::lower && d_[j] < -opt_.opt_tol)
                score = -d_[j];
            else if (state_[j] == State::upper && d_[j] > opt_.opt_tol)
                score = d_[j];
            else
                continue;
            if (bland) return j;
            if (score > best) {
                best = score;
                q = j;
            }
        }
        return q;
    }

    void pivot(std::size_t r, std::size_t q) {
        double* pr = &t_[r * n_];
        const double inv = 1.0 / pr[q];
        nz_.clear();
        for (std::size_t j = 0; j < n_; ++j) {
            if (pr[j] == 0.0) continue;
            pr[j] *= inv;
            if (std::abs(pr[j]) < kDropTiny)
                pr[j] = 0.0;
            else
                nz_.push_back(j);
        }
        pr[q] = 1.0;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == r) continue;
            double* row = &t_[i * n_];
            const double f = row[q];
            if (f == 0.0) continue;
            for (std::size_t j : nz_) {
                const double v = row[j] - f * pr[j];
                row[j] = std::abs(v) < kDropTiny ? 0.0 : v;
            }
            row[q] = 0.0;
        }
        const double f = d_[q];
        if (f != 0.0) {
            for (std::size_t j : nz_) d_[j] -= f * pr[j];
            d_[q] = 0.0;
        }
    }

    std::size_t m_;
    std::size_t n_;
    LpOptions opt_;
    std::vector<double> t_;
    std::vector<double> d_;
    std::vector<double> ub_;
    std::vector<double> beta_;
    std::vector<std::size_t> basis_;
    std::vector<State> state_;
    std::vector<std::size_t> nz_;
    std::vector<double> a0_;
    std::vector<std::size_t> unit_;
    std::vector<double> sigma_;
    std::vector<double> rhs_;
    std::size_t iterations_ = 0;
};

double row_activity(const LinearConstraint& row, const std::vector<double>& x) {
    double s = 0.0;
    for (const auto& t : row.terms) s += t.coef * x[t.col];
    return s;
}

double row_violation(const LinearConstraint& row, double lhs) {
    switch (row.rel) {
    case Relation::eq: return std::abs(lhs - row.rhs);
    case Relation::le: return std::max(0.0, lhs - row.rhs);
    case Relation::ge: return std::max(0.0, row.rhs - lhs);
    }
    return 0.0;
}

void add_tag(std::vector<std::string>& tags, const std::string& tag) {
    if (std::find(tags.begin(), tags.end(), tag) == tags.end()) tags.push_back(tag);
}

}  // namespace

LpResult solve_simplex(const LpModel& model, Sense sense, const LpOptions& options) {
    const std::size_t n0 = model.num_cols();
    if (model.upper.size() != n0 || model.objective.size() != n0)
        throw std::invalid_argument("LpModel column arrays differ in length");
    for (std::size_t j = 0; j < n0; ++j) {
        if (!std::isfinite(model.lower[j])) throw std::invalid_argument("lower bounds must be finite");
        if (model.upper[j] < model.lower[j]) throw std::invalid_argument("column with lower > upper");
    }
    for (const auto& row : model.rows)
        for (const auto& t : row.terms)
            if (t.col >= n0) throw std::invalid_argument("row references a missing column");

    const double sgn = sense == Sense::minimize ? 1.0 : -1.0;
    LpResult result;
    result.x = model.lower;
    result.duals.assign(model.rows.size(), 0.0);

    // --- presolve: zero-sum rows over nonnegative terms fix their columns
    std::vector<bool> fixed(n0, false);
    for (std::size_t j = 0; j < n0; ++j) fixed[j] = model.upper[j] == model.lower[j];
    std::vector<bool> dropped(model.rows.size(), false);
    std::vector<std::size_t> drop_order;
    for (bool changed = options.presolve; changed;) {
        changed = false;
        for (std::size_t i = 0; i < model.rows.size(); ++i) {
            const auto& row = model.rows[i];
            if (dropped[i] || row.rel == Relation::ge) continue;
            double rest = row.rhs;
            bool positive = true;
            bool any_free = false;
            for (const auto& t : row.terms) {
                rest -= t.coef * model.lower[t.col];
                if (!fixed[t.col]) {
                    any_free = true;
                    positive = positive && t.coef > 0.0;
                }
            }
            if (!any_free || !positive || std::abs(rest) > 1e-15) continue;
            for (const auto& t : row.terms) fixed[t.col] = true;
            dropped[i] = true;
            drop_order.push_back(i);
            changed = true;
        }
    }

    std::vector<std::size_t> active;
    std::vector<std::size_t> pos(n0, SIZE_MAX);
    for (std::size_t j = 0; j < n0; ++j)
        if (!fixed[j]) {
            pos[j] = active.size();
            active.push_back(j);
        }
    const std::size_t n = active.size();

    struct StdRow {
        std::size_t source;
        std::vector<Term> terms;  // over active positions
        double rhs;
        double flip;
        double slack;  // 0: none, else +-1 after flip
    };
    std::vector<StdRow> rows;
    for (std::size_t i = 0; i < model.rows.size(); ++i) {
        if (dropped[i]) continue;
        const auto& row = model.rows[i];
        StdRow s{i, {}, row.rhs, 1.0, 0.0};
        for (const auto& t : row.terms) {
            s.rhs -= t.coef * model.lower[t.col];
            if (fixed[t.col]) continue;
            auto it = std::find_if(s.terms.begin(), s.terms.end(),
                                   [&](const Term& e) { return e.col == pos[t.col]; });
            if (it == s.terms.end())
                s.terms.push_back({pos[t.col], t.coef});
            else
                it->coef += t.coef;
        }
        if (s.terms.empty()) {
            const double lhs_gap = -s.rhs;  // activity 0 against shifted rhs
            double viol = 0.0;
            if (row.rel == Relation::eq) viol = std::abs(lhs_gap);
            if (row.rel == Relation::le) viol = std::max(0.0, lhs_gap);
            if (row.rel == Relation::ge) viol = std::max(0.0, -lhs_gap);
            if (viol > options.feas_tol) {
                result.status = LpStatus::infeasible;
                add_tag(result.conflict_tags, row.tag);
                return result;
            }
            continue;
        }
        if (row.rel == Relation::le) s.slack = 1.0;
        if (row.rel == Relation::ge) s.slack = -1.0;
        if (s.rhs < 0.0) {
            s.flip = -1.0;
            s.rhs = -s.rhs;
            s.slack = -s.slack;
            for (auto& t : s.terms) t.coef = -t.coef;
        }
        rows.push_back(std::move(s));
    }
    const std::size_t m = rows.size();

    std::vector<std::size_t> slack_col(m, SIZE_MAX);
    std::vector<std::size_t> art_col(m, SIZE_MAX);
    std::size_t ncols = n;
    for (std::size_t i = 0; i < m; ++i)
        if (rows[i].slack != 0.0) slack_col[i] = ncols++;
    for (std::size_t i = 0; i < m; ++i)
        if (rows[i].slack != 1.0) art_col[i] = ncols++;

    Tableau tab(m, ncols, options);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t j = active[k];
        tab.upper()[k] = model.upper[j] - model.lower[j];
    }
    std::vector<double> cost1(ncols, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (const auto& t : rows[i].terms) tab.at(i, t.col) = t.coef;
        if (slack_col[i] != SIZE_MAX) tab.at(i, slack_col[i]) = rows[i].slack;
        if (art_col[i] != SIZE_MAX) {
            tab.at(i, art_col[i]) = 1.0;
            cost1[art_col[i]] = 1.0;
        }
        tab.basis()[i] = art_col[i] != SIZE_MAX ? art_col[i] : slack_col[i];
        tab.state()[tab.basis()[i]] = State::basic;
        tab.beta()[i] = rows[i].rhs;
    }

    {
        std::vector<std::size_t> unit(m);
        std::vector<double> sigma(m);
        std::vector<double> rhs(m);
        for (std::size_t i = 0; i < m; ++i) {
            unit[i] = art_col[i] != SIZE_MAX ? art_col[i] : slack_col[i];
            sigma[i] = art_col[i] != SIZE_MAX ? 1.0 : rows[i].slack;
            rhs[i] = rows[i].rhs;
        }
        tab.snapshot(std::move(unit), std::move(sigma), std::move(rhs));
    }

    const std::size_t max_iter =
        options.max_iterations ? options.max_iterations : 50 * (m + ncols) + 1000;

    // Row multiplier of the standard-form row i under cost vector c, read off
    // the unit column that row owns.
    auto std_dual = [&](std::size_t i, const std::vector<double>& c) {
        const std::size_t k = slack_col[i] != SIZE_MAX ? slack_col[i] : art_col[i];
        const double sigma = slack_col[i] != SIZE_MAX ? rows[i].slack : 1.0;
        return (c[k] - tab.reduced_costs()[k]) / sigma;
    };

    // --- phase one
    bool need_phase1 = false;
    for (std::size_t i = 0; i < m; ++i) need_phase1 = need_phase1 || art_col[i] != SIZE_MAX;
    if (need_phase1) {
        const auto status = tab.run(cost1, max_iter);
        tab.recompute_beta();
        if (status == LpStatus::iteration_limit) {
            result.status = status;
            result.iterations = tab.iterations();
            return result;
        }
        double infeas = 0.0;
        double scale = 1.0;
        for (std::size_t i = 0; i < m; ++i) {
            scale = std::max(scale, rows[i].rhs);
            if (cost1[tab.basis()[i]] == 1.0) infeas += std::max(tab.beta()[i], 0.0);
        }
        // round-off accumulates over the artificial rows
        if (infeas > options.feas_tol * scale * static_cast<double>(std::max<std::size_t>(m, 1))) {
            result.status = LpStatus::infeasible;
            result.iterations = tab.iterations();
            for (std::size_t i = 0; i < m; ++i)
                if (std::abs(std_dual(i, cost1)) > 1e-9) add_tag(result.conflict_tags, model.rows[rows[i].source].tag);
            return result;
        }
        for (std::size_t i = 0; i < m; ++i) {
            if (cost1[tab.basis()[i]] != 1.0) continue;
            std::size_t best = ncols;
            double mag = 1e-7;
            for (std::size_t j = 0; j < ncols; ++j) {
                if (cost1[j] == 1.0 || tab.state()[j] == State::basic) continue;
                if (std::abs(tab.at(i, j)) > mag) {
                    mag = std::abs(tab.at(i, j));
                    best = j;
                }
            }
            // the exchange treats the artificial as zero, so only pivot when
            // its leftover value stays negligible on the entering column
            if (best < ncols && std::abs(tab.beta()[i]) <= options.feas_tol * mag) tab.exchange(i, best);
        }
        for (std::size_t j = 0; j < ncols; ++j)
            if (cost1[j] == 1.0) tab.upper()[j] = 0.0;
        tab.refactor();
    }

    // --- phase two
    std::vector<double> cost2(ncols, 0.0);
    for (std::size_t k = 0; k < n; ++k) cost2[k] = sgn * model.objective[active[k]];
    const auto status = tab.run(cost2, max_iter);
    tab.recompute_beta();
    result.iterations = tab.iterations();
    if (status != LpStatus::optimal) {
        result.status = status;
        return result;
    }
    result.status = LpStatus::optimal;

    std::vector<double> value(ncols, 0.0);
    for (std::size_t j = 0; j < ncols; ++j)
        if (tab.state()[j] == State::upper) value[j] = tab.upper()[j];
    for (std::size_t i = 0; i < m; ++i) value[tab.basis()[i]] = tab.beta()[i];
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t j = active[k];
        result.x[j] = std::clamp(model.lower[j] + value[k], model.lower[j], model.upper[j]);
    }
    double obj = 0.0;
    for (std::size_t j = 0; j < n0; ++j) obj += model.objective[j] * result.x[j];
    result.objective = obj;

    for (std::size_t i = 0; i < model.rows.size(); ++i)
        result.primal_residual = std::max(
            result.primal_residual, row_violation(model.rows[i], row_activity(model.rows[i], result.x)));

    // --- dual certificate, checked against the original rows
    for (std::size_t i = 0; i < m; ++i) result.duals[rows[i].source] = std_dual(i, cost2) * rows[i].flip;
    // multipliers of the wrong sign are clipped, so dual_objective stays a
    // valid Lagrangian bound whatever the accuracy of the basis
    double dual_infeas = 0.0;
    for (std::size_t i = 0; i < model.rows.size(); ++i) {
        double& y = result.duals[i];
        if (model.rows[i].rel == Relation::le && y > 0.0) {
            dual_infeas = std::max(dual_infeas, y);
            y = 0.0;
        }
        if (model.rows[i].rel == Relation::ge && y < 0.0) {
            dual_infeas = std::max(dual_infeas, -y);
            y = 0.0;
        }
    }
    std::vector<double> reduced(n0);
    for (std::size_t j = 0; j < n0; ++j) reduced[j] = sgn * model.objective[j];
    for (std::size_t i = 0; i < model.rows.size(); ++i)
        for (const auto& t : model.rows[i].terms) reduced[t.col] -= result.duals[i] * t.coef;
    for (auto it = drop_order.rbegin(); it != drop_order.rend(); ++it) {
        double y = 0.0;
        for (const auto& t : model.rows[*it].terms) y = std::min(y, reduced[t.col] / t.coef);
        result.duals[*it] = y;
        for (const auto& t : model.rows[*it].terms) reduced[t.col] -= y * t.coef;
    }
    double dual_obj = 0.0;
    for (std::size_t i = 0; i < model.rows.size(); ++i) dual_obj += result.duals[i] * model.rows[i].rhs;
    for (std::size_t j = 0; j < n0; ++j) {
        const double r = reduced[j];
        if (r >= 0.0) {
            dual_obj += r * model.lower[j];
        } else if (std::isfinite(model.upper[j])) {
            dual_obj += r * model.upper[j];
        } else {
            dual_obj += r * model.lower[j];
            dual_infeas = std::max(dual_infeas, -r);
        }
    }
    result.dual_objective = sgn * dual_obj;
    result.dual_infeasibility = dual_infeas;
    return result;
}

}  // namespace poc
