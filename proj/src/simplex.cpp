#include "qsrnav/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qsrnav::lp {

void LinearProgram::addRow(std::vector<double> coeffs, double b) {
  if (static_cast<int>(coeffs.size()) != variableCount)
    throw std::invalid_argument("LinearProgram::addRow: wrong coefficient count");
  rows.push_back(std::move(coeffs));
  rhs.push_back(b);
}

double LinearProgram::maxViolation(std::span<const double> x) const {
  double worst = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double lhs = 0.0;
    for (int j = 0; j < variableCount; ++j) lhs += rows[i][j] * x[j];
    worst = std::max(worst, lhs - rhs[i]);
  }
  return worst;
}

std::string toString(LpStatus s) {
  switch (s) {
    case LpStatus::Feasible: return "feasible";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::NumericalFailure: return "numerical failure";
  }
  return "?";
}

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-10;

// Dense simplex tableau over the standard form
//   [A | -A | I | art] [p; q; s; a] = |b|,  all variables >= 0,
// where x = p - q recovers the free variables of the original program.
class Tableau {
 public:
  explicit Tableau(const LinearProgram& lp)
      : n_(lp.variableCount), m_(static_cast<int>(lp.rowCount())) {
    int artificials = 0;
    for (double b : lp.rhs) artificials += b < 0 ? 1 : 0;
    cols_ = 2 * n_ + m_ + artificials;
    width_ = cols_ + 1;
    t_.assign(static_cast<std::size_t>(m_ + 1) * width_, 0.0);
    basis_.resize(m_);
    banned_.assign(cols_, false);
    artStart_ = 2 * n_ + m_;

    int nextArt = artStart_;
    for (int i = 0; i < m_; ++i) {
      const double sign = lp.rhs[i] < 0 ? -1.0 : 1.0;
      for (int j = 0; j < n_; ++j) {
        at(i, j) = sign * lp.rows[i][j];
        at(i, n_ + j) = -sign * lp.rows[i][j];
      }
      at(i, 2 * n_ + i) = sign;
      rhs(i) = sign * lp.rhs[i];
      if (sign < 0) {
        at(i, nextArt) = 1.0;
        basis_[i] = nextArt++;
      } else {
        basis_[i] = 2 * n_ + i;
      }
    }
  }

  int pivots() const { return pivots_; }

  // Minimise the sum of artificials. Returns false on numerical breakdown.
  bool phase1(double& objective) {
    std::vector<double> cost(cols_, 0.0);
    for (int j = artStart_; j < cols_; ++j) cost[j] = 1.0;
    loadCost(cost);
    if (iterate() != Outcome::Optimal) return false;
    objective = -objRhs();
    return std::isfinite(objective);
  }

  // After a successful phase 1: push artificials out of the basis and ban them.
  void dropArtificials() {
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < artStart_) continue;
      for (int j = 0; j < artStart_; ++j) {
        if (std::fabs(at(i, j)) > 1e-9) {
          pivot(i, j);
          break;
        }
      }
    }
    for (int j = artStart_; j < cols_; ++j) banned_[j] = true;
  }

  enum class Outcome { Optimal, Unbounded, Breakdown };

  Outcome phase2(std::span<const double> objective) {
    std::vector<double> cost(cols_, 0.0);
    for (int j = 0; j < n_; ++j) {
      cost[j] = objective[j];
      cost[n_ + j] = -objective[j];
    }
    loadCost(cost);
    return iterate();
  }

  std::vector<double> point() const {
    std::vector<double> value(cols_, 0.0);
    for (int i = 0; i < m_; ++i) value[basis_[i]] = std::max(0.0, rhsC(i));
    std::vector<double> x(n_);
    for (int j = 0; j < n_; ++j) x[j] = value[j] - value[n_ + j];
    return x;
  }

 private:
  double& at(int i, int j) { return t_[static_cast<std::size_t>(i) * width_ + j]; }
  double atC(int i, int j) const { return t_[static_cast<std::size_t>(i) * width_ + j]; }
  double& rhs(int i) { return at(i, cols_); }
  double rhsC(int i) const { return atC(i, cols_); }
  double& obj(int j) { return at(m_, j); }
  double objRhs() const { return atC(m_, cols_); }

  void loadCost(const std::vector<double>& cost) {
    for (int j = 0; j <= cols_; ++j) obj(j) = j < cols_ ? cost[j] : 0.0;
    for (int i = 0; i < m_; ++i) {
      const double cb = cost[basis_[i]];
      if (cb == 0.0) continue;
      for (int j = 0; j <= cols_; ++j) obj(j) -= cb * at(i, j);
    }
  }

  void pivot(int r, int c) {
    const double inv = 1.0 / at(r, c);
    double* pr = &at(r, 0);
    for (int j = 0; j <= cols_; ++j) pr[j] *= inv;
    pr[c] = 1.0;
    for (int i = 0; i <= m_; ++i) {
      if (i == r) continue;
      double* pi = &at(i, 0);
      const double f = pi[c];
      if (f == 0.0) continue;
      for (int j = 0; j <= cols_; ++j) pi[j] -= f * pr[j];
      pi[c] = 0.0;
    }
    basis_[r] = c;
    ++pivots_;
  }

  Outcome iterate() {
    const int cap = 50 * (m_ + cols_) + 100;
    for (int it = 0; it < cap; ++it) {
      // Bland: lowest-index improving column
      int enter = -1;
      for (int j = 0; j < cols_; ++j) {
        if (banned_[j]) continue;
        if (obj(j) < -kCostTol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return Outcome::Optimal;

      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m_; ++i) {
        const double a = at(i, enter);
        if (a <= kPivotTol) continue;
        const double ratio = std::max(0.0, rhs(i)) / a;
        if (leave < 0) {
          best = ratio;
          leave = i;
          continue;
        }
        const double tie = 1e-12 * std::max(1.0, best);
        if (ratio < best - tie || (ratio <= best + tie && basis_[i] < basis_[leave])) {
          best = ratio;
          leave = i;
        }
      }
      if (leave < 0) return Outcome::Unbounded;
      pivot(leave, enter);
      if (!std::isfinite(objRhs())) return Outcome::Breakdown;
    }
    return Outcome::Breakdown;
  }

  int n_;
  int m_;
  int cols_ = 0;
  int width_ = 0;
  int artStart_ = 0;
  int pivots_ = 0;
  std::vector<double> t_;
  std::vector<int> basis_;
  std::vector<bool> banned_;
};

bool finiteProgram(const LinearProgram& lp) {
  for (const auto& r : lp.rows)
    for (double v : r)
      if (!std::isfinite(v)) return false;
  for (double v : lp.rhs)
    if (!std::isfinite(v)) return false;
  return true;
}

double feasibilityTolerance(const LinearProgram& lp) {
  double scale = 1.0;
  for (double b : lp.rhs) scale = std::max(scale, std::fabs(b));
  return 1e-9 * scale;
}

// Runs phase 1; on success leaves the tableau ready for phase 2.
LpResult runPhase1(Tableau& tab, const LinearProgram& lp) {
  LpResult res;
  double z = 0.0;
  if (!tab.phase1(z)) {
    res.status = LpStatus::NumericalFailure;
    return res;
  }
  res.phase1Objective = z;
  res.pivots = tab.pivots();
  if (z > feasibilityTolerance(lp)) {
    res.status = LpStatus::Infeasible;
    return res;
  }
  tab.dropArtificials();
  res.point = tab.point();
  res.status = lp.maxViolation(res.point) <= kRowTolerance ? LpStatus::Feasible
                                                            : LpStatus::NumericalFailure;
  return res;
}

LpResult finish(Tableau& tab, const LinearProgram& lp, Tableau::Outcome outcome) {
  LpResult res;
  res.pivots = tab.pivots();
  if (outcome == Tableau::Outcome::Unbounded) {
    res.status = LpStatus::Unbounded;
    return res;
  }
  if (outcome == Tableau::Outcome::Breakdown) {
    res.status = LpStatus::NumericalFailure;
    return res;
  }
  res.point = tab.point();
  res.status = lp.maxViolation(res.point) <= kRowTolerance ? LpStatus::Feasible
                                                            : LpStatus::NumericalFailure;
  return res;
}

}  // namespace

LpResult simplexFeasible(const LinearProgram& lp) {
  if (!finiteProgram(lp)) return {LpStatus::NumericalFailure, {}, 0.0, 0};
  if (lp.rowCount() == 0) return {LpStatus::Feasible, std::vector<double>(lp.variableCount, 0.0), 0.0, 0};
  Tableau tab(lp);
  return runPhase1(tab, lp);
}

LpResult simplexMinimize(const LinearProgram& lp, std::span<const double> objective) {
  return simplexMinimizeMany(lp, {std::vector<double>(objective.begin(), objective.end())}).front();
}

std::vector<LpResult> simplexMinimizeMany(const LinearProgram& lp,
                                          const std::vector<std::vector<double>>& objectives) {
  for (const auto& c : objectives)
    if (static_cast<int>(c.size()) != lp.variableCount)
      throw std::invalid_argument("simplexMinimize: objective size mismatch");
  if (!finiteProgram(lp))
    return std::vector<LpResult>(objectives.size(), {LpStatus::NumericalFailure, {}, 0.0, 0});

  Tableau base(lp);
  LpResult p1 = lp.rowCount() == 0
                    ? LpResult{LpStatus::Feasible, std::vector<double>(lp.variableCount, 0.0), 0.0, 0}
                    : runPhase1(base, lp);
  if (!p1.feasible()) return std::vector<LpResult>(objectives.size(), p1);

  std::vector<LpResult> out;
  out.reserve(objectives.size());
  for (const auto& c : objectives) {
    Tableau tab = base;
    auto outcome = tab.phase2(c);
    LpResult r = finish(tab, lp, outcome);
    r.phase1Objective = p1.phase1Objective;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace qsrnav::lp
