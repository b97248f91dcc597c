#pragma once

#include <span>
#include <string>
#include <vector>

namespace qsrnav::lp {

/// A system A x <= b over free (unbounded-sign) variables.
struct LinearProgram {
  int variableCount = 0;
  std::vector<std::vector<double>> rows;  // each of size variableCount
  std::vector<double> rhs;

  std::size_t rowCount() const { return rows.size(); }
  void addRow(std::vector<double> coeffs, double b);
  /// Largest violation max_i (a_i x - b_i), or 0 if every row holds.
  double maxViolation(std::span<const double> x) const;
};

enum class LpStatus { Feasible, Infeasible, Unbounded, NumericalFailure };

std::string toString(LpStatus s);

struct LpResult {
  LpStatus status = LpStatus::NumericalFailure;
  std::vector<double> point;       // valid when Feasible
  double phase1Objective = 0.0;    // sum of artificials at the phase-1 optimum
  int pivots = 0;

  bool feasible() const { return status == LpStatus::Feasible; }
};

/// Returned points satisfy every row to this absolute tolerance.
inline constexpr double kRowTolerance = 1e-9;

/// Phase 1 of the two-phase simplex method (Bland's rule). Returns a basic
/// feasible point, Infeasible when the phase-1 optimum is strictly positive,
/// or NumericalFailure when pivoting breaks down or a row check fails.
LpResult simplexFeasible(const LinearProgram& lp);

/// Full two-phase simplex: minimises objective . x subject to the program.
LpResult simplexMinimize(const LinearProgram& lp, std::span<const double> objective);

/// Solves phase 1 once and then runs phase 2 for each objective, reusing the
/// phase-1 basis. Each result is independent. If phase 1 fails, every entry
/// carries that status.
std::vector<LpResult> simplexMinimizeMany(const LinearProgram& lp,
                                          const std::vector<std::vector<double>>& objectives);

}  // namespace qsrnav::lp
