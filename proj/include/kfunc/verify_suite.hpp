#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kfunc/constraint.hpp"
#include "kfunc/grid.hpp"

namespace kfunc::suite {

enum class Metric { MaxNorm, Absolute, Relative };

std::string_view to_string(Metric m);

/// Inputs shared by every case of one run.
struct Context {
  std::uint64_t seed = 0;
  GridPtr<double> grid;
  /// Random draws per (functional, constraint) combination.
  int draws = 5;
};

/// One identity, evaluated over its own cross-product of generated inputs.
/// `worst_residual` returns the largest residual it saw.
struct IdentityCase {
  std::string id;
  std::string description;
  double tolerance;
  Metric metric;
  std::function<double(const Context&, std::uint64_t case_seed)> worst_residual;
};

struct Row {
  std::string id;
  std::string description;
  Metric metric;
  double residual;
  double tolerance;
  bool passed;
  /// Non-empty when the case threw instead of producing a residual.
  std::string error;
};

struct Report {
  std::vector<Row> rows;
  bool all_passed() const;
};

/// Constraints exercised by the suite: identity, power 2 and 1/2,
/// exponential, and weighted-linear with h = 1 + sin(2 pi x / X) / 2.
std::vector<ConstraintSpec<double>> builtin_constraints(const GridPtr<double>& grid);

/// Ids that must each be covered by at least one case.
const std::vector<std::string>& required_identity_ids();

std::vector<IdentityCase> identity_cases();

Report run_cases(const std::vector<IdentityCase>& cases, const Context& ctx);

/// Runs every identity case on a periodic grid of n nodes over [0, 1).
Report run_all(std::uint64_t seed, Eigen::Index n = 200);

}  // namespace kfunc::suite
