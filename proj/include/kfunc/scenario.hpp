#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kfunc/kfunc.hpp"

namespace kfunc {

/// Malformed or out-of-range configuration. Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat configuration: keys are "section.key", values are raw strings.
using Config = std::map<std::string, std::string>;

/// Parses `[section]` headers, `key = value` lines and `#`/`;` comments.
/// Keys before the first header go to section "run".
Config parse_config(const std::string& text, const std::string& source = "<config>");
Config load_config(const std::string& path);

/// Later entries win.
void merge_config(Config& base, const Config& overrides);

/// Every key the scenario builder understands, in "section.key" form.
const std::vector<std::string>& known_keys();

struct Scenario {
  explicit Scenario(GridPtr<double> g)
      : grid(g), rho(Field<double>::zero(g)), delta(Field<double>::zero(g)) {}

  std::uint64_t seed = 0;
  double constraint_tol = kConstraintTol;
  GridPtr<double> grid;
  std::string constraint_name;
  ConstraintSpec<double> constraint;
  Field<double> rho;
  Field<double> delta;
  KTarget<double> K{1.0};
  std::string functional_name;
  Functional<double> functional;
  WeightChoice<double> weight = WeightChoice<double>::f_of_rho();
  bool split = false;
  DirectionalOptions<double> directional;
  bool project = false;
  FlowOptions<double> flow;
  std::string plot_path;
  int verify_draws = 5;
};

/// Builds a scenario from defaults overlaid with `cfg`. Unknown keys and
/// unparsable values raise ConfigError; precondition failures of the
/// library (for example K = 0) propagate as kfunc::Error.
Scenario build_scenario(const Config& cfg);

/// f = rho^2 on the whole line with f^-1 = sqrt: not invertible for
/// rho < 0. Used to exercise the invertibility check.
ConstraintSpec<double> even_square_constraint();

/// Values spread over [-3, 3] on the grid, for invertibility probes.
Field<double> invertibility_probe(const GridPtr<double>& grid);

}  // namespace kfunc
