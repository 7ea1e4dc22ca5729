#include "kfunc/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "kfunc/random_fields.hpp"

namespace kfunc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(trim(item));
  return out;
}

const Config& defaults() {
  static const Config d = {
      {"run.seed", "0"},
      {"run.tol", "1e-9"},
      {"grid.n", "200"},
      {"grid.length", "1"},
      {"grid.periodic", "true"},
      {"constraint.name", "identity"},
      {"constraint.p", "2"},
      {"constraint.h", "sine:0.5,1,1"},
      {"constraint.K", "auto"},
      {"field.rho", "affine:1,0.5"},
      {"field.delta", "sine:1,1,0"},
      {"field.extend", "false"},
      {"functional.name", "square"},
      {"functional.v", "sine:1,1,0"},
      {"functional.b", "square"},
      {"functional.base", "cube"},
      {"deriv.weight", "f_of_rho"},
      {"deriv.split", "false"},
      {"gateaux.eps", "1e-3,5e-4"},
      {"gateaux.tol", "1e-6"},
      {"gateaux.project", "false"},
      {"flow.eta0", "0.1"},
      {"flow.shrink", "2"},
      {"flow.grow", "1.5"},
      {"flow.tol", "1e-8"},
      {"flow.max_iters", "10000"},
      {"flow.eta_min", "1e-14"},
      {"flow.extend_initial", "false"},
      {"flow.plot", ""},
      {"verify.draws", "5"},
  };
  return d;
}

class Reader {
 public:
  explicit Reader(const Config& cfg) : cfg_(defaults()) { merge_config(cfg_, cfg); }

  const std::string& str(const std::string& key) const { return cfg_.at(key); }

  double num(const std::string& key) const { return parse_double(key, str(key)); }

  double positive(const std::string& key) const {
    const double v = num(key);
    if (!(v > 0)) throw ConfigError(key + " must be positive, got " + str(key));
    return v;
  }

  long long integer(const std::string& key, long long min) const {
    const std::string& s = str(key);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
      throw ConfigError(key + ": expected an integer, got '" + s + "'");
    if (v < min) throw ConfigError(key + " must be >= " + std::to_string(min) + ", got " + s);
    return v;
  }

  bool flag(const std::string& key) const {
    std::string s = str(key);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError(key + ": expected true or false, got '" + str(key) + "'");
  }

  static double parse_double(const std::string& key, const std::string& s) {
    double v = 0;
    std::size_t used = 0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size() || !std::isfinite(v))
      throw ConfigError(key + ": expected a finite number, got '" + s + "'");
    return v;
  }

 private:
  Config cfg_;
};

std::vector<double> numbers(const std::string& key, const std::string& list, std::size_t count) {
  const auto parts = split(list, ',');
  if (parts.size() != count)
    throw ConfigError(key + ": expected " + std::to_string(count) + " comma-separated numbers, got '" +
                      list + "'");
  std::vector<double> out;
  for (const auto& p : parts) out.push_back(Reader::parse_double(key, p));
  return out;
}

/// Profile recipes: constant:c, affine:a,b (a x + b), sine:a,k,b
/// (a sin(2 pi k x / X) + b), random, random_signed.
Field<double> profile(const std::string& key, const std::string& recipe, const GridPtr<double>& grid,
                      std::uint64_t seed) {
  const auto colon = recipe.find(':');
  const std::string kind = trim(recipe.substr(0, colon));
  const std::string args = colon == std::string::npos ? "" : recipe.substr(colon + 1);
  const double X = grid->length();
  if (kind == "constant") {
    const double c = numbers(key, args, 1)[0];
    return Field<double>::constant(grid, c);
  }
  if (kind == "affine") {
    const auto v = numbers(key, args, 2);
    return Field<double>::sample(grid, [&](double x) { return v[0] * x + v[1]; });
  }
  if (kind == "sine") {
    const auto v = numbers(key, args, 3);
    return Field<double>::sample(
        grid, [&](double x) { return v[0] * std::sin(2 * std::numbers::pi * v[1] * x / X) + v[2]; });
  }
  if (kind == "random" || kind == "random_signed") {
    if (!args.empty()) throw ConfigError(key + ": '" + kind + "' takes no parameters");
    FieldSampler s(seed);
    return kind == "random" ? s.positive_profile<double>(grid) : s.signed_profile<double>(grid);
  }
  throw ConfigError(key + ": unknown profile '" + recipe +
                    "' (constant:c | affine:a,b | sine:a,k,b | random | random_signed)");
}

/// Sub-seeds so that rho, delta and the weight field draw independent profiles.
std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t salt) {
  return seed * 0x9E3779B97F4A7C15ULL + salt;
}

ConstraintSpec<double> make_constraint(const Reader& r, const GridPtr<double>& grid,
                                       std::uint64_t seed) {
  const std::string& name = r.str("constraint.name");
  if (name == "identity") return ConstraintSpec<double>::identity();
  if (name == "power") return ConstraintSpec<double>::power(r.positive("constraint.p"));
  if (name == "exp") return ConstraintSpec<double>::exponential();
  if (name == "even_square") return even_square_constraint();
  if (name == "linear") {
    const Field<double> h = profile("constraint.h", r.str("constraint.h"), grid, sub_seed(seed, 3));
    for (Eigen::Index i = 0; i < h.size(); ++i)
      if (!(h[i] > 0))
        throw ConfigError("constraint.h must be positive at every node; node " + std::to_string(i) +
                          " has " + std::to_string(h[i]));
    // h is only ever evaluated at grid nodes.
    auto nodes = grid->nodes();
    return ConstraintSpec<double>::weighted_linear(
        [h, nodes](double x) {
          const auto it = std::lower_bound(nodes.data(), nodes.data() + nodes.size(), x);
          return h[it - nodes.data()];
        },
        "linear:" + r.str("constraint.h"));
  }
  throw ConfigError("constraint.name: unknown constraint '" + name +
                    "' (identity | power | exp | linear | even_square)");
}

Functional<double> make_functional(const Reader& r, const std::string& name,
                                   const ConstraintSpec<double>& c, const KTarget<double>& K,
                                   const GridPtr<double>& grid, bool nested) {
  if (name == "square") return square_integral<double>();
  if (name == "cube") return cube_integral<double>();
  if (name == "entropy") return entropy_integral<double>();
  if (name == "gradient_square") return gradient_square<double>();
  if (name == "gradsq_square") return sum(gradient_square<double>(), square_integral<double>());
  if (name == "ratio_n") return ratio_n<double>();
  if (name == "ratio_k") return ratio_k<double>();
  if (name == "linear") {
    const Field<double> v = profile("functional.v", r.str("functional.v"), grid, 0);
    auto nodes = grid->nodes();
    return linear_integral<double>(
        [v, nodes](double x) {
          const auto it = std::lower_bound(nodes.data(), nodes.data() + nodes.size(), x);
          return v[it - nodes.data()];
        },
        "linear:" + r.str("functional.v"));
  }
  if (name == "of_k") {
    const std::string& b = r.str("functional.b");
    if (b != "id" && b != "square" && b != "cube" && b != "sin")
      throw ConfigError("functional.b: unknown b(K) '" + b + "' (id | square | cube | sin)");
    return of_k_named<double>(b, c);
  }
  if (name == "ext" && !nested)
    return zero_hom_extension(make_functional(r, r.str("functional.base"), c, K, grid, true), c, K);
  throw ConfigError(std::string(nested ? "functional.base" : "functional.name") +
                    ": unknown functional '" + name +
                    "' (square | cube | linear | entropy | gradient_square | gradsq_square | "
                    "ratio_n | ratio_k | of_k | ext)");
}

WeightChoice<double> make_weight(const Reader& r, const GridPtr<double>& grid, std::uint64_t seed) {
  const std::string& w = r.str("deriv.weight");
  if (w == "f_of_rho") return WeightChoice<double>::f_of_rho();
  if (w.rfind("point:", 0) == 0) {
    const std::string idx = trim(w.substr(6));
    long long i = -1;
    const auto [ptr, ec] = std::from_chars(idx.data(), idx.data() + idx.size(), i);
    if (ec != std::errc() || ptr != idx.data() + idx.size() || i < 0 || i >= grid->size())
      throw ConfigError("deriv.weight: point index must be an integer in [0, " +
                        std::to_string(grid->size() - 1) + "], got '" + idx + "'");
    return WeightChoice<double>::point(static_cast<Eigen::Index>(i));
  }
  if (w.rfind("custom:", 0) == 0)
    return WeightChoice<double>::custom_q(profile("deriv.weight", w.substr(7), grid, sub_seed(seed, 4)));
  throw ConfigError("deriv.weight: expected f_of_rho | point:i | custom:<profile>, got '" + w + "'");
}

}  // namespace

Config parse_config(const std::string& text, const std::string& source) {
  Config cfg;
  std::istringstream is(text);
  std::string line;
  std::string section = "run";
  int lineno = 0;
  auto fail = [&](const std::string& what) {
    throw ConfigError(source + ":" + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    const std::string content = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (content.empty()) continue;
    if (content.front() == '[') {
      if (content.back() != ']') fail("unterminated section header '" + content + "'");
      section = trim(content.substr(1, content.size() - 2));
      if (section.empty() || section.find_first_of(" \t.=") != std::string::npos)
        fail("invalid section name '" + section + "'");
      continue;
    }
    const auto eq = content.find('=');
    if (eq == std::string::npos) fail("expected 'key = value', got '" + content + "'");
    const std::string key = trim(content.substr(0, eq));
    if (key.empty() || key.find_first_of(" \t") != std::string::npos)
      fail("invalid key '" + key + "'");
    cfg[section + "." + key] = trim(content.substr(eq + 1));
  }
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

void merge_config(Config& base, const Config& overrides) {
  for (const auto& [k, v] : overrides) base[k] = v;
}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [key, value] : defaults()) k.push_back(key);
    return k;
  }();
  return keys;
}

ConstraintSpec<double> even_square_constraint() {
  return {"even_square",
          [](double, double r) { return r * r; },
          [](double, double r) { return 2 * r; },
          [](double, double y) { return std::sqrt(y); },
          Interval<double>::all(),
          Interval<double>{0.0, std::numeric_limits<double>::infinity(), false, true},
          false,
          false};
}

Field<double> invertibility_probe(const GridPtr<double>& grid) {
  const double X = grid->length();
  return Field<double>::sample(grid, [X](double x) { return 6 * x / X - 3; });
}

Scenario build_scenario(const Config& cfg) {
  for (const auto& [key, value] : cfg)
    if (std::find(known_keys().begin(), known_keys().end(), key) == known_keys().end())
      throw ConfigError("unknown configuration key '" + key + "'");

  const Reader r(cfg);
  const auto n = static_cast<Eigen::Index>(r.integer("grid.n", 3));
  const double length = r.positive("grid.length");
  const GridPtr<double> grid =
      r.flag("grid.periodic") ? Grid<double>::periodic(n, length) : Grid<double>::bounded(n, length);

  Scenario s(grid);
  s.seed = static_cast<std::uint64_t>(r.integer("run.seed", 0));
  s.constraint_tol = r.positive("run.tol");
  s.constraint_name = r.str("constraint.name");
  s.constraint = make_constraint(r, grid, s.seed);

  s.rho = profile("field.rho", r.str("field.rho"), grid, sub_seed(s.seed, 1));
  s.delta = profile("field.delta", r.str("field.delta"), grid, sub_seed(s.seed, 2));

  const std::string& k = r.str("constraint.K");
  s.K = KTarget<double>(k == "auto" ? k_value(s.rho, s.constraint) : r.num("constraint.K"));
  if (r.flag("field.extend")) s.rho = extend(s.rho, s.constraint, s.K);

  s.functional_name = r.str("functional.name");
  s.functional = make_functional(r, s.functional_name, s.constraint, s.K, grid, false);
  s.weight = make_weight(r, grid, s.seed);
  s.split = r.flag("deriv.split");

  std::vector<double> eps;
  for (const auto& e : split(r.str("gateaux.eps"), ',')) eps.push_back(Reader::parse_double("gateaux.eps", e));
  if (eps.empty()) throw ConfigError("gateaux.eps: empty schedule");
  for (std::size_t i = 0; i < eps.size(); ++i)
    if (!(eps[i] > 0) || (i > 0 && !(eps[i] < eps[i - 1])))
      throw ConfigError("gateaux.eps: steps must be positive and strictly decreasing, got '" +
                        r.str("gateaux.eps") + "'");
  s.directional.eps_schedule = eps;
  s.directional.tol = r.positive("gateaux.tol");
  s.directional.constraint_tol = s.constraint_tol;
  s.project = r.flag("gateaux.project");

  s.flow.eta0 = r.positive("flow.eta0");
  s.flow.shrink = r.num("flow.shrink");
  if (!(s.flow.shrink > 1)) throw ConfigError("flow.shrink must exceed 1, got " + r.str("flow.shrink"));
  s.flow.grow = r.num("flow.grow");
  if (!(s.flow.grow >= 1)) throw ConfigError("flow.grow must be at least 1, got " + r.str("flow.grow"));
  s.flow.tol = r.positive("flow.tol");
  s.flow.max_iters = static_cast<std::size_t>(r.integer("flow.max_iters", 0));
  s.flow.eta_min = r.positive("flow.eta_min");
  s.flow.extend_initial = r.flag("flow.extend_initial");
  s.flow.constraint_tol = s.constraint_tol;
  s.plot_path = r.str("flow.plot");
  s.verify_draws = static_cast<int>(r.integer("verify.draws", 1));
  return s;
}

}  // namespace kfunc
