// kfunc: batch front end for K-conserving functional differentiation.
//
//   kfunc [--config PATH] [--out PATH] [--seed N] [--grid-n N] [--tol X]
//         [--section.key=value ...] verify|deriv|gateaux|flow [options]
//
// Exit codes: 0 success, 1 identity or assertion failure, 2 usage or
// configuration error.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "kfunc/kfunc.hpp"
#include "kfunc/scenario.hpp"
#include "kfunc/verify_suite.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

std::string real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

/// Writes to --out when given, otherwise to stdout.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty()) return;
    file_.open(path, std::ios::binary);
    if (!file_) throw kfunc::ConfigError("cannot open output file '" + path + "'");
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }
  bool to_file() const { return file_.is_open(); }

 private:
  std::ofstream file_;
};

/// Pulls "--section.key=value" and "--section.key value" overrides out of argv.
kfunc::Config take_overrides(std::vector<std::string>& args) {
  kfunc::Config out;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) != 0) {
      rest.push_back(a);
      continue;
    }
    const std::string body = a.substr(2);
    const auto eq = body.find('=');
    const std::string key = body.substr(0, eq);
    if (key.find('.') == std::string::npos) {
      rest.push_back(a);
      continue;
    }
    if (eq != std::string::npos) {
      out[key] = body.substr(eq + 1);
    } else {
      if (i + 1 >= args.size()) throw kfunc::ConfigError("option --" + key + " needs a value");
      out[key] = args[++i];
    }
  }
  args = std::move(rest);
  return out;
}

int cmd_verify(const kfunc::Scenario& s, Output& out) {
  using namespace kfunc::suite;
  Context ctx;
  ctx.seed = s.seed;
  ctx.grid = s.grid;
  ctx.draws = s.verify_draws;
  Report report = run_cases(identity_cases(), ctx);

  // The scenario's own constraint must be invertible on the probe range.
  Row inv{"scenario-constraint-invertibility",
          "f^-1(f(rho)) = rho and one-signed f' for constraint " + s.constraint.name,
          Metric::Relative, 0.0, 1e-10, false, {}};
  try {
    double worst = 0;
    bool monotone = true;
    for (const auto& probe : {kfunc::invertibility_probe(s.grid), s.rho}) {
      const auto rep = kfunc::check_invertibility(s.constraint, probe);
      worst = std::max(worst, rep.max_roundtrip_error);
      monotone = monotone && rep.monotone;
    }
    inv.residual = monotone ? worst : std::numeric_limits<double>::infinity();
    if (!monotone) inv.error = "f' changes sign or vanishes";
    inv.passed = monotone && worst <= inv.tolerance;
  } catch (const std::exception& e) {
    inv.residual = std::numeric_limits<double>::infinity();
    inv.error = e.what();
  }
  report.rows.push_back(inv);

  std::size_t width = 2;
  for (const auto& r : report.rows) width = std::max(width, r.id.size());
  std::size_t passed = 0;
  std::ostream& table = std::cout;
  for (const auto& r : report.rows) {
    passed += r.passed;
    std::ostringstream line;
    line << (r.passed ? "PASS  " : "FAIL  ") << r.id << std::string(width + 2 - r.id.size(), ' ')
         << std::string(to_string(r.metric)) << "  residual " << sci(r.residual) << "  tol "
         << sci(r.tolerance);
    if (!r.error.empty()) line << "  (" << r.error << ")";
    table << line.str() << '\n';
  }
  table << passed << "/" << report.rows.size() << " identities passed\n";

  std::ostream& csv = out.stream();
  if (out.to_file()) {
    csv << "id,metric,residual,tolerance,passed\n";
    for (const auto& r : report.rows)
      csv << r.id << ',' << to_string(r.metric) << ',' << real(r.residual) << ','
          << real(r.tolerance) << ',' << (r.passed ? 1 : 0) << '\n';
  }
  return passed == report.rows.size() ? kExitOk : kExitFailure;
}

int cmd_deriv(const kfunc::Scenario& s, Output& out) {
  using namespace kfunc;
  const Field<double> g = gradient(s.functional, s.rho);
  const Field<double> d = s.weight.is_f_of_rho()
                              ? k_derivative(g, s.rho, s.constraint, s.K, s.constraint_tol)
                              : (require_on_constraint(s.rho, s.constraint, s.K, s.constraint_tol),
                                 u_derivative(g, s.rho, s.constraint, s.weight));
  std::optional<ShapeSplit<double>> split;
  if (s.split)
    split = s.constraint.linear
                ? l_split(g, s.rho, f_prime_values(s.rho, s.constraint), s.K, s.constraint_tol)
                : shape_split(g, s.rho);

  std::ostream& csv = out.stream();
  csv << "x,rho,grad,k_deriv" << (split ? ",n_part,shape_part" : "") << '\n';
  const auto& x = s.grid->nodes();
  for (Eigen::Index i = 0; i < s.rho.size(); ++i) {
    csv << real(x[i]) << ',' << real(s.rho[i]) << ',' << real(g[i]) << ',' << real(d[i]);
    if (split) csv << ',' << real(split->n_part[i]) << ',' << real(split->shape_part);
    csv << '\n';
  }
  return kExitOk;
}

int cmd_gateaux(const kfunc::Scenario& s, Output& out) {
  using namespace kfunc;
  DirectionalOptions<double> opts = s.directional;
  opts.require_convergence = false;
  const auto check = gateaux_check(s.functional, s.rho, s.delta, s.constraint, s.K, s.project, opts);
  const auto& p = check.probe;

  std::ostream& csv = out.stream();
  csv << "quantity,eps,value\n";
  for (std::size_t k = 0; k < p.eps_schedule.size(); ++k)
    csv << "estimate," << real(p.eps_schedule[k]) << ',' << real(p.estimates[k]) << '\n';
  for (std::size_t k = 0; k < p.eps_schedule.size(); ++k)
    csv << "path_speed," << real(p.eps_schedule[k]) << ',' << real(p.path_speed[k]) << '\n';
  csv << "extrapolated,," << real(p.value) << '\n';
  csv << "predicted,," << real(check.predicted) << '\n';
  csv << "residual,," << real(check.residual) << '\n';
  csv << "converged,," << (p.converged ? 1 : 0) << '\n';

  std::cerr << "deformed derivative " << real(p.value) << ", inner(k_derivative, delta) "
            << real(check.predicted) << ", residual " << sci(check.residual) << '\n';
  if (!p.converged) {
    std::cerr << "error: NotConverged: eps schedule estimates disagree beyond tolerance "
              << sci(opts.tol) << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

/// Polyline of (x, y) pairs mapped into the box [x0, x0+w] x [y0, y0+h].
std::string polyline(const std::vector<double>& xs, const std::vector<double>& ys, double x0,
                     double y0, double w, double h, const char* colour) {
  const auto [xmin, xmax] = std::minmax_element(xs.begin(), xs.end());
  const auto [ymin, ymax] = std::minmax_element(ys.begin(), ys.end());
  const double xr = *xmax > *xmin ? *xmax - *xmin : 1.0;
  const double yr = *ymax > *ymin ? *ymax - *ymin : 1.0;
  std::ostringstream os;
  os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f,%.2f ", x0 + w * (xs[i] - *xmin) / xr,
                  y0 + h - h * (ys[i] - *ymin) / yr);
    os << buf;
  }
  os << "\"/>\n";
  os << "<text x=\"" << x0 - 6 << "\" y=\"" << y0 + 4 << "\" font-size=\"10\" text-anchor=\"end\">"
     << sci(*ymax) << "</text>\n";
  os << "<text x=\"" << x0 - 6 << "\" y=\"" << y0 + h << "\" font-size=\"10\" text-anchor=\"end\">"
     << sci(*ymin) << "</text>\n";
  return os.str();
}

void write_plot(const std::string& path, const kfunc::FlowTrace<double>& trace) {
  std::vector<double> it, energy, logres;
  for (const auto& r : trace.records) {
    it.push_back(static_cast<double>(r.iteration));
    energy.push_back(r.energy);
    logres.push_back(std::log10(std::max(r.residual, 1e-300)));
  }
  const auto& f = trace.final_field;
  const auto& nodes = f.grid().nodes();
  std::vector<double> xs(nodes.data(), nodes.data() + nodes.size());
  std::vector<double> ys(f.values().data(), f.values().data() + f.size());

  std::ofstream svg(path, std::ios::binary);
  if (!svg) throw kfunc::ConfigError("cannot open plot file '" + path + "'");
  const double w = 480, h = 160, left = 90;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"660\" "
         "font-family=\"sans-serif\">\n<rect width=\"600\" height=\"660\" fill=\"white\"/>\n";
  const char* titles[3] = {"energy vs iteration", "log10 residual vs iteration", "final rho vs x"};
  const char* xlabels[3] = {"iteration", "iteration", "x"};
  for (int panel = 0; panel < 3; ++panel) {
    const double top = 30 + panel * 215;
    svg << "<text x=\"" << left << "\" y=\"" << top - 10 << "\" font-size=\"13\">" << titles[panel]
        << "</text>\n";
    svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << w << "\" height=\"" << h
        << "\" fill=\"none\" stroke=\"#888\"/>\n";
    svg << "<text x=\"" << left + w / 2 << "\" y=\"" << top + h + 16
        << "\" font-size=\"11\" text-anchor=\"middle\">" << xlabels[panel] << "</text>\n";
  }
  svg << polyline(it, energy, left, 30, w, h, "#1f77b4");
  svg << polyline(it, logres, left, 245, w, h, "#d62728");
  svg << polyline(xs, ys, left, 460, w, h, "#2ca02c");
  svg << "</svg>\n";
}

int cmd_flow(const kfunc::Scenario& s, Output& out) {
  using namespace kfunc;
  const auto trace = minimize(s.functional, s.rho, s.constraint, s.K, s.flow);
  std::ostream& csv = out.stream();
  csv << "iter,energy,K,residual,eta\n";
  for (const auto& r : trace.records)
    csv << r.iteration << ',' << real(r.energy) << ',' << real(r.k_value) << ','
        << real(r.residual) << ',' << real(r.eta) << '\n';
  if (!s.plot_path.empty()) write_plot(s.plot_path, trace);

  std::cerr << "status " << to_string(trace.status) << ", iterations "
            << trace.records.back().iteration << ", energy " << real(trace.records.back().energy)
            << ", residual " << sci(trace.records.back().residual) << ", multiplier "
            << real(trace.final_multiplier) << '\n';
  return trace.status == FlowStatus::Converged ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  kfunc::Config overrides;
  try {
    overrides = take_overrides(args);
  } catch (const kfunc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  }

  CLI::App app{"K-conserving functional differentiation on 1-D grids"};
  app.require_subcommand(1, 1);
  std::string config_path, out_path;
  std::optional<std::uint64_t> seed;
  std::optional<long long> grid_n;
  std::optional<double> tol;
  app.add_option("--config", config_path, "Scenario file ([section] and key = value lines)");
  app.add_option("--out", out_path, "CSV output path (stdout when omitted)");
  app.add_option("--seed", seed, "Random seed");
  app.add_option("--grid-n", grid_n, "Number of grid nodes");
  app.add_option("--tol", tol, "Constraint-membership tolerance");
  app.footer("Any configuration key can also be given as --section.key=value.");

  auto* verify = app.add_subcommand("verify", "Run the identity suite");
  auto* deriv = app.add_subcommand("deriv", "Write gradient and K-conserving derivative as CSV");
  auto* gateaux = app.add_subcommand("gateaux", "Deformed directional derivative along delta");
  auto* flow = app.add_subcommand("flow", "Constrained gradient descent; writes the trace");

  bool split = false, project = false;
  std::string weight, plot;
  deriv->add_flag("--split", split, "Add n_part and shape_part columns");
  deriv->add_option("--weight", weight, "f_of_rho | point:i | custom:<profile>");
  gateaux->add_flag("--project", project, "Project delta onto conserving changes first");
  flow->add_option("--plot", plot, "Write an SVG plot of the trace");

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    kfunc::Config cfg;
    if (!config_path.empty()) cfg = kfunc::load_config(config_path);
    if (seed) cfg["run.seed"] = std::to_string(*seed);
    if (grid_n) cfg["grid.n"] = std::to_string(*grid_n);
    if (tol) cfg["run.tol"] = real(*tol);
    if (split) cfg["deriv.split"] = "true";
    if (!weight.empty()) cfg["deriv.weight"] = weight;
    if (project) cfg["gateaux.project"] = "true";
    if (!plot.empty()) cfg["flow.plot"] = plot;
    kfunc::merge_config(cfg, overrides);

    const kfunc::Scenario scenario = kfunc::build_scenario(cfg);
    Output out(out_path);
    if (verify->parsed()) return cmd_verify(scenario, out);
    if (deriv->parsed()) return cmd_deriv(scenario, out);
    if (gateaux->parsed()) return cmd_gateaux(scenario, out);
    return cmd_flow(scenario, out);
  } catch (const kfunc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const kfunc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}
