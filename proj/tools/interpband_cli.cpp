// Command-line front end:
//   interp-error  interpolation error of a reference function
//   band          sup-t interpolated bands on a data CSV
//   mc            Monte Carlo coverage tables
//   bound         interpolation error bounds and minimal grid sizes
//   simulate      draw a difference-in-differences sample to CSV
//
// Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "interpband/bands.hpp"
#include "interpband/bootstrap.hpp"
#include "interpband/error.hpp"
#include "interpband/estimators.hpp"
#include "interpband/grid.hpp"
#include "interpband/interp.hpp"
#include "interpband/mc.hpp"
#include "interpband/numerics.hpp"

namespace ib = interpband;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

// Designs whose replications x draws x cells exceed this need --long.
constexpr double kLongRunBudget = 5e6;

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ib::ConfigError("cannot open '" + path + "' for writing");
  return os;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  auto os = open_out(path);
  os << text;
}

// ---------------------------------------------------------------- interp-error

struct InterpErrorOptions {
  std::string function = "cos5-sqrt";
  std::vector<std::size_t> nodes = {4, 8, 10};
  std::size_t probe = 1000001;
  std::string out;
  std::string curve_prefix;
  std::size_t curve_points = 1001;
};

int run_interp_error(const InterpErrorOptions& opt) {
  if (opt.function != "cos5-sqrt") throw ib::ConfigError("unknown function id '" + opt.function + "' (available: cos5-sqrt)");
  auto f = [](std::span<const double> x) { return std::cos(5.0 * x[0]) + std::sqrt(x[0]); };
  const ib::Box region({0.0}, {5.0});
  const ib::ProbeGrid probe(region, opt.probe);
  std::ostringstream os;
  os << "L,a.x,m.x\n";
  for (std::size_t L : opt.nodes) {
    if (L < 2) throw ib::ConfigError("--L values must be >= 2");
    const ib::GridField field = ib::GridField::sample(ib::TensorGrid(region, L), f);
    os << L << ',' << std::fixed << std::setprecision(6) << ib::integrated_abs_error(field, f, probe) << ','
       << ib::sup_abs_error(field, f, probe) << '\n';
    if (!opt.curve_prefix.empty()) {
      auto curve = open_out(opt.curve_prefix + "_L" + std::to_string(L) + ".csv");
      curve << "x,F,F_L,abs_error\n";
      ib::ProbeGrid(region, opt.curve_points).for_each([&](std::span<const double> x, std::span<const std::size_t>) {
        const double fl = ib::eval(field, x);
        curve << ib::detail::format_double(x[0]) << ',' << ib::detail::format_double(f(x)) << ','
              << ib::detail::format_double(fl) << ',' << ib::detail::format_double(std::abs(fl - f(x))) << '\n';
      });
    }
  }
  write_text(opt.out, os.str());
  return 0;
}

// ------------------------------------------------------------------------ band

struct BandOptions {
  std::string data;
  std::string target = "dtt";
  std::optional<std::size_t> nodes;
  std::optional<double> a, b;
  std::vector<double> lo, hi;
  double tau_lb = 0.05, tau_ub = 0.95;
  std::size_t draws = 499;
  std::vector<double> alphas = {0.10, 0.05, 0.01};
  std::optional<std::uint64_t> seed;
  std::optional<double> r_n;
  std::string out;
  std::size_t out_points = 0;
  bool dump_draws = false;
  std::size_t threads = 1;
};

int run_band(const BandOptions& opt) {
  const ib::TargetKind target = ib::parse_target(opt.target);
  if (opt.nodes.has_value() == (opt.a.has_value() || opt.b.has_value())) {
    throw ib::ConfigError("give either --L or both --a and --b");
  }
  if (!opt.nodes && !(opt.a && opt.b)) throw ib::ConfigError("--a and --b must be given together");
  for (double a : opt.alphas) {
    if (!(a > 0.0 && a < 1.0)) throw ib::ConfigError("--alpha values must lie in (0,1)");
  }
  if (opt.draws < 4) throw ib::ConfigError("--B must be >= 4");

  std::ifstream is(opt.data, std::ios::binary);
  if (!is) throw ib::DataError("cannot open data file '" + opt.data + "'");
  const ib::DidSample sample = ib::read_did_csv(is);
  const std::size_t d = sample.dim();

  ib::Box region;
  if (!opt.lo.empty() || !opt.hi.empty()) {
    if (opt.lo.size() != d || opt.hi.size() != d) throw ib::ConfigError("--lo/--hi need one value per outcome axis");
    region = ib::Box(opt.lo, opt.hi);
  } else {
    if (!(opt.tau_lb > 0.0 && opt.tau_lb < opt.tau_ub && opt.tau_ub < 1.0)) {
      throw ib::ConfigError("need 0 < --tau-lb < --tau-ub < 1");
    }
    std::vector<double> lo(d), hi(d);
    for (std::size_t k = 0; k < d; ++k) {
      const auto y = sample.axis_values(k);
      lo[k] = ib::empirical_quantile(y, opt.tau_lb);
      hi[k] = ib::empirical_quantile(y, opt.tau_ub);
    }
    try {
      region = ib::Box(lo, hi);
    } catch (const ib::Error&) {
      throw ib::DataError("data-driven region is degenerate; pass --lo/--hi");
    }
  }
  const std::size_t L = opt.nodes ? *opt.nodes : ib::grid_rule(*opt.a, *opt.b, region.width(0), sample.size());
  if (L < 2) throw ib::ConfigError("--L must be >= 2");
  const ib::TensorGrid grid(region, L);
  const double r_n = opt.r_n ? *opt.r_n : static_cast<double>(sample.size());
  if (!(r_n > 0.0)) throw ib::ConfigError("--r-n must be positive");

  const ib::BootstrapConfig cfg{opt.draws, ib::WeightScheme::kMultinomial, *opt.seed};
  const ib::BootstrapDraws draws = ib::bootstrap_fields(sample, target, grid, cfg, r_n, opt.threads);
  const ib::ScaleEstimate scale = ib::sigma_hat(draws);
  const std::vector<double> stats = ib::sup_t_stats(draws, scale.sigma);

  const std::size_t points = opt.out_points > 0 ? opt.out_points : (d == 1 ? 201 : 51);
  const ib::ProbeGrid out_grid(region, points);
  const std::filesystem::path prefix(opt.out);
  const std::string stem = prefix.filename().string();

  ordered_json meta;
  meta["target"] = ib::to_string(target);
  meta["n"] = sample.size();
  meta["d"] = d;
  meta["L"] = L;
  meta["lo"] = region.lo;
  meta["hi"] = region.hi;
  meta["r_n"] = r_n;
  meta["seed"] = *opt.seed;
  meta["B"] = opt.draws;
  meta["sigma_floor"] = scale.floor;
  meta["sigma_floored_nodes"] = scale.floored_nodes;
  meta["bands"] = ordered_json::array();
  for (double a : opt.alphas) {
    const ib::UniformBand band = ib::band_from_draws(draws, scale, stats, a);
    const std::string file = stem + ".alpha" + ib::detail::format_double(a) + ".csv";
    auto os = open_out(opt.out + ".alpha" + ib::detail::format_double(a) + ".csv");
    ib::write_band_csv(os, band, out_grid);
    ordered_json entry;
    entry["alpha"] = a;
    entry["t"] = band.t;
    entry["rejects_zero"] = ib::rejects_zero(band);
    entry["file"] = file;
    meta["bands"].push_back(entry);
  }
  if (opt.dump_draws) {
    auto os = open_out(opt.out + ".draws.csv");
    ib::write_draws_csv(os, draws);
    meta["draws_file"] = stem + ".draws.csv";
  }
  auto os = open_out(opt.out + ".json");
  os << meta.dump(2) << '\n';
  return 0;
}

// -------------------------------------------------------------------------- mc

struct McOptions {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replications;
  std::optional<std::size_t> draws;
  std::string format = "csv";
  std::string out;
  std::string audit;
  bool long_run = false;
  std::size_t threads = 1;
};

struct McPlan {
  ib::McDesign base;
  std::vector<std::size_t> n;
  std::vector<double> a;
  std::vector<double> b;
  bool full_scale = false;
};

McPlan preset_plan(const std::string& name) {
  McPlan plan;
  if (name == "uni-desk") {
    plan.base.dim = 1;
    plan.n = {250, 500};
    plan.a = {1.0};
    plan.b = {0.3};
    plan.base.replications = 200;
    plan.base.draws = 199;
  } else if (name == "biv-desk") {
    plan.base.dim = 2;
    plan.n = {250};
    plan.a = {1.0};
    plan.b = {0.3};
    plan.base.replications = 100;
    plan.base.draws = 199;
  } else if (name == "uni-full" || name == "biv-full") {
    plan.base.dim = name == "uni-full" ? 1 : 2;
    plan.n = {250, 500, 1000, 1500};
    plan.a = {1.0, 2.0, 4.0};
    plan.b = {0.30, 0.35, 0.40};
    plan.base.replications = 1000;
    plan.base.draws = 499;
    plan.full_scale = true;
  } else {
    throw ib::ConfigError("unknown preset '" + name + "' (uni-desk, biv-desk, uni-full, biv-full)");
  }
  return plan;
}

template <class T>
std::vector<T> scalar_or_list(const nlohmann::json& j, const std::string& path) {
  try {
    if (j.is_array()) return j.get<std::vector<T>>();
    return {j.get<T>()};
  } catch (const nlohmann::json::exception&) {
    throw ib::ConfigError(path + ": expected a number or a list of numbers");
  }
}

template <class T>
T field(const nlohmann::json& j, const std::string& key, const std::string& path, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ib::ConfigError(path + "." + key + ": wrong type");
  }
}

McPlan config_plan(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ib::ConfigError("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw ib::ConfigError("design: invalid JSON: " + std::string(e.what()));
  }
  if (!j.is_object()) throw ib::ConfigError("design: top level must be an object");
  static const std::vector<std::string> known = {"d", "n", "a", "b", "R", "B", "alphas", "dgp", "tau_lb", "tau_ub",
                                                 "probe_per_cell"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) throw ib::ConfigError("design." + key + ": unknown field");
  }
  McPlan plan;
  ib::McDesign& d = plan.base;
  d.dim = field<std::size_t>(j, "d", "design", 1);
  for (const char* key : {"n", "a", "b"}) {
    if (!j.contains(key)) throw ib::ConfigError(std::string("design.") + key + ": required");
  }
  for (double v : scalar_or_list<double>(j["n"], "design.n")) {
    if (!(v >= 4 && v == std::floor(v))) throw ib::ConfigError("design.n: entries must be integers >= 4");
    plan.n.push_back(static_cast<std::size_t>(v));
  }
  plan.a = scalar_or_list<double>(j["a"], "design.a");
  plan.b = scalar_or_list<double>(j["b"], "design.b");
  d.replications = field<std::size_t>(j, "R", "design", d.replications);
  d.draws = field<std::size_t>(j, "B", "design", d.draws);
  if (j.contains("alphas")) d.alphas = scalar_or_list<double>(j["alphas"], "design.alphas");
  d.tau_lb = field<double>(j, "tau_lb", "design", d.tau_lb);
  d.tau_ub = field<double>(j, "tau_ub", "design", d.tau_ub);
  d.probe_per_cell = field<std::size_t>(j, "probe_per_cell", "design", d.probe_per_cell);
  if (j.contains("dgp")) {
    const auto& g = j["dgp"];
    if (!g.is_object()) throw ib::ConfigError("design.dgp: must be an object");
    for (const auto& [key, value] : g.items()) {
      if (key != "alpha" && key != "beta" && key != "gamma" && key != "delta" && key != "rho") {
        throw ib::ConfigError("design.dgp." + key + ": unknown field");
      }
    }
    d.dgp.alpha = field<double>(g, "alpha", "design.dgp", d.dgp.alpha);
    d.dgp.beta = field<double>(g, "beta", "design.dgp", d.dgp.beta);
    d.dgp.gamma = field<double>(g, "gamma", "design.dgp", d.dgp.gamma);
    d.dgp.delta = field<double>(g, "delta", "design.dgp", d.dgp.delta);
    d.dgp.rho = field<double>(g, "rho", "design.dgp", d.dgp.rho);
    if (d.dgp.delta != 0.0) throw ib::ConfigError("design.dgp.delta: closed-form targets require delta = 0");
  }
  return plan;
}

int run_mc(const McOptions& opt) {
  if (opt.config.empty() == opt.preset.empty()) throw ib::ConfigError("give exactly one of --config or --preset");
  McPlan plan = opt.preset.empty() ? config_plan(opt.config) : preset_plan(opt.preset);
  if (opt.replications) plan.base.replications = *opt.replications;
  if (opt.draws) plan.base.draws = *opt.draws;
  if (plan.n.empty() || plan.a.empty() || plan.b.empty()) throw ib::ConfigError("design: n, a and b must be nonempty");
  const double cells = static_cast<double>(plan.n.size() * plan.a.size() * plan.b.size());
  const double work = cells * static_cast<double>(plan.base.replications) * static_cast<double>(plan.base.draws);
  if ((plan.full_scale || work > kLongRunBudget) && !opt.long_run) {
    throw ib::ConfigError("this design is a long run (" + std::to_string(static_cast<long long>(work)) +
                          " replication-draws); pass --long to run it");
  }
  const ib::TableFormat format = opt.format == "markdown" ? ib::TableFormat::kMarkdown : ib::TableFormat::kCsv;
  if (opt.format != "csv" && opt.format != "markdown") throw ib::ConfigError("--format must be csv or markdown");

  std::optional<std::ofstream> audit;
  if (!opt.audit.empty()) {
    audit = open_out(opt.audit);
    *audit << "n,a,b,replication,target,L,l2";
    for (double a : plan.base.alphas) *audit << ",cover" << ib::detail::level_label(a);
    *audit << '\n';
  }
  std::vector<ib::McRow> rows;
  std::uint64_t cell = 0;
  for (std::size_t n : plan.n) {
    for (double b : plan.b) {
      for (double a : plan.a) {
        ib::McDesign design = plan.base;
        design.n = n;
        design.a = a;
        design.b = b;
        design.seed = ib::derive_seed(*opt.seed, cell++);
        std::vector<ib::McReplication> reps;
        rows.push_back(ib::run_design(design, opt.threads, audit ? &reps : nullptr));
        if (audit) {
          for (std::size_t r = 0; r < reps.size(); ++r) {
            for (int m = 0; m < 2; ++m) {
              *audit << n << ',' << ib::detail::fixed(a, 2) << ',' << ib::detail::fixed(b, 2) << ',' << r << ','
                     << (m == 0 ? "dtt" : "cf") << ',' << reps[r].grid_size[m] << ','
                     << ib::detail::format_double(reps[r].l2[m]);
              for (bool c : reps[r].covered[m]) *audit << ',' << (c ? 1 : 0);
              *audit << '\n';
            }
          }
        }
      }
    }
  }
  write_text(opt.out, ib::emit_table(rows, format));
  return 0;
}

// ----------------------------------------------------------------------- bound

struct BoundOptions {
  double r_n = 1.0;
  std::size_t d = 1;
  double C = 1.0;
  std::size_t L = 2;
  std::optional<double> tol;
  std::optional<double> holder_alpha;
  double c_tilde = 1.0;
};

int run_bound(const BoundOptions& opt) {
  if (!(opt.r_n > 0.0) || opt.d < 1 || !(opt.C >= 0.0) || opt.L < 2) {
    throw ib::ConfigError("need --r-n > 0, --d >= 1, --C >= 0, --L >= 2");
  }
  if (opt.tol && !(*opt.tol > 0.0)) throw ib::ConfigError("--tol must be positive");
  std::ostringstream os;
  os << std::setprecision(10);
  const double ratio = static_cast<double>(opt.L) * std::pow(opt.r_n, -0.25);
  if (!opt.holder_alpha) {
    const double bound = ib::curvature_bound(opt.r_n, opt.d, opt.C, opt.L);
    os << "bound: " << bound << '\n';
    os << "rate ratio L/r_n^(1/4): " << ratio << '\n';
    os << "rate condition: L_n = omega(r_n^(1/4))\n";
    if (opt.tol) {
      const double need = std::sqrt(std::sqrt(opt.r_n) * static_cast<double>(opt.d) * opt.C * opt.C / (8.0 * *opt.tol));
      auto L = static_cast<std::size_t>(std::max(2.0, std::ceil(1.0 + need)));
      while (L > 2 && ib::curvature_bound(opt.r_n, opt.d, opt.C, L - 1) <= *opt.tol) --L;
      while (ib::curvature_bound(opt.r_n, opt.d, opt.C, L) > *opt.tol) ++L;
      os << "minimal L for bound <= " << *opt.tol << ": " << L << '\n';
    }
  } else {
    const double alpha = *opt.holder_alpha;
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ib::ConfigError("--holder-alpha must lie in (0,1]");
    const double bound = ib::holder_bound(opt.r_n, opt.c_tilde, opt.C, alpha, opt.L);
    const double exponent = 1.0 / (2.0 * alpha);
    os << "bound: " << bound << '\n';
    os << "rate ratio L/r_n^(1/(2 alpha)): " << static_cast<double>(opt.L) * std::pow(opt.r_n, -exponent) << '\n';
    os << "rate condition: L_n = omega(r_n^(1/(2*alpha))) = omega(r_n^" << exponent << ")\n";
    if (opt.tol) {
      const double need =
          std::pow(std::sqrt(opt.r_n) * opt.c_tilde * std::pow(opt.C, 0.5 * alpha) / *opt.tol, 1.0 / alpha);
      auto L = static_cast<std::size_t>(std::max(2.0, std::ceil(1.0 + need)));
      while (L > 2 && ib::holder_bound(opt.r_n, opt.c_tilde, opt.C, alpha, L - 1) <= *opt.tol) --L;
      while (ib::holder_bound(opt.r_n, opt.c_tilde, opt.C, alpha, L) > *opt.tol) ++L;
      os << "minimal L for bound <= " << *opt.tol << ": " << L << '\n';
    }
  }
  std::cout << os.str();
  return 0;
}

// -------------------------------------------------------------------- simulate

struct SimulateOptions {
  std::size_t d = 1;
  std::size_t n = 500;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int run_simulate(const SimulateOptions& opt) {
  ib::McDesign design;
  design.dim = opt.d;
  design.n = opt.n;
  design.validate();
  ib::Rng rng(ib::derive_seed(*opt.seed, 0));
  std::ostringstream os;
  ib::write_did_csv(os, ib::simulate_sample(design, rng));
  write_text(opt.out, os.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interpolated sup-t uniform confidence bands"};
  app.require_subcommand(1);

  InterpErrorOptions ie;
  auto* ie_cmd = app.add_subcommand("interp-error", "Interpolation error of F(x) = cos(5x) + sqrt(x) on [0,5]");
  ie_cmd->add_option("--function", ie.function, "Function id")->capture_default_str();
  ie_cmd->add_option("--L", ie.nodes, "Nodes per axis (comma separated)")->delimiter(',')->capture_default_str();
  ie_cmd->add_option("--probe", ie.probe, "Probe points")->capture_default_str()->check(CLI::Range(2, 100000000));
  ie_cmd->add_option("--out", ie.out, "Output CSV (default stdout)");
  ie_cmd->add_option("--curve", ie.curve_prefix, "Write per-point error curves to PREFIX_L<L>.csv");
  ie_cmd->add_option("--curve-points", ie.curve_points, "Points per error curve")->check(CLI::Range(2, 10000000));

  BandOptions bo;
  std::uint64_t band_seed = 0;
  double band_rn = 0.0;
  std::size_t band_L = 0;
  double band_a = 0.0, band_b = 0.0;
  auto* band_cmd = app.add_subcommand("band", "Sup-t interpolated uniform band from a data CSV");
  band_cmd->add_option("--data", bo.data, "CSV with columns y1..yd,d,t[,w]")->required();
  band_cmd->add_option("--target", bo.target, "dtt or cf")->capture_default_str();
  auto* opt_L = band_cmd->add_option("--L", band_L, "Nodes per axis");
  auto* opt_a = band_cmd->add_option("--a", band_a, "Grid rule scale a");
  auto* opt_b = band_cmd->add_option("--b", band_b, "Grid rule exponent b");
  band_cmd->add_option("--lo", bo.lo, "Region lower corner")->delimiter(',');
  band_cmd->add_option("--hi", bo.hi, "Region upper corner")->delimiter(',');
  band_cmd->add_option("--tau-lb", bo.tau_lb, "Lower quantile for the data-driven region")->capture_default_str();
  band_cmd->add_option("--tau-ub", bo.tau_ub, "Upper quantile for the data-driven region")->capture_default_str();
  band_cmd->add_option("--B", bo.draws, "Bootstrap draws")->capture_default_str();
  band_cmd->add_option("--alpha", bo.alphas, "Levels (comma separated)")->delimiter(',')->capture_default_str();
  band_cmd->add_option("--seed", band_seed, "Master seed")->required();
  auto* opt_rn = band_cmd->add_option("--r-n", band_rn, "Scaling rate (default n)");
  band_cmd->add_option("--out", bo.out, "Output prefix")->required();
  band_cmd->add_option("--out-points", bo.out_points, "Output points per axis (default 201 for d=1, 51 otherwise)");
  band_cmd->add_flag("--dump-draws", bo.dump_draws, "Also write the B x L^d draw matrix");
  band_cmd->add_option("--threads", bo.threads, "Worker threads")->check(CLI::Range(1, 1024));

  McOptions mo;
  std::uint64_t mc_seed = 0;
  std::size_t mc_R = 0, mc_B = 0;
  auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo coverage table");
  mc_cmd->add_option("--config", mo.config, "Design JSON file");
  mc_cmd->add_option("--preset", mo.preset, "uni-desk, biv-desk, uni-full or biv-full");
  mc_cmd->add_option("--seed", mc_seed, "Master seed")->required();
  auto* opt_R = mc_cmd->add_option("--R", mc_R, "Override replications")->check(CLI::PositiveNumber);
  auto* opt_B = mc_cmd->add_option("--B", mc_B, "Override bootstrap draws")->check(CLI::Range(4, 100000000));
  mc_cmd->add_option("--format", mo.format, "csv or markdown")->capture_default_str();
  mc_cmd->add_option("--out", mo.out, "Output file (default stdout)");
  mc_cmd->add_option("--audit", mo.audit, "Per-replication CSV log");
  mc_cmd->add_flag("--long", mo.long_run, "Allow full-scale runs");
  mc_cmd->add_option("--threads", mo.threads, "Worker threads")->check(CLI::Range(1, 1024));

  BoundOptions bd;
  double holder = 0.0, tol = 0.0;
  auto* bound_cmd = app.add_subcommand("bound", "Interpolation error bound calculator");
  bound_cmd->add_option("--r-n", bd.r_n, "Scaling rate r_n")->required();
  bound_cmd->add_option("--d", bd.d, "Dimension")->capture_default_str();
  bound_cmd->add_option("--C", bd.C, "Curvature / width constant")->required();
  bound_cmd->add_option("--L", bd.L, "Nodes per axis")->required();
  auto* opt_tol = bound_cmd->add_option("--tol", tol, "Report the minimal L with bound <= tol");
  auto* opt_holder = bound_cmd->add_option("--holder-alpha", holder, "Use the Holder bound with this exponent");
  bound_cmd->add_option("--C-tilde", bd.c_tilde, "Holder constant")->capture_default_str();

  SimulateOptions so;
  std::uint64_t sim_seed = 0;
  auto* sim_cmd = app.add_subcommand("simulate", "Draw a difference-in-differences sample");
  sim_cmd->add_option("--d", so.d, "Outcome dimension (1 or 2)")->capture_default_str();
  sim_cmd->add_option("--n", so.n, "Sample size")->capture_default_str();
  sim_cmd->add_option("--seed", sim_seed, "Seed")->required();
  sim_cmd->add_option("--out", so.out, "Output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*ie_cmd) return run_interp_error(ie);
    if (*band_cmd) {
      bo.seed = band_seed;
      if (*opt_rn) bo.r_n = band_rn;
      if (*opt_L) bo.nodes = band_L;
      if (*opt_a) bo.a = band_a;
      if (*opt_b) bo.b = band_b;
      return run_band(bo);
    }
    if (*mc_cmd) {
      mo.seed = mc_seed;
      if (*opt_R) mo.replications = mc_R;
      if (*opt_B) mo.draws = mc_B;
      return run_mc(mo);
    }
    if (*bound_cmd) {
      if (*opt_tol) bd.tol = tol;
      if (*opt_holder) bd.holder_alpha = holder;
      return run_bound(bd);
    }
    if (*sim_cmd) {
      so.seed = sim_seed;
      return run_simulate(so);
    }
  } catch (const ib::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ib::PreconditionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ib::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const ib::EstimationError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const ib::Error& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitUsage;
}
