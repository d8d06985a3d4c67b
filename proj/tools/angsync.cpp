// angsync command line: generate | solve | sweep | spectrum | theory.
//
// Exit codes: 0 success, 2 usage or I/O error, 3 solver did not converge
// under --strict.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "angsync/angsync.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace angsync;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNotConverged = 3;

// JSON config for CLI11. Nested objects address subcommands
// ({"sweep": {"n": 400}}); top-level scalars apply to the subcommand that
// was selected on the command line. Values given as flags win.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(const CLI::App* app) : app_(app) {}

  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json j;
    try {
      j = json::parse(input);
    } catch (const json::exception& e) {
      throw CLI::ConversionError(std::string("config: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config: top level must be an object");
    std::vector<std::string> active;
    for (const auto* sub : app_->get_subcommands()) active.push_back(sub->get_name());

    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) {
        for (const auto& [k2, v2] : value.items()) items.push_back(item({key}, k2, v2));
      } else if (!active.empty()) {
        items.push_back(item(active, key, value));
      } else {
        items.push_back(item({}, key, value));
      }
    }
    return items;
  }

 private:
  static std::string scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
  }

  static CLI::ConfigItem item(std::vector<std::string> parents, const std::string& name, const json& v) {
    CLI::ConfigItem it;
    it.parents = std::move(parents);
    it.name = name;
    if (v.is_array()) {
      for (const auto& e : v) it.inputs.push_back(scalar(e));
    } else {
      it.inputs.push_back(scalar(v));
    }
    return it;
  }

  const CLI::App* app_;
};

struct ModelArgs {
  std::string model = "complete";
  std::size_t n = 100;
  double p = 1.0;
  double epsilon = 0.3;
  std::uint64_t seed = 0;
  double edge_probability = 1.0;
  double sigma = 1.0;
  double outlier_scale = 100.0;
  std::optional<double> omega;

  ModelSpec spec() const {
    ModelSpec s;
    s.model = parse_model(model);
    s.n = n;
    s.p = p;
    s.epsilon = epsilon;
    s.seed = seed;
    s.edge_probability = edge_probability;
    s.sigma_good = sigma;
    s.outlier_scale = outlier_scale;
    s.omega = omega;
    return s;
  }
};

void add_model_options(CLI::App* sub, ModelArgs& a, bool with_p) {
  sub->add_option("--model", a.model, "complete | smallworld | clock")
      ->check(CLI::IsMember({"complete", "smallworld", "clock"}))
      ->capture_default_str();
  sub->add_option("--n", a.n, "number of vertices")->capture_default_str();
  if (with_p) sub->add_option("--p", a.p, "good-edge probability")->capture_default_str();
  sub->add_option("--epsilon", a.epsilon, "small-world cap parameter")->capture_default_str();
  sub->add_option("--seed", a.seed, "random seed")->capture_default_str();
  sub->add_option("--edge-probability", a.edge_probability, "clock model: pair measured with this probability")
      ->capture_default_str();
  sub->add_option("--sigma", a.sigma, "clock model: Gaussian noise of good measurements")->capture_default_str();
  sub->add_option("--outlier-scale", a.outlier_scale, "clock model: outliers are uniform on [-s, s]")
      ->capture_default_str();
  sub->add_option("--omega", a.omega, "clock model: compactification frequency (default 0.3/sigma)");
}

struct SolverArgs {
  double tol = 1e-10;
  std::size_t max_iters = 0;
  double shift = 0.0;
  std::size_t rank = 0;
  std::size_t sdp_iters = SdpOptions{}.max_iters;

  SolveOptions options() const {
    SolveOptions o;
    o.eig.tol = tol;
    o.eig.max_iters = max_iters;
    o.eig.diagonal_shift = shift;
    o.lsqr.tol = tol;
    o.lsqr.max_iters = max_iters;
    o.sdp.rank = rank;
    o.sdp.max_iters = sdp_iters;
    return o;
  }
};

void add_solver_options(CLI::App* sub, SolverArgs& a) {
  sub->add_option("--tol", a.tol, "eig/lsqr relative tolerance")->capture_default_str();
  sub->add_option("--max-iters", a.max_iters, "eig/lsqr iteration budget (0 = default)")->capture_default_str();
  sub->add_option("--shift", a.shift, "diagonal of H for the eig method")->capture_default_str();
  sub->add_option("--rank", a.rank, "SDP factor width (0 = default)")->capture_default_str();
  sub->add_option("--sdp-iters", a.sdp_iters, "SDP ascent iteration budget")->capture_default_str();
}

json instance_metadata(const ModelArgs& a, const GeneratedInstance& gen) {
  const auto& inst = gen.instance;
  json meta;
  meta["schema_version"] = kCsvSchemaVersion;
  meta["model"] = a.model;
  json params = {{"n", a.n}, {"p", a.p}};
  if (a.model == "smallworld") params["epsilon"] = a.epsilon;
  if (a.model == "clock") {
    params["edge_probability"] = a.edge_probability;
    params["sigma_good"] = a.sigma;
    params["outlier_fraction"] = 1.0 - a.p;
    params["outlier_scale"] = a.outlier_scale;
    params["omega"] = gen.omega;
  }
  meta["params"] = params;
  meta["seed"] = a.seed;
  meta["n"] = inst.graph.n();
  meta["m"] = inst.graph.m();
  meta["m_good"] = inst.truth.m_good();
  meta["m_bad"] = inst.truth.m_bad();
  meta["connected"] = inst.connected;
  meta["theta"] = inst.truth.theta;
  if (!gen.times.empty()) meta["times"] = gen.times;
  return meta;
}

std::ostream& open_out(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  return file;
}

std::string sibling(const std::string& path, const std::string& suffix) {
  fs::path p(path);
  const auto stem = p.stem().string();
  const auto ext = p.has_extension() ? p.extension().string() : std::string(".csv");
  return (p.parent_path() / (stem + suffix + ext)).string();
}

int run_generate(const ModelArgs& a, const std::string& out) {
  const auto gen = generate(a.spec());
  const auto& inst = gen.instance;
  const auto meta = instance_metadata(a, gen);
  if (out.empty() || out == "-") {
    write_instance(std::cout, inst.graph, &inst.truth.good_mask);
  } else {
    save_instance(out, inst.graph, &inst.truth.good_mask);
    save_json(metadata_path(out), meta);
  }
  if (!inst.connected) std::cerr << "warning: generated graph is disconnected\n";
  std::cerr << "n=" << inst.graph.n() << " m=" << inst.graph.m() << " m_good=" << inst.truth.m_good()
            << " m_bad=" << inst.truth.m_bad() << '\n';
  return 0;
}

int run_solve(const std::string& path, const std::string& method_name, const SolverArgs& sa, std::uint64_t seed,
              std::size_t L, double sce_tol, bool strict, const std::string& out) {
  const auto loaded = load_instance(path);
  const auto& graph = loaded.graph;
  const Method method = parse_method(method_name);
  const auto res = solve(graph, method, sa.options(), seed);

  json report;
  report["method"] = to_string(method);
  report["n"] = graph.n();
  report["m"] = graph.m();
  report["lambda1"] = res.estimate.top_eigval;
  report["objective"] = res.objective;
  report["iterations"] = res.estimate.iterations;
  report["residual"] = res.estimate.residual;
  report["converged"] = res.estimate.converged;
  report["wall_ms"] = res.wall_ms;
  report["sce"] = sce(res.estimate.theta_hat, graph, sce_tol);
  report["sce_f"] = sce_f(res.estimate.theta_hat, graph, default_theta0(L));
  if (res.relaxation) report["sdp_relaxation"] = *res.relaxation;
  if (res.theta_rank) report["theta_rank"] = *res.theta_rank;
  if (method == Method::Eig) report["power_shift"] = res.estimate.power_shift;
  if (method == Method::Lsqr) report["components"] = res.estimate.components;
  if (!res.estimate.zero_entries.empty()) report["zero_entries"] = res.estimate.zero_entries;

  const auto meta_path = metadata_path(path);
  if (fs::exists(meta_path)) {
    const auto meta = load_json(meta_path);
    if (meta.contains("theta")) {
      const auto theta = meta["theta"].get<std::vector<double>>();
      if (theta.size() != graph.n()) throw Error(ErrorCode::Io, "metadata theta length does not match the instance");
      report["rho1"] = rho1(res.estimate.theta_hat, theta);
      report["rho2"] = rho2(res.estimate.eigvec, theta);
    }
  }
  report["theta_hat"] = res.estimate.theta_hat;

  std::ofstream file;
  if (out.empty() || out == "-") {
    json brief = report;
    brief.erase("theta_hat");
    for (const auto& [k, v] : brief.items()) std::cout << k << '=' << v.dump() << '\n';
  } else {
    auto& os = open_out(out, file);
    os << std::setw(2) << report << '\n';
  }
  if (strict && !res.estimate.converged) {
    std::cerr << "error: solver did not converge\n";
    return kExitNotConverged;
  }
  return 0;
}

int run_sweep_cmd(const ModelArgs& a, const std::vector<double>& grid, std::size_t trials,
                  const std::vector<std::string>& methods, const SolverArgs& sa, std::size_t threads,
                  bool deterministic, bool strict, const std::string& out) {
  if (grid.empty()) throw Error(ErrorCode::InvalidInput, "sweep: empty p grid");
  SweepConfig cfg;
  cfg.base = a.spec();
  cfg.p_grid = grid;
  cfg.trials = trials;
  cfg.methods.clear();
  for (const auto& m : methods) cfg.methods.push_back(parse_method(m));
  cfg.master_seed = a.seed;
  cfg.solve = sa.options();
  cfg.threads = threads;
  cfg.deterministic = deterministic;
  const auto rows = run_sweep(cfg);
  const auto agg = aggregate(rows, sa.shift);

  std::ofstream file;
  auto& os = open_out(out, file);
  write_runs_csv(os, rows);
  if (out.empty() || out == "-") {
    std::cout << '\n';
    write_aggregate_csv(std::cout, agg);
  } else {
    std::ofstream af(sibling(out, "_agg"));
    if (!af) throw Error(ErrorCode::Io, "cannot open aggregate output next to '" + out + "'");
    write_aggregate_csv(af, agg);
  }
  if (strict) {
    for (const auto& r : rows) {
      if (!r.converged) {
        std::cerr << "error: a solve did not converge (p=" << r.p << ", seed=" << r.seed << ")\n";
        return kExitNotConverged;
      }
    }
  }
  return 0;
}

int run_spectrum(const ModelArgs& a, const std::string& instance, std::optional<double> shift, bool shift_p,
                 std::size_t top, std::size_t hist_bins, std::size_t dense_limit, const std::string& out) {
  OffsetGraph graph;
  if (!instance.empty()) {
    graph = load_instance(instance).graph;
  } else {
    graph = generate(a.spec()).instance.graph;
  }
  const double diag = shift ? *shift : (shift_p ? a.p : 0.0);
  const SyncMatrix H(graph, diag);
  auto values = full_spectrum(H, dense_limit);
  if (top > 0) {
    if (top > values.size()) throw Error(ErrorCode::InvalidInput, "spectrum: --top exceeds n");
    values.resize(top);
  }

  std::ofstream file;
  auto& os = open_out(out, file);
  os.precision(17);
  os << "eigenvalue\n";
  for (double v : values) os << v << '\n';

  if (hist_bins > 0) {
    const auto bins = histogram(values, hist_bins);
    std::ofstream hf;
    std::ostream* hs = &std::cout;
    if (!out.empty() && out != "-") {
      hf.open(sibling(out, "_hist"));
      if (!hf) throw Error(ErrorCode::Io, "cannot open histogram output next to '" + out + "'");
      hs = &hf;
    } else {
      std::cout << '\n';
    }
    hs->precision(17);
    *hs << "bin_center,count\n";
    for (const auto& b : bins) *hs << b.center << ',' << b.count << '\n';
  }
  return 0;
}

int run_theory(double n, std::optional<double> m, double L, double p, const std::string& out) {
  const double edges = m ? *m : n * (n - 1.0) / 2.0;
  const auto preds = theory::all_predictions(n, edges, L, p);
  std::ofstream file;
  auto& os = open_out(out, file);
  os.precision(10);
  os << "name,value,aux,regime\n";
  for (const auto& pr : preds) {
    os << pr.name << ',' << pr.value << ',';
    if (pr.aux) os << *pr.aux;
    os << ',' << theory::to_string(pr.regime) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Angular synchronization by eigenvectors and semidefinite programming"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "JSON file with option values; flags override it");
  app.config_formatter(std::make_shared<JsonConfig>(&app));

  ModelArgs gen_args;
  std::string gen_out;
  auto* gen = app.add_subcommand("generate", "draw a synthetic instance");
  add_model_options(gen, gen_args, true);
  gen->add_option("--out", gen_out, "instance file (a .json sidecar is written next to it)");

  std::string solve_path, solve_method = "eig", solve_out;
  SolverArgs solve_solver;
  std::uint64_t solve_seed = 0;
  std::size_t solve_L = 8;
  double solve_sce_tol = 1e-6;
  bool solve_strict = false;
  auto* slv = app.add_subcommand("solve", "estimate angles for an instance file");
  slv->add_option("instance,--instance", solve_path, "instance file")->required();
  slv->add_option("--method", solve_method, "eig | sdp | lsqr")
      ->check(CLI::IsMember({"eig", "sdp", "lsqr"}))
      ->capture_default_str();
  slv->add_option("--seed", solve_seed, "solver seed")->capture_default_str();
  slv->add_option("--L", solve_L, "discretization levels; sce_f uses theta0 = 2 pi / L")
      ->check(CLI::Range(std::size_t{3}, std::size_t{1} << 30))
      ->capture_default_str();
  slv->add_option("--sce-tol", solve_sce_tol, "tolerance for the violated-equation count")->capture_default_str();
  slv->add_flag("--strict", solve_strict, "exit with status 3 if the solver does not converge");
  slv->add_option("--out", solve_out, "write a JSON report here instead of key=value lines on stdout");
  add_solver_options(slv, solve_solver);

  ModelArgs sweep_args;
  std::vector<double> sweep_grid;
  std::size_t sweep_trials = 20, sweep_threads = 0;
  std::vector<std::string> sweep_methods{"eig"};
  SolverArgs sweep_solver;
  bool sweep_det = false, sweep_strict = false;
  std::string sweep_out;
  auto* swp = app.add_subcommand("sweep", "run solvers over a grid of p values");
  add_model_options(swp, sweep_args, false);
  swp->add_option("--p", sweep_grid, "grid of p values (repeat or comma-separate)")->delimiter(',');
  swp->add_option("--trials", sweep_trials, "trials per grid point")->check(CLI::PositiveNumber)->capture_default_str();
  swp->add_option("--method", sweep_methods, "methods to run on each instance")
      ->delimiter(',')
      ->check(CLI::IsMember({"eig", "sdp", "lsqr"}))
      ->capture_default_str();
  swp->add_option("--threads", sweep_threads, "worker threads (0 = all cores)")->capture_default_str();
  swp->add_flag("--deterministic", sweep_det, "bit-reproducible output (wall_ms written as 0)");
  swp->add_flag("--strict", sweep_strict, "exit with status 3 if any solve does not converge");
  swp->add_option("--out", sweep_out, "per-run CSV; aggregates go to <out>_agg.csv");
  add_solver_options(swp, sweep_solver);

  ModelArgs spec_args;
  std::string spec_instance, spec_out;
  std::optional<double> spec_shift;
  bool spec_shift_p = false;
  std::size_t spec_top = 0, spec_hist = 0, spec_limit = kDefaultDenseLimit;
  auto* spc = app.add_subcommand("spectrum", "eigenvalues of H, optionally binned");
  add_model_options(spc, spec_args, true);
  spc->add_option("--instance", spec_instance, "use this instance file instead of generating one");
  auto* shift_opt = spc->add_option("--shift", spec_shift, "diagonal of H (default 0)");
  spc->add_flag("--shift-p", spec_shift_p, "use p as the diagonal")->excludes(shift_opt);
  spc->add_option("--top", spec_top, "keep only the k largest eigenvalues");
  spc->add_option("--hist", spec_hist, "also write a histogram with this many bins");
  spc->add_option("--dense-limit", spec_limit, "largest n for the dense eigensolver")->capture_default_str();
  spc->add_option("--out", spec_out, "eigenvalue CSV; the histogram goes to <out>_hist.csv");

  double th_n = 400, th_L = 8, th_p = 0.1;
  std::optional<double> th_m;
  std::string th_out;
  auto* thy = app.add_subcommand("theory", "closed-form predictions for (n, m, L, p)");
  thy->add_option("--n", th_n, "number of vertices")->capture_default_str();
  thy->add_option("--m", th_m, "number of edges (default n(n-1)/2)");
  thy->add_option("--L", th_L, "discretization levels")->capture_default_str();
  thy->add_option("--p", th_p, "good-edge probability")->capture_default_str();
  thy->add_option("--out", th_out, "CSV output (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (gen->parsed()) return run_generate(gen_args, gen_out);
    if (slv->parsed()) {
      return run_solve(solve_path, solve_method, solve_solver, solve_seed, solve_L, solve_sce_tol, solve_strict,
                       solve_out);
    }
    if (swp->parsed()) {
      return run_sweep_cmd(sweep_args, sweep_grid, sweep_trials, sweep_methods, sweep_solver, sweep_threads,
                           sweep_det, sweep_strict, sweep_out);
    }
    if (spc->parsed()) {
      return run_spectrum(spec_args, spec_instance, spec_shift, spec_shift_p, spec_top, spec_hist, spec_limit,
                          spec_out);
    }
    if (thy->parsed()) return run_theory(th_n, th_m, th_L, th_p, th_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
