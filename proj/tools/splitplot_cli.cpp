// splitplot: quadratic-form inference for split-plot designs.
//
//   splitplot test      --data <csv> --hypothesis <kind> [--alpha --upsilon --seed --json <path>]
//   splitplot simulate  --config <json> | --a --d --n --cov --hypothesis --alt --delta-grid --reps ...
//   splitplot fp-table  --d 5,50,200,600 --a 2..12 --cov ar:0.6 --hypothesis interaction
//   splitplot limit     --a --d --n --cov --hypothesis --alpha-grid --samples --seed
//
// Exit codes: 0 success, 2 input or infeasibility error, 1 internal error.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "splitplot/distributions.hpp"
#include "splitplot/io.hpp"
#include "splitplot/kron.hpp"
#include "splitplot/limit_lab.hpp"
#include "splitplot/sim.hpp"
#include "splitplot/test_engine.hpp"

using namespace splitplot;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitInternal = 1;

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << content;
  if (!out) throw InputError("failed writing '" + path + "'");
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
  } else {
    write_file(path, content);
  }
}

std::string fmt(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// ---------------------------------------------------------------- test

struct TestArgs {
  std::string data;
  std::string hypothesis = "interaction";
  double alpha = 0.05;
  double upsilon = 0.05;
  std::uint64_t seed = 1;
  std::string json;
  bool exact_c1 = false;
};

int run_test_command(const TestArgs& args) {
  const auto input = read_dataset_file(args.data);
  const auto& design = input.data.design();
  const auto diag = validate_design(design);
  if (!diag.a1_feasible() || !diag.a2_feasible() || !diag.c1_feasible()) {
    std::cerr << "error: infeasible design\n" << diag.message()
              << "the test needs groups with at least 6 observations for the C1 estimator\n";
    return kExitInput;
  }
  HypothesisSpec hyp;
  hyp.kind = parse_hypothesis_kind(args.hypothesis);
  const TestOptions options{args.alpha, args.upsilon, args.seed, args.exact_c1};
  const TestResult r = run_test(input.data, hyp, options);

  std::ostringstream os;
  os << "design: a = " << design.groups() << ", d = " << design.dim() << ", N = " << design.total() << ", n = (";
  for (std::size_t i = 0; i < design.groups(); ++i) os << (i ? "," : "") << design.size(i);
  os << ")\n"
     << "hypothesis: " << to_string(hyp.kind) << "\n"
     << "A1 = " << fmt(r.traces.a1, 10) << "  A2 = " << fmt(r.traces.a2, 10) << "  C1"
     << (r.traces.c1_mode == C1Mode::kExact ? "" : "*") << " = " << fmt(r.traces.c1, 10) << "\n"
     << "Q_N = " << fmt(r.q, 10) << "  W_N = " << fmt(r.w, 10) << "\n"
     << "f_hat = " << (std::isinf(r.f_hat) ? std::string("inf") : fmt(r.f_hat, 10)) << "  eta = " << fmt(r.eta, 10)
     << "\n"
     << "critical values (alpha = " << r.alpha << "): psi_z " << fmt(r.critical.z) << ", psi_chi "
     << fmt(r.critical.chi1) << ", phi_kf " << fmt(r.critical.kf) << "\n"
     << "p-value (K_f_hat upper tail): " << fmt(r.p_value) << "\n"
     << "decisions: psi_z " << (r.decisions.z ? "reject" : "retain") << ", psi_chi "
     << (r.decisions.chi1 ? "reject" : "retain") << ", phi_kf " << (r.decisions.kf ? "reject" : "retain") << "\n";
  std::cout << os.str();
  if (!args.json.empty()) write_file(args.json, report_json(r, design, input.labels, hyp).dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string config;
  std::string a = "4";
  std::size_t d = 50;
  std::string n;
  std::string cov = "ar:0.6";
  std::string hypothesis = "interaction";
  std::string alt = "null";
  std::string deltas = "0";
  std::size_t reps = 2000;
  double alpha = 0.05;
  double upsilon = 0.05;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string out;
  std::string svg;
};

int run_simulate_command(const SimulateArgs& args) {
  std::vector<SimConfig> configs;
  if (!args.config.empty()) {
    std::ifstream in(args.config);
    if (!in) throw InputError("cannot open config '" + args.config + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("malformed config: ") + e.what());
    }
    configs.push_back(sim_config_from_json(j));
    if (args.threads) configs.back().threads = args.threads;
  } else {
    const auto group_counts = parse_size_list(args.a);
    std::vector<std::size_t> sizes;
    if (!args.n.empty()) {
      sizes = parse_size_list(args.n);
      if (group_counts.size() != 1 || sizes.size() != group_counts.front())
        throw InputError("--n must list exactly a sizes and needs a single --a value");
    }
    for (auto a : group_counts) {
      SimConfig c;
      c.sizes = sizes.empty() ? paper_sizes(a) : sizes;
      c.dim = args.d;
      c.covariance = parse_covariance(args.cov, args.d);
      c.hypothesis.kind = parse_hypothesis_kind(args.hypothesis);
      c.alternative = parse_alternative(args.alt);
      c.deltas = c.alternative == Alternative::kNull ? std::vector<double>{0.0} : parse_double_list(args.deltas);
      c.replications = args.reps;
      c.alpha = args.alpha;
      c.upsilon = args.upsilon;
      c.seed = args.seed;
      c.threads = args.threads;
      c.validate();
      configs.push_back(std::move(c));
    }
  }

  const bool sweep = configs.size() > 1;
  std::string csv = sim_csv_header(sweep);
  std::vector<SimResult> results;
  for (const auto& c : configs) {
    results.push_back(estimate_rejection_rate(c));
    csv += sim_csv_rows(results.back(), sweep);
    std::cerr << "a = " << c.sizes.size() << ": " << c.replications << " replications in "
              << fmt(results.back().seconds, 3) << " s\n";
  }
  emit(args.out, csv);

  if (!args.svg.empty()) {
    std::vector<PlotSeries> series;
    std::string x_label = "delta";
    const bool single_delta = configs.front().deltas.size() == 1;
    if (sweep && single_delta) {
      x_label = "number of groups a";
      for (auto test : kAllTests) {
        PlotSeries s{std::string(to_string(test)), {}, {}};
        for (const auto& r : results) {
          s.x.push_back(static_cast<double>(r.config.sizes.size()));
          s.y.push_back(r.at(r.config.deltas.front(), test).rate);
        }
        series.push_back(std::move(s));
      }
    } else if (sweep) {
      for (const auto& r : results) {
        PlotSeries s{"a = " + std::to_string(r.config.sizes.size()), {}, {}};
        for (double delta : r.config.deltas) {
          s.x.push_back(delta);
          s.y.push_back(r.at(delta, TestKind::kKf).rate);
        }
        series.push_back(std::move(s));
      }
    } else {
      for (auto test : kAllTests) {
        PlotSeries s{std::string(to_string(test)), {}, {}};
        for (double delta : results.front().config.deltas) {
          s.x.push_back(delta);
          s.y.push_back(results.front().at(delta, test).rate);
        }
        series.push_back(std::move(s));
      }
    }
    const auto& c = configs.front();
    const std::string title = std::string(to_string(c.hypothesis.kind)) + " hypothesis, " +
                              std::string(to_string(c.alternative)) + ", d = " + std::to_string(c.dim);
    write_file(args.svg, render_svg(series, title, x_label, "rejection rate"));
  }
  return 0;
}

// ---------------------------------------------------------------- fp-table

struct FpArgs {
  std::string d = "5,50,200,600";
  std::string a = "2..12";
  std::string cov = "ar:0.6";
  std::string n;
  std::string hypothesis = "interaction";
  std::string out;
};

int run_fp_command(const FpArgs& args) {
  const auto cells = fp_table(parse_size_list(args.d), parse_size_list(args.a), args.cov,
                              parse_hypothesis_kind(args.hypothesis),
                              args.n.empty() ? std::vector<std::size_t>{} : parse_size_list(args.n));
  emit(args.out, fp_table_csv(cells));
  return 0;
}

// ---------------------------------------------------------------- limit

struct LimitArgs {
  std::size_t a = 2;
  std::size_t d = 5;
  std::string n;
  std::string cov = "ar:0.6";
  std::string hypothesis = "interaction";
  std::string alpha_grid = "0.01,0.05,0.1";
  std::size_t samples = 200000;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string json;
};

int run_limit_command(const LimitArgs& args) {
  const auto sizes = args.n.empty() ? paper_sizes(args.a) : parse_size_list(args.n);
  if (sizes.size() != args.a) throw InputError("--n must list exactly a sizes");
  const Matrix sigma = parse_covariance(args.cov, args.d).materialize();
  const auto proj = canonical_hypothesis(parse_hypothesis_kind(args.hypothesis), args.a, args.d);
  const auto spectrum = spectrum_tvt(proj.whole(), proj.sub(), sigma, sizes);
  const auto regime = classify_regime(spectrum.betas);
  const auto dof = f_p_exact(proj.whole(), proj.sub(), sigma, sizes);
  const auto alphas = parse_double_list(args.alpha_grid);
  const auto rows = approximation_error(spectrum.betas, dof.f, alphas, args.samples, args.seed, args.threads);

  std::ostringstream os;
  os << "beta1 = " << fmt(regime.beta1, 8) << "\n"
     << "r_effective = " << regime.r_effective << " (mass cut " << regime.thresholds.mass_cut << ")\n"
     << "regime = " << to_string(regime.tag) << (regime.boundary ? " (at threshold)" : "") << "\n"
     << "f_P = " << fmt(dof.f, 8) << "  tau_P = " << fmt(dof.tau, 8) << "\n"
     << "alpha,mixture_quantile,mixture_se,kf_quantile,gap\n";
  for (const auto& row : rows)
    os << fmt(row.alpha) << ',' << fmt(row.mixture, 8) << ',' << fmt(row.mixture_se, 4) << ',' << fmt(row.kf, 8) << ','
       << fmt(row.gap, 6) << '\n';
  std::cout << os.str();

  if (!args.json.empty()) {
    nlohmann::json table = nlohmann::json::array();
    for (const auto& row : rows)
      table.push_back({{"alpha", row.alpha}, {"mixture", row.mixture}, {"mixture_se", row.mixture_se},
                       {"kf", row.kf}, {"gap", row.gap}});
    const nlohmann::json j{{"version", kVersion},      {"beta1", regime.beta1},
                           {"r_effective", regime.r_effective}, {"regime", to_string(regime.tag)},
                           {"boundary", regime.boundary}, {"f_p", dof.f},
                           {"tau_p", dof.tau},            {"samples", args.samples},
                           {"seed", args.seed},           {"quantiles", table}};
    write_file(args.json, j.dump(2) + "\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quadratic-form inference for split-plot designs"};
  app.require_subcommand(1);

  TestArgs test_args;
  auto* test = app.add_subcommand("test", "Test a hypothesis on a wide CSV dataset");
  test->add_option("--data", test_args.data, "CSV file: group,t1,...,td")->required();
  test->add_option("--hypothesis", test_args.hypothesis, "interaction|group|time|grand-mean");
  test->add_option("--alpha", test_args.alpha, "Significance level");
  test->add_option("--upsilon", test_args.upsilon, "Subsampling intensity for C1*");
  test->add_option("--seed", test_args.seed, "Seed for the subsampling draws");
  test->add_option("--json", test_args.json, "Write the JSON report here");
  test->add_flag("--exact-c1", test_args.exact_c1, "Use the complete C1 U-statistic");

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo rejection rates of psi_z, psi_chi and phi_kf");
  sim->add_option("--config", sim_args.config, "JSON simulation config");
  sim->add_option("--a", sim_args.a, "Group count(s), e.g. 4 or 2..12");
  sim->add_option("--d", sim_args.d, "Dimension");
  sim->add_option("--n", sim_args.n, "Group sizes (default: reference layout prefix)");
  sim->add_option("--cov", sim_args.cov, "identity | ar:<rho> | cs:<rho>");
  sim->add_option("--hypothesis", sim_args.hypothesis, "interaction|group|time|grand-mean");
  sim->add_option("--alt", sim_args.alt, "null|trend|one-point|shift");
  sim->add_option("--delta-grid", sim_args.deltas, "Comma-separated deltas");
  sim->add_option("--reps", sim_args.reps, "Replications");
  sim->add_option("--alpha", sim_args.alpha, "Significance level");
  sim->add_option("--upsilon", sim_args.upsilon, "Subsampling intensity");
  sim->add_option("--seed", sim_args.seed, "Master seed");
  sim->add_option("--threads", sim_args.threads, "Worker threads (default: SPLITPLOT_THREADS or all cores)");
  sim->add_option("--out", sim_args.out, "CSV output path (default stdout)");
  sim->add_option("--svg", sim_args.svg, "Write an SVG line plot here");

  FpArgs fp_args;
  auto* fp = app.add_subcommand("fp-table", "Exact tau_P = 1/f_P over a (d, a) grid");
  fp->add_option("--d", fp_args.d, "Dimensions");
  fp->add_option("--a", fp_args.a, "Group counts");
  fp->add_option("--cov", fp_args.cov, "identity | ar:<rho> | cs:<rho>");
  fp->add_option("--n", fp_args.n, "Group sizes; each cell uses the first a");
  fp->add_option("--hypothesis", fp_args.hypothesis, "interaction|group|time|grand-mean");
  fp->add_option("--out", fp_args.out, "CSV output path (default stdout)");

  LimitArgs limit_args;
  auto* limit = app.add_subcommand("limit", "Limit-law diagnostics for a known covariance");
  limit->add_option("--a", limit_args.a, "Number of groups");
  limit->add_option("--d", limit_args.d, "Dimension");
  limit->add_option("--n", limit_args.n, "Group sizes");
  limit->add_option("--cov", limit_args.cov, "identity | ar:<rho> | cs:<rho>");
  limit->add_option("--hypothesis", limit_args.hypothesis, "interaction|group|time|grand-mean");
  limit->add_option("--alpha-grid", limit_args.alpha_grid, "Comma-separated levels");
  limit->add_option("--samples", limit_args.samples, "Monte Carlo draws (>= 100000)");
  limit->add_option("--seed", limit_args.seed, "Seed");
  limit->add_option("--threads", limit_args.threads, "Worker threads");
  limit->add_option("--json", limit_args.json, "Write a JSON report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitInput;
  }

  try {
    if (*test) return run_test_command(test_args);
    if (*sim) return run_simulate_command(sim_args);
    if (*fp) return run_fp_command(fp_args);
    if (*limit) return run_limit_command(limit_args);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
