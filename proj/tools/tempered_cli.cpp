// tempered: sample paths, solve the elastic problem, evaluate relaxation
// curves and run the verification suites. CSV on stdout or --out.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tempered/csv.hpp"
#include "tempered/diffusion.hpp"
#include "tempered/fracbvp.hpp"
#include "tempered/parallel.hpp"
#include "tempered/randtime.hpp"
#include "tempered/verify.hpp"

namespace {

using namespace tempered;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::optional<double> mu;
  std::optional<double> eta;
  double c0 = 1.0;
  std::vector<double> t{1.0};
  std::vector<double> x{0.0};
  std::size_t n = 0;  // 0: command default
  double dt = kDefaultDt;
  double step = kDefaultStep;
  std::uint64_t seed = kDefaultSeed;
  std::string method = "laplace";
  std::string source = "inverse";
  unsigned threads = default_threads();
  std::string out;
  bool fresh = false;

  // sample
  std::string kind = "inverse";
  std::string sign = "plus";
  std::size_t points = 101;
  // relax
  double a = 1.0;
  double b = 1.0;
  int c = 1;
  // verify
  std::string suite = "all";
};

/// Output stream: file when --out is given, stdout otherwise.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw ConfigError("cannot open output file '" + path + "'");
    }
  }
  std::ostream& os() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

TemperedSymbol resolve_symbol(const RunConfig& cfg) {
  if (cfg.mu && cfg.eta) throw ConfigError("give exactly one of --mu and --eta");
  if (cfg.eta) {
    if (!(*cfg.eta >= 0.0)) throw ConfigError("--eta must be >= 0");
    return TemperedSymbol(*cfg.eta);
  }
  return TemperedSymbol::from_drift(cfg.mu.value_or(0.0));
}

double resolve_mu(const RunConfig& cfg) {
  if (cfg.mu && cfg.eta) throw ConfigError("give exactly one of --mu and --eta");
  if (cfg.eta) {
    if (!(*cfg.eta >= 0.0)) throw ConfigError("--eta must be >= 0");
    return 2.0 * std::sqrt(*cfg.eta);
  }
  return cfg.mu.value_or(0.0);
}

void require_positive(double v, const char* flag) {
  if (!(v > 0.0)) throw ConfigError(std::string(flag) + " must be > 0");
}

std::uint64_t effective_seed(const RunConfig& cfg) {
  if (!cfg.fresh) return cfg.seed;
  std::random_device rd;
  const std::uint64_t s = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  std::cerr << "fresh seed: " << s << "\n";
  return s;
}

// ---------------------------------------------------------------------------

int cmd_sample(const RunConfig& cfg) {
  const std::size_t n = cfg.n == 0 ? 1 : cfg.n;
  const double t_end = cfg.t.back();
  require_positive(t_end, "--t");
  require_positive(cfg.dt, "--dt");
  require_positive(cfg.step, "--step");
  const std::uint64_t seed = effective_seed(cfg);
  Sink sink(cfg.out);
  csv::Writer w(sink.os());

  const std::string& kind = cfg.kind;
  if (kind == "subordinator" || kind == "inverse" || kind == "truncated-inverse") {
    const TemperedSymbol sym = resolve_symbol(cfg);
    w.header({"path_id", "t", "value"});
    for (std::size_t p = 0; p < n; ++p) {
      RngStream rng(seed, p);
      if (kind == "subordinator") {
        const auto steps = static_cast<std::size_t>(std::llround(t_end / cfg.step));
        const auto path = sample_subordinator_path(sym, cfg.step, steps, rng);
        for (std::size_t k = 0; k < path.grid.size(); ++k) {
          w.field(p).field(path.grid[k]).field(path.values[k]);
          w.end_row();
        }
        continue;
      }
      std::vector<double> grid(cfg.points);
      for (std::size_t k = 0; k < cfg.points; ++k) {
        grid[k] = t_end * static_cast<double>(k) / static_cast<double>(std::max<std::size_t>(cfg.points - 1, 1));
      }
      auto path = sample_inverse_path(sym, grid, cfg.step, rng);
      if (kind == "truncated-inverse") {
        const double cap = rng.exponential(sym.mu());
        for (double& v : path.values) v = std::min(v, cap);
      }
      for (std::size_t k = 0; k < grid.size(); ++k) {
        w.field(p).field(grid[k]).field(path.values[k]);
        w.end_row();
      }
    }
    return kExitOk;
  }

  const double mu = resolve_mu(cfg);
  if (kind == "bm") {
    w.header({"path_id", "t", "value", "max"});
    for (std::size_t p = 0; p < n; ++p) {
      RngStream rng(seed, p);
      const auto path = simulate_bm(mu, 0.0, t_end, cfg.dt, rng);
      const auto m = running_max(path, true, rng);
      const std::size_t stride = std::max<std::size_t>(1, path.steps() / 1000);
      for (std::size_t k = 0; k < path.values.size(); k += stride) {
        w.field(p).field(path.time(k)).field(path.values[k]).field(m[k]);
        w.end_row();
      }
    }
    return kExitOk;
  }
  if (kind == "bang-bang") {
    if (cfg.sign != "plus" && cfg.sign != "minus") throw ConfigError("--sign must be plus or minus");
    if (mu < 0.0) throw ConfigError("bang-bang takes a drift magnitude: --mu must be >= 0");
    const DriftSign sign = cfg.sign == "plus" ? DriftSign::plus : DriftSign::minus;
    w.header({"path_id", "t", "value", "local_time"});
    for (std::size_t p = 0; p < n; ++p) {
      RngStream rng(seed, p);
      const auto bb = simulate_bang_bang(sign, mu, t_end, cfg.dt, rng);
      const std::size_t stride = std::max<std::size_t>(1, bb.path.steps() / 1000);
      for (std::size_t k = 0; k < bb.path.values.size(); k += stride) {
        w.field(p).field(bb.path.time(k)).field(bb.path.values[k]).field(bb.local_time.raw[k]);
        w.end_row();
      }
    }
    return kExitOk;
  }
  throw ConfigError("unknown --kind '" + kind +
                    "' (subordinator, inverse, truncated-inverse, bm, bang-bang)");
}

int cmd_solve(const RunConfig& cfg) {
  const ElasticConfig ec(resolve_mu(cfg), cfg.c0);
  Method method;
  if (cfg.method == "laplace") method = Method::laplace;
  else if (cfg.method == "quadrature") method = Method::quadrature;
  else if (cfg.method == "mc") method = Method::mc;
  else throw ConfigError("--method must be mc, quadrature or laplace");

  Budget budget;
  budget.n = cfg.n == 0 ? 100'000 : cfg.n;
  budget.step = cfg.step;
  budget.dt = cfg.dt;
  budget.seed = effective_seed(cfg);
  budget.threads = cfg.threads;
  if (cfg.source == "inverse") budget.source = McSource::inverse;
  else if (cfg.source == "maximum") budget.source = McSource::maximum;
  else throw ConfigError("--source must be inverse or maximum");

  const auto field = solve_u(ec, cfg.t, cfg.x, method, budget);
  Sink sink(cfg.out);
  csv::Writer w(sink.os());
  w.header({"t", "x", "u", "method", "error"});
  for (std::size_t i = 0; i < field.t_grid.size(); ++i) {
    for (std::size_t j = 0; j < field.x_grid.size(); ++j) {
      w.field(field.t_grid[i]).field(field.x_grid[j]).field(field.at(i, j))
          .field(method_name(method)).field(field.error_at(i, j));
      w.end_row();
    }
  }
  return kExitOk;
}

int cmd_relax(const RunConfig& cfg) {
  const TemperedSymbol sym = resolve_symbol(cfg);
  Sink sink(cfg.out);
  csv::Writer w(sink.os());
  w.header({"t", "r", "limit_branch"});
  for (double t : cfg.t) {
    const auto r = relaxation(cfg.a, cfg.b, cfg.c, sym, t);
    w.field(t).field(r.value).field(r.limit_branch ? 1 : 0);
    w.end_row();
  }
  if (cfg.c == 0 && cfg.b > cfg.a && cfg.a > 0.0) {
    std::cerr << "crossing time r(t_b)=1: " << csv::format(relaxation_crossing_time(cfg.a, cfg.b, sym))
              << "\n";
  }
  return kExitOk;
}

int cmd_verify(const RunConfig& cfg) {
  const std::string& suite = cfg.suite;
  const bool all = suite == "all";
  if (!all && suite != "thm-pos" && suite != "thm-neg" && suite != "local-time" &&
      suite != "functional" && suite != "identities") {
    throw ConfigError("unknown suite '" + suite +
                      "' (all, thm-pos, thm-neg, local-time, functional, identities)");
  }
  CheckOptions opt;
  opt.n = cfg.n == 0 ? 100'000 : cfg.n;
  opt.dt = cfg.dt;
  opt.step = cfg.step;
  opt.seed = effective_seed(cfg);
  opt.threads = cfg.threads;
  if (opt.n < 10'000) throw ConfigError("--n must be >= 10000 for verification");
  const double mu = cfg.mu.value_or(1.0);
  const double t = cfg.t.back();

  std::vector<LawCheckReport> reports;
  auto run = [&](LawCheckReport r) {
    print_summary(std::cout, r);
    std::cout.flush();
    reports.push_back(std::move(r));
  };

  if (all || suite == "identities") {
    for (auto& r : check_identities()) run(std::move(r));
  }
  if (all || suite == "thm-pos") run(check_thm_pos_drift(mu, t, opt));
  if (all || suite == "thm-neg") {
    run(check_thm_neg_drift(mu, t, opt));
    run(check_neg_drift_tail(mu, t, {0.5, 1.0}, opt));
  }
  if (all || suite == "local-time") {
    run(check_local_time(DriftSign::plus, mu, t, opt));
    run(check_local_time(DriftSign::minus, mu, t, opt));
  }
  if (all || suite == "functional") {
    CheckOptions fo = opt;
    fo.n = std::max<std::size_t>(10'000, opt.n / 5);
    const std::vector<double> grid{0.25, 1.0, 2.0};
    for (const auto& ec : {ElasticConfig(mu, 1.0), ElasticConfig(-mu, 1.0), ElasticConfig(mu, 0.25)}) {
      run(check_functional_equiv(ec, grid, 0.5, fo));
    }
  }

  if (!cfg.out.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out);
    std::ofstream rep(fs::path(cfg.out) / "reports.csv");
    write_reports_csv(rep, reports);
    for (const auto& r : reports) {
      if (!r.table) continue;
      std::ofstream e(fs::path(cfg.out) / ("ecdf_" + r.name + ".csv"));
      write_ecdf_csv(e, *r.table);
    }
  }

  std::size_t failed = 0;
  for (const auto& r : reports) failed += r.pass ? 0 : 1;
  std::cout << (failed == 0 ? "ALL PASS" : "FAILED") << ": " << reports.size() - failed << "/"
            << reports.size() << " checks passed\n";
  return failed == 0 ? kExitOk : kExitCheckFailed;
}

void add_common(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--mu", cfg.mu, "Drift (signed for solve); eta = mu^2/4");
  sub->add_option("--eta", cfg.eta, "Tempering parameter (alternative to --mu)");
  sub->add_option("--c0", cfg.c0, "Base elastic coefficient");
  sub->add_option("--t", cfg.t, "Time or list of times")->expected(1, -1);
  sub->add_option("--x", cfg.x, "Position or list of positions")->expected(1, -1);
  sub->add_option("--n", cfg.n, "Number of paths");
  sub->add_option("--dt", cfg.dt, "Diffusion time step");
  sub->add_option("--step", cfg.step, "Subordinator operational step");
  sub->add_option("--seed", cfg.seed, "Random seed");
  sub->add_option("--method", cfg.method, "mc | quadrature | laplace");
  sub->add_option("--threads", cfg.threads, "Worker threads");
  sub->add_option("--out", cfg.out, "Output file (sample/solve/relax) or directory (verify)");
  sub->add_flag("--fresh", cfg.fresh, "Draw a fresh random seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tempered subordinators, elastic Brownian motion and fractional boundary problems"};
  app.set_config("--config", "", "Config file (TOML/INI); command-line flags win");
  app.require_subcommand(1);
  RunConfig cfg;

  auto* sample = app.add_subcommand("sample", "Sample paths as CSV");
  add_common(sample, cfg);
  sample->add_option("--kind", cfg.kind, "subordinator | inverse | truncated-inverse | bm | bang-bang");
  sample->add_option("--sign", cfg.sign, "bang-bang drift sign: plus | minus");
  sample->add_option("--points", cfg.points, "Grid points for inverse paths");

  auto* solve = app.add_subcommand("solve", "u(t, x) on a grid");
  add_common(solve, cfg);
  solve->add_option("--source", cfg.source, "Monte Carlo random time: inverse | maximum");

  auto* relax = app.add_subcommand("relax", "Relaxation curve r(t)");
  add_common(relax, cfg);
  relax->add_option("--a", cfg.a, "Relaxation rate a >= 0");
  relax->add_option("--b", cfg.b, "Source b >= 0");
  relax->add_option("--c", cfg.c, "Initial value, 0 or 1");

  auto* verify = app.add_subcommand("verify", "Run verification suites");
  add_common(verify, cfg);
  verify->add_option("suite", cfg.suite, "all | thm-pos | thm-neg | local-time | functional | identities");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (cfg.threads == 0) throw ConfigError("--threads must be >= 1");
    if (*sample) return cmd_sample(cfg);
    if (*solve) return cmd_solve(cfg);
    if (*relax) return cmd_relax(cfg);
    return cmd_verify(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  }
}
