#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "levykac/clt.hpp"
#include "levykac/convolution.hpp"
#include "levykac/densities.hpp"
#include "levykac/errors.hpp"
#include "levykac/kac_sphere.hpp"
#include "levykac/stable.hpp"

#ifndef LEVYKAC_VERSION
#define LEVYKAC_VERSION "unknown"
#endif

namespace levykac::cli {
namespace {

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string flag(bool b) { return b ? "1" : "0"; }

struct Table {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void write(std::ostream& os) const {
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
      os << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
  }
};

struct Config {
  std::string model = "quartic";
  std::vector<int> n_values;
  int grid_pow = 11;
  double tau = 0.1;
  std::string out_dir;
  int threads = 1;
  bool force = false;
  std::string command_line;
};

// Runs body(i) for i < count on up to `threads` threads. Failures are
// rethrown in index order, so the reported error does not depend on timing.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int t = static_cast<int>(std::min<std::size_t>(std::max(threads, 1), std::max<std::size_t>(count, 1)));
  std::vector<std::thread> pool;
  for (int k = 1; k < t; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void emit(const std::vector<Table>& tables, const Config& cfg, std::ostream& out) {
  if (cfg.out_dir.empty()) {
    for (std::size_t i = 0; i < tables.size(); ++i) {
      if (i) out << '\n';
      tables[i].write(out);
    }
    return;
  }
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  require(!ec && fs::is_directory(cfg.out_dir), "cannot create output directory " + cfg.out_dir);
  for (const auto& t : tables) {
    const fs::path path = fs::path(cfg.out_dir) / (t.name + ".csv");
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(f), "cannot write " + path.string());
    t.write(f);
    // Run metadata lives beside the data so the CSV bytes stay reproducible.
    std::ofstream m(path.string() + ".meta", std::ios::binary | std::ios::trunc);
    m << "command = " << cfg.command_line << '\n'
      << "version = " << LEVYKAC_VERSION << '\n'
      << "threads = " << cfg.threads << '\n'
      << "created = " << utc_now() << '\n';
  }
}

void check_config(const Config& cfg, bool needs_n) {
  if (needs_n) require(!cfg.n_values.empty(), "--n needs at least one value");
  require(cfg.grid_pow >= 9 && cfg.grid_pow <= 22, "--grid-pow must lie in [9, 22]");
  require(cfg.tau > 0.0, "--tau must be positive");
  require(cfg.threads >= 1, "--threads must be at least 1");
}

StableParams fitted_params(const DensityModel& f, CosineConvention conv = CosineConvention::Absolute) {
  require(f.generator().analytic_tail().has_value(), "model " + f.name() + " has no algebraic tail");
  const auto tl = estimate_tail_law(h_of(f), 1e4, 1e8);
  return exponent_from_tail({tl.C_S, tl.alpha, tl.p, tl.q}, conv);
}

std::vector<std::string> clt_row(const ConvergenceRecord& r) {
  return {std::to_string(r.N), num(r.sup_err), num(r.gamma0_ratio), num(r.xi_max), num(r.beta_N), flag(r.trusted)};
}

std::vector<std::string> chaos_row(const ChaosReport& r) {
  return {std::to_string(r.N),           num(r.l1_gap_k1), num(r.l1_gap_k2),       num(r.entropy_per_particle),
          num(r.entropy_target),         num(r.w1_first_marginal), num(r.pinsker_margin)};
}

const std::vector<std::string> kCltHeader{"N", "sup_err", "gamma0_ratio", "xi_max", "beta_N", "trusted"};
const std::vector<std::string> kChaosHeader{"N", "l1_k1", "l1_k2", "entropy_pp", "entropy_target", "w1", "pinsker_margin"};
const std::vector<double> kFdaBetas{1.0, 0.3, 0.1, 0.03};

Table density_info(const Config& cfg) {
  const auto f = parse_model(cfg.model);
  const auto m = moments(f);
  Table t{"density-info", {"quantity", "value"}, {}};
  t.rows.push_back({"name", f.name()});
  t.rows.push_back({"mass", num(m.mass)});
  t.rows.push_back({"mean", num(m.mean)});
  t.rows.push_back({"second_moment", num(m.second_moment)});
  t.rows.push_back({"fourth_moment", num(m.fourth_moment)});
  t.rows.push_back({"E", num(m.E)});
  if (f.unit_energy()) t.rows.push_back({"entropy_target", num(entropy_target(f))});
  if (f.has_derivative()) t.rows.push_back({"fisher_relative", num(fisher_relative(f))});
  if (f.analytic_tail()) {
    const auto tl = estimate_tail_law(h_of(f), 1e4, 1e8);
    const auto p = exponent_from_tail({tl.C_S, tl.alpha, tl.p, tl.q});
    t.rows.push_back({"tail_alpha", num(tl.alpha)});
    t.rows.push_back({"tail_C_S", num(tl.C_S)});
    t.rows.push_back({"stable_sigma", num(p.sigma)});
    t.rows.push_back({"stable_beta", num(p.beta)});
  }
  return t;
}

Table stable_table(const StableParams& p, const std::vector<double>& xs) {
  validate(p);
  Table t{"stable-density", {"x", "density"}, {}};
  for (double x : xs) t.rows.push_back({num(x), num(stable_density(p, x))});
  return t;
}

Table clt_table(const Config& cfg, CosineConvention conv) {
  check_config(cfg, true);
  const auto f = parse_model(cfg.model);
  const auto p = fitted_params(f, conv);
  std::vector<ConvergenceRecord> recs(cfg.n_values.size());
  parallel_for(recs.size(), cfg.threads, [&](std::size_t i) {
    recs[i] = clt_sup_error(f, cfg.n_values[i], p, {.tau = cfg.tau, .grid_pow = cfg.grid_pow, .force = cfg.force});
  });
  Table t{"clt", kCltHeader, {}};
  for (const auto& r : recs) t.rows.push_back(clt_row(r));
  return t;
}

Table chaos_table(const Config& cfg) {
  check_config(cfg, true);
  const auto f = parse_model(cfg.model);
  std::vector<ChaosReport> reps(cfg.n_values.size());
  parallel_for(reps.size(), cfg.threads,
               [&](std::size_t i) { reps[i] = chaos_report(SphereLaw(f, cfg.n_values[i], cfg.force)); });
  Table t{"chaos", kChaosHeader, {}};
  for (const auto& r : reps) t.rows.push_back(chaos_row(r));
  return t;
}

Table marginal_table(const Config& cfg, std::vector<double> vs) {
  check_config(cfg, true);
  const auto f = parse_model(cfg.model);
  if (vs.empty())
    for (int i = 0; i <= 240; ++i) vs.push_back(-6.0 + 0.05 * i);
  std::vector<std::vector<double>> vals(cfg.n_values.size());
  parallel_for(vals.size(), cfg.threads,
               [&](std::size_t i) { vals[i] = SphereLaw(f, cfg.n_values[i], cfg.force).first_marginal(vs); });
  Table t{"marginal", {"N", "v", "pi1", "f"}, {}};
  for (std::size_t i = 0; i < vals.size(); ++i)
    for (std::size_t j = 0; j < vs.size(); ++j)
      t.rows.push_back({std::to_string(cfg.n_values[i]), num(vs[j]), num(vals[i][j]), num(f.pdf(vs[j]))});
  return t;
}

Table highfreq_table(const Config& cfg, const std::vector<double>& betas) {
  check_config(cfg, false);
  const auto f = parse_model(cfg.model);
  const double beta0 = f.analytic_tail() ? lowfreq_envelope(h_of(f), fitted_params(f)) : std::nan("");
  std::vector<double> eta(betas.size());
  parallel_for(betas.size(), cfg.threads, [&](std::size_t i) { eta[i] = highfreq_gap(h_of(f), betas[i]); });
  Table t{"highfreq", {"beta", "eta", "beta0"}, {}};
  for (std::size_t i = 0; i < betas.size(); ++i) t.rows.push_back({num(betas[i]), num(eta[i]), num(beta0)});
  return t;
}

Table fda_table(const Config& cfg, const std::vector<double>& betas, double sigma_scale) {
  check_config(cfg, false);
  require(sigma_scale > 0.0, "--sigma-scale must be positive");
  const auto f = parse_model(cfg.model);
  auto p = fitted_params(f);
  p.sigma *= sigma_scale;
  std::vector<double> w(betas.size());
  parallel_for(betas.size(), cfg.threads, [&](std::size_t i) { w[i] = omega(f, p, betas[i]).omega; });
  Table t{"fda", {"beta", "omega"}, {}};
  for (std::size_t i = 0; i < betas.size(); ++i) t.rows.push_back({num(betas[i]), num(w[i])});
  return t;
}

Table cross_entropy_table(const Config& cfg, const std::string& base) {
  check_config(cfg, true);
  const auto g = parse_model(cfg.model);
  const auto f = parse_model(base);
  std::vector<CrossEntropy> res(cfg.n_values.size());
  parallel_for(res.size(), cfg.threads,
               [&](std::size_t i) { res[i] = cross_entropy_per_particle(g, f, cfg.n_values[i], cfg.force); });
  Table t{"cross-entropy", {"N", "value", "target"}, {}};
  for (std::size_t i = 0; i < res.size(); ++i)
    t.rows.push_back({std::to_string(cfg.n_values[i]), num(res[i].value), num(res[i].target)});
  return t;
}

template <class T, class F>
bool strictly_decreasing(const std::vector<T>& xs, F key) {
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (!(key(xs[i]) < key(xs[i - 1]))) return false;
  return true;
}

std::vector<Table> sweep(const Config& cfg) {
  check_config(cfg, true);
  const auto f = parse_model(cfg.model);
  const auto p = fitted_params(f);
  const std::size_t n = cfg.n_values.size();
  std::vector<ConvergenceRecord> recs(n);
  std::vector<ChaosReport> reps(n);
  std::vector<double> w(kFdaBetas.size());
  // Rows are recorded even when untrusted; the status column flags them.
  parallel_for(2 * n + w.size(), cfg.threads, [&](std::size_t i) {
    if (i < n) {
      recs[i] = clt_sup_error(f, cfg.n_values[i], p, {.tau = cfg.tau, .grid_pow = cfg.grid_pow, .force = true});
    } else if (i < 2 * n) {
      reps[i - n] = chaos_report(SphereLaw(f, cfg.n_values[i - n], true));
    } else {
      w[i - 2 * n] = omega(f, p, kFdaBetas[i - 2 * n]).omega;
    }
  });

  Table summary{"sweep", kCltHeader, {}};
  for (std::size_t k = 1; k < kChaosHeader.size(); ++k) summary.header.push_back(kChaosHeader[k]);
  summary.header.push_back("status");
  for (std::size_t i = 0; i < n; ++i) {
    auto row = clt_row(recs[i]);
    const auto c = chaos_row(reps[i]);
    row.insert(row.end(), c.begin() + 1, c.end());
    row.push_back(recs[i].trusted && reps[i].trusted ? "PASS" : "FAIL");
    summary.rows.push_back(std::move(row));
  }

  Table fda{"sweep-fda", {"beta", "omega"}, {}};
  for (std::size_t i = 0; i < w.size(); ++i) fda.rows.push_back({num(kFdaBetas[i]), num(w[i])});

  // Acceptance flags over the N values present; SKIP when a check has nothing to look at.
  auto at = [&](int N) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < n; ++i)
      if (cfg.n_values[i] == N) return i;
    return std::nullopt;
  };
  Table flags{"sweep-flags", {"criterion", "status"}, {}};
  auto add = [&](const std::string& name, bool applicable, bool ok) {
    flags.rows.push_back({name, applicable ? (ok ? "PASS" : "FAIL") : "SKIP"});
  };
  const bool all_trusted = std::all_of(recs.begin(), recs.end(), [](const auto& r) { return r.trusted; });
  {
    bool ok = all_trusted && strictly_decreasing(recs, [](const auto& r) { return r.sup_err; });
    if (auto i = at(1024)) ok = ok && recs[*i].sup_err < 0.05;
    add("A4", n >= 2, ok);
  }
  {
    const auto i = at(1024);
    add("A5", i.has_value(), i && recs[*i].trusted && recs[*i].gamma0_ratio >= 0.95 && recs[*i].gamma0_ratio <= 1.05);
  }
  {
    std::vector<ChaosReport> big;
    for (const auto& r : reps)
      if (r.N >= 64) big.push_back(r);
    auto gap = [](const ChaosReport& r) { return std::abs(r.entropy_per_particle - r.entropy_target); };
    bool ok = strictly_decreasing(big, gap);
    if (auto i = at(1024)) ok = ok && gap(reps[*i]) < 0.02;
    add("A6", big.size() >= 2 || at(1024).has_value(), ok);
  }
  {
    bool ok = strictly_decreasing(reps, [](const auto& r) { return r.l1_gap_k1; });
    if (auto i = at(1024)) ok = ok && reps[*i].l1_gap_k1 < 0.02;
    if (auto i = at(256)) ok = ok && reps[*i].l1_gap_k2 < 0.05;
    add("A7", n >= 2 || at(256).has_value(), ok);
  }
  add("A9", true, strictly_decreasing(w, [](double x) { return x; }));
  return {summary, fda, flags};
}

std::vector<int> sorted_unique(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::string join_args(int argc, const char* const* argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) s += (i ? " " : "") + std::string(argv[i]);
  return s;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stable laws, convolution powers and chaos diagnostics on Kac's sphere", "levykac"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from a file of key = value lines");

  Config cfg;
  std::string cosine = "absolute";
  app.add_option("--model", cfg.model, "Generating density, e.g. quartic, gauss, power-tail(1.5)");
  app.add_option("--n", cfg.n_values, "Particle counts, comma separated")->delimiter(',');
  app.add_option("--grid-pow", cfg.grid_pow, "log2 of the sup-norm grid size");
  app.add_option("--tau", cfg.tau, "Cutoff exponent");
  app.add_option("--out", cfg.out_dir, "Directory for CSV files (default: standard output)");
  auto* threads = app.add_option("--threads", cfg.threads, "Worker threads (env LEVY_KAC_THREADS)");
  app.add_flag("--force-cutoff", cfg.force, "Accept untrusted frequency cutoffs and mark the rows");

  auto* info = app.add_subcommand("density-info", "Moments, entropy and tail data of a model");

  StableParams sp{1.0, 1.5, 0.0};
  std::vector<double> xs{0.0};
  auto* stable = app.add_subcommand("stable-density", "Stable density values");
  stable->add_option("--alpha", sp.alpha, "Index in (1, 2)");
  stable->add_option("--sigma", sp.sigma, "Scale");
  stable->add_option("--beta", sp.beta, "Skewness in [-1, 1]");
  stable->add_option("--x", xs, "Points, comma separated")->delimiter(',');

  auto* clt = app.add_subcommand("clt", "Local limit theorem error for each N");
  clt->add_option("--cosine", cosine, "Cosine convention for sigma")->check(CLI::IsMember({"absolute", "literal"}));

  std::vector<double> vs;
  auto* marginal = app.add_subcommand("marginal", "First marginal on the sphere against f");
  marginal->add_option("--v", vs, "Points, comma separated (default: [-6, 6] step 0.05)")->delimiter(',');

  auto* chaos = app.add_subcommand("chaos", "Marginal distances, entropy per particle and transport");

  std::vector<double> hf_betas{0.5};
  auto* highfreq = app.add_subcommand("highfreq", "High-frequency gap and low-frequency envelope");
  highfreq->add_option("--beta", hf_betas, "Lower ends of the frequency range")->delimiter(',');

  std::vector<double> fda_betas = kFdaBetas;
  double sigma_scale = 1.0;
  auto* fda = app.add_subcommand("fda", "Modulus of the remainder against the stable exponent");
  fda->add_option("--beta", fda_betas, "Radii, comma separated")->delimiter(',');
  fda->add_option("--sigma-scale", sigma_scale, "Multiply the fitted sigma (2 gives the doubled control)");

  std::string base = "gauss";
  auto* cross = app.add_subcommand("cross-entropy", "Relative entropy per particle between sphere laws");
  cross->add_option("--base", base, "Reference model");

  auto* sweep_cmd = app.add_subcommand("sweep", "clt, chaos and fda over all N with acceptance flags");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kOk;
    }
    err << "error: " << e.what() << "\n\n" << app.help();
    return kPrecondition;
  }

  if (threads->count() == 0) {
    if (const char* env = std::getenv("LEVY_KAC_THREADS")) {
      try {
        cfg.threads = std::stoi(env);
      } catch (const std::exception&) {
        err << "error: LEVY_KAC_THREADS must be an integer\n";
        return kPrecondition;
      }
    }
  }
  cfg.n_values = sorted_unique(cfg.n_values);
  cfg.command_line = join_args(argc, argv);

  try {
    std::vector<Table> tables;
    if (info->parsed()) {
      tables.push_back(density_info(cfg));
    } else if (stable->parsed()) {
      tables.push_back(stable_table(sp, xs));
    } else if (clt->parsed()) {
      tables.push_back(clt_table(cfg, cosine == "literal" ? CosineConvention::Literal : CosineConvention::Absolute));
    } else if (marginal->parsed()) {
      tables.push_back(marginal_table(cfg, vs));
    } else if (chaos->parsed()) {
      tables.push_back(chaos_table(cfg));
    } else if (highfreq->parsed()) {
      tables.push_back(highfreq_table(cfg, hf_betas));
    } else if (fda->parsed()) {
      tables.push_back(fda_table(cfg, fda_betas, sigma_scale));
    } else if (cross->parsed()) {
      tables.push_back(cross_entropy_table(cfg, base));
    } else if (sweep_cmd->parsed()) {
      tables = sweep(cfg);
    }
    emit(tables, cfg, out);
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << '\n';
    return kPrecondition;
  } catch (const CertificationError& e) {
    err << "certification failed: " << e.what() << " (residual " << num(e.residual()) << ")\n";
    return kCertification;
  }
  return kOk;
}

}  // namespace levykac::cli
