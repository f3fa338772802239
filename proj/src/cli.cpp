#include "sps/cli.hpp"

#include "sps/diagnostics.hpp"
#include "sps/record_io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <ostream>
#include <variant>

namespace sps {

namespace fs = std::filesystem;

std::vector<std::pair<std::string, std::string>>
parse_config_file(const std::string &path) {
  std::ifstream is(path);
  if (!is)
    throw ConfigError("cannot open config file " + path);
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#')
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

namespace {

std::string num(double v, const char *format = "%.10g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

std::string sci(double v) { return num(v, "%.3e"); }

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void print(std::ostream &os) const {
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c)
      width[c] = header[c].size();
    for (const auto &r : rows)
      for (std::size_t c = 0; c < r.size() && c < width.size(); ++c)
        width[c] = std::max(width[c], r[c].size());
    auto line = [&](const std::vector<std::string> &cells) {
      for (std::size_t c = 0; c < cells.size(); ++c) {
        os << cells[c];
        if (c + 1 < cells.size())
          os << std::string(width[c] - cells[c].size() + 2, ' ');
      }
      os << '\n';
    };
    line(header);
    std::vector<std::string> rule;
    for (auto w : width)
      rule.push_back(std::string(w, '-'));
    line(rule);
    for (const auto &r : rows)
      line(r);
  }
};

void print_breakdown(std::ostream &os, const SolutionRecord &rec) {
  const auto &e = rec.breakdown;
  Table t{{"quantity", "value"}, {}};
  t.rows = {{"p", num(rec.p)},
            {"mu", num(rec.mu)},
            {"nodes", std::to_string(rec.node_count)},
            {"A = int |grad u|^2", num(e.A)},
            {"B = int phi u^2", num(e.B)},
            {"C = int |u|^{p+1}", num(e.C)},
            {"I_mu", num(e.I)},
            {"J", num(e.J)},
            {"M = A + B", num(e.M)},
            {"E-norm", num(e.normE)},
            {"b level", num(rec.b_level)},
            {"gradient residual", sci(rec.residuals.gradient)},
            {"Nehari (normalized)", sci(rec.residuals.nehari_normalized)},
            {"Pohozaev (normalized)", sci(rec.residuals.pohozaev_normalized)},
            {"tail magnitude", sci(rec.residuals.tail_magnitude)},
            {"method", rec.method},
            {"iterations", std::to_string(rec.iterations)}};
  t.print(os);
}

void print_report(std::ostream &os, const DiagnosticsReport &rep) {
  Table t{{"check", "value", "tolerance", "result", "identity"}, {}};
  for (const auto &c : rep.checks)
    t.rows.push_back({c.name, sci(c.value), sci(c.tolerance),
                      c.pass ? "pass" : "FAIL", c.identity});
  t.print(os);
  os << "overall: " << (rep.overall() ? "pass" : "FAIL") << '\n';
}

/// Identity and comparison checks, plus the decay fit for p > 2.
DiagnosticsReport full_report(const SolutionRecord &rec, std::ostream &os) {
  DiagnosticsReport rep = identity_report(rec);
  rep.append(comparison_checks(rec));
  if (rec.p >= 2.0 && rec.u.max_abs() > 0.0) {
    try {
      const DecayFit fit = decay_fit(rec);
      os << "decay fit: C1 = " << num(fit.C1) << ", C2 = " << num(fit.C2)
         << ", r^2 = " << num(fit.r_squared, "%.8f") << " over "
         << fit.nodes_used << " nodes"
         << (rec.p == 2.0 ? " (not enforced at p = 2)" : "") << '\n';
      if (rec.p > 2.0)
        rep.checks.push_back({"decay fit", fit.r_squared, 0.99, !fit.flagged,
                              "|u| <= C1 r^{-3/4} exp(-C2 sqrt r)"});
    } catch (const WindowError &e) {
      os << "decay fit: " << e.what() << '\n';
      if (rec.p > 2.0)
        rep.checks.push_back({"decay fit", 0.0, 0.99, false,
                              "|u| <= C1 r^{-3/4} exp(-C2 sqrt r)"});
    }
  }
  return rep;
}

void print_residuals(std::ostream &os, const SolutionRecord &rec) {
  const auto &r = rec.residuals;
  os << "best iterate: gradient " << sci(r.gradient) << ", Nehari "
     << sci(r.nehari_normalized) << ", Pohozaev " << sci(r.pohozaev_normalized)
     << ", tail " << sci(r.tail_magnitude) << ", nodes " << rec.node_count
     << '\n';
}

struct Options {
  double p = 3.0;
  double mu = 1.0;
  int k = 0;
  int kmax = 3;
  GridSpec grid;
  double seed_width = SeedOptions{}.width;
  std::string out;
  std::string record;
  double lambda = 0.0;

  SolverConfig config() const {
    SolverConfig c;
    c.p = p;
    c.mu_target = mu;
    c.grid = grid;
    c.seed.width = seed_width;
    c.seed.node_count = k;
    return c;
  }

  fs::path out_dir() const {
    if (!out.empty())
      return out;
    if (const char *env = std::getenv("SPS_OUT_DIR"); env && *env)
      return env;
    return ".";
  }

  ConfigEcho echo(const std::string &command) const {
    return {{"command", command},
            {"p", num(p, "%.17g")},
            {"mu", num(mu, "%.17g")},
            {"k", std::to_string(k)},
            {"n", std::to_string(grid.n)},
            {"rmax", num(grid.r_max, "%.17g")},
            {"gamma", num(grid.gamma, "%.17g")},
            {"seed-width", num(seed_width, "%.17g")}};
  }
};

std::string tag(double v) { return num(v, "%g"); }

void add_grid(CLI::App *cmd, Options &o) {
  cmd->add_option("--n", o.grid.n, "grid intervals")->capture_default_str();
  cmd->add_option("--rmax", o.grid.r_max, "outer radius")
      ->capture_default_str();
  cmd->add_option("--gamma", o.grid.gamma, "grading exponent")
      ->capture_default_str();
  cmd->add_option("--seed-width", o.seed_width, "seed Gaussian width")
      ->capture_default_str();
  cmd->add_option("--out", o.out, "output directory");
}

int emit_record(std::ostream &out, const Options &o, const std::string &stem,
                const SolutionRecord &rec, const std::string &command) {
  const fs::path dir = o.out_dir();
  const fs::path json = dir / (stem + ".json");
  const fs::path csv = dir / (stem + ".csv");
  write_record(json, rec, o.echo(command));
  write_profile(csv, rec);
  out << "wrote " << json.string() << " and " << csv.string() << '\n';
  return 0;
}

int cmd_solve(const Options &o, std::ostream &out, std::ostream &err) {
  if (o.p >= 5.0) {
    err << "error: p >= 5 admits no nontrivial solution; use `probe` to "
           "observe the degenerate flow\n";
    return exit_usage;
  }
  if (o.p == 2.0) {
    err << "error: at p = 2 the multiplier cannot be prescribed; use the "
           "`p2` command\n";
    return exit_usage;
  }
  if (!(o.p > 2.0)) {
    err << "error: solve supports p in (2, 5)\n";
    return exit_usage;
  }
  if (o.k < 0) {
    err << "error: --k must be >= 0\n";
    return exit_usage;
  }
  const SolverConfig cfg = o.config();
  SolutionRecord rec;
  int code = exit_pass;
  try {
    if (o.k == 0) {
      rec = ground_state(cfg);
    } else {
      rec = lagrange_rescale(bound_state(cfg, o.k), o.mu, cfg);
    }
  } catch (const VerificationError &e) {
    err << "verification failed: " << e.what() << '\n';
    rec = e.record();
    code = exit_diagnostics;
  }
  print_breakdown(out, rec);
  out << '\n';
  const DiagnosticsReport rep = full_report(rec, out);
  print_report(out, rep);
  emit_record(out, o,
              "solve_p" + tag(o.p) + "_mu" + tag(o.mu) + "_k" +
                  std::to_string(o.k),
              rec, "solve");
  if (!rep.overall())
    code = exit_diagnostics;
  return code;
}

struct Row {
  int k = 0;
  std::variant<SolutionRecord, std::string> result;
};

int cmd_spectrum(const Options &o, std::ostream &out, std::ostream &err) {
  if (!(o.p >= 2.0 && o.p < 5.0)) {
    err << "error: spectrum supports p in [2, 5)\n";
    return exit_usage;
  }
  if (o.kmax < 0) {
    err << "error: --kmax must be >= 0\n";
    return exit_usage;
  }
  // rows are independent solves; no deflation list is shared between them
  std::vector<std::future<Row>> jobs;
  for (int k = 0; k <= o.kmax; ++k) {
    Options row = o;
    row.k = k;
    jobs.push_back(std::async(std::launch::async, [row, k] {
      Row r;
      r.k = k;
      try {
        r.result = bound_state(row.config(), k);
      } catch (const NonConvergence &e) {
        r.result = std::string("no convergence (gradient ") +
                   sci(e.best().residuals.gradient) + ")";
      } catch (const WrongBranch &e) {
        r.result = "wrong branch: " + std::to_string(e.record().node_count) +
                   " nodes";
      } catch (const Error &e) {
        r.result = std::string(e.what());
      }
      return r;
    }));
  }

  const bool p2 = o.p == 2.0;
  Table t{{"k", "nodes", "b_k", "mu_k", "mu_k/b_k", "gradient", "Nehari",
           "Pohozaev", "checks"},
          {}};
  if (p2)
    t.header.insert(t.header.end() - 1, "mu_k - 2");
  std::string csv = "k,nodes,b_k,mu_k,mu_over_b,gradient,nehari,pohozaev\n";
  bool failed = false, checks_ok = true, monotone = true;
  double last_b = -1.0;
  for (auto &job : jobs) {
    Row r = job.get();
    if (auto *msg = std::get_if<std::string>(&r.result)) {
      failed = true;
      std::vector<std::string> cells(t.header.size(), "-");
      cells[0] = std::to_string(r.k);
      cells.back() = *msg;
      t.rows.push_back(std::move(cells));
      continue;
    }
    const auto &rec = std::get<SolutionRecord>(r.result);
    const bool pass = identity_report(rec).overall() &&
                      comparison_checks(rec).overall() &&
                      (!p2 || rec.mu >= 2.0);
    checks_ok = checks_ok && pass;
    if (rec.b_level < last_b)
      monotone = false;
    last_b = rec.b_level;
    std::vector<std::string> cells{std::to_string(r.k),
                                   std::to_string(rec.node_count),
                                   num(rec.b_level),
                                   num(rec.mu),
                                   num(rec.mu / rec.b_level, "%.8f"),
                                   sci(rec.residuals.gradient),
                                   sci(rec.residuals.nehari_normalized),
                                   sci(rec.residuals.pohozaev_normalized),
                                   pass ? "pass" : "FAIL"};
    if (p2)
      cells.insert(cells.end() - 1, sci(rec.mu - 2.0));
    t.rows.push_back(std::move(cells));
    csv += std::to_string(r.k) + "," + std::to_string(rec.node_count) + "," +
           num(rec.b_level, "%.17g") + "," + num(rec.mu, "%.17g") + "," +
           num(rec.mu / rec.b_level, "%.17g") + "," +
           num(rec.residuals.gradient, "%.17g") + "," +
           num(rec.residuals.nehari_normalized, "%.17g") + "," +
           num(rec.residuals.pohozaev_normalized, "%.17g") + "\n";
    const fs::path file = o.out_dir() / ("spectrum_p" + tag(o.p) + "_k" +
                                         std::to_string(r.k) + ".json");
    Options echo = o;
    echo.k = r.k;
    write_record(file, rec, echo.echo("spectrum"));
  }
  t.print(out);
  out << "b_k nondecreasing: " << (monotone ? "yes" : "NO") << '\n';
  const fs::path csv_path = o.out_dir() / ("spectrum_p" + tag(o.p) + ".csv");
  write_atomic(csv_path, csv);
  out << "wrote " << csv_path.string() << '\n';
  if (failed)
    return exit_nonconvergence;
  return monotone && checks_ok ? exit_pass : exit_diagnostics;
}

int cmd_p2(const Options &o, std::ostream &out, std::ostream &err) {
  if (o.k < 0) {
    err << "error: --k must be >= 0\n";
    return exit_usage;
  }
  SolverConfig cfg = o.config();
  cfg.p = 2.0;
  const P2Eigen eig = p2_eigen(cfg, o.k);
  print_breakdown(out, eig.record);
  out << "\nmu_k = " << num(eig.mu) << ", margin mu_k - 2 = " << num(eig.margin)
      << ", mu_k / b_k = " << num(eig.mu_over_b, "%.8f")
      << ", |I| / M = " << sci(eig.zero_energy) << "\n\n";
  DiagnosticsReport rep = full_report(eig.record, out);
  rep.checks.push_back({"mu_k >= 2", eig.margin, 0.0, eig.margin >= 0.0,
                        "no nontrivial solution for mu < 2"});
  print_report(out, rep);
  Options echo = o;
  echo.p = 2.0;
  const std::string stem = "p2_k" + std::to_string(o.k);
  emit_record(out, echo, stem, eig.record, "p2");
  int code = rep.overall() ? exit_pass : exit_diagnostics;
  if (o.lambda != 0.0) {
    try {
      const SolutionRecord member = p2_family_member(eig.record, o.lambda);
      out << "family member lambda = " << num(o.lambda) << ": gradient "
          << sci(member.residuals.gradient) << ", Nehari "
          << sci(member.residuals.nehari_normalized) << ", Pohozaev "
          << sci(member.residuals.pohozaev_normalized) << ", mu "
          << num(member.mu) << '\n';
      emit_record(out, echo, stem + "_lambda" + tag(o.lambda), member, "p2");
    } catch (const VerificationError &e) {
      err << "family member failed: " << e.what() << '\n';
      print_residuals(err, e.record());
      code = exit_diagnostics;
    }
  }
  return code;
}

int cmd_diagnose(const Options &o, std::ostream &out, std::ostream &) {
  const StoredRecord stored = read_record(o.record);
  const SolutionRecord &s = stored.record;
  if (!stored.hash_ok)
    out << "note: stored hash does not match the file content\n";
  const SolutionRecord rec =
      make_record(s.u, s.p, s.mu, s.method, s.iterations, s.on_manifold,
                  s.grad_tol);
  print_breakdown(out, rec);
  out << '\n';
  const DiagnosticsReport rep = full_report(rec, out);
  print_report(out, rep);
  return rep.overall() ? exit_pass : exit_diagnostics;
}

int cmd_probe(const Options &o, std::ostream &out, std::ostream &) {
  const ProbeReport rep = nonexistence_probe(o.p, o.mu, o.config());
  Table t{{"quantity", "initial", "final"}, {}};
  t.rows = {{"M = A + B", num(rep.M_initial), num(rep.M_final)},
            {"C = int |u|^{p+1}", num(rep.C_initial), num(rep.C_final)},
            {"max |u|", num(rep.max_initial), num(rep.max_final)}};
  out << "probe p = " << num(rep.p) << ", mu = " << num(rep.mu) << '\n';
  t.print(out);
  out << "I_mu at exit: " << num(rep.I_final) << '\n'
      << "outcome: " << rep.outcome << " after " << rep.iterations
      << " iterations" << (rep.degenerate() ? " (degenerate flow)" : "")
      << '\n'
      << "accepted record: " << (rep.accepted_record ? "YES" : "none") << '\n';
  return rep.accepted_record ? exit_diagnostics : exit_pass;
}

int cmd_rescale(const Options &o, std::ostream &out, std::ostream &) {
  const StoredRecord stored = read_record(o.record);
  SolverConfig cfg;
  cfg.p = stored.record.p;
  const SolutionRecord rec = lagrange_rescale(stored.record, o.mu, cfg);
  print_breakdown(out, rec);
  out << '\n';
  const DiagnosticsReport rep = full_report(rec, out);
  print_report(out, rep);
  const fs::path src(o.record);
  const fs::path dir = o.out.empty() && !std::getenv("SPS_OUT_DIR")
                           ? src.parent_path()
                           : o.out_dir();
  const fs::path file =
      dir / (src.stem().string() + "_mu" + tag(o.mu) + ".json");
  ConfigEcho echo = stored.config;
  echo["command"] = "rescale";
  echo["mu"] = num(o.mu, "%.17g");
  write_record(file, rec, echo);
  out << "wrote " << file.string() << '\n';
  return rep.overall() ? exit_pass : exit_diagnostics;
}

int cmd_export(const Options &o, std::ostream &out, std::ostream &) {
  const StoredRecord stored = read_record(o.record);
  const fs::path src(o.record);
  const fs::path dir = o.out.empty() && !std::getenv("SPS_OUT_DIR")
                           ? src.parent_path()
                           : o.out_dir();
  const fs::path file = dir / (src.stem().string() + ".csv");
  write_profile(file, stored.record);
  out << "wrote " << file.string() << '\n';
  return exit_pass;
}

/// Inserts `--key value` pairs from --config FILE right after the command
/// name, so flags given on the command line take precedence.
std::vector<std::string> expand_config(const std::vector<std::string> &args) {
  std::vector<std::string> out;
  std::vector<std::string> from_file;
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string file;
    if (args[i] == "--config" && i + 1 < args.size())
      file = args[++i];
    else if (args[i].rfind("--config=", 0) == 0)
      file = args[i].substr(9);
    else {
      out.push_back(args[i]);
      continue;
    }
    for (const auto &[key, value] : parse_config_file(file)) {
      from_file.push_back("--" + key);
      from_file.push_back(value);
    }
  }
  if (!from_file.empty() && !out.empty())
    out.insert(out.begin() + 1, from_file.begin(), from_file.end());
  return out;
}

} // namespace

int run_cli(const std::vector<std::string> &raw, std::ostream &out,
            std::ostream &err) {
  CLI::App app{"Radial Schrodinger-Poisson-Slater solver", "sps"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_help_all_flag("--help-all");
  Options o;

  auto *solve = app.add_subcommand("solve", "solution at prescribed mu");
  solve->add_option("--p", o.p, "exponent")->capture_default_str();
  solve->add_option("--mu", o.mu, "coupling")->capture_default_str();
  solve->add_option("--k", o.k, "sign changes")->capture_default_str();
  add_grid(solve, o);

  auto *spectrum =
      app.add_subcommand("spectrum", "k-node levels on the constraint");
  spectrum->add_option("--p", o.p, "exponent")->capture_default_str();
  spectrum->add_option("--kmax", o.kmax, "largest node count")
      ->capture_default_str();
  add_grid(spectrum, o);

  auto *p2 = app.add_subcommand("p2", "p = 2 nonlinear eigenvalue mode");
  p2->add_option("--k", o.k, "sign changes")->capture_default_str();
  p2->add_option("--lambda", o.lambda, "also emit lambda^2 u(lambda x)");
  add_grid(p2, o);

  auto *diagnose = app.add_subcommand("diagnose", "re-verify a stored record");
  diagnose->add_option("--record", o.record, "record JSON")->required();

  auto *probe = app.add_subcommand("probe", "gradient flow where no solution "
                                            "exists");
  probe->add_option("--p", o.p, "exponent")->capture_default_str();
  probe->add_option("--mu", o.mu, "coupling")->capture_default_str();
  add_grid(probe, o);

  auto *rescale =
      app.add_subcommand("rescale", "move a record to another mu by dilation");
  rescale->add_option("--record", o.record, "record JSON")->required();
  rescale->add_option("--mu", o.mu, "target coupling")->required();
  rescale->add_option("--out", o.out, "output directory");

  auto *exp = app.add_subcommand("export", "profile CSV of a stored record");
  exp->add_option("--record", o.record, "record JSON")->required();
  exp->add_option("--out", o.out, "output directory");

  std::vector<std::string> args;
  try {
    args = expand_config(raw);
  } catch (const Error &e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  }
  // CLI11 consumes the vector from the back
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp &e) {
    out << app.help();
    return exit_pass;
  } catch (const CLI::CallForAllHelp &e) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_pass;
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return exit_usage;
  }

  try {
    if (*solve)
      return cmd_solve(o, out, err);
    if (*spectrum)
      return cmd_spectrum(o, out, err);
    if (*p2)
      return cmd_p2(o, out, err);
    if (*diagnose)
      return cmd_diagnose(o, out, err);
    if (*probe)
      return cmd_probe(o, out, err);
    if (*rescale)
      return cmd_rescale(o, out, err);
    if (*exp)
      return cmd_export(o, out, err);
  } catch (const NonConvergence &e) {
    err << "non-convergence: " << e.what() << '\n';
    print_residuals(err, e.best());
    return exit_nonconvergence;
  } catch (const WrongBranch &e) {
    err << "wrong branch: " << e.what() << '\n';
    print_residuals(err, e.record());
    return exit_nonconvergence;
  } catch (const VerificationError &e) {
    err << "verification failed: " << e.what() << '\n';
    print_residuals(err, e.record());
    return exit_diagnostics;
  } catch (const SchemaError &e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const InvarianceError &e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const Error &e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const fs::filesystem_error &e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  }
  return exit_usage;
}

} // namespace sps
