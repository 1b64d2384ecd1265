// Command-line front end: run simulations, verify stored fields against the
// structural checks, dump kernel tables, and sweep the kernel-regularisation
// ladder. Exit codes: 0 success, 1 verification failure, 2 usage or
// configuration error.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fnld/entropy.hpp"
#include "fnld/fraclap.hpp"
#include "fnld/io/config.hpp"
#include "fnld/io/csv.hpp"
#include "fnld/timestepper.hpp"
#include "fnld/volterra.hpp"

namespace {

using json = nlohmann::json;

struct Problem {
  fnld::KernelSpec kernel = fnld::KernelSpec::riemann_liouville(0.5);
  double alpha = 0.5;  // memory exponent as configured
  std::string kernel_name;
  double mu = 0.0;
  fnld::TimeGrid tgrid;
  fnld::SpaceGrid1D sgrid;
  double order = 0.5;  // spatial exponent
  std::string u0_profile, f_profile;
  double u0_amplitude = 1.0, f_amplitude = 0.0;
};

Eigen::VectorXd make_profile(const std::string& name, double amplitude,
                             const fnld::SpaceGrid1D& grid) {
  Eigen::VectorXd v(grid.N);
  const double c = 0.5 * (grid.a + grid.b);
  const double half = 0.5 * (grid.b - grid.a);
  for (int i = 0; i < grid.N; ++i) {
    const double xh = (grid.node(i) - c) / half;
    double base = 0.0;
    if (name == "hat") {
      base = std::max(0.0, 1.0 - 2.0 * std::fabs(xh));
    } else if (name == "dome") {
      base = 1.0 - xh * xh;
    } else if (name == "bump") {
      base = std::fabs(xh) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - xh * xh)) : 0.0;
    } else if (name == "spike") {
      // integrable power singularity, clipped at the grid scale
      base = std::min(std::pow(std::fabs(grid.node(i) - c), -0.5), std::pow(grid.h(), -0.5));
    } else if (name == "indicator") {
      base = std::fabs(xh) <= 0.5 ? 1.0 : 0.0;
    } else if (name == "constant") {
      base = 1.0;
    } else if (name == "zero" || name == "none") {
      base = 0.0;
    } else {
      throw std::invalid_argument(
          "unknown profile '" + name +
          "' (expected hat, dome, bump, spike, indicator, constant, zero, none)");
    }
    v[i] = amplitude * base;
  }
  return v;
}

Problem parse_problem(const fnld::io::Config& cfg) {
  Problem p;
  p.kernel_name = cfg.get_string("kernel");
  p.alpha = cfg.get_double("alpha");
  p.mu = cfg.get_double("mu", 0.0);
  if (p.kernel_name == "riemann_liouville") {
    p.kernel = fnld::KernelSpec::riemann_liouville(p.alpha);
  } else if (p.kernel_name == "exp_weighted") {
    p.kernel = fnld::KernelSpec::exp_weighted(p.alpha, p.mu);
  } else {
    throw std::invalid_argument("unknown kernel '" + p.kernel_name +
                                "' (expected riemann_liouville or exp_weighted)");
  }
  p.tgrid = fnld::TimeGrid{cfg.get_double("T"), cfg.get_int("steps")};
  p.sgrid = fnld::SpaceGrid1D{cfg.get_double("space_a"), cfg.get_double("space_b"),
                              cfg.get_int("space_N")};
  p.order = cfg.get_double("order");
  if (!(p.order > 0.0 && p.order < 1.0))
    throw std::invalid_argument("config: order must lie in (0,1)");
  p.u0_profile = cfg.get_string("u0_profile", "hat");
  p.u0_amplitude = cfg.get_double("u0_amplitude", 1.0);
  p.f_profile = cfg.get_string("f_profile", "none");
  p.f_amplitude = cfg.get_double("f_amplitude", 0.0);
  cfg.reject_unknown_keys();
  return p;
}

void write_problem(const Problem& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "kernel = " << p.kernel_name << '\n'
      << "alpha = " << fnld::io::format_double(p.alpha) << '\n'
      << "mu = " << fnld::io::format_double(p.mu) << '\n'
      << "T = " << fnld::io::format_double(p.tgrid.T) << '\n'
      << "steps = " << p.tgrid.n << '\n'
      << "space_a = " << fnld::io::format_double(p.sgrid.a) << '\n'
      << "space_b = " << fnld::io::format_double(p.sgrid.b) << '\n'
      << "space_N = " << p.sgrid.N << '\n'
      << "order = " << fnld::io::format_double(p.order) << '\n'
      << "u0_profile = " << p.u0_profile << '\n'
      << "u0_amplitude = " << fnld::io::format_double(p.u0_amplitude) << '\n'
      << "f_profile = " << p.f_profile << '\n'
      << "f_amplitude = " << fnld::io::format_double(p.f_amplitude) << '\n';
}

int cmd_simulate(const std::string& config_path, const std::string& outdir) {
  const Problem p = parse_problem(fnld::io::Config::from_file(config_path));
  std::filesystem::create_directories(outdir);

  const auto op = fnld::assemble_fraclap(p.order, p.sgrid);
  fnld::SchemeWeights w(p.kernel, p.tgrid);
  fnld::ProblemData data;
  data.u0 = make_profile(p.u0_profile, p.u0_amplitude, p.sgrid);
  if (p.f_profile != "none")
    data.f = make_profile(p.f_profile, p.f_amplitude, p.sgrid).replicate(1, p.tgrid.n);

  const auto sol = fnld::solve(w, op.A, data);
  fnld::io::write_matrix_csv(outdir + "/u.csv", sol.U);
  write_problem(p, outdir + "/problem.ini");

  json rep;
  rep["steps"] = p.tgrid.n;
  rep["nodes"] = p.sgrid.N;
  rep["mass_initial"] = p.sgrid.h() * sol.U.col(0).sum();
  rep["mass_final"] = p.sgrid.h() * sol.U.col(p.tgrid.n).sum();
  rep["min"] = sol.U.minCoeff();
  rep["max"] = sol.U.maxCoeff();
  double worst = 0.0;
  for (double r : sol.step_residual) worst = std::max(worst, r);
  rep["worst_step_residual"] = worst;
  std::ofstream(outdir + "/run.json") << rep.dump(2) << '\n';

  std::printf("wrote %s/u.csv (%d x %d)\n", outdir.c_str(), p.sgrid.N, p.tgrid.n + 1);
  return 0;
}

int cmd_verify(const std::string& dir, bool corrupt) {
  const Problem p = parse_problem(fnld::io::Config::from_file(dir + "/problem.ini"));
  Eigen::MatrixXd U = fnld::io::read_matrix_csv(dir + "/u.csv");

  const auto op = fnld::assemble_fraclap(p.order, p.sgrid);
  fnld::SchemeWeights w(p.kernel, p.tgrid);
  const Eigen::VectorXd u0 = make_profile(p.u0_profile, p.u0_amplitude, p.sgrid);
  Eigen::MatrixXd f;
  if (p.f_profile != "none")
    f = make_profile(p.f_profile, p.f_amplitude, p.sgrid).replicate(1, p.tgrid.n);

  json rep;
  bool ok = true;
  auto record = [&](const std::string& name, bool pass, double value) {
    rep["checks"][name] = {{"pass", pass}, {"value", value}};
    std::printf("%-22s %s  (%.3e)\n", name.c_str(), pass ? "PASS" : "FAIL", value);
    ok = ok && pass;
  };

  if (U.rows() != p.sgrid.N || U.cols() != p.tgrid.n + 1) {
    std::printf("field shape %ldx%ld does not match the declared %dx%d problem\n",
                static_cast<long>(U.rows()), static_cast<long>(U.cols()), p.sgrid.N,
                p.tgrid.n + 1);
    rep["checks"]["shape"] = {{"pass", false}};
    std::ofstream(dir + "/report.json") << rep.dump(2) << '\n';
    return 1;
  }
  if (corrupt) fnld::corrupt_trajectory(U, 0.5);

  const double scale = U.cwiseAbs().maxCoeff() + 1.0;
  record("initial_data", (U.col(0) - u0).cwiseAbs().maxCoeff() <= 1e-9 * scale,
         (U.col(0) - u0).cwiseAbs().maxCoeff());
  record("non_negative", U.minCoeff() >= -1e-12 * scale, U.minCoeff());

  double worst_weak = 0.0;
  Eigen::VectorXd hat = Eigen::VectorXd::Zero(p.sgrid.N);
  hat[p.sgrid.N / 2] = 1.0;
  for (int q : {1, 2}) {
    const fnld::ZetaPoly zeta(p.tgrid.T, q);
    for (const Eigen::VectorXd& prof :
         {Eigen::VectorXd(Eigen::VectorXd::Ones(p.sgrid.N)), hat}) {
      const auto wk = fnld::weak_residual(w, op.A, p.tgrid, U, f, prof, zeta);
      worst_weak = std::max(worst_weak, std::fabs(wk.residual) / wk.scale);
    }
  }
  record("weak_form", worst_weak <= 1e-9, worst_weak);

  fnld::EntropySuiteOptions opt;
  opt.tol_constant = 0.02;  // calibrated against first-order scheme error
  opt.tau_power = std::min(1.0, p.kernel.beta);
  Eigen::MatrixXd fz = f.size() > 0 ? f : Eigen::MatrixXd::Zero(p.sgrid.N, p.tgrid.n);
  const auto suite = fnld::run_entropy_suite(p.kernel, p.tgrid, p.sgrid, op.A, U, fz, opt);
  record("entropy_suite", suite.all_pass, suite.worst_margin);
  for (const auto& c : suite.cases) {
    rep["entropy_cases"].push_back({{"level", c.level},
                                    {"phi", c.phi_index},
                                    {"zeta_power", c.zeta_power},
                                    {"t_cut", c.t_cut},
                                    {"residual", c.residual},
                                    {"tol", c.tol},
                                    {"pass", c.pass}});
  }

  rep["pass"] = ok;
  std::ofstream(dir + "/report.json") << rep.dump(2) << '\n';
  std::printf("verification: %s\n", ok ? "PASS" : "FAIL");
  return ok ? 0 : 1;
}

int cmd_kernels(const std::string& family, double alpha, double mu, double T, int n,
                const std::string& out) {
  fnld::KernelSpec k = family == "exp_weighted" ? fnld::KernelSpec::exp_weighted(alpha, mu)
                                                : fnld::KernelSpec::riemann_liouville(alpha);
  const fnld::KernelPair pair = fnld::make_pair(k);
  fnld::TimeGrid tg{T, n};
  const auto cells = fnld::cell_integrals(k, tg.tau(), n);

  std::vector<double> ts(n), kv(n), Kv(n), lv(n), cv(n);
  for (int j = 1; j <= n; ++j) {
    const double t = tg.node(j);
    ts[j - 1] = t;
    kv[j - 1] = k(t);
    Kv[j - 1] = k.antiderivative(t);
    lv[j - 1] = pair.l(t);
    cv[j - 1] = cells.a[j - 1];
  }
  fnld::io::write_columns_csv(out, {"t", "k", "K", "l", "cell"}, {ts, kv, Kv, lv, cv});

  const double res = fnld::sonine_residual(pair, T, std::min(n, 256));
  std::printf("wrote %s; pair residual at the nodes: %.3e\n", out.c_str(), res);
  return 0;
}

struct SweepRow {
  double lambda = 0.0;
  double l1_distance = 0.0;
  double max_excess = 0.0;
  bool dominated = false;
  bool derivative_nonpositive = false;
  bool bounded = false;
  std::string error;
};

int cmd_sweep(const std::string& config_path, std::vector<double> lambdas, int threads,
              const std::string& out) {
  const Problem p = parse_problem(fnld::io::Config::from_file(config_path));
  if (lambdas.empty()) throw std::invalid_argument("sweep: need at least one lambda");
  for (double l : lambdas)
    if (!(l > 0.0)) throw std::invalid_argument("sweep: lambdas must be positive");
  const fnld::KernelPair pair = fnld::make_pair(p.kernel);

  std::vector<SweepRow> rows(lambdas.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < lambdas.size(); i = next.fetch_add(1)) {
      SweepRow& r = rows[i];
      r.lambda = lambdas[i];
      try {
        const auto fam = fnld::solve_s_lambda(pair, p.tgrid, lambdas[i]);
        const auto k1 = fnld::check_K1(fam, p.kernel);
        const auto k2 = fnld::check_K2(fam, p.kernel);
        r.l1_distance = k1.l1_distance;
        r.max_excess = k1.max_excess;
        r.dominated = k1.dominated;
        r.derivative_nonpositive = k2.derivative_nonpositive;
        r.bounded = k2.bounded;
      } catch (const std::exception& e) {
        r.error = e.what();
      }
    }
  };
  const int nthreads = std::max(1, std::min<int>(threads, static_cast<int>(lambdas.size())));
  std::vector<std::thread> pool;
  for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  bool ok = true;
  json rep;
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) {
    if (!r.error.empty()) {
      std::printf("lambda=%-8g ERROR %s\n", r.lambda, r.error.c_str());
      ok = false;
      continue;
    }
    const bool ladder = r.l1_distance < prev;
    prev = r.l1_distance;
    ok = ok && ladder && r.derivative_nonpositive && r.bounded;
    std::printf("lambda=%-8g l1=%.6e excess=%.3e slope<=0:%d bounded:%d ladder:%d\n",
                r.lambda, r.l1_distance, r.max_excess, (int)r.derivative_nonpositive,
                (int)r.bounded, (int)ladder);
    rep["rows"].push_back({{"lambda", r.lambda},
                           {"l1_distance", r.l1_distance},
                           {"max_excess", r.max_excess},
                           {"dominated", r.dominated},
                           {"derivative_nonpositive", r.derivative_nonpositive},
                           {"bounded", r.bounded}});
  }
  rep["pass"] = ok;
  if (!out.empty()) std::ofstream(out) << rep.dump(2) << '\n';
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nonlocal-in-time diffusion: simulate, verify, inspect"};
  app.require_subcommand(1);

  std::string config_path, outdir = "out", dir, out_file;
  bool corrupt = false;

  auto* sim = app.add_subcommand("simulate", "run a problem from a config file");
  sim->add_option("--config", config_path, "key = value problem description")->required();
  sim->add_option("--out", outdir, "output directory (default: out)");

  auto* ver = app.add_subcommand("verify", "check a stored field against its problem");
  ver->add_option("--problem", dir, "directory holding problem.ini and u.csv")->required();
  ver->add_flag("--corrupt", corrupt, "inject a localized defect before checking");

  std::string family = "riemann_liouville";
  double alpha = 0.5, mu = 0.0, T = 1.0;
  int n = 256;
  auto* ker = app.add_subcommand("kernels", "dump kernel, partner and cell tables");
  ker->add_option("--family", family, "riemann_liouville or exp_weighted");
  ker->add_option("--alpha", alpha, "memory exponent in (0,1)");
  ker->add_option("--mu", mu, "exponential tilt (exp_weighted only)");
  ker->add_option("--T", T, "horizon");
  ker->add_option("--n", n, "number of nodes");
  ker->add_option("--out", out_file, "output CSV path")->required();

  std::vector<double> lambdas{1.0, 0.1, 0.01};
  int threads = 2;
  auto* sw = app.add_subcommand("sweep", "regularisation ladder diagnostics");
  sw->add_option("--config", config_path, "problem description")->required();
  sw->add_option("--lambdas", lambdas, "regularisation parameters")->delimiter(',');
  sw->add_option("--threads", threads, "worker threads");
  sw->add_option("--out", out_file, "JSON report path");

  try {
    app.parse(argc, argv);
    if (*sim) return cmd_simulate(config_path, outdir);
    if (*ver) return cmd_verify(dir, corrupt);
    if (*ker) return cmd_kernels(family, alpha, mu, T, n, out_file);
    if (*sw) return cmd_sweep(config_path, lambdas, threads, out_file);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
