// mfbm: command-line driver for the eigen, oracle, sampling, RKHS and limit
// experiments. Exit codes: 0 ok, 1 numeric/check failure, 2 usage/config.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mfbm/mfbm.hpp"

namespace fs = std::filesystem;
using namespace mfbm;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool perturb_gamma = false;
};

// Raised by a subcommand whose computation finished but whose check failed.
struct CheckFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

RunConfig resolve(const CommonFlags& f) {
  RunConfig c = f.config.empty() ? RunConfig{} : load_config(f.config);
  if (f.seed) c.seed = *f.seed;
  if (!f.out.empty()) c.output_dir = f.out;
  c.validate();
  return c;
}

fs::path prepare_out(const RunConfig& c) {
  fs::path dir(c.output_dir);
  fs::create_directories(dir);
  return dir;
}

std::string point_label(const Point& p) {
  std::string s;
  for (std::size_t i = 0; i < p.size(); ++i) s += (i ? " " : "") + io::fmt(p[i]);
  return s;
}

// ---------------------------------------------------------------------------

int cmd_eigs(const RunConfig& c) {
  const fs::path dir = prepare_out(c);
  const int n_keep = c.eigs_n_keep > 0 ? c.eigs_n_keep : c.truncation.n0;
  const int grid = c.radial_grid;
  io::CsvWriter report(dir / "eigs_convergence.csv",
                       {"m", "n", "lambda_coarse", "lambda_fine", "rel_step", "trace_residual"});
  double worst_step = 0.0;
  for (int m = 0; m <= c.truncation.m0; ++m) {
    const RadialKernelSpec spec{c.params, m};
    const EigenSystem es = mercer_decompose(spec, grid, std::min(n_keep, grid));
    io::write_eigensystem(dir / ("eigs_m" + std::to_string(m) + ".csv"), es);
    if (!c.eigs_convergence || grid / 2 < std::min(n_keep, 8)) continue;
    const int top = std::min(8, std::min(n_keep, grid / 2));
    const EigenSystem coarse = mercer_decompose(spec, grid / 2, top);
    double lsum = 0.0;
    for (double l : es.lambdas) lsum += l;
    for (int n = 0; n < top; ++n) {
      const double lf = es.lambdas[static_cast<std::size_t>(n)];
      const double lc = coarse.lambdas[static_cast<std::size_t>(n)];
      const double step = std::abs(lf - lc) / std::abs(lf);
      worst_step = std::max(worst_step, step);
      report.row(m, n + 1, lc, lf, step, std::abs(es.discrete_trace - lsum) / std::abs(es.discrete_trace));
    }
  }
  std::cout << "eigs: wrote " << c.truncation.m0 + 1 << " eigensystems (grid " << grid << ", n_keep " << n_keep
            << ") to " << dir.string() << "\n";
  if (c.eigs_convergence) std::cout << "eigs: max relative eigenvalue step grid/2 -> grid: " << worst_step << "\n";
  return 0;
}

int cmd_covcheck(const RunConfig& c, bool perturb) {
  const fs::path dir = prepare_out(c);
  const int R = c.covcheck_radii;
  const double gamma_scale = perturb ? 1.0 + 1e-6 : 1.0;
  io::CsvWriter w(dir / "covcheck.csv", {"N", "H", "m", "r", "s", "closed_form", "quadrature", "rel_residual"});
  double worst = 0.0;
  int wm = 0;
  double wr = 0.0, ws = 0.0;
  for (int i = 0; i < R; ++i) {
    for (int j = 0; j < R; ++j) {
      const double r = (i + 1.0) / R, s = (j + 1.0) / R;
      const std::vector<double> q = kernel_quadrature_all(c.params, c.covcheck_m_max, r, s, c.covcheck_nodes);
      for (int m = 0; m <= c.covcheck_m_max; ++m) {
        const double cf = kernel_closed_form({c.params, m}, r, s, gamma_scale);
        const double qm = q[static_cast<std::size_t>(m)];
        const double rel = std::abs(cf - qm) / std::abs(qm);
        w.row(c.params.N, c.params.H, m, r, s, cf, qm, rel);
        if (!(rel <= worst)) {
          worst = rel;
          wm = m;
          wr = r;
          ws = s;
        }
      }
    }
  }
  char msg[256];
  std::snprintf(msg, sizeof msg, "max relative residual %.3e at m=%d r=%g s=%g (limit 1e-8)", worst, wm, wr, ws);
  std::cout << "covcheck: " << msg << "\n";
  if (!(worst <= 1e-8)) throw CheckFailed(std::string("covcheck failed: ") + msg);
  return 0;
}

std::vector<Point> simulate_points(const RunConfig& c) {
  std::vector<Point> pts = c.points_of(c.simulate_points, "simulate.points");
  RngStream rng(c.seed, {4});
  const int N = c.params.N;
  for (int k = 0; k < c.simulate_random_points; ++k) {
    // uniform in the ball by rejection from the cube
    Point p(static_cast<std::size_t>(N));
    while (true) {
      double r2 = 0.0;
      for (double& v : p) {
        v = 2.0 * rng.uniform() - 1.0;
        r2 += v * v;
      }
      if (r2 <= 1.0) break;
    }
    pts.push_back(std::move(p));
  }
  if (pts.empty()) throw ConfigError("simulate: no points (set simulate.points or simulate.random_points)");
  return pts;
}

int cmd_simulate(const RunConfig& c) {
  const fs::path dir = prepare_out(c);
  const std::vector<Point> pts = simulate_points(c);
  std::vector<FieldSample> out;
  const auto R = static_cast<std::uint64_t>(c.simulate_replicas);
  if (c.simulate_method == "kl") {
    auto basis = std::make_shared<const ModeBasis>(build_mode_basis(c.params, c.truncation, c.radial_grid));
    const KlSampler sampler(basis, pts);
    for (std::uint64_t k = 0; k < R; ++k) {
      FieldSample s;
      s.params = c.params;
      s.points = pts;
      s.values = sampler.sample(c.seed, k);
      s.method = "kl";
      s.seed = c.seed;
      s.replica = k;
      s.truncation = c.truncation;
      out.push_back(std::move(s));
    }
  } else if (c.simulate_method == "cholesky") {
    const CholeskySampler sampler(c.params, pts);
    for (std::uint64_t k = 0; k < R; ++k) {
      FieldSample s;
      s.params = c.params;
      s.points = pts;
      s.values = sampler.sample(c.seed, k);
      s.method = "cholesky";
      s.seed = c.seed;
      s.replica = k;
      out.push_back(std::move(s));
    }
  } else {
    for (std::uint64_t k = 0; k < R; ++k) out.push_back(spectral_synthesize(c.params, c.band, c.freq, pts, c.seed, k));
    // expected variance of the band at each point, for the report
    io::CsvWriter w(dir / "spectral_variance.csv", {"point", "radius", "band_variance", "full_variance"});
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double r = detail::norm2(pts[i]);
      w.row(static_cast<unsigned long>(i), r, spectral_variance(c.params, c.band, r), std::pow(r, 2.0 * c.params.H));
    }
  }
  io::write_field_samples(dir / "samples.csv", out);
  std::cout << "simulate: " << out.size() << " replica(s) x " << pts.size() << " point(s), method "
            << out.front().method << "\n";
  return 0;
}

int cmd_rkhs_norm(const RunConfig& c) {
  const fs::path dir = prepare_out(c);
  const int N = c.params.N;
  auto basis = std::make_shared<const ModeBasis>(build_mode_basis(c.params, c.truncation, c.radial_grid));
  std::vector<Point> ys = c.points_of(c.rkhs_y, "rkhs.y");
  if (ys.empty()) {
    Point a(static_cast<std::size_t>(N), 0.0), b(static_cast<std::size_t>(N), 0.0);
    a[0] = 0.6;
    b[0] = 1.0;
    ys = {a, b};
  }
  io::CsvWriter w(dir / "rkhs_norm.csv", {"y", "norm_y", "strassen_norm", "exact_norm"});
  for (const Point& y : ys) {
    const RkhsFunction rep = representer(basis, y);
    const double r = detail::norm2(y);
    w.row(point_label(y), r, strassen_norm(rep), std::pow(r, c.params.H));
  }
  io::write_coefficients(dir / "coefficients.csv", representer(basis, ys.front()));

  if (c.rkhs_pairs > 0) {
    io::CsvWriter pw(dir / "rkhs_pairs.csv", {"y", "y_prime", "inner_product", "covariance", "abs_error"});
    RngStream rng(c.seed, {5});
    auto draw = [&] {
      Point p(static_cast<std::size_t>(N));
      while (true) {
        double r2 = 0.0;
        for (double& v : p) {
          v = 2.0 * rng.uniform() - 1.0;
          r2 += v * v;
        }
        if (r2 <= 1.0) return p;
      }
    };
    for (int k = 0; k < c.rkhs_pairs; ++k) {
      const Point y = draw(), yp = draw();
      const double ip = inner_product(representer(basis, y), representer(basis, yp));
      const double cv = covariance(y, yp, c.params);
      pw.row(point_label(y), point_label(yp), ip, cv, std::abs(ip - cv));
    }
  }
  std::cout << "rkhs-norm: " << ys.size() << " representer norm(s) at truncation (" << c.truncation.m0 << ","
            << c.truncation.n0 << ")\n";
  return 0;
}

int cmd_limits(const RunConfig& c) {
  const fs::path dir = prepare_out(c);
  const int N = c.params.N;
  const std::vector<double> schedule = c.effective_schedule();
  if (!h_increasing(c.example, schedule, N)) {
    throw ConfigError("limits: h is not increasing along the schedule (" + to_string(c.example) + ")");
  }
  if (c.example == Example::levy && N != 2) throw ConfigError("limits: the levy campaign is implemented for N=2");

  auto basis = std::make_shared<const ModeBasis>(build_mode_basis(c.params, c.limits_truncation, c.limits_grid));
  const RkhsProjector proj(basis, c.limits_angular);
  const RkhsFunction rep = representer(basis, c.effective_target_y());
  const RkhsFunction target{basis, c.target_scale * rep.coeffs / strassen_norm(rep)};

  const SpectralField field(c.params, Band{}, c.freq, c.seed, 0);
  std::optional<LatticeField> lattice;
  FieldFn fn;
  if (c.example == Example::levy) {
    lattice = sample_lattice(field, CartesianGrid{c.lattice});
    fn = [&](std::span<const double> x) { return lattice->interpolate(x[0], x[1]); };
  } else {
    fn = [&](std::span<const double> x) { return field.value(x); };
  }
  CloudSetup setup{c.example, c.params, c.horizon};

  std::vector<CampaignRow> rows;
  for (double scale : schedule) {
    try {
      std::vector<CampaignRow> r = run_campaign(setup, {scale}, fn, proj, target);
      rows.push_back(r.front());
    } catch (const DomainError& e) {
      throw DomainError("limits: scale " + io::fmt(scale) + ": " + e.what());
    }
  }
  double running = std::numeric_limits<double>::infinity();
  for (CampaignRow& r : rows) {
    running = std::min(running, r.stats.enter);
    r.enter_running_min = running;
  }

  io::CsvWriter w(dir / "limits.csv", {"example", "scale", "h", "members", "attract_excess", "attract_supdist",
                                       "attract_excess_median", "attract_supdist_median", "enter_dist",
                                       "enter_running_min", "functional_sup"});
  io::Series exc{"attract_excess_median", {}, {}}, sup{"attract_supdist_median", {}, {}},
      ent{"enter_running_min", {}, {}}, fsup{"functional_sup", {}, {}};
  for (const CampaignRow& r : rows) {
    w.row(to_string(r.example), r.scale, r.h, static_cast<unsigned long>(r.stats.members), r.stats.attract_excess,
          r.stats.attract_supdist, r.stats.attract_excess_median, r.stats.attract_supdist_median, r.stats.enter,
          r.enter_running_min, r.stats.functional_sup);
    for (io::Series* s : {&exc, &sup, &ent, &fsup}) s->x.push_back(r.scale);
    exc.y.push_back(r.stats.attract_excess_median);
    sup.y.push_back(r.stats.attract_supdist_median);
    ent.y.push_back(r.enter_running_min);
    fsup.y.push_back(r.stats.functional_sup);
  }
  io::write_svg_lines(dir / "limits.svg", to_string(c.example) + " cloud statistics", "scale",
                      {exc, sup, ent, fsup}, true);

  nlohmann::ordered_json audit;
  const ExampleAsymptotics a = example_asymptotics(c.example, N);
  audit["example"] = to_string(c.example);
  audit["h_increasing"] = true;
  audit["critical_exponent"] = critical_exponent(a);
  audit["seed"] = c.seed;

  if (c.example == Example::levy) {
    const LatticeField coarse = sample_lattice(field, CartesianGrid{c.modulus_lattice});
    io::CsvWriter mw(dir / "modulus.csv", {"u", "statistic"});
    io::Series ms{"modulus_statistic", {}, {}};
    for (double u : c.modulus_schedule) {
      const double v = modulus_statistic(coarse, u, c.params);
      mw.row(u, v);
      ms.x.push_back(u);
      ms.y.push_back(v);
    }
    io::write_svg_lines(dir / "modulus.svg", "Levy modulus statistic", "u", {ms}, true);
  }
  io::write_json(dir / "limits.json", audit);
  std::cout << "limits: " << rows.size() << " scale(s) for " << to_string(c.example) << " written to "
            << dir.string() << "\n";
  return 0;
}

void report_error(const std::string& command, const std::string& kind, const std::string& what, int code,
                  const std::string& out_dir) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["error"] = kind;
  j["message"] = what;
  j["exit_code"] = code;
  std::cerr << j.dump() << "\n";
  if (out_dir.empty()) return;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (!ec) {
    try {
      io::write_json(fs::path(out_dir) / "error.json", j);
    } catch (const std::exception&) {
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiparameter fractional Brownian motion: kernels, sampling, RKHS and limit experiments"};
  app.require_subcommand(1, 1);
  CommonFlags flags;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "config file (key = value)");
    sub->add_option("--seed", flags.seed, "seed, overrides the config");
    sub->add_option("--out", flags.out, "output directory, overrides the config");
    sub->add_flag("--perturb-gamma", flags.perturb_gamma, "test only: perturb the closed-form Gamma ratio");
  };
  CLI::App* eigs = app.add_subcommand("eigs", "Mercer eigensystems of b_m for m <= m0, plus a grid-doubling report");
  CLI::App* covcheck = app.add_subcommand("covcheck", "closed-form b_m against quadrature of the covariance");
  CLI::App* simulate = app.add_subcommand("simulate", "sample the field (kl | cholesky | spectral)");
  CLI::App* rkhs = app.add_subcommand("rkhs-norm", "Strassen norms of representers");
  CLI::App* limits = app.add_subcommand("limits", "increment-cloud campaign for one example");
  for (CLI::App* s : {eigs, covcheck, simulate, rkhs, limits}) add_common(s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  std::string out_dir = flags.out;
  try {
    const RunConfig c = resolve(flags);
    out_dir = c.output_dir;
    if (command == "eigs") return cmd_eigs(c);
    if (command == "covcheck") return cmd_covcheck(c, flags.perturb_gamma);
    if (command == "simulate") return cmd_simulate(c);
    if (command == "rkhs-norm") return cmd_rkhs_norm(c);
    return cmd_limits(c);
  } catch (const ConfigError& e) {
    report_error(command, "config", e.what(), 2, out_dir);
    return 2;
  } catch (const CheckFailed& e) {
    report_error(command, "check_failed", e.what(), 1, out_dir);
    return 1;
  } catch (const CoverageError& e) {
    report_error(command, "coverage", e.what(), 1, out_dir);
    return 1;
  } catch (const ResolutionError& e) {
    report_error(command, "resolution", e.what(), 1, out_dir);
    return 1;
  } catch (const DomainError& e) {
    report_error(command, "domain", e.what(), 1, out_dir);
    return 1;
  } catch (const IntegrityError& e) {
    report_error(command, "integrity", e.what(), 1, out_dir);
    return 1;
  } catch (const NumericError& e) {
    report_error(command, "numeric", e.what(), 1, out_dir);
    return 1;
  } catch (const std::exception& e) {
    report_error(command, "runtime", e.what(), 1, out_dir);
    return 1;
  }
}
