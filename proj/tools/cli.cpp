#include "cli.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "hkq/asymptotics.hpp"
#include "hkq/check.hpp"
#include "hkq/donaldson_flow.hpp"
#include "hkq/error.hpp"
#include "hkq/oracles.hpp"
#include "hkq/parallel.hpp"
#include "hkq/potential.hpp"
#include "hkq/quotient_metric.hpp"
#include "hkq/separated_solver.hpp"
#include "hkq/serialization.hpp"
#include "hkq/spectrum.hpp"

namespace hkq::cli {

namespace {

constexpr const char* kVersion = "1.0.0";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Globals {
  unsigned jobs = default_jobs();
  double eps = 0.05;
  double tau = 0.05;
  double r_sep_factor = 10.0;
  double r_cluster_factor = 10.0;
  double free_action_floor = 1e-8;
  double tol_level = 1e-10;
};

struct Manifest {
  std::string subcommand;
  Json parameters = Json::object();
  Json seeds = Json::object();
  Json inputs = Json::object();
  std::string started;

  Json to_json() const {
    return {{"subcommand", subcommand}, {"parameters", parameters}, {"seeds", seeds},
            {"tool_version", kVersion}, {"input_digests", inputs},
            {"started", started}, {"finished", utc_now()}};
  }
};

// Reads an input file and records its digest.
std::string load_text(const std::string& path, Manifest& m) {
  std::string text = read_text_file(path);
  m.inputs[path] = "sha256:" + sha256_hex(text);
  return text;
}

Json load_json(const std::string& path, Manifest& m) {
  const std::string text = load_text(path, m);
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::malformed_input, path + ": " + e.what());
  }
}

void write_json(const Json& j, const std::string& path, std::ostream& out) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty()) {
    out << text;
  } else {
    write_text_file(path, text);
  }
}

void write_sidecar(const std::string& path, const Manifest& m) {
  write_text_file(path + ".manifest.json", m.to_json().dump(2) + "\n");
}

Json residual_json(const ADHMDatum& z) {
  const MomentResidual r = moment_residual(z);
  return {{"real_residual", r.real_residual}, {"complex_residual", r.complex_residual}};
}

std::vector<double> parse_range(const std::string& text, int points) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.size() != 3) throw UsageError("--range must look like a:b:log or a:b:lin");
  double a = 0.0, b = 0.0;
  try {
    a = parse_double(parts[0]);
    b = parse_double(parts[1]);
  } catch (const Error&) {
    throw UsageError("--range endpoints must be numbers");
  }
  if (!(b > a) || points < 2) throw UsageError("--range needs a < b and --points >= 2");
  if (parts[2] == "log") {
    if (!(a > 0.0)) throw UsageError("log range needs a > 0");
    return log_grid(a, b, points);
  }
  if (parts[2] != "lin") throw UsageError("--range spacing must be log or lin");
  std::vector<double> g(static_cast<size_t>(points));
  for (int i = 0; i < points; ++i) g[static_cast<size_t>(i)] = a + (b - a) * i / (points - 1);
  return g;
}

void record_parameters(const CLI::App& app, Json& target) {
  for (const CLI::Option* o : app.get_options()) {
    const std::string name = o->get_single_name();
    if (name == "help" || name == "config") continue;
    if (o->count() > 0) {
      const auto& res = o->results();
      target[name] = res.size() == 1 ? Json(res.front()) : Json(res);
    } else if (!o->get_default_str().empty()) {
      target[name] = o->get_default_str();
    }
  }
}

using Handler = std::function<void(Manifest&)>;

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::io_error, "sha256 failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical hyperkahler quotient toolkit for Hilbert schemes of points on C^2", "hkq"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_config("--config", "", "flat key=value file with global defaults")->envname("HKQ_CONFIG");
  app.set_version_flag("--version", kVersion);

  Globals g;
  app.add_option("--jobs", g.jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--eps", g.eps, "region parameter epsilon");
  app.add_option("--tau", g.tau, "cluster size bound tau");
  app.add_option("--r-sep-factor", g.r_sep_factor, "R_sep = factor * sqrt(t)");
  app.add_option("--r-cluster-factor", g.r_cluster_factor, "R_cluster = factor * n * sqrt(t)");
  app.add_option("--free-action-floor", g.free_action_floor, "smallest accepted eigenvalue of Q_z");
  app.add_option("--tol-level", g.tol_level, "on-level tolerance");
  for (CLI::Option* o : app.get_options()) o->configurable(true);

  std::map<CLI::App*, Handler> handlers;
  auto sub = [&](const std::string& name, const std::string& help) {
    CLI::App* s = app.add_subcommand(name, help);
    s->fallthrough();
    return s;
  };

  // solve-separated
  std::string points_path;
  double sep_t = 1.0, sep_tol = 1e-12;
  {
    CLI::App* s = sub("solve-separated", "Newton solve for a well-separated configuration");
    s->add_option("--points", points_path, "configuration JSON")->required();
    s->add_option("--t", sep_t, "level t");
    s->add_option("--tol", sep_tol, "residual tolerance");
    handlers[s] = [&](Manifest& m) {
      const Configuration q = configuration_from_json(load_json(points_path, m));
      SeparatedOptions o;
      o.tol = sep_tol;
      o.r_sep_factor = g.r_sep_factor;
      const SeparatedSolution sol = newton_solve(q, sep_t, o);
      Json j = {{"datum", to_json(sol.datum)}, {"report", to_json(sol.report)},
                {"residuals", residual_json(sol.datum)}, {"manifest", m.to_json()}};
      write_json(j, "", out);
    };
  }

  // flow
  std::string flow_input, flow_method = "flow", flow_traj;
  double flow_t = 0.0, flow_tol = 1e-10;
  {
    CLI::App* s = sub("flow", "Move a start datum onto the level set");
    s->add_option("--input", flow_input, "start datum JSON")->required();
    s->add_option("--t", flow_t, "level t (default: the datum's t)");
    s->add_option("--tol", flow_tol, "stop when |2i mu - t| is below this");
    s->add_option("--method", flow_method, "flow or newton")->check(CLI::IsMember({"flow", "newton"}));
    s->add_option("--trajectory", flow_traj, "trajectory CSV output (flow method)");
    handlers[s] = [&](Manifest& m) {
      const ADHMDatum z0 = datum_from_json(load_json(flow_input, m));
      const double t = flow_t > 0.0 ? flow_t : z0.t;
      Json j;
      if (flow_method == "newton") {
        NewtonHOptions o;
        o.tol = flow_tol;
        o.free_action_floor = g.free_action_floor;
        const NewtonHResult r = newton_on_h(z0, t, o);
        j = {{"method", "newton"}, {"datum", to_json(r.z_h)}, {"h", to_json(r.h)},
             {"iterations", r.iterations}, {"residual", r.residual}, {"history", r.history}};
        j["residuals"] = residual_json(r.z_h);
      } else {
        FlowOptions o;
        o.tol = flow_tol;
        o.free_action_floor = g.free_action_floor;
        const FlowResult r = flow_to_level(z0, t, o);
        j = {{"method", "flow"}, {"datum", to_json(r.z_h)}, {"z_end", to_json(r.z_end)},
             {"h", to_json(r.h)}, {"g_inf", to_json(r.g_inf)}, {"converged", r.converged},
             {"s_end", r.s_end}, {"steps", r.steps}, {"drift", r.drift},
             {"initial_deviation", r.initial_deviation},
             {"sufficient_condition", r.sufficient_condition}};
        j["residuals"] = residual_json(r.z_h);
        if (!flow_traj.empty()) {
          write_text_file(flow_traj, trajectory_csv(r.trajectory));
          write_sidecar(flow_traj, m);
          j["trajectory"] = flow_traj;
        }
        if (!r.converged) {
          j["manifest"] = m.to_json();
          write_json(j, "", out);
          throw Error(ErrorCode::no_convergence, "flow stopped before reaching the tolerance");
        }
      }
      j["manifest"] = m.to_json();
      write_json(j, "", out);
    };
  }

  // metric
  std::string metric_input, metric_probes = "diagonal";
  {
    CLI::App* s = sub("metric", "Quotient metric Gram matrix on probe tangents");
    s->add_option("--input", metric_input, "datum JSON")->required();
    s->add_option("--probes", metric_probes, "'diagonal' or a JSON list of tangent vectors");
    handlers[s] = [&](Manifest& m) {
      const ADHMDatum z = datum_from_json(load_json(metric_input, m));
      std::vector<TangentVector> probes;
      std::string basis = "diagonal";
      if (metric_probes == "diagonal") {
        probes = diagonal_probes(z.n());
      } else {
        const Json list = load_json(metric_probes, m);
        if (!list.is_array()) throw Error(ErrorCode::malformed_input, "probes must be a JSON list");
        for (const auto& v : list) probes.push_back(tangent_from_json(v, z.n()));
        basis = "file:" + m.inputs[metric_probes].get<std::string>();
      }
      MetricOptions o;
      o.free_action_floor = g.free_action_floor;
      const MetricSample sample =
          metric_sample(z, probes, basis, "file:" + m.inputs[metric_input].get<std::string>(), o);
      Json j = to_json(sample);
      j["manifest"] = m.to_json();
      write_json(j, "", out);
    };
  }

  // spectrum
  std::string spec_input;
  {
    CLI::App* s = sub("spectrum", "Joint spectrum of (A, B)");
    s->add_option("--input", spec_input, "datum JSON")->required();
    handlers[s] = [&](Manifest& m) {
      const ADHMDatum z = datum_from_json(load_json(spec_input, m));
      const JointSpectrum js = joint_spectrum(z);
      Json j = to_json(js);
      if (z.n() >= 2) {
        j["sigma"] = sigma(js.points);
        j["rho"] = rho(js.points);
      }
      j["manifest"] = m.to_json();
      write_json(j, "", out);
    };
  }

  // classify
  std::string classify_spec;
  double classify_R = 0.0, classify_t = 1.0;
  {
    CLI::App* s = sub("classify", "Region of a configuration among the partition regions");
    s->add_option("--spec", classify_spec, "configuration JSON")->required();
    s->add_option("--R", classify_R, "region radius (default 10 n sqrt t)");
    s->add_option("--t", classify_t, "level t used for the default radius");
    handlers[s] = [&](Manifest& m) {
      const Configuration q = configuration_from_json(load_json(classify_spec, m));
      auto specs = default_region_specs(static_cast<int>(q.n()), classify_t, g.eps, g.tau);
      if (classify_R > 0.0)
        for (auto& sp : specs) sp.R = classify_R;
      const auto p = classify_region(q.points, specs);
      Json regions = Json::array();
      for (const auto& sp : specs)
        regions.push_back({{"partition", format_partition(sp.partition)},
                           {"contains", in_region(q.points, sp)}});
      Json j = {{"partition", p ? Json(format_partition(*p)) : Json(nullptr)},
                {"regions", regions}, {"sigma", sigma(q.points)}, {"rho", rho(q.points)},
                {"manifest", m.to_json()}};
      write_json(j, "", out);
    };
  }

  // hilb2-oracle
  std::string oracle_lambda, oracle_mu;
  double oracle_t = 1.0;
  {
    CLI::App* s = sub("hilb2-oracle", "Closed-form n = 2 level-set point");
    s->add_option("--lambda", oracle_lambda, "re,im")->required();
    s->add_option("--mu", oracle_mu, "re,im")->required();
    s->add_option("--t", oracle_t, "level t");
    handlers[s] = [&](Manifest& m) {
      Complex l, mu;
      try {
        l = parse_complex(oracle_lambda);
        mu = parse_complex(oracle_mu);
      } catch (const Error& e) {
        throw UsageError(e.what());
      }
      const ADHMDatum z = hilb2_point(l, mu, oracle_t);
      Json j = {{"datum", to_json(z)}, {"residuals", residual_json(z)}, {"manifest", m.to_json()}};
      write_json(j, "", out);
    };
  }

  // decay-scan
  std::string scan_quantity, scan_partition, scan_range, scan_out, scan_mode = "fixed";
  int scan_n = 0, scan_points = 20;
  double scan_t = 1.0;
  std::uint64_t scan_seed = 1;
  bool scan_resume = false;
  {
    CLI::App* s = sub("decay-scan", "Measure a decay quantity along a ray");
    s->add_option("--quantity", scan_quantity, "quantity tag")->required();
    s->add_option("--n", scan_n, "number of points")->required()->check(CLI::Range(2, 8));
    s->add_option("--partition", scan_partition, "partition such as 1,2|3 (default: all singletons)");
    s->add_option("--range", scan_range, "a:b:log or a:b:lin")->required();
    s->add_option("--points", scan_points, "grid size");
    s->add_option("--out", scan_out, "CSV output (default: stdout)");
    s->add_option("--mode", scan_mode, "fixed or joint cluster scaling")
        ->check(CLI::IsMember({"fixed", "joint"}));
    s->add_option("--t", scan_t, "level t");
    s->add_option("--seed", scan_seed, "ray seed");
    s->add_flag("--resume", scan_resume, "reuse matching leading rows of --out");
    handlers[s] = [&](Manifest& m) {
      Quantity q;
      try {
        q = parse_quantity(scan_quantity);
      } catch (const Error& e) {
        throw UsageError(e.what());
      }
      Partition p;
      try {
        p = scan_partition.empty() ? finest_partition(scan_n) : parse_partition(scan_partition, scan_n);
      } catch (const Error& e) {
        throw UsageError(e.what());
      }
      const std::vector<double> grid = parse_range(scan_range, scan_points);
      m.seeds["ray"] = scan_seed;
      RayOptions ro;
      ro.separated.r_sep_factor = g.r_sep_factor;
      ro.cluster.r_cluster_factor = g.r_cluster_factor;
      ro.cluster.tau = g.tau;
      ro.cluster.tol_level = g.tol_level;
      const ClusterMode mode = scan_mode == "joint" ? ClusterMode::joint : ClusterMode::fixed_sigma;
      const RayEvaluator ray = make_ray(q, scan_n, p, mode, scan_t, scan_seed, ro);

      std::vector<DecayRecord> done;
      if (scan_resume && !scan_out.empty() && std::filesystem::exists(scan_out)) {
        const auto old = parse_decay_csv(read_text_file(scan_out));
        for (size_t i = 0; i < old.size() && i < grid.size(); ++i) {
          if (old[i].scale != grid[i]) break;
          done.push_back(old[i]);
          done.back().quantity = q;
        }
        m.parameters["resumed_rows"] = done.size();
      }
      std::ofstream file;
      std::ostream* sink = &out;
      if (!scan_out.empty()) {
        file.open(scan_out, std::ios::trunc);
        if (!file) throw Error(ErrorCode::io_error, "cannot write " + scan_out);
        sink = &file;
      }
      *sink << decay_csv_header();
      ScanOptions so;
      so.jobs = g.jobs;
      so.on_record = [&](std::size_t, const DecayRecord& r) {
        *sink << decay_csv_row(r);
        sink->flush();
      };
      const auto records = decay_scan(ray, grid, q, so, std::move(done));
      if (!scan_out.empty()) {
        file.close();
        write_sidecar(scan_out, m);
        int invalid = 0;
        for (const auto& r : records) invalid += r.valid ? 0 : 1;
        Json j = {{"out", scan_out}, {"records", records.size()}, {"invalid", invalid}};
        try {
          j["fit"] = to_json(fit_power_law(records));
        } catch (const Error& e) {
          j["fit"] = {{"error", to_string(e.code())}, {"message", e.what()}};
        }
        write_json(j, "", out);
      }
    };
  }

  // fit
  std::string fit_in;
  {
    CLI::App* s = sub("fit", "Power-law fit of a decay CSV");
    s->add_option("--in", fit_in, "decay CSV")->required();
    handlers[s] = [&](Manifest& m) {
      const auto records = parse_decay_csv(load_text(fit_in, m));
      Json j = to_json(fit_power_law(records));
      j["manifest"] = m.to_json();
      write_json(j, "", out);
    };
  }

  // potential
  int pot_n = 0;
  std::string pot_x, pot_out;
  std::uint64_t pot_samples = 1000000, pot_seed = 1;
  {
    CLI::App* s = sub("potential", "Monte-Carlo estimate of the weighted Green potential");
    s->add_option("--n", pot_n, "number of points")->required()->check(CLI::Range(2, 4));
    s->add_option("--x", pot_x, "configuration JSON")->required();
    s->add_option("--samples", pot_samples, "sample count")->check(CLI::PositiveNumber);
    s->add_option("--seed", pot_seed, "master seed");
    s->add_option("--out", pot_out, "JSON output (default: stdout)");
    handlers[s] = [&](Manifest& m) {
      const Configuration x = configuration_from_json(load_json(pot_x, m));
      if (x.n() != pot_n) throw Error(ErrorCode::dimension_mismatch, "--n differs from the configuration size");
      SamplerOptions o;
      o.samples = pot_samples;
      o.seed = pot_seed;
      o.jobs = g.jobs;
      m.seeds["sampler"] = pot_seed;
      Json j = to_json(estimate_potential(x, o));
      j["manifest"] = m.to_json();
      write_json(j, pot_out, out);
    };
  }

  // check
  std::string check_suite = "all";
  bool check_failed = false;
  {
    CLI::App* s = sub("check", "Run invariant suites");
    s->add_option("--suite", check_suite, "suite name")
        ->check(CLI::IsMember({"core", "solvers", "asymptotics", "potential", "all"}));
    handlers[s] = [&](Manifest& m) {
      Json j = check_report(check_suite, g.jobs);
      check_failed = j["failed"].get<int>() > 0;
      j["manifest"] = m.to_json();
      write_json(j, "", out);
    };
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << Json{{"error", "usage"}, {"message", e.what()}}.dump() << "\n";
    return 2;
  }

  CLI::App* chosen = app.get_subcommands().front();
  Manifest m;
  m.subcommand = chosen->get_name();
  m.started = utc_now();
  record_parameters(app, m.parameters);
  record_parameters(*chosen, m.parameters);
  try {
    handlers.at(chosen)(m);
  } catch (const UsageError& e) {
    err << Json{{"error", "usage"}, {"message", e.what()}}.dump() << "\n";
    return 2;
  } catch (const Error& e) {
    err << Json{{"error", to_string(e.code())}, {"message", e.what()}}.dump() << "\n";
    const bool input_problem = e.code() == ErrorCode::malformed_input || e.code() == ErrorCode::io_error;
    return input_problem ? 2 : 1;
  } catch (const std::exception& e) {
    err << Json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }
  return check_failed ? 1 : 0;
}

}  // namespace hkq::cli
