// icclab command-line driver.
//
// Exit codes: 0 success, 1 input error, 2 budget exhausted without
// convergence, 3 assertion failure in a stress suite.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "icclab/cone_lab.hpp"
#include "icclab/corpus.hpp"
#include "icclab/flow.hpp"
#include "icclab/frame_search.hpp"
#include "icclab/io.hpp"
#include "icclab/soliton.hpp"

#ifndef ICCLAB_VERSION
#define ICCLAB_VERSION "0.0.0"
#endif

using namespace icclab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitBudget = 2;
constexpr int kExitAssertion = 3;

struct Flags {
  std::optional<std::string> config;
  std::optional<int> dim;
  std::optional<std::uint64_t> seed;
  std::optional<double> theta;
  std::optional<std::string> omega;
  std::optional<std::vector<double>> b_grid;
  std::optional<int> restarts;
  std::optional<int> iterations;
  std::optional<double> tol_weak;
  std::optional<double> tol_interior;
  std::optional<std::string> out;
  std::optional<std::string> format;
};

RunConfig resolve_config(const Flags& f, const std::string& input, const std::string& default_format) {
  RunConfig c;
  c.format = default_format;
  if (const char* env = std::getenv("ICCLAB_SEED")) {
    try {
      c.seed = std::stoull(env, nullptr, 0);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, "ICCLAB_SEED is not an integer");
    }
  }
  if (f.config) merge_json(c, Json::parse(read_file(*f.config), nullptr, false));
  if (f.dim) c.dim = *f.dim;
  if (f.seed) c.seed = *f.seed;
  if (f.theta) c.theta = *f.theta;
  if (f.omega) c.omega = *f.omega;
  if (f.b_grid) c.b_grid = *f.b_grid;
  if (f.restarts) c.budget.restarts = *f.restarts;
  if (f.iterations) c.budget.iterations = *f.iterations;
  if (f.tol_weak) c.budget.tol_weak = *f.tol_weak;
  if (f.tol_interior) c.budget.tol_interior = *f.tol_interior;
  if (f.out) c.output = *f.out;
  if (f.format) c.format = *f.format;
  if (!input.empty()) c.input = input;
  c.budget.seed = c.seed;
  if (c.format != "json" && c.format != "csv") throw Error(ErrorCode::InvalidArgument, "format must be json or csv");
  return c;
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw Error(ErrorCode::InvalidArgument, "cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

using Clock = std::chrono::steady_clock;

Json envelope(const std::string& command, const RunConfig& cfg) {
  Json j;
  j["command"] = command;
  j["version"] = ICCLAB_VERSION;
  j["config"] = to_json(cfg);
  return j;
}

Json input_json(const LoadReport& in, const std::string& path) {
  return {{"path", path},
          {"sha1", in.sha1},
          {"dim", in.tensor.dim()},
          {"symmetry_residual", in.symmetry_residual},
          {"bianchi_residual", in.bianchi_residual}};
}

void finish(Json& report, Clock::time_point start) {
  report["timing"] = {{"wall_seconds", std::chrono::duration<double>(Clock::now() - start).count()}};
}

std::string csv_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Runs fn(i) for i in [0, count) on `jobs` threads; results are written by index.
void parallel_for(int count, int jobs, const std::function<void(int)>& fn) {
  jobs = std::max(1, std::min(jobs, count));
  if (jobs == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(jobs);
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (int i = next++; i < count; i = next++) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

int cmd_classify(const Flags& flags, const std::string& path) {
  const auto start = Clock::now();
  const RunConfig cfg = resolve_config(flags, path, "json");
  const LoadReport in = load_tensor(path);
  const Curvature& r = in.tensor;
  const double scal = scalar(r);
  std::vector<MembershipReport> reports;
  for (const auto& m : cone_margins(r, cfg.budget)) reports.push_back(m);
  std::optional<MembershipReport> uniform;
  if (cfg.theta > 0.0) uniform = uniform_pic_margin(r, cfg.theta, cfg.budget);

  bool converged = true;
  for (const auto& m : reports) converged = converged && m.converged;
  if (uniform) converged = converged && uniform->converged;

  Output out(cfg.output);
  if (cfg.format == "csv") {
    out.stream() << "cone,margin,verdict,converged\n";
    for (const auto& m : reports)
      out.stream() << to_string(m.mode) << ',' << csv_number(m.margin) << ','
                   << to_string(classify_margin(m.margin, scal, cfg.budget)) << ',' << m.converged << '\n';
    if (uniform)
      out.stream() << "UniformPIC," << csv_number(uniform->margin) << ','
                   << to_string(classify_margin(uniform->margin, scal, cfg.budget)) << ',' << uniform->converged
                   << '\n';
    return converged ? kExitOk : kExitBudget;
  }
  Json report = envelope("classify", cfg);
  report["input"] = input_json(in, path);
  Json result;
  result["scal"] = scal;
  result["norm"] = tensor_norm(r);
  Json margins = Json::array();
  for (const auto& m : reports) margins.push_back(to_json(m, scal, cfg.budget));
  result["margins"] = std::move(margins);
  if (uniform) {
    Json u = to_json(*uniform, scal, cfg.budget);
    u["cone"] = "UniformPIC";
    u["theta"] = cfg.theta;
    result["uniform_pic"] = std::move(u);
  } else {
    result["uniform_pic"] = nullptr;
  }
  result["converged"] = converged;
  report["result"] = std::move(result);
  finish(report, start);
  out.stream() << dump(report);
  return converged ? kExitOk : kExitBudget;
}

int cmd_p1(const Flags& flags, const std::string& path) {
  const auto start = Clock::now();
  const RunConfig cfg = resolve_config(flags, path, "json");
  const LoadReport in = load_tensor(path);
  const P1Result res = p1(in.tensor, cfg.budget);
  Output out(cfg.output);
  if (cfg.format == "csv") {
    out.stream() << "value,infimum,lambda,pic_margin,lower_bound,interior,converged\n"
                 << csv_number(res.value) << ',' << csv_number(res.infimum) << ',' << csv_number(res.witness.lambda)
                 << ',' << csv_number(res.pic_margin) << ',' << csv_number(res.lower_bound) << ',' << res.interior
                 << ',' << res.converged << '\n';
  } else {
    Json report = envelope("p1", cfg);
    report["input"] = input_json(in, path);
    report["result"] = to_json(res);
    finish(report, start);
    out.stream() << dump(report);
  }
  return res.converged ? kExitOk : kExitBudget;
}

int cmd_flow(const Flags& flags, const std::string& path, double t_end, double ode_tol,
             const std::string& cone_list) {
  const auto start = Clock::now();
  RunConfig cfg = resolve_config(flags, path, "csv");
  cfg.tolerances["ode"] = ode_tol;
  const LoadReport in = load_tensor(path);
  std::vector<ConeSpec> cones;
  std::stringstream ss(cone_list);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) cones.push_back(cone_spec_from_string(item));
  FlowOptions opts;
  opts.t_end = t_end;
  opts.tol = ode_tol;
  const FlowTrajectory traj = hamilton_flow(in.tensor, opts, cones, cfg.budget);
  Output out(cfg.output);
  if (cfg.format == "csv") {
    write_csv(out.stream(), traj);
  } else {
    Json report = envelope("flow", cfg);
    report["input"] = input_json(in, path);
    report["result"] = to_json(traj);
    finish(report, start);
    out.stream() << dump(report);
  }
  if (traj.status == FlowStatus::BlowUpReached) std::cerr << "flow stopped: " << traj.stop_reason << '\n';
  return traj.margins_converged ? kExitOk : kExitBudget;
}

int cmd_pipeline(const Flags& flags, const std::string& path) {
  const auto start = Clock::now();
  RunConfig cfg = resolve_config(flags, path, "json");
  const LoadReport in = load_tensor(path);
  const double critical = uniform_pic_critical_theta(in.tensor, cfg.budget);
  const double theta = cfg.theta > 0.0 ? cfg.theta : 0.5 * critical;
  const OmegaSchedule omega = omega_schedule_from_string(cfg.omega);
  const PipelineReport rep = theorem11_pipeline(in.tensor, theta, omega, cfg.b_grid, cfg.budget);
  Output out(cfg.output);
  if (cfg.format == "csv") {
    out.stream() << "b,a,omega,passes,margin_i,margin_ii,margin_iii,spread,bound\n";
    for (const auto& row : rep.rows)
      out.stream() << csv_number(row.b) << ',' << csv_number(row.a) << ',' << csv_number(row.omega) << ','
                   << row.eb.passes() << ',' << csv_number(row.eb.margin_i) << ',' << csv_number(row.eb.margin_ii)
                   << ',' << csv_number(row.eb.margin_iii) << ',' << csv_number(row.eb.spread) << ','
                   << csv_number(row.eb.bound) << '\n';
  } else {
    Json report = envelope("pipeline", cfg);
    report["input"] = input_json(in, path);
    Json result = to_json(rep);
    result["critical_theta"] = critical;
    result["omega_schedule"] = to_string(omega);
    report["result"] = std::move(result);
    finish(report, start);
    out.stream() << dump(report);
  }
  return kExitOk;
}

int cmd_lemma31(const Flags& flags, const std::string& path, int count, const std::vector<int>& dims, int jobs) {
  const auto start = Clock::now();
  RunConfig cfg = resolve_config(flags, path, "json");
  std::vector<CorpusEntry> entries;
  Json input;
  if (!path.empty()) {
    const LoadReport in = load_tensor(path);
    entries.push_back({path, in.tensor});
    input = input_json(in, path);
  } else {
    entries = random_corpus(RandomClass::NearPic1Boundary, count, dims, cfg.seed);
    input = {{"corpus", std::string(to_string(RandomClass::NearPic1Boundary))}, {"count", count}, {"dims", dims}};
  }
  std::vector<Lemma31Report> reports(entries.size());
  parallel_for(static_cast<int>(entries.size()), jobs,
               [&](int i) { reports[i] = lemma31_stress(entries[i].tensor, cfg.budget); });

  int applicable = 0, violations = 0, not_ok = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& r : reports) {
    if (!r.applicable) continue;
    ++applicable;
    if (r.slack < -r.slack_tolerance) ++violations;
    if (!r.ok) ++not_ok;
    worst = std::min(worst, r.slack / (r.slack_tolerance / 1e-8));
  }
  Output out(cfg.output);
  if (cfg.format == "csv") {
    out.stream() << "name,dim,applicable,p1,lambda,slack,slack_tolerance,lifted_margin,ok\n";
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const auto& r = reports[i];
      out.stream() << '"' << entries[i].name << "\"," << entries[i].tensor.dim() << ',' << r.applicable << ','
                   << csv_number(r.p1.value) << ',' << csv_number(r.lambda) << ',' << csv_number(r.slack) << ','
                   << csv_number(r.slack_tolerance) << ',' << csv_number(r.lifted_margin) << ',' << r.ok << '\n';
    }
  } else {
    Json report = envelope("lemma31", cfg);
    report["input"] = std::move(input);
    Json rows = Json::array();
    for (std::size_t i = 0; i < entries.size(); ++i) {
      Json row = to_json(reports[i]);
      row["name"] = entries[i].name;
      row["dim"] = entries[i].tensor.dim();
      rows.push_back(std::move(row));
    }
    Json result;
    result["entries"] = std::move(rows);
    result["summary"] = {{"count", entries.size()},
                         {"applicable", applicable},
                         {"violations", violations},
                         {"not_ok", not_ok},
                         {"min_normalized_slack", applicable ? Json(worst) : Json(nullptr)}};
    report["result"] = std::move(result);
    finish(report, start);
    out.stream() << dump(report);
  }
  if (violations > 0) return kExitAssertion;
  return not_ok > 0 ? kExitBudget : kExitOk;
}

int cmd_models(const Flags& flags, int samples) {
  const auto start = Clock::now();
  const RunConfig cfg = resolve_config(flags, "", "json");
  const int n = cfg.dim;
  constexpr double kTol = 1e-12;
  double worst = 0.0;
  Json models = Json::array();
  std::ostringstream csv;
  csv << "model,dim,point,table,identity,residual\n";
  for (const auto& model : {SolitonModel::gaussian(n), SolitonModel::round_sphere(n), SolitonModel::cylinder(n)}) {
    Json points = Json::array();
    const auto params = sample_parameters(model, samples, cfg.seed);
    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto sol = check_soliton_identities(model, params[i]);
      const auto ell = check_elliptic_identities(model, params[i]);
      worst = std::max({worst, max_abs_residual(sol), max_abs_residual(ell)});
      std::vector<double> p(params[i].data(), params[i].data() + params[i].size());
      points.push_back({{"param", p}, {"soliton", to_json(sol)}, {"elliptic", to_json(ell)}});
      for (const auto& [table, rows] : {std::pair{"soliton", &sol}, {"elliptic", &ell}})
        for (const auto& r : *rows)
          csv << to_string(model.kind) << ',' << n << ',' << i << ',' << table << ',' << r.name << ','
              << csv_number(r.value) << '\n';
    }
    Json m;
    m["model"] = to_string(model.kind);
    m["dim"] = n;
    m["points"] = std::move(points);
    const Eigen::VectorXd first = params.empty() ? Eigen::VectorXd(model.parameter_size()).setZero() : params[0];
    m["hypotheses"] = to_json(check_theorem13_hypotheses(model, first, cfg.budget));
    if (model.kind == SolitonModel::Kind::Gaussian) {
      m["theta_bound"] = nullptr;
    } else {
      const ThetaBound tb = bound_theta(model, samples, cfg.seed);
      m["theta_bound"] = {
          {"ratio", tb.ratio}, {"scal_min", tb.scal_min}, {"scal_max", tb.scal_max}, {"scal_in_range", tb.scal_in_range}};
    }
    models.push_back(std::move(m));
  }
  Output out(cfg.output);
  if (cfg.format == "csv") {
    out.stream() << csv.str();
  } else {
    Json report = envelope("models", cfg);
    report["input"] = {{"samples", samples}};
    report["result"] = {{"models", std::move(models)}, {"max_residual", worst}, {"tolerance", kTol}};
    finish(report, start);
    out.stream() << dump(report);
  }
  return worst <= kTol ? kExitOk : kExitAssertion;
}

int cmd_make_tensor(const Flags& flags, const std::string& kind, double param) {
  const RunConfig cfg = resolve_config(flags, "", "json");
  Output out(cfg.output);
  out.stream() << dump(tensor_to_json(named_tensor(kind, cfg.dim, param)));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Curvature-operator cone laboratory"};
  app.set_version_flag("--version", ICCLAB_VERSION);
  app.require_subcommand(1);
  app.fallthrough();

  Flags f;
  app.add_option("--config", f.config, "JSON run configuration; flags override it");
  app.add_option("--dim", f.dim, "dimension n");
  app.add_option("--seed", f.seed, "base seed (default from ICCLAB_SEED)");
  app.add_option("--theta", f.theta, "uniform PIC parameter");
  app.add_option("--omega", f.omega, "omega schedule: inverse[:k], inverse_sqrt[:k], constant:k");
  app.add_option("--b-grid", f.b_grid, "comma-separated b values")->delimiter(',');
  app.add_option("--budget-restarts", f.restarts, "multistart restarts");
  app.add_option("--budget-iters", f.iterations, "first-order iterations per restart");
  app.add_option("--tol-weak", f.tol_weak, "weak membership tolerance");
  app.add_option("--tol-interior", f.tol_interior, "interior membership tolerance");
  app.add_option("--out", f.out, "output file (default stdout)");
  app.add_option("--format", f.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  std::string tensor_path;
  auto* classify = app.add_subcommand("classify", "PIC, PIC1, PIC2 and uniform PIC margins");
  classify->add_option("tensor", tensor_path, "tensor JSON file")->required();

  auto* p1_cmd = app.add_subcommand("p1", "the p1 deviation functional");
  p1_cmd->add_option("tensor", tensor_path, "tensor JSON file")->required();

  double t_end = 0.0, ode_tol = 1e-10;
  std::string cones = "PIC,PIC1,PIC2";
  auto* flow = app.add_subcommand("flow", "integrate dR/dt = Q(R) and track cone margins");
  flow->add_option("tensor", tensor_path, "tensor JSON file")->required();
  flow->add_option("--t-end", t_end, "final time")->required();
  flow->add_option("--ode-tol", ode_tol, "absolute and relative step tolerance");
  flow->add_option("--cones", cones, "comma-separated cones: PIC, PIC1, PIC2, UniformPIC:t, Eb:t:b:w");

  auto* pipeline = app.add_subcommand("pipeline", "admissible-b search for the pulled-back cones");
  pipeline->add_option("tensor", tensor_path, "tensor JSON file")->required();

  int count = 100, jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::vector<int> dims{5, 6, 7};
  auto* lemma = app.add_subcommand("lemma31", "stress the Q(R) inequality at p1 minimizers");
  lemma->add_option("tensor", tensor_path, "single tensor JSON file (default: seeded corpus)");
  lemma->add_option("--count", count, "corpus size")->check(CLI::PositiveNumber);
  lemma->add_option("--dims", dims, "comma-separated corpus dimensions")->delimiter(',');
  lemma->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

  int samples = 100;
  auto* models = app.add_subcommand("models", "identity residuals of the model solitons");
  models->add_option("--samples", samples, "sample points per model")->check(CLI::PositiveNumber);

  std::string kind;
  double param = 1.0;
  auto* make = app.add_subcommand("make-tensor", "write a model or seeded random tensor");
  make->add_option("kind", kind,
                   "sphere, cylinder, perturbed_cylinder, identity_minus_plane, zero, bianchi_generic, "
                   "pic_interior, near_pic1_boundary")
      ->required();
  make->add_option("--param", param, "curvature constant, eps or seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*classify) return cmd_classify(f, tensor_path);
    if (*p1_cmd) return cmd_p1(f, tensor_path);
    if (*flow) return cmd_flow(f, tensor_path, t_end, ode_tol, cones);
    if (*pipeline) return cmd_pipeline(f, tensor_path);
    if (*lemma) return cmd_lemma31(f, tensor_path, count, dims, jobs);
    if (*models) return cmd_models(f, samples);
    if (*make) return cmd_make_tensor(f, kind, param);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: ParseError: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}
