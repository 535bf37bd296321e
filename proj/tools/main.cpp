// Command-line front end for the schedule toolkit. Links only the public C
// API; every file it writes is paired with a manifest that records the
// resolved configuration, the seed, and digests of all inputs and outputs.
#include <cctype>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ays.h"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

struct CliError {
  int exit_code;
  std::string message;
};

[[noreturn]] void fail_usage(const std::string& msg) {
  throw CliError{2, msg};
}

void check(int status) {
  if (status == AYS_OK) return;
  int code = status == AYS_ERR_RUNTIME ? 1 : 2;
  throw CliError{code, ays_last_error()};
}

std::string take_string(char* s) {
  std::string out = s ? s : "";
  ays_string_free(s);
  return out;
}

using SchedulePtr = std::unique_ptr<ays_schedule, void (*)(ays_schedule*)>;
using ModelPtr = std::unique_ptr<ays_model, void (*)(ays_model*)>;
using OptResultPtr = std::unique_ptr<ays_opt_result, void (*)(ays_opt_result*)>;

SchedulePtr wrap(ays_schedule* p) { return {p, ays_schedule_free}; }
ModelPtr wrap(ays_model* p) { return {p, ays_model_free}; }

void require_input(const std::string& path) {
  if (!fs::exists(path)) fail_usage("input not found: " + path);
}

SchedulePtr load_schedule(const std::string& path) {
  require_input(path);
  ays_schedule* s = nullptr;
  check(ays_schedule_load(path.c_str(), &s));
  return wrap(s);
}

ModelPtr load_model(const std::string& path) {
  require_input(path);
  ays_model* m = nullptr;
  check(ays_model_load(path.c_str(), &m));
  return wrap(m);
}

std::vector<double> schedule_values(const ays_schedule* s) {
  int n = ays_schedule_steps(s) + 1;
  std::vector<double> v(static_cast<size_t>(n));
  if (ays_schedule_values(s, v.data(), n) != n)
    throw CliError{1, ays_last_error()};
  return v;
}

std::string utc_timestamp() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Reproducibility record written next to every output. Input digests are
// taken when registered, output digests after the files exist.
struct Manifest {
  std::string command;
  std::vector<std::string> argv;
  ordered_json config = ordered_json::object();
  ordered_json inputs = ordered_json::object();
  std::vector<std::string> output_paths;

  void add_input(const std::string& path) {
    char* hex = nullptr;
    check(ays_file_digest(path.c_str(), &hex));
    inputs[path] = take_string(hex);
  }
  void add_output(const std::string& path) { output_paths.push_back(path); }

  void write(const std::string& path) const {
    ordered_json j;
    j["tool"] = "ays";
    j["version"] = ays_version();
    j["command"] = command;
    j["argv"] = argv;
    j["config"] = config;
    j["inputs"] = inputs;
    ordered_json outs = ordered_json::object();
    for (const std::string& p : output_paths) {
      char* hex = nullptr;
      check(ays_file_digest(p.c_str(), &hex));
      outs[p] = take_string(hex);
    }
    j["outputs"] = outs;
    j["timestamp"] = utc_timestamp();
    check(ays_write_text(path.c_str(), (j.dump(2) + "\n").c_str()));
  }
};

void write_json(const std::string& path, const ordered_json& j) {
  check(ays_write_text(path.c_str(), (j.dump(2) + "\n").c_str()));
}

std::string sanitize(const std::string& label) {
  std::string out;
  for (char ch : label)
    out += (std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' ||
            ch == '_' || ch == '.')
               ? ch
               : '-';
  return out;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// 50x50 row-major count grid over the model's mean +/- 4 std box
void write_histogram(const std::string& path, const ays_model* m,
                     const double* xs, int64_t n, ordered_json* box_out) {
  if (ays_model_dim(m) != 2)
    fail_usage("histogram export needs a 2-d model");
  double mean[2], std[2];
  check(ays_model_axis_moments(m, mean, std));
  double box[4] = {mean[0] - 4 * std[0], mean[0] + 4 * std[0],
                   mean[1] - 4 * std[1], mean[1] + 4 * std[1]};
  constexpr int kBins = 50;
  std::vector<int64_t> counts(kBins * kBins);
  check(ays_histogram2d(xs, n, box, kBins, counts.data()));
  std::string text;
  char buf[32];
  for (int i = 0; i < kBins; i++) {
    for (int j = 0; j < kBins; j++) {
      std::snprintf(buf, sizeof buf, "%" PRId64, counts[i * kBins + j]);
      if (j) text += ',';
      text += buf;
    }
    text += '\n';
  }
  check(ays_write_text(path.c_str(), text.c_str()));
  if (box_out) *box_out = ordered_json{box[0], box[1], box[2], box[3]};
}

// ---- schedule ---------------------------------------------------------

struct ScheduleArgs {
  std::string kind, input, out;
  int steps = 0, interpolate = 0;
  double sigma_min = 0.002, sigma_max = 80.0, rho = 7.0, c = 1.0;
  bool subdivide = false, validate = false;
  std::vector<std::string> argv;
};

int cmd_schedule(const ScheduleArgs& a) {
  if (a.validate) {
    if (a.input.empty()) fail_usage("--validate needs --input");
    require_input(a.input);
    ays_schedule* s = nullptr;
    int status = ays_schedule_load(a.input.c_str(), &s);
    if (status != AYS_OK) {
      std::fprintf(stderr, "invalid: %s\n", ays_last_error());
      return 2;
    }
    SchedulePtr sp = wrap(s);
    std::printf("valid: %d steps, sigma in [%g, %g]\n", ays_schedule_steps(s),
                schedule_values(s).back(), schedule_values(s).front());
    return 0;
  }

  if (a.out.empty()) fail_usage("--out is required");
  Manifest man;
  man.command = "schedule";
  man.argv = a.argv;

  SchedulePtr s{nullptr, ays_schedule_free};
  if (!a.input.empty()) {
    if (!a.kind.empty()) fail_usage("--kind and --input are exclusive");
    man.add_input(a.input);
    s = load_schedule(a.input);
    if (a.subdivide) {
      ays_schedule* t = nullptr;
      check(ays_schedule_subdivide(s.get(), &t));
      s = wrap(t);
    }
    if (a.interpolate > 0) {
      ays_schedule* t = nullptr;
      check(ays_schedule_interpolate(s.get(), a.interpolate, &t));
      s = wrap(t);
    }
    man.config = {{"input", a.input},
                  {"subdivide", a.subdivide},
                  {"interpolate", a.interpolate}};
  } else {
    if (a.kind.empty()) fail_usage("one of --kind or --input is required");
    if (a.steps < 1) fail_usage("--steps must be at least 1");
    ays_schedule* t = nullptr;
    check(ays_schedule_create(a.kind.c_str(), a.steps, a.sigma_min, a.sigma_max,
                              a.rho, a.c, &t));
    s = wrap(t);
    man.config = {{"kind", a.kind},       {"steps", a.steps},
                  {"sigma_min", a.sigma_min}, {"sigma_max", a.sigma_max},
                  {"rho", a.rho},         {"c", a.c}};
  }

  check(ays_schedule_save(s.get(), a.out.c_str()));
  man.add_output(a.out);
  man.write(a.out + ".manifest.json");
  return 0;
}

// ---- optimize ---------------------------------------------------------

struct OptimizeArgs {
  std::string model, out_dir;
  uint64_t seed = 0;
  ays_opt_options opts{};
  std::string monitor_solver = "sde-dpmpp-2m", init_kind = "edm";
  std::vector<std::string> argv;
};

ordered_json options_json(const ays_opt_options& o) {
  return {{"n_candidates", o.n_candidates},
          {"span", o.span},
          {"n_mc", o.n_mc},
          {"pool_size", o.pool_size},
          {"stage1_max_sweeps", o.stage1_max_sweeps},
          {"refine_max_sweeps", o.refine_max_sweeps},
          {"early_stop_cadence", o.early_stop_cadence},
          {"monitor_samples", o.monitor_samples},
          {"monitor_solver", o.monitor_solver},
          {"monitor_lambda", o.monitor_lambda},
          {"init_kind", o.init_kind},
          {"init_rho", o.init_rho},
          {"sigma_min", o.sigma_min},
          {"sigma_max", o.sigma_max},
          {"seed", o.seed}};
}

int cmd_optimize(OptimizeArgs& a) {
  a.opts.monitor_solver = a.monitor_solver.c_str();
  a.opts.init_kind = a.init_kind.c_str();
  a.opts.seed = a.seed;

  ModelPtr model = load_model(a.model);
  fs::create_directories(a.out_dir);

  Manifest man;
  man.command = "optimize";
  man.argv = a.argv;
  man.add_input(a.model);
  man.config = {{"model", a.model}, {"options", options_json(a.opts)}};

  ays_opt_result* raw = nullptr;
  check(ays_optimize(model.get(), &a.opts, &raw));
  OptResultPtr result(raw, ays_opt_result_free);

  std::vector<std::vector<double>> values;
  for (int steps : {10, 20, 40}) {
    ays_schedule* s = nullptr;
    check(ays_opt_result_schedule(result.get(), steps, &s));
    SchedulePtr sp = wrap(s);
    std::string path = a.out_dir + "/s" + std::to_string(steps) + ".json";
    check(ays_schedule_save(sp.get(), path.c_str()));
    man.add_output(path);
    values.push_back(schedule_values(sp.get()));
  }

  // refinement stages only move the inserted points, so every coarse value
  // must reappear verbatim at the even indices of the next stage
  bool frozen = true;
  for (size_t k = 0; k + 1 < values.size(); k++)
    for (size_t i = 0; i < values[k].size(); i++)
      frozen = frozen && values[k + 1][2 * i] == values[k][i];

  ordered_json core_report =
      ordered_json::parse(take_string([&] {
        char* text = nullptr;
        check(ays_opt_result_report_json(result.get(), &text));
        return text;
      }()));

  ordered_json warnings = ordered_json::array();
  if (core_report.value("stop_reason", "") == std::string("max_sweeps"))
    warnings.push_back(
        "stage 1 stopped at the sweep budget before the schedule stopped changing");
  if (!frozen) warnings.push_back("coarse-stage values moved during refinement");

  ordered_json report;
  report["schedules"] = {{"10", "s10.json"}, {"20", "s20.json"}, {"40", "s40.json"}};
  report["checks"] = {{"even_index_freezing", frozen}};
  report["warnings"] = warnings;
  report["optimization"] = core_report;
  std::string report_path = a.out_dir + "/report.json";
  write_json(report_path, report);
  man.add_output(report_path);

  man.write(a.out_dir + "/manifest.json");
  for (const auto& w : warnings)
    std::fprintf(stderr, "warning: %s\n", w.get<std::string>().c_str());
  return 0;
}

// ---- sample -----------------------------------------------------------

struct SampleArgs {
  std::string model, schedule, solver, out, format, trace, histogram;
  double lambda = 1.0;
  int64_t n = 0;
  uint64_t seed = 0;
  bool from_marginal = false, check_variance = false;
  std::vector<std::string> argv;
};

int cmd_sample(const SampleArgs& a) {
  ModelPtr model = load_model(a.model);
  SchedulePtr sched = load_schedule(a.schedule);
  int d = ays_model_dim(model.get());

  std::string format = a.format;
  if (format.empty())
    format = (ends_with(a.out, ".f64") || ends_with(a.out, ".bin")) ? "f64"
                                                                     : "csv";
  if (format != "csv" && format != "f64")
    fail_usage("--format must be csv or f64");
  if (a.check_variance) {
    if (ays_model_is_gaussian(model.get()) != 1)
      fail_usage("--check-variance needs an isotropic Gaussian model");
    if (a.solver != "ddim")
      fail_usage("--check-variance is defined for the ddim solver");
    if (!a.from_marginal)
      fail_usage("--check-variance needs --from-marginal so the predicted "
                 "variance applies");
  }

  Manifest man;
  man.command = "sample";
  man.argv = a.argv;
  man.add_input(a.model);
  man.add_input(a.schedule);
  man.config = {{"model", a.model},   {"schedule", a.schedule},
                {"solver", a.solver}, {"lambda", a.lambda},
                {"n", a.n},           {"seed", a.seed},
                {"format", format},   {"from_marginal", a.from_marginal}};

  std::vector<double> xs(static_cast<size_t>(a.n) * d);
  check(ays_sampler_run(model.get(), a.solver.c_str(), a.lambda, sched.get(),
                        a.n, a.seed, a.from_marginal ? 1 : 0, xs.data(),
                        a.trace.empty() ? nullptr : a.trace.c_str()));

  if (format == "csv")
    check(ays_write_samples_csv(a.out.c_str(), xs.data(), a.n, d));
  else
    check(ays_write_samples_f64(a.out.c_str(), xs.data(), a.n, d));
  man.add_output(a.out);
  if (!a.trace.empty()) man.add_output(a.trace);

  if (!a.histogram.empty()) {
    ordered_json box;
    write_histogram(a.histogram, model.get(), xs.data(), a.n, &box);
    man.add_output(a.histogram);
    man.config["histogram_box"] = box;
  }

  if (a.check_variance) {
    double c = 0;
    check(ays_model_gaussian_c(model.get(), &c));
    double predicted = 0;
    check(ays_gaussian_euler_output_variance(sched.get(), c, &predicted));
    double sumsq = 0;
    for (double v : xs) sumsq += v * v;
    double empirical = sumsq / (static_cast<double>(a.n) * d);
    double rel = std::abs(empirical / predicted - 1.0);
    std::printf("empirical variance %.6g, predicted %.6g, relative error %.3g\n",
                empirical, predicted, rel);
    man.config["variance_check"] = {{"empirical", empirical},
                                    {"predicted", predicted},
                                    {"relative_error", rel}};
  }

  man.write(a.out + ".manifest.json");
  return 0;
}

// ---- eval -------------------------------------------------------------

struct EvalArgs {
  std::string metric, model, samples, schedule, out;
  int64_t n_mc = 4096, pool_size = 8192;
  uint64_t seed = 0;
  std::vector<std::string> argv;
};

int cmd_eval(const EvalArgs& a) {
  ModelPtr model = load_model(a.model);
  Manifest man;
  man.command = "eval";
  man.argv = a.argv;
  man.add_input(a.model);

  ordered_json report;
  report["metric"] = a.metric;

  if (a.metric == "nll") {
    if (a.samples.empty()) fail_usage("--metric nll needs --samples");
    require_input(a.samples);
    man.add_input(a.samples);
    int d = ays_model_dim(model.get());
    double* xs = nullptr;
    int64_t n = 0;
    if (ends_with(a.samples, ".f64") || ends_with(a.samples, ".bin")) {
      check(ays_read_samples_f64(a.samples.c_str(), d, &xs, &n));
    } else {
      int file_d = 0;
      check(ays_read_samples_csv(a.samples.c_str(), &xs, &n, &file_d));
      if (file_d != d) {
        ays_buffer_free(xs);
        fail_usage("samples are " + std::to_string(file_d) +
                   "-d but the model is " + std::to_string(d) + "-d");
      }
    }
    std::unique_ptr<double, void (*)(double*)> guard(xs, ays_buffer_free);
    double value = 0, se = 0;
    check(ays_model_nll(model.get(), xs, n, &value, &se));
    report["value"] = value;
    report["std_error"] = se;
    report["n"] = n;
    report["d"] = d;
  } else if (a.metric == "gaussian-euler-kl") {
    if (a.schedule.empty()) fail_usage("--metric gaussian-euler-kl needs --schedule");
    if (ays_model_is_gaussian(model.get()) != 1)
      fail_usage("gaussian-euler-kl needs an isotropic Gaussian model");
    SchedulePtr s = load_schedule(a.schedule);
    man.add_input(a.schedule);
    double c = 0;
    check(ays_model_gaussian_c(model.get(), &c));
    int d = ays_model_dim(model.get());
    double f = 0, kl = 0;
    check(ays_gaussian_euler_kl(s.get(), c, d, &f, &kl));
    report["f"] = f;
    report["kl"] = kl;
    report["c"] = c;
    report["d"] = d;
  } else if (a.metric == "klub") {
    if (a.schedule.empty()) fail_usage("--metric klub needs --schedule");
    SchedulePtr s = load_schedule(a.schedule);
    man.add_input(a.schedule);
    double value = 0, se = 0;
    check(ays_klub_schedule_total(model.get(), s.get(), a.n_mc, a.pool_size,
                                  a.seed, &value, &se));
    report["value"] = value;
    report["std_error"] = se;
    report["n_mc"] = a.n_mc;
    report["pool_size"] = a.pool_size;
  } else {
    fail_usage("unknown metric: " + a.metric);
  }

  report["seed"] = a.seed;
  std::printf("%s\n", report.dump(2).c_str());
  if (!a.out.empty()) {
    man.config = {{"metric", a.metric},
                  {"n_mc", a.n_mc},
                  {"pool_size", a.pool_size},
                  {"seed", a.seed}};
    write_json(a.out, report);
    man.add_output(a.out);
    man.write(a.out + ".manifest.json");
  }
  return 0;
}

// ---- compare ----------------------------------------------------------

struct CompareArgs {
  std::string model, out_dir;
  std::vector<std::string> solvers{"sde-dpmpp-2m"};
  std::vector<std::string> schedules;
  std::vector<int> nfes;
  int64_t n = 100000;
  uint64_t seed = 0;
  double lambda = 1.0;
  double sigma_min = 0.002, sigma_max = 80.0;
  bool histograms = false, from_marginal = false;
  std::vector<std::string> argv;
};

// one named source of schedules, resolved per requested step count
struct ScheduleSource {
  std::string label;
  std::string kind;  // file | dir | heuristic
  std::string path;  // file or dir entries
};

bool is_heuristic_kind(const std::string& s) {
  return s == "edm" || s == "logsnr" || s == "time-uniform" ||
         s == "time-quadratic";
}

ScheduleSource resolve_source(const std::string& entry) {
  if (fs::is_directory(entry)) {
    fs::path p(entry);
    if (!p.has_filename()) p = p.parent_path();  // "opt/" -> "opt"
    return {p.filename().string(), "dir", entry};
  }
  if (fs::exists(entry))
    return {fs::path(entry).stem().string(), "file", entry};
  if (is_heuristic_kind(entry)) return {entry, "heuristic", entry};
  fail_usage("schedule entry is neither a file, a directory, nor a known kind: " +
             entry);
}

SchedulePtr schedule_at_nfe(const ScheduleSource& src, int nfe,
                            const CompareArgs& a, Manifest& man) {
  if (src.kind == "heuristic") {
    ays_schedule* s = nullptr;
    check(ays_schedule_create(src.path.c_str(), nfe, a.sigma_min, a.sigma_max,
                              7.0, 1.0, &s));
    return wrap(s);
  }
  std::string path = src.path;
  if (src.kind == "dir") {
    std::string exact = src.path + "/s" + std::to_string(nfe) + ".json";
    path = fs::exists(exact) ? exact : src.path + "/s40.json";
  }
  if (!man.inputs.contains(path)) man.add_input(path);
  SchedulePtr s = load_schedule(path);
  if (ays_schedule_steps(s.get()) != nfe) {
    ays_schedule* t = nullptr;
    check(ays_schedule_interpolate(s.get(), nfe, &t));
    s = wrap(t);
  }
  return s;
}

int cmd_compare(const CompareArgs& a) {
  if (a.schedules.empty()) fail_usage("--schedules is required");
  if (a.nfes.empty()) fail_usage("--nfe is required");
  for (int nfe : a.nfes)
    if (nfe < 1) fail_usage("--nfe entries must be at least 1");

  ModelPtr model = load_model(a.model);
  int d = ays_model_dim(model.get());
  if (a.histograms && d != 2) fail_usage("--histograms needs a 2-d model");
  fs::create_directories(a.out_dir);

  Manifest man;
  man.command = "compare";
  man.argv = a.argv;
  man.add_input(a.model);
  man.config = {{"model", a.model},     {"solvers", a.solvers},
                {"schedules", a.schedules}, {"nfe", a.nfes},
                {"n", a.n},             {"seed", a.seed},
                {"lambda", a.lambda},   {"sigma_min", a.sigma_min},
                {"sigma_max", a.sigma_max}, {"from_marginal", a.from_marginal}};

  std::vector<ScheduleSource> sources;
  for (const std::string& e : a.schedules) sources.push_back(resolve_source(e));

  std::string csv = "solver,schedule,nfe,nll,std_error\n";
  ordered_json rows = ordered_json::array();
  std::vector<double> xs;

  for (const std::string& solver : a.solvers) {
    for (const ScheduleSource& src : sources) {
      for (int nfe : a.nfes) {
        SchedulePtr s = schedule_at_nfe(src, nfe, a, man);
        xs.assign(static_cast<size_t>(a.n) * d, 0.0);
        check(ays_sampler_run(model.get(), solver.c_str(), a.lambda, s.get(),
                              a.n, a.seed, a.from_marginal ? 1 : 0, xs.data(),
                              nullptr));
        double nll = 0, se = 0;
        check(ays_model_nll(model.get(), xs.data(), a.n, &nll, &se));

        char line[256];
        std::snprintf(line, sizeof line, "%s,%s,%d,%.17g,%.17g\n",
                      solver.c_str(), src.label.c_str(), nfe, nll, se);
        csv += line;
        rows.push_back({{"solver", solver},
                        {"schedule", src.label},
                        {"nfe", nfe},
                        {"nll", nll},
                        {"std_error", se}});

        if (a.histograms) {
          std::string hist_path = a.out_dir + "/hist_" + sanitize(solver) +
                                  "_" + sanitize(src.label) + "_" +
                                  std::to_string(nfe) + ".csv";
          write_histogram(hist_path, model.get(), xs.data(), a.n, nullptr);
          man.add_output(hist_path);
        }
      }
    }
  }

  std::string csv_path = a.out_dir + "/compare.csv";
  check(ays_write_text(csv_path.c_str(), csv.c_str()));
  man.add_output(csv_path);

  ordered_json report;
  report["rows"] = rows;
  report["config"] = man.config;
  std::string report_path = a.out_dir + "/report.json";
  write_json(report_path, report);
  man.add_output(report_path);

  man.write(a.out_dir + "/manifest.json");
  std::printf("%s", csv.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"schedule optimization toolkit for diffusion samplers"};
  app.require_subcommand(1);
  std::vector<std::string> full_argv(argv, argv + argc);

  ScheduleArgs sa;
  sa.argv = full_argv;
  CLI::App* sched = app.add_subcommand("schedule",
                                       "generate, transform, or validate a schedule");
  sched->add_option("--kind", sa.kind,
                    "edm | logsnr | time-uniform | time-quadratic | "
                    "gaussian-optimal | gaussian-klub-optimal");
  sched->add_option("--steps", sa.steps, "number of sampling steps");
  sched->add_option("--sigma-min", sa.sigma_min, "smallest noise level");
  sched->add_option("--sigma-max", sa.sigma_max, "largest noise level");
  sched->add_option("--rho", sa.rho, "edm curvature exponent");
  sched->add_option("--c", sa.c, "gaussian data standard deviation");
  sched->add_option("--input", sa.input, "existing schedule file to transform");
  sched->add_flag("--subdivide", sa.subdivide, "double the step count");
  sched->add_option("--interpolate", sa.interpolate,
                    "resample to this many steps");
  sched->add_flag("--validate", sa.validate, "check --input and exit");
  sched->add_option("--out", sa.out, "output schedule file");

  OptimizeArgs oa;
  oa.argv = full_argv;
  ays_opt_options_defaults(&oa.opts);
  CLI::App* opt = app.add_subcommand("optimize",
                                     "optimize a schedule for a data model");
  opt->add_option("--model", oa.model, "model config file")->required();
  opt->add_option("--out-dir", oa.out_dir, "output directory")->required();
  opt->add_option("--seed", oa.seed, "random seed")->required();
  opt->add_option("--candidates", oa.opts.n_candidates, "values tried per point");
  opt->add_option("--span", oa.opts.span, "candidate range as a fraction of the gap");
  opt->add_option("--n-mc", oa.opts.n_mc, "Monte-Carlo draws per pair");
  opt->add_option("--pool-size", oa.opts.pool_size, "data pool size");
  opt->add_option("--stage1-sweeps", oa.opts.stage1_max_sweeps, "stage-1 sweep cap");
  opt->add_option("--refine-sweeps", oa.opts.refine_max_sweeps,
                  "sweep cap for each refinement stage");
  opt->add_option("--cadence", oa.opts.early_stop_cadence,
                  "sweeps between monitor evaluations");
  opt->add_option("--monitor-samples", oa.opts.monitor_samples,
                  "sampler draws per monitor evaluation");
  opt->add_option("--monitor-solver", oa.monitor_solver, "monitor sampler");
  opt->add_option("--monitor-lambda", oa.opts.monitor_lambda,
                  "monitor sampler noise level");
  opt->add_option("--init", oa.init_kind,
                  "starting schedule: edm | logsnr | time-uniform | time-quadratic");
  opt->add_option("--rho", oa.opts.init_rho, "edm curvature for the start");
  opt->add_option("--sigma-min", oa.opts.sigma_min, "smallest noise level");
  opt->add_option("--sigma-max", oa.opts.sigma_max, "largest noise level");

  SampleArgs ma;
  ma.argv = full_argv;
  CLI::App* smp = app.add_subcommand("sample", "run a sampler along a schedule");
  smp->add_option("--model", ma.model, "model config file")->required();
  smp->add_option("--schedule", ma.schedule, "schedule file")->required();
  smp->add_option("--solver", ma.solver,
                  "ddim | stochastic-ddim | er-sde | dpmpp-2m | sde-dpmpp-2m")
      ->required();
  smp->add_option("--lambda", ma.lambda, "er-sde noise parameter");
  smp->add_option("--n", ma.n, "number of samples")->required();
  smp->add_option("--seed", ma.seed, "random seed")->required();
  smp->add_option("--out", ma.out, "output samples file")->required();
  smp->add_option("--format", ma.format, "csv | f64 (default from extension)");
  smp->add_option("--trace", ma.trace, "per-step trace CSV");
  smp->add_flag("--from-marginal", ma.from_marginal,
                "start chains from the exact noised data law");
  smp->add_option("--histogram", ma.histogram, "50x50 count grid CSV (2-d models)");
  smp->add_flag("--check-variance", ma.check_variance,
                "compare the empirical output variance with the closed form "
                "(gaussian model, ddim, --from-marginal)");

  EvalArgs ea;
  ea.argv = full_argv;
  CLI::App* ev = app.add_subcommand("eval", "evaluate a metric");
  ev->add_option("--metric", ea.metric, "nll | gaussian-euler-kl | klub")
      ->required();
  ev->add_option("--model", ea.model, "model config file")->required();
  ev->add_option("--samples", ea.samples, "samples file (nll)");
  ev->add_option("--schedule", ea.schedule, "schedule file (gaussian-euler-kl, klub)");
  ev->add_option("--n-mc", ea.n_mc, "Monte-Carlo draws per interval (klub)");
  ev->add_option("--pool-size", ea.pool_size, "data pool size (klub)");
  ev->add_option("--seed", ea.seed, "random seed")->required();
  ev->add_option("--out", ea.out, "report file (also printed to stdout)");

  CompareArgs ca;
  ca.argv = full_argv;
  CLI::App* cmp = app.add_subcommand(
      "compare", "sample and score schedule/solver/step-count combinations");
  cmp->add_option("--model", ca.model, "model config file")->required();
  cmp->add_option("--solvers", ca.solvers, "solver names")->delimiter(',');
  cmp->add_option("--schedules", ca.schedules,
                  "schedule files, optimize output directories, or kinds")
      ->delimiter(',')
      ->required();
  cmp->add_option("--nfe", ca.nfes, "step counts")->delimiter(',')->required();
  cmp->add_option("--n", ca.n, "samples per combination");
  cmp->add_option("--seed", ca.seed, "random seed")->required();
  cmp->add_option("--lambda", ca.lambda, "er-sde noise parameter");
  cmp->add_option("--sigma-min", ca.sigma_min, "smallest noise level (kinds)");
  cmp->add_option("--sigma-max", ca.sigma_max, "largest noise level (kinds)");
  cmp->add_flag("--histograms", ca.histograms, "export a 50x50 grid per cell");
  cmp->add_flag("--from-marginal", ca.from_marginal,
                "start chains from the exact noised data law");
  cmp->add_option("--out-dir", ca.out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
    if (sched->parsed()) return cmd_schedule(sa);
    if (opt->parsed()) return cmd_optimize(oa);
    if (smp->parsed()) return cmd_sample(ma);
    if (ev->parsed()) return cmd_eval(ea);
    if (cmp->parsed()) return cmd_compare(ca);
    return 2;
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const CliError& e) {
    std::fprintf(stderr, "error: %s\n", e.message.c_str());
    return e.exit_code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
