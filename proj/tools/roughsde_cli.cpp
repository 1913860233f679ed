// Command-line front end: path sampling, covariance queries, convergence
// runs, rough-analysis diagnostics and the two-example reproduction.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "roughsde/format.hpp"
#include "roughsde/harness.hpp"
#include "roughsde/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace roughsde;

namespace {

// Bad input detected after parsing. Exit code 2 like parse errors.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const std::vector<std::string> kSubcommands{"sample", "cov", "converge", "diagnose",
                                            "reproduce-paper"};

std::uint64_t default_seed() {
  if (const char* env = std::getenv("RE_SEED")) {
    try {
      std::size_t used = 0;
      const std::string text(env);
      const auto v = std::stoull(text, &used);
      if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    throw UsageError(std::string("RE_SEED is not an unsigned integer: ") + env);
  }
  return 0;
}

// Flat key=value file, one pair per line, '#' starts a comment.
std::vector<std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path);
  std::vector<std::string> args;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected key=value");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty()) throw UsageError(path + ":" + std::to_string(lineno) + ": empty key");
    args.push_back("--" + key + "=" + value);
  }
  return args;
}

// Config file pairs go right after the subcommand so that explicit flags,
// which come later, win under the take-last policy.
std::vector<std::string> expand_arguments(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::optional<std::string> config;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file name");
      config = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      --i;
    } else if (args[i].rfind("--config=", 0) == 0) {
      config = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      --i;
    }
  }
  if (!config) return args;
  const std::vector<std::string> extra = read_config(*config);
  auto at = args.begin();
  for (auto it = args.begin(); it != args.end(); ++it) {
    if (std::find(kSubcommands.begin(), kSubcommands.end(), *it) != kSubcommands.end()) {
      at = it + 1;
      break;
    }
  }
  args.insert(at, extra.begin(), extra.end());
  return args;
}

std::vector<int> parse_levels(const std::string& text) {
  std::vector<int> out;
  try {
    if (const auto dash = text.find('-'); dash != std::string::npos) {
      const int lo = std::stoi(text.substr(0, dash)), hi = std::stoi(text.substr(dash + 1));
      if (lo > hi) throw UsageError("empty level range " + text);
      for (int k = lo; k <= hi; ++k) out.push_back(k);
    } else {
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
    }
  } catch (const std::logic_error&) {
    throw UsageError("cannot parse levels '" + text + "' (use 6-11 or 6,7,8)");
  }
  if (out.empty()) throw UsageError("no levels given");
  return out;
}

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(parse_double(item));
    } catch (const std::exception&) {
      throw UsageError("cannot parse number '" + item + "'");
    }
  }
  return out;
}

CLI::Validator open_unit() {
  return CLI::Validator(
      [](std::string& s) -> std::string {
        try {
          const double v = std::stod(s);
          if (v > 0.0 && v < 1.0) return {};
        } catch (const std::exception&) {
        }
        return "value " + s + " not in (0,1)";
      },
      "IN (0,1)");
}

CLI::Validator positive() {
  return CLI::Validator(
      [](std::string& s) -> std::string {
        try {
          if (std::stod(s) > 0.0) return {};
        } catch (const std::exception&) {
        }
        return "value " + s + " must be positive";
      },
      "POSITIVE");
}

std::ostream& open_output(const std::string& path, std::ofstream& file) {
  if (path == "-") return std::cout;
  if (const auto dir = fs::path(path).parent_path(); !dir.empty()) fs::create_directories(dir);
  file.open(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write " + path);
  return file;
}

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << j.dump(2) << '\n';
}

void emit_json(const std::string& out, const json& j) {
  std::ofstream file;
  open_output(out, file) << j.dump(2) << '\n';
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

SamplerMethod method_for(const std::string& name, int steps) {
  return name == "auto" ? default_sampler_method(steps) : parse_sampler_method(name);
}

const std::vector<std::string> kMethods{"auto", "cholesky", "circulant"};

// ---------------------------------------------------------------------------

struct SampleArgs {
  double hurst = 0.0;
  int n = 1024;
  double horizon = 1.0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::string method = "auto";
  std::string out = "-";
};

void add_sample(CLI::App& app, SampleArgs& a, std::function<void()>& run) {
  auto* cmd = app.add_subcommand("sample", "Sample one fBm path and write it as CSV");
  cmd->add_option("--hurst,-H", a.hurst, "Hurst parameter")->required()->check(open_unit());
  cmd->add_option("--n", a.n, "Number of steps")->check(CLI::PositiveNumber);
  cmd->add_option("--T", a.horizon, "Horizon")->check(positive());
  cmd->add_option("--seed", a.seed, "Master seed (default: RE_SEED or 0)");
  cmd->add_option("--stream", a.stream, "Stream index");
  cmd->add_option("--method", a.method, "Sampler")->check(CLI::IsMember(kMethods));
  cmd->add_option("--out,-o", a.out, "Output file, - for stdout");
  cmd->callback([&a, &run] {
    run = [&a] {
      const SamplerMethod method = method_for(a.method, a.n);
      const FbmPath path = FbmSampler(a.hurst, a.n, a.horizon, method).sample(RngStream{a.seed, a.stream});
      std::ofstream file;
      write_path_csv(open_output(a.out, file), path);
      if (a.out != "-") {
        file.close();
        write_json_file(a.out + ".json",
                        {{"version", version_string()},
                         {"command", "sample"},
                         {"config",
                          {{"H", a.hurst}, {"n", a.n}, {"T", a.horizon}, {"seed", a.seed},
                           {"stream", a.stream}, {"method", to_string(method)}, {"out", a.out}}}});
      }
    };
  });
}

// ---------------------------------------------------------------------------

struct CovArgs {
  double hurst = 0.0;
  std::optional<double> s, t;
  std::string rect;
  int grid = 0;
  double horizon = 1.0;
  int quadrature = 32;
  std::string out = "-";
};

void add_cov(CLI::App& app, CovArgs& a, std::function<void()>& run) {
  auto* cmd = app.add_subcommand("cov", "Evaluate the fBm covariance");
  cmd->add_option("--hurst,-H", a.hurst, "Hurst parameter")->required()->check(open_unit());
  cmd->add_option("--s", a.s, "First time");
  cmd->add_option("--t", a.t, "Second time");
  cmd->add_option("--rect", a.rect, "Rectangle a,b,c,d for E[(B_b-B_a)(B_d-B_c)]");
  cmd->add_option("--grid", a.grid, "Covariance matrix at T k/n, k = 1..n")->check(CLI::PositiveNumber);
  cmd->add_option("--T", a.horizon, "Horizon for --grid")->check(positive());
  cmd->add_option("--quadrature", a.quadrature, "Panels for the quadrature cross-check of --rect")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out,-o", a.out, "Output JSON file, - for stdout");
  cmd->callback([&a, &run] {
    if (a.s.has_value() != a.t.has_value()) throw UsageError("--s and --t go together");
    if (!a.s && a.rect.empty() && a.grid == 0) throw UsageError("give --s/--t, --rect or --grid");
    if (a.s && (*a.s < 0 || *a.t < 0)) throw UsageError("times must be nonnegative");
    std::vector<double> r;
    if (!a.rect.empty()) {
      r = parse_doubles(a.rect);
      if (r.size() != 4) throw UsageError("--rect needs four numbers a,b,c,d");
      if (r[0] > r[1] || r[2] > r[3] || r[0] < 0 || r[2] < 0)
        throw UsageError("--rect needs 0 <= a <= b and 0 <= c <= d");
    }
    auto grid = a.grid;
    run = [&a, r, grid] {
      const Kernel k(a.hurst);
      json j = {{"version", version_string()}, {"command", "cov"}, {"H", a.hurst}};
      if (a.s) {
        j["s"] = *a.s;
        j["t"] = *a.t;
        j["cov"] = cov(k, *a.s, *a.t);
      }
      if (!r.empty()) {
        const Rect<double> rect(r[0], r[1], r[2], r[3]);
        j["rect"] = r;
        j["rect_increment"] = rect_increment(k, rect);
        if (a.hurst < 0.5 && !rect.interiors_overlap()) {
          j["quadrature"] = increment_cov_quadrature(k, rect, a.quadrature);
          j["quadrature_panels"] = a.quadrature;
        }
      }
      if (grid > 0) {
        Eigen::VectorXd times(grid);
        for (int i = 0; i < grid; ++i) times[i] = a.horizon * (i + 1) / grid;
        const Eigen::MatrixXd m = cov_matrix(k, times);
        json rows = json::array();
        for (int i = 0; i < grid; ++i) {
          json row = json::array();
          for (int c = 0; c < grid; ++c) row.push_back(m(i, c));
          rows.push_back(row);
        }
        j["T"] = a.horizon;
        j["times"] = std::vector<double>(times.data(), times.data() + grid);
        j["matrix"] = rows;
      }
      emit_json(a.out, j);
    };
  });
}

// ---------------------------------------------------------------------------

struct RunArgs {
  std::string levels = "6-11";
  int ref = 15;
  int paths = 1000;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string method = "circulant";
  bool quick = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--levels", levels, "Coarse level exponents, 6-11 or 6,7,8");
    cmd->add_option("--ref", ref, "Reference exponent")->check(CLI::Range(1, 24));
    cmd->add_option("--paths", paths, "Monte Carlo paths")->check(CLI::Range(2, 100000000));
    cmd->add_option("--seed", seed, "Master seed (default: RE_SEED or 0)");
    cmd->add_option("--workers", workers, "Worker threads")->check(CLI::Range(1, 1024));
    cmd->add_option("--method", method, "Sampler")->check(CLI::IsMember(kMethods));
    cmd->add_flag("--quick", quick, "Scale down to 100 paths, reference exponent 12, levels 6-9");
  }

  // --quick only replaces values that were not set explicitly.
  void resolve(const CLI::App* cmd) {
    if (!quick) return;
    if (cmd->count("--paths") == 0) paths = 100;
    if (cmd->count("--ref") == 0) ref = 12;
    // Levels close to the reference bias the fitted slope upwards.
    if (cmd->count("--levels") == 0) levels = "6-9";
  }

  json to_json_config() const {
    return {{"levels", parse_levels(levels)}, {"ref", ref},         {"paths", paths},
            {"seed", seed},                   {"workers", workers}, {"method", method},
            {"quick", quick}};
  }
};

struct ConvergeArgs {
  RunArgs run;
  double hurst = 0.0;
  int example = 0;
  std::string drift = "example1";
  double coefficient = 2.0;
  double sigma = 1.0;
  double x0 = 1.0;
  double horizon = 1.0;
  std::string reference = "fine-euler";
  int bootstrap = 50;
  std::string out_dir = ".";
};

void add_converge(CLI::App& app, ConvergeArgs& a, std::function<void()>& run) {
  auto* cmd = app.add_subcommand("converge", "Strong error curve and fitted rate");
  cmd->add_option("--hurst,-H", a.hurst, "Hurst parameter")->required()->check(open_unit());
  cmd->add_option("--example", a.example, "Preset problem 1 or 2")->check(CLI::IsMember({1, 2}));
  cmd->add_option("--drift", a.drift, "Drift when no preset is used")
      ->check(CLI::IsMember({"example1", "linear", "zero"}));
  cmd->add_option("--A", a.coefficient, "Coefficient of the linear drift");
  cmd->add_option("--sigma", a.sigma, "Noise intensity");
  cmd->add_option("--x0", a.x0, "Initial value");
  cmd->add_option("--T", a.horizon, "Horizon")->check(positive());
  cmd->add_option("--reference", a.reference, "Reference solution")
      ->check(CLI::IsMember({"fine-euler", "exact-linear"}));
  cmd->add_option("--bootstrap", a.bootstrap, "Bootstrap resamples for the slope uncertainty")
      ->check(CLI::Range(0, 100000));
  cmd->add_option("--out-dir", a.out_dir, "Directory for curve.csv and manifest.json");
  a.run.add_to(cmd);
  cmd->callback([cmd, &a, &run] {
    a.run.resolve(cmd);
    ExperimentConfig c;
    if (a.example != 0) {
      c.problem = example_problem(a.example);
      if (cmd->count("--A")) {
        if (a.example != 2) throw UsageError("--A applies to the linear example only");
        c.problem.drift = drift_linear(a.coefficient);
      }
      if (cmd->count("--drift")) throw UsageError("--drift and --example are exclusive");
    } else if (a.drift == "example1") {
      c.problem.drift = drift_example1();
    } else if (a.drift == "linear") {
      c.problem.drift = drift_linear(a.coefficient);
    } else {
      c.problem.drift = drift_zero();
    }
    if (a.example == 0 || cmd->count("--sigma")) c.problem.sigma = a.sigma;
    if (a.example == 0 || cmd->count("--x0")) c.problem.x0 = a.x0;
    if (a.example == 0 || cmd->count("--T")) c.problem.horizon = a.horizon;
    c.hurst = a.hurst;
    c.level_exponents = parse_levels(a.run.levels);
    c.ref_exponent = a.run.ref;
    c.paths = a.run.paths;
    c.master_seed = a.run.seed;
    c.workers = a.run.workers;
    c.sampler_method = method_for(a.run.method, 1 << a.run.ref);
    c.reference = a.reference == "exact-linear" ? ReferenceKind::exact_linear : ReferenceKind::fine_euler;
    c.bootstrap_resamples = a.bootstrap;
    try {
      (void)validate(c);
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }
    run = [&a, c] {
      const bool linear = c.problem.drift.linear_coefficient.has_value();
      const double theory = a.example ? theoretical_rate(a.example, c.hurst)
                                      : (linear ? c.hurst + 0.5 : 2.0 * c.hurst);
      const double tol = a.example ? rate_tolerance(a.example) : (linear ? 0.10 : 0.15);
      const ErrorCurve curve = strong_error_curve(c);
      std::optional<RateFit> fit;
      try {
        fit = fit_rate(curve);
      } catch (const DomainError& e) {
        std::clog << "note: " << e.what() << '\n';
      }
      const bool pass = fit && std::abs(fit->slope - theory) <= tol;
      fs::create_directories(a.out_dir);
      {
        std::ofstream f(fs::path(a.out_dir) / "curve.csv", std::ios::binary);
        if (!f) throw std::runtime_error("cannot write into " + a.out_dir);
        write_error_curve_csv(f, curve);
      }
      json m = manifest(curve, fit.value_or(RateFit{}), theory, pass);
      if (!fit) m["fit"] = nullptr;
      // Timings go to their own file so that manifest.json is reproducible.
      write_json_file(fs::path(a.out_dir) / "timings.json",
                      {{"wall_seconds", m["wall_seconds"]}, {"level_seconds", m["level_seconds"]}});
      m.erase("wall_seconds");
      m.erase("level_seconds");
      m["command"] = "converge";
      m["tolerance"] = tol;
      m["resolved"] = a.run.to_json_config();
      m["resolved"]["example"] = a.example;
      m["resolved"]["out_dir"] = a.out_dir;
      write_json_file(fs::path(a.out_dir) / "manifest.json", m);
      std::cout << "H=" << format_short(c.hurst)
                << " slope=" << (fit ? format_short(std::round(fit->slope * 1e4) / 1e4) : std::string("nan"))
                << " theory=" << fixed2(theory) << " pass=" << (pass ? "true" : "false") << '\n';
    };
  });
}

// ---------------------------------------------------------------------------

struct DiagnoseArgs {
  std::string which;
  double hurst = 0.0;
  std::string sizes;
  double horizon = 1.0;
  int m = 8;
  int grid_points = 17;
  std::uint64_t seed = 0;
  std::string out = "-";
};

void add_diagnose(CLI::App& app, DiagnoseArgs& a, std::function<void()>& run) {
  auto* cmd = app.add_subcommand("diagnose", "Covariance and rough-analysis checks");
  cmd->add_option("--which", a.which, "cov-neg, lemma-rr, eq31, eq32 or young")
      ->required()
      ->check(CLI::IsMember({"cov-neg", "lemma-rr", "eq31", "eq32", "young"}));
  cmd->add_option("--hurst,-H", a.hurst, "Hurst parameter")->required()->check(open_unit());
  cmd->add_option("--sizes", a.sizes,
                  "lemma-rr: lengths; eq31/eq32: step counts; cov-neg: samples; young: rectangles");
  cmd->add_option("--T", a.horizon, "Horizon for eq31/eq32")->check(positive());
  cmd->add_option("--m", a.m, "Gauss points per cell and axis")->check(CLI::Range(1, 64));
  cmd->add_option("--grid-points", a.grid_points, "lemma-rr grid points per axis")->check(CLI::Range(2, 200));
  cmd->add_option("--seed", a.seed, "Seed for random samples (default: RE_SEED or 0)");
  cmd->add_option("--out,-o", a.out, "Output JSON file, - for stdout");
  cmd->callback([&a, &run] {
    const double H = a.hurst;
    std::vector<double> sizes = a.sizes.empty() ? std::vector<double>{} : parse_doubles(a.sizes);
    auto need_fit_sizes = [&] {
      if (sizes.size() < 3) throw UsageError("--sizes needs at least three values to fit a slope");
    };
    auto counts = [&] {
      std::vector<int> n;
      for (double v : sizes) {
        if (v < 1 || v != std::floor(v)) throw UsageError("step counts must be positive integers");
        n.push_back(static_cast<int>(v));
      }
      return n;
    };
    auto single_count = [&](int fallback) {
      if (sizes.empty()) return fallback;
      if (sizes.size() != 1 || sizes[0] < 1 || sizes[0] != std::floor(sizes[0]))
        throw UsageError("--sizes takes one positive count for this check");
      return static_cast<int>(sizes[0]);
    };
    std::function<json()> check;
    if (a.which == "cov-neg") {
      const int samples = single_count(1000);
      check = [=] { return to_json(check_increment_negativity(H, samples, a.seed)); };
    } else if (a.which == "young") {
      const int rects = single_count(100);
      check = [=] { return to_json(check_young(H, rects, a.seed)); };
    } else if (a.which == "lemma-rr") {
      if (H > 0.5) throw UsageError("lemma-rr needs H in (0, 1/2]");
      if (sizes.empty()) sizes = {0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625};
      need_fit_sizes();
      for (double v : sizes)
        if (!(v > 0)) throw UsageError("interval lengths must be positive");
      const int gp = a.grid_points;
      check = [=] { return to_json(check_lemma_rr_scaling(H, sizes, gp)); };
    } else {
      const bool eq31 = a.which == "eq31";
      if (eq31 ? !(H > 1.0 / 3 && H < 0.5) : !(H > 1.0 / 3 && H <= 0.5))
        throw UsageError(a.which + " needs H in (1/3, 1/2" + (eq31 ? ")" : "]"));
      if (sizes.empty()) sizes = {16, 32, 64, 128, 256, 512};
      need_fit_sizes();
      const std::vector<int> steps = counts();
      const double T = a.horizon;
      const int m = a.m;
      check = [=] {
        return to_json(eq31 ? check_eq31_scaling(H, T, steps, m) : check_eq32_scaling(H, T, steps, m));
      };
    }
    const json config = {{"which", a.which}, {"H", H},       {"sizes", sizes}, {"T", a.horizon},
                         {"m", a.m},         {"grid_points", a.grid_points},   {"seed", a.seed}};
    run = [&a, check, config] {
      json j = check();
      j["version"] = version_string();
      j["command"] = "diagnose";
      j["config"] = config;
      emit_json(a.out, j);
      std::clog << a.which << " H=" << format_short(a.hurst) << " pass=" << (j["pass"].get<bool>() ? "true" : "false")
                << '\n';
    };
  });
}

// ---------------------------------------------------------------------------

struct ReproduceArgs {
  RunArgs run;
  std::string out_dir = ".";
};

void add_reproduce(CLI::App& app, ReproduceArgs& a, std::function<void()>& run, int& status) {
  auto* cmd = app.add_subcommand("reproduce-paper",
                                 "Both examples at H = 0.35, 0.4, 0.45: curves and summary");
  cmd->add_option("--out-dir", a.out_dir, "Output directory");
  a.run.add_to(cmd);
  cmd->callback([cmd, &a, &run, &status] {
    a.run.resolve(cmd);
    ReproduceOptions o;
    o.level_exponents = parse_levels(a.run.levels);
    o.ref_exponent = a.run.ref;
    o.paths = a.run.paths;
    o.master_seed = a.run.seed;
    o.workers = a.run.workers;
    o.sampler_method = method_for(a.run.method, 1 << a.run.ref);
    try {
      (void)validate(paper_config(1, 0.4, o));
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }
    run = [&a, o, &status] {
      fs::create_directories(a.out_dir);
      json pairs = json::array(), timings = json::array();
      bool errored = false, all_pass = true;
      std::cout << "example  H       slope  theory   tol  pass\n";
      for (int e : {1, 2}) {
        for (double H : {0.35, 0.4, 0.45}) {
          const std::string file = "fig" + std::to_string(e) + "_H" + format_short(H) + ".csv";
          json row = {{"example", e}, {"H", H}, {"file", file}, {"theory", theoretical_rate(e, H)},
                      {"tolerance", rate_tolerance(e)}};
          try {
            const Reproduction r = reproduce_paper(e, H, o);
            std::ofstream f(fs::path(a.out_dir) / file, std::ios::binary);
            if (!f) throw std::runtime_error("cannot write " + file);
            write_error_curve_csv(f, r.curve);
            row["slope"] = r.fit.slope;
            row["intercept"] = r.fit.intercept;
            row["r_squared"] = r.fit.r_squared;
            row["slope_bootstrap_stderr"] = r.curve.slope_std_error;
            row["pass"] = r.pass;
            row["argmax_times"] = json::array();
            for (const auto& er : r.curve.rows) row["argmax_times"].push_back(er.argmax_time);
            all_pass = all_pass && r.pass;
            timings.push_back({{"example", e}, {"H", H}, {"wall_seconds", r.curve.wall_seconds},
                               {"level_seconds", r.curve.level_seconds}});
            char line[96];
            std::snprintf(line, sizeof line, "%7d  %-5s %7.4f %7.2f  %4.2f  %s\n", e, format_short(H).c_str(),
                          r.fit.slope, r.theory, r.tolerance, r.pass ? "true" : "false");
            std::cout << line;
          } catch (const std::exception& ex) {
            errored = true;
            all_pass = false;
            row["error"] = ex.what();
            std::cerr << "example " << e << " H=" << format_short(H) << " failed: " << ex.what() << '\n';
          }
          pairs.push_back(row);
        }
      }
      json config = a.run.to_json_config();
      config["out_dir"] = a.out_dir;
      // No timings here, so reruns with the same seed are byte-identical.
      write_json_file(fs::path(a.out_dir) / "summary.json", {{"version", version_string()},
                                                             {"command", "reproduce-paper"},
                                                             {"config", config},
                                                             {"pairs", pairs},
                                                             {"all_pass", all_pass},
                                                             {"sup_over", "coarse grid times"}});
      write_json_file(fs::path(a.out_dir) / "timings.json", {{"version", version_string()},
                                                             {"command", "reproduce-paper"},
                                                             {"config", config},
                                                             {"timings", timings}});
      status = errored ? 1 : 0;
    };
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Euler scheme for SDEs driven by additive fractional Brownian motion"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version_string());
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.footer("Any subcommand accepts --config FILE with key=value lines; explicit flags win.\n"
             "RE_SEED sets the default seed.");

  std::uint64_t seed_default = 0;
  std::vector<std::string> args;
  try {
    seed_default = default_seed();
    args = expand_arguments(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  SampleArgs sample;
  CovArgs covargs;
  ConvergeArgs converge;
  DiagnoseArgs diagnose;
  ReproduceArgs reproduce;
  sample.seed = converge.run.seed = diagnose.seed = reproduce.run.seed = seed_default;

  std::function<void()> run;
  int status = 0;
  add_sample(app, sample, run);
  add_cov(app, covargs, run);
  add_converge(app, converge, run);
  add_diagnose(app, diagnose, run);
  add_reproduce(app, reproduce, run, status);

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (run) run();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return status;
}
