#include "roughsde/sde.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "roughsde/format.hpp"

namespace roughsde {

DriftSpec drift_example1() {
  DriftSpec d;
  d.name = "example1";
  // |x| >= 1 takes the logarithm branch.
  d.eval = [](double x) {
    if (std::abs(x) >= 1.0) return std::log(std::abs(x));
    const double x2 = x * x;
    return ((x2 / 6.0 - 0.75) * x2 + 1.5) * x2 - 11.0 / 12.0;
  };
  d.d1 = [](double x) {
    if (std::abs(x) >= 1.0) return 1.0 / x;
    const double x2 = x * x;
    return ((x2 - 3.0) * x2 + 3.0) * x;
  };
  d.d2 = [](double x) {
    if (std::abs(x) >= 1.0) return -1.0 / (x * x);
    const double x2 = x * x;
    return (5.0 * x2 - 9.0) * x2 + 3.0;
  };
  d.d3 = [](double x) {
    if (std::abs(x) >= 1.0) return 2.0 / (x * x * x);
    return (20.0 * x * x - 18.0) * x;
  };
  // max |a'| is attained inside (-1,1) where a'' = 0 at x^2 = (9 - sqrt 21) / 10.
  const double xs = std::sqrt((9.0 - std::sqrt(21.0)) / 10.0);
  d.lipschitz_bound = d.d1(xs);
  return d;
}

DriftSpec drift_linear(double coefficient) {
  DriftSpec d;
  d.name = "linear";
  d.eval = [coefficient](double x) { return coefficient * x; };
  d.d1 = [coefficient](double) { return coefficient; };
  d.d2 = [](double) { return 0.0; };
  d.d3 = [](double) { return 0.0; };
  d.lipschitz_bound = std::abs(coefficient);
  d.linear_coefficient = coefficient;
  return d;
}

DriftSpec drift_zero() {
  DriftSpec d = drift_linear(0.0);
  d.name = "zero";
  d.eval = [](double) { return 0.0; };
  return d;
}

Eigen::VectorXd euler_values(const SdeProblem& problem, const FbmPath& driving) {
  if (!(problem.horizon > 0.0)) throw DomainError("horizon must be positive");
  if (std::abs(driving.horizon - problem.horizon) > 1e-12 * problem.horizon)
    throw DomainError("driving path horizon differs from the problem horizon");

  const int n = driving.steps();
  const double h = driving.step();
  const auto& drift = problem.drift.eval;
  Eigen::VectorXd y(n + 1);
  y[0] = problem.x0;
  double drift_sum = 0.0;
  for (int k = 0; k < n; ++k) {
    drift_sum += drift(y[k]) * h;
    const double next = problem.x0 + problem.sigma * driving.values[k + 1] + drift_sum;
    if (!std::isfinite(next) || std::abs(next) > kStateOverflow) {
      std::ostringstream msg;
      msg << "euler state left the finite range at step " << k + 1 << " (drift "
          << problem.drift.name << ")";
      throw NumericalError(msg.str());
    }
    y[k + 1] = next;
  }
  return y;
}

SolutionPath euler_path(const SdeProblem& problem, const FbmPath& driving) {
  SolutionPath out;
  out.values = euler_values(problem, driving);
  const int n = driving.steps();
  out.times.resize(n + 1);
  for (int k = 0; k <= n; ++k) out.times[k] = driving.time(k);
  out.drift_name = problem.drift.name;
  out.hurst = driving.hurst;
  out.seed = driving.seed;
  out.stream = driving.stream;
  out.method = driving.method;
  return out;
}

SolutionPath euler_interpolate(const SdeProblem& problem, const SolutionPath& coarse,
                               const FbmPath& fine) {
  const int coarse_n = static_cast<int>(coarse.values.size()) - 1;
  const int fine_n = fine.steps();
  if (coarse_n < 1 || fine_n % coarse_n != 0)
    throw DomainError("fine grid must refine the coarse grid");
  const int factor = fine_n / coarse_n;
  const double hf = fine.step();

  SolutionPath out = coarse;
  out.times.resize(fine_n + 1);
  out.values.resize(fine_n + 1);
  for (int j = 0; j <= fine_n; ++j) {
    // t in (t_k, t_{k+1}] is attached to the left grid point t_k.
    const int k = j == 0 ? 0 : (j - 1) / factor;
    const int base = k * factor;
    const double yk = coarse.values[k];
    out.times[j] = fine.time(j);
    out.values[j] = yk + problem.drift.eval(yk) * ((j - base) * hf) +
                    problem.sigma * (fine.values[j] - fine.values[base]);
  }
  return out;
}

SolutionPath exact_linear_solution(double coefficient, double sigma, double x0,
                                   const FbmPath& fine, const std::vector<double>& eval_times) {
  const int n = fine.steps();
  const double h = fine.step();
  std::vector<int> idx;
  idx.reserve(eval_times.size());
  for (double t : eval_times) {
    const double pos = t / h;
    const double k = std::round(pos);
    if (k < 0 || k > n || std::abs(pos - k) > 1e-9)
      throw DomainError("evaluation time " + format_short(t) + " is not on the fine grid");
    idx.push_back(static_cast<int>(k));
  }

  // J_k = \int_0^{t_k} e^{A(t_k - s)} B_s ds, trapezoidal per fine cell.
  const double growth = std::exp(coefficient * h);
  Eigen::VectorXd exact(n + 1);
  double integral = 0.0;
  exact[0] = x0;
  for (int k = 0; k < n; ++k) {
    integral = growth * integral + 0.5 * h * (growth * fine.values[k] + fine.values[k + 1]);
    const double t = fine.time(k + 1);
    exact[k + 1] =
        std::exp(coefficient * t) * x0 + sigma * fine.values[k + 1] + sigma * coefficient * integral;
  }

  SolutionPath out;
  out.times.resize(static_cast<Eigen::Index>(idx.size()));
  out.values.resize(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.times[static_cast<Eigen::Index>(i)] = fine.time(idx[i]);
    out.values[static_cast<Eigen::Index>(i)] = exact[idx[i]];
  }
  out.drift_name = "linear-exact";
  out.hurst = fine.hurst;
  out.seed = fine.seed;
  out.stream = fine.stream;
  out.method = fine.method;
  return out;
}

MomentReport moment_sanity(const SdeProblem& problem, double hurst,
                           const std::vector<int>& steps, int paths, std::uint64_t seed,
                           SamplerMethod method) {
  if (steps.empty()) throw DomainError("moment check needs at least one grid");
  if (paths < 2) throw DomainError("moment check needs at least two paths");
  const int finest = *std::max_element(steps.begin(), steps.end());
  for (int n : steps)
    if (n < 1 || finest % n != 0) throw DomainError("grids must divide the finest grid");

  const FbmSampler sampler(hurst, finest, problem.horizon, method);
  std::vector<Eigen::VectorXd> s2, s4, q4, q8;
  for (int n : steps) {
    s2.emplace_back(Eigen::VectorXd::Zero(n + 1));
    s4.emplace_back(Eigen::VectorXd::Zero(n + 1));
    q4.emplace_back(Eigen::VectorXd::Zero(n + 1));
    q8.emplace_back(Eigen::VectorXd::Zero(n + 1));
  }
  for (int p = 0; p < paths; ++p) {
    const FbmPath fine = sampler.sample(RngStream{seed, static_cast<std::uint64_t>(p)});
    for (std::size_t l = 0; l < steps.size(); ++l) {
      const Eigen::ArrayXd y = euler_values(problem, subsample(fine, finest / steps[l])).array();
      const Eigen::ArrayXd y2 = y.square();
      const Eigen::ArrayXd y4 = y2.square();
      s2[l].array() += y2;
      s4[l].array() += y4;
      q4[l].array() += y4;
      q8[l].array() += y4.square();
    }
  }

  MomentReport report;
  const double m = paths;
  for (std::size_t l = 0; l < steps.size(); ++l) {
    MomentRow row;
    row.steps = steps[l];
    Eigen::Index arg2 = 0, arg4 = 0;
    row.sup_second = s2[l].maxCoeff(&arg2) / m;
    row.sup_fourth = s4[l].maxCoeff(&arg4) / m;
    const double var2 = std::max(0.0, q4[l][arg2] / m - row.sup_second * row.sup_second);
    const double var4 = std::max(0.0, q8[l][arg4] / m - row.sup_fourth * row.sup_fourth);
    row.sup_second_se = std::sqrt(var2 / m);
    row.sup_fourth_se = std::sqrt(var4 / m);
    report.rows.push_back(row);
  }

  // Stable when the spread across grids stays within 10% plus four
  // standard errors of the largest estimate.
  auto spread_ok = [&](auto value, auto se) {
    double lo = value(report.rows.front()), hi = lo, worst_se = 0.0;
    for (const auto& r : report.rows) {
      lo = std::min(lo, value(r));
      hi = std::max(hi, value(r));
      worst_se = std::max(worst_se, se(r));
    }
    return hi - lo <= 0.1 * hi + 4.0 * worst_se;
  };
  const bool ok2 = spread_ok([](const MomentRow& r) { return r.sup_second; },
                             [](const MomentRow& r) { return r.sup_second_se; });
  const bool ok4 = spread_ok([](const MomentRow& r) { return r.sup_fourth; },
                             [](const MomentRow& r) { return r.sup_fourth_se; });
  report.stable = ok2 && ok4;
  if (!ok2) report.note += "second moment drifts across grids; ";
  if (!ok4) report.note += "fourth moment drifts across grids; ";
  return report;
}

void write_solution_csv(std::ostream& os, const SolutionPath& path) {
  const auto n = path.values.size() - 1;
  os << "# fbm H=" << format_short(path.hurst)
     << " T=" << format_short(path.times.size() > 0 ? path.times[path.times.size() - 1] : 0.0)
     << " n=" << n << " seed=" << path.seed << " method=" << to_string(path.method)
     << " kind=solution drift=" << path.drift_name << '\n';
  for (Eigen::Index k = 0; k < path.values.size(); ++k)
    os << format_full(path.times[k]) << ',' << format_full(path.values[k]) << '\n';
}

}  // namespace roughsde
