#include "roughsde/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "roughsde/format.hpp"
#include "roughsde/stats.hpp"

namespace roughsde {

std::string to_string(SamplerMethod m) {
  return m == SamplerMethod::cholesky ? "cholesky" : "circulant";
}

SamplerMethod parse_sampler_method(std::string_view name) {
  if (name == "cholesky") return SamplerMethod::cholesky;
  if (name == "circulant") return SamplerMethod::circulant;
  throw DomainError("unknown sampler method: " + std::string(name));
}

SamplerMethod default_sampler_method(int steps) {
  return steps <= 256 ? SamplerMethod::cholesky : SamplerMethod::circulant;
}

namespace {

void check_grid(double hurst, int steps, double horizon) {
  if (!(hurst > 0.0 && hurst < 1.0)) throw DomainError("hurst parameter must lie in (0,1)");
  if (steps < 1) throw DomainError("number of steps must be at least 1");
  if (!(horizon > 0.0)) throw DomainError("horizon must be positive");
}

int embedding_length(int steps) {
  int m = 1;
  while (m < 2 * steps) m *= 2;
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------

CholeskySampler::CholeskySampler(double hurst, int steps, double horizon, int cap)
    : hurst_(hurst), steps_(steps), horizon_(horizon) {
  check_grid(hurst, steps, horizon);
  if (steps > cap)
    throw DomainError("cholesky sampler limited to " + std::to_string(cap) +
                      " steps; use the circulant method");

  const Kernel kernel(hurst);
  const Eigen::VectorXd times =
      Eigen::VectorXd::LinSpaced(steps, 1, steps) * (horizon / steps);
  Eigen::MatrixXd gram = cov_matrix(kernel, times);

  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) {
    const double jitter = 1e-12 * std::pow(horizon, 2.0 * hurst);
    gram.diagonal().array() += jitter;
    llt.compute(gram);
    jittered_ = true;
    if (llt.info() != Eigen::Success)
      throw NumericalError(
          "covariance matrix is numerically not positive definite even after diagonal "
          "jitter; increase the jitter or use the circulant method");
  }
  factor_ = llt.matrixL();
}

FbmPath CholeskySampler::sample(const RngStream& rng) const {
  Eigen::VectorXd z(steps_);
  rng.fill_normals(0, std::span<double>(z.data(), static_cast<std::size_t>(z.size())));
  FbmPath path;
  path.hurst = hurst_;
  path.horizon = horizon_;
  path.seed = rng.master_seed;
  path.stream = rng.stream_index;
  path.method = SamplerMethod::cholesky;
  path.values.resize(steps_ + 1);
  path.values[0] = 0.0;
  path.values.tail(steps_).noalias() = factor_.triangularView<Eigen::Lower>() * z;
  return path;
}

// ---------------------------------------------------------------------------

CirculantSampler::CirculantSampler(double hurst, int steps, double horizon)
    : hurst_(hurst), steps_(steps), horizon_(horizon) {
  check_grid(hurst, steps, horizon);
  const Kernel kernel(hurst);
  const int m = embedding_length(steps);

  std::vector<std::complex<double>> row(m);
  for (int k = 0; k < m; ++k) {
    const int lag = std::min(k, m - k);
    row[k] = fgn_autocovariance(kernel, lag, 1.0);
  }
  std::vector<std::complex<double>> spectrum;
  Eigen::FFT<double> fft;
  fft.fwd(spectrum, row);

  eigen_.resize(m);
  double largest = 0.0;
  for (int k = 0; k < m; ++k) {
    eigen_[k] = spectrum[k].real();
    largest = std::max(largest, std::abs(eigen_[k]));
  }
  const double threshold = kNegativeTolerance * largest;
  for (int k = 0; k < m; ++k) {
    if (eigen_[k] < -threshold) {
      std::ostringstream msg;
      msg << "circulant embedding is not nonnegative definite: eigenvalue " << k << " = "
          << eigen_[k] << " (H=" << hurst << ", n=" << steps << ")";
      throw NumericalError(msg.str());
    }
    if (eigen_[k] < 0.0) {
      eigen_[k] = 0.0;
      ++clamped_;
    }
  }
  if (clamped_ > 0)
    std::clog << "warning: clamped " << clamped_
              << " slightly negative circulant eigenvalues to zero\n";

  const double scale = std::pow(horizon / steps, hurst);
  sqrt_eigen_ = (eigen_ / m).cwiseSqrt() * scale;
}

FbmPath CirculantSampler::sample(const RngStream& rng) const {
  const auto m = static_cast<std::size_t>(sqrt_eigen_.size());
  std::vector<double> z(2 * m);
  rng.fill_normals(0, z);

  std::vector<std::complex<double>> weighted(m);
  for (std::size_t k = 0; k < m; ++k)
    weighted[k] = sqrt_eigen_[static_cast<Eigen::Index>(k)] * std::complex<double>(z[k], z[m + k]);

  thread_local Eigen::FFT<double> fft;
  std::vector<std::complex<double>> noise;
  fft.fwd(noise, weighted);

  FbmPath path;
  path.hurst = hurst_;
  path.horizon = horizon_;
  path.seed = rng.master_seed;
  path.stream = rng.stream_index;
  path.method = SamplerMethod::circulant;
  path.values.resize(steps_ + 1);
  path.values[0] = 0.0;
  double acc = 0.0;
  for (int k = 0; k < steps_; ++k) {
    acc += noise[k].real();
    path.values[k + 1] = acc;
  }
  return path;
}

// ---------------------------------------------------------------------------

namespace {

std::variant<CholeskySampler, CirculantSampler> make_impl(double hurst, int steps,
                                                          double horizon, SamplerMethod method) {
  if (method == SamplerMethod::cholesky) return CholeskySampler(hurst, steps, horizon);
  return CirculantSampler(hurst, steps, horizon);
}

}  // namespace

FbmSampler::FbmSampler(double hurst, int steps, double horizon, SamplerMethod method)
    : method_(method), steps_(steps), impl_(make_impl(hurst, steps, horizon, method)) {}

FbmPath FbmSampler::sample(const RngStream& rng) const {
  return std::visit([&](const auto& s) { return s.sample(rng); }, impl_);
}

FbmPath sample_cholesky(double hurst, int steps, double horizon, const RngStream& rng) {
  return CholeskySampler(hurst, steps, horizon).sample(rng);
}

FbmPath sample_circulant(double hurst, int steps, double horizon, const RngStream& rng) {
  return CirculantSampler(hurst, steps, horizon).sample(rng);
}

FbmPath subsample(const FbmPath& path, int factor) {
  if (factor < 1 || path.steps() % factor != 0)
    throw DomainError("subsample factor must divide the number of steps");
  FbmPath out = path;
  const int coarse = path.steps() / factor;
  out.values.resize(coarse + 1);
  for (int k = 0; k <= coarse; ++k) out.values[k] = path.values[k * factor];
  return out;
}

// ---------------------------------------------------------------------------

EmpiricalCovariance empirical_covariance(const FbmSampler& sampler, std::uint64_t seed,
                                         int paths) {
  const int n = sampler.steps();
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd sum_sq = Eigen::MatrixXd::Zero(n, n);
  for (int p = 0; p < paths; ++p) {
    const FbmPath path = sampler.sample(RngStream{seed, static_cast<std::uint64_t>(p)});
    const Eigen::VectorXd x = path.values.tail(n);
    const Eigen::MatrixXd prod = x * x.transpose();
    sum += prod;
    sum_sq += prod.cwiseAbs2();
  }
  EmpiricalCovariance out;
  out.paths = paths;
  out.mean = sum / paths;
  const Eigen::MatrixXd var = (sum_sq / paths - out.mean.cwiseAbs2()).cwiseMax(0.0);
  out.std_error = (var / paths).cwiseSqrt();
  return out;
}

SelfTestReport self_test(double hurst, int steps, int paths, SamplerMethod method,
                         std::uint64_t seed, double horizon) {
  if (paths < 1000) throw DomainError("self test needs at least 1000 paths");
  const FbmSampler sampler(hurst, steps, horizon, method);
  const Kernel kernel(hurst);

  SelfTestReport report;
  report.hurst = hurst;
  report.steps = steps;
  report.paths = paths;
  report.method = method;

  // Covariance entries at a subset of grid points (all of them for n <= 64).
  std::vector<int> idx;
  const int stride = std::max(1, steps / 64);
  for (int k = stride; k <= steps; k += stride) idx.push_back(k);
  if (idx.back() != steps) idx.push_back(steps);
  const auto q = static_cast<Eigen::Index>(idx.size());

  std::vector<int> lags;
  for (int lag = 1; lag <= steps; lag *= 2) lags.push_back(lag);

  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(q, q);
  Eigen::MatrixXd sum_sq = Eigen::MatrixXd::Zero(q, q);
  std::vector<double> inc_sum(lags.size(), 0.0);
  Eigen::VectorXd x(q);
  for (int p = 0; p < paths; ++p) {
    const FbmPath path = sampler.sample(RngStream{seed, static_cast<std::uint64_t>(p)});
    for (Eigen::Index i = 0; i < q; ++i) x[i] = path.values[idx[static_cast<std::size_t>(i)]];
    const Eigen::MatrixXd prod = x * x.transpose();
    sum += prod;
    sum_sq += prod.cwiseAbs2();
    for (std::size_t l = 0; l < lags.size(); ++l) {
      const int lag = lags[l];
      double acc = 0.0;
      for (int k = 0; k + lag <= steps; ++k) {
        const double d = path.values[k + lag] - path.values[k];
        acc += d * d;
      }
      inc_sum[l] += acc / (steps - lag + 1);
    }
  }

  const double h = horizon / steps;
  for (Eigen::Index j = 0; j < q; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      const double mean = sum(i, j) / paths;
      const double var = std::max(0.0, sum_sq(i, j) / paths - mean * mean);
      const double se = std::sqrt(var / paths);
      const double target = cov(kernel, idx[static_cast<std::size_t>(i)] * h,
                                idx[static_cast<std::size_t>(j)] * h);
      const double z = se > 0.0 ? std::abs(mean - target) / se
                                : (mean == target ? 0.0 : std::numeric_limits<double>::infinity());
      report.max_abs_z = std::max(report.max_abs_z, z);
      ++report.entries_tested;
    }
  }
  report.covariance_ok = report.max_abs_z <= report.z_threshold;

  std::vector<double> log_lag, log_msq;
  for (std::size_t l = 0; l < lags.size(); ++l) {
    report.lags.push_back(lags[l] * h);
    report.mean_square_increments.push_back(inc_sum[l] / paths);
    log_lag.push_back(std::log(lags[l] * h));
    log_msq.push_back(std::log(inc_sum[l] / paths));
  }
  if (lags.size() >= 2) {
    report.fitted_slope = least_squares(log_lag, log_msq).slope;
    report.slope_ok = std::abs(report.fitted_slope - 2.0 * hurst) <= report.slope_tolerance;
  } else {
    report.fitted_slope = std::numeric_limits<double>::quiet_NaN();
    report.slope_ok = true;
  }
  return report;
}

// ---------------------------------------------------------------------------

void write_path_csv(std::ostream& os, const FbmPath& path) {
  os << "# fbm H=" << format_short(path.hurst) << " T=" << format_short(path.horizon)
     << " n=" << path.steps() << " seed=" << path.seed << " method=" << to_string(path.method)
     << '\n';
  for (int k = 0; k <= path.steps(); ++k)
    os << format_full(path.time(k)) << ',' << format_full(path.values[k]) << '\n';
}

namespace {

std::map<std::string, std::string> parse_header(const std::string& line) {
  std::istringstream in(line);
  std::string token;
  in >> token;
  if (token != "#") throw DomainError("path csv: missing '#' header");
  in >> token;
  if (token != "fbm") throw DomainError("path csv: header must start with '# fbm'");
  std::map<std::string, std::string> kv;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw DomainError("path csv: malformed header token " + token);
    kv[token.substr(0, eq)] = token.substr(eq + 1);
  }
  return kv;
}

}  // namespace

FbmPath read_path_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw DomainError("path csv: empty input");
  const auto kv = parse_header(line);
  for (const char* key : {"H", "T", "n", "seed", "method"})
    if (!kv.count(key)) throw DomainError(std::string("path csv: header lacks ") + key);

  FbmPath path;
  path.hurst = parse_double(kv.at("H"));
  path.horizon = parse_double(kv.at("T"));
  path.seed = std::stoull(kv.at("seed"));
  path.method = parse_sampler_method(kv.at("method"));
  const int n = std::stoi(kv.at("n"));
  if (n < 1) throw DomainError("path csv: n must be positive");
  path.values.resize(n + 1);
  int k = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw DomainError("path csv: expected 't,value' row");
    if (k > n) throw DomainError("path csv: more rows than n+1");
    path.values[k++] = parse_double(line.substr(comma + 1));
  }
  if (k != n + 1) throw DomainError("path csv: expected n+1 rows");
  return path;
}

}  // namespace roughsde
