#pragma once

// Exact-in-distribution fBm sampling on uniform grids t_k = kT/n.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "roughsde/kernel.hpp"
#include "roughsde/rng.hpp"

namespace roughsde {

enum class SamplerMethod { cholesky, circulant };

std::string to_string(SamplerMethod m);
SamplerMethod parse_sampler_method(std::string_view name);
// cholesky up to 256 steps, circulant above.
SamplerMethod default_sampler_method(int steps);

struct FbmPath {
  double hurst = 0.5;
  double horizon = 1.0;
  Eigen::VectorXd values;  // n+1 entries, values[0] == 0
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  SamplerMethod method = SamplerMethod::cholesky;

  int steps() const { return static_cast<int>(values.size()) - 1; }
  double step() const { return horizon / steps(); }
  double time(int k) const { return k * horizon / steps(); }
};

// Holds the lower Cholesky factor of [R(t_i,t_j)]_{i,j=1..n}. Immutable
// after construction and safe to share across threads.
class CholeskySampler {
 public:
  static constexpr int kDefaultCap = 4096;

  CholeskySampler(double hurst, int steps, double horizon, int cap = kDefaultCap);

  FbmPath sample(const RngStream& rng) const;

  int steps() const { return steps_; }
  bool jittered() const { return jittered_; }
  const Eigen::MatrixXd& factor() const { return factor_; }

 private:
  double hurst_;
  int steps_;
  double horizon_;
  bool jittered_ = false;
  Eigen::MatrixXd factor_;
};

// Davies-Harte style sampler: the fGn autocovariance is embedded into a
// circulant of length 2^ceil(log2(2n)) and diagonalised by the FFT.
class CirculantSampler {
 public:
  static constexpr double kNegativeTolerance = 1e-10;

  CirculantSampler(double hurst, int steps, double horizon);

  FbmPath sample(const RngStream& rng) const;

  int steps() const { return steps_; }
  int embedding_size() const { return static_cast<int>(sqrt_eigen_.size()); }
  // Unit-step embedding eigenvalues after clamping.
  const Eigen::VectorXd& eigenvalues() const { return eigen_; }
  int clamped_eigenvalues() const { return clamped_; }

 private:
  double hurst_;
  int steps_;
  double horizon_;
  int clamped_ = 0;
  Eigen::VectorXd eigen_;
  Eigen::VectorXd sqrt_eigen_;  // sqrt(lambda_k / m) * h^H
};

// Either sampler behind one interface.
class FbmSampler {
 public:
  FbmSampler(double hurst, int steps, double horizon, SamplerMethod method);

  FbmPath sample(const RngStream& rng) const;
  SamplerMethod method() const { return method_; }
  int steps() const { return steps_; }

 private:
  SamplerMethod method_;
  int steps_;
  std::variant<CholeskySampler, CirculantSampler> impl_;
};

FbmPath sample_cholesky(double hurst, int steps, double horizon, const RngStream& rng);
FbmPath sample_circulant(double hurst, int steps, double horizon, const RngStream& rng);

// Coarse path values[k] = fine values[k * factor]; no re-simulation.
FbmPath subsample(const FbmPath& path, int factor);

struct SelfTestReport {
  double hurst = 0.0;
  int steps = 0;
  int paths = 0;
  SamplerMethod method = SamplerMethod::cholesky;
  int entries_tested = 0;
  double max_abs_z = 0.0;
  double z_threshold = 4.0;
  // Variance scaling: log E|B_t - B_s|^2 regressed on log|t - s|.
  std::vector<double> lags;
  std::vector<double> mean_square_increments;
  double fitted_slope = 0.0;  // NaN when fewer than two lags exist
  double slope_tolerance = 0.02;
  bool covariance_ok = false;
  bool slope_ok = false;

  bool pass() const { return covariance_ok && slope_ok; }
};

SelfTestReport self_test(double hurst, int steps, int paths, SamplerMethod method,
                         std::uint64_t seed, double horizon = 1.0);

// Entrywise empirical second moments of the path values at grid points
// 1..n together with their Monte Carlo standard errors.
struct EmpiricalCovariance {
  Eigen::MatrixXd mean;
  Eigen::MatrixXd std_error;
  int paths = 0;
};

EmpiricalCovariance empirical_covariance(const FbmSampler& sampler, std::uint64_t seed,
                                         int paths);

// CSV with a '# fbm key=value ...' header and 't,value' rows.
void write_path_csv(std::ostream& os, const FbmPath& path);
FbmPath read_path_csv(std::istream& is);

}  // namespace roughsde
