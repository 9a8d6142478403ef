#pragma once

#include "rmbf/anova.hpp"
#include "rmbf/bayes_factor.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rmbf {

// How condition means are placed between the two extremes, which sit at
// -range/2 and +range/2.
enum class ProfileSpacing {
  // Interior means equally spaced; the same effects in every replication.
  equal,
  // Interior means drawn uniformly on [min, max] afresh for each
  // replication, then re-centred to sum to zero. This matches the accuracy
  // levels of the published simulation tables; equal spacing runs
  // systematically below them for non-null effects.
  uniform_interior,
};

std::string_view to_string(ProfileSpacing spacing);
// "equal" or "uniform-interior"; throws DomainError otherwise.
ProfileSpacing parse_spacing(std::string_view text);

// One cell of the Monte Carlo design. Data follow the mixed model
//   y_ij = mu + alpha_j + pi_i + e_ij,  pi_i ~ N(0, rho), e_ij ~ N(0, 1 - rho)
// so the marginal variance is fixed at 1 and rho is the intraclass
// correlation.
struct SimulationConfig {
  long n = 20;
  long k = 3;
  double rho = 0.2;
  double delta = 0.0;
  long reps = 1000;
  std::uint64_t master_seed = 0;
  double grand_mean = 0.0;
  ProfileSpacing spacing = ProfileSpacing::uniform_interior;

  // Throws DimensionError/DomainError on invalid parameters.
  void validate() const;
  DesignSpec design() const { return {n, k}; }
  double subject_variance() const { return rho; }
  double error_variance() const { return 1.0 - rho; }
};

// Treatment effects alpha_j: equally spaced, summing to zero, with range
// delta times the marginal standard deviation.
struct TreatmentProfile {
  std::vector<double> alphas;
};

struct FiveNumberSummary {
  double min = 0.0;
  double lower_hinge = 0.0;
  double median = 0.0;
  double upper_hinge = 0.0;
  double max = 0.0;
};

struct RepRecord {
  long rep = 0;
  double f_stat = 0.0;
  double log_bf01_min = 0.0;
  double log_bf01_nm = 0.0;
  double bf01_min = 0.0;
  double bf01_nm = 0.0;
  double posterior_min = 0.0;
  double posterior_nm = 0.0;
  Model choice_min = Model::H0;
  Model choice_nm = Model::H0;
};

struct CellResult {
  SimulationConfig config;
  double accuracy_min = 0.0;
  double accuracy_nm = 0.0;
  double consistency = 0.0;
  // Pearson correlation of the two p(H0|y) series; absent when fewer than
  // two replications or either series is constant.
  std::optional<double> posterior_correlation;
  FiveNumberSummary posterior_quantiles_min;
  FiveNumberSummary posterior_quantiles_nm;
  double median_posterior_difference = 0.0; // median of post_min - post_nm
  std::vector<RepRecord> per_rep_records;    // ordered by rep index
};

struct GridSpec {
  std::vector<long> n_values{20, 50, 80};
  std::vector<double> rho_values{0.2, 0.8};
  std::vector<double> delta_values{0.0, 0.2, 0.5};
  long k = 3;
  long reps = 1000;
  std::uint64_t master_seed = 0;
  double grand_mean = 0.0;
  ProfileSpacing spacing = ProfileSpacing::uniform_interior;

  void validate() const;
};

struct GridReport {
  GridSpec spec;
  std::vector<CellResult> cells; // delta-major, then n, then rho
};

struct RunOptions {
  unsigned threads = 0; // 0: std::thread::hardware_concurrency()
};

// A cell failure, tagged with the cell that raised it.
class CellError : public std::runtime_error {
public:
  CellError(const SimulationConfig& config, long rep, const std::string& what);
  const SimulationConfig& config() const { return config_; }
  long rep() const { return rep_; }

private:
  SimulationConfig config_;
  long rep_;
};

// Equally spaced profile, independent of config.spacing.
TreatmentProfile make_profile(const SimulationConfig& config);

// Effects used for replication `rep_index` under config.spacing. Interior
// draws use their own stream, so the noise of a replication is the same
// under either spacing.
TreatmentProfile replication_profile(const SimulationConfig& config, long rep_index);

// Stable identity of a cell, derived from (n, k, rho, delta) only, so a
// cell's replications do not depend on where it sits in a grid.
std::uint64_t cell_key(const SimulationConfig& config);

// Seed of the random stream for one replication of one cell.
std::uint64_t replication_seed(std::uint64_t master_seed, std::uint64_t cell, long rep_index);

DataMatrix generate_dataset(const SimulationConfig& config, const TreatmentProfile& profile,
                            long rep_index);

CellResult run_cell(const SimulationConfig& config, const RunOptions& options = {});

GridReport run_grid(const GridSpec& spec, const RunOptions& options = {});

// Tukey five-number summary (hinges as in R's fivenum). Empty input throws.
FiveNumberSummary five_number_summary(std::vector<double> values);

std::optional<double> pearson_correlation(const std::vector<double>& x,
                                          const std::vector<double>& y);

// Standard normal deviates by Marsaglia's polar method over a 64-bit
// Mersenne Twister; both are fully specified, so streams are identical
// across standard library implementations.
class NormalSampler {
public:
  explicit NormalSampler(std::uint64_t seed) : engine_(seed) {}
  double operator()();

private:
  double uniform(); // (-1, 1) with 53-bit resolution
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

} // namespace rmbf
