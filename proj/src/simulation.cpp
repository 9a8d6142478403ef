#include "rmbf/simulation.hpp"

#include "rmbf/errors.hpp"
#include "summation.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include <fmt/core.h>

namespace rmbf {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Distinguishes the effect-profile stream from the noise stream of the same
// replication.
constexpr std::uint64_t kProfileStream = 0x70726f66696c6521ULL;

std::string describe(const SimulationConfig& c) {
  return fmt::format("n={}, k={}, rho={}, delta={}", c.n, c.k, c.rho, c.delta);
}

// Runs body(i) for i in [0, count) on up to `threads` workers. The first
// failing index (lowest i) wins so error reporting is schedule-independent.
template <typename Body>
void parallel_for(long count, unsigned threads, Body body) {
  if (threads == 0) {
    threads = std::max(1u, std::thread::hardware_concurrency());
  }
  threads = static_cast<unsigned>(std::min<long>(threads, std::max(1L, count)));

  std::atomic<long> next{0};
  std::mutex error_mutex;
  long error_index = count;
  std::exception_ptr error;

  auto worker = [&] {
    for (long i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  };

  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back(worker);
    }
  }
  if (error) {
    std::rethrow_exception(error);
  }
}

double median_of(std::vector<double> values) {
  return five_number_summary(std::move(values)).median;
}

} // namespace

std::string_view to_string(ProfileSpacing spacing) {
  return spacing == ProfileSpacing::equal ? "equal" : "uniform-interior";
}

ProfileSpacing parse_spacing(std::string_view text) {
  if (text == "equal") return ProfileSpacing::equal;
  if (text == "uniform-interior") return ProfileSpacing::uniform_interior;
  throw DomainError(fmt::format("unknown spacing '{}' (expected equal or uniform-interior)", text));
}

void SimulationConfig::validate() const {
  design().validate();
  if (!(rho >= 0.0 && rho < 1.0)) {
    throw DomainError(fmt::format("intraclass correlation must lie in [0, 1) (got {})", rho));
  }
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw DomainError(fmt::format("effect size must be finite and nonnegative (got {})", delta));
  }
  if (reps < 1) {
    throw DomainError(fmt::format("need at least one replication (got {})", reps));
  }
  if (!std::isfinite(grand_mean)) {
    throw DomainError("grand mean must be finite");
  }
}

void GridSpec::validate() const {
  if (n_values.empty() || rho_values.empty() || delta_values.empty()) {
    throw DomainError("grid needs at least one value of n, rho and delta");
  }
  for (long n : n_values) {
    for (double rho : rho_values) {
      for (double delta : delta_values) {
        SimulationConfig{n, k, rho, delta, reps, master_seed, grand_mean, spacing}.validate();
      }
    }
  }
}

CellError::CellError(const SimulationConfig& config, long rep, const std::string& what)
    : std::runtime_error(fmt::format("cell ({}) replication {}: {}", describe(config), rep, what)),
      config_(config), rep_(rep) {}

double NormalSampler::uniform() {
  const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  return 2.0 * u - 1.0;
}

double NormalSampler::operator()() {
  if (spare_) {
    const double z = *spare_;
    spare_.reset();
    return z;
  }
  double u, v, s;
  do {
    u = uniform();
    v = uniform();
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double scale = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * scale;
  return u * scale;
}

TreatmentProfile make_profile(const SimulationConfig& config) {
  config.validate();
  const double range = config.delta * std::sqrt(config.subject_variance() + config.error_variance());
  TreatmentProfile profile;
  profile.alphas.resize(static_cast<std::size_t>(config.k));
  const double last = static_cast<double>(config.k - 1);
  for (long j = 0; j < config.k; ++j) {
    // Mirror-symmetric positions in [-1/2, 1/2] so the effects sum to zero.
    profile.alphas[static_cast<std::size_t>(j)] = range * ((2.0 * j - last) / (2.0 * last));
  }
  return profile;
}

TreatmentProfile replication_profile(const SimulationConfig& config, long rep_index) {
  if (config.spacing == ProfileSpacing::equal || config.k == 2) {
    return make_profile(config);
  }
  config.validate();
  const double range = config.delta * std::sqrt(config.subject_variance() + config.error_variance());
  std::mt19937_64 engine(
      replication_seed(config.master_seed, cell_key(config) ^ kProfileStream, rep_index));
  const auto k = static_cast<std::size_t>(config.k);
  std::vector<double> means(k);
  means.front() = 0.0;
  means.back() = range;
  for (std::size_t j = 1; j + 1 < k; ++j) {
    means[j] = range * (static_cast<double>(engine() >> 11) * 0x1.0p-53);
  }
  std::sort(means.begin(), means.end());
  detail::CompensatedSum sum;
  for (double m : means) sum.add(m);
  const double centre = sum.value() / static_cast<double>(k);
  TreatmentProfile profile;
  profile.alphas.reserve(k);
  for (double m : means) profile.alphas.push_back(m - centre);
  return profile;
}

std::uint64_t cell_key(const SimulationConfig& config) {
  std::uint64_t h = splitmix64(static_cast<std::uint64_t>(config.n));
  h = splitmix64(h ^ static_cast<std::uint64_t>(config.k));
  h = splitmix64(h ^ std::bit_cast<std::uint64_t>(config.rho));
  h = splitmix64(h ^ std::bit_cast<std::uint64_t>(config.delta));
  return h;
}

std::uint64_t replication_seed(std::uint64_t master_seed, std::uint64_t cell, long rep_index) {
  std::uint64_t h = splitmix64(master_seed);
  h = splitmix64(h ^ cell);
  return splitmix64(h ^ static_cast<std::uint64_t>(rep_index));
}

DataMatrix generate_dataset(const SimulationConfig& config, const TreatmentProfile& profile,
                            long rep_index) {
  config.validate();
  if (profile.alphas.size() != static_cast<std::size_t>(config.k)) {
    throw DimensionError(fmt::format("profile has {} effects for k={}", profile.alphas.size(),
                                     config.k));
  }
  NormalSampler normal(replication_seed(config.master_seed, cell_key(config), rep_index));
  const double subject_sd = std::sqrt(config.subject_variance());
  const double error_sd = std::sqrt(config.error_variance());

  DataMatrix data(static_cast<std::size_t>(config.n), static_cast<std::size_t>(config.k));
  for (std::size_t i = 0; i < data.subjects(); ++i) {
    const double subject = subject_sd * normal();
    for (std::size_t j = 0; j < data.conditions(); ++j) {
      data(i, j) = config.grand_mean + profile.alphas[j] + subject + error_sd * normal();
    }
  }
  return data;
}

CellResult run_cell(const SimulationConfig& config, const RunOptions& options) {
  config.validate();
  const DesignSpec design = config.design();

  CellResult result;
  result.config = config;
  result.per_rep_records.resize(static_cast<std::size_t>(config.reps));

  parallel_for(config.reps, options.threads, [&](long rep) {
    try {
      const DataMatrix data = generate_dataset(config, replication_profile(config, rep), rep);
      const AnovaTable table = rm_anova(data);
      const EvidenceResult minimal = bf01_minimal_rm(table.f_stat, design);
      const EvidenceResult nm = delta_bic_nathoo(SummaryStats::from_table(table));

      RepRecord& r = result.per_rep_records[static_cast<std::size_t>(rep)];
      r.rep = rep;
      r.f_stat = table.f_stat;
      r.log_bf01_min = minimal.log_bf01;
      r.log_bf01_nm = nm.log_bf01;
      r.bf01_min = minimal.bf01;
      r.bf01_nm = nm.bf01;
      r.posterior_min = minimal.posterior_h0;
      r.posterior_nm = nm.posterior_h0;
      r.choice_min = choose_model(minimal);
      r.choice_nm = choose_model(nm);
    } catch (const std::exception& e) {
      throw CellError(config, rep, e.what());
    }
  });

  const Model truth = config.delta == 0.0 ? Model::H0 : Model::H1;
  long correct_min = 0, correct_nm = 0, agree = 0;
  std::vector<double> post_min, post_nm, diff;
  post_min.reserve(result.per_rep_records.size());
  post_nm.reserve(result.per_rep_records.size());
  diff.reserve(result.per_rep_records.size());
  for (const RepRecord& r : result.per_rep_records) {
    correct_min += r.choice_min == truth;
    correct_nm += r.choice_nm == truth;
    agree += r.choice_min == r.choice_nm;
    post_min.push_back(r.posterior_min);
    post_nm.push_back(r.posterior_nm);
    diff.push_back(r.posterior_min - r.posterior_nm);
  }
  const double reps = static_cast<double>(config.reps);
  result.accuracy_min = static_cast<double>(correct_min) / reps;
  result.accuracy_nm = static_cast<double>(correct_nm) / reps;
  result.consistency = static_cast<double>(agree) / reps;
  result.posterior_correlation = pearson_correlation(post_min, post_nm);
  result.posterior_quantiles_min = five_number_summary(post_min);
  result.posterior_quantiles_nm = five_number_summary(post_nm);
  result.median_posterior_difference = median_of(std::move(diff));
  return result;
}

GridReport run_grid(const GridSpec& spec, const RunOptions& options) {
  spec.validate();
  GridReport report;
  report.spec = spec;
  for (double delta : spec.delta_values) {
    for (long n : spec.n_values) {
      for (double rho : spec.rho_values) {
        const SimulationConfig config{n,         spec.k,          rho,
                                      delta,     spec.reps,       spec.master_seed,
                                      spec.grand_mean, spec.spacing};
        report.cells.push_back(run_cell(config, options));
      }
    }
  }
  return report;
}

FiveNumberSummary five_number_summary(std::vector<double> values) {
  if (values.empty()) {
    throw DomainError("five-number summary of an empty sample");
  }
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  const double n4 = std::floor((static_cast<double>(n) + 3.0) / 2.0) / 2.0;
  auto at = [&](double depth) {
    // depth is 1-based and either integral or a half-integer
    const auto lo = static_cast<std::size_t>(std::floor(depth - 1.0));
    const auto hi = static_cast<std::size_t>(std::ceil(depth - 1.0));
    return 0.5 * (values[lo] + values[hi]);
  };
  return {values.front(), at(n4), at((static_cast<double>(n) + 1.0) / 2.0),
          at(static_cast<double>(n) + 1.0 - n4), values.back()};
}

std::optional<double> pearson_correlation(const std::vector<double>& x,
                                          const std::vector<double>& y) {
  if (x.size() != y.size()) {
    throw DimensionError("correlation of series with different lengths");
  }
  if (x.size() < 2) {
    return std::nullopt;
  }
  detail::CompensatedSum sx, sy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx.add(x[i]);
    sy.add(y[i]);
  }
  const double mx = sx.value() / static_cast<double>(x.size());
  const double my = sy.value() / static_cast<double>(y.size());
  detail::CompensatedSum sxx, syy, sxy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx.add(dx * dx);
    syy.add(dy * dy);
    sxy.add(dx * dy);
  }
  if (!(sxx.value() > 0.0) || !(syy.value() > 0.0)) {
    return std::nullopt;
  }
  return std::clamp(sxy.value() / std::sqrt(sxx.value() * syy.value()), -1.0, 1.0);
}

} // namespace rmbf
