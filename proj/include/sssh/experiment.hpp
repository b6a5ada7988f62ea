#ifndef SSSH_EXPERIMENT_HPP
#define SSSH_EXPERIMENT_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "sssh/entanglement.hpp"
#include "sssh/protocols.hpp"

namespace sssh {

/// Invalid configuration input; carries the path of the offending key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Batch experiment description: protocol, disorder grid and execution knobs.
struct ExperimentConfig {
  std::string protocol = "phi";  // phi | psi_x | psi_qutrit | w | ghz
  int n_domains = 1;             // lattice used by the two-qudit protocols
  int ell = 12;
  int p = 3;                     // qudit count for the w/ghz families
  DisorderMode mode = DisorderMode::OffDiagonal;
  std::vector<double> sigmas;
  int realizations = 1000;
  std::uint64_t base_seed = 1;
  double step = 0.01;
  double gamma = 0.0;
  std::string out_dir = ".";
  int threads = 0;  // 0 = hardware concurrency

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;
};

ProtocolPlan plan_from_config(const ExperimentConfig& cfg);

struct SweepRow {
  double sigma = 0.0;
  int realization = 0;
  MetricSet metrics;
};

struct SweepSummary {
  double sigma = 0.0;
  int n = 0;
  MetricSet mean;
  MetricSet stddev;  // unbiased sample standard deviation
};

/// Runs the full (sigma x realization) grid. Realizations are dispatched to a
/// worker pool; the per-realization RNG streams derive from
/// mix_seed(base_seed, realization), so the output is independent of thread
/// count and execution order. Rows come back sorted by (sigma, realization).
std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg);

std::vector<SweepSummary> aggregate_sweep(const std::vector<SweepRow>& rows);

void write_rows_csv(std::ostream& os, const std::vector<SweepRow>& rows,
                    DisorderMode mode);
void write_summary_csv(std::ostream& os, const std::vector<SweepSummary>& sums,
                       DisorderMode mode);

nlohmann::json protocol_report(const ProtocolResult& result);

/// Simple index-parallel loop; exceptions from workers are rethrown.
void parallel_for(int n, int threads, const std::function<void(int)>& body);

}  // namespace sssh

#endif  // SSSH_EXPERIMENT_HPP
