#include "sssh/experiment.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

namespace sssh {

namespace {

template <typename T>
T field(const nlohmann::json& j, const std::string& key, const T& fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("$." + key + ": " + e.what());
  }
}

template <typename T>
T field(const nlohmann::json& j, const std::string& key) {
  if (!j.contains(key)) throw ConfigError("$." + key + ": missing required key");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("$." + key + ": " + e.what());
  }
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

struct Accumulator {
  int n = 0;
  double sum = 0.0, sum2 = 0.0;
  void add(double x) {
    if (std::isnan(x)) return;
    ++n;
    sum += x;
    sum2 += x * x;
  }
  double mean() const {
    return n ? sum / n : std::numeric_limits<double>::quiet_NaN();
  }
  double stddev() const {
    if (n < 2) return n == 1 ? 0.0 : std::numeric_limits<double>::quiet_NaN();
    return std::sqrt(std::max(0.0, (sum2 - n * mean() * mean()) / (n - 1)));
  }
};

constexpr std::array<const char*, 9> kMetricNames = {
    "fidelity",       "concurrence",   "witness_w",
    "witness_ghz",    "p_vacuum",      "p_edge_literal",
    "p_edge_linear",  "p_no_bulk",     "p_wall_defect"};

std::array<double, 9> metric_values(const MetricSet& m) {
  return {m.fidelity,       m.concurrence,   m.witness_w,
          m.witness_ghz,    m.p_vacuum,      m.p_edge_literal,
          m.p_edge_linear,  m.p_no_bulk,     m.p_wall_defect};
}

MetricSet metrics_from_values(const std::array<double, 9>& v) {
  MetricSet m;
  m.fidelity = v[0];
  m.concurrence = v[1];
  m.witness_w = v[2];
  m.witness_ghz = v[3];
  m.p_vacuum = v[4];
  m.p_edge_literal = v[5];
  m.p_edge_linear = v[6];
  m.p_no_bulk = v[7];
  m.p_wall_defect = v[8];
  return m;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  cfg.protocol = field<std::string>(j, "protocol");
  cfg.n_domains = field<int>(j, "domains", cfg.n_domains);
  cfg.ell = field<int>(j, "domain_length", cfg.ell);
  cfg.p = field<int>(j, "qudits", cfg.p);
  if (j.contains("mode")) {
    try {
      cfg.mode = disorder_mode_from_string(field<std::string>(j, "mode"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("$.mode: ") + e.what());
    }
  }
  cfg.sigmas = field<std::vector<double>>(j, "sigmas", cfg.sigmas);
  cfg.realizations = field<int>(j, "realizations", cfg.realizations);
  cfg.base_seed = field<std::uint64_t>(j, "base_seed", cfg.base_seed);
  cfg.step = field<double>(j, "step", cfg.step);
  cfg.gamma = field<double>(j, "gamma", cfg.gamma);
  cfg.out_dir = field<std::string>(j, "out_dir", cfg.out_dir);
  cfg.threads = field<int>(j, "threads", cfg.threads);
  cfg.validate();
  return cfg;
}

nlohmann::json ExperimentConfig::to_json() const {
  return {{"protocol", protocol},   {"domains", n_domains},
          {"domain_length", ell},   {"qudits", p},
          {"mode", to_string(mode)}, {"sigmas", sigmas},
          {"realizations", realizations}, {"base_seed", base_seed},
          {"step", step},           {"gamma", gamma},
          {"out_dir", out_dir},     {"threads", threads}};
}

void ExperimentConfig::validate() const {
  static const std::array<const char*, 5> known = {"phi", "psi_x", "psi_qutrit",
                                                   "w", "ghz"};
  if (std::find(known.begin(), known.end(), protocol) == known.end()) {
    throw ConfigError("$.protocol: unknown protocol \"" + protocol + "\"");
  }
  if (realizations < 1) throw ConfigError("$.realizations: must be >= 1");
  if (sigmas.empty()) throw ConfigError("$.sigmas: must be a nonempty list");
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    if (sigmas[i] < 0.0) throw ConfigError("$.sigmas: entries must be >= 0");
    if (i > 0 && sigmas[i] < sigmas[i - 1]) {
      throw ConfigError("$.sigmas: must be ascending");
    }
  }
  if (step <= 0.0 || step > 0.02) throw ConfigError("$.step: must lie in (0, 0.02]");
  if (gamma < 0.0) throw ConfigError("$.gamma: must be >= 0");
}

ProtocolPlan plan_from_config(const ExperimentConfig& cfg) {
  if (cfg.protocol == "phi") return phi_plan(cfg.n_domains, cfg.ell);
  if (cfg.protocol == "psi_x") return psi_x_plan(cfg.n_domains, cfg.ell);
  if (cfg.protocol == "psi_qutrit") return psi_qutrit_plan(cfg.n_domains, cfg.ell);
  if (cfg.protocol == "w") return w_plan(cfg.p);
  if (cfg.protocol == "ghz") return ghz_plan(cfg.p);
  throw ConfigError("$.protocol: unknown protocol \"" + cfg.protocol + "\"");
}

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads <= 0) threads = 1;
  }
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const ProtocolPlan plan = plan_from_config(cfg);
  const int per_sigma = cfg.realizations;
  const int total = static_cast<int>(cfg.sigmas.size()) * per_sigma;
  std::vector<SweepRow> rows(total);

  parallel_for(total, cfg.threads, [&](int i) {
    const int si = i / per_sigma;
    const int r = i % per_sigma;
    RunOptions opts;
    opts.disorder = DisorderSpec{cfg.mode, cfg.sigmas[si], cfg.base_seed,
                                 static_cast<std::uint64_t>(r)};
    opts.decay.gamma = cfg.gamma;
    opts.step = cfg.step;
    const ProtocolResult result = run_protocol(plan, opts);
    rows[i] = SweepRow{cfg.sigmas[si], r, result.metrics};
  });
  return rows;  // already ordered by (sigma, realization)
}

std::vector<SweepSummary> aggregate_sweep(const std::vector<SweepRow>& rows) {
  std::vector<SweepSummary> out;
  std::size_t i = 0;
  while (i < rows.size()) {
    std::size_t j = i;
    std::array<Accumulator, 9> acc;
    while (j < rows.size() && rows[j].sigma == rows[i].sigma) {
      const auto v = metric_values(rows[j].metrics);
      for (std::size_t k = 0; k < v.size(); ++k) acc[k].add(v[k]);
      ++j;
    }
    SweepSummary s;
    s.sigma = rows[i].sigma;
    s.n = static_cast<int>(j - i);
    std::array<double, 9> mean, sd;
    for (std::size_t k = 0; k < acc.size(); ++k) {
      mean[k] = acc[k].mean();
      sd[k] = acc[k].stddev();
    }
    s.mean = metrics_from_values(mean);
    s.stddev = metrics_from_values(sd);
    out.push_back(s);
    i = j;
  }
  return out;
}

void write_rows_csv(std::ostream& os, const std::vector<SweepRow>& rows,
                    DisorderMode mode) {
  os << "sigma,realization,mode";
  for (const char* name : kMetricNames) os << "," << name;
  os << "\n";
  for (const SweepRow& r : rows) {
    os << fmt(r.sigma) << "," << r.realization << "," << to_string(mode);
    for (double v : metric_values(r.metrics)) os << "," << fmt(v);
    os << "\n";
  }
}

void write_summary_csv(std::ostream& os, const std::vector<SweepSummary>& sums,
                       DisorderMode mode) {
  os << "sigma,n,mode";
  for (const char* name : kMetricNames) os << ",mean_" << name;
  for (const char* name : kMetricNames) os << ",std_" << name;
  os << "\n";
  for (const SweepSummary& s : sums) {
    os << fmt(s.sigma) << "," << s.n << "," << to_string(mode);
    for (double v : metric_values(s.mean)) os << "," << fmt(v);
    for (double v : metric_values(s.stddev)) os << "," << fmt(v);
    os << "\n";
  }
}

nlohmann::json protocol_report(const ProtocolResult& result) {
  auto flatten = [](const Eigen::MatrixXcd& m) {
    nlohmann::json out;
    out["dim"] = m.rows();
    std::vector<double> re, im;
    re.reserve(m.size());
    im.reserve(m.size());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        re.push_back(m(i, j).real());
        im.push_back(m(i, j).imag());
      }
    }
    out["re"] = re;
    out["im"] = im;
    return out;
  };

  nlohmann::json j;
  j["duration"] = result.duration;
  j["checkpoint_overlaps"] = result.checkpoint_overlaps;
  j["rho_q"] = flatten(result.rho_q);
  const auto& m = result.metrics;
  j["metrics"] = {{"fidelity", m.fidelity},
                  {"concurrence", m.concurrence},
                  {"witness_w", m.witness_w},
                  {"witness_ghz", m.witness_ghz},
                  {"p_vacuum", m.p_vacuum},
                  {"p_edge_literal", m.p_edge_literal},
                  {"p_edge_linear", m.p_edge_linear},
                  {"p_no_bulk", m.p_no_bulk},
                  {"p_wall_defect", m.p_wall_defect}};
  return j;
}

}  // namespace sssh
