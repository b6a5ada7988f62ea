// Batch front end for the stub-SSH entanglement-distribution simulator.
//
// Subcommands: spectrum, transfer, protocol, sweep, calibrate, phase-demo.
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <CLI11.hpp>
#include <complex>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "sssh/dynamics.hpp"
#include "sssh/experiment.hpp"
#include "sssh/lattice.hpp"
#include "sssh/protocols.hpp"
#include "sssh/pulses.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw sssh::ConfigError("cannot open config file: " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw sssh::ConfigError(path + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::vector<double> sigmas;
  std::string mode;
  int realizations = -1;
  std::uint64_t seed = 0;
  bool seed_set = false;
  double step = -1.0;
  double gamma = -1.0;

  void attach(CLI::App* cmd, bool with_sweep_flags = true) {
    cmd->add_option("--config", config_path, "JSON configuration file");
    cmd->add_option("--out", out_dir, "output directory");
    if (with_sweep_flags) {
      cmd->add_option("--sigma", sigmas, "disorder strengths (ascending)");
      cmd->add_option("--mode", mode, "disorder mode: od | g");
      cmd->add_option("--realizations", realizations, "realizations per sigma");
      cmd->add_option("--seed", seed, "base seed")->each([this](std::string) {
        seed_set = true;
      });
      cmd->add_option("--step", step, "integrator step (<= 0.02)");
      cmd->add_option("--gamma", gamma, "qudit deexcitation rate");
    }
  }

  sssh::ExperimentConfig resolve() const {
    json j = config_path.empty() ? json::object() : load_json(config_path);
    if (!j.contains("protocol")) j["protocol"] = "phi";
    sssh::ExperimentConfig cfg = sssh::ExperimentConfig::from_json(
        [&] {
          json jj = j;
          if (!sigmas.empty()) jj["sigmas"] = sigmas;
          if (!mode.empty()) jj["mode"] = mode;
          if (realizations > 0) jj["realizations"] = realizations;
          if (seed_set) jj["base_seed"] = seed;
          if (step > 0.0) jj["step"] = step;
          if (gamma >= 0.0) jj["gamma"] = gamma;
          if (!out_dir.empty()) jj["out_dir"] = out_dir;
          if (!jj.contains("sigmas")) jj["sigmas"] = std::vector<double>{0.0};
          return jj;
        }());
    return cfg;
  }
};

int cmd_spectrum(const CommonFlags& flags) {
  const json j = load_json(flags.config_path);
  if (!j.contains("lattice")) {
    throw sssh::ConfigError("$.lattice: missing lattice spec");
  }
  const sssh::LatticeSpec spec = sssh::LatticeSpec::from_json(j.at("lattice"));
  sssh::Lattice lattice(spec);
  if (j.value("connected", false)) lattice = lattice.connected();

  std::vector<double> sigmas =
      flags.sigmas.empty() ? j.value("sigmas", std::vector<double>{0.1})
                           : flags.sigmas;
  const auto mode = sssh::disorder_mode_from_string(
      !flags.mode.empty() ? flags.mode : j.value("mode", std::string("od")));
  const int n_real =
      flags.realizations > 0 ? flags.realizations : j.value("realizations", 2000);
  const std::uint64_t seed =
      flags.seed_set ? flags.seed : j.value("base_seed", std::uint64_t{1});
  const std::string out_dir =
      !flags.out_dir.empty() ? flags.out_dir : j.value("out_dir", std::string("."));

  fs::create_directories(out_dir);
  for (double sigma : sigmas) {
    const sssh::SpectrumStatistics st =
        sssh::spectrum_statistics(lattice, mode, sigma, seed, n_real);
    std::ostringstream name;
    name << "spectrum_" << sssh::to_string(mode) << "_sigma" << sigma << ".csv";
    std::ofstream out(fs::path(out_dir) / name.str());
    out << "rank,mean_energy,sigma_eps,mean_pe\n";
    for (int i = 0; i < st.mean_energy.size(); ++i) {
      out << i << "," << st.mean_energy(i) << "," << st.sigma_eps(i) << ","
          << st.mean_pe(i) << "\n";
    }
    std::cout << name.str() << ": " << st.mean_energy.size() << " states, "
              << n_real << " realizations\n";
  }
  return 0;
}

int cmd_transfer(int n_d, int ell, double step, const std::string& out_dir) {
  double probability = 0.0;
  const std::complex<double> amp =
      sssh::photonic_transfer_phase(n_d, ell, step, &probability);
  const std::complex<double> zeta = sssh::zeta_phase(n_d, ell);

  json j;
  j["domains"] = n_d;
  j["domain_length"] = ell;
  j["probability"] = probability;
  j["phase"] = std::arg(amp);
  j["zeta_phase"] = std::arg(zeta);
  double delta = std::arg(amp) - std::arg(zeta);
  while (delta > std::numbers::pi) delta -= 2.0 * std::numbers::pi;
  while (delta < -std::numbers::pi) delta += 2.0 * std::numbers::pi;
  j["phase_error"] = std::abs(delta);
  std::cout << j.dump(2) << "\n";
  if (!out_dir.empty()) {
    write_text(fs::path(out_dir) / "transfer.json", j.dump(2));
  }
  return 0;
}

int cmd_protocol(const CommonFlags& flags, const std::string& schedule_csv,
                 const std::string& trajectory_csv) {
  const sssh::ExperimentConfig cfg = flags.resolve();
  const sssh::ProtocolPlan plan = sssh::plan_from_config(cfg);

  sssh::RunOptions opts;
  opts.step = cfg.step;
  opts.decay.gamma = cfg.gamma;
  const double sigma = cfg.sigmas.front();
  if (sigma > 0.0) {
    opts.disorder = sssh::DisorderSpec{cfg.mode, sigma, cfg.base_seed, 0};
  }
  opts.trajectory_path = trajectory_csv;
  const sssh::ProtocolResult result = sssh::run_protocol(plan, opts);

  json j = sssh::protocol_report(result);
  j["protocol"] = plan.name;
  j["sigma"] = sigma;
  std::cout << j.dump(2) << "\n";
  if (!cfg.out_dir.empty() && cfg.out_dir != ".") {
    write_text(fs::path(cfg.out_dir) / (plan.name + "_report.json"), j.dump(2));
  }
  if (!schedule_csv.empty()) {
    const sssh::Lattice lattice = sssh::Lattice(plan.lattice).connected();
    std::ostringstream os;
    // Rebuild the schedule the runner used by running the layout only.
    sssh::ControlSchedule sched;
    double t = 0.0;
    for (const auto& step_v : plan.steps) {
      if (const auto* cp = std::get_if<sssh::CouplingStep>(&step_v)) {
        const auto shape = sssh::coupling_pulse_angle(cp->angle, plan.g0);
        sched.add(sssh::PulseSegment{
            sssh::ChannelId{sssh::ChannelKind::G, cp->qudit}, t, shape});
        t += shape.duration;
      } else if (const auto* tr = std::get_if<sssh::TransferStep>(&step_v)) {
        const int n_part = std::abs(tr->to_boundary - tr->from_boundary);
        t = sssh::append_transfer(
            sched, plan.lattice, t, tr->from_boundary, tr->to_boundary,
            sssh::transfer_heights(n_part, plan.timings.v_tr,
                                   plan.interior_height.value_or(plan.timings.v_tr)),
            plan.timings);
      }
    }
    sched.write_csv(os, 0.05);
    write_text(schedule_csv, os.str());
  }
  return 0;
}

int cmd_sweep(const CommonFlags& flags) {
  const sssh::ExperimentConfig cfg = flags.resolve();
  const std::vector<sssh::SweepRow> rows = sssh::run_sweep(cfg);
  const std::vector<sssh::SweepSummary> sums = sssh::aggregate_sweep(rows);

  fs::create_directories(cfg.out_dir);
  {
    std::ostringstream os;
    sssh::write_rows_csv(os, rows, cfg.mode);
    write_text(fs::path(cfg.out_dir) /
                   (cfg.protocol + "_" + sssh::to_string(cfg.mode) + "_rows.csv"),
               os.str());
  }
  std::ostringstream os;
  sssh::write_summary_csv(os, sums, cfg.mode);
  write_text(fs::path(cfg.out_dir) /
                 (cfg.protocol + "_" + sssh::to_string(cfg.mode) + "_summary.csv"),
             os.str());
  std::cout << os.str();
  return 0;
}

int cmd_calibrate(int n_d, int ell, double v_tr, double step) {
  const sssh::Lattice lattice =
      sssh::Lattice(sssh::end_to_end_spec(n_d, ell, v_tr)).connected();
  const sssh::TransferTimings timings = sssh::table_timings(n_d, ell);
  const sssh::CalibrationResult cal =
      sssh::calibrate_interior_heights(lattice, v_tr, timings, step);
  json j;
  j["heights"] = cal.heights;
  j["probability"] = cal.probability;
  j["baseline_probability"] = cal.baseline_probability;
  j["improved"] = cal.improved;
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_phase_demo(const std::string& out_dir, double step) {
  const sssh::PhaseDemoResult demo = sssh::phase_demo_four_boundaries(step);
  json j;
  j["target_overlap"] = demo.target_overlap;
  j["applied_shifts"] = demo.applied_shifts;
  json amps = json::array();
  for (const auto& a : demo.boundary_amplitudes) {
    amps.push_back({{"re", a.real()}, {"im", a.imag()}, {"p", std::norm(a)},
                    {"arg", std::arg(a)}});
  }
  j["boundary_amplitudes"] = amps;
  std::cout << j.dump(2) << "\n";
  if (!out_dir.empty()) {
    write_text(fs::path(out_dir) / "phase_demo.json", j.dump(2));
    std::ostringstream os;
    demo.schedule.write_csv(os, 0.05);
    write_text(fs::path(out_dir) / "phase_demo_schedule.csv", os.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stub-SSH cavity-lattice entanglement protocol simulator"};
  app.require_subcommand(1);

  CommonFlags spectrum_flags, protocol_flags, sweep_flags;

  auto* spectrum = app.add_subcommand(
      "spectrum", "disorder-ensemble spectral statistics of a lattice");
  spectrum_flags.attach(spectrum);

  auto* transfer = app.add_subcommand(
      "transfer", "end-to-end transfer probability and phase vs the analytic value");
  int tr_nd = 1, tr_ell = 4;
  double tr_step = 0.01;
  std::string tr_out;
  transfer->add_option("--nd", tr_nd, "domain count");
  transfer->add_option("--ell", tr_ell, "domain length");
  transfer->add_option("--step", tr_step, "integrator step");
  transfer->add_option("--out", tr_out, "output directory");

  auto* protocol = app.add_subcommand(
      "protocol", "single protocol run with checkpoint report");
  protocol_flags.attach(protocol);
  std::string schedule_csv, trajectory_csv;
  protocol->add_option("--dump-schedule", schedule_csv,
                       "write the control schedule as CSV");
  protocol->add_option("--trajectory", trajectory_csv,
                       "write the probability trajectory as CSV");

  auto* sweep = app.add_subcommand("sweep", "disorder Monte Carlo sweep");
  sweep_flags.attach(sweep);

  auto* calibrate = app.add_subcommand(
      "calibrate", "interior pulse heights for a multidomain transfer");
  int cal_nd = 4, cal_ell = 4;
  double cal_vtr = 0.5, cal_step = 0.01;
  calibrate->add_option("--nd", cal_nd, "domain count");
  calibrate->add_option("--ell", cal_ell, "domain length");
  calibrate->add_option("--vtr", cal_vtr, "extremal pulse height");
  calibrate->add_option("--step", cal_step, "integrator step");

  auto* demo = app.add_subcommand(
      "phase-demo", "equal photon distribution over four boundaries");
  std::string demo_out;
  double demo_step = 0.01;
  demo->add_option("--out", demo_out, "output directory");
  demo->add_option("--step", demo_step, "integrator step");

  CLI11_PARSE(app, argc, argv);

  try {
    if (spectrum->parsed()) return cmd_spectrum(spectrum_flags);
    if (transfer->parsed()) return cmd_transfer(tr_nd, tr_ell, tr_step, tr_out);
    if (protocol->parsed())
      return cmd_protocol(protocol_flags, schedule_csv, trajectory_csv);
    if (sweep->parsed()) return cmd_sweep(sweep_flags);
    if (calibrate->parsed()) return cmd_calibrate(cal_nd, cal_ell, cal_vtr, cal_step);
    if (demo->parsed()) return cmd_phase_demo(demo_out, demo_step);
  } catch (const sssh::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const sssh::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
