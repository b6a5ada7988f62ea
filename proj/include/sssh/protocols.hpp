#ifndef SSSH_PROTOCOLS_HPP
#define SSSH_PROTOCOLS_HPP

#include <complex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sssh/dynamics.hpp"
#include "sssh/entanglement.hpp"
#include "sssh/lattice.hpp"
#include "sssh/pulses.hpp"

namespace sssh {

/// Thrown when a pristine run misses a checkpoint (mis-sequenced schedule).
class ProtocolSequenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Phase factor acquired by a photon transferred across n_d domains of
/// length ell: zeta = -[(-1)^(ell/2+1) i]^n_d.
std::complex<double> zeta_phase(int n_d, int ell);

enum class GateKind { X, A };

struct CouplingStep {
  int qudit = 0;
  double angle = 0.0;  // Rabi rotation angle = integrated pulse area
  int lower = 0;
  int upper = 1;
};

struct TransferStep {
  int from_boundary = 0;
  int to_boundary = 1;
};

/// Instantaneous single-qudit unitary. X swaps levels 0 and 1, A swaps 1 and
/// 2; both carry the global -i phase of their pulsed implementation.
struct GateStep {
  int qudit = 0;
  GateKind gate = GateKind::X;
};

struct PhaseShiftStep {
  Site site;
  double phi = 0.0;
  double eps0 = 0.5;
  double t_prep = 2.0;
};

using ProtocolStep =
    std::variant<CouplingStep, TransferStep, GateStep, PhaseShiftStep>;

/// A full entanglement-distribution protocol: lattice, initial qudit state
/// and ordered step list. Factories below build the standard plans.
struct ProtocolPlan {
  std::string name;
  LatticeSpec lattice;
  int qudit_dim = 2;
  Eigen::VectorXcd initial_qudit_state;
  std::vector<ProtocolStep> steps;
  TransferTimings timings;
  std::optional<double> interior_height;  // pulse height of interior domains
  double g0 = 0.5;
  std::complex<double> eta{-1.0, 0.0};

  int qudit_count() const { return static_cast<int>(lattice.qudit_sites.size()); }
};

/// Bell Phi state between the two ends of an n_d-domain lattice.
ProtocolPlan phi_plan(int n_d, int ell);
/// Phi followed by an X gate on the right qubit, producing a Psi-type state.
ProtocolPlan psi_x_plan(int n_d, int ell);
/// Psi-type state via the two-qutrit restriction of the GHZ sequence.
ProtocolPlan psi_qutrit_plan(int n_d, int ell,
                             std::complex<double> eta = {-1.0, 0.0});
/// p-qubit W state on a (p-1)-domain lattice with a qudit at every boundary.
ProtocolPlan w_plan(int p = 3);
/// p-qutrit GHZ state on the same geometry.
ProtocolPlan ghz_plan(int p = 3, std::complex<double> eta = {-1.0, 0.0});

/// Joint-basis target states after every protocol step, from the ideal
/// sequence (exact pulses, instantaneous transfers carrying zeta, gates with
/// their -i phases, eta substituted).
std::vector<Eigen::VectorXcd> ideal_checkpoints(const ProtocolPlan& plan,
                                                const Lattice& lattice,
                                                const JointBasis& basis);

/// Analytic final qudit state (the fidelity target |psi0>).
Eigen::VectorXcd expected_final_state(const ProtocolPlan& plan);

struct ProtocolResult {
  Eigen::VectorXcd final_state;
  Eigen::MatrixXcd rho_q;
  Eigen::MatrixXcd rho_ph;
  std::vector<double> checkpoint_overlaps;
  Eigen::VectorXcd expected_qudit_state;
  JointBasis basis;
  Lattice lattice;
  double duration = 0.0;
  MetricSet metrics;
};

struct RunOptions {
  std::optional<DisorderSpec> disorder;
  DecaySpec decay;
  double step = 0.01;
  std::optional<bool> strict_checkpoints;  // default: pristine runs are strict
  // Optional probability-trajectory dump (CSV columns t, |amp|^2..., norm).
  std::string trajectory_path;
  int trajectory_stride = 100;
};

/// Executes a plan: builds the nested schedule, propagates with the given
/// disorder realization and decay, applies the instantaneous gates, records
/// the overlap with every ideal checkpoint and fills the loss metrics.
/// Pristine runs throw ProtocolSequenceError if any checkpoint overlap drops
/// below 0.99; disorder runs never do.
ProtocolResult run_protocol(const ProtocolPlan& plan, const RunOptions& opts = {});

enum class PsiMode { XGate, QutritGHZLike };

/// Convenience runner for the two Psi-state variants on the standard Bell
/// lattices.
ProtocolResult run_psi_variant(PsiMode mode, int n_d, int ell,
                               const RunOptions& opts = {});

struct PhaseDemoResult {
  Eigen::VectorXcd photon_state;            // over lattice sites
  std::vector<std::complex<double>> boundary_amplitudes;
  std::vector<double> applied_shifts;
  double target_overlap = 0.0;
  ControlSchedule schedule;
};

/// Distributes a photon equally over the four boundary cavities of the
/// 3-domain, 14-cavity lattice through partial transfers, then removes all
/// relative phases with on-site phase-shift pulses. Ends within overlap 0.98
/// of (|1,A> + |3,B> + |5,A> + |7,B>)/2.
PhaseDemoResult phase_demo_four_boundaries(double step = 0.01);

}  // namespace sssh

#endif  // SSSH_PROTOCOLS_HPP
