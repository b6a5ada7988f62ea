#ifndef SSSH_DYNAMICS_HPP
#define SSSH_DYNAMICS_HPP

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <vector>

#include "sssh/lattice.hpp"
#include "sssh/pulses.hpp"

namespace sssh {

/// Thrown when an integration produces non-finite amplitudes or a transfer
/// falls below its required probability.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Basis of the joint qudit (x) photon Hilbert space. States are enumerated
/// qudit-configuration-major, photon-minor; photon index 0 is the vacuum and
/// 1 + i the one-photon state of cavity i. Within a configuration, qudit 0 is
/// the most significant digit, so |s0 s1 ... , ph> reads left to right.
struct JointBasis {
  int qudit_count = 0;
  int qudit_dim = 2;
  int cavity_count = 0;

  int photon_dim() const { return cavity_count + 1; }
  int config_count() const {
    int c = 1;
    for (int q = 0; q < qudit_count; ++q) c *= qudit_dim;
    return c;
  }
  int dim() const { return config_count() * photon_dim(); }
  int index(int config, int photon) const { return config * photon_dim() + photon; }
  int config_of(int i) const { return i / photon_dim(); }
  int photon_of(int i) const { return i % photon_dim(); }
  int stride(int q) const {
    int s = 1;
    for (int k = q + 1; k < qudit_count; ++k) s *= qudit_dim;
    return s;
  }
  int digit(int config, int q) const { return (config / stride(q)) % qudit_dim; }
};

/// One active qudit-cavity exchange term
///   g * (photon annihilation at `cavity`) |upper><lower| + h.c.
struct Coupling {
  int qudit = 0;
  int cavity = 0;
  int lower = 0;
  int upper = 1;
  double g = 0.0;
};

/// Joint matrix: the lattice matrix acting on the one-photon sector of every
/// qudit configuration, plus the rotating-wave exchange couplings. The vacuum
/// sector carries zero energy.
Eigen::MatrixXd assemble_joint_hamiltonian(const Eigen::MatrixXd& h_cav,
                                           const std::vector<Coupling>& couplings,
                                           const JointBasis& basis);

struct DecaySpec {
  double gamma = 0.0;  // amplitude decay rate of excited qudit levels
};

/// Designates, per qudit, which cavity it sits in and which transition its g
/// channel drives during the current window.
struct QuditCoupling {
  int cavity = 0;
  int lower = 0;
  int upper = 1;
};

struct EvolveContext {
  const Lattice* lattice = nullptr;
  const ControlSchedule* schedule = nullptr;
  const Eigen::MatrixXd* disorder = nullptr;  // additive, constant; may be null
  JointBasis basis;
  std::vector<QuditCoupling> couplings;  // one per qudit
  DecaySpec decay;
  double max_step = 0.01;
};

/// Midpoint-exponential propagation of `state` over [t0, t1]: each step h
/// applies exp(-i H(t + h/2) h) through a Hermitian eigendecomposition, with
/// the decay term -i*gamma*(excited-level count) added by symmetric splitting
/// (no-jump convention, no renormalization). When at most one qudit coupling
/// is active the step operator is applied blockwise, which is exact because
/// H is then block diagonal. Refuses max_step > 0.02 and throws
/// NumericalError on non-finite amplitudes.
void evolve_window(Eigen::VectorXcd& state, double t0, double t1,
                   const EvolveContext& ctx);

/// Same contract, but always assembling and diagonalizing the full joint
/// matrix. Reference path for cross-checking the blockwise one.
void evolve_window_reference(Eigen::VectorXcd& state, double t0, double t1,
                             const EvolveContext& ctx);

/// End-mode amplitude after a full end-to-end transfer of a photon across the
/// pristine lattice (n_d domains of length ell), using the tabulated timings
/// unless overridden. The argument of the returned amplitude realizes the
/// transfer phase zeta(n_d, ell). Throws NumericalError if the transfer
/// probability lands below 0.9. `probability` (optional) receives |amp|^2.
std::complex<double> photonic_transfer_phase(
    int n_d, int ell, double step = 0.01, double* probability = nullptr,
    const TransferTimings* timings = nullptr,
    const std::vector<double>* heights = nullptr);

/// Standard lattice for end-to-end transfer experiments: all weak links at
/// v_tr, interior stubs disconnected, qudit cavities at both ends.
LatticeSpec end_to_end_spec(int n_d, int ell, double v_tr = 0.5);

}  // namespace sssh

#endif  // SSSH_DYNAMICS_HPP
