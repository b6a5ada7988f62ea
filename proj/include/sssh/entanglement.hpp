#ifndef SSSH_ENTANGLEMENT_HPP
#define SSSH_ENTANGLEMENT_HPP

#include <Eigen/Dense>
#include <complex>
#include <limits>

#include "sssh/dynamics.hpp"
#include "sssh/lattice.hpp"

namespace sssh {

enum class Keep { Qudits, Photon };

/// Reduced density matrix of a pure joint state.
Eigen::MatrixXcd partial_trace(const Eigen::VectorXcd& state,
                               const JointBasis& basis, Keep keep);

/// Reduced density matrix of a joint density matrix.
Eigen::MatrixXcd partial_trace(const Eigen::MatrixXcd& rho,
                               const JointBasis& basis, Keep keep);

/// Validates hermiticity, positivity (eigenvalues >= -1e-10) and unit trace.
void check_density_matrix(const Eigen::MatrixXcd& rho, double trace_tol = 1e-9);

/// Wootters concurrence of a two-qubit density matrix: C = max(0, l1-l2-l3-l4)
/// with l_i the descending square roots of the eigenvalues of
/// rho (Y(x)Y) rho* (Y(x)Y). A 9x9 (two-qutrit) input is projected onto its
/// {0,1} block and renormalized, which requires the block to carry all but
/// 1e-6 of the trace; otherwise throws.
double concurrence(const Eigen::MatrixXcd& rho);

/// Concurrence of the {0,1} block of a two-qutrit density matrix without
/// renormalization: population outside the block discounts the result like a
/// loss channel. Used for disordered qutrit protocol metrics.
double concurrence_qubit_block(const Eigen::MatrixXcd& rho9);

/// Genuine-tripartite-entanglement witnesses: W_W = -2/3 + tr(rho P_W) with
/// P_W projecting on (|100> - i|010> + |001>)/sqrt(3), and
/// W_GHZ = -3/4 + tr(rho P_GHZ) with the zero-relative-phase GHZ state.
/// Positive values certify genuine tripartite entanglement. Qutrit inputs
/// (27x27) are contracted against the projector embedded in the {0,1}^3
/// block; residual |2> population counts against the overlap.
double witness_w(const Eigen::MatrixXcd& rho);
double witness_ghz(const Eigen::MatrixXcd& rho);

/// Protocol output metrics. Fidelity is the vacuum-sector fidelity
/// |<psi0, vac|psi>|^2, which guarantees p_no_bulk >= p_vacuum >= fidelity.
/// p_edge_literal = e^2 and p_edge_linear = e for the edge-manifold
/// population e = sum_k <k|rho_ph|k>; the linear form feeds
/// p_no_bulk = p_vacuum + p_edge_linear. p_wall_defect is the photon
/// population of the trivial strong-strong wall-defect states.
struct MetricSet {
  double fidelity = 0.0;
  double concurrence = std::numeric_limits<double>::quiet_NaN();
  double witness_w = std::numeric_limits<double>::quiet_NaN();
  double witness_ghz = std::numeric_limits<double>::quiet_NaN();
  double p_vacuum = 0.0;
  double p_edge_literal = 0.0;
  double p_edge_linear = 0.0;
  double p_no_bulk = 0.0;
  double p_wall_defect = 0.0;
};

/// Fidelity / vacuum / edge decomposition of a final joint state against the
/// analytic qudit target. The edge manifold is the dimerized zero-energy set
/// of the lattice the protocol ran on.
MetricSet loss_metrics(const Eigen::VectorXcd& state, const JointBasis& basis,
                       const Eigen::VectorXcd& expected_qudit_state,
                       const Lattice& lattice);

}  // namespace sssh

#endif  // SSSH_ENTANGLEMENT_HPP
