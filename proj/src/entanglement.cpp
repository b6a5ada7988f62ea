#include "sssh/entanglement.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace sssh {

namespace {

using cplx = std::complex<double>;

// Descending Wootters lambdas: with rho = M M^dagger the lambdas are the
// singular values of the complex-symmetric overlap tau = M^T (Y(x)Y) M,
// which is numerically robust even for (near-)pure states.
std::array<double, 4> wootters_lambdas(const Eigen::MatrixXcd& rho) {
  Eigen::Matrix4cd yy = Eigen::Matrix4cd::Zero();
  // (sigma_y (x) sigma_y) in the computational basis: antidiagonal -1,1,1,-1
  yy(0, 3) = -1.0;
  yy(1, 2) = 1.0;
  yy(2, 1) = 1.0;
  yy(3, 0) = -1.0;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(rho);
  const Eigen::Matrix4cd m =
      es.eigenvectors() *
      es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  const Eigen::Matrix4cd tau = m.transpose() * yy * m;
  Eigen::JacobiSVD<Eigen::Matrix4cd> svd(tau);
  std::array<double, 4> lam{};
  for (int i = 0; i < 4; ++i) lam[i] = svd.singularValues()(i);
  std::sort(lam.begin(), lam.end(), std::greater<>());
  return lam;
}

double wootters(const Eigen::MatrixXcd& rho) {
  const auto lam = wootters_lambdas(rho);
  return std::max(0.0, lam[0] - lam[1] - lam[2] - lam[3]);
}

// {0,1}x{0,1} block of a two-qutrit matrix (configs are base-3 digits).
Eigen::Matrix4cd qutrit_qubit_block(const Eigen::MatrixXcd& rho9) {
  const std::array<int, 4> keep{0, 1, 3, 4};  // 3*s0 + s1 with s in {0,1}
  Eigen::Matrix4cd out;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) out(i, j) = rho9(keep[i], keep[j]);
  }
  return out;
}

void check_psd(const Eigen::MatrixXcd& rho, double tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
  if (es.eigenvalues().minCoeff() < -tol) {
    throw std::invalid_argument("density matrix is not positive semidefinite");
  }
}

}  // namespace

Eigen::MatrixXcd partial_trace(const Eigen::VectorXcd& state,
                               const JointBasis& basis, Keep keep) {
  if (state.size() != basis.dim()) {
    throw std::invalid_argument("state length does not match joint basis");
  }
  const int pd = basis.photon_dim();
  const int cc = basis.config_count();
  // View the configuration-major state as a (configs x photon) matrix.
  Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic,
                                 Eigen::RowMajor>>
      m(state.data(), cc, pd);
  if (keep == Keep::Qudits) {
    return m * m.adjoint();
  }
  return m.transpose() * m.conjugate();
}

Eigen::MatrixXcd partial_trace(const Eigen::MatrixXcd& rho,
                               const JointBasis& basis, Keep keep) {
  if (rho.rows() != basis.dim() || rho.cols() != basis.dim()) {
    throw std::invalid_argument("density matrix does not match joint basis");
  }
  const int pd = basis.photon_dim();
  const int cc = basis.config_count();
  if (keep == Keep::Qudits) {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(cc, cc);
    for (int c = 0; c < cc; ++c) {
      for (int d = 0; d < cc; ++d) {
        for (int ph = 0; ph < pd; ++ph) {
          out(c, d) += rho(basis.index(c, ph), basis.index(d, ph));
        }
      }
    }
    return out;
  }
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(pd, pd);
  for (int ph = 0; ph < pd; ++ph) {
    for (int qh = 0; qh < pd; ++qh) {
      for (int c = 0; c < cc; ++c) {
        out(ph, qh) += rho(basis.index(c, ph), basis.index(c, qh));
      }
    }
  }
  return out;
}

void check_density_matrix(const Eigen::MatrixXcd& rho, double trace_tol) {
  if (rho.rows() != rho.cols()) {
    throw std::invalid_argument("density matrix must be square");
  }
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-9) {
    throw std::invalid_argument("density matrix is not Hermitian");
  }
  if (std::abs(rho.trace().real() - 1.0) > trace_tol) {
    throw std::invalid_argument("density matrix trace differs from 1");
  }
  check_psd(rho, 1e-10);
}

double concurrence(const Eigen::MatrixXcd& rho) {
  if (rho.rows() == 9 && rho.cols() == 9) {
    Eigen::Matrix4cd blk = qutrit_qubit_block(rho);
    const double t = blk.trace().real();
    if (t < 1.0 - 1e-6) {
      throw std::invalid_argument(
          "two-qutrit state has non-negligible population outside the qubit block");
    }
    return concurrence(Eigen::MatrixXcd(blk / t));
  }
  if (rho.rows() != 4 || rho.cols() != 4) {
    throw std::invalid_argument("concurrence needs a two-qubit density matrix");
  }
  check_psd(rho, 1e-8);
  return wootters(rho);
}

double concurrence_qubit_block(const Eigen::MatrixXcd& rho9) {
  if (rho9.rows() == 4 && rho9.cols() == 4) return wootters(rho9);
  if (rho9.rows() != 9 || rho9.cols() != 9) {
    throw std::invalid_argument("expected a two-qutrit density matrix");
  }
  return wootters(qutrit_qubit_block(rho9));
}

namespace {

double witness(const Eigen::MatrixXcd& rho, const Eigen::Vector<cplx, 8>& target,
               double offset) {
  std::array<int, 8> idx{};
  int base = 0;
  if (rho.rows() == 8 && rho.cols() == 8) {
    base = 2;
  } else if (rho.rows() == 27 && rho.cols() == 27) {
    base = 3;
  } else {
    throw std::invalid_argument("witness needs a three-qudit density matrix");
  }
  for (int s = 0; s < 8; ++s) {
    const int s0 = (s >> 2) & 1, s1 = (s >> 1) & 1, s2 = s & 1;
    idx[s] = (s0 * base + s1) * base + s2;
  }
  cplx val = 0.0;
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      val += std::conj(target(i)) * rho(idx[i], idx[j]) * target(j);
    }
  }
  return offset + val.real();
}

}  // namespace

double witness_w(const Eigen::MatrixXcd& rho) {
  Eigen::Vector<cplx, 8> w = Eigen::Vector<cplx, 8>::Zero();
  const double n = 1.0 / std::sqrt(3.0);
  w(0b100) = n;
  w(0b010) = cplx(0.0, -n);
  w(0b001) = n;
  return witness(rho, w, -2.0 / 3.0);
}

double witness_ghz(const Eigen::MatrixXcd& rho) {
  Eigen::Vector<cplx, 8> g = Eigen::Vector<cplx, 8>::Zero();
  g(0b000) = 1.0 / std::numbers::sqrt2;
  g(0b111) = 1.0 / std::numbers::sqrt2;
  return witness(rho, g, -3.0 / 4.0);
}

MetricSet loss_metrics(const Eigen::VectorXcd& state, const JointBasis& basis,
                       const Eigen::VectorXcd& expected_qudit_state,
                       const Lattice& lattice) {
  if (expected_qudit_state.size() != basis.config_count()) {
    throw std::invalid_argument("target state does not match qudit configuration count");
  }
  if (lattice.size() != basis.cavity_count) {
    throw std::invalid_argument("lattice does not match joint basis");
  }
  const int pd = basis.photon_dim();
  const int cc = basis.config_count();
  Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic,
                                 Eigen::RowMajor>>
      m(state.data(), cc, pd);

  MetricSet out;
  const Eigen::VectorXcd vac = m.col(0);
  out.p_vacuum = vac.squaredNorm();
  out.fidelity = std::norm(expected_qudit_state.dot(vac));

  // Photon populations of the edge and wall-defect manifolds, contracted
  // over qudit configurations.
  const Eigen::MatrixXcd cav = m.rightCols(basis.cavity_count);
  const Eigen::MatrixXd edge = lattice.dimerized_edge_states();
  out.p_edge_linear = (cav * edge.cast<cplx>()).squaredNorm();
  out.p_edge_literal = out.p_edge_linear * out.p_edge_linear;
  out.p_no_bulk = out.p_vacuum + out.p_edge_linear;
  const Eigen::MatrixXd defect = lattice.wall_defect_states();
  if (defect.cols() > 0) {
    out.p_wall_defect = (cav * defect.cast<cplx>()).squaredNorm();
  }
  return out;
}

}  // namespace sssh
