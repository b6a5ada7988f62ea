#ifndef SSSH_LATTICE_HPP
#define SSSH_LATTICE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace sssh {

enum class Sublattice { A = 0, B = 1 };

/// Cavity address: unit cell (1-based, as in the model definition) and sublattice.
struct Site {
  int cell = 1;
  Sublattice sub = Sublattice::A;

  bool operator==(const Site&) const = default;
};

std::string to_string(const Site& s);

/// Controllable parameter families of the lattice. W is the fixed inter-cell
/// hopping (energy unit, never pulsed); U are the extremal/stub links u_0..u_N;
/// V the intra-domain links v_1..v_N; Eps an on-site energy at one cavity.
enum class ParamKind { W, U, V, Eps };

struct ParamId {
  ParamKind kind = ParamKind::W;
  int index = 0;  // U: 0..N, V: 1..N, Eps: linear site index

  bool operator==(const ParamId&) const = default;
  bool operator<(const ParamId& o) const {
    return kind != o.kind ? kind < o.kind : index < o.index;
  }
};

/// Geometry and nominal couplings of a stub-SSH lattice with N domains of
/// even length l. Total cavity count is N*l + 2. Domain wall k (k = 1..N-1)
/// sits at unit cell k*l/2 + 1; each wall carries a stub cavity, and the two
/// chain ends are extremal cavities. Qudits may be placed on any of those
/// boundary cavities.
struct LatticeSpec {
  int domains = 1;
  int domain_length = 4;
  double w = 1.0;
  double u0 = 0.5;
  std::vector<double> u;  // u[k-1] is the k-th stub/extremal link, k = 1..N
  std::vector<double> v;  // v[k-1] is the k-th intra-domain hopping
  std::vector<Site> qudit_sites;

  int cavity_count() const { return domains * domain_length + 2; }
  int cell_count() const { return cavity_count() / 2; }
  int wall_cell(int k) const { return k * domain_length / 2 + 1; }

  /// Boundary b = 0 is the left end, b = 1..N-1 the wall stubs, b = N the
  /// right end. Odd boundaries live on sublattice B, even ones on A.
  Site boundary_site(int b) const;

  /// Throws std::invalid_argument on odd l, nonpositive sizes, size-mismatched
  /// coupling arrays or out-of-range qudit sites.
  void validate() const;

  static LatticeSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// One hopping matrix element and the parameter that controls it.
struct Link {
  int a = 0;
  int b = 0;
  ParamId param;
  double nominal = 0.0;
};

/// Working site basis built from a spec: site enumeration, structural link
/// list and the static matrices derived from them. `connected()` drops sites
/// that are unreachable through nominally nonzero links (e.g. stub cavities
/// whose u_k is zero in the spec), which reproduces the connected-chain
/// systems used for multidomain transfers.
class Lattice {
 public:
  explicit Lattice(LatticeSpec spec);

  const LatticeSpec& spec() const { return spec_; }
  int size() const { return static_cast<int>(sites_.size()); }
  const std::vector<Link>& links() const { return links_; }
  const std::vector<Site>& sites() const { return sites_; }

  /// Linear index of a site, or -1 if the site was dropped by connected().
  int site_index(const Site& s) const;
  Site site_at(int idx) const { return sites_.at(idx); }
  int boundary_index(int b) const { return site_index(spec_.boundary_site(b)); }

  Lattice connected() const;

  /// Diagonal of the sublattice-parity operator: +1 on A sites, -1 on B.
  Eigen::VectorXd chiral_signs() const;

  /// Static tight-binding matrix at the nominal parameter values, with
  /// optional named overrides ("u0", "v2", "u1", "w", "eps@3B", ...). Every
  /// parameter value x enters the matrix as -x, following the sign convention
  /// of the model Hamiltonian. Throws on unknown override keys.
  Eigen::MatrixXd static_matrix(
      const std::map<std::string, double>& overrides = {}) const;

  /// Matrix for arbitrary per-parameter values; `value(param)` is consulted
  /// for every structural link and for on-site terms via Eps params.
  template <typename Fn>
  Eigen::MatrixXd matrix_from(Fn&& value) const {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(size(), size());
    for (const Link& l : links_) {
      const double x = value(l.param);
      h(l.a, l.b) -= x;
      h(l.b, l.a) -= x;
    }
    for (int i = 0; i < size(); ++i) {
      h(i, i) -= value(ParamId{ParamKind::Eps, i});
    }
    return h;
  }

  /// Orthonormal basis (columns) of the zero-energy manifold of the fully
  /// dimerized lattice (all weak links off, w kept): the end modes, stub
  /// modes and wall pair modes. Used for p_e classification and the edge
  /// population metric.
  Eigen::MatrixXd dimerized_edge_states() const;

  /// Orthonormal basis of the trivial wall-defect states: the +-sqrt(2)w
  /// eigenstates of the dimerized lattice, localized on the strong-strong
  /// trimers at the domain walls.
  Eigen::MatrixXd wall_defect_states() const;

 private:
  Lattice() = default;

  LatticeSpec spec_;
  std::vector<Site> sites_;
  std::vector<int> index_;  // (cell-1)*2 + sub -> linear index or -1
  std::vector<Link> links_;

  Eigen::MatrixXd dimerized_matrix() const;
};

/// Spec-level convenience wrapper for the static matrix.
Eigen::MatrixXd build_static_hamiltonian(
    const LatticeSpec& spec, const std::map<std::string, double>& overrides = {});

enum class DisorderMode { OffDiagonal, General };

/// Quasistatic disorder: one perturbation matrix per realization, constant in
/// time. OffDiagonal perturbs exactly the structural links of the lattice
/// (preserving hermiticity and chirality); General additionally perturbs all
/// diagonal entries. Identical (base_seed, realization, mode, sigma) yield
/// bit-identical matrices.
struct DisorderSpec {
  DisorderMode mode = DisorderMode::OffDiagonal;
  double sigma = 0.0;
  std::uint64_t base_seed = 0;
  std::uint64_t realization = 0;
};

DisorderMode disorder_mode_from_string(const std::string& s);
std::string to_string(DisorderMode mode);

Eigen::MatrixXd sample_disorder(const Lattice& lattice, const DisorderSpec& d);

enum class EdgeStateKind { Left, Right, Stub, WallPair };

/// Analytic boundary-mode profiles: |L>, |R>, the translated stub modes |S_k>
/// and the wall pair modes |P_k> with alternating-sign geometric decay
/// (-v/w)^j on a single sublattice. v arguments are the weak-link values on
/// each side of the mode; for Stub exactly one of them must be positive (it
/// selects the decay direction), for Left/Right only the relevant one is
/// read. Requires 0 <= v < w (the state is not localized otherwise).
Eigen::VectorXd analytic_edge_state(const Lattice& lattice, EdgeStateKind kind,
                                    int wall, double v_left, double v_right);

/// Winding number of the off-diagonal Bloch component of a two-band domain
/// with intra/inter-cell hoppings v, w; even-parity domains traverse the
/// Brillouin zone with k -> -k, flipping the sign. Discretized over
/// k_samples >= 64 points. Throws near the gap closure |v - w| ~ 0.
int winding_number(double v, double w, bool even_domain, int k_samples = 256);

/// Disorder-ensemble statistics of the spectrum: eigenstates are grouped
/// across realizations by ascending-energy rank; sigma_eps is the per-rank
/// standard deviation (unbiased) and mean_pe the average overlap probability
/// with the dimerized edge manifold.
struct SpectrumStatistics {
  Eigen::VectorXd mean_energy;
  Eigen::VectorXd sigma_eps;
  Eigen::VectorXd mean_pe;
  int realizations = 0;
};

SpectrumStatistics spectrum_statistics(const Lattice& lattice, DisorderMode mode,
                                       double sigma, std::uint64_t base_seed,
                                       int n_realizations);

}  // namespace sssh

#endif  // SSSH_LATTICE_HPP
