#include "sssh/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace sssh {

namespace {

using cplx = std::complex<double>;
constexpr cplx kMinusI{0.0, -1.0};

struct Factorization {
  Eigen::MatrixXcd vecs;  // real-valued, stored complex for mixed products
  Eigen::VectorXd vals;
  Eigen::VectorXcd phases;
  double h = -1.0;

  void compute(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    vecs = es.eigenvectors().cast<cplx>();
    vals = es.eigenvalues();
    h = -1.0;
  }
  void set_step(double step) {
    if (step != h) {
      phases = ((kMinusI * step) * vals.cast<cplx>()).array().exp();
      h = step;
    }
  }
  void apply(Eigen::Ref<Eigen::VectorXcd> x, Eigen::VectorXcd& tmp) const {
    tmp.noalias() = vecs.transpose() * x;
    tmp.array() *= phases.array();
    x.noalias() = vecs * tmp;
  }
};

// Per-step channel sample: all link/on-site parameter values plus the g's.
struct ChannelSample {
  std::vector<double> link_vals;   // per structural link
  std::vector<double> onsite;      // per site (eps channels)
  std::vector<double> g;           // per qudit

  bool operator==(const ChannelSample&) const = default;
};

void sample_channels(const EvolveContext& ctx, double t, ChannelSample& out) {
  const Lattice& lat = *ctx.lattice;
  const ControlSchedule& sched = *ctx.schedule;
  out.link_vals.resize(lat.links().size());
  for (std::size_t i = 0; i < lat.links().size(); ++i) {
    const ParamId& p = lat.links()[i].param;
    switch (p.kind) {
      case ParamKind::W:
        out.link_vals[i] = lat.spec().w;
        break;
      case ParamKind::U:
        out.link_vals[i] = sched.value(ChannelId{ChannelKind::U, p.index}, t);
        break;
      case ParamKind::V:
        out.link_vals[i] = sched.value(ChannelId{ChannelKind::V, p.index}, t);
        break;
      case ParamKind::Eps:
        out.link_vals[i] = 0.0;
        break;
    }
  }
  out.onsite.resize(lat.size());
  for (int i = 0; i < lat.size(); ++i) {
    out.onsite[i] = sched.value(ChannelId{ChannelKind::Eps, i}, t);
  }
  out.g.resize(ctx.basis.qudit_count);
  for (int q = 0; q < ctx.basis.qudit_count; ++q) {
    out.g[q] = sched.value(ChannelId{ChannelKind::G, q}, t);
  }
}

Eigen::MatrixXd cavity_matrix(const EvolveContext& ctx, const ChannelSample& s) {
  const Lattice& lat = *ctx.lattice;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(lat.size(), lat.size());
  for (std::size_t i = 0; i < lat.links().size(); ++i) {
    const Link& l = lat.links()[i];
    h(l.a, l.b) -= s.link_vals[i];
    h(l.b, l.a) -= s.link_vals[i];
  }
  for (int i = 0; i < lat.size(); ++i) h(i, i) -= s.onsite[i];
  if (ctx.disorder) h += *ctx.disorder;
  return h;
}

std::vector<Coupling> active_couplings(const EvolveContext& ctx,
                                       const ChannelSample& s) {
  std::vector<Coupling> act;
  for (int q = 0; q < ctx.basis.qudit_count; ++q) {
    if (s.g[q] != 0.0) {
      const QuditCoupling& qc = ctx.couplings.at(q);
      act.push_back(Coupling{q, qc.cavity, qc.lower, qc.upper, s.g[q]});
    }
  }
  return act;
}

// exp(-gamma * excited_count * h) elementwise, the half-step of the symmetric
// splitting of the anti-Hermitian decay term.
void apply_decay_half(Eigen::VectorXcd& state, const JointBasis& basis,
                      const std::vector<int>& excited, double gamma, double h) {
  if (gamma == 0.0) return;
  const int pd = basis.photon_dim();
  for (int c = 0; c < basis.config_count(); ++c) {
    if (excited[c] == 0) continue;
    state.segment(static_cast<Eigen::Index>(c) * pd, pd) *=
        std::exp(-gamma * excited[c] * h / 2.0);
  }
}

std::vector<int> excited_counts(const JointBasis& basis) {
  std::vector<int> n(basis.config_count(), 0);
  for (int c = 0; c < basis.config_count(); ++c) {
    for (int q = 0; q < basis.qudit_count; ++q) {
      if (basis.digit(c, q) >= 1) ++n[c];
    }
  }
  return n;
}

void check_window(const EvolveContext& ctx, const Eigen::VectorXcd& state) {
  if (!ctx.lattice || !ctx.schedule) {
    throw std::invalid_argument("evolve context needs a lattice and a schedule");
  }
  if (ctx.max_step > 0.02 + 1e-12 || ctx.max_step <= 0.0) {
    throw std::invalid_argument("time step must lie in (0, 0.02]");
  }
  if (state.size() != ctx.basis.dim()) {
    throw std::invalid_argument("state length does not match joint basis");
  }
  if (static_cast<int>(ctx.couplings.size()) != ctx.basis.qudit_count) {
    throw std::invalid_argument("need one qudit coupling entry per qudit");
  }
}

}  // namespace

Eigen::MatrixXd assemble_joint_hamiltonian(const Eigen::MatrixXd& h_cav,
                                           const std::vector<Coupling>& couplings,
                                           const JointBasis& basis) {
  if (h_cav.rows() != basis.cavity_count || h_cav.cols() != basis.cavity_count) {
    throw std::invalid_argument("cavity matrix does not match basis");
  }
  const int pd = basis.photon_dim();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(basis.dim(), basis.dim());
  for (int c = 0; c < basis.config_count(); ++c) {
    h.block(c * pd + 1, c * pd + 1, basis.cavity_count, basis.cavity_count) = h_cav;
  }
  for (const Coupling& cp : couplings) {
    if (cp.cavity < 0 || cp.cavity >= basis.cavity_count) {
      throw std::invalid_argument("coupling addressed to a cavity outside the lattice");
    }
    if (cp.lower == cp.upper || cp.lower < 0 || cp.upper < 0 ||
        cp.lower >= basis.qudit_dim || cp.upper >= basis.qudit_dim) {
      throw std::invalid_argument("coupling needs two distinct qudit levels");
    }
    const int stride = basis.stride(cp.qudit);
    for (int c = 0; c < basis.config_count(); ++c) {
      if (basis.digit(c, cp.qudit) != cp.lower) continue;
      const int cu = c + (cp.upper - cp.lower) * stride;
      // <upper, vac | H | lower, photon@cavity> = g
      const int row = basis.index(cu, 0);
      const int col = basis.index(c, 1 + cp.cavity);
      h(row, col) += cp.g;
      h(col, row) += cp.g;
    }
  }
  return h;
}

void evolve_window(Eigen::VectorXcd& state, double t0, double t1,
                   const EvolveContext& ctx) {
  check_window(ctx, state);
  if (t1 <= t0) return;

  const JointBasis& basis = ctx.basis;
  const int pd = basis.photon_dim();
  const int cavities = basis.cavity_count;
  const std::vector<int> excited = excited_counts(basis);

  const int steps = static_cast<int>(std::ceil((t1 - t0) / ctx.max_step));
  const double h = (t1 - t0) / steps;

  ChannelSample sample, prev_sample;
  bool have_prev = false;
  int prev_mode = -1;  // 0 photon-only, 1 single-coupling block, 2 full
  Factorization fact;
  Eigen::VectorXcd tmp, blk;

  for (int i = 0; i < steps; ++i) {
    const double tm = t0 + (i + 0.5) * h;
    sample_channels(ctx, tm, sample);
    const std::vector<Coupling> act = active_couplings(ctx, sample);
    const int mode = act.size() <= 1 ? static_cast<int>(act.size()) : 2;

    const bool reuse = have_prev && sample == prev_sample && mode == prev_mode;

    apply_decay_half(state, basis, excited, ctx.decay.gamma, h);

    if (mode == 0) {
      if (!reuse) fact.compute(cavity_matrix(ctx, sample));
      fact.set_step(h);
      tmp.resize(cavities);
      for (int c = 0; c < basis.config_count(); ++c) {
        fact.apply(state.segment(static_cast<Eigen::Index>(c) * pd + 1, cavities),
                   tmp);
      }
    } else if (mode == 1) {
      const Coupling& cp = act.front();
      const int d = basis.qudit_dim;
      const int bdim = d * pd;
      if (!reuse) {
        Eigen::MatrixXd hb = Eigen::MatrixXd::Zero(bdim, bdim);
        const Eigen::MatrixXd hc = cavity_matrix(ctx, sample);
        for (int s = 0; s < d; ++s) {
          hb.block(s * pd + 1, s * pd + 1, cavities, cavities) = hc;
        }
        hb(cp.upper * pd + 0, cp.lower * pd + 1 + cp.cavity) += cp.g;
        hb(cp.lower * pd + 1 + cp.cavity, cp.upper * pd + 0) += cp.g;
        fact.compute(hb);
      }
      fact.set_step(h);
      blk.resize(bdim);
      tmp.resize(bdim);
      const int stride = basis.stride(cp.qudit);
      for (int c = 0; c < basis.config_count(); ++c) {
        if (basis.digit(c, cp.qudit) != 0) continue;
        for (int s = 0; s < d; ++s) {
          blk.segment(s * pd, pd) =
              state.segment(static_cast<Eigen::Index>(c + s * stride) * pd, pd);
        }
        fact.apply(blk, tmp);
        for (int s = 0; s < d; ++s) {
          state.segment(static_cast<Eigen::Index>(c + s * stride) * pd, pd) =
              blk.segment(s * pd, pd);
        }
      }
    } else {
      if (!reuse) {
        fact.compute(
            assemble_joint_hamiltonian(cavity_matrix(ctx, sample), act, basis));
      }
      fact.set_step(h);
      tmp.resize(basis.dim());
      fact.apply(state, tmp);
    }

    apply_decay_half(state, basis, excited, ctx.decay.gamma, h);

    std::swap(sample, prev_sample);
    have_prev = true;
    prev_mode = mode;
  }

  if (!state.allFinite()) {
    throw NumericalError("evolution produced non-finite amplitudes");
  }
}

void evolve_window_reference(Eigen::VectorXcd& state, double t0, double t1,
                             const EvolveContext& ctx) {
  check_window(ctx, state);
  if (t1 <= t0) return;
  const JointBasis& basis = ctx.basis;
  const std::vector<int> excited = excited_counts(basis);
  const int steps = static_cast<int>(std::ceil((t1 - t0) / ctx.max_step));
  const double h = (t1 - t0) / steps;

  ChannelSample sample;
  Factorization fact;
  Eigen::VectorXcd tmp(basis.dim());
  for (int i = 0; i < steps; ++i) {
    const double tm = t0 + (i + 0.5) * h;
    sample_channels(ctx, tm, sample);
    apply_decay_half(state, basis, excited, ctx.decay.gamma, h);
    fact.compute(assemble_joint_hamiltonian(cavity_matrix(ctx, sample),
                                            active_couplings(ctx, sample), basis));
    fact.set_step(h);
    fact.apply(state, tmp);
    apply_decay_half(state, basis, excited, ctx.decay.gamma, h);
  }
  if (!state.allFinite()) {
    throw NumericalError("evolution produced non-finite amplitudes");
  }
}

LatticeSpec end_to_end_spec(int n_d, int ell, double v_tr) {
  LatticeSpec spec;
  spec.domains = n_d;
  spec.domain_length = ell;
  spec.w = 1.0;
  spec.u0 = v_tr;
  spec.u.assign(n_d, 0.0);
  spec.u.back() = v_tr;
  spec.v.assign(n_d, v_tr);
  spec.qudit_sites = {spec.boundary_site(0), spec.boundary_site(n_d)};
  return spec;
}

std::complex<double> photonic_transfer_phase(int n_d, int ell, double step,
                                             double* probability,
                                             const TransferTimings* timings,
                                             const std::vector<double>* heights) {
  const TransferTimings t = timings ? *timings : table_timings(n_d, ell);
  std::vector<double> hts;
  if (heights) {
    hts = *heights;
  } else if (n_d == 4 && ell == 4) {
    hts = transfer_heights(n_d, t.v_tr, 0.38);
  } else if (n_d <= 2) {
    hts = transfer_heights(n_d, t.v_tr, t.v_tr);
  } else {
    throw std::invalid_argument("no tabulated interior heights; pass them in");
  }

  const Lattice lattice = Lattice(end_to_end_spec(n_d, ell, t.v_tr)).connected();
  ControlSchedule sched;
  const double t_end = append_transfer(sched, lattice.spec(), 0.0, 0, n_d, hts, t);

  EvolveContext ctx;
  ctx.lattice = &lattice;
  ctx.schedule = &sched;
  ctx.basis = JointBasis{0, 2, lattice.size()};
  ctx.max_step = step;

  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(ctx.basis.dim());
  psi(1 + lattice.boundary_index(0)) = 1.0;
  evolve_window(psi, 0.0, t_end, ctx);

  const std::complex<double> amp = psi(1 + lattice.boundary_index(n_d));
  if (probability) *probability = std::norm(amp);
  if (std::norm(amp) < 0.9) {
    throw NumericalError("transfer probability below 0.9: calibration failure");
  }
  return amp;
}

}  // namespace sssh
