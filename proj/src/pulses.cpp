#include "sssh/pulses.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace sssh {

std::string to_string(const ChannelId& c) {
  switch (c.kind) {
    case ChannelKind::U:
      return "u" + std::to_string(c.index);
    case ChannelKind::V:
      return "v" + std::to_string(c.index);
    case ChannelKind::G:
      return "g" + std::to_string(c.index);
    case ChannelKind::Eps:
      return "eps" + std::to_string(c.index);
  }
  return "?";
}

double PulseShape::value(double tau) const {
  if (tau <= 0.0 || tau >= duration) return 0.0;
  if (ramp <= 0.0) return peak;
  const double omega = std::numbers::pi / (2.0 * ramp);
  if (tau < ramp) {
    const double s = std::sin(omega * tau);
    return peak * s * s;
  }
  if (tau > duration - ramp) {
    const double s = std::sin(omega * (tau - duration));
    return peak * s * s;
  }
  return peak;
}

PulseShape transfer_pulse(double peak, double t_prep, double t_total) {
  if (t_prep <= 0.0 || t_total < 2.0 * t_prep) {
    throw std::invalid_argument("transfer pulse needs t_total >= 2*t_prep > 0");
  }
  return PulseShape{peak, t_prep, t_total};
}

PulseShape coupling_pulse(int n, int m, double g0) {
  if (n < 1 || m < 1 || g0 <= 0.0) {
    throw std::invalid_argument("coupling pulse needs n, m >= 1 and g0 > 0");
  }
  const double duration = n * std::numbers::pi / (m * g0);
  return PulseShape{g0, duration / 2.0, duration};
}

PulseShape coupling_pulse_angle(double theta, double g0) {
  if (theta <= 0.0 || g0 <= 0.0) {
    throw std::invalid_argument("coupling pulse needs theta > 0 and g0 > 0");
  }
  const double duration = 2.0 * theta / g0;
  return PulseShape{g0, duration / 2.0, duration};
}

PulseShape phase_shift_pulse(double phi, double eps0, double t_prep) {
  if (eps0 <= 0.0 || t_prep <= 0.0) {
    throw std::invalid_argument("phase shift pulse needs eps0 > 0 and t_prep > 0");
  }
  if (phi < -std::numbers::pi || phi >= std::numbers::pi) {
    throw std::invalid_argument("phase shift must lie in [-pi, pi)");
  }
  if (phi == 0.0) return PulseShape{0.0, 0.0, 0.0};
  const double sign = phi > 0.0 ? 1.0 : -1.0;
  // Area condition eps0*(T - t_prep) = |phi|. When the flat top would be
  // negative the pulse degenerates to a pure arch of the same ramps, with the
  // peak scaled so the area still matches.
  if (std::abs(phi) >= eps0 * t_prep) {
    return PulseShape{sign * eps0, t_prep, t_prep + std::abs(phi) / eps0};
  }
  return PulseShape{sign * std::abs(phi) / t_prep, t_prep, 2.0 * t_prep};
}

void ControlSchedule::add(PulseSegment seg) {
  if (seg.shape.duration <= 0.0) return;  // zero-length no-op
  for (const PulseSegment& s : segments_) {
    if (s.channel == seg.channel &&
        std::max(s.t0, seg.t0) < std::min(s.t1(), seg.t1()) - 1e-12) {
      throw std::invalid_argument("overlapping segments on channel " +
                                  to_string(seg.channel));
    }
  }
  horizon_ = std::max(horizon_, seg.t1());
  segments_.push_back(std::move(seg));
}

double ControlSchedule::value(const ChannelId& c, double t) const {
  for (const PulseSegment& s : segments_) {
    if (s.channel == c && t > s.t0 && t < s.t1()) return s.value(t);
  }
  return 0.0;
}

std::vector<ChannelId> ControlSchedule::channels() const {
  std::vector<ChannelId> out;
  for (const PulseSegment& s : segments_) {
    if (std::find(out.begin(), out.end(), s.channel) == out.end()) {
      out.push_back(s.channel);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

void ControlSchedule::write_csv(std::ostream& os, double dt) const {
  const auto chans = channels();
  os << "t";
  for (const ChannelId& c : chans) os << "," << to_string(c);
  os << "\n";
  const int n = static_cast<int>(std::ceil(horizon_ / dt));
  for (int i = 0; i <= n; ++i) {
    const double t = std::min(i * dt, horizon_);
    os << t;
    for (const ChannelId& c : chans) os << "," << value(c, t);
    os << "\n";
  }
}

TransferTimings table_timings(int n_domains, int ell) {
  if (n_domains == 1 && ell == 12) return TransferTimings{25.0, 304.0, 15.0, 30.0, 0.5};
  if (n_domains == 4 && ell == 4) return TransferTimings{20.0, 45.3, 15.0, 30.0, 0.5};
  if (n_domains == 1 && ell == 4) return TransferTimings{7.0, 25.2, 15.0, 30.0, 0.5};
  throw std::invalid_argument("no tabulated timings for " + std::to_string(n_domains) +
                              " domain(s) of length " + std::to_string(ell));
}

std::vector<double> transfer_heights(int n_participating, double v_tr,
                                     double interior) {
  std::vector<double> h(n_participating, interior);
  if (n_participating >= 1) h.front() = v_tr;
  if (n_participating >= 1) h.back() = v_tr;
  return h;
}

double append_transfer(ControlSchedule& sched, const LatticeSpec& spec, double t0,
                       int from_boundary, int to_boundary,
                       const std::vector<double>& heights,
                       const TransferTimings& timings) {
  if (from_boundary == to_boundary) {
    throw std::invalid_argument("transfer endpoints must be distinct boundaries");
  }
  const int lo = std::min(from_boundary, to_boundary);
  const int hi = std::max(from_boundary, to_boundary);
  if (lo < 0 || hi > spec.domains) {
    throw std::invalid_argument("transfer boundary outside lattice");
  }
  const int n_part = hi - lo;
  if (static_cast<int>(heights.size()) != n_part) {
    throw std::invalid_argument("need one pulse height per participating domain");
  }

  std::vector<int> barrier_domains;
  if (lo >= 1) barrier_domains.push_back(lo);
  if (hi + 1 <= spec.domains) barrier_domains.push_back(hi + 1);

  const double bar_pad = barrier_domains.empty() ? 0.0 : timings.t_bar;
  const double tr0 = t0 + bar_pad;

  auto hosts_qudit = [&](int b) {
    const Site s = spec.boundary_site(b);
    return std::find(spec.qudit_sites.begin(), spec.qudit_sites.end(), s) !=
           spec.qudit_sites.end();
  };
  for (int d : barrier_domains) {
    const PulseShape bar = transfer_pulse(timings.v_bar, timings.t_bar,
                                          2.0 * timings.t_bar + timings.t_tr);
    sched.add(PulseSegment{ChannelId{ChannelKind::V, d}, t0, bar});
    // Idle qudit cavities bordering a trivialized domain are tuned with it;
    // left dangling at zero energy they would hybridize with the transfer
    // manifold through the constant w links.
    for (int b : {d - 1, d}) {
      if (b == lo || b == hi || b < 0 || b > spec.domains) continue;
      if (!hosts_qudit(b)) continue;
      sched.add(PulseSegment{ChannelId{ChannelKind::U, b}, t0, bar});
    }
  }
  for (int i = 0; i < n_part; ++i) {
    sched.add(PulseSegment{ChannelId{ChannelKind::V, lo + 1 + i}, tr0,
                           transfer_pulse(heights[i], timings.t_prep, timings.t_tr)});
  }
  // The links to the start/end cavities follow their contiguous domain;
  // intermediate stub links stay off.
  sched.add(PulseSegment{ChannelId{ChannelKind::U, lo}, tr0,
                         transfer_pulse(heights.front(), timings.t_prep, timings.t_tr)});
  sched.add(PulseSegment{ChannelId{ChannelKind::U, hi}, tr0,
                         transfer_pulse(heights.back(), timings.t_prep, timings.t_tr)});

  return t0 + timings.t_tr + 2.0 * bar_pad;
}

ControlSchedule build_transfer_schedule(const LatticeSpec& spec, int from_boundary,
                                        int to_boundary,
                                        const std::vector<double>& heights,
                                        const TransferTimings& timings) {
  ControlSchedule sched;
  append_transfer(sched, spec, 0.0, from_boundary, to_boundary, heights, timings);
  return sched;
}

namespace {

// Photon-sector midpoint-exponential propagation, enough for calibration.
double end_to_end_probability(const Lattice& lattice,
                              const std::vector<double>& heights,
                              const TransferTimings& timings, double step) {
  ControlSchedule sched;
  const double t_end = append_transfer(sched, lattice.spec(), 0.0, 0,
                                       lattice.spec().domains, heights, timings);
  const int n = lattice.size();
  const int src = lattice.boundary_index(0);
  const int dst = lattice.boundary_index(lattice.spec().domains);
  if (src < 0 || dst < 0) throw std::invalid_argument("transfer endpoint not in lattice");

  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(n);
  psi(src) = 1.0;
  const int steps = static_cast<int>(std::ceil(t_end / step));
  const double h = t_end / steps;
  for (int i = 0; i < steps; ++i) {
    const double tm = (i + 0.5) * h;
    const Eigen::MatrixXd hm = lattice.matrix_from([&](const ParamId& p) -> double {
      switch (p.kind) {
        case ParamKind::W:
          return lattice.spec().w;
        case ParamKind::U:
          return sched.value(ChannelId{ChannelKind::U, p.index}, tm);
        case ParamKind::V:
          return sched.value(ChannelId{ChannelKind::V, p.index}, tm);
        case ParamKind::Eps:
          return 0.0;
      }
      return 0.0;
    });
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hm);
    const Eigen::MatrixXcd v = es.eigenvectors().cast<std::complex<double>>();
    const Eigen::VectorXcd phases =
        (std::complex<double>(0.0, -h) *
         es.eigenvalues().cast<std::complex<double>>())
            .array()
            .exp();
    psi = v * phases.cwiseProduct(v.transpose() * psi);
  }
  return std::norm(psi(dst));
}

double golden_max(const std::function<double(double)>& f, double a, double b,
                  double xtol) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > xtol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

CalibrationResult calibrate_interior_heights(const Lattice& lattice, double v_tr,
                                             const TransferTimings& timings,
                                             double step) {
  const int n_d = lattice.spec().domains;
  CalibrationResult res;
  res.heights.assign(n_d, v_tr);
  res.baseline_probability =
      end_to_end_probability(lattice, res.heights, timings, step);
  res.probability = res.baseline_probability;
  if (n_d <= 2) return res;

  auto objective = [&](const std::vector<double>& h) {
    return end_to_end_probability(lattice, h, timings, step);
  };

  // Symmetric interior pairs (i, n_d-1-i), i = 1..; the middle domain of an
  // odd count pairs with itself.
  std::vector<std::pair<int, int>> pairs;
  for (int i = 1; i <= n_d - 2 - i; ++i) pairs.emplace_back(i, n_d - 1 - i);
  if ((n_d - 1) % 2 == 0) pairs.emplace_back((n_d - 1) / 2, (n_d - 1) / 2);

  double best = res.probability;
  for (int sweep = 0; sweep < 8; ++sweep) {
    const double before = best;
    for (const auto& [i, j] : pairs) {
      auto eval = [&](double x) {
        std::vector<double> h = res.heights;
        h[i] = h[j] = x;
        return objective(h);
      };
      double gx = 0.0, gbest = -1.0;
      for (double x = 0.05; x <= 0.951; x += 0.05) {
        const double p = eval(x);
        if (p > gbest) {
          gbest = p;
          gx = x;
        }
      }
      const double x = golden_max(eval, std::max(0.01, gx - 0.05),
                                  std::min(0.99, gx + 0.05), 1e-3);
      const double p = eval(x);
      if (p > best) {
        best = p;
        res.heights[i] = res.heights[j] = x;
      }
    }
    if (best - before < 1e-4) break;
  }
  res.probability = best;
  res.improved = res.probability >= res.baseline_probability;
  return res;
}

}  // namespace sssh
