#ifndef SSSH_PULSES_HPP
#define SSSH_PULSES_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sssh/lattice.hpp"

namespace sssh {

/// Control channels: the weak links (U, V), the qudit-cavity couplings (G,
/// indexed by qudit) and on-site energies (Eps, indexed by site).
enum class ChannelKind { U, V, G, Eps };

struct ChannelId {
  ChannelKind kind = ChannelKind::V;
  int index = 0;

  bool operator==(const ChannelId&) const = default;
  bool operator<(const ChannelId& o) const {
    return kind != o.kind ? kind < o.kind : index < o.index;
  }
};

std::string to_string(const ChannelId& c);

/// sin^2-ramp / flat-top / sin^2-ramp waveform on [0, duration]. The ramp
/// frequency is fixed to pi/(2*ramp) so the ramp ends exactly at `peak`;
/// ramp == duration/2 gives a pure arch with no flat top. Values vanish at
/// both endpoints and the waveform is symmetric about duration/2.
struct PulseShape {
  double peak = 0.0;
  double ramp = 0.0;
  double duration = 0.0;

  double value(double tau) const;
};

/// Transfer/barrier pulse: peak held between ramps, total length t_total.
PulseShape transfer_pulse(double peak, double t_prep, double t_total);

/// Qudit-cavity coupling arch producing a Rabi rotation angle of n*pi/(2m):
/// duration n*pi/(m*g0), time-integrated area n*pi/(2m).
PulseShape coupling_pulse(int n, int m, double g0);

/// Coupling arch with arbitrary rotation angle theta = integrated area.
PulseShape coupling_pulse_angle(double theta, double g0);

/// On-site energy pulse imprinting phase phi on an amplitude parked at the
/// cavity. The pulse sign equals the sign of phi and the total duration T
/// satisfies the area condition eps0*(T - t_prep) = |phi|. Requires
/// |phi| >= eps0*t_prep (the flat top would be negative otherwise);
/// phi == 0 returns a zero-length no-op.
PulseShape phase_shift_pulse(double phi, double eps0, double t_prep);

struct PulseSegment {
  ChannelId channel;
  double t0 = 0.0;
  PulseShape shape;

  double t1() const { return t0 + shape.duration; }
  double value(double t) const { return shape.value(t - t0); }
};

/// A set of named time-dependent channels assembled from pulse segments.
/// Segments on one channel must not overlap, so every channel evaluates to a
/// single-valued function of time; channels are zero outside their segments.
class ControlSchedule {
 public:
  void add(PulseSegment seg);
  double value(const ChannelId& c, double t) const;
  double horizon() const { return horizon_; }
  std::vector<ChannelId> channels() const;
  const std::vector<PulseSegment>& segments() const { return segments_; }

  /// CSV time series (t plus one column per channel) at fixed sampling step.
  void write_csv(std::ostream& os, double dt) const;

 private:
  std::vector<PulseSegment> segments_;
  double horizon_ = 0.0;
};

struct TransferTimings {
  double t_prep = 7.0;
  double t_tr = 25.2;
  double t_bar = 15.0;
  double v_bar = 30.0;
  double v_tr = 0.5;
};

/// Per-(n_domains, l) transfer timings from the reference parameter table.
/// Throws for combinations without tabulated values.
TransferTimings table_timings(int n_domains, int ell);

/// Pulse heights for the participating domains of an end-to-end transfer:
/// v_tr at the two extremal domains and `interior` at the rest (symmetric).
std::vector<double> transfer_heights(int n_participating, double v_tr,
                                     double interior);

/// Appends the pulses of a topological transfer between two boundaries to a
/// schedule, starting at t0:
///   - every participating domain gets a transfer pulse at its height,
///   - the u channels of the start/end boundary cavities follow the
///     contiguous participating domain (intermediate stubs stay off),
///   - non-participating domains adjacent to a terminal wall get a barrier
///     pulse (ramp t_bar) that is at full height strictly before any transfer
///     channel leaves zero and stays until all have returned to zero.
/// Returns the end time of the whole nested block.
double append_transfer(ControlSchedule& sched, const LatticeSpec& spec, double t0,
                       int from_boundary, int to_boundary,
                       const std::vector<double>& heights,
                       const TransferTimings& timings);

/// Single transfer starting at t = 0 (convenience wrapper).
ControlSchedule build_transfer_schedule(const LatticeSpec& spec, int from_boundary,
                                        int to_boundary,
                                        const std::vector<double>& heights,
                                        const TransferTimings& timings);

struct CalibrationResult {
  std::vector<double> heights;  // one per domain
  double probability = 0.0;
  double baseline_probability = 0.0;
  bool improved = false;
};

/// Interior pulse heights for an end-to-end transfer across > 2 domains,
/// maximizing the transfer probability of the pristine photonic lattice at
/// the given (fixed) timings. Heights are symmetric about the transfer
/// midpoint; each symmetric pair is optimized by a grid scan plus
/// golden-section refinement, sweeping pairs until the improvement per sweep
/// drops below 1e-4. Deterministic.
CalibrationResult calibrate_interior_heights(const Lattice& lattice, double v_tr,
                                             const TransferTimings& timings,
                                             double step = 0.01);

}  // namespace sssh

#endif  // SSSH_PULSES_HPP
