#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "sssh/dynamics.hpp"
#include "sssh/pulses.hpp"

using namespace sssh;

namespace {

constexpr double kPi = std::numbers::pi;

// Simpson quadrature of a pulse waveform.
double pulse_area(const PulseShape& p, int n = 20001) {
  const double h = p.duration / (n - 1);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = i == 0 || i == n - 1 ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += w * p.value(i * h);
  }
  return sum * h / 3.0;
}

LatticeSpec wghz_spec() {
  LatticeSpec spec;
  spec.domains = 2;
  spec.domain_length = 4;
  spec.u0 = 0.5;
  spec.u.assign(2, 0.5);
  spec.v.assign(2, 0.5);
  for (int b = 0; b <= 2; ++b) spec.qudit_sites.push_back(spec.boundary_site(b));
  return spec;
}

}  // namespace

TEST_CASE("transfer pulse: endpoints, ramp completion, symmetry") {
  const PulseShape p = transfer_pulse(0.5, 25.0, 304.0);
  CHECK(std::abs(p.value(0.0)) < 1e-12);
  CHECK(std::abs(p.value(304.0)) < 1e-12);
  CHECK(p.value(25.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p.value(152.0) == 0.5);
  for (double t : {3.0, 11.0, 25.0, 100.0}) {
    CHECK(p.value(t) == doctest::Approx(p.value(304.0 - t)));
  }
  CHECK_THROWS_AS(transfer_pulse(0.5, 10.0, 19.0), std::invalid_argument);
  CHECK_THROWS_AS(transfer_pulse(0.5, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("coupling pulse durations and areas") {
  CHECK(coupling_pulse(1, 1, 0.5).duration == doctest::Approx(2.0 * kPi));
  CHECK(coupling_pulse(1, 2, 0.5).duration == doctest::Approx(kPi));
  CHECK(coupling_pulse(2, 3, 0.5).duration == doctest::Approx(4.0 * kPi / 3.0));

  for (auto [n, m] : {std::pair{1, 1}, {1, 2}, {2, 3}, {3, 4}}) {
    const PulseShape p = coupling_pulse(n, m, 0.5);
    CHECK(pulse_area(p) == doctest::Approx(n * kPi / (2.0 * m)).epsilon(1e-9));
  }
  const PulseShape a = coupling_pulse_angle(0.955316618, 0.5);
  CHECK(a.duration == doctest::Approx(2.0 * 0.955316618 / 0.5));
  CHECK(pulse_area(a) == doctest::Approx(0.955316618).epsilon(1e-9));
  CHECK_THROWS_AS(coupling_pulse(0, 1, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(coupling_pulse(1, 1, 0.0), std::invalid_argument);
}

TEST_CASE("phase shift pulse satisfies the area condition") {
  CHECK(phase_shift_pulse(0.0, 0.5, 5.0).duration == 0.0);

  // flat-top regime
  const PulseShape p = phase_shift_pulse(-3.0, 0.5, 2.0);
  CHECK(p.peak == doctest::Approx(-0.5));
  CHECK(p.duration == doctest::Approx(2.0 + 3.0 / 0.5));
  CHECK(pulse_area(p) == doctest::Approx(-3.0).epsilon(1e-9));

  // arch regime: |phi| < eps0 * t_prep
  const PulseShape q = phase_shift_pulse(-kPi / 2.0, 0.5, 5.0);
  CHECK(q.duration == doctest::Approx(10.0));
  CHECK(pulse_area(q) == doctest::Approx(-kPi / 2.0).epsilon(1e-9));

  CHECK_THROWS_AS(phase_shift_pulse(0.5, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(phase_shift_pulse(4.0, 0.5, 1.0), std::invalid_argument);
}

TEST_CASE("schedule rejects overlapping segments on one channel") {
  ControlSchedule sched;
  sched.add({ChannelId{ChannelKind::V, 1}, 0.0, transfer_pulse(0.5, 1.0, 10.0)});
  CHECK_THROWS_AS(
      sched.add({ChannelId{ChannelKind::V, 1}, 5.0, transfer_pulse(0.5, 1.0, 10.0)}),
      std::invalid_argument);
  // different channel or disjoint time is fine
  sched.add({ChannelId{ChannelKind::V, 2}, 5.0, transfer_pulse(0.5, 1.0, 10.0)});
  sched.add({ChannelId{ChannelKind::V, 1}, 10.0, transfer_pulse(0.5, 1.0, 10.0)});
  CHECK(sched.horizon() == doctest::Approx(20.0));
}

TEST_CASE("transfer schedule nests barriers around the transfer window") {
  const LatticeSpec spec = wghz_spec();
  const TransferTimings t = table_timings(1, 4);
  const ControlSchedule sched =
      build_transfer_schedule(spec, 0, 1, {t.v_tr}, t);

  const ChannelId barrier{ChannelKind::V, 2};
  const ChannelId transfer{ChannelKind::V, 1};
  const ChannelId far_u{ChannelKind::U, 2};

  // barrier at full height strictly before any transfer channel leaves zero
  double first_nonzero = -1.0;
  for (double x = 0.0; x < sched.horizon(); x += 0.01) {
    if (sched.value(transfer, x) > 0.0) {
      first_nonzero = x;
      break;
    }
  }
  REQUIRE(first_nonzero > 0.0);
  CHECK(sched.value(barrier, first_nonzero) == doctest::Approx(t.v_bar));
  CHECK(sched.value(far_u, first_nonzero) == doctest::Approx(t.v_bar));
  // and it returns only after the transfer is back to zero
  double last_nonzero = 0.0;
  for (double x = sched.horizon(); x > 0.0; x -= 0.01) {
    if (sched.value(transfer, x) > 0.0) {
      last_nonzero = x;
      break;
    }
  }
  CHECK(sched.value(barrier, last_nonzero) == doctest::Approx(t.v_bar));

  // all channels vanish at the boundaries of the block
  for (const ChannelId& c : sched.channels()) {
    CHECK(std::abs(sched.value(c, 0.0)) < 1e-12);
    CHECK(std::abs(sched.value(c, sched.horizon())) < 1e-12);
  }

  // time-reversal symmetry of the nested block
  for (const ChannelId& c : sched.channels()) {
    for (double x : {1.0, 10.0, 20.0, 27.0}) {
      CHECK(sched.value(c, x) == doctest::Approx(sched.value(c, sched.horizon() - x)));
    }
  }
}

TEST_CASE("transfer schedule: u channels follow their contiguous domain") {
  const LatticeSpec spec = wghz_spec();
  const TransferTimings t = table_timings(1, 4);
  ControlSchedule sched;
  const double t_end = append_transfer(sched, spec, 0.0, 0, 1, {0.5}, t);
  CHECK(t_end == doctest::Approx(2.0 * t.t_bar + t.t_tr));
  const double mid = t.t_bar + t.t_tr / 2.0;
  CHECK(sched.value(ChannelId{ChannelKind::U, 0}, mid) == doctest::Approx(0.5));
  CHECK(sched.value(ChannelId{ChannelKind::U, 1}, mid) == doctest::Approx(0.5));
  CHECK(sched.value(ChannelId{ChannelKind::V, 1}, mid) == doctest::Approx(0.5));

  CHECK_THROWS_AS(append_transfer(sched, spec, t_end, 1, 1, {0.5}, t),
                  std::invalid_argument);
  CHECK_THROWS_AS(append_transfer(sched, spec, t_end, 0, 2, {0.5}, t),
                  std::invalid_argument);  // height count mismatch
}

TEST_CASE("intermediate stubs stay off in a multidomain transfer") {
  LatticeSpec spec;
  spec.domains = 4;
  spec.domain_length = 4;
  spec.u0 = 0.5;
  spec.u = {0.0, 0.0, 0.0, 0.5};
  spec.v.assign(4, 0.5);
  spec.qudit_sites = {spec.boundary_site(0), spec.boundary_site(4)};
  const TransferTimings t = table_timings(4, 4);
  const ControlSchedule sched = build_transfer_schedule(
      spec, 0, 4, transfer_heights(4, 0.5, 0.38), t);
  const double mid = t.t_tr / 2.0;
  for (int k : {1, 2, 3}) {
    CHECK(sched.value(ChannelId{ChannelKind::U, k}, mid) == 0.0);
  }
  CHECK(sched.value(ChannelId{ChannelKind::V, 1}, mid) == doctest::Approx(0.5));
  CHECK(sched.value(ChannelId{ChannelKind::V, 2}, mid) == doctest::Approx(0.38));
  CHECK(sched.value(ChannelId{ChannelKind::V, 3}, mid) == doctest::Approx(0.38));
  CHECK(sched.value(ChannelId{ChannelKind::V, 4}, mid) == doctest::Approx(0.5));
  // no barriers: every domain participates
  CHECK(sched.horizon() == doctest::Approx(t.t_tr));
}

TEST_CASE("schedule CSV export") {
  ControlSchedule sched;
  sched.add({ChannelId{ChannelKind::G, 0}, 0.0, coupling_pulse(1, 2, 0.5)});
  std::ostringstream os;
  sched.write_csv(os, 0.5);
  const std::string csv = os.str();
  CHECK(csv.rfind("t,g0\n", 0) == 0);
  CHECK(csv.find('\n') != std::string::npos);
}

TEST_CASE("calibration: trivial for <= 2 domains, near 0.38 for four") {
  {
    const Lattice lattice =
        Lattice(end_to_end_spec(1, 4, 0.5)).connected();
    const CalibrationResult r =
        calibrate_interior_heights(lattice, 0.5, table_timings(1, 4), 0.02);
    CHECK(r.heights == std::vector<double>{0.5});
    CHECK(r.probability == doctest::Approx(r.baseline_probability));
  }
  {
    const Lattice lattice =
        Lattice(end_to_end_spec(4, 4, 0.5)).connected();
    const CalibrationResult r =
        calibrate_interior_heights(lattice, 0.5, table_timings(4, 4), 0.02);
    CHECK(r.heights.front() == 0.5);
    CHECK(r.heights.back() == 0.5);
    CHECK(r.heights[1] == doctest::Approx(0.38).epsilon(0.06));
    CHECK(r.heights[1] == r.heights[2]);
    CHECK(r.probability >= r.baseline_probability);
    CHECK(r.probability > 0.99);
    CHECK(r.improved);
  }
}
