#include "sssh/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "sssh/rng.hpp"

namespace sssh {

namespace {

constexpr double kZeroTol = 1e-8;

}  // namespace

std::string to_string(const Site& s) {
  return std::to_string(s.cell) + (s.sub == Sublattice::A ? "A" : "B");
}

Site LatticeSpec::boundary_site(int b) const {
  if (b < 0 || b > domains) {
    throw std::invalid_argument("boundary index out of range: " + std::to_string(b));
  }
  if (b == 0) return Site{1, Sublattice::A};
  const int cell = b == domains ? cell_count() : wall_cell(b);
  return Site{cell, b % 2 == 1 ? Sublattice::B : Sublattice::A};
}

void LatticeSpec::validate() const {
  if (domains < 1) throw std::invalid_argument("domain count must be >= 1");
  if (domain_length < 2 || domain_length % 2 != 0) {
    throw std::invalid_argument("domain length must be even and >= 2, got " +
                                std::to_string(domain_length));
  }
  if (w <= 0.0) throw std::invalid_argument("w must be positive");
  if (static_cast<int>(u.size()) != domains) {
    throw std::invalid_argument("u array must have one entry per domain");
  }
  if (static_cast<int>(v.size()) != domains) {
    throw std::invalid_argument("v array must have one entry per domain");
  }
  for (const Site& s : qudit_sites) {
    if (s.cell < 1 || s.cell > cell_count()) {
      throw std::invalid_argument("qudit site " + to_string(s) + " outside lattice");
    }
  }
}

LatticeSpec LatticeSpec::from_json(const nlohmann::json& j) {
  LatticeSpec spec;
  spec.domains = j.at("domains").get<int>();
  spec.domain_length = j.at("domain_length").get<int>();
  spec.w = j.value("w", 1.0);
  spec.u0 = j.value("u0", 0.5);
  auto fill = [&](const char* key, std::vector<double>& out) {
    out.clear();
    if (!j.contains(key)) {
      out.assign(spec.domains, 0.5);
    } else if (j.at(key).is_number()) {
      out.assign(spec.domains, j.at(key).get<double>());
    } else {
      out = j.at(key).get<std::vector<double>>();
    }
  };
  fill("u", spec.u);
  fill("v", spec.v);
  if (j.contains("qudit_sites")) {
    for (const auto& q : j.at("qudit_sites")) {
      Site s;
      s.cell = q.at("cell").get<int>();
      const std::string sub = q.at("sublattice").get<std::string>();
      if (sub != "A" && sub != "B") {
        throw std::invalid_argument("sublattice must be \"A\" or \"B\"");
      }
      s.sub = sub == "A" ? Sublattice::A : Sublattice::B;
      spec.qudit_sites.push_back(s);
    }
  } else if (j.contains("qudit_boundaries")) {
    for (int b : j.at("qudit_boundaries").get<std::vector<int>>()) {
      spec.qudit_sites.push_back(spec.boundary_site(b));
    }
  }
  spec.validate();
  return spec;
}

nlohmann::json LatticeSpec::to_json() const {
  nlohmann::json j;
  j["domains"] = domains;
  j["domain_length"] = domain_length;
  j["w"] = w;
  j["u0"] = u0;
  j["u"] = u;
  j["v"] = v;
  j["qudit_sites"] = nlohmann::json::array();
  for (const Site& s : qudit_sites) {
    j["qudit_sites"].push_back(
        {{"cell", s.cell}, {"sublattice", s.sub == Sublattice::A ? "A" : "B"}});
  }
  return j;
}

Lattice::Lattice(LatticeSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  const int n_cells = spec_.cell_count();
  sites_.reserve(2 * n_cells);
  index_.assign(2 * n_cells, -1);
  for (int c = 1; c <= n_cells; ++c) {
    for (int s = 0; s < 2; ++s) {
      index_[2 * (c - 1) + s] = static_cast<int>(sites_.size());
      sites_.push_back(Site{c, static_cast<Sublattice>(s)});
    }
  }

  auto idx = [&](int cell, Sublattice sub) {
    return index_[2 * (cell - 1) + static_cast<int>(sub)];
  };
  const int half = spec_.domain_length / 2;

  // Canonical link order (also the disorder sampling order): u0 first, then
  // per domain its w links, v links and u link, ascending in k.
  links_.push_back(Link{idx(1, Sublattice::A), idx(1, Sublattice::B),
                        ParamId{ParamKind::U, 0}, spec_.u0});
  for (int k = 1; k <= spec_.domains; ++k) {
    const int base = (k - 1) * half + 1;
    // A and B operator roles swap between odd and even domains.
    const Sublattice lead = k % 2 == 1 ? Sublattice::A : Sublattice::B;
    const Sublattice trail = k % 2 == 1 ? Sublattice::B : Sublattice::A;
    for (int j = 1; j <= half; ++j) {
      links_.push_back(Link{idx(base + j, lead), idx(base + j - 1, trail),
                            ParamId{ParamKind::W, 0}, spec_.w});
    }
    for (int j = 1; j <= half - 1; ++j) {
      links_.push_back(Link{idx(base + j, trail), idx(base + j, lead),
                            ParamId{ParamKind::V, k}, spec_.v[k - 1]});
    }
    links_.push_back(Link{idx(base + half, trail), idx(base + half, lead),
                          ParamId{ParamKind::U, k}, spec_.u[k - 1]});
  }
}

int Lattice::site_index(const Site& s) const {
  if (s.cell < 1 || s.cell > spec_.cell_count()) return -1;
  return index_[2 * (s.cell - 1) + static_cast<int>(s.sub)];
}

Lattice Lattice::connected() const {
  // Flood fill from the left end cavity through nominally nonzero links.
  std::vector<char> keep(sites_.size(), 0);
  std::vector<int> stack{0};
  keep[0] = 1;
  while (!stack.empty()) {
    const int cur = stack.back();
    stack.pop_back();
    for (const Link& l : links_) {
      if (l.nominal == 0.0) continue;
      const int other = l.a == cur ? l.b : l.b == cur ? l.a : -1;
      if (other >= 0 && !keep[other]) {
        keep[other] = 1;
        stack.push_back(other);
      }
    }
  }

  Lattice out;
  out.spec_ = spec_;
  out.index_.assign(index_.size(), -1);
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    if (!keep[i]) continue;
    const Site& s = sites_[i];
    out.index_[2 * (s.cell - 1) + static_cast<int>(s.sub)] =
        static_cast<int>(out.sites_.size());
    out.sites_.push_back(s);
  }
  for (const Link& l : links_) {
    if (!keep[l.a] || !keep[l.b]) continue;
    Link nl = l;
    nl.a = out.site_index(sites_[l.a]);
    nl.b = out.site_index(sites_[l.b]);
    out.links_.push_back(nl);
  }
  return out;
}

Eigen::VectorXd Lattice::chiral_signs() const {
  Eigen::VectorXd g(size());
  for (int i = 0; i < size(); ++i) {
    g(i) = sites_[i].sub == Sublattice::A ? 1.0 : -1.0;
  }
  return g;
}

Eigen::MatrixXd Lattice::static_matrix(
    const std::map<std::string, double>& overrides) const {
  std::map<ParamId, double> vals;
  for (const auto& [key, val] : overrides) {
    ParamId p;
    if (key == "w") {
      p = ParamId{ParamKind::W, 0};
    } else if (key.size() > 1 && (key[0] == 'u' || key[0] == 'v') &&
               key.find_first_not_of("0123456789", 1) == std::string::npos) {
      p.kind = key[0] == 'u' ? ParamKind::U : ParamKind::V;
      p.index = std::stoi(key.substr(1));
      const int lo = p.kind == ParamKind::U ? 0 : 1;
      if (p.index < lo || p.index > spec_.domains) {
        throw std::invalid_argument("override parameter out of range: " + key);
      }
    } else if (key.rfind("eps@", 0) == 0 && key.size() >= 6) {
      const char sub = key.back();
      if (sub != 'A' && sub != 'B') {
        throw std::invalid_argument("bad on-site override key: " + key);
      }
      Site s{std::stoi(key.substr(4, key.size() - 5)),
             sub == 'A' ? Sublattice::A : Sublattice::B};
      const int i = site_index(s);
      if (i < 0) throw std::invalid_argument("on-site override outside lattice: " + key);
      p = ParamId{ParamKind::Eps, i};
    } else {
      throw std::invalid_argument("unknown override key: " + key);
    }
    vals[p] = val;
  }

  return matrix_from([&](const ParamId& p) {
    auto it = vals.find(p);
    if (it != vals.end()) return it->second;
    switch (p.kind) {
      case ParamKind::W:
        return spec_.w;
      case ParamKind::U:
        return p.index == 0 ? spec_.u0 : spec_.u[p.index - 1];
      case ParamKind::V:
        return spec_.v[p.index - 1];
      case ParamKind::Eps:
        return 0.0;
    }
    return 0.0;
  });
}

Eigen::MatrixXd Lattice::dimerized_matrix() const {
  return matrix_from([&](const ParamId& p) {
    return p.kind == ParamKind::W ? spec_.w : 0.0;
  });
}

Eigen::MatrixXd Lattice::dimerized_edge_states() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dimerized_matrix());
  std::vector<int> sel;
  for (int i = 0; i < size(); ++i) {
    if (std::abs(es.eigenvalues()(i)) < kZeroTol) sel.push_back(i);
  }
  Eigen::MatrixXd out(size(), sel.size());
  for (std::size_t c = 0; c < sel.size(); ++c) out.col(c) = es.eigenvectors().col(sel[c]);
  return out;
}

Eigen::MatrixXd Lattice::wall_defect_states() const {
  const double target = std::numbers::sqrt2 * spec_.w;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dimerized_matrix());
  std::vector<int> sel;
  for (int i = 0; i < size(); ++i) {
    if (std::abs(std::abs(es.eigenvalues()(i)) - target) < 1e-6) sel.push_back(i);
  }
  Eigen::MatrixXd out(size(), sel.size());
  for (std::size_t c = 0; c < sel.size(); ++c) out.col(c) = es.eigenvectors().col(sel[c]);
  return out;
}

Eigen::MatrixXd build_static_hamiltonian(
    const LatticeSpec& spec, const std::map<std::string, double>& overrides) {
  return Lattice(spec).static_matrix(overrides);
}

DisorderMode disorder_mode_from_string(const std::string& s) {
  if (s == "od" || s == "offdiagonal" || s == "off_diagonal") {
    return DisorderMode::OffDiagonal;
  }
  if (s == "g" || s == "general") return DisorderMode::General;
  throw std::invalid_argument("unknown disorder mode: " + s);
}

std::string to_string(DisorderMode mode) {
  return mode == DisorderMode::OffDiagonal ? "od" : "g";
}

Eigen::MatrixXd sample_disorder(const Lattice& lattice, const DisorderSpec& d) {
  if (d.sigma < 0.0) throw std::invalid_argument("disorder sigma must be >= 0");
  const int n = lattice.size();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  GaussianStream gauss(mix_seed(d.base_seed, d.realization));
  for (const Link& l : lattice.links()) {
    if (l.nominal == 0.0) continue;
    const double z = d.sigma * gauss.next();
    h(l.a, l.b) += z;
    h(l.b, l.a) += z;
  }
  if (d.mode == DisorderMode::General) {
    for (int i = 0; i < n; ++i) h(i, i) = d.sigma * gauss.next();
  }
  return h;
}

Eigen::VectorXd analytic_edge_state(const Lattice& lattice, EdgeStateKind kind,
                                    int wall, double v_left, double v_right) {
  const LatticeSpec& spec = lattice.spec();
  const double w = spec.w;
  const int half = spec.domain_length / 2;
  auto check = [&](double v) {
    if (v < 0.0 || v >= w) {
      throw std::invalid_argument("edge state not localized: need 0 <= v < w");
    }
  };

  Eigen::VectorXd psi = Eigen::VectorXd::Zero(lattice.size());
  auto put = [&](int cell, Sublattice sub, double amp) {
    const int i = lattice.site_index(Site{cell, sub});
    if (i < 0) throw std::invalid_argument("edge state support outside lattice");
    psi(i) = amp;
  };

  switch (kind) {
    case EdgeStateKind::Left: {
      check(v_left);
      // amp(j) ~ -(-w/v)^(-j) on sublattice A, cells 1..l/2
      for (int j = 1; j <= half; ++j) {
        put(j, Sublattice::A, -std::pow(-v_left / w, j));
        if (v_left == 0.0) break;
      }
      if (v_left == 0.0) put(1, Sublattice::A, 1.0);
      break;
    }
    case EdgeStateKind::Right: {
      check(v_right);
      const int nc = spec.cell_count();
      const Sublattice sub =
          spec.domains % 2 == 1 ? Sublattice::B : Sublattice::A;
      for (int j = nc; j > nc - half; --j) {
        put(j, sub, -std::pow(-v_right / w, nc + 1 - j));
        if (v_right == 0.0) break;
      }
      if (v_right == 0.0) put(nc, sub, 1.0);
      break;
    }
    case EdgeStateKind::Stub: {
      if (wall < 1 || wall >= spec.domains) {
        throw std::invalid_argument("stub state needs an interior wall index");
      }
      if ((v_left > 0.0) == (v_right > 0.0)) {
        throw std::invalid_argument(
            "stub state decays into exactly one side: give one positive v");
      }
      const double v = std::max(v_left, v_right);
      check(v);
      const int dir = v_right > 0.0 ? 1 : -1;
      const int j0 = spec.wall_cell(wall);
      const Sublattice sub = wall % 2 == 1 ? Sublattice::B : Sublattice::A;
      for (int m = 0; m < half; ++m) {
        put(j0 + dir * m, sub, -std::pow(-v / w, m + 1));
      }
      break;
    }
    case EdgeStateKind::WallPair: {
      if (wall < 1 || wall >= spec.domains) {
        throw std::invalid_argument("wall pair state needs an interior wall index");
      }
      check(v_left);
      check(v_right);
      const int j0 = spec.wall_cell(wall);
      const Sublattice sub = wall % 2 == 1 ? Sublattice::B : Sublattice::A;
      for (int j = j0 - half; j <= j0 - 1; ++j) {
        put(j, sub, v_left == 0.0 && j < j0 - 1
                        ? 0.0
                        : std::pow(-v_left / w, j0 - 1 - j));
      }
      for (int j = j0 + 1; j <= j0 + half; ++j) {
        put(j, sub, v_right == 0.0 && j > j0 + 1
                        ? 0.0
                        : -std::pow(-v_right / w, j - j0 - 1));
      }
      break;
    }
  }

  const double n = psi.norm();
  if (n == 0.0) throw std::invalid_argument("edge state has empty support");
  return psi / n;
}

int winding_number(double v, double w, bool even_domain, int k_samples) {
  if (k_samples < 64) throw std::invalid_argument("winding needs k_samples >= 64");
  if (std::abs(v - w) < 1e-9 * std::max(std::abs(v), std::abs(w))) {
    throw std::invalid_argument("winding undefined at the gap closure v = w");
  }
  using cplx = std::complex<double>;
  const double sign = even_domain ? -1.0 : 1.0;
  auto h = [&](double k) {
    return cplx(-v, 0.0) - w * std::exp(cplx(0.0, sign * k));
  };
  double total = 0.0;
  cplx prev = h(0.0);
  for (int i = 1; i <= k_samples; ++i) {
    const cplx cur = h(2.0 * std::numbers::pi * i / k_samples);
    total += std::arg(cur / prev);
    prev = cur;
  }
  return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

SpectrumStatistics spectrum_statistics(const Lattice& lattice, DisorderMode mode,
                                       double sigma, std::uint64_t base_seed,
                                       int n_realizations) {
  if (n_realizations < 2) {
    throw std::invalid_argument("spectrum statistics need >= 2 realizations");
  }
  const int n = lattice.size();
  const Eigen::MatrixXd h0 = lattice.static_matrix();
  const Eigen::MatrixXd edge = lattice.dimerized_edge_states();

  // Welford accumulation per energy rank.
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd m2 = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd pe = Eigen::VectorXd::Zero(n);
  for (int r = 0; r < n_realizations; ++r) {
    const Eigen::MatrixXd h =
        h0 + sample_disorder(lattice, DisorderSpec{mode, sigma, base_seed,
                                                   static_cast<std::uint64_t>(r)});
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    const Eigen::VectorXd delta = es.eigenvalues() - mean;
    mean += delta / (r + 1);
    m2.array() += delta.array() * (es.eigenvalues() - mean).array();
    pe += (edge.transpose() * es.eigenvectors()).cwiseAbs2().colwise().sum();
  }

  SpectrumStatistics out;
  out.realizations = n_realizations;
  out.mean_energy = mean;
  out.sigma_eps = (m2 / (n_realizations - 1)).cwiseMax(0.0).cwiseSqrt();
  out.mean_pe = pe / n_realizations;
  return out;
}

}  // namespace sssh
