#include "coexsim/analytic_model.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

namespace coexsim::analytic {

namespace {

using propagation::noise_power_dbm;

double sign(double v) { return (v > 0.0) - (v < 0.0); }

struct LinkBudget {
  double useful_mw;
  double noise_mw;
  double gamma;
  double max_interference_mw;  // <= 0 when noise limited
};

LinkBudget budget(const FreeFlowParams& p) {
  LinkBudget b{};
  b.useful_mw = dbm_to_mw(p.dot11p_rx_power_dbm());
  b.noise_mw = dbm_to_mw(p.noise_dbm());
  b.gamma = db_to_linear(p.sinr_threshold_db);
  b.max_interference_mw = b.useful_mw / b.gamma - b.noise_mw;
  return b;
}

// Distance at which a single LTE interferer is received with `power_mw`.
// Returns 0 when even the 1 m power stays below it.
double distance_for_lte_power(const FreeFlowParams& p, double power_mw) {
  if (!(power_mw > 0.0)) return kInf;
  const double loss = p.radio.power_over_dbm(p.lte_bandwidth_mhz) + p.radio.antenna_gains_db() -
                      mw_to_dbm(power_mw);
  if (loss <= p.path_loss.alpha()) return 0.0;
  return p.path_loss.inverse(loss);
}

}  // namespace

void FreeFlowParams::validate() const {
  radio.validate();
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be >= 0");
  if (!(link_distance_m > 0.0)) throw std::invalid_argument("link distance must be positive");
  if (!(t_tti_s > 0.0)) throw std::invalid_argument("t_tti must be positive");
  if (!(t_pck_s > 0.0 && t_pck_s < t_tti_s))
    throw std::invalid_argument("t_pck must lie in (0, t_tti)");
  if (!(lte_bandwidth_mhz > 0.0)) throw std::invalid_argument("LTE bandwidth must be positive");
}

double FreeFlowParams::dot11p_rx_power_dbm() const {
  return radio.total_tx_power_dbm() + radio.antenna_gains_db() - path_loss.loss_db(link_distance_m);
}

double FreeFlowParams::lte_rx_power_dbm(double distance_m) const {
  return radio.power_over_dbm(lte_bandwidth_mhz) + radio.antenna_gains_db() -
         path_loss.loss_db(distance_m);
}

double FreeFlowParams::noise_dbm() const {
  return noise_power_dbm(radio.bandwidth_mhz, radio.noise_figure_db);
}

double protected_range(const FreeFlowParams& p) {
  const double loss =
      p.radio.power_over_dbm(p.lte_bandwidth_mhz) + p.radio.antenna_gains_db() - p.sense_threshold_dbm;
  if (loss < p.path_loss.alpha()) return 0.0;
  return p.path_loss.inverse(loss);
}

double min_interferer_distance(const FreeFlowParams& p) {
  const auto b = budget(p);
  if (b.max_interference_mw <= 0.0) return kInf;
  return std::max(propagation::PathLossModel::kMinDistance,
                  distance_for_lte_power(p, b.max_interference_mw));
}

DerivedQuantities derive(const FreeFlowParams& p) {
  p.validate();
  DerivedQuantities d;
  d.lambda_tti = p.lambda * p.t_tti_s;
  d.n_tti = 1.0 / p.t_tti_s;
  d.protected_range_m = protected_range(p);
  d.min_interferer_distance_m = min_interferer_distance(p);
  d.p_c = (p.t_tti_s - p.t_pck_s) / p.t_tti_s;
  return d;
}

double p_busy(const FreeFlowParams& p) {
  const auto d = derive(p);
  const double l2 = 2.0 * d.lambda_tti;
  const double dx = d.protected_range_m;
  const double du = p.link_distance_m;
  return 0.5 * ((1.0 - std::exp(-l2 * (dx + du))) +
                sign(dx - du) * (1.0 - std::exp(-l2 * std::abs(dx - du))));
}

double p_pr_given_busy(const FreeFlowParams& p) {
  const auto d = derive(p);
  if (std::isinf(d.min_interferer_distance_m)) return 0.0;
  if (d.lambda_tti == 0.0) return 1.0;
  const double pb = p_busy(p);
  if (pb >= 1.0) throw std::domain_error("channel busy with probability 1");
  const double l2 = 2.0 * d.lambda_tti;
  const double di = d.min_interferer_distance_m;
  const double dx = d.protected_range_m;
  const double du = p.link_distance_m;
  const double v = 0.5 / (1.0 - pb) *
                   (std::exp(-l2 * std::max(di, dx - du)) + std::exp(-l2 * std::max(di, dx + du)));
  return std::clamp(v, 0.0, 1.0);
}

double p_pr_unprotected(const FreeFlowParams& p) {
  const auto d = derive(p);
  if (std::isinf(d.min_interferer_distance_m)) return 0.0;
  return std::exp(-2.0 * d.lambda_tti * d.min_interferer_distance_m);
}

PrpBreakdown prp_closed_form(const FreeFlowParams& p) {
  const auto d = derive(p);
  PrpBreakdown b;
  b.p_busy = p_busy(p);
  b.p_c_idle = (1.0 - b.p_busy) * d.p_c;
  b.p_sq_idle = (1.0 - b.p_busy) * (1.0 - d.p_c);
  if (std::isinf(d.min_interferer_distance_m)) return b;
  b.p_pr_given_busy = p_pr_given_busy(p);
  b.p_pr_unprotected = p_pr_unprotected(p);
  b.p_pr = (1.0 - b.p_sq_idle / 2.0) * b.p_pr_given_busy + (b.p_sq_idle / 2.0) * b.p_pr_unprotected;
  return b;
}

// ---------------------------------------------------------------------------
// Exact route

namespace {

class ExactIntegrator {
 public:
  ExactIntegrator(const FreeFlowParams& p, bool fine, const QuadratureSpec& spec)
      : p_(p), fine_(fine), panels_(fine ? 2 * spec.panels : spec.panels) {
    const auto d = derive(p);
    lt_ = d.lambda_tti;
    dx_ = d.protected_range_m;
    di_ = d.min_interferer_distance_m;
    p_c_ = d.p_c;
    b_ = budget(p);
    radius_ = std::log(1.0 / spec.tail_mass) / (2.0 * lt_);
    lo_ = p.link_distance_m - dx_;
    hi_ = p.link_distance_m + dx_;
    p1m_ = dbm_to_mw(p.lte_rx_power_dbm(1.0));
  }

  ExactResult run() {
    ExactResult r;
    r.p_busy = density_mass(std::max(lo_, -radius_), std::min(hi_, radius_));
    r.p_pr_given_busy =
        outside_mass(di_, [this](double a, double b) { return density_mass(a, b); }) /
        (1.0 - r.p_busy);
    auto over_tau = [this](double tau) { return straddle_given_tau(tau); };
    // y0(tau) leaves the 1 m clamp at tau = Imax / P(1 m).
    const double tau_kink = b_.max_interference_mw / p1m_;
    double sq = 0.0;
    if (tau_kink > 0.0 && tau_kink < 1.0)
      sq = integrate(over_tau, 0.0, tau_kink) + integrate(over_tau, tau_kink, 1.0);
    else
      sq = integrate(over_tau, 0.0, 1.0);
    r.p_pr_given_sq = sq / (1.0 - r.p_busy);
    const double idle = 1.0 - r.p_busy;
    r.p_pr = r.p_busy * r.p_pr_given_busy + idle * p_c_ * r.p_pr_given_busy +
             idle * (1.0 - p_c_) * r.p_pr_given_sq;
    return r;
  }

 private:
  template <class F>
  double integrate(F f, double a, double b) const {
    if (!(b > a)) return 0.0;
    using boost::math::quadrature::gauss;
    const double h = (b - a) / panels_;
    double sum = 0.0;
    for (unsigned i = 0; i < panels_; ++i) {
      const double lo = a + i * h;
      const double hi = i + 1 == panels_ ? b : lo + h;
      sum += fine_ ? gauss<double, 30>::integrate(f, lo, hi) : gauss<double, 15>::integrate(f, lo, hi);
    }
    return sum;
  }

  double density(double x) const { return lt_ * std::exp(-2.0 * lt_ * std::abs(x)); }

  // Integral of the nearest-point density over [a, b], split at the cusp.
  double density_mass(double a, double b) const {
    if (!(b > a)) return 0.0;
    auto f = [this](double x) { return density(x); };
    if (a < 0.0 && b > 0.0) return integrate(f, a, 0.0) + integrate(f, 0.0, b);
    return integrate(f, a, b);
  }

  // Nearest-point distribution function; the innermost (x) integral uses it
  // directly since the density is a plain exponential there.
  double cdf(double x) const {
    return x < 0.0 ? 0.5 * std::exp(2.0 * lt_ * x) : 1.0 - 0.5 * std::exp(-2.0 * lt_ * x);
  }
  double cdf_mass(double a, double b) const { return b > a ? cdf(b) - cdf(a) : 0.0; }

  // Mass of {x : |x| >= r, x outside the protected area}, truncated at the radius.
  template <class Mass>
  double outside_mass(double r, Mass mass) const {
    if (r >= radius_) return 0.0;
    double total = 0.0;
    const double pieces[2][2] = {{-radius_, -r}, {r, radius_}};
    for (const auto& piece : pieces) {
      total += mass(piece[0], std::min(piece[1], lo_));
      total += mass(std::max(piece[0], hi_), piece[1]);
    }
    return total;
  }
  double outside_mass(double r) const {
    return outside_mass(r, [this](double a, double b) { return cdf_mass(a, b); });
  }

  double interferer_mw(double r) const { return dbm_to_mw(p_.lte_rx_power_dbm(r)); }

  double straddle_given_tau(double tau) const {
    const double imax = b_.max_interference_mw;
    // The subsequent-TTI interferer must satisfy tau * P(y) < Imax.
    double y0 = 0.0;
    if (tau > 0.0 && imax / tau < p1m_) y0 = distance_for_lte_power(p_, imax / tau);
    if (y0 >= radius_) return 0.0;
    auto f = [this, tau, imax](double y) {
      const double rem = imax - tau * interferer_mw(y);
      if (rem <= 0.0) return 0.0;
      double r = 0.0;
      if (tau < 1.0) {
        const double px = rem / (1.0 - tau);
        r = px >= p1m_ ? 0.0 : distance_for_lte_power(p_, px);
      }
      return density(y) * outside_mass(r);
    };
    // Break the y range where the admissible x set changes shape: r(y) crossing
    // the protected-area edges or the 1 m clamp, and the clamp on y itself.
    std::vector<double> cuts{y0, radius_};
    if (y0 < 1.0) cuts.push_back(1.0);
    if (tau > 0.0) {
      for (double edge : {std::abs(lo_), hi_, 1.0}) {
        const double py = (imax - (1.0 - tau) * interferer_mw(edge)) / tau;
        if (py <= 0.0) continue;
        const double y = py >= p1m_ ? 0.0 : distance_for_lte_power(p_, py);
        if (y > y0 && y < radius_) cuts.push_back(y);
      }
    }
    std::sort(cuts.begin(), cuts.end());
    double v = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) v += integrate(f, cuts[i], cuts[i + 1]);
    return 2.0 * v;
  }

  const FreeFlowParams& p_;
  bool fine_;
  unsigned panels_;
  double lt_ = 0.0, dx_ = 0.0, di_ = 0.0, p_c_ = 0.0;
  LinkBudget b_{};
  double radius_ = 0.0, lo_ = 0.0, hi_ = 0.0, p1m_ = 0.0;
};

}  // namespace

ExactResult prp_exact_numeric(const FreeFlowParams& p, const QuadratureSpec& spec) {
  const auto d = derive(p);
  if (std::isinf(d.min_interferer_distance_m)) {
    ExactResult r;
    r.p_pr = 0.0;
    r.p_busy = p_busy(p);
    return r;
  }
  if (d.lambda_tti == 0.0) {
    ExactResult r;
    r.p_pr = r.p_pr_given_busy = r.p_pr_given_sq = 1.0;
    return r;
  }
  if (spec.panels == 0) throw std::invalid_argument("quadrature needs at least one panel");
  const auto coarse = ExactIntegrator(p, false, spec).run();
  auto fine = ExactIntegrator(p, true, spec).run();
  fine.truncation_radius_m = std::log(1.0 / spec.tail_mass) / (2.0 * d.lambda_tti);
  fine.refinement_delta = std::abs(fine.p_pr - coarse.p_pr);
  fine.converged = fine.refinement_delta < spec.max_refinement_delta && std::isfinite(fine.p_pr);
  return fine;
}

// ---------------------------------------------------------------------------
// Monte Carlo oracle

namespace {

constexpr std::uint64_t kChunkCount = 64;

std::uint64_t run_chunk(const FreeFlowParams& p, const DerivedQuantities& d, const LinkBudget& b,
                        std::uint64_t n, std::uint64_t seed, std::uint64_t chunk) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(chunk)};
  std::mt19937_64 rng(seq);
  std::exponential_distribution<double> nearest(2.0 * d.lambda_tti);
  std::bernoulli_distribution left(0.5);
  std::uniform_real_distribution<double> start(0.0, p.t_tti_s);

  auto draw = [&] {
    const double r = nearest(rng);
    return left(rng) ? -r : r;
  };
  const double du = p.link_distance_m;
  const double dx = d.protected_range_m;
  auto sensed = [&](double x) { return std::abs(x - du) <= dx; };
  auto power = [&](double x) { return dbm_to_mw(p.lte_rx_power_dbm(std::abs(x))); };

  std::uint64_t ok = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    double x = draw();
    double tau = 0.0;
    if (sensed(x)) {
      // Deferred: the packet goes out in the first TTI whose strongest
      // interferer is outside the protected area and fits inside it.
      do x = draw(); while (sensed(x));
    } else {
      const double u = start(rng);
      tau = std::max(0.0, (u + p.t_pck_s - p.t_tti_s) / p.t_pck_s);
    }
    const double y = draw();
    const double interference = (1.0 - tau) * power(x) + (tau > 0.0 ? tau * power(y) : 0.0);
    if (b.useful_mw / (b.noise_mw + interference) >= b.gamma) ++ok;
  }
  return ok;
}

}  // namespace

McResult prp_monte_carlo(const FreeFlowParams& p, std::uint64_t trials, std::uint64_t seed,
                         unsigned workers) {
  if (trials == 0) throw std::invalid_argument("trials must be >= 1");
  const auto d = derive(p);
  const auto b = budget(p);
  McResult res;
  res.trials = trials;
  if (std::isinf(d.min_interferer_distance_m)) return res;
  if (d.lambda_tti == 0.0) {
    res.p_pr = 1.0;
    return res;
  }
  if (p_busy(p) > 1.0 - 1e-9) throw std::domain_error("channel busy with probability 1");

  const std::uint64_t chunks = std::min(trials, kChunkCount);
  std::vector<std::uint64_t> hits(chunks, 0);
  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    for (std::uint64_t c = next++; c < chunks; c = next++) {
      const std::uint64_t n = trials / chunks + (c < trials % chunks ? 1 : 0);
      hits[c] = run_chunk(p, d, b, n, seed, c);
    }
  };
  workers = std::clamp<unsigned>(workers, 1, static_cast<unsigned>(chunks));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::uint64_t ok = 0;
  for (auto h : hits) ok += h;
  const double n = static_cast<double>(trials);
  res.p_pr = static_cast<double>(ok) / n;
  res.half_width = 1.96 * std::sqrt(res.p_pr * (1.0 - res.p_pr) / n);
  return res;
}

}  // namespace coexsim::analytic
