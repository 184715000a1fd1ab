#include "coexsim/simulator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <queue>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "coexsim/spectrum.hpp"

namespace coexsim::sim {

ModeTraits SimConfig::effective_traits() const {
  auto t = traits(mode);
  if (preamble_insertion) t.lte.preamble_insertion = *preamble_insertion;
  return t;
}

void SimConfig::validate() const {
  scenario.validate();
  radio.validate();
  dot11p.validate();
  const auto t = effective_traits();
  if (t.has_11p && !(scenario.density_11p_per_km > 0.0))
    throw std::invalid_argument(std::string(to_string(mode)) + " needs a positive 802.11p density");
  if (t.has_lte && !(scenario.density_lte_per_km > 0.0))
    throw std::invalid_argument(std::string(to_string(mode)) + " needs a positive LTE-V2X density");
  if (!(duration_s > 0.0) || warmup_s < 0.0) throw std::invalid_argument("bad run duration");
  if (!(dcc_t_g_s > 0.0)) throw std::invalid_argument("t_g must be positive");
  if (grid.subchannels != 5 || grid.subchannels_per_packet > grid.subchannels)
    throw std::invalid_argument("the LTE grid must have 5 subchannels");
  if (da_range_m > prr_max_range_m) throw std::invalid_argument("DA range beyond evaluation range");
}

ReceptionOutcome reception_decision(double useful_mw,
                                    std::span<const propagation::WeightedInterferer> interferers,
                                    double noise_mw, const propagation::PerCurve& curve,
                                    bool rx_transmitting, std::mt19937_64& rng) {
  if (rx_transmitting) return ReceptionOutcome::half_duplex;
  const double sinr = propagation::mean_sinr_db(useful_mw, interferers, noise_mw);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return u(rng) < curve.success(sinr) ? ReceptionOutcome::decoded : ReceptionOutcome::failed;
}

namespace {

enum class EvKind : std::uint8_t { frame_end, lte_preamble_end, lte_data_end, tti, cbr, cam, mac };

std::uint8_t class_of(EvKind k) {
  switch (k) {
    case EvKind::frame_end:
    case EvKind::lte_preamble_end:
    case EvKind::lte_data_end:
      return 0;
    case EvKind::tti:
      return 1;
    case EvKind::cbr:
      return 2;
    case EvKind::cam:
      return 3;
    case EvKind::mac:
      return 4;
  }
  return 5;
}

struct Event {
  SimTime t{0};
  std::uint8_t cls = 0;
  std::uint32_t station = 0;
  std::uint64_t seq = 0;
  EvKind kind = EvKind::tti;
  std::uint64_t arg = 0;
  std::uint32_t version = 0;
};

struct EventLater {
  bool operator()(const Event& a, const Event& b) const {
    return std::tie(a.t, a.cls, a.station, a.seq) > std::tie(b.t, b.cls, b.station, b.seq);
  }
};

constexpr std::uint32_t kGlobal = 0xffffffffu;

struct Tx {
  std::uint64_t id = 0;
  std::uint32_t station = 0;
  Tech tech = Tech::dot11p;
  SimTime start{0};
  SimTime end{0};
  std::array<SignalSegment, 2> seg{};  // absolute times
  int nseg = 0;
  Band band;  // data band
  double density = 0.0;
  std::vector<float> gain;
  std::vector<float> dist;
  std::uint64_t packet = 0;
  SimTime generated{0};
  std::int64_t tti = 0;
  int subchannel = 0;
};

struct LtePacket {
  std::uint64_t id = 0;
  SimTime generated{0};
  int copies_pending = 0;
  std::vector<std::int8_t> result;  // -1 not evaluated, 0 blocked, 1 failed, 2 decoded
  std::vector<float> dist;
};

struct PendingCopy {
  lte::Resource resource;
  std::uint64_t packet = 0;
  SimTime generated{0};
};

struct Station {
  std::uint32_t id = 0;
  Tech tech = Tech::dot11p;
  std::mt19937_64 mac_rng, rx_rng, shadow_rng;
  CamTriggerState cam;
  std::uint32_t cam_version = 0;
  double extra_interval_s = 0.0;
  bool transmitting = false;

  // 802.11p
  dot11p::CsmaMac mac;
  double energy_mw = 0.0;
  SimTime nav_until{0};
  SimTime lte_nav_until{0};
  dot11p::BusyRatioMeter meter;
  dot11p::DccState dcc;
  std::uint32_t mac_version = 0;
  SimTime mac_deadline = kNever;

  // LTE-V2X
  lte::SpsProcess sps;
  std::unique_ptr<lte::SensingDb> db;
  lte::OccupancyLog occupancy;
  lte::LteCcState cc;
  std::optional<dot11p::QueuedPacket> lte_queue;
  std::optional<PendingCopy> secondary;
  std::array<std::array<double, 5>, 4> srssi{};  // data-symbol S-RSSI per TTI ring
  std::int64_t own_tti = -1;
  std::uint64_t cbr_busy = 0;
  std::uint64_t cbr_total = 0;
};

std::seed_seq make_seq(std::uint64_t seed, std::uint32_t a, std::uint32_t b) {
  return std::seed_seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), a, b};
}

class Engine {
 public:
  Engine(const SimConfig& cfg, std::uint64_t seed);
  MetricsReport run();

 private:
  // event plumbing
  void push(SimTime t, EvKind kind, std::uint32_t station, std::uint64_t arg = 0,
            std::uint32_t version = 0);
  bool measured(SimTime generated) const { return generated >= measure_begin_ && generated < end_; }
  TechMetrics& metrics(Tech t) { return t == Tech::dot11p ? m11p_ : mlte_; }

  // channel
  void update_positions(SimTime now);
  Tx& new_tx(std::uint32_t station, Tech tech, SimTime now);
  Tx* find_tx(std::uint64_t id);
  void prune(SimTime now);
  void add_energy(const Tx& tx, int seg, double sign);
  void deposit_lte_sensing(const Tx& tx);
  void resync_energy(SimTime now);
  void evaluate(Tx& tx, SimTime now);
  void record_da(std::uint32_t tx, std::uint32_t rx, double d, SimTime generated, SimTime now);

  // 802.11p
  bool cca_busy(const Station& s, SimTime now) const;
  void refresh_11p(SimTime now);
  void start_frame(Station& s, SimTime now);
  void on_frame_end(std::uint64_t tx_id, SimTime now);

  // LTE-V2X
  void on_tti(std::int64_t k, SimTime now);
  void lte_opportunity(Station& s, std::int64_t k, SimTime now, std::vector<std::uint64_t>& batch);
  void start_lte(Station& s, std::int64_t k, int subchannel, std::uint64_t packet, SimTime generated,
                 SimTime now, std::vector<std::uint64_t>& batch);
  void reselect(Station& s, std::int64_t k);
  void on_lte_preamble_end(SimTime now);
  void on_lte_data_end(SimTime now);
  void finalize_packet(LtePacket& p, std::uint32_t station);

  // traffic and congestion control
  void schedule_cam(Station& s, SimTime not_before);
  void on_cam(Station& s, SimTime now);
  void on_cbr(SimTime now);
  lte::CcDecision cc_decision(Station& s, SimTime now);

  SimConfig cfg_;
  ModeTraits traits_;
  std::uint64_t seed_;
  Scenario scenario_;
  std::vector<Station> st_;
  std::vector<std::uint32_t> ids_11p_, ids_lte_;
  propagation::ShadowingField shadow_;
  lte::ResourceGrid grid_;
  lte::SpsConfig sps_;
  CamConfig cam_;

  std::priority_queue<Event, std::vector<Event>, EventLater> queue_;
  std::uint64_t seq_ = 0;
  std::uint64_t events_ = 0;
  SimTime measure_begin_{0}, end_{0};

  std::vector<std::unique_ptr<Tx>> active_;
  std::uint64_t next_tx_id_ = 1;
  std::uint64_t next_packet_id_ = 1;
  std::vector<std::uint64_t> lte_batch_;
  std::vector<std::unique_ptr<LtePacket>> lte_packets_;

  std::vector<double> pos_;
  SimTime pos_time_ = kNever;
  std::vector<SimTime> last_good_;  // per directed pair, generation time of last decoded packet

  Band channel_;
  double density_mw_ = 0.0;
  double gains_db_ = 0.0;
  double noise_11p_mw_ = 0.0, noise_lte_mw_ = 0.0;
  double cca_mw_ = 0.0, cbr11p_mw_ = 0.0, cbrlte_mw_ = 0.0, preamble_mw_ = 0.0, preamble_sinr_ = 0.0;

  TechMetrics m11p_, mlte_;
};

Engine::Engine(const SimConfig& cfg, std::uint64_t seed)
    : cfg_(cfg), traits_(cfg.effective_traits()), seed_(seed), shadow_(cfg.shadowing, 1) {
  cfg_.validate();
  auto sc = cfg_.scenario;
  if (!traits_.has_11p) sc.density_11p_per_km = 0.0;
  if (!traits_.has_lte) sc.density_lte_per_km = 0.0;
  auto scenario_seq = make_seq(seed, 0xc0e5u, 0);
  std::mt19937_64 scenario_rng(scenario_seq);
  scenario_ = generate_scenario(sc, scenario_rng);

  const auto n = static_cast<std::uint32_t>(scenario_.vehicles.size());
  shadow_ = propagation::ShadowingField(cfg_.shadowing, n);
  grid_ = cfg_.grid;
  grid_.pool = traits_.lte.pool;
  sps_ = cfg_.sps;
  cam_ = cfg_.cam;
  cam_.periodic = traits_.periodic;
  if (traits_.periodic) sps_.rri_ms = static_cast<int>(std::lround(cam_.periodic_interval_s * 1000.0));

  channel_ = {0.0, cfg_.radio.bandwidth_mhz};
  density_mw_ = dbm_to_mw(cfg_.radio.tx_power_density_dbm_per_mhz);
  gains_db_ = cfg_.radio.antenna_gains_db();
  noise_11p_mw_ = dbm_to_mw(propagation::noise_power_dbm(channel_.width(), cfg_.radio.noise_figure_db));
  noise_lte_mw_ = dbm_to_mw(propagation::noise_power_dbm(
      grid_.band(0, grid_.subchannels_per_packet).width(), cfg_.radio.noise_figure_db));
  cca_mw_ = dbm_to_mw(cfg_.dot11p.cca_energy_threshold_dbm);
  cbr11p_mw_ = dbm_to_mw(cfg_.dot11p.cbr_busy_threshold_dbm);
  cbrlte_mw_ = dbm_to_mw(cfg_.lte_cbr_threshold_dbm);
  preamble_mw_ = dbm_to_mw(cfg_.dot11p.preamble_detect_threshold_dbm);
  preamble_sinr_ = db_to_linear(cfg_.dot11p.preamble_sinr_threshold_db);

  st_.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    auto& s = st_[i];
    s.id = i;
    s.tech = scenario_.vehicles[i].tech;
    auto q1 = make_seq(seed, i + 1, 1);
    auto q2 = make_seq(seed, i + 1, 2);
    auto q3 = make_seq(seed, i + 1, 3);
    s.mac_rng.seed(q1);
    s.rx_rng.seed(q2);
    s.shadow_rng.seed(q3);
    s.mac = dot11p::CsmaMac(cfg_.dot11p);
    s.extra_interval_s = cfg_.dcc_t_g_s;
    s.dcc.interval_s = cfg_.dcc_t_g_s;
    if (s.tech == Tech::dot11p) {
      ids_11p_.push_back(i);
    } else {
      ids_lte_.push_back(i);
      s.db = std::make_unique<lte::SensingDb>(grid_.subchannels, 1000);
      s.cc.variant = traits_.lte.cc_variant;
      s.sps.rri_ms = sps_.rri_ms;
    }
  }
  pos_.assign(n, 0.0);
  last_good_.assign(static_cast<std::size_t>(n) * n, kNever);

  measure_begin_ = from_seconds(cfg_.warmup_s);
  end_ = from_seconds(cfg_.warmup_s + cfg_.duration_s);
  const double measured_s = cfg_.duration_s;
  m11p_ = TechMetrics{Tech::dot11p, ids_11p_.size(), PrrBins(cfg_.prr_bin_m, cfg_.prr_max_range_m),
                      DaHistogram(), 0, 0, 0, 0.0, 0, {}, measured_s};
  mlte_ = TechMetrics{Tech::lte, ids_lte_.size(), PrrBins(cfg_.prr_bin_m, cfg_.prr_max_range_m),
                      DaHistogram(), 0, 0, 0, 0.0, 0, {}, measured_s};
}

void Engine::push(SimTime t, EvKind kind, std::uint32_t station, std::uint64_t arg,
                  std::uint32_t version) {
  queue_.push(Event{t, class_of(kind), station, seq_++, kind, arg, version});
}

MetricsReport Engine::run() {
  for (auto& s : st_) s.meter.reset(SimTime::zero());
  if (!ids_lte_.empty()) {
    for (auto i : ids_lte_) {
      st_[i].db->open(0);
      st_[i].db->open(1);
    }
    push(SimTime::zero(), EvKind::tti, kGlobal, 0);
  }
  push(cfg_.dot11p.cbr_window, EvKind::cbr, kGlobal);
  for (auto& s : st_) {
    std::uniform_real_distribution<double> offset(0.0, cam_.periodic ? cam_.periodic_interval_s
                                                                     : cam_.max_interval_s);
    schedule_cam(s, from_seconds(offset(s.mac_rng)));
  }

  while (!queue_.empty()) {
    const Event ev = queue_.top();
    if (ev.t >= end_) break;
    queue_.pop();
    ++events_;
    const SimTime now = ev.t;
    switch (ev.kind) {
      case EvKind::tti:
        on_tti(static_cast<std::int64_t>(ev.arg), now);
        break;
      case EvKind::lte_preamble_end:
        on_lte_preamble_end(now);
        break;
      case EvKind::lte_data_end:
        on_lte_data_end(now);
        break;
      case EvKind::frame_end:
        on_frame_end(ev.arg, now);
        break;
      case EvKind::cbr:
        on_cbr(now);
        break;
      case EvKind::cam:
        if (ev.version == st_[ev.station].cam_version) on_cam(st_[ev.station], now);
        break;
      case EvKind::mac:
        if (ev.version == st_[ev.station].mac_version) {
          st_[ev.station].mac_deadline = kNever;
          refresh_11p(now);
        }
        break;
    }
  }

  MetricsReport r;
  r.seed = seed_;
  r.events = events_;
  if (traits_.has_11p) r.techs.push_back(std::move(m11p_));
  if (traits_.has_lte) r.techs.push_back(std::move(mlte_));
  return r;
}

// ---------------------------------------------------------------------------
// Channel

void Engine::update_positions(SimTime now) {
  if (pos_time_ == now) return;
  const double t = to_seconds(now);
  for (std::uint32_t i = 0; i < pos_.size(); ++i) pos_[i] = scenario_.position(i, t);
  pos_time_ = now;
}

Tx& Engine::new_tx(std::uint32_t station, Tech tech, SimTime now) {
  update_positions(now);
  auto tx = std::make_unique<Tx>();
  tx->id = next_tx_id_++;
  tx->station = station;
  tx->tech = tech;
  tx->start = now;
  const auto n = st_.size();
  tx->gain.assign(n, 0.0f);
  tx->dist.assign(n, 0.0f);
  const double t = to_seconds(now);
  const auto& vs = scenario_.vehicles;
  const double road = scenario_.config.road_length_m;
  const double v_tx = vs[station].speed();
  auto& rng = st_[station].shadow_rng;
  for (std::uint32_t j = 0; j < n; ++j) {
    if (j == station) continue;
    double dx = std::abs(pos_[j] - pos_[station]);
    if (scenario_.config.wraparound) dx = std::min(dx, road - dx);
    const double dy = vs[j].y_m - vs[station].y_m;
    const double d = std::sqrt(dx * dx + dy * dy);
    const double s = shadow_.sample_at({station, j}, (v_tx + vs[j].speed()) * t, rng);
    tx->dist[j] = static_cast<float>(d);
    tx->gain[j] = static_cast<float>(db_to_linear(gains_db_ - cfg_.path_loss.loss_db(d) - s));
  }
  active_.push_back(std::move(tx));
  return *active_.back();
}

Tx* Engine::find_tx(std::uint64_t id) {
  for (auto& t : active_)
    if (t->id == id) return t.get();
  return nullptr;
}

void Engine::prune(SimTime now) {
  std::erase_if(active_, [now](const std::unique_ptr<Tx>& t) { return t->end + millis(2) < now; });
}

void Engine::add_energy(const Tx& tx, int seg, double sign) {
  const double p = tx.seg[seg].power_in(channel_) * sign;
  for (auto j : ids_11p_) st_[j].energy_mw += p * tx.gain[j];
}

void Engine::resync_energy(SimTime now) {
  for (auto j : ids_11p_) st_[j].energy_mw = 0.0;
  for (const auto& tx : active_) {
    for (int k = 0; k < tx->nseg; ++k) {
      const auto& sg = tx->seg[k];
      if (sg.begin <= now && now < sg.end) add_energy(*tx, k, 1.0);
    }
  }
}

void Engine::deposit_lte_sensing(const Tx& tx) {
  if (ids_lte_.empty()) return;
  const SimTime tti = grid_.tti;
  const std::int64_t k0 = tx.start / tti;
  const std::int64_t k1 = (tx.end - SimTime(1)) / tti;
  for (std::int64_t k = k0; k <= k1; ++k) {
    const SimTime t0 = tti * k;
    const SimTime d0 = t0 + grid_.symbol();
    const SimTime d1 = t0 + grid_.symbol() * 13;
    std::array<double, 5> full{}, data{};
    for (int s = 0; s < grid_.subchannels; ++s) {
      const Band b = grid_.subchannel_band(s);
      for (int q = 0; q < tx.nseg; ++q) {
        const auto& sg = tx.seg[q];
        const double p = sg.density_mw_per_mhz * overlap_mhz(sg.band, b);
        if (p == 0.0) continue;
        full[s] += p * time_overlap(sg.begin, sg.end, t0, t0 + tti) / static_cast<double>(tti.count());
        data[s] += p * time_overlap(sg.begin, sg.end, d0, d1) / static_cast<double>((d1 - d0).count());
      }
    }
    for (auto j : ids_lte_) {
      if (j == tx.station) continue;
      auto& s = st_[j];
      const double g = tx.gain[j];
      auto& acc = s.srssi[static_cast<std::size_t>(k % 4)];
      for (int q = 0; q < grid_.subchannels; ++q) {
        if (full[q] > 0.0) s.db->add_rssi(k, q, g * full[q]);
        acc[q] += g * data[q];
      }
    }
  }
}

void Engine::record_da(std::uint32_t tx, std::uint32_t rx, double d, SimTime generated, SimTime now) {
  auto& last = last_good_[static_cast<std::size_t>(tx) * st_.size() + rx];
  if (d > cfg_.da_range_m) {
    last = kNever;
    return;
  }
  if (last != kNever && now >= measure_begin_) metrics(st_[tx].tech).da.add(to_seconds(now - last));
  last = generated;
}

void Engine::evaluate(Tx& x, SimTime now) {
  struct Overlap {
    const Tx* tx;
    double factor;
  };
  std::vector<Overlap> overlaps;
  std::vector<std::uint32_t> blocked;
  // LTE decodes symbols 1..12; symbol 0 (AGC, where a preamble sits) is not decoded
  const bool is_lte = x.tech == Tech::lte;
  const SimTime w0 = is_lte ? x.start + grid_.symbol() : x.start;
  const SimTime w1 = is_lte ? x.start + grid_.symbol() * 13 : x.end;
  const double dur = static_cast<double>((w1 - w0).count());
  for (const auto& y : active_) {
    if (y.get() == &x || y->end <= x.start || y->start >= x.end) continue;
    double f = 0.0;
    for (int q = 0; q < y->nseg; ++q) {
      const auto& sg = y->seg[q];
      f += time_overlap(sg.begin, sg.end, w0, w1) / dur * sg.density_mw_per_mhz * overlap_mhz(sg.band, x.band);
    }
    blocked.push_back(y->station);
    if (f > 0.0) overlaps.push_back({y.get(), f});
  }

  const auto& receivers = is_lte ? ids_lte_ : ids_11p_;
  const auto& curve = is_lte ? cfg_.per_lte : cfg_.per_11p;
  const double noise = is_lte ? noise_lte_mw_ : noise_11p_mw_;
  const double useful0 = x.density * x.band.width();
  const double rsrp_re = x.density * 0.015;
  LtePacket* pkt = nullptr;
  if (is_lte) {
    for (auto& p : lte_packets_)
      if (p->id == x.packet) pkt = p.get();
  }
  auto& m = metrics(x.tech);
  const bool counted = measured(x.generated);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  for (auto r : receivers) {
    if (r == x.station) continue;
    const double d = x.dist[r];
    if (d > cfg_.prr_max_range_m) {
      record_da(x.station, r, d, x.generated, now);
      continue;
    }
    const bool hd = std::find(blocked.begin(), blocked.end(), r) != blocked.end();
    bool ok = false;
    if (!hd) {
      double interference = 0.0;
      for (const auto& o : overlaps) interference += o.factor * o.tx->gain[r];
      const double useful = useful0 * x.gain[r];
      const double sinr = linear_to_db(useful / (noise + interference));
      ok = u(st_[r].rx_rng) < curve.success(sinr);
    }
    if (!is_lte) {
      if (counted && !hd) m.prr.add(d, ok);
      if (ok) record_da(x.station, r, d, x.generated, now);
      else if (d > cfg_.da_range_m) record_da(x.station, r, d, x.generated, now);
      continue;
    }
    if (!pkt) continue;
    auto& res = pkt->result[r];
    if (res < 0) pkt->dist[r] = static_cast<float>(d);
    const std::int8_t now_res = hd ? 0 : (ok ? 2 : 1);
    if (ok && res != 2) record_da(x.station, r, d, x.generated, now);
    else if (d > cfg_.da_range_m) record_da(x.station, r, d, x.generated, now);
    res = std::max(res, now_res);
    if (ok) {
      st_[r].db->add_reservation({x.tti, x.subchannel, grid_.subchannels_per_packet,
                                  st_[x.station].sps.rri_ms, mw_to_dbm(rsrp_re * x.gain[r]),
                                  x.station});
    }
  }
  if (pkt && --pkt->copies_pending == 0) finalize_packet(*pkt, x.station);
}

void Engine::finalize_packet(LtePacket& p, std::uint32_t) {
  if (measured(p.generated)) {
    for (std::size_t r = 0; r < p.result.size(); ++r) {
      if (p.result[r] <= 0) continue;
      mlte_.prr.add(p.dist[r], p.result[r] == 2);
    }
  }
  const auto id = p.id;
  std::erase_if(lte_packets_, [id](const std::unique_ptr<LtePacket>& q) { return q->id == id; });
}

// ---------------------------------------------------------------------------
// 802.11p

bool Engine::cca_busy(const Station& s, SimTime now) const {
  return s.energy_mw >= cca_mw_ || now < s.nav_until;
}

void Engine::refresh_11p(SimTime now) {
  std::vector<std::uint32_t> starters;
  for (int round = 0; round < 64; ++round) {
    starters.clear();
    for (auto j : ids_11p_) {
      auto& s = st_[j];
      if (s.transmitting) continue;
      const bool cbr_busy = s.energy_mw >= cbr11p_mw_ || now < s.lte_nav_until;
      if (s.meter.busy() != cbr_busy) s.meter.set_busy(now, cbr_busy);
      const auto act = s.mac.step(now, cca_busy(s, now), s.mac_rng);
      if (act == dot11p::Action::start_tx) {
        starters.push_back(j);
        continue;
      }
      const SimTime dl = s.mac.deadline();
      if (dl != s.mac_deadline) {
        s.mac_deadline = dl;
        ++s.mac_version;
        if (dl != kNever) push(dl, EvKind::mac, j, 0, s.mac_version);
      }
    }
    if (starters.empty()) return;
    for (auto j : starters) start_frame(st_[j], now);
  }
  throw std::logic_error("802.11p access did not settle");
}

void Engine::start_frame(Station& s, SimTime now) {
  const auto pkt = *s.mac.in_flight();
  Tx& tx = new_tx(s.id, Tech::dot11p, now);
  const SimTime dur = dot11p::frame_duration(pkt.bytes, cfg_.dot11p);
  tx.end = now + dur;
  tx.band = channel_;
  tx.density = density_mw_;
  tx.seg[0] = {now, tx.end, channel_, density_mw_, true};
  tx.nseg = 1;
  tx.packet = pkt.id;
  tx.generated = pkt.generated;

  s.transmitting = true;
  s.meter.set_busy(now, false);
  s.mac_deadline = kNever;
  ++s.mac_version;
  auto& m = metrics(Tech::dot11p);
  if (measured(pkt.generated)) {
    ++m.packets_sent;
    ++m.transmissions;
  }

  add_energy(tx, 0, 1.0);
  const double p = tx.seg[0].power_in(channel_);
  for (auto j : ids_11p_) {
    auto& r = st_[j];
    if (j == s.id || r.transmitting) continue;
    const double sig = p * tx.gain[j];
    const double interf = std::max(0.0, r.energy_mw - sig);
    if (sig >= preamble_mw_ && sig >= preamble_sinr_ * (interf + noise_11p_mw_))
      r.nav_until = std::max(r.nav_until, tx.end);
  }
  deposit_lte_sensing(tx);
  push(tx.end, EvKind::frame_end, s.id, tx.id);
}

void Engine::on_frame_end(std::uint64_t tx_id, SimTime now) {
  Tx* tx = find_tx(tx_id);
  if (!tx) throw std::logic_error("frame end for an unknown transmission");
  add_energy(*tx, 0, -1.0);
  evaluate(*tx, now);
  auto& s = st_[tx->station];
  s.transmitting = false;
  s.mac.on_tx_end(now, cca_busy(s, now), s.mac_rng);
  refresh_11p(now);
}

// ---------------------------------------------------------------------------
// LTE-V2X

void Engine::on_tti(std::int64_t k, SimTime now) {
  prune(now);
  for (auto j : ids_lte_) {
    auto& s = st_[j];
    if (k >= 1) {
      auto& acc = s.srssi[static_cast<std::size_t>((k - 1) % 4)];
      if (s.own_tti != k - 1) {
        for (double v : acc) s.cbr_busy += v > cbrlte_mw_ ? 1 : 0;
      }
      s.cbr_total += static_cast<std::uint64_t>(grid_.subchannels);
    }
    s.srssi[static_cast<std::size_t>((k + 1) % 4)].fill(0.0);
    s.db->open(k + 1);
    if (k % 100 == 0) s.db->prune(k);
  }

  lte_batch_.clear();
  for (auto j : ids_lte_) {
    auto& s = st_[j];
    const bool primary_now = s.sps.active && s.sps.next.tti == k;
    if (s.secondary && s.secondary->resource.tti == k) {
      const auto copy = *s.secondary;
      s.secondary.reset();
      if (primary_now) {
        // A fresh reservation landed on the retransmission slot; the copy is dropped.
        for (auto& p : lte_packets_)
          if (p->id == copy.packet && --p->copies_pending == 0) {
            finalize_packet(*p, j);
            break;
          }
      } else {
        start_lte(s, k, copy.resource.subchannel, copy.packet, copy.generated, now, lte_batch_);
        continue;
      }
    }
    if (primary_now) lte_opportunity(s, k, now, lte_batch_);
  }

  if (!lte_batch_.empty()) {
    bool any_preamble = false;
    for (auto id : lte_batch_) any_preamble |= find_tx(id)->nseg == 2;
    if (any_preamble) {
      for (auto j : ids_11p_) {
        auto& r = st_[j];
        if (r.transmitting) continue;
        double useful = 0.0;
        for (auto id : lte_batch_) {
          const Tx* tx = find_tx(id);
          if (tx->nseg == 2) useful += tx->seg[0].power_in(channel_) * tx->gain[j];
        }
        const double interf = std::max(0.0, r.energy_mw - useful);
        if (useful >= preamble_mw_ && useful >= preamble_sinr_ * (interf + noise_11p_mw_)) {
          r.nav_until = std::max(r.nav_until, now + grid_.tti);
          r.lte_nav_until = std::max(r.lte_nav_until, now + grid_.tti);
        }
      }
      push(now + cfg_.dot11p.preamble_duration, EvKind::lte_preamble_end, kGlobal);
    }
    push(now + grid_.signal_duration(), EvKind::lte_data_end, kGlobal);
  }
  push(now + grid_.tti, EvKind::tti, kGlobal, static_cast<std::uint64_t>(k + 1));
  refresh_11p(now);
}

void Engine::reselect(Station& s, std::int64_t k) {
  s.sps.next = lte::sps_select(*s.db, grid_, sps_, k, s.mac_rng);
  s.sps.counter = lte::draw_counter(sps_, s.mac_rng);
  s.sps.active = true;
  s.sps.harq_offset.reset();
  if (traits_.lte.harq) {
    if (auto h = lte::harq_resource(s.sps.next, *s.db, grid_, sps_, s.mac_rng)) {
      s.sps.harq_offset = static_cast<int>(h->tti - s.sps.next.tti);
      s.sps.harq_subchannel = h->subchannel;
    }
  }
}

lte::CcDecision Engine::cc_decision(Station& s, SimTime now) {
  return lte::apply_cc(s.cc, s.occupancy.used(now), cfg_.dcc_t_g_s, grid_.subchannels_per_packet,
                       grid_.subchannels * 1000.0);
}

void Engine::lte_opportunity(Station& s, std::int64_t k, SimTime now,
                             std::vector<std::uint64_t>& batch) {
  if (s.lte_queue) {
    const auto pkt = *s.lte_queue;
    s.lte_queue.reset();
    int ntx = traits_.lte.harq ? cc_decision(s, now).ntx : 1;
    if (!s.sps.harq_offset) ntx = 1;
    auto p = std::make_unique<LtePacket>();
    p->id = pkt.id;
    p->generated = pkt.generated;
    p->copies_pending = ntx;
    p->result.assign(st_.size(), -1);
    p->dist.assign(st_.size(), 0.0f);
    lte_packets_.push_back(std::move(p));
    if (measured(pkt.generated)) ++mlte_.packets_sent;
    start_lte(s, k, s.sps.next.subchannel, pkt.id, pkt.generated, now, batch);
    if (ntx == 2)
      s.secondary = PendingCopy{*s.sps.secondary(), pkt.id, pkt.generated};
  }
  if (--s.sps.counter <= 0) {
    if (lte::keep_or_reselect(s.sps, sps_, s.mac_rng) == lte::KeepDecision::keep) {
      s.sps.next.tti += s.sps.rri_ms;
    } else {
      reselect(s, k);
    }
  } else {
    s.sps.next.tti += s.sps.rri_ms;
  }
}

void Engine::start_lte(Station& s, std::int64_t k, int subchannel, std::uint64_t packet,
                       SimTime generated, SimTime now, std::vector<std::uint64_t>& batch) {
  Tx& tx = new_tx(s.id, Tech::lte, now);
  const auto segs = lte::emitted_signal(traits_.lte, grid_, subchannel, density_mw_,
                                        cfg_.dot11p.preamble_duration);
  tx.nseg = static_cast<int>(segs.size());
  for (int q = 0; q < tx.nseg; ++q) {
    tx.seg[q] = segs[q];
    tx.seg[q].begin += now;
    tx.seg[q].end += now;
  }
  tx.end = now + grid_.signal_duration();
  tx.band = grid_.band(subchannel, grid_.subchannels_per_packet);
  tx.density = density_mw_;
  tx.packet = packet;
  tx.generated = generated;
  tx.tti = k;
  tx.subchannel = subchannel;

  s.transmitting = true;
  s.own_tti = k;
  s.db->mark_unsensed(k);
  s.occupancy.record(now, grid_.subchannels_per_packet);
  if (measured(generated)) ++mlte_.transmissions;

  add_energy(tx, 0, 1.0);
  deposit_lte_sensing(tx);
  batch.push_back(tx.id);
}

void Engine::on_lte_preamble_end(SimTime now) {
  for (auto id : lte_batch_) {
    Tx* tx = find_tx(id);
    if (tx->nseg != 2) continue;
    add_energy(*tx, 0, -1.0);
    add_energy(*tx, 1, 1.0);
  }
  refresh_11p(now);
}

void Engine::on_lte_data_end(SimTime now) {
  for (auto id : lte_batch_) {
    Tx* tx = find_tx(id);
    add_energy(*tx, tx->nseg - 1, -1.0);
  }
  for (auto id : lte_batch_) {
    Tx* tx = find_tx(id);
    evaluate(*tx, now);
    st_[tx->station].transmitting = false;
  }
  refresh_11p(now);
}

// ---------------------------------------------------------------------------
// Traffic and congestion control

void Engine::schedule_cam(Station& s, SimTime not_before) {
  const double speed = scenario_.vehicles[s.id].speed();
  const SimTime t = next_cam_time(cam_, s.cam, speed, s.extra_interval_s, not_before);
  ++s.cam_version;
  push(t, EvKind::cam, s.id, 0, s.cam_version);
}

void Engine::on_cam(Station& s, SimTime now) {
  const double speed = scenario_.vehicles[s.id].speed();
  const double odo = speed * to_seconds(now);
  if (s.tech == Tech::lte) {
    const auto cc = cc_decision(s, now);
    s.extra_interval_s = cc.min_interval_s;
    if (!cc.generation_allowed) {
      const double budget = s.cc.cr_limit * grid_.subchannels * 1000.0;
      const SimTime t = s.occupancy.time_until_below(now, std::ceil(budget) - 1.0);
      ++s.cam_version;
      push(std::max(t, now + from_seconds(cam_.check_period_s)), EvKind::cam, s.id, 0, s.cam_version);
      return;
    }
  }
  if (!cam_trigger_check(cam_, s.cam, odo, speed, now, s.extra_interval_s)) {
    schedule_cam(s, now + SimTime(1));
    return;
  }
  const dot11p::QueuedPacket pkt{next_packet_id_++, now, cfg_.payload_bytes};
  if (measured(now)) ++metrics(s.tech).generated;
  s.cam.last_generation = now;
  s.cam.last_odometer_m = odo;
  s.cam.last_speed_mps = speed;
  if (s.tech == Tech::dot11p) {
    s.mac.enqueue(pkt, now, cca_busy(s, now), s.mac_rng);
    schedule_cam(s, now + SimTime(1));
    refresh_11p(now);
    return;
  }
  s.lte_queue = pkt;
  if (!s.sps.active) reselect(s, now / grid_.tti);
  schedule_cam(s, now + SimTime(1));
}

void Engine::on_cbr(SimTime now) {
  const bool in_window = now > measure_begin_;
  double sum11 = 0.0, sumlte = 0.0;
  for (auto j : ids_11p_) {
    auto& s = st_[j];
    const double cbr = s.meter.close_window(now);
    sum11 += cbr;
    const double before = s.dcc.interval_s;
    s.dcc.update(cbr, cfg_.dcc_t_g_s);
    if (s.dcc.interval_s != before) {
      s.extra_interval_s = s.dcc.interval_s;
      schedule_cam(s, now);
    }
  }
  for (auto j : ids_lte_) {
    auto& s = st_[j];
    const double cbr =
        s.cbr_total ? static_cast<double>(s.cbr_busy) / static_cast<double>(s.cbr_total) : 0.0;
    s.cbr_busy = s.cbr_total = 0;
    sumlte += cbr;
    s.cc.cbr_estimate = cbr;
    s.cc.cr_limit = lte::cr_limit(cbr, s.cc.variant);
    s.cc.cr_current = s.occupancy.ratio(now, grid_.subchannels * 1000.0);
    const double before = s.extra_interval_s;
    s.extra_interval_s = cc_decision(s, now).min_interval_s;
    if (s.extra_interval_s != before) schedule_cam(s, now);
  }
  if (in_window) {
    const double t = to_seconds(now);
    if (!ids_11p_.empty()) {
      m11p_.cbr_sum += sum11;
      m11p_.cbr_windows += ids_11p_.size();
      m11p_.cbr_series.push_back({t, sum11 / static_cast<double>(ids_11p_.size())});
    }
    if (!ids_lte_.empty()) {
      mlte_.cbr_sum += sumlte;
      mlte_.cbr_windows += ids_lte_.size();
      mlte_.cbr_series.push_back({t, sumlte / static_cast<double>(ids_lte_.size())});
    }
  }
  resync_energy(now);
  push(now + cfg_.dot11p.cbr_window, EvKind::cbr, kGlobal);
  refresh_11p(now);
}

}  // namespace

MetricsReport run(const SimConfig& config, std::uint64_t seed) {
  Engine engine(config, seed);
  return engine.run();
}

}  // namespace coexsim::sim
