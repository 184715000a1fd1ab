#include "experiment.hpp"

#include <fmt/format.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "svg.hpp"

namespace coexsim::cli {

using nlohmann::json;

namespace {

constexpr double kLegacyThreshold = -65.0;
constexpr double kPreambleThreshold = -98.8;

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{}", v);
}

std::string threshold_name(double t) {
  if (t == kLegacyThreshold) return "legacy";
  if (t == kPreambleThreshold) return "preamble";
  return fmt::format("P*={} dBm", t);
}

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& job) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        job(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string seeds_field(const std::vector<std::uint64_t>& seeds) {
  std::string s;
  for (auto v : seeds) s += (s.empty() ? "" : ";") + std::to_string(v);
  return s;
}

}  // namespace

double Pooled::mean_prr(double up_to_m) const {
  double sum = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < prr.size() && prr.high(i) <= up_to_m + 1e-9; ++i) {
    if (prr.samples(i) == 0) continue;
    sum += prr.prr(i);
    ++n;
  }
  return n ? sum / n : std::nan("");
}

ReportBundle run_experiment(const RunConfig& config, std::ostream* log) {
  config.validate();
  ReportBundle b;
  b.config = config;
  std::mutex log_mutex;
  auto say = [&](const std::string& s) {
    if (!log) return;
    std::lock_guard lock(log_mutex);
    *log << s << std::endl;
  };

  if (config.kind != ExperimentKind::simulation) {
    for (double t : config.thresholds_dbm)
      for (double x : config.sweep) b.analytic.push_back({x, t, 0, {}, {}, {}});
    const auto base_seed = config.seeds.front();
    parallel_for(b.analytic.size(), config.workers, [&](std::size_t i) {
      auto& row = b.analytic[i];
      auto p = config.free_flow;
      p.sense_threshold_dbm = row.threshold_dbm;
      if (config.kind == ExperimentKind::analytic_distance) p.link_distance_m = row.sweep;
      else p.lambda = row.sweep;
      row.mc_seed = splitmix(base_seed ^ splitmix(i));
      row.closed = analytic::prp_closed_form(p);
      row.exact = analytic::prp_exact_numeric(p, config.quadrature);
      row.mc = analytic::prp_monte_carlo(p, config.mc_trials, row.mc_seed, 1);
    });
    say(fmt::format("analytic sweep: {} points", b.analytic.size()));
  } else {
    for (std::size_t c = 0; c < config.cases.size(); ++c)
      for (double d : config.densities)
        for (auto s : config.seeds) b.runs.push_back({c, d, s, {}, 0.0});
    std::atomic<std::size_t> done{0};
    parallel_for(b.runs.size(), config.workers, [&](std::size_t i) {
      auto& run = b.runs[i];
      const auto& k = config.cases[run.case_index];
      auto sc = config.sim;
      sc.mode = k.mode;
      if (k.preamble) sc.preamble_insertion = k.preamble;
      sc.scenario.density_11p_per_km = run.density;
      sc.scenario.density_lte_per_km = run.density;
      const auto t0 = std::chrono::steady_clock::now();
      run.report = sim::run(sc, run.seed);
      run.wall_s = seconds_since(t0);
      say(fmt::format("[{}/{}] {} {} v/km seed {} ({:.1f} s)", ++done, b.runs.size(), k.label, run.density,
                      run.seed, run.wall_s));
    });
  }
  b.checks = evaluate_checks(b);
  return b;
}

std::optional<std::size_t> find_case(const RunConfig& c, const std::string& label) {
  for (std::size_t i = 0; i < c.cases.size(); ++i)
    if (c.cases[i].label == label) return i;
  return std::nullopt;
}

std::optional<Pooled> pooled(const ReportBundle& b, std::size_t case_index, double density, sim::Tech tech) {
  std::optional<Pooled> out;
  double msgs = 0.0, cbr = 0.0;
  std::uint64_t packets = 0, tx = 0;
  for (const auto& r : b.runs) {
    if (r.case_index != case_index || r.density != density) continue;
    const auto* m = r.report.find(tech);
    if (!m) continue;
    if (!out) out = Pooled{m->prr, m->da, 0.0, 0.0, 0.0, 0};
    else {
      out->prr.merge(m->prr);
      out->da.merge(m->da);
    }
    msgs += m->msgs_per_s();
    cbr += m->mean_cbr();
    packets += m->packets_sent;
    tx += m->transmissions;
    ++out->seeds;
  }
  if (out) {
    out->msgs_per_s = msgs / static_cast<double>(out->seeds);
    out->cbr = cbr / static_cast<double>(out->seeds);
    out->ntx = packets ? static_cast<double>(tx) / static_cast<double>(packets) : 0.0;
  }
  return out;
}

std::vector<CheckResult> evaluate_checks(const ReportBundle& b) {
  std::vector<CheckResult> out;
  const auto& c = b.config;
  if (c.kind != ExperimentKind::simulation) {
    double worst = 0.0, worst_delta = 0.0;
    for (const auto& r : b.analytic) {
      worst = std::max(worst, std::abs(r.closed.p_pr - r.mc.p_pr));
      worst_delta = std::max(worst_delta, r.exact.refinement_delta);
    }
    out.push_back({"closed form vs Monte Carlo", worst <= 0.05, fmt::format("max |diff| = {:.4f} (limit 0.05)", worst)});
    out.push_back({"quadrature refinement", worst_delta < 1e-3,
                   fmt::format("max delta = {:.2e} (limit 1e-3)", worst_delta)});
    auto at = [&](double t, double x) -> const AnalyticRow* {
      for (const auto& r : b.analytic)
        if (r.threshold_dbm == t && std::abs(r.sweep - x) < 1e-9) return &r;
      return nullptr;
    };
    bool ordered = true;
    std::size_t compared = 0;
    for (const auto& r : b.analytic) {
      if (r.threshold_dbm != kLegacyThreshold) continue;
      if (const auto* p = at(kPreambleThreshold, r.sweep)) {
        ++compared;
        ordered &= p->closed.p_pr >= r.closed.p_pr;
      }
    }
    if (compared) out.push_back({"preamble PRP >= legacy PRP", ordered, fmt::format("{} points", compared)});
    if (c.kind == ExperimentKind::analytic_distance) {
      const auto *l1 = at(kLegacyThreshold, 100), *p1 = at(kPreambleThreshold, 100);
      const auto *l3 = at(kLegacyThreshold, 300), *p3 = at(kPreambleThreshold, 300);
      if (l1 && p1 && l3 && p3) {
        const double g1 = p1->closed.p_pr - l1->closed.p_pr, g3 = p3->closed.p_pr - l3->closed.p_pr;
        out.push_back({"gap(100 m) > gap(300 m)", g1 > g3, fmt::format("{:.4f} vs {:.4f}", g1, g3)});
      }
    }
    return out;
  }

  using sim::Tech;
  auto point = [&](const std::string& label, double d, Tech t) -> std::optional<Pooled> {
    const auto k = find_case(c, label);
    if (!k) return std::nullopt;
    return pooled(b, *k, d, t);
  };
  auto near = [](double v, double ref, double rel) { return std::abs(v - ref) <= rel * std::abs(ref); };

  for (double d : c.densities) {
    const auto lo = point("only-lte-legacy", d, Tech::lte);
    const auto hi = point("only-lte-preamble", d, Tech::lte);
    if (lo && hi) {
      double worst = 0.0;
      for (std::size_t i = 0; i < lo->prr.size() && lo->prr.high(i) <= 400.0 + 1e-9; ++i)
        if (lo->prr.samples(i) && hi->prr.samples(i))
          worst = std::max(worst, std::abs(lo->prr.prr(i) - hi->prr.prr(i)));
      out.push_back({fmt::format("LTE-only PRR preamble effect @{}", d), worst < 0.02,
                     fmt::format("max |dPRR| up to 400 m = {:.4f} (limit 0.02)", worst)});
    }
    // the mode orderings are stated for the 50+50 v/km point only
    if (d != 50.0) continue;
    for (Tech t : {Tech::dot11p, Tech::lte}) {
      const auto per = point("legacy-periodic", d, t);
      const auto pre = point("preamble", d, t);
      if (per && pre) {
        const auto a = sim::da_ccdf(per->da), p = sim::da_ccdf(pre->da);
        out.push_back({fmt::format("DA@1e-3 periodic > preamble ({}, {})", sim::to_string(t), d),
                       a.quantile_s > p.quantile_s, fmt::format("{:.3f} s vs {:.3f} s", a.quantile_s, p.quantile_s)});
      }
    }
    const auto pre11 = point("preamble", d, Tech::dot11p);
    const auto leg11 = point("legacy", d, Tech::dot11p);
    if (pre11 && leg11) {
      bool ok = true;
      for (std::size_t i = 0; i < pre11->prr.size() && pre11->prr.high(i) <= 300.0 + 1e-9; ++i)
        if (pre11->prr.samples(i) && leg11->prr.samples(i)) ok &= pre11->prr.prr(i) >= leg11->prr.prr(i);
      out.push_back({fmt::format("11p PRR preamble >= legacy up to 300 m @{}", d), ok, ""});
    }
  }

  if (auto p = point("only-11p", 50, Tech::dot11p)) {
    out.push_back({"only-11p 50: msgs/s ~ 4.87", near(p->msgs_per_s, 4.87, 0.15), num(p->msgs_per_s)});
    out.push_back({"only-11p 50: CBR ~ 0.055", near(p->cbr, 0.055, 0.15), num(p->cbr)});
  }
  if (auto p = point("only-lte", 100, Tech::lte)) {
    out.push_back({"only-lte 100: CBR ~ 0.17", near(p->cbr, 0.17, 0.15), num(p->cbr)});
    out.push_back({"only-lte 100: Ntx ~ 2", near(p->ntx, 2.0, 0.02), num(p->ntx)});
  }
  if (auto p = point("legacy", 50, Tech::dot11p))
    out.push_back({"legacy 50+50: 11p CBR ~ 0.192", near(p->cbr, 0.192, 0.15), num(p->cbr)});
  if (auto p = point("preamble", 150, Tech::dot11p))
    out.push_back({"preamble 150+150: 11p msgs/s < 3", p->msgs_per_s < 3.0, num(p->msgs_per_s)});
  for (double d : c.densities)
    if (auto p = point("preamble-noharq", d, Tech::lte))
      out.push_back({fmt::format("preamble-noharq {}: Ntx = 1", d), p->ntx == 1.0, num(p->ntx)});
  if (auto p = point("preamble-modcc", 150, Tech::lte))
    out.push_back({"preamble-modcc 150+150: LTE Ntx ~ 1.02", std::abs(p->ntx - 1.02) <= 0.1, num(p->ntx)});
  if (auto p = point("preamble-modcc", 150, Tech::dot11p))
    out.push_back({"preamble-modcc 150+150: 11p msgs/s > 4.5", p->msgs_per_s > 4.5, num(p->msgs_per_s)});
  return out;
}

std::map<std::string, std::string> csv_payloads(const ReportBundle& b) {
  std::map<std::string, std::string> files;
  const auto& c = b.config;
  if (c.kind != ExperimentKind::simulation) {
    std::string s =
        "sweep_var,prp_closed,prp_exact,prp_mc,mc_halfwidth,p_busy,p_pr_busy,p_sq_idle,p_pr_unpr,"
        "threshold_dbm,exact_refinement_delta,exact_converged,sweep_kind,preset,seed\n";
    const auto kind = c.kind == ExperimentKind::analytic_distance ? "d_u_m" : "lambda_per_m_s";
    for (const auto& r : b.analytic)
      s += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", num(r.sweep), num(r.closed.p_pr),
                       num(r.exact.p_pr), num(r.mc.p_pr), num(r.mc.half_width), num(r.closed.p_busy),
                       num(r.closed.p_pr_given_busy), num(r.closed.p_sq_idle), num(r.closed.p_pr_unprotected),
                       num(r.threshold_dbm), num(r.exact.refinement_delta), r.exact.converged ? 1 : 0, kind,
                       c.preset, c.seeds.front());
    files["analytic.csv"] = std::move(s);
    return files;
  }

  std::string prr = "bin_low_m,bin_high_m,tech,mode,density,seed,prr,n_samples,preset\n";
  std::string da = "da_s,ccdf,tech,mode,density,seed,preset\n";
  std::string cbr = "t_s,cbr,tech,mode,density,seed,preset\n";
  std::string agg = "mode,density,tech,msgs_per_s,cbr,ntx,generated,packets_sent,transmissions,events,seed,preset\n";
  for (const auto& r : b.runs) {
    const auto& mode = c.cases[r.case_index].label;
    for (const auto& m : r.report.techs) {
      const auto tech = sim::to_string(m.tech);
      for (std::size_t i = 0; i < m.prr.size(); ++i)
        prr += fmt::format("{},{},{},{},{},{},{},{},{}\n", num(m.prr.low(i)), num(m.prr.high(i)), tech, mode,
                           num(r.density), r.seed, num(m.prr.prr(i)), m.prr.samples(i), c.preset);
      for (const auto& p : sim::da_ccdf(m.da).points)
        da += fmt::format("{},{},{},{},{},{},{}\n", num(p.da_s), num(p.ccdf), tech, mode, num(r.density), r.seed,
                          c.preset);
      for (const auto& p : m.cbr_series)
        cbr += fmt::format("{},{},{},{},{},{},{}\n", num(p.t_s), num(p.cbr), tech, mode, num(r.density), r.seed,
                           c.preset);
      agg += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", mode, num(r.density), tech, num(m.msgs_per_s()),
                         num(m.mean_cbr()), num(m.ntx()), m.generated, m.packets_sent, m.transmissions,
                         r.report.events, r.seed, c.preset);
    }
  }
  std::string summary =
      "mode,density,tech,msgs_per_s,cbr,ntx,prr_mean_0_300m,da_q001_s,da_reliable,da_samples,seeds,preset\n";
  const auto seeds = seeds_field(c.seeds);
  for (std::size_t k = 0; k < c.cases.size(); ++k)
    for (double d : c.densities)
      for (auto t : {sim::Tech::dot11p, sim::Tech::lte})
        if (const auto p = pooled(b, k, d, t)) {
          const auto q = sim::da_ccdf(p->da);
          summary += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", c.cases[k].label, num(d), sim::to_string(t),
                                 num(p->msgs_per_s), num(p->cbr), num(p->ntx), num(p->mean_prr(300.0)),
                                 num(q.quantile_s), q.reliable ? 1 : 0, q.samples, seeds, c.preset);
        }
  files["prr.csv"] = std::move(prr);
  files["da.csv"] = std::move(da);
  files["cbr.csv"] = std::move(cbr);
  files["aggregates.csv"] = std::move(agg);
  files["summary.csv"] = std::move(summary);
  return files;
}

namespace {

std::map<std::string, std::string> render(const ReportBundle& b, std::ostream* log) {
  std::map<std::string, std::string> out;
  const auto& c = b.config;
  auto warn = [&](const std::string& what) {
    if (log) *log << "warning: " << what << " has no data, plot skipped\n";
  };
  if (c.kind != ExperimentKind::simulation) {
    std::vector<svg::Series> series;
    for (double t : c.thresholds_dbm) {
      svg::Series a{threshold_name(t) + " analytic", {}, {}, false};
      svg::Series m{threshold_name(t) + " MC", {}, {}, true};
      for (const auto& r : b.analytic) {
        if (r.threshold_dbm != t) continue;
        a.x.push_back(r.sweep);
        a.y.push_back(r.closed.p_pr);
        m.x.push_back(r.sweep);
        m.y.push_back(r.mc.p_pr);
      }
      series.push_back(std::move(a));
      series.push_back(std::move(m));
    }
    const bool dist = c.kind == ExperimentKind::analytic_distance;
    svg::PlotSpec spec{dist ? "PRP vs link distance" : "PRP vs LTE-V2X transmission density",
                       dist ? "link distance d_u (m)" : "lambda (transmissions / m / s)", "PRP", false, 0.0, 1.0};
    out["prp.svg"] = svg::line_plot(spec, series);
    return out;
  }

  for (auto t : {sim::Tech::dot11p, sim::Tech::lte}) {
    const std::string tech(sim::to_string(t));
    std::vector<svg::Series> prr, da;
    for (std::size_t k = 0; k < c.cases.size(); ++k)
      for (double d : c.densities) {
        const auto p = pooled(b, k, d, t);
        if (!p) continue;
        const auto name = c.densities.size() > 1 ? fmt::format("{} {}", c.cases[k].label, d) : c.cases[k].label;
        svg::Series s{name, {}, {}, false};
        for (std::size_t i = 0; i < p->prr.size(); ++i) {
          s.x.push_back(0.5 * (p->prr.low(i) + p->prr.high(i)));
          s.y.push_back(p->prr.prr(i));
        }
        prr.push_back(std::move(s));
        svg::Series q{name, {}, {}, false};
        for (const auto& pt : sim::da_ccdf(p->da).points) {
          q.x.push_back(pt.da_s);
          q.y.push_back(pt.ccdf);
        }
        da.push_back(std::move(q));
      }
    if (prr.empty()) {
      warn("PRR " + tech);
      continue;
    }
    out["prr_" + tech + ".svg"] =
        svg::line_plot({"PRR " + tech, "distance (m)", "PRR", false, 0.0, 1.0}, prr);
    out["da_" + tech + ".svg"] =
        svg::line_plot({"Data age ccdf " + tech, "data age (s)", "ccdf", true, 1e-4, 1.0}, da);
    if (c.densities.size() > 1) {
      std::vector<std::string> names;
      for (const auto& k : c.cases) names.push_back(k.label);
      std::vector<svg::BarGroup> prr_groups, da_groups;
      for (double d : c.densities) {
        svg::BarGroup gp{fmt::format("{}+{} v/km", d, d), {}}, gd{gp.label, {}};
        for (std::size_t k = 0; k < c.cases.size(); ++k) {
          const auto p = pooled(b, k, d, t);
          gp.values.push_back(p ? p->mean_prr(300.0) : std::nan(""));
          gd.values.push_back(p ? sim::da_ccdf(p->da).quantile_s : std::nan(""));
        }
        prr_groups.push_back(std::move(gp));
        da_groups.push_back(std::move(gd));
      }
      out["bars_prr_" + tech + ".svg"] =
          svg::bar_plot({"Mean PRR up to 300 m, " + tech, "density", "PRR", false, 0.0, 1.0}, names, prr_groups);
      out["bars_da_" + tech + ".svg"] =
          svg::bar_plot({"Data age at ccdf 1e-3, " + tech, "density", "DA (s)"}, names, da_groups);
    }
  }
  return out;
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
  if (!f) throw std::runtime_error("write failed for " + p.string());
}

}  // namespace

void write_bundle(const ReportBundle& b, const std::filesystem::path& dir, std::ostream* log) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());

  json meta;
  meta["tool"] = "coexsim";
  meta["version"] = kToolVersion;
  meta["generated_at"] = utc_now();
  meta["config"] = to_json(b.config);
  meta["prr_half_duplex_policy"] = "receivers transmitting during the packet are excluded from the denominator";
  json files = json::array();
  for (const auto& [name, text] : csv_payloads(b)) {
    write_file(dir / name, text);
    files.push_back(name);
  }
  if (b.config.render) {
    for (const auto& [name, text] : render(b, log)) {
      write_file(dir / name, text);
      files.push_back(name);
    }
  }
  meta["files"] = files;
  json runs = json::array();
  for (const auto& r : b.runs)
    runs.push_back({{"mode", b.config.cases[r.case_index].label},
                    {"density", r.density},
                    {"seed", r.seed},
                    {"events", r.report.events},
                    {"wall_s", r.wall_s}});
  if (!runs.empty()) meta["runs"] = runs;
  json checks = json::array();
  for (const auto& c : b.checks) checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  meta["checks"] = checks;
  write_file(dir / "metadata.json", meta.dump(2) + "\n");
}

}  // namespace coexsim::cli
