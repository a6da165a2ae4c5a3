#include "predrx/sim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "predrx/csv.hpp"

namespace predrx {

void SimConfig::validate() const {
  if (n_ues < 1 || n_carriers < 1) throw std::runtime_error("sim: need at least one UE and carrier");
  if (duration_ttis < 1) throw std::runtime_error("sim: duration must be at least one TTI");
  if (carrier_rate_bps <= 0) throw std::runtime_error("sim: carrier rate must be positive");
  if (tti_ms < 1) throw std::runtime_error("sim: tti must be at least 1 ms");
  power.validate();
}

UePolicy UePolicy::fixed(DrxConfig cfg) {
  UePolicy p;
  p.kind = Kind::Static;
  p.static_cfg = cfg;
  return p;
}

UePolicy UePolicy::adaptive(RegressionNet net, MappingH mapping, QuantizationScheme scheme) {
  UePolicy p;
  p.kind = Kind::Adaptive;
  p.net = std::move(net);
  p.mapping = std::move(mapping);
  p.scheme = std::move(scheme);
  return p;
}

std::vector<double> SimReport::delays_ms() const {
  std::vector<double> d;
  d.reserve(packets.size());
  for (const SimPacket& p : packets) d.push_back(p.delay_ms);
  return d;
}

std::uint64_t SimReport::total_undelivered() const {
  std::uint64_t n = 0;
  for (const UeReport& u : ues) n += u.undelivered;
  return n;
}

ArrivalSchedule dl_arrivals_from_trace(const Trace& trace, int tti_ms) {
  ArrivalSchedule out;
  const double tti_s = tti_ms / 1000.0;
  for (const PacketRecord& r : trace.records) {
    if (r.dir != Direction::DL || r.size_bytes <= 0) continue;
    out.push_back({static_cast<std::uint64_t>(r.timestamp_s / tti_s), r.size_bytes});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const TimedArrival& a, const TimedArrival& b) { return a.tti < b.tti; });
  return out;
}

SimReport run_sim(const SimConfig& cfg, const std::vector<ArrivalSchedule>& arrivals,
                  std::vector<UePolicy> policies, const std::string& scheme_label) {
  cfg.validate();
  if (static_cast<int>(arrivals.size()) != cfg.n_ues ||
      static_cast<int>(policies.size()) != cfg.n_ues)
    throw std::runtime_error("sim: need one arrival schedule and one policy per UE");

  std::vector<UeDrx> ues;
  std::vector<std::unique_ptr<AdaptController>> controllers(cfg.n_ues);
  ues.reserve(cfg.n_ues);
  for (int u = 0; u < cfg.n_ues; ++u) {
    if (policies[u].kind == UePolicy::Kind::Adaptive) {
      controllers[u] = std::make_unique<AdaptController>(policies[u].net, policies[u].mapping,
                                                         policies[u].scheme,
                                                         cfg.decision_epoch_ttis);
      ues.emplace_back(DrxConfig::table_set(controllers[u]->current_set()), cfg.power,
                       cfg.log_phases);
    } else {
      ues.emplace_back(policies[u].static_cfg, cfg.power, cfg.log_phases);
    }
  }

  std::vector<std::size_t> next(cfg.n_ues, 0);
  std::vector<std::int64_t> tti_bytes(cfg.n_ues, 0);
  std::vector<std::uint64_t> arrival_count(cfg.n_ues, 0);

  for (std::uint64_t t = 0; t < cfg.duration_ttis; ++t) {
    // arrivals enqueue first; the BS buffers regardless of the UE phase
    for (int u = 0; u < cfg.n_ues; ++u) {
      tti_bytes[u] = 0;
      auto& sched = arrivals[u];
      while (next[u] < sched.size() && sched[next[u]].tti == t) {
        const std::int64_t size = sched[next[u]].size_bytes;
        ues[u].enqueue(t, size, transmission_duration_ttis(size, cfg.carrier_rate_bps, cfg.tti_ms));
        tti_bytes[u] += size;
        ++arrival_count[u];
        ++next[u];
      }
    }

    // settle phases; completions at this boundary free their carriers
    for (int u = 0; u < cfg.n_ues; ++u) ues[u].begin_tti(t);

    // adaptation epochs apply before scheduling
    for (int u = 0; u < cfg.n_ues; ++u) {
      if (controllers[u] && controllers[u]->decision_due(t)) {
        const int prev = controllers[u]->current_set();
        const int chosen = controllers[u]->decide_now(t);
        if (chosen != prev) ues[u].reconfigure(DrxConfig::table_set(chosen));
      }
    }

    int busy = 0;
    for (int u = 0; u < cfg.n_ues; ++u)
      if (ues[u].receiving()) ++busy;
    if (busy > cfg.n_carriers) throw std::logic_error("sim: carrier capacity exceeded");

    // grant free carriers in head-of-line FIFO order, ties to the lower id
    int free = cfg.n_carriers - busy;
    if (free > 0) {
      std::vector<int> candidates;
      for (int u = 0; u < cfg.n_ues; ++u)
        if (ues[u].grantable()) candidates.push_back(u);
      std::sort(candidates.begin(), candidates.end(), [&](int a, int b) {
        const std::uint64_t ea = ues[a].head_enqueue_tti(), eb = ues[b].head_enqueue_tti();
        if (ea != eb) return ea < eb;
        return a < b;
      });
      for (int u : candidates) {
        if (free == 0) break;
        ues[u].grant(t);
        --free;
      }
      if (free > 0)
        for (int u = 0; u < cfg.n_ues; ++u)
          if (ues[u].grantable()) throw std::logic_error("sim: idle carrier with grantable UE");
    }

    for (int u = 0; u < cfg.n_ues; ++u) {
      ues[u].end_tti();
      if (controllers[u]) controllers[u]->push_tti_bytes(tti_bytes[u]);
    }
  }

  SimReport report;
  report.scheme = scheme_label;
  report.duration_ttis = cfg.duration_ttis;
  report.tti_ms = cfg.tti_ms;
  report.ues.resize(cfg.n_ues);
  report.decisions.resize(cfg.n_ues);
  for (int u = 0; u < cfg.n_ues; ++u) {
    const UeDrx& ue = ues[u];
    UeReport& ur = report.ues[u];
    ur.energy_mj = ue.energy_uj() / 1000.0;
    ur.tti_rx = ue.ttis_rx();
    ur.tti_active = ue.ttis_active();
    ur.tti_sleep = ue.ttis_sleep();
    ur.delivered = ue.deliveries().size();
    ur.undelivered = ue.buffered();
    if (ur.delivered + ur.undelivered != arrival_count[u])
      throw std::logic_error("sim: packet conservation violated");
    for (const DeliveryEvent& ev : ue.deliveries())
      report.packets.push_back({u, ev.enq_tti, ev.delivery_tti,
                                static_cast<double>(ev.delivery_tti - ev.enq_tti) * cfg.tti_ms});
    if (controllers[u]) report.decisions[u] = controllers[u]->log();
  }
  std::sort(report.packets.begin(), report.packets.end(),
            [](const SimPacket& a, const SimPacket& b) {
              if (a.del_tti != b.del_tti) return a.del_tti < b.del_tti;
              if (a.enq_tti != b.enq_tti) return a.enq_tti < b.enq_tti;
              return a.ue < b.ue;
            });
  return report;
}

std::vector<SimReport> compare_schemes(const SimConfig& cfg,
                                       const std::vector<ArrivalSchedule>& arrivals,
                                       std::vector<SchemeSpec> schemes) {
  std::vector<SimReport> reports;
  reports.reserve(schemes.size());
  for (SchemeSpec& s : schemes)
    reports.push_back(run_sim(cfg, arrivals, std::move(s.policies), s.label));
  return reports;
}

void save_packets_csv(const SimReport& report, const std::string& path) {
  csv::Writer w(path);
  w.header({"ue", "enq_tti", "del_tti", "delay_ms"});
  for (const SimPacket& p : report.packets)
    w.row({std::to_string(p.ue), std::to_string(p.enq_tti), std::to_string(p.del_tti),
           csv::fmt(p.delay_ms)});
  w.close();
}

void save_ues_csv(const SimReport& report, const std::string& path) {
  csv::Writer w(path);
  w.header({"ue", "energy_mJ", "tti_rx", "tti_active", "tti_sleep"});
  for (std::size_t u = 0; u < report.ues.size(); ++u) {
    const UeReport& r = report.ues[u];
    w.row({std::to_string(u), csv::fmt(r.energy_mj), std::to_string(r.tti_rx),
           std::to_string(r.tti_active), std::to_string(r.tti_sleep)});
  }
  w.close();
}

void save_decisions_csv(const SimReport& report, const std::string& path) {
  csv::Writer w(path);
  w.header({"tti", "ue", "x_short", "x_long", "set_id"});
  for (std::size_t u = 0; u < report.decisions.size(); ++u)
    for (const DecisionRecord& d : report.decisions[u])
      w.row({std::to_string(d.tti), std::to_string(u), csv::fmt(d.x_short), csv::fmt(d.x_long),
             std::to_string(d.set_id)});
  w.close();
}

std::string report_digest(const SimReport& report) {
  std::ostringstream os;
  os << report.scheme << '|' << report.duration_ttis << '|' << report.tti_ms << '\n';
  for (const SimPacket& p : report.packets)
    os << p.ue << ',' << p.enq_tti << ',' << p.del_tti << ',' << csv::fmt(p.delay_ms, 17) << '\n';
  for (const UeReport& u : report.ues)
    os << csv::fmt(u.energy_mj, 17) << ',' << u.tti_rx << ',' << u.tti_active << ',' << u.tti_sleep
       << ',' << u.delivered << ',' << u.undelivered << '\n';
  for (const auto& log : report.decisions)
    for (const DecisionRecord& d : log)
      os << d.tti << ',' << csv::fmt(d.x_short, 17) << ',' << csv::fmt(d.x_long, 17) << ','
         << d.set_id << '\n';
  return os.str();
}

}  // namespace predrx
