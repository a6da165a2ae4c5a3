#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "predrx/adapt.hpp"
#include "predrx/drx.hpp"
#include "predrx/trace.hpp"

namespace predrx {

struct SimConfig {
  int n_ues = 10;
  int n_carriers = 5;
  double carrier_rate_bps = 1e6;
  int tti_ms = 1;
  std::uint64_t duration_ttis = 600000;  // 10 minutes at 1 ms
  PowerModel power;
  std::uint64_t decision_epoch_ttis = 1000;
  bool log_phases = false;

  void validate() const;
};

// Per-UE policy: a fixed DRX set, or the adaptation loop seeded with a
// trained prediction net and a mapping.
struct UePolicy {
  enum class Kind { Static, Adaptive };
  Kind kind = Kind::Static;
  DrxConfig static_cfg = DrxConfig::table_set(2);
  RegressionNet net;            // adaptive only
  MappingH mapping;             // adaptive only
  QuantizationScheme scheme;    // adaptive only

  static UePolicy fixed(DrxConfig cfg);
  static UePolicy adaptive(RegressionNet net, MappingH mapping, QuantizationScheme scheme = {});
};

struct SimPacket {
  int ue = 0;
  std::uint64_t enq_tti = 0;
  std::uint64_t del_tti = 0;
  double delay_ms = 0.0;
};

struct UeReport {
  double energy_mj = 0.0;
  std::uint64_t tti_rx = 0, tti_active = 0, tti_sleep = 0;
  std::uint64_t delivered = 0, undelivered = 0;
};

struct SimReport {
  std::string scheme;
  std::uint64_t duration_ttis = 0;
  int tti_ms = 1;
  std::vector<SimPacket> packets;  // delivered only; undelivered counted per UE
  std::vector<UeReport> ues;
  std::vector<std::vector<DecisionRecord>> decisions;  // per UE, adaptive only

  std::vector<double> delays_ms() const;
  std::uint64_t total_undelivered() const;
  double duration_s() const { return duration_ttis * tti_ms / 1000.0; }
};

using ArrivalSchedule = std::vector<TimedArrival>;

// DL packets of a trace mapped onto TTIs (one sim packet per trace packet).
ArrivalSchedule dl_arrivals_from_trace(const Trace& trace, int tti_ms);

SimReport run_sim(const SimConfig& cfg, const std::vector<ArrivalSchedule>& arrivals,
                  std::vector<UePolicy> policies, const std::string& scheme_label);

struct SchemeSpec {
  std::string label;
  std::vector<UePolicy> policies;
};

// Paired comparison: every scheme replays the same arrivals.
std::vector<SimReport> compare_schemes(const SimConfig& cfg,
                                       const std::vector<ArrivalSchedule>& arrivals,
                                       std::vector<SchemeSpec> schemes);

void save_packets_csv(const SimReport& report, const std::string& path);
void save_ues_csv(const SimReport& report, const std::string& path);
void save_decisions_csv(const SimReport& report, const std::string& path);
std::string report_digest(const SimReport& report);  // canonical serialization

}  // namespace predrx
