#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace predrx {

// Five RRC-Connected DRX parameters, encoded [T_I, T_on, T_sc, N_sc, T_lc].
struct DrxConfig {
  int t_inactivity_ms = 2;
  int t_on_ms = 1;
  int t_short_cycle_ms = 5;
  int n_short_cycles = 10;
  int t_long_cycle_ms = 15;

  void validate() const;
  static DrxConfig table_set(int id);  // predefined sets 1..4
  static DrxConfig always_on();        // degenerate config, never sleeps
};

struct PowerModel {
  double rx_mw = 200.0;
  double active_mw = 100.0;
  double sleep_mw = 10.0;

  void validate() const;
};

enum class UePhase { Receiving, Inactivity, ShortSleep, ShortOn, LongSleep, LongOn };

std::string to_string(UePhase p);
bool phase_reachable(UePhase p);
bool phase_sleeping(UePhase p);

struct BufferedPacket {
  std::uint64_t enq_tti = 0;
  std::int64_t size_bytes = 0;
  int tx_ttis = 1;
};

struct DeliveryEvent {
  std::uint64_t enq_tti = 0;
  std::uint64_t delivery_tti = 0;  // boundary after the last transmission TTI
  std::int64_t size_bytes = 0;
  int tx_ttis = 1;
};

struct PhaseTransition {
  std::uint64_t tti = 0;
  UePhase from = UePhase::Inactivity;
  UePhase to = UePhase::Inactivity;
};

// ceil(size*8 / rate) in TTIs, at least one.
int transmission_duration_ttis(std::int64_t size_bytes, double rate_bps, int tti_ms);

// Per-UE DRX phase machine advanced one TTI at a time. The per-TTI protocol
// is: enqueue(t) for arrivals, begin_tti(t) to settle the phase occupied in
// this TTI (emitting any delivery completed at the boundary), optional
// grant(t) while reachable, then end_tti() to accrue energy and consume the
// timer. tick() composes the four for a dedicated-carrier UE.
class UeDrx {
 public:
  UeDrx(DrxConfig cfg, PowerModel power, bool log_phases = false);

  void enqueue(std::uint64_t tti, std::int64_t size_bytes, int tx_ttis);
  void begin_tti(std::uint64_t tti);
  void grant(std::uint64_t tti);
  void end_tti();

  // greedy dedicated-carrier step: grants whenever reachable with data
  void tick(std::uint64_t tti);

  // switching sets re-enters the inactivity state unless a transmission is
  // in flight
  void reconfigure(DrxConfig cfg);

  bool reachable() const { return phase_reachable(phase_); }
  bool receiving() const { return phase_ == UePhase::Receiving; }
  bool grantable() const { return reachable() && !receiving() && !buffer_.empty(); }
  bool buffer_empty() const { return buffer_.empty(); }
  std::size_t buffered() const { return buffer_.size() + (serving_ ? 1 : 0); }
  std::uint64_t head_enqueue_tti() const;
  UePhase phase() const { return phase_; }
  const DrxConfig& config() const { return cfg_; }

  double energy_uj() const { return energy_uj_; }
  std::uint64_t ttis_rx() const { return ttis_rx_; }
  std::uint64_t ttis_active() const { return ttis_active_; }
  std::uint64_t ttis_sleep() const { return ttis_sleep_; }
  const std::vector<DeliveryEvent>& deliveries() const { return deliveries_; }
  const std::vector<PhaseTransition>& phase_log() const { return phase_log_; }

 private:
  void enter_cycles(std::uint64_t tti);
  void advance_cycle(std::uint64_t tti);
  void set_phase(std::uint64_t tti, UePhase to, int timer);

  DrxConfig cfg_;
  PowerModel power_;
  UePhase phase_ = UePhase::Inactivity;
  int timer_ = 0;         // TTIs left in the current non-receiving phase
  int rx_remaining_ = 0;  // TTIs left of the in-flight transmission
  int short_done_ = 0;
  std::deque<BufferedPacket> buffer_;
  std::optional<BufferedPacket> serving_;
  double energy_uj_ = 0.0;
  std::uint64_t ttis_rx_ = 0, ttis_active_ = 0, ttis_sleep_ = 0;
  std::vector<DeliveryEvent> deliveries_;
  std::vector<PhaseTransition> phase_log_;
  bool log_phases_ = false;
  bool in_tti_ = false;
};

struct SingleUeResult {
  std::vector<DeliveryEvent> deliveries;
  double energy_uj = 0.0;
  std::uint64_t ttis_rx = 0, ttis_active = 0, ttis_sleep = 0;
  std::size_t undelivered = 0;
};

struct TimedArrival {
  std::uint64_t tti = 0;
  std::int64_t size_bytes = 0;
};

// Single UE with a dedicated carrier over [0, duration_ttis); arrivals must
// be sorted by TTI.
SingleUeResult run_single_ue(const DrxConfig& cfg, const PowerModel& power,
                             const std::vector<TimedArrival>& arrivals,
                             std::uint64_t duration_ttis, double rate_bps = 1e6, int tti_ms = 1);

}  // namespace predrx
