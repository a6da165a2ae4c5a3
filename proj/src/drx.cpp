#include "predrx/drx.hpp"

#include <cmath>

namespace predrx {

void DrxConfig::validate() const {
  if (t_inactivity_ms < 1 || t_on_ms < 1 || t_short_cycle_ms < 1 || t_long_cycle_ms < 1)
    throw std::runtime_error("drx: timers must be at least 1 ms");
  if (n_short_cycles < 0) throw std::runtime_error("drx: negative short-cycle count");
  if (t_on_ms > t_short_cycle_ms || t_on_ms > t_long_cycle_ms)
    throw std::runtime_error("drx: on-duration cannot exceed the cycle length");
}

DrxConfig DrxConfig::table_set(int id) {
  switch (id) {
    case 1: return {2, 1, 5, 10, 15};
    case 2: return {2, 1, 10, 1, 50};
    case 3: return {10, 3, 4, 20, 10};
    case 4: return {10, 3, 4, 10, 50};
    default: throw std::runtime_error("drx: unknown DRX set " + std::to_string(id));
  }
}

DrxConfig DrxConfig::always_on() { return {1, 1, 1, 0, 1}; }

void PowerModel::validate() const {
  if (!(rx_mw > active_mw && active_mw > sleep_mw && sleep_mw > 0))
    throw std::runtime_error("power: need rx > active > sleep > 0");
}

std::string to_string(UePhase p) {
  switch (p) {
    case UePhase::Receiving: return "RECEIVING";
    case UePhase::Inactivity: return "INACTIVITY";
    case UePhase::ShortSleep: return "SHORT_SLEEP";
    case UePhase::ShortOn: return "SHORT_ON";
    case UePhase::LongSleep: return "LONG_SLEEP";
    default: return "LONG_ON";
  }
}

bool phase_reachable(UePhase p) {
  return p == UePhase::Receiving || p == UePhase::Inactivity || p == UePhase::ShortOn ||
         p == UePhase::LongOn;
}

bool phase_sleeping(UePhase p) { return p == UePhase::ShortSleep || p == UePhase::LongSleep; }

int transmission_duration_ttis(std::int64_t size_bytes, double rate_bps, int tti_ms) {
  if (rate_bps <= 0) throw std::runtime_error("transmission_duration: rate must be positive");
  if (tti_ms <= 0) throw std::runtime_error("transmission_duration: tti must be positive");
  const double seconds = static_cast<double>(size_bytes) * 8.0 / rate_bps;
  const double ttis = seconds * 1000.0 / tti_ms;
  return std::max(1, static_cast<int>(std::ceil(ttis - 1e-12)));
}

UeDrx::UeDrx(DrxConfig cfg, PowerModel power, bool log_phases)
    : cfg_(cfg), power_(power), log_phases_(log_phases) {
  cfg_.validate();
  power_.validate();
  phase_ = UePhase::Inactivity;
  timer_ = cfg_.t_inactivity_ms;
}

void UeDrx::set_phase(std::uint64_t tti, UePhase to, int timer) {
  if (log_phases_ && to != phase_) phase_log_.push_back({tti, phase_, to});
  phase_ = to;
  timer_ = timer;
}

void UeDrx::enqueue(std::uint64_t tti, std::int64_t size_bytes, int tx_ttis) {
  buffer_.push_back({tti, size_bytes, tx_ttis});
}

void UeDrx::enter_cycles(std::uint64_t tti) {
  short_done_ = 0;
  if (cfg_.n_short_cycles > 0) {
    const int sleep = cfg_.t_short_cycle_ms - cfg_.t_on_ms;
    if (sleep > 0)
      set_phase(tti, UePhase::ShortSleep, sleep);
    else
      set_phase(tti, UePhase::ShortOn, cfg_.t_on_ms);
  } else {
    const int sleep = cfg_.t_long_cycle_ms - cfg_.t_on_ms;
    if (sleep > 0)
      set_phase(tti, UePhase::LongSleep, sleep);
    else
      set_phase(tti, UePhase::LongOn, cfg_.t_on_ms);
  }
}

void UeDrx::advance_cycle(std::uint64_t tti) {
  switch (phase_) {
    case UePhase::ShortSleep:
      set_phase(tti, UePhase::ShortOn, cfg_.t_on_ms);
      break;
    case UePhase::ShortOn: {
      ++short_done_;
      if (short_done_ < cfg_.n_short_cycles) {
        const int sleep = cfg_.t_short_cycle_ms - cfg_.t_on_ms;
        if (sleep > 0)
          set_phase(tti, UePhase::ShortSleep, sleep);
        else
          set_phase(tti, UePhase::ShortOn, cfg_.t_on_ms);
      } else {
        const int sleep = cfg_.t_long_cycle_ms - cfg_.t_on_ms;
        if (sleep > 0)
          set_phase(tti, UePhase::LongSleep, sleep);
        else
          set_phase(tti, UePhase::LongOn, cfg_.t_on_ms);
      }
      break;
    }
    case UePhase::LongSleep:
      set_phase(tti, UePhase::LongOn, cfg_.t_on_ms);
      break;
    case UePhase::LongOn: {
      const int sleep = cfg_.t_long_cycle_ms - cfg_.t_on_ms;
      if (sleep > 0)
        set_phase(tti, UePhase::LongSleep, sleep);
      else
        set_phase(tti, UePhase::LongOn, cfg_.t_on_ms);
      break;
    }
    default:
      throw std::logic_error("drx: advance_cycle outside a cycle phase");
  }
}

void UeDrx::begin_tti(std::uint64_t tti) {
  if (in_tti_) throw std::logic_error("drx: begin_tti called twice in one TTI");
  in_tti_ = true;

  if (phase_ == UePhase::Receiving && rx_remaining_ == 0) {
    deliveries_.push_back({serving_->enq_tti, tti, serving_->size_bytes, serving_->tx_ttis});
    serving_.reset();
    set_phase(tti, UePhase::Inactivity, cfg_.t_inactivity_ms);
    short_done_ = 0;
  }
  if (phase_ == UePhase::Inactivity && timer_ == 0) enter_cycles(tti);
  while (phase_ != UePhase::Receiving && phase_ != UePhase::Inactivity && timer_ == 0)
    advance_cycle(tti);
}

void UeDrx::grant(std::uint64_t tti) {
  if (!in_tti_) throw std::logic_error("drx: grant outside a TTI");
  if (!reachable())
    throw std::runtime_error("drx: grant issued while unreachable (phase " + to_string(phase_) +
                             ")");
  if (serving_) throw std::runtime_error("drx: grant issued while a transmission is in flight");
  if (buffer_.empty()) throw std::runtime_error("drx: grant issued with an empty buffer");
  serving_ = buffer_.front();
  buffer_.pop_front();
  set_phase(tti, UePhase::Receiving, 0);
  rx_remaining_ = serving_->tx_ttis;
}

void UeDrx::end_tti() {
  if (!in_tti_) throw std::logic_error("drx: end_tti without begin_tti");
  in_tti_ = false;
  switch (phase_) {
    case UePhase::Receiving:
      energy_uj_ += power_.rx_mw;
      ++ttis_rx_;
      --rx_remaining_;
      return;
    case UePhase::Inactivity:
    case UePhase::ShortOn:
    case UePhase::LongOn:
      energy_uj_ += power_.active_mw;
      ++ttis_active_;
      break;
    case UePhase::ShortSleep:
    case UePhase::LongSleep:
      energy_uj_ += power_.sleep_mw;
      ++ttis_sleep_;
      break;
  }
  --timer_;
}

void UeDrx::tick(std::uint64_t tti) {
  begin_tti(tti);
  if (grantable()) grant(tti);
  end_tti();
}

void UeDrx::reconfigure(DrxConfig cfg) {
  cfg.validate();
  cfg_ = cfg;
  if (phase_ != UePhase::Receiving) {
    phase_ = UePhase::Inactivity;
    timer_ = cfg_.t_inactivity_ms;
    short_done_ = 0;
  }
}

std::uint64_t UeDrx::head_enqueue_tti() const {
  if (buffer_.empty()) throw std::logic_error("drx: empty buffer has no head");
  return buffer_.front().enq_tti;
}

SingleUeResult run_single_ue(const DrxConfig& cfg, const PowerModel& power,
                             const std::vector<TimedArrival>& arrivals,
                             std::uint64_t duration_ttis, double rate_bps, int tti_ms) {
  UeDrx ue(cfg, power);
  std::size_t next = 0;
  for (std::uint64_t t = 0; t < duration_ttis; ++t) {
    while (next < arrivals.size() && arrivals[next].tti == t) {
      ue.enqueue(t, arrivals[next].size_bytes,
                 transmission_duration_ttis(arrivals[next].size_bytes, rate_bps, tti_ms));
      ++next;
    }
    ue.tick(t);
  }
  SingleUeResult r;
  r.deliveries = ue.deliveries();
  r.energy_uj = ue.energy_uj();
  r.ttis_rx = ue.ttis_rx();
  r.ttis_active = ue.ttis_active();
  r.ttis_sleep = ue.ttis_sleep();
  r.undelivered = ue.buffered();
  return r;
}

}  // namespace predrx
