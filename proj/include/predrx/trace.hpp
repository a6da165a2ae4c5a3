#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "predrx/config.hpp"

namespace predrx {

enum class Direction { UL, DL };
enum class Protocol { TCP, UDP, OTHER };
enum class AppClass { SURF, VIDEO_CALL, VOICE_CALL, VIDEO_STREAM };

inline constexpr int kNumAppClasses = 4;

std::string to_string(Direction d);
std::string to_string(Protocol p);
std::string to_string(AppClass a);
Direction parse_direction(const std::string& s);
Protocol parse_protocol(const std::string& s);
AppClass parse_app_class(const std::string& s);

// One captured IP packet. Timestamps are seconds from trace start, rounded
// to microseconds so that save/load round-trips the sequence exactly.
struct PacketRecord {
  double timestamp_s = 0.0;
  Direction dir = Direction::DL;
  std::int64_t size_bytes = 0;
  Protocol proto = Protocol::TCP;
  std::optional<AppClass> app;
};

struct Trace {
  std::vector<PacketRecord> records;
  double duration_s = 0.0;
  bool labeled = false;
};

// Per-TTI byte totals map onto labels 1..9: label k covers
// (boundaries[k-1], boundaries[k]], zero falls into label 1 with the first
// bin, and totals above the last boundary clamp to the top label.
struct QuantizationScheme {
  std::vector<std::int64_t> boundaries{0, 50, 100, 500, 1000, 5000, 10000, 50000, 100000};

  int num_labels() const { return static_cast<int>(boundaries.size()); }
  int label(std::int64_t bytes) const;
  void validate() const;
};

struct LoadOptions {
  bool sort_unsorted = false;  // reject out-of-order timestamps unless set
};

Trace load_trace(const std::string& path, const LoadOptions& opts = {});
void save_trace(const Trace& trace, const std::string& path);

// Synthetic per-application traffic. Every class runs the same session
// machinery (ON/OFF alternation, Poisson packet streams per direction,
// per-session size/protocol jitter, optional periodic DL chunk bursts and a
// UDP lookup flurry ahead of each ON burst); the parameters differ per class
// and are mirrored in configs/synth_default.cfg.
struct SynthParams {
  bool always_on = false;
  double on_mean_s = 10.0;
  double off_mean_s = 10.0;
  double lead_s = 0.0;  // lookup flurry this long before each ON start
  int lead_packets = 0;
  double ul_rate_hz = 10.0;
  double dl_rate_hz = 10.0;
  double chunk_period_s = 0.0;  // 0 disables periodic DL bursts
  int chunk_packets = 0;
  // request/ack cycling inside a session: rate multiplier alternates between
  // burst and quiet phases of a fixed period (page loads, chunk acks, talk
  // turns); 0 period disables
  double cycle_period_s = 0.0;
  double cycle_burst_s = 0.0;
  double cycle_burst_mult = 1.0;
  double cycle_quiet_mult = 1.0;
  bool cycle_affects_dl = false;
  double background_rate_hz = 0.1;
  double small_lo = 40, small_hi = 160;
  double large_lo = 700, large_hi = 1460;
  double ul_large_frac = 0.2;
  double dl_large_frac = 0.5;
  double udp_lo = 0.1, udp_hi = 0.3;  // per-session UDP share

  static SynthParams defaults(AppClass app);
  static SynthParams from_config(const Config& cfg, AppClass app);
};

Trace synthesize_trace(AppClass app, double duration_s, std::uint64_t seed);
Trace synthesize_trace(AppClass app, double duration_s, std::uint64_t seed, const SynthParams& params);

// Byte totals per TTI for one direction; length = ceil(duration / tti).
std::vector<std::int64_t> per_tti_bytes(const Trace& trace, int tti_ms, Direction dir);

std::vector<int> quantize_tti_arrivals(const Trace& trace, int tti_ms, const QuantizationScheme& scheme,
                                       Direction dir = Direction::DL);
std::vector<int> quantize_bytes(const std::vector<std::int64_t>& bytes_per_tti,
                                const QuantizationScheme& scheme);

}  // namespace predrx
