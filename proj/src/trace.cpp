#include "predrx/trace.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "predrx/csv.hpp"
#include "predrx/rng.hpp"

namespace predrx {

std::string to_string(Direction d) { return d == Direction::UL ? "UL" : "DL"; }

std::string to_string(Protocol p) {
  switch (p) {
    case Protocol::TCP: return "TCP";
    case Protocol::UDP: return "UDP";
    default: return "OTHER";
  }
}

std::string to_string(AppClass a) {
  switch (a) {
    case AppClass::SURF: return "SURF";
    case AppClass::VIDEO_CALL: return "VIDEO_CALL";
    case AppClass::VOICE_CALL: return "VOICE_CALL";
    default: return "VIDEO_STREAM";
  }
}

Direction parse_direction(const std::string& s) {
  if (s == "UL") return Direction::UL;
  if (s == "DL") return Direction::DL;
  throw std::runtime_error("trace: unknown direction '" + s + "'");
}

Protocol parse_protocol(const std::string& s) {
  if (s == "TCP") return Protocol::TCP;
  if (s == "UDP") return Protocol::UDP;
  if (s == "OTHER") return Protocol::OTHER;
  throw std::runtime_error("trace: unknown protocol '" + s + "'");
}

AppClass parse_app_class(const std::string& s) {
  if (s == "SURF") return AppClass::SURF;
  if (s == "VIDEO_CALL") return AppClass::VIDEO_CALL;
  if (s == "VOICE_CALL") return AppClass::VOICE_CALL;
  if (s == "VIDEO_STREAM") return AppClass::VIDEO_STREAM;
  throw std::runtime_error("trace: unknown application class '" + s + "'");
}

int QuantizationScheme::label(std::int64_t bytes) const {
  const int n = num_labels();
  for (int k = 1; k < n; ++k)
    if (bytes <= boundaries[k]) return k;
  return n;
}

void QuantizationScheme::validate() const {
  if (boundaries.size() < 2) throw std::runtime_error("quantizer: need at least two boundaries");
  for (std::size_t i = 1; i < boundaries.size(); ++i)
    if (boundaries[i] <= boundaries[i - 1])
      throw std::runtime_error("quantizer: boundaries must be strictly increasing");
}

Trace load_trace(const std::string& path, const LoadOptions& opts) {
  csv::Table t = csv::read_file(path);
  if (t.header.size() < 4 || t.header[0] != "timestamp_s" || t.header[1] != "direction" ||
      t.header[2] != "size_bytes" || t.header[3] != "protocol")
    throw std::runtime_error("trace: " + path + ": expected header timestamp_s,direction,size_bytes,protocol[,app_label]");
  const bool has_label_col = t.header.size() >= 5 && t.header[4] == "app_label";

  Trace trace;
  trace.records.reserve(t.rows.size());
  std::size_t labeled_rows = 0;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const int line = t.row_lines[i];
    if (row.size() < 4 || row.size() > 5)
      throw std::runtime_error("trace: line " + std::to_string(line) + ": expected 4 or 5 fields");
    PacketRecord rec;
    rec.timestamp_s = csv::parse_double(row[0], "timestamp", line);
    if (rec.timestamp_s < 0)
      throw std::runtime_error("trace: line " + std::to_string(line) + ": negative timestamp");
    try {
      rec.dir = parse_direction(row[1]);
      rec.proto = parse_protocol(row[3]);
    } catch (const std::exception& e) {
      throw std::runtime_error("trace: line " + std::to_string(line) + ": " + e.what());
    }
    rec.size_bytes = csv::parse_int(row[2], "size", line);
    if (rec.size_bytes < 0)
      throw std::runtime_error("trace: line " + std::to_string(line) + ": negative size");
    if (row.size() == 5 && !row[4].empty()) {
      if (!has_label_col)
        throw std::runtime_error("trace: line " + std::to_string(line) + ": label value without app_label column");
      try {
        rec.app = parse_app_class(row[4]);
      } catch (const std::exception& e) {
        throw std::runtime_error("trace: line " + std::to_string(line) + ": " + e.what());
      }
      ++labeled_rows;
    }
    trace.records.push_back(rec);
  }

  bool sorted = std::is_sorted(trace.records.begin(), trace.records.end(),
                               [](const PacketRecord& a, const PacketRecord& b) {
                                 return a.timestamp_s < b.timestamp_s;
                               });
  if (!sorted) {
    if (!opts.sort_unsorted)
      throw std::runtime_error("trace: " + path + ": timestamps out of order (pass sort option to accept)");
    std::stable_sort(trace.records.begin(), trace.records.end(),
                     [](const PacketRecord& a, const PacketRecord& b) {
                       return a.timestamp_s < b.timestamp_s;
                     });
  }

  if (labeled_rows != 0 && labeled_rows != trace.records.size())
    throw std::runtime_error("trace: " + path + ": mixed labeled and unlabeled records");
  trace.labeled = labeled_rows > 0 && labeled_rows == trace.records.size();
  trace.duration_s = trace.records.empty() ? 0.0 : trace.records.back().timestamp_s;
  return trace;
}

void save_trace(const Trace& trace, const std::string& path) {
  csv::Writer w(path);
  if (trace.labeled)
    w.header({"timestamp_s", "direction", "size_bytes", "protocol", "app_label"});
  else
    w.header({"timestamp_s", "direction", "size_bytes", "protocol"});
  for (const PacketRecord& r : trace.records) {
    std::vector<std::string> row{csv::fmt_fixed(r.timestamp_s, 6), to_string(r.dir),
                                 std::to_string(r.size_bytes), to_string(r.proto)};
    if (trace.labeled) row.push_back(r.app ? to_string(*r.app) : "");
    w.row(row);
  }
  w.close();
}

SynthParams SynthParams::defaults(AppClass app) {
  SynthParams p;
  switch (app) {
    case AppClass::SURF:
      p.always_on = false;
      p.on_mean_s = 25.0;
      p.off_mean_s = 10.0;
      p.lead_s = 2.0;
      p.lead_packets = 6;
      p.ul_rate_hz = 18.0;
      p.dl_rate_hz = 45.0;
      p.chunk_period_s = 0.0;
      p.chunk_packets = 0;
      p.cycle_period_s = 7.0;  // page-load cadence
      p.cycle_burst_s = 1.5;
      p.cycle_burst_mult = 4.0;
      p.cycle_quiet_mult = 0.15;
      p.cycle_affects_dl = true;
      p.background_rate_hz = 0.2;
      p.ul_large_frac = 0.15;
      p.dl_large_frac = 0.55;
      p.udp_lo = 0.05;
      p.udp_hi = 0.55;
      break;
    case AppClass::VIDEO_CALL:
      p.always_on = true;
      p.ul_rate_hz = 85.0;
      p.dl_rate_hz = 90.0;
      p.ul_large_frac = 0.45;
      p.dl_large_frac = 0.5;
      p.udp_lo = 0.1;
      p.udp_hi = 0.95;
      break;
    case AppClass::VOICE_CALL:
      p.always_on = true;
      p.ul_rate_hz = 48.0;
      p.dl_rate_hz = 48.0;
      p.cycle_period_s = 6.0;  // talk turns
      p.cycle_burst_s = 2.5;
      p.cycle_burst_mult = 1.8;
      p.cycle_quiet_mult = 0.4;
      p.cycle_affects_dl = false;
      p.ul_large_frac = 0.1;
      p.dl_large_frac = 0.1;
      p.udp_lo = 0.1;
      p.udp_hi = 0.95;
      break;
    case AppClass::VIDEO_STREAM:
      p.always_on = false;
      p.on_mean_s = 20.0;
      p.off_mean_s = 8.0;
      p.lead_s = 2.0;
      p.lead_packets = 5;
      p.ul_rate_hz = 22.0;
      p.dl_rate_hz = 60.0;
      p.chunk_period_s = 4.0;
      p.chunk_packets = 35;
      p.cycle_period_s = 4.0;  // ack surges after each chunk
      p.cycle_burst_s = 1.2;
      p.cycle_burst_mult = 3.5;
      p.cycle_quiet_mult = 0.4;
      p.cycle_affects_dl = false;
      p.background_rate_hz = 0.2;
      p.ul_large_frac = 0.1;
      p.dl_large_frac = 0.7;
      p.udp_lo = 0.05;
      p.udp_hi = 0.55;
      break;
  }
  return p;
}

SynthParams SynthParams::from_config(const Config& cfg, AppClass app) {
  SynthParams p = defaults(app);
  const std::string k = to_string(app) + ".";
  p.always_on = cfg.flag(k + "always_on", p.always_on);
  p.on_mean_s = cfg.num(k + "on_mean_s", p.on_mean_s);
  p.off_mean_s = cfg.num(k + "off_mean_s", p.off_mean_s);
  p.lead_s = cfg.num(k + "lead_s", p.lead_s);
  p.lead_packets = static_cast<int>(cfg.integer(k + "lead_packets", p.lead_packets));
  p.ul_rate_hz = cfg.num(k + "ul_rate_hz", p.ul_rate_hz);
  p.dl_rate_hz = cfg.num(k + "dl_rate_hz", p.dl_rate_hz);
  p.chunk_period_s = cfg.num(k + "chunk_period_s", p.chunk_period_s);
  p.chunk_packets = static_cast<int>(cfg.integer(k + "chunk_packets", p.chunk_packets));
  p.cycle_period_s = cfg.num(k + "cycle_period_s", p.cycle_period_s);
  p.cycle_burst_s = cfg.num(k + "cycle_burst_s", p.cycle_burst_s);
  p.cycle_burst_mult = cfg.num(k + "cycle_burst_mult", p.cycle_burst_mult);
  p.cycle_quiet_mult = cfg.num(k + "cycle_quiet_mult", p.cycle_quiet_mult);
  p.cycle_affects_dl = cfg.flag(k + "cycle_affects_dl", p.cycle_affects_dl);
  p.background_rate_hz = cfg.num(k + "background_rate_hz", p.background_rate_hz);
  p.small_lo = cfg.num(k + "small_lo", p.small_lo);
  p.small_hi = cfg.num(k + "small_hi", p.small_hi);
  p.large_lo = cfg.num(k + "large_lo", p.large_lo);
  p.large_hi = cfg.num(k + "large_hi", p.large_hi);
  p.ul_large_frac = cfg.num(k + "ul_large_frac", p.ul_large_frac);
  p.dl_large_frac = cfg.num(k + "dl_large_frac", p.dl_large_frac);
  p.udp_lo = cfg.num(k + "udp_lo", p.udp_lo);
  p.udp_hi = cfg.num(k + "udp_hi", p.udp_hi);
  return p;
}

namespace {

double quantize_us(double t) { return std::round(t * 1e6) / 1e6; }

struct SessionDraw {
  double size_scale;
  double udp_share;
};

void emit_packet(std::vector<PacketRecord>& out, double t, Direction dir, bool large,
                 const SynthParams& p, const SessionDraw& s, Rng& rng, AppClass app) {
  PacketRecord rec;
  rec.timestamp_s = quantize_us(t);
  rec.dir = dir;
  double lo = large ? p.large_lo : p.small_lo;
  double hi = large ? p.large_hi : p.small_hi;
  rec.size_bytes = std::max<std::int64_t>(1, static_cast<std::int64_t>(rng.uniform(lo, hi) * s.size_scale));
  rec.proto = rng.bernoulli(s.udp_share) ? Protocol::UDP : Protocol::TCP;
  rec.app = app;
  out.push_back(rec);
}

void emit_stream(std::vector<PacketRecord>& out, double start, double end, double rate_hz,
                 Direction dir, double large_frac, const SynthParams& p, const SessionDraw& s,
                 Rng& rng, AppClass app) {
  if (rate_hz <= 0) return;
  double t = start + rng.exponential(1.0 / rate_hz);
  while (t < end) {
    emit_packet(out, t, dir, rng.bernoulli(large_frac), p, s, rng, app);
    t += rng.exponential(1.0 / rate_hz);
  }
}

// Poisson stream whose rate alternates between burst and quiet phases of the
// session's cycle, phase-locked to the session start.
void emit_stream_cycled(std::vector<PacketRecord>& out, double start, double end, double rate_hz,
                        Direction dir, double large_frac, const SynthParams& p,
                        const SessionDraw& s, Rng& rng, AppClass app) {
  if (rate_hz <= 0) return;
  double seg = start;
  while (seg < end) {
    const double phase = std::fmod(seg - start, p.cycle_period_s);
    const bool burst = phase < p.cycle_burst_s;
    const double seg_end =
        std::min(end, seg + (burst ? p.cycle_burst_s - phase : p.cycle_period_s - phase));
    const double rate = rate_hz * (burst ? p.cycle_burst_mult : p.cycle_quiet_mult);
    emit_stream(out, seg, seg_end, rate, dir, large_frac, p, s, rng, app);
    seg = seg_end;
  }
}

void emit_session(std::vector<PacketRecord>& out, double start, double end, const SynthParams& p,
                  Rng& rng, AppClass app) {
  SessionDraw s;
  s.size_scale = rng.uniform(0.7, 1.3);
  s.udp_share = rng.uniform(p.udp_lo, p.udp_hi);
  const bool cycled = p.cycle_period_s > 0 && p.cycle_burst_s > 0;
  if (cycled)
    emit_stream_cycled(out, start, end, p.ul_rate_hz, Direction::UL, p.ul_large_frac, p, s, rng,
                       app);
  else
    emit_stream(out, start, end, p.ul_rate_hz, Direction::UL, p.ul_large_frac, p, s, rng, app);
  if (cycled && p.cycle_affects_dl)
    emit_stream_cycled(out, start, end, p.dl_rate_hz, Direction::DL, p.dl_large_frac, p, s, rng,
                       app);
  else
    emit_stream(out, start, end, p.dl_rate_hz, Direction::DL, p.dl_large_frac, p, s, rng, app);
  if (p.chunk_period_s > 0 && p.chunk_packets > 0) {
    for (double c = start + p.chunk_period_s; c < end; c += p.chunk_period_s) {
      double t = c;
      for (int i = 0; i < p.chunk_packets && t < end; ++i) {
        emit_packet(out, t, Direction::DL, true, p, s, rng, app);
        t += rng.uniform(0.002, 0.008);
      }
    }
  }
}

// Lookup flurry: always UDP so it stays a usable temporal lead indicator
// regardless of the session's transport draw.
void emit_lead(std::vector<PacketRecord>& out, double on_start, const SynthParams& p, Rng& rng,
               AppClass app) {
  if (p.lead_s <= 0 || p.lead_packets <= 0) return;
  double base = on_start - p.lead_s;
  if (base < 0) return;
  for (int i = 0; i < p.lead_packets; ++i) {
    PacketRecord rec;
    rec.timestamp_s = quantize_us(base + rng.uniform(0.0, 0.3));
    rec.dir = (i % 2 == 0) ? Direction::UL : Direction::DL;
    rec.size_bytes = static_cast<std::int64_t>(rng.uniform(60, 140));
    rec.proto = Protocol::UDP;
    rec.app = app;
    out.push_back(rec);
  }
}

}  // namespace

Trace synthesize_trace(AppClass app, double duration_s, std::uint64_t seed) {
  return synthesize_trace(app, duration_s, seed, SynthParams::defaults(app));
}

Trace synthesize_trace(AppClass app, double duration_s, std::uint64_t seed, const SynthParams& p) {
  if (duration_s <= 0) throw std::runtime_error("synthesize_trace: duration must be positive");
  Rng rng(seed);
  std::vector<PacketRecord> records;

  if (p.always_on) {
    emit_session(records, 0.0, duration_s, p, rng, app);
  } else {
    double t = 0.0;
    bool first = true;
    while (t < duration_s) {
      double off = rng.exponential(p.off_mean_s);
      double on = std::max(0.5, rng.exponential(p.on_mean_s));
      double on_start = t + off;
      if (on_start >= duration_s) {
        emit_stream(records, t, duration_s, p.background_rate_hz, Direction::DL, 0.1, p,
                    {1.0, 0.2}, rng, app);
        break;
      }
      double on_end = std::min(on_start + on, duration_s);
      emit_stream(records, t, on_start, p.background_rate_hz, Direction::DL, 0.1, p, {1.0, 0.2},
                  rng, app);
      if (!first || on_start >= p.lead_s) emit_lead(records, on_start, p, rng, app);
      emit_session(records, on_start, on_end, p, rng, app);
      t = on_end;
      first = false;
    }
  }

  std::stable_sort(records.begin(), records.end(),
                   [](const PacketRecord& a, const PacketRecord& b) {
                     return a.timestamp_s < b.timestamp_s;
                   });
  Trace trace;
  trace.records = std::move(records);
  trace.duration_s = duration_s;
  trace.labeled = true;
  return trace;
}

std::vector<std::int64_t> per_tti_bytes(const Trace& trace, int tti_ms, Direction dir) {
  if (tti_ms <= 0) throw std::runtime_error("per_tti_bytes: tti must be positive");
  const double tti_s = tti_ms / 1000.0;
  const std::size_t n = static_cast<std::size_t>(std::ceil(trace.duration_s / tti_s));
  std::vector<std::int64_t> bytes(n, 0);
  if (n == 0) return bytes;
  for (const PacketRecord& r : trace.records) {
    if (r.dir != dir) continue;
    auto idx = static_cast<std::size_t>(r.timestamp_s / tti_s);
    if (idx >= n) idx = n - 1;
    bytes[idx] += r.size_bytes;
  }
  return bytes;
}

std::vector<int> quantize_bytes(const std::vector<std::int64_t>& bytes_per_tti,
                                const QuantizationScheme& scheme) {
  scheme.validate();
  std::vector<int> labels(bytes_per_tti.size());
  for (std::size_t i = 0; i < bytes_per_tti.size(); ++i) labels[i] = scheme.label(bytes_per_tti[i]);
  return labels;
}

std::vector<int> quantize_tti_arrivals(const Trace& trace, int tti_ms,
                                       const QuantizationScheme& scheme, Direction dir) {
  return quantize_bytes(per_tti_bytes(trace, tti_ms, dir), scheme);
}

}  // namespace predrx
