#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <fstream>

#include "predrx/rng.hpp"
#include "predrx/trace.hpp"

using namespace predrx;
namespace fs = std::filesystem;

namespace {

std::string temp_path(const std::string& name) {
  return (fs::temp_directory_path() / ("predrx_test_" + name)).string();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

}  // namespace

TEST_CASE("load_trace parses a small CSV") {
  const std::string path = temp_path("basic.csv");
  write_file(path,
             "timestamp_s,direction,size_bytes,protocol\n"
             "0.000000,UL,100,TCP\n"
             "0.500000,DL,1400,TCP\n");
  const Trace t = load_trace(path);
  REQUIRE(t.records.size() == 2);
  CHECK(t.records[0].dir == Direction::UL);
  CHECK(t.records[1].size_bytes == 1400);
  CHECK(t.duration_s >= 0.5);
  CHECK_FALSE(t.labeled);
  fs::remove(path);
}

TEST_CASE("load_trace accepts a header-only file") {
  const std::string path = temp_path("empty.csv");
  write_file(path, "timestamp_s,direction,size_bytes,protocol\n");
  const Trace t = load_trace(path);
  CHECK(t.records.empty());
  fs::remove(path);
}

TEST_CASE("load_trace rejects a negative size with the line number") {
  const std::string path = temp_path("negsize.csv");
  write_file(path,
             "timestamp_s,direction,size_bytes,protocol\n"
             "0.0,UL,100,TCP\n"
             "0.1,DL,-5,TCP\n");
  CHECK_THROWS_WITH_AS(load_trace(path), doctest::Contains("line 3"), std::runtime_error);
  fs::remove(path);
}

TEST_CASE("load_trace rejects unsorted timestamps unless told to sort") {
  const std::string path = temp_path("unsorted.csv");
  write_file(path,
             "timestamp_s,direction,size_bytes,protocol\n"
             "0.5,UL,100,TCP\n"
             "0.1,DL,200,UDP\n");
  CHECK_THROWS_AS(load_trace(path), std::runtime_error);
  LoadOptions opts;
  opts.sort_unsorted = true;
  const Trace t = load_trace(path, opts);
  CHECK(t.records[0].timestamp_s == doctest::Approx(0.1));
  fs::remove(path);
}

TEST_CASE("load_trace rejects mixed labeled and unlabeled rows") {
  const std::string path = temp_path("mixed.csv");
  write_file(path,
             "timestamp_s,direction,size_bytes,protocol,app_label\n"
             "0.0,UL,100,TCP,SURF\n"
             "0.1,DL,200,UDP,\n");
  CHECK_THROWS_AS(load_trace(path), std::runtime_error);
  fs::remove(path);
}

TEST_CASE("save then load round-trips the record sequence") {
  const Trace t = synthesize_trace(AppClass::SURF, 30.0, 99);
  const std::string path = temp_path("roundtrip.csv");
  save_trace(t, path);
  const Trace back = load_trace(path);
  REQUIRE(back.records.size() == t.records.size());
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    CHECK(back.records[i].timestamp_s == t.records[i].timestamp_s);
    CHECK(back.records[i].dir == t.records[i].dir);
    CHECK(back.records[i].size_bytes == t.records[i].size_bytes);
    CHECK(back.records[i].proto == t.records[i].proto);
    CHECK(back.records[i].app == t.records[i].app);
  }
  fs::remove(path);
}

TEST_CASE("synthesis is deterministic under the seed") {
  const Trace a = synthesize_trace(AppClass::VOICE_CALL, 60.0, 7);
  const Trace b = synthesize_trace(AppClass::VOICE_CALL, 60.0, 7);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].timestamp_s == b.records[i].timestamp_s);
    CHECK(a.records[i].size_bytes == b.records[i].size_bytes);
    CHECK(a.records[i].proto == b.records[i].proto);
  }
  const Trace c = synthesize_trace(AppClass::VOICE_CALL, 60.0, 8);
  CHECK(a.records.size() != c.records.size());
}

TEST_CASE("streaming traffic is downlink heavy, per its configured rates") {
  const SynthParams p = SynthParams::defaults(AppClass::VIDEO_STREAM);
  REQUIRE(p.ul_rate_hz < p.dl_rate_hz);
  const Trace t = synthesize_trace(AppClass::VIDEO_STREAM, 600.0, 1);
  std::size_t ul = 0, dl = 0;
  for (const PacketRecord& r : t.records) (r.dir == Direction::UL ? ul : dl)++;
  CHECK(dl > ul);
}

TEST_CASE("synthesis rejects a non-positive duration") {
  CHECK_THROWS_AS(synthesize_trace(AppClass::SURF, 0.0, 1), std::runtime_error);
}

TEST_CASE("quantizer maps the documented examples") {
  QuantizationScheme q;
  CHECK(q.label(10) == 1);      // the worked example from the quantization rule
  CHECK(q.label(0) == 1);       // silence shares the first bin
  CHECK(q.label(200000) == 9);  // overflow clamps to the top label
  CHECK(q.label(50) == 1);
  CHECK(q.label(51) == 2);
  CHECK(q.label(100000) == 8);
  CHECK(q.label(100001) == 9);
}

TEST_CASE("quantizer is monotone and bin midpoints map back") {
  QuantizationScheme q;
  // monotone over a dense byte sweep
  int prev = 1;
  for (std::int64_t b = 0; b <= 120000; b += 7) {
    const int l = q.label(b);
    CHECK(l >= prev);
    prev = l;
  }
  // representative of every bin maps to its own label
  for (int k = 1; k <= 9; ++k) {
    std::int64_t rep;
    if (k == 1)
      rep = q.boundaries[1] / 2;
    else if (k == 9)
      rep = q.boundaries.back() * 2;
    else
      rep = (q.boundaries[k - 1] + q.boundaries[k]) / 2 + 1;
    CHECK(q.label(rep) == k);
  }
}

TEST_CASE("per-TTI quantization sums DL bytes in each TTI") {
  Trace t;
  t.duration_s = 0.004;
  t.records = {
      {0.0000, Direction::DL, 10, Protocol::TCP, {}},
      {0.0011, Direction::DL, 60, Protocol::TCP, {}},
      {0.0012, Direction::DL, 60, Protocol::TCP, {}},
      {0.0013, Direction::UL, 5000, Protocol::TCP, {}},  // UL ignored
  };
  const std::vector<int> labels = quantize_tti_arrivals(t, 1, QuantizationScheme{});
  REQUIRE(labels.size() == 4);
  CHECK(labels[0] == 1);  // 10 bytes
  CHECK(labels[1] == 3);  // 120 bytes lands in (100, 500]
  CHECK(labels[2] == 1);  // empty
  CHECK(labels[3] == 1);
}

TEST_CASE("quantize_bytes equals a scalar reference over random sizes") {
  QuantizationScheme q;
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    const std::int64_t bytes = rng.uniform_int(0, 150000);
    // reference: count boundaries strictly below, bounded to the label range
    int ref = 1;
    for (int k = 1; k < q.num_labels(); ++k)
      if (bytes > q.boundaries[k]) ref = k + 1;
    CHECK(q.label(bytes) == ref);
  }
}
