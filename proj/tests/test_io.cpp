#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "eyeid/error.hpp"
#include "eyeid/io.hpp"
#include "oracles.hpp"

using namespace eyeid;
namespace fs = std::filesystem;

TEST_CASE("numbers round-trip through text") {
  oracle::Gen g(41);
  for (int i = 0; i < 1000; ++i) {
    const double v = g.normal() * std::pow(10.0, g.uniform(-10, 10));
    CHECK(std::stod(format_number(v)) == v);
  }
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(250) == "250");
}

TEST_CASE("key-value parsing") {
  std::istringstream in("a = 1  # note\n\n[recording]\nfile = x.csv\n[recording]\nfile=y.csv\n");
  const auto s = parse_key_value(in);
  REQUIRE(s.size() == 3);
  CHECK(s[0].name.empty());
  CHECK(s[0].get("a") == "1");
  CHECK_FALSE(s[0].get("b").has_value());
  CHECK(s[1].name == "recording");
  CHECK(s[2].get("file") == "y.csv");
  CHECK(s[2].line == 5);

  std::istringstream dup("a = 1\na = 2\n");
  CHECK_THROWS_AS(parse_key_value(dup), DataError);
  std::istringstream junk("just words\n");
  CHECK_THROWS_AS(parse_key_value(junk), DataError);
}

TEST_CASE("recording CSV") {
  GazeRecording r;
  r.samples = {{0.0, 1.5, -2.25, true}, {0.004, NAN, NAN, false}, {0.008, 3.0, 4.0, true}};
  std::stringstream ss;
  write_recording_csv(r, ss);
  CHECK(ss.str() == "t_s,x,y,valid\n0,1.5,-2.25,1\n0.004,,,0\n0.008,3,4,1\n");
  const auto back = read_recording_csv(ss);
  REQUIRE(back.size() == 3);
  CHECK(back[0].x == 1.5);
  CHECK(std::isnan(back[1].x));
  CHECK_FALSE(back[1].valid);

  auto fails_at = [](const std::string& text, const std::string& where) {
    std::istringstream in(text);
    try {
      read_recording_csv(in);
    } catch (const DataError& e) {
      return std::string(e.what()).find(where) != std::string::npos;
    }
    return false;
  };
  CHECK(fails_at("", "line 1"));
  CHECK(fails_at("t,x,y,valid\n", "line 1"));
  CHECK(fails_at("t_s,x,y,valid\n0,1,2,1\n0.004,abc,2,1\n", "line 3"));
  CHECK(fails_at("t_s,x,y,valid\n0,1,2\n", "line 2"));
  CHECK(fails_at("t_s,x,y,valid\n0,1,2,yes\n", "line 2"));
}

TEST_CASE("manifest round trip and dataset loading") {
  const fs::path dir = fs::temp_directory_path() / "eyeid_test_io";
  fs::remove_all(dir);
  fs::create_directories(dir);
  DatasetManifest m;
  m.sample_rate_hz = 100;
  m.space = CoordinateSpace::kPixels;
  m.entries.push_back({"a.csv", "p1", "s1", "F", 31.0});
  m.entries.push_back({"b.csv", "p2", "s1", std::nullopt, std::nullopt});
  {
    std::ofstream f(dir / "manifest.ini");
    write_manifest(m, f);
    std::ofstream a(dir / "a.csv");
    a << "t_s,x,y,valid\n0,840,525,1\n0.01,841,525,1\n";
    std::ofstream b(dir / "b.csv");
    b << "t_s,x,y,valid\n0,840,525,1\n0.5,841,525,1\n";
  }
  const auto back = read_manifest(dir / "manifest.ini");
  CHECK(back.sample_rate_hz == 100);
  CHECK(back.space == CoordinateSpace::kPixels);
  CHECK(back.geometry.width_px == 1680);
  REQUIRE(back.entries.size() == 2);
  CHECK(back.entries[0].gender == "F");
  CHECK(back.entries[0].age == 31.0);
  CHECK_FALSE(back.entries[1].gender.has_value());

  const auto rec = load_recording(back, back.entries[0]);
  CHECK(rec.participant_id == "p1");
  CHECK(rec.size() == 2);
  // Timestamps inconsistent with the declared rate.
  CHECK_THROWS(load_recording(back, back.entries[1]));

  std::ofstream(dir / "bad.ini") << "sample_rate_hz = 100\ncolour = blue\n";
  CHECK_THROWS_AS(read_manifest(dir / "bad.ini"), DataError);
  std::ofstream(dir / "empty.ini") << "sample_rate_hz = 100\n";
  CHECK_THROWS_AS(read_manifest(dir / "empty.ini"), DataError);
  CHECK_THROWS_AS(read_manifest(dir / "missing.ini"), DataError);
  fs::remove_all(dir);
}

TEST_CASE("table writers") {
  std::ostringstream seg;
  Segment s;
  s.kind = SegmentKind::kSaccade;
  s.start_index = 3;
  s.end_index = 9;
  s.duration_s = 0.028;
  write_segment_dump({s}, seg);
  CHECK(seg.str() == "kind,start_index,end_index,duration_s\nsaccade,3,9,0.028\n");

  std::ostringstream sw;
  write_sweep_csv({{27, 0.096, 1200, 0.5, 0.01}}, sw);
  CHECK(sw.str() ==
        "vt_deg_s,mfd_s,fixation_count,accuracy_mean,accuracy_sem\n27,0.096,1200,0.5,0.01\n");

  std::ostringstream fm;
  const auto schema = FeatureSchema::for_order(0);
  write_feature_matrix({{std::vector<double>(14, 1.0), SegmentKind::kFixation, "u01"}}, schema, fm);
  std::string header;
  std::istringstream fin(fm.str());
  std::getline(fin, header);
  CHECK(header.rfind("participant_id,segment_kind,duration,", 0) == 0);
  CHECK(std::count(header.begin(), header.end(), ',') == 15);
}
