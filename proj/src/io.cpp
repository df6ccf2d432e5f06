#include "eyeid/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "eyeid/error.hpp"

namespace eyeid {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  if (!s.empty() && *b == '+') ++b;
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e) {
    throw DataError(what + ": cannot parse number '" + s + "'");
  }
  return v;
}

bool parse_bool(const std::string& s, const std::string& what) {
  if (s == "1" || s == "true" || s == "yes") return true;
  if (s == "0" || s == "false" || s == "no") return false;
  throw DataError(what + ": expected a boolean, got '" + s + "'");
}

CoordinateSpace parse_space(const std::string& s) {
  if (s == "degrees") return CoordinateSpace::kDegrees;
  if (s == "pixels") return CoordinateSpace::kPixels;
  throw DataError("coordinate_space must be 'degrees' or 'pixels', got '" + s + "'");
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::optional<std::string> KeyValueSection::get(const std::string& key) const {
  if (auto it = values.find(key); it != values.end()) return it->second;
  return std::nullopt;
}

std::vector<KeyValueSection> parse_key_value(std::istream& in) {
  std::vector<KeyValueSection> sections(1);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw DataError("line " + std::to_string(line_no) + ": bad section header");
      KeyValueSection s;
      s.name = trim(line.substr(1, line.size() - 2));
      s.line = line_no;
      sections.push_back(std::move(s));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DataError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw DataError("line " + std::to_string(line_no) + ": empty key");
    if (!sections.back().values.emplace(key, trim(line.substr(eq + 1))).second) {
      throw DataError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
  }
  return sections;
}

std::vector<GazeSample> read_recording_csv(std::istream& in) {
  std::string line;
  int line_no = 1;
  if (!std::getline(in, line)) throw DataError("line 1: empty recording file");
  const auto header = split_csv(line);
  if (header != std::vector<std::string>{"t_s", "x", "y", "valid"}) {
    throw DataError("line 1: header must be 't_s,x,y,valid'");
  }
  std::vector<GazeSample> samples;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_csv(line);
    const std::string where = "line " + std::to_string(line_no);
    if (f.size() != 4) throw DataError(where + ": expected 4 fields");
    GazeSample s;
    s.t = parse_double(f[0], where);
    s.x = f[1].empty() ? std::numeric_limits<double>::quiet_NaN() : parse_double(f[1], where);
    s.y = f[2].empty() ? std::numeric_limits<double>::quiet_NaN() : parse_double(f[2], where);
    if (f[3] != "0" && f[3] != "1") throw DataError(where + ": valid must be 0 or 1");
    s.valid = f[3] == "1";
    samples.push_back(s);
  }
  return samples;
}

void write_recording_csv(const GazeRecording& rec, std::ostream& out) {
  out << "t_s,x,y,valid\n";
  for (const auto& s : rec.samples) {
    out << format_number(s.t) << ',';
    if (std::isfinite(s.x)) out << format_number(s.x);
    out << ',';
    if (std::isfinite(s.y)) out << format_number(s.y);
    out << ',' << (s.valid ? 1 : 0) << '\n';
  }
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path.string());
  DatasetManifest m;
  m.base_dir = path.parent_path();
  const auto sections = parse_key_value(in);
  const auto& g = sections.front();
  for (const auto& [key, value] : g.values) {
    const std::string what = path.string() + ": " + key;
    if (key == "coordinate_space") m.space = parse_space(value);
    else if (key == "sample_rate_hz") m.sample_rate_hz = parse_double(value, what);
    else if (key == "distance_mm") m.geometry.distance_mm = parse_double(value, what);
    else if (key == "width_mm") m.geometry.width_mm = parse_double(value, what);
    else if (key == "height_mm") m.geometry.height_mm = parse_double(value, what);
    else if (key == "width_px") m.geometry.width_px = parse_double(value, what);
    else if (key == "height_px") m.geometry.height_px = parse_double(value, what);
    else if (key == "has_validity") m.has_validity = parse_bool(value, what);
    else throw DataError(path.string() + ": unknown manifest key '" + key + "'");
  }
  m.geometry.validate();
  if (!(m.sample_rate_hz > 0.0)) throw DataError(path.string() + ": sample_rate_hz must be positive");
  for (std::size_t i = 1; i < sections.size(); ++i) {
    const auto& s = sections[i];
    const std::string where = path.string() + ":" + std::to_string(s.line);
    if (s.name != "recording") throw DataError(where + ": unknown section [" + s.name + "]");
    DatasetEntry e;
    for (const auto& [key, value] : s.values) {
      if (key == "file") e.file = value;
      else if (key == "participant") e.participant_id = value;
      else if (key == "session") e.session_label = value;
      else if (key == "gender") e.gender = value;
      else if (key == "age") e.age = parse_double(value, where + ": age");
      else throw DataError(where + ": unknown recording key '" + key + "'");
    }
    if (e.file.empty() || e.participant_id.empty() || e.session_label.empty()) {
      throw DataError(where + ": recording needs file, participant and session");
    }
    m.entries.push_back(std::move(e));
  }
  if (m.entries.empty()) throw DataError(path.string() + ": manifest lists no recordings");
  return m;
}

void write_manifest(const DatasetManifest& m, std::ostream& out) {
  out << "coordinate_space = " << (m.space == CoordinateSpace::kDegrees ? "degrees" : "pixels")
      << '\n';
  out << "sample_rate_hz = " << format_number(m.sample_rate_hz) << '\n';
  out << "distance_mm = " << format_number(m.geometry.distance_mm) << '\n';
  out << "width_mm = " << format_number(m.geometry.width_mm) << '\n';
  out << "height_mm = " << format_number(m.geometry.height_mm) << '\n';
  out << "width_px = " << format_number(m.geometry.width_px) << '\n';
  out << "height_px = " << format_number(m.geometry.height_px) << '\n';
  out << "has_validity = " << (m.has_validity ? "true" : "false") << '\n';
  for (const auto& e : m.entries) {
    out << "\n[recording]\n";
    out << "file = " << e.file << '\n';
    out << "participant = " << e.participant_id << '\n';
    out << "session = " << e.session_label << '\n';
    if (e.gender) out << "gender = " << *e.gender << '\n';
    if (e.age) out << "age = " << format_number(*e.age) << '\n';
  }
}

GazeRecording load_recording(const DatasetManifest& manifest, const DatasetEntry& entry) {
  const auto path = manifest.base_dir / entry.file;
  std::ifstream in(path);
  if (!in) throw DataError("cannot open recording " + path.string());
  GazeRecording rec;
  try {
    rec.samples = read_recording_csv(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  rec.sample_rate_hz = manifest.sample_rate_hz;
  rec.geometry = manifest.geometry;
  rec.space = manifest.space;
  rec.participant_id = entry.participant_id;
  rec.session_label = entry.session_label;
  rec.gender = entry.gender;
  rec.age = entry.age;
  rec.has_validity = manifest.has_validity;
  rec.validate();
  return rec;
}

std::vector<GazeRecording> load_dataset(const DatasetManifest& manifest) {
  std::vector<GazeRecording> out;
  out.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) out.push_back(load_recording(manifest, e));
  return out;
}

void write_segment_dump(const std::vector<Segment>& segments, std::ostream& out) {
  out << "kind,start_index,end_index,duration_s\n";
  for (const auto& s : segments) {
    out << to_string(s.kind) << ',' << s.start_index << ',' << s.end_index << ','
        << format_number(s.duration_s) << '\n';
  }
}

void write_feature_matrix(const std::vector<FeatureVector>& vectors,
                          const FeatureSchema& schema, std::ostream& out) {
  out << "participant_id,segment_kind";
  for (const auto& name : schema.names()) out << ',' << name;
  out << '\n';
  for (const auto& v : vectors) {
    out << v.participant_id << ',' << to_string(v.kind);
    for (double x : v.values) out << ',' << format_number(x);
    out << '\n';
  }
}

void write_sweep_csv(const std::vector<SweepPoint>& table, std::ostream& out) {
  out << "vt_deg_s,mfd_s,fixation_count,accuracy_mean,accuracy_sem\n";
  for (const auto& p : table) {
    out << format_number(p.vt) << ',' << format_number(p.mfd) << ',' << p.fixation_count << ','
        << format_number(p.accuracy_mean) << ',' << format_number(p.accuracy_sem) << '\n';
  }
}

}  // namespace eyeid
