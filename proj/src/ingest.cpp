#include "vical/ingest.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace vical {

namespace {

constexpr std::string_view kImuHeader = "#t_ns,gx,gy,gz,ax,ay,az,temp_c";
constexpr std::string_view kMocapHeader = "#t_ns,tx,ty,tz,qw,qx,qy,qz";
constexpr std::string_view kExposureHeader = "#t_ns,exposure_ns,lux";
constexpr std::string_view kPairsHeader =
    "#t_ns,twm_tx,twm_ty,twm_tz,twm_qw,twm_qx,twm_qy,twm_qz,"
    "tig_tx,tig_ty,tig_tz,tig_qw,tig_qx,tig_qy,tig_qz";

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
  fail(ErrorCode::parse, "line " + std::to_string(line) + ": " + what);
}

// Splits text into lines at '\n' and walks them with a 1-based counter.
// Carriage returns are malformed input (the formats are UNIX-newline).
class LineReader {
 public:
  explicit LineReader(std::string_view text) : rest_(text) {}

  bool next(std::string_view& line) {
    if (done_) return false;
    const auto pos = rest_.find('\n');
    if (pos == std::string_view::npos) {
      line = rest_;
      done_ = true;
      if (line.empty()) return false;  // trailing newline already consumed
    } else {
      line = rest_.substr(0, pos);
      rest_.remove_prefix(pos + 1);
    }
    ++line_no_;
    if (line.find('\r') != std::string_view::npos) {
      parse_fail(line_no_, "carriage return in input");
    }
    return true;
  }

  std::size_t line_no() const { return line_no_; }

 private:
  std::string_view rest_;
  std::size_t line_no_ = 0;
  bool done_ = false;
};

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_double_field(std::string_view tok, std::size_t line,
                          std::string_view name) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    parse_fail(line, "bad value for " + std::string(name) + ": '" +
                         std::string(tok) + "'");
  }
  if (!std::isfinite(v)) {
    parse_fail(line, "non-finite value for " + std::string(name));
  }
  return v;
}

std::int64_t parse_int_field(std::string_view tok, std::size_t line,
                             std::string_view name) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    parse_fail(line, "bad integer for " + std::string(name) + ": '" +
                         std::string(tok) + "'");
  }
  return v;
}

void expect_header(LineReader& reader, std::string_view expected) {
  std::string_view line;
  if (!reader.next(line)) {
    parse_fail(1, "empty file, expected header '" + std::string(expected) + "'");
  }
  if (line != expected) {
    parse_fail(reader.line_no(), "header mismatch, expected '" +
                                     std::string(expected) + "'");
  }
}

void check_monotonic(Timestamp prev, Timestamp cur, std::size_t line) {
  if (cur <= prev) {
    fail(ErrorCode::monotonicity,
         "line " + std::to_string(line) + ": timestamp " + std::to_string(cur) +
             " does not increase past " + std::to_string(prev));
  }
}

RigidMotion parse_pose_fields(const std::vector<std::string_view>& fields,
                              std::size_t offset, std::size_t line,
                              WarningList* warnings) {
  RigidMotion pose;
  pose.translation.x() = parse_double_field(fields[offset + 0], line, "tx");
  pose.translation.y() = parse_double_field(fields[offset + 1], line, "ty");
  pose.translation.z() = parse_double_field(fields[offset + 2], line, "tz");
  const double qw = parse_double_field(fields[offset + 3], line, "qw");
  const double qx = parse_double_field(fields[offset + 4], line, "qx");
  const double qy = parse_double_field(fields[offset + 5], line, "qy");
  const double qz = parse_double_field(fields[offset + 6], line, "qz");
  pose.rotation = Eigen::Quaterniond(qw, qx, qy, qz);
  const double norm = pose.rotation.norm();
  if (std::abs(norm - 1.0) > 1e-2) {
    fail(ErrorCode::norm, "line " + std::to_string(line) +
                              ": quaternion norm " + format_double(norm) +
                              " deviates more than 1e-2 from 1");
  }
  if (std::abs(norm - 1.0) > 1e-3 && warnings != nullptr) {
    warnings->push_back("line " + std::to_string(line) + ": quaternion norm " +
                        format_double(norm) + " normalized");
  }
  pose.canonicalize();
  return pose;
}

void append_pose_fields(std::string& out, const RigidMotion& pose) {
  out += format_double(pose.translation.x());
  out += ',';
  out += format_double(pose.translation.y());
  out += ',';
  out += format_double(pose.translation.z());
  out += ',';
  out += format_double(pose.rotation.w());
  out += ',';
  out += format_double(pose.rotation.x());
  out += ',';
  out += format_double(pose.rotation.y());
  out += ',';
  out += format_double(pose.rotation.z());
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string format_int(std::int64_t v) {
  char buf[24];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) fail(ErrorCode::io, "read failure on " + path.string());
  return std::move(ss).str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot open " + path.string() + " for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) fail(ErrorCode::io, "write failure on " + path.string());
}

// ---------------------------------------------------------------------------
// imu.csv

std::vector<ImuSample> parse_imu_csv(std::string_view text) {
  LineReader reader(text);
  expect_header(reader, kImuHeader);
  std::vector<ImuSample> samples;
  std::string_view line;
  while (reader.next(line)) {
    if (line.empty()) parse_fail(reader.line_no(), "empty row");
    const auto fields = split_fields(line);
    if (fields.size() != 8) {
      parse_fail(reader.line_no(), "expected 8 columns, got " +
                                       std::to_string(fields.size()));
    }
    ImuSample s;
    const std::size_t ln = reader.line_no();
    s.t = parse_int_field(fields[0], ln, "t_ns");
    for (int i = 0; i < 3; ++i) {
      s.gyro[i] = parse_double_field(fields[1 + i], ln, "gyro");
      s.accel[i] = parse_double_field(fields[4 + i], ln, "accel");
    }
    if (!fields[7].empty()) {
      s.temp_c = parse_double_field(fields[7], ln, "temp_c");
    }
    if (!samples.empty()) check_monotonic(samples.back().t, s.t, ln);
    samples.push_back(s);
  }
  return samples;
}

std::vector<ImuSample> load_imu(const std::filesystem::path& path) {
  return parse_imu_csv(read_file(path));
}

void write_imu(std::span<const ImuSample> samples,
               const std::filesystem::path& path) {
  std::string out;
  out.reserve(64 * samples.size() + 64);
  out += kImuHeader;
  out += '\n';
  for (const auto& s : samples) {
    out += format_int(s.t);
    for (int i = 0; i < 3; ++i) {
      out += ',';
      out += format_double(s.gyro[i]);
    }
    for (int i = 0; i < 3; ++i) {
      out += ',';
      out += format_double(s.accel[i]);
    }
    out += ',';
    if (s.temp_c) out += format_double(*s.temp_c);
    out += '\n';
  }
  write_file(path, out);
}

// ---------------------------------------------------------------------------
// mocap.csv (also gt.csv / est.csv)

Trajectory parse_mocap_csv(std::string_view text, WarningList* warnings) {
  LineReader reader(text);
  expect_header(reader, kMocapHeader);
  Trajectory traj;
  traj.parent = Frame::W;
  traj.child = Frame::M;
  std::string_view line;
  while (reader.next(line)) {
    if (line.empty()) parse_fail(reader.line_no(), "empty row");
    const auto fields = split_fields(line);
    if (fields.size() != 8) {
      parse_fail(reader.line_no(), "expected 8 columns, got " +
                                       std::to_string(fields.size()));
    }
    PoseSample s;
    const std::size_t ln = reader.line_no();
    s.t = parse_int_field(fields[0], ln, "t_ns");
    s.pose = parse_pose_fields(fields, 1, ln, warnings);
    if (!traj.samples.empty()) check_monotonic(traj.samples.back().t, s.t, ln);
    traj.samples.push_back(s);
  }
  return traj;
}

Trajectory load_mocap(const std::filesystem::path& path, WarningList* warnings) {
  return parse_mocap_csv(read_file(path), warnings);
}

void write_mocap(const Trajectory& traj, const std::filesystem::path& path) {
  std::string out;
  out.reserve(96 * traj.samples.size() + 64);
  out += kMocapHeader;
  out += '\n';
  for (const auto& s : traj.samples) {
    out += format_int(s.t);
    out += ',';
    append_pose_fields(out, s.pose);
    out += '\n';
  }
  write_file(path, out);
}

// ---------------------------------------------------------------------------
// exposures.csv

std::vector<ExposureRecord> parse_exposures_csv(std::string_view text) {
  LineReader reader(text);
  expect_header(reader, kExposureHeader);
  std::vector<ExposureRecord> records;
  std::string_view line;
  while (reader.next(line)) {
    if (line.empty()) parse_fail(reader.line_no(), "empty row");
    const auto fields = split_fields(line);
    if (fields.size() != 3) {
      parse_fail(reader.line_no(), "expected 3 columns, got " +
                                       std::to_string(fields.size()));
    }
    ExposureRecord r;
    const std::size_t ln = reader.line_no();
    r.t = parse_int_field(fields[0], ln, "t_ns");
    r.exposure_ns = parse_int_field(fields[1], ln, "exposure_ns");
    if (r.exposure_ns < 0) parse_fail(ln, "negative exposure");
    if (!fields[2].empty()) {
      r.lux = parse_double_field(fields[2], ln, "lux");
    }
    if (!records.empty()) check_monotonic(records.back().t, r.t, ln);
    records.push_back(r);
  }
  return records;
}

std::vector<ExposureRecord> load_exposures(const std::filesystem::path& path) {
  return parse_exposures_csv(read_file(path));
}

void write_exposures(std::span<const ExposureRecord> records,
                     const std::filesystem::path& path) {
  std::string out;
  out += kExposureHeader;
  out += '\n';
  for (const auto& r : records) {
    out += format_int(r.t);
    out += ',';
    out += format_int(r.exposure_ns);
    out += ',';
    if (r.lux) out += format_double(*r.lux);
    out += '\n';
  }
  write_file(path, out);
}

// ---------------------------------------------------------------------------
// pairs.csv

std::vector<PosePair> parse_pairs_csv(std::string_view text) {
  LineReader reader(text);
  expect_header(reader, kPairsHeader);
  std::vector<PosePair> pairs;
  std::string_view line;
  while (reader.next(line)) {
    if (line.empty()) parse_fail(reader.line_no(), "empty row");
    const auto fields = split_fields(line);
    if (fields.size() != 15) {
      parse_fail(reader.line_no(), "expected 15 columns, got " +
                                       std::to_string(fields.size()));
    }
    PosePair p;
    const std::size_t ln = reader.line_no();
    p.t = parse_int_field(fields[0], ln, "t_ns");
    p.T_WM = parse_pose_fields(fields, 1, ln, nullptr);
    p.T_IG = parse_pose_fields(fields, 8, ln, nullptr);
    if (!pairs.empty()) check_monotonic(pairs.back().t, p.t, ln);
    pairs.push_back(p);
  }
  return pairs;
}

std::vector<PosePair> load_pairs(const std::filesystem::path& path) {
  return parse_pairs_csv(read_file(path));
}

void write_pairs(std::span<const PosePair> pairs,
                 const std::filesystem::path& path) {
  std::string out;
  out += kPairsHeader;
  out += '\n';
  for (const auto& p : pairs) {
    out += format_int(p.t);
    out += ',';
    append_pose_fields(out, p.T_WM);
    out += ',';
    append_pose_fields(out, p.T_IG);
    out += '\n';
  }
  write_file(path, out);
}

// ---------------------------------------------------------------------------
// INI dialect

const std::string* IniFile::Section::find(std::string_view key) const {
  for (const auto& [k, v] : entries) {
    if (k == key) return &v;
  }
  return nullptr;
}

IniFile IniFile::parse(std::string_view text) {
  IniFile ini;
  LineReader reader(text);
  Section* current = nullptr;
  std::string_view line;
  while (reader.next(line)) {
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      if (line.size() < 3 || line.back() != ']') {
        parse_fail(reader.line_no(), "malformed section header");
      }
      const std::string_view name = line.substr(1, line.size() - 2);
      for (char c : name) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') {
          parse_fail(reader.line_no(), "invalid section name");
        }
      }
      ini.sections.push_back({std::string(name), {}});
      current = &ini.sections.back();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      parse_fail(reader.line_no(), "expected 'key = value'");
    }
    if (current == nullptr) {
      parse_fail(reader.line_no(), "entry outside any section");
    }
    auto trim = [](std::string_view s) {
      while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
      while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
      return s;
    };
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) parse_fail(reader.line_no(), "empty key");
    for (char c : key) {
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') {
        parse_fail(reader.line_no(), "invalid key '" + std::string(key) + "'");
      }
    }
    current->entries.emplace_back(std::string(key), std::string(value));
  }
  return ini;
}

IniFile IniFile::load(const std::filesystem::path& path) {
  return parse(read_file(path));
}

std::string IniFile::text() const {
  std::string out;
  for (const auto& sec : sections) {
    out += '[';
    out += sec.name;
    out += "]\n";
    for (const auto& [k, v] : sec.entries) {
      out += k;
      out += " = ";
      out += v;
      out += '\n';
    }
  }
  return out;
}

void IniFile::save(const std::filesystem::path& path) const {
  write_file(path, text());
}

const IniFile::Section* IniFile::find(std::string_view name) const {
  for (const auto& sec : sections) {
    if (sec.name == name) return &sec;
  }
  return nullptr;
}

IniFile::Section& IniFile::get_or_add(std::string_view name) {
  for (auto& sec : sections) {
    if (sec.name == name) return sec;
  }
  sections.push_back({std::string(name), {}});
  return sections.back();
}

void IniFile::set(std::string_view section, std::string_view key,
                  std::string_view value) {
  Section& sec = get_or_add(section);
  for (auto& [k, v] : sec.entries) {
    if (k == key) {
      v = std::string(value);
      return;
    }
  }
  sec.entries.emplace_back(std::string(key), std::string(value));
}

const IniFile::Section& IniFile::require(std::string_view name) const {
  const Section* sec = find(name);
  if (sec == nullptr) {
    fail(ErrorCode::missing_section, "missing section [" + std::string(name) + "]");
  }
  return *sec;
}

std::vector<double> IniFile::get_doubles(std::string_view section,
                                         std::string_view key) const {
  const auto v = maybe_doubles(section, key);
  if (!v) {
    fail(ErrorCode::missing_section, "missing section [" +
                                         std::string(section) + "] or key '" +
                                         std::string(key) + "'");
  }
  return *v;
}

std::optional<std::vector<double>> IniFile::maybe_doubles(
    std::string_view section, std::string_view key) const {
  const Section* sec = find(section);
  if (sec == nullptr) return std::nullopt;
  const std::string* raw = sec->find(key);
  if (raw == nullptr) return std::nullopt;
  std::vector<double> out;
  std::string_view rest = *raw;
  while (!rest.empty()) {
    while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
    if (rest.empty()) break;
    const auto sp = rest.find(' ');
    const std::string_view tok =
        sp == std::string_view::npos ? rest : rest.substr(0, sp);
    rest = sp == std::string_view::npos ? std::string_view{} : rest.substr(sp);
    double v = 0.0;
    const auto [ptr, ec] =
        std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() ||
        !std::isfinite(v)) {
      fail(ErrorCode::parse, "[" + std::string(section) + "] " +
                                 std::string(key) + ": bad number '" +
                                 std::string(tok) + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) {
    fail(ErrorCode::parse, "[" + std::string(section) + "] " +
                               std::string(key) + ": empty value");
  }
  return out;
}

double IniFile::get_double(std::string_view section,
                           std::string_view key) const {
  const auto v = get_doubles(section, key);
  if (v.size() != 1) {
    fail(ErrorCode::parse, "[" + std::string(section) + "] " +
                               std::string(key) + ": expected one value");
  }
  return v[0];
}

std::int64_t IniFile::get_int(std::string_view section,
                              std::string_view key) const {
  const Section& sec = require(section);
  const std::string* raw = sec.find(key);
  if (raw == nullptr) {
    fail(ErrorCode::missing_section, "missing key '" + std::string(key) +
                                         "' in [" + std::string(section) + "]");
  }
  std::int64_t v = 0;
  const auto [ptr, ec] =
      std::from_chars(raw->data(), raw->data() + raw->size(), v);
  if (ec != std::errc() || ptr != raw->data() + raw->size()) {
    fail(ErrorCode::parse, "[" + std::string(section) + "] " +
                               std::string(key) + ": bad integer '" + *raw +
                               "'");
  }
  return v;
}

// ---------------------------------------------------------------------------
// calib.txt

namespace {

Eigen::Matrix3d matrix_from(const std::vector<double>& v,
                            std::string_view section) {
  if (v.size() != 9) {
    fail(ErrorCode::parse,
         "[" + std::string(section) + "] expected 9 entries (row major)");
  }
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = v[3 * r + c];
  return m;
}

Eigen::Vector3d vec3_from(const std::vector<double>& v,
                          std::string_view section) {
  if (v.size() != 3) {
    fail(ErrorCode::parse, "[" + std::string(section) + "] expected 3 entries");
  }
  return {v[0], v[1], v[2]};
}

RigidMotion pose_from(const std::vector<double>& v, std::string_view section) {
  if (v.size() != 7) {
    fail(ErrorCode::parse,
         "[" + std::string(section) + "] expected 7 entries (tx ty tz qw qx qy qz)");
  }
  RigidMotion pose;
  pose.translation = {v[0], v[1], v[2]};
  pose.rotation = Eigen::Quaterniond(v[3], v[4], v[5], v[6]);
  if (std::abs(pose.rotation.norm() - 1.0) > 1e-2) {
    fail(ErrorCode::norm,
         "[" + std::string(section) + "] quaternion far from unit norm");
  }
  pose.canonicalize();
  return pose;
}

std::string join_doubles(std::span<const double> vals) {
  std::string out;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (i > 0) out += ' ';
    out += format_double(vals[i]);
  }
  return out;
}

std::string matrix_text(const Eigen::Matrix3d& m) {
  double flat[9];
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) flat[3 * r + c] = m(r, c);
  return join_doubles(flat);
}

std::string pose_text(const RigidMotion& p) {
  const double flat[7] = {p.translation.x(), p.translation.y(),
                          p.translation.z(), p.rotation.w(),
                          p.rotation.x(),    p.rotation.y(),
                          p.rotation.z()};
  return join_doubles(flat);
}

constexpr std::int64_t kMaxShiftNs = 1'000'000'000;

void check_shift(std::int64_t shift, std::string_view name) {
  if (shift <= -kMaxShiftNs || shift >= kMaxShiftNs) {
    fail(ErrorCode::parse, std::string(name) + " magnitude must be below 1 s");
  }
}

}  // namespace

CalibrationFile parse_calibration(std::string_view text) {
  const IniFile ini = IniFile::parse(text);
  for (const char* sec :
       {"M_a", "M_g", "b_a", "b_g", "T_MI", "T_WG", "time_shift", "noise"}) {
    if (ini.find(sec) == nullptr) {
      fail(ErrorCode::missing_section,
           "missing section [" + std::string(sec) + "]");
    }
  }

  CalibrationFile c;
  c.intrinsics.M_a = matrix_from(ini.get_doubles("M_a", "m"), "M_a");
  c.intrinsics.M_g = matrix_from(ini.get_doubles("M_g", "m"), "M_g");
  c.intrinsics.b_a = vec3_from(ini.get_doubles("b_a", "v"), "b_a");
  c.intrinsics.b_g = vec3_from(ini.get_doubles("b_g", "v"), "b_g");
  try {
    c.intrinsics.validate();
  } catch (const Error& e) {
    fail(ErrorCode::parse, std::string("invalid intrinsics: ") + e.what());
  }
  c.T_MI = pose_from(ini.get_doubles("T_MI", "pose"), "T_MI");
  c.T_WG = pose_from(ini.get_doubles("T_WG", "pose"), "T_WG");
  c.cam_imu_shift_ns = ini.get_int("time_shift", "cam_imu_ns");
  c.mocap_imu_shift_ns = ini.get_int("time_shift", "mocap_imu_ns");
  check_shift(c.cam_imu_shift_ns, "cam_imu_ns");
  check_shift(c.mocap_imu_shift_ns, "mocap_imu_ns");
  c.accel_noise.sigma_w = ini.get_double("noise", "accel_sigma_w");
  c.accel_noise.sigma_b = ini.get_double("noise", "accel_sigma_b");
  c.gyro_noise.sigma_w = ini.get_double("noise", "gyro_sigma_w");
  c.gyro_noise.sigma_b = ini.get_double("noise", "gyro_sigma_b");
  for (double v : {c.accel_noise.sigma_w, c.accel_noise.sigma_b,
                   c.gyro_noise.sigma_w, c.gyro_noise.sigma_b}) {
    if (v < 0.0) fail(ErrorCode::parse, "[noise] densities must be >= 0");
  }
  if (ini.find("exposure") != nullptr) {
    ExposureModel e;
    e.k_lux_s = ini.get_double("exposure", "k_lux_s");
    e.t_min_s = ini.get_double("exposure", "t_min_s");
    e.t_max_s = ini.get_double("exposure", "t_max_s");
    if (e.k_lux_s <= 0.0 || e.t_min_s <= 0.0 || e.t_min_s >= e.t_max_s) {
      fail(ErrorCode::parse, "[exposure] requires k > 0 and 0 < t_min < t_max");
    }
    c.exposure = e;
  }
  return c;
}

CalibrationFile load_calibration(const std::filesystem::path& path) {
  return parse_calibration(read_file(path));
}

CalibrationFile load_calibration_or_default(
    const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return CalibrationFile{};
  return load_calibration(path);
}

std::string calibration_text(const CalibrationFile& calib) {
  calib.intrinsics.validate();
  IniFile ini;
  ini.set("M_a", "m", matrix_text(calib.intrinsics.M_a));
  ini.set("M_g", "m", matrix_text(calib.intrinsics.M_g));
  ini.set("b_a", "v", join_doubles(std::array<double, 3>{
                          calib.intrinsics.b_a.x(), calib.intrinsics.b_a.y(),
                          calib.intrinsics.b_a.z()}));
  ini.set("b_g", "v", join_doubles(std::array<double, 3>{
                          calib.intrinsics.b_g.x(), calib.intrinsics.b_g.y(),
                          calib.intrinsics.b_g.z()}));
  ini.set("T_MI", "pose", pose_text(calib.T_MI));
  ini.set("T_WG", "pose", pose_text(calib.T_WG));
  check_shift(calib.cam_imu_shift_ns, "cam_imu_ns");
  check_shift(calib.mocap_imu_shift_ns, "mocap_imu_ns");
  ini.set("time_shift", "cam_imu_ns", format_int(calib.cam_imu_shift_ns));
  ini.set("time_shift", "mocap_imu_ns", format_int(calib.mocap_imu_shift_ns));
  ini.set("noise", "accel_sigma_w", format_double(calib.accel_noise.sigma_w));
  ini.set("noise", "accel_sigma_b", format_double(calib.accel_noise.sigma_b));
  ini.set("noise", "gyro_sigma_w", format_double(calib.gyro_noise.sigma_w));
  ini.set("noise", "gyro_sigma_b", format_double(calib.gyro_noise.sigma_b));
  if (calib.exposure) {
    ini.set("exposure", "k_lux_s", format_double(calib.exposure->k_lux_s));
    ini.set("exposure", "t_min_s", format_double(calib.exposure->t_min_s));
    ini.set("exposure", "t_max_s", format_double(calib.exposure->t_max_s));
  }
  return ini.text();
}

void write_calibration(const CalibrationFile& calib,
                       const std::filesystem::path& path) {
  write_file(path, calibration_text(calib));
}

}  // namespace vical
