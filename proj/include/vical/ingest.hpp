#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vical/core.hpp"
#include "vical/imucal.hpp"
#include "vical/photometric.hpp"

namespace vical {

// On-disk dataset layout. All files are comma-separated ASCII with a
// '#'-prefixed header line and UNIX newlines:
//   imu.csv        #t_ns,gx,gy,gz,ax,ay,az,temp_c      (temp may be empty)
//   mocap.csv      #t_ns,tx,ty,tz,qw,qx,qy,qz
//   exposures.csv  #t_ns,exposure_ns,lux               (lux may be empty)
//   calib.txt      INI-style sections, see CalibrationFile
struct DatasetDir {
  std::filesystem::path root;

  std::filesystem::path imu_csv() const { return root / "imu.csv"; }
  std::filesystem::path mocap_csv() const { return root / "mocap.csv"; }
  std::filesystem::path exposures_csv() const { return root / "exposures.csv"; }
  std::filesystem::path calib_txt() const { return root / "calib.txt"; }
  std::filesystem::path gt_csv() const { return root / "gt.csv"; }
  std::filesystem::path pairs_csv() const { return root / "pairs.csv"; }
  std::filesystem::path truth_txt() const { return root / "truth.txt"; }
  std::filesystem::path vignette_dir() const { return root / "vignette"; }
};

using WarningList = std::vector<std::string>;

// Shortest-round-trip decimal formatting; load(write(x)) is bit exact.
std::string format_double(double v);
std::string format_int(std::int64_t v);

// All parsers take the full file contents; failures are typed errors naming
// the line (1-based). File wrappers throw io on unreadable paths.
std::vector<ImuSample> parse_imu_csv(std::string_view text);
std::vector<ImuSample> load_imu(const std::filesystem::path& path);
void write_imu(std::span<const ImuSample> samples,
               const std::filesystem::path& path);

// Quaternions are normalized on load. Norm deviation > 1e-3 records a
// warning; > 1e-2 is a norm error.
Trajectory parse_mocap_csv(std::string_view text,
                           WarningList* warnings = nullptr);
Trajectory load_mocap(const std::filesystem::path& path,
                      WarningList* warnings = nullptr);
void write_mocap(const Trajectory& traj, const std::filesystem::path& path);

struct ExposureRecord {
  Timestamp t = 0;
  std::int64_t exposure_ns = 0;
  std::optional<double> lux;
};
std::vector<ExposureRecord> parse_exposures_csv(std::string_view text);
std::vector<ExposureRecord> load_exposures(const std::filesystem::path& path);
void write_exposures(std::span<const ExposureRecord> records,
                     const std::filesystem::path& path);

// Synchronized (T_WM, T_IG) observations for hand-eye calibration.
// pairs.csv: #t_ns,twm_tx,..,twm_qz,tig_tx,..,tig_qz (14 numeric columns
// after the timestamp, each pose tx ty tz qw qx qy qz).
struct PosePair {
  Timestamp t = 0;
  RigidMotion T_WM;
  RigidMotion T_IG;
};
std::vector<PosePair> parse_pairs_csv(std::string_view text);
std::vector<PosePair> load_pairs(const std::filesystem::path& path);
void write_pairs(std::span<const PosePair> pairs,
                 const std::filesystem::path& path);

struct NoiseDensities {
  double sigma_w = 0.0;  // white noise, unit/sqrt(Hz)
  double sigma_b = 0.0;  // bias random walk, unit/s/sqrt(Hz)
};

// The single accumulating calibration artifact. Sections [M_a] [M_g] [b_a]
// [b_g] [T_MI] [T_WG] [time_shift] [noise] are required; [exposure] is
// present once fitted. Round trips are bit exact.
struct CalibrationFile {
  ImuIntrinsics intrinsics;
  std::int64_t cam_imu_shift_ns = 0;    // camera time = IMU time + shift
  std::int64_t mocap_imu_shift_ns = 0;  // MoCap time = IMU time + shift
  RigidMotion T_MI;
  RigidMotion T_WG;
  NoiseDensities accel_noise;
  NoiseDensities gyro_noise;
  std::optional<ExposureModel> exposure;
};
CalibrationFile parse_calibration(std::string_view text);
CalibrationFile load_calibration(const std::filesystem::path& path);
// Loads the file if it exists, otherwise returns identity defaults.
CalibrationFile load_calibration_or_default(const std::filesystem::path& path);
std::string calibration_text(const CalibrationFile& calib);
void write_calibration(const CalibrationFile& calib,
                       const std::filesystem::path& path);

// Minimal INI dialect shared by calib.txt, truth.txt and rig configs:
// '#' comments, [section] headers, 'key = v1 v2 ...' entries. Section and
// key order is preserved on write.
struct IniFile {
  struct Section {
    std::string name;
    std::vector<std::pair<std::string, std::string>> entries;

    const std::string* find(std::string_view key) const;
  };
  std::vector<Section> sections;

  static IniFile parse(std::string_view text);
  static IniFile load(const std::filesystem::path& path);
  std::string text() const;
  void save(const std::filesystem::path& path) const;

  const Section* find(std::string_view name) const;
  Section& get_or_add(std::string_view name);
  void set(std::string_view section, std::string_view key,
           std::string_view value);

  // Typed readers; throw missing_section / parse with full context.
  const Section& require(std::string_view name) const;
  std::vector<double> get_doubles(std::string_view section,
                                  std::string_view key) const;
  double get_double(std::string_view section, std::string_view key) const;
  std::int64_t get_int(std::string_view section, std::string_view key) const;
  std::optional<std::vector<double>> maybe_doubles(std::string_view section,
                                                   std::string_view key) const;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace vical
