#include "vical/synth.hpp"

#include <cmath>

#include "doctest.h"
#include "test_util.hpp"
#include "vical/allan.hpp"

using namespace vical;
using test::TempDir;

TEST_CASE("stationary rig: zero rates, specific force is -R^T g") {
  RigConfig c;  // all motion coefficients zero
  c.duration_s = 5.0;
  const GroundTruthBundle b = make_trajectory(c);
  CHECK(b.omega_body(1.25).norm() == 0.0);
  const Eigen::Vector3d f = b.specific_force(2.5);
  CHECK((f - Eigen::Vector3d(0, 0, 9.80665)).norm() < 1e-15);
}

TEST_CASE("pure spin about z gives omega = (0,0,1) exactly") {
  RigConfig c;
  c.duration_s = 5.0;
  c.rotation[2].rate = 1.0;  // theta_z = t
  const GroundTruthBundle b = make_trajectory(c);
  for (double t : {0.0, 0.3, 1.7, 4.9}) {
    CHECK((b.omega_body(t) - Eigen::Vector3d(0, 0, 1)).norm() == 0.0);
  }
}

TEST_CASE("analytic omega matches finite differences of the orientation") {
  const RigConfig c = default_rig_config(42);
  const GroundTruthBundle b = make_trajectory(c);
  double prev_err = -1.0;
  for (double dt : {1e-3, 5e-4, 2.5e-4}) {
    double worst = 0.0;
    for (double t : {3.0, 7.7, 12.4, 19.9}) {
      const Eigen::Quaterniond r0 = b.orientation(t - dt);
      const Eigen::Quaterniond r1 = b.orientation(t + dt);
      const Eigen::Vector3d w_fd = so3_log(r0.conjugate() * r1) / (2.0 * dt);
      worst = std::max(worst, (w_fd - b.omega_body(t)).norm());
    }
    if (prev_err > 0.0) CHECK(worst < prev_err / 3.0);  // ~O(dt^2)
    prev_err = worst;
  }
}

TEST_CASE("analytic acceleration matches finite differences of position") {
  const RigConfig c = default_rig_config(43);
  const GroundTruthBundle b = make_trajectory(c);
  const double dt = 1e-4;
  for (double t : {1.0, 8.3, 17.2}) {
    const Eigen::Vector3d fd =
        (b.position(t + dt) - 2.0 * b.position(t) + b.position(t - dt)) /
        (dt * dt);
    CHECK((fd - b.acceleration(t)).norm() < 1e-4);
  }
}

TEST_CASE("zero noise and identity intrinsics: raw samples are analytic") {
  RigConfig c = default_rig_config(44);
  c.duration_s = 5.0;
  const GroundTruthBundle b = make_trajectory(c);
  const auto imu = sample_imu(b);
  REQUIRE(imu.size() == 1001);
  for (std::size_t i = 0; i < imu.size(); i += 97) {
    const double t = to_seconds(imu[i].t);
    CHECK((imu[i].gyro - b.omega_body(t)).norm() < 1e-12);
    CHECK((imu[i].accel - b.specific_force(t)).norm() < 1e-12);
  }
}

TEST_CASE("seeded emission is byte identical") {
  TempDir dir("det");
  RigConfig c = default_rig_config(45);
  c.duration_s = 4.0;
  c.gyro_noise = {8e-5, 2.2e-6};
  c.accel_noise = {1.4e-3, 8.6e-5};
  c.mocap_rot_noise_deg = 0.1;
  c.mocap_trans_noise_m = 5e-4;
  c.glitch_rate = 0.01;
  c.mocap_offset_ns = 5'000'000;

  const GroundTruthBundle b = make_trajectory(c);
  const auto da = emit_dataset(b, dir.path() / "a");
  const auto db = emit_dataset(b, dir.path() / "b");

  int files = 0;
  for (const auto& entry :
       std::filesystem::recursive_directory_iterator(dir.path() / "a")) {
    if (!entry.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(entry.path(), dir.path() / "a");
    CHECK(read_file(entry.path()) == read_file(dir.path() / "b" / rel));
    ++files;
  }
  CHECK(files >= 7);  // imu, mocap, gt, pairs, exposures, truth, vignette/*
}

TEST_CASE("different seeds decorrelate the noise streams") {
  RigConfig c;
  c.duration_s = 2.0;
  c.gyro_noise.sigma_w = 8e-5;
  RigConfig c2 = c;
  c2.seed = 2;
  const auto a = sample_imu(make_trajectory(c));
  const auto b = sample_imu(make_trajectory(c2));
  double diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i].gyro - b[i].gyro).cwiseAbs().sum();
  }
  CHECK(diff > 0.0);
}

TEST_CASE("emitted dataset round trips through the parsers") {
  TempDir dir("rt");
  RigConfig c = default_rig_config(46);
  c.duration_s = 3.0;
  c.gyro_noise = {8e-5, 2.2e-6};
  c.mocap_offset_ns = 12'300'000;
  const GroundTruthBundle b = make_trajectory(c);
  const DatasetDir ds = emit_dataset(b, dir.path() / "ds");

  const auto imu = sample_imu(b);
  const auto imu_back = load_imu(ds.imu_csv());
  REQUIRE(imu_back.size() == imu.size());
  for (std::size_t i = 0; i < imu.size(); i += 53) {
    CHECK(imu_back[i].t == imu[i].t);
    CHECK(imu_back[i].gyro == imu[i].gyro);
    CHECK(imu_back[i].accel == imu[i].accel);
  }

  const Trajectory mocap = sample_mocap(b);
  const Trajectory mocap_back = load_mocap(ds.mocap_csv());
  REQUIRE(mocap_back.size() == mocap.size());
  for (std::size_t i = 0; i < mocap.size(); i += 17) {
    CHECK(mocap_back.samples[i].t == mocap.samples[i].t);
    CHECK(mocap_back.samples[i].pose.translation ==
          mocap.samples[i].pose.translation);
    CHECK(mocap_back.samples[i].pose.rotation.coeffs() ==
          mocap.samples[i].pose.rotation.coeffs());
  }

  // truth.txt carries the injected parameters
  const CalibrationFile truth = load_calibration(ds.truth_txt());
  CHECK(truth.mocap_imu_shift_ns == 12'300'000);
  CHECK(truth.gyro_noise.sigma_w == 8e-5);
}

TEST_CASE("rig config round trips through the ini dialect") {
  TempDir dir("cfg");
  RigConfig c = default_rig_config(47);
  c.duration_s = 123.5;
  c.mocap_offset_ns = -250'000'000;
  c.mocap_start_delay_s = 0.25;
  c.mocap_coverage = {{0.0, 10.0}, {113.5, 123.5}};
  c.gyro_noise = {8e-5, 2.2e-6};
  c.accel_noise = {1.4e-3, 8.6e-5};
  c.intrinsics.M_g(0, 1) = 0.013;
  c.intrinsics.M_a(2, 1) = -0.02;
  c.intrinsics.b_g = {0.01, -0.005, 0.002};
  c.vignette_views = 6;
  c.pairs_rot_noise_deg = 0.05;

  const auto path = dir.path() / "rig.txt";
  write_rig_config(c, path);
  const RigConfig back = load_rig_config(path);
  CHECK(back.duration_s == c.duration_s);
  CHECK(back.seed == c.seed);
  CHECK(back.mocap_offset_ns == c.mocap_offset_ns);
  CHECK(back.mocap_start_delay_s == c.mocap_start_delay_s);
  REQUIRE(back.mocap_coverage.size() == 2);
  CHECK(back.mocap_coverage[1].first == 113.5);
  CHECK(back.intrinsics.M_g(0, 1) == 0.013);
  CHECK(back.intrinsics.M_a(2, 1) == -0.02);
  CHECK(back.gyro_noise.sigma_b == 2.2e-6);
  CHECK(back.vignette_views == 6);
  CHECK(back.pairs_rot_noise_deg == 0.05);
  REQUIRE(back.rotation[1].harmonics.size() ==
          c.rotation[1].harmonics.size());
  CHECK(back.rotation[1].harmonics[0].amp == c.rotation[1].harmonics[0].amp);
  CHECK(back.translation[2].harmonics[1].freq_hz ==
        c.translation[2].harmonics[1].freq_hz);

  // emitted datasets from the two configs are identical
  TempDir out("cfg_ds");
  emit_dataset(make_trajectory(c), out.path() / "a");
  emit_dataset(make_trajectory(back), out.path() / "b");
  CHECK(read_file(out.path() / "a" / "imu.csv") ==
        read_file(out.path() / "b" / "imu.csv"));
}

TEST_CASE("emitted gyro noise reproduces the injected Allan densities") {
  RigConfig c;  // stationary rig, noise only
  c.duration_s = 5000.0;
  c.gyro_noise = {8e-5, 0.0};
  const auto imu = sample_imu(make_trajectory(c));
  const ImuAllanCurves curves = compute_imu_allan(imu, ImuChannel::gyro);
  const double fitted = fit_white_noise(curves.mean, 0.02, 1.0);
  CHECK(fitted == doctest::Approx(8e-5).epsilon(0.05));
}

TEST_CASE("integrating the clean IMU signals reproduces the trajectory") {
  // trapezoid integration in the world frame from the true initial state;
  // doubling the IMU rate must cut the 10 s drift by ~4 (O(dt^2))
  auto drift = [](double rate_hz) {
    RigConfig c = default_rig_config(48);
    c.duration_s = 10.0;
    c.imu_rate_hz = rate_hz;
    const GroundTruthBundle b = make_trajectory(c);
    const auto imu = sample_imu(b);
    Eigen::Quaterniond r = b.orientation(0);
    Eigen::Vector3d v = b.velocity(0);
    Eigen::Vector3d p = b.position(0);
    for (std::size_t i = 0; i + 1 < imu.size(); ++i) {
      const double dt = to_seconds(imu[i + 1].t - imu[i].t);
      const Eigen::Quaterniond r_next =
          r * so3_exp(0.5 * dt * (imu[i].gyro + imu[i + 1].gyro));
      const Eigen::Vector3d a0 = r * imu[i].accel + c.gravity;
      const Eigen::Vector3d a1 = r_next * imu[i + 1].accel + c.gravity;
      const Eigen::Vector3d v_next = v + 0.5 * dt * (a0 + a1);
      p += 0.5 * dt * (v + v_next);
      v = v_next;
      r = r_next;
    }
    return std::pair{rotation_angle(r, b.orientation(10.0)),
                     (p - b.position(10.0)).norm()};
  };
  const auto [rot200, pos200] = drift(200.0);
  const auto [rot400, pos400] = drift(400.0);
  CHECK(pos200 < 0.02);
  CHECK(rot200 < 0.005);
  CHECK(pos400 < pos200 / 3.0);
  CHECK(rot400 < rot200 / 3.0);
}
