#include "doctest.h"

#include "evstab/core.hpp"
#include "test_support.hpp"

using namespace evstab;
using testutil::ev;
using testutil::kind_of;
using testutil::make_stream;

TEST_CASE("validate_stream accepts sorted in-bounds events") {
  const auto s = make_stream(346, 260, {ev(1, 0, 0, 1), ev(2, 345, 259, -1),
                                        ev(2, 10, 10, 1)});
  CHECK_NOTHROW(validate_stream(s));
}

TEST_CASE("validate_stream rejects descending timestamps with the index") {
  const auto s = make_stream(10, 10, {ev(5, 1, 1, 1), ev(3, 2, 2, 1)});
  const auto k = kind_of([&] { validate_stream(s); });
  CHECK(k == ErrorKind::UnsortedTimestamps);
  try {
    validate_stream(s);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("1") != std::string::npos);
  }
}

TEST_CASE("validate_stream bounds are exclusive at width and height") {
  CHECK(kind_of([&] {
          validate_stream(make_stream(346, 260, {ev(1, 346, 0, 1)}));
        }) == ErrorKind::OutOfBoundsCoordinate);
  CHECK(kind_of([&] {
          validate_stream(make_stream(346, 260, {ev(1, 0, 260, 1)}));
        }) == ErrorKind::OutOfBoundsCoordinate);
  CHECK(kind_of([&] {
          validate_stream(make_stream(346, 260, {ev(1, -1, 0, 1)}));
        }) == ErrorKind::OutOfBoundsCoordinate);
}

TEST_CASE("validate_stream rejects zero polarity and zero dimensions") {
  CHECK(kind_of([&] {
          validate_stream(make_stream(10, 10, {ev(1, 1, 1, 0)}));
        }) == ErrorKind::InvalidPolarity);
  CHECK(kind_of([&] { validate_stream(make_stream(0, 10, {})); }) ==
        ErrorKind::InvariantViolation);
}

TEST_CASE("equal timestamps are legal and keep order") {
  const auto s = make_stream(10, 10, {ev(7, 1, 1, 1), ev(7, 2, 2, -1)});
  CHECK_NOTHROW(validate_stream(s));
  CHECK(s.events[0].x == 1);
  CHECK(s.events[1].x == 2);
}

TEST_CASE("validate_imu requires strictly increasing timestamps") {
  ImuSequence seq;
  seq.samples.resize(2);
  seq.samples[0].t = 5;
  seq.samples[1].t = 5;
  CHECK(kind_of([&] { validate_imu(seq); }) == ErrorKind::NonMonotonicTimestamps);
  seq.samples[1].t = 6;
  CHECK_NOTHROW(validate_imu(seq));
}

TEST_CASE("validate_imu rejects non-finite components") {
  ImuSequence seq;
  seq.samples.resize(1);
  seq.samples[0].omega = Eigen::Vector3d(0, std::nan(""), 0);
  CHECK(kind_of([&] { validate_imu(seq); }) == ErrorKind::InvariantViolation);
}

TEST_CASE("default camera focal ratio") {
  const CameraModel cam;
  CHECK(cam.rho() == doctest::Approx(216.21621621621622).epsilon(1e-12));
  CHECK_NOTHROW(validate_camera(cam));
}

TEST_CASE("validate_camera rejects improper extrinsics") {
  CameraModel cam;
  cam.r_ci = 2.0 * Eigen::Matrix3d::Identity();
  CHECK(kind_of([&] { validate_camera(cam); }) == ErrorKind::NonOrthonormalRotation);

  cam.r_ci = Eigen::Matrix3d::Identity();
  cam.r_ci(0, 0) = -1.0;  // reflection: orthonormal but determinant -1
  CHECK(kind_of([&] { validate_camera(cam); }) == ErrorKind::NonOrthonormalRotation);

  cam = CameraModel{};
  cam.focal_length = 0.0;
  CHECK(kind_of([&] { validate_camera(cam); }) == ErrorKind::InvariantViolation);
}

TEST_CASE("compensation config invariants") {
  CompensationConfig cfg;
  CHECK_NOTHROW(validate_config(cfg));

  cfg = CompensationConfig{};
  cfg.gamma_min = 6.0;  // above gamma_max
  CHECK(kind_of([&] { validate_config(cfg); }) == ErrorKind::InvariantViolation);

  cfg = CompensationConfig{};
  cfg.gamma_min = 0.0;
  CHECK(kind_of([&] { validate_config(cfg); }) == ErrorKind::InvariantViolation);

  cfg = CompensationConfig{};
  cfg.a = 0.0;
  CHECK(kind_of([&] { validate_config(cfg); }) == ErrorKind::InvariantViolation);

  cfg = CompensationConfig{};
  cfg.a = 0.2;
  cfg.b = 0.5;  // a + b < 1 lets gamma escape past gamma_max
  CHECK(kind_of([&] { validate_config(cfg); }) == ErrorKind::InvariantViolation);

  cfg = CompensationConfig{};
  cfg.n_min = 0;
  CHECK(kind_of([&] { validate_config(cfg); }) == ErrorKind::InvariantViolation);

  cfg = CompensationConfig{};
  cfg.n_max = cfg.n_min - 1;
  CHECK(kind_of([&] { validate_config(cfg); }) == ErrorKind::InvariantViolation);
}

TEST_CASE("sampling config invariants") {
  IgsConfig cfg;
  CHECK_NOTHROW(validate_config(cfg));

  cfg.k = 0;
  CHECK(kind_of([&] { validate_config(cfg); }) == ErrorKind::InvariantViolation);

  cfg = IgsConfig{};
  cfg.w_u = -0.1;
  CHECK(kind_of([&] { validate_config(cfg); }) == ErrorKind::InvariantViolation);

  cfg = IgsConfig{};
  cfg.w_rel = cfg.w_q = cfg.w_u = cfg.w_d = 0.0;
  CHECK(kind_of([&] { validate_config(cfg); }) == ErrorKind::InvariantViolation);
}

TEST_CASE("error messages start with the kind name") {
  try {
    fail(ErrorKind::BadMagic, "details here");
  } catch (const Error& e) {
    CHECK(std::string(e.what()) == "BadMagic: details here");
    CHECK(e.kind() == ErrorKind::BadMagic);
  }
}

TEST_CASE("zero rotation predicate") {
  RotationAngles r;
  CHECK(r.is_zero());
  r.theta = 1e-300;
  CHECK(!r.is_zero());
}
