#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "evstab/cli.hpp"
#include "evstab/io.hpp"
#include "test_support.hpp"

using namespace evstab;
using testutil::constant_imu;
using testutil::ev;
using testutil::make_stream;
using testutil::TempDir;

namespace {

int run(const std::vector<std::string>& args, std::string* out = nullptr,
        std::string* err = nullptr) {
  std::ostringstream captured_out, captured_err;
  std::streambuf* old_out = std::cout.rdbuf(captured_out.rdbuf());
  std::streambuf* old_err = std::cerr.rdbuf(captured_err.rdbuf());
  const int code = run_cli(args);
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  if (out) *out = captured_out.str();
  if (err) *err = captured_err.str();
  return code;
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

// Reads "key = value" out of a report body.
std::string report_value(const std::string& text, const std::string& key) {
  const std::string tag = key + " = ";
  const std::size_t pos = text.find(tag);
  REQUIRE(pos != std::string::npos);
  const std::size_t end = text.find('\n', pos);
  return text.substr(pos + tag.size(), end - pos - tag.size());
}

}  // namespace

TEST_CASE("usage problems exit with code 2") {
  std::string err;
  CHECK(run({}, nullptr, &err) == 2);
  CHECK(err.rfind("error: Usage:", 0) == 0);

  CHECK(run({"frobnicate"}, nullptr, &err) == 2);
  CHECK(run({"sample", "--frames-dir", "/tmp", "--k", "0", "--out", "/tmp/x"},
            nullptr, &err) == 2);
  CHECK(run({"eval", "--raw", "/nonexistent.bin", "--compensated",
             "/nonexistent.bin"},
            nullptr, &err) == 2);
  CHECK(run({"bench", "--wat"}, nullptr, &err) == 2);
}

TEST_CASE("broken input files exit with code 3 and a typed message") {
  TempDir dir;
  // Long enough to clear the 24-byte header check and fail on the magic.
  write_file_atomic(dir.file("junk.bin"),
                    "XXXXnot an event file at all, just padded prose");
  write_imu_csv(constant_imu(Eigen::Vector3d::Zero(), 0, 1000, 5),
                dir.file("imu.csv"));
  std::string err;
  CHECK(run({"compensate", "--events", dir.file("junk.bin"), "--imu",
             dir.file("imu.csv"), "--out-events", dir.file("out.bin")},
            nullptr, &err) == 3);
  CHECK(err.rfind("error: BadMagic:", 0) == 0);
  CHECK(std::count(err.begin(), err.end(), '\n') == 1);
}

TEST_CASE("config mistakes exit with code 4") {
  TempDir dir;
  write_events_bin(make_stream(346, 260, {ev(10, 5, 5, 1)}), dir.file("e.bin"));
  write_imu_csv(constant_imu(Eigen::Vector3d::Zero(), 0, 1000, 5),
                dir.file("imu.csv"));
  std::string err;
  CHECK(run({"compensate", "--events", dir.file("e.bin"), "--imu",
             dir.file("imu.csv"), "--out-events", dir.file("out.bin"), "--set",
             "bogus=1"},
            nullptr, &err) == 4);
  CHECK(err.rfind("error: UnknownKey:", 0) == 0);
}

TEST_CASE("synthesis is deterministic across runs") {
  TempDir dir;
  const std::vector<std::string> base = {
      "synth",      "--profile", "sinusoid", "--axis",     "yaw",
      "--amplitude", "0.2",      "--freq",   "2",          "--duration",
      "0.2",        "--points",  "25",       "--seed",     "5"};
  auto with_outputs = [&](const std::string& tag) {
    std::vector<std::string> args = base;
    args.insert(args.end(), {"--out-events", dir.file(tag + ".bin"), "--out-imu",
                             dir.file(tag + "_imu.csv")});
    return args;
  };
  std::string out;
  REQUIRE(run(with_outputs("a"), &out) == 0);
  CHECK(contains(out, "wrote "));
  REQUIRE(run(with_outputs("b")) == 0);
  CHECK(read_file(dir.file("a.bin")) == read_file(dir.file("b.bin")));
  CHECK(read_file(dir.file("a_imu.csv")) == read_file(dir.file("b_imu.csv")));
  CHECK(read_file(dir.file("a.bin.prov")) == read_file(dir.file("b.bin.prov")));
  CHECK(read_file(dir.file("a.bin.prov")).rfind("event,point\n", 0) == 0);
}

TEST_CASE("compensating a still stream is a byte-exact pass-through") {
  TempDir dir;
  std::vector<Event> events;
  for (int i = 0; i < 50; ++i)
    events.push_back(ev(static_cast<std::uint64_t>(i) * 1000 + 500,
                        (i * 37) % 346, (i * 91) % 260, (i % 2) ? 1 : -1));
  const EventStream stream = make_stream(346, 260, events);
  write_events_bin(stream, dir.file("in.bin"));
  write_imu_csv(constant_imu(Eigen::Vector3d::Zero(), 0, 100000, 101),
                dir.file("imu.csv"));

  REQUIRE(run({"compensate", "--events", dir.file("in.bin"), "--imu",
               dir.file("imu.csv"), "--out-events", dir.file("out.bin"),
               "--report", dir.file("report.txt"), "--set",
               "gamma_min=2.5"}) == 0);

  CHECK(read_file(dir.file("out.bin")) == read_file(dir.file("in.bin")));

  const std::string report = read_file(dir.file("report.txt"));
  CHECK(contains(report, "[config]"));
  CHECK(contains(report, "gamma_min = 2.5"));  // the override lands verbatim
  CHECK(contains(report, "[groups]"));
  CHECK(contains(report, "kind=stable"));
  CHECK(report_value(report, "kept") == "50");
  CHECK(report_value(report, "dropped") == "0");
  CHECK(report_value(report, "ratio") == "1.0");
}

TEST_CASE("the full pipeline lifts density, picks frames, and benches") {
  TempDir dir;
  REQUIRE(run({"synth", "--profile", "sinusoid", "--axis", "yaw", "--amplitude",
               "0.26", "--freq", "2", "--duration", "0.4", "--points", "40",
               "--seed", "11", "--out-events", dir.file("raw.bin"), "--out-imu",
               dir.file("imu.csv")}) == 0);

  const std::string frames = (dir.path / "frames").string();
  std::string out;
  REQUIRE(run({"compensate", "--events", dir.file("raw.bin"), "--imu",
               dir.file("imu.csv"), "--out-events", dir.file("comp.bin"),
               "--frames-dir", frames, "--report", dir.file("report.txt")},
              &out) == 0);
  CHECK(contains(out, "kept "));

  const std::string report = read_file(dir.file("report.txt"));
  const int frame_count = std::stoi(report_value(report, "frames"));
  REQUIRE(frame_count >= 4);
  int on_disk = 0;
  for (const auto& entry : std::filesystem::directory_iterator(frames)) {
    const std::string name = entry.path().filename().string();
    CHECK(name.rfind("frame_", 0) == 0);
    CHECK(name.find(".ppm") == name.size() - 4);
    ++on_disk;
  }
  CHECK(on_disk == frame_count);

  REQUIRE(run({"eval", "--raw", dir.file("raw.bin"), "--compensated",
               dir.file("comp.bin"), "--axis", "yaw", "--report",
               dir.file("eval.txt")}) == 0);
  const std::string eval = read_file(dir.file("eval.txt"));
  CHECK(report_value(eval, "axis") == "yaw");
  CHECK(std::stod(report_value(eval, "ratio")) >= 1.5);

  REQUIRE(run({"sample", "--frames-dir", frames, "--k", "3", "--out",
               dir.file("picks.txt")}) == 0);
  std::istringstream picks(read_file(dir.file("picks.txt")));
  std::vector<int> indices;
  for (std::string line; std::getline(picks, line);)
    indices.push_back(std::stoi(line));
  REQUIRE(indices.size() == 3);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    CHECK(indices[i] >= 0);
    CHECK(indices[i] < frame_count);
    if (i > 0) CHECK(indices[i] > indices[i - 1]);
  }

  std::string sample_err;
  CHECK(run({"sample", "--frames-dir", frames, "--k", "999", "--out",
             dir.file("noplace.txt")},
            nullptr, &sample_err) == 4);
  CHECK(sample_err.rfind("error: KExceedsFrameCount:", 0) == 0);

  std::string bench_out;
  REQUIRE(run({"bench", "--events", dir.file("raw.bin"), "--imu",
               dir.file("imu.csv"), "--reps", "2"},
              &bench_out) == 0);
  CHECK(contains(bench_out, "# bench report"));
  CHECK(contains(bench_out, "deterministic = true"));
  CHECK(report_value(bench_out, "reps") == "2");
}

TEST_CASE("eval prints to stdout when no report path is given") {
  TempDir dir;
  write_events_bin(make_stream(346, 260, {ev(1, 5, 5, 1), ev(2, 5, 5, 1)}),
                   dir.file("a.bin"));
  write_events_bin(make_stream(346, 260, {ev(1, 5, 5, 1)}), dir.file("b.bin"));
  std::string out;
  REQUIRE(run({"eval", "--raw", dir.file("a.bin"), "--compensated",
               dir.file("b.bin")},
              &out) == 0);
  CHECK(out.rfind("# density report\n", 0) == 0);
  CHECK(report_value(out, "raw") == "2.0");
  CHECK(report_value(out, "compensated") == "1.0");
  CHECK(report_value(out, "ratio") == "0.5");
}

TEST_CASE("binary event files must match the configured sensor size") {
  TempDir dir;
  write_events_bin(make_stream(100, 100, {ev(1, 5, 5, 1)}), dir.file("tiny.bin"));
  write_imu_csv(constant_imu(Eigen::Vector3d::Zero(), 0, 1000, 5),
                dir.file("imu.csv"));
  std::string err;
  CHECK(run({"compensate", "--events", dir.file("tiny.bin"), "--imu",
             dir.file("imu.csv"), "--out-events", dir.file("out.bin")},
            nullptr, &err) == 4);
  CHECK(err.rfind("error: InvariantViolation:", 0) == 0);

  // The same stream as CSV adopts the configured camera instead.
  write_events_csv(make_stream(100, 100, {ev(500, 5, 5, 1)}), dir.file("tiny.csv"));
  CHECK(run({"compensate", "--events", dir.file("tiny.csv"), "--imu",
             dir.file("imu.csv"), "--out-events", dir.file("out2.bin")}) == 0);
  CHECK(read_events_bin(dir.file("out2.bin")).width == 346);
}

TEST_CASE("sampling rejects a directory without usable frames") {
  TempDir dir;
  write_file_atomic(dir.file("notaframe.txt"), "hi");
  std::string err;
  const int code = run({"sample", "--frames-dir", dir.path.string(), "--k", "1",
                        "--out", dir.file("p.txt")},
                       nullptr, &err);
  CHECK(code == 4);  // zero frames, so k=1 exceeds the frame count
}
