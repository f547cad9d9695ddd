#include "evstab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "evstab/igs.hpp"
#include "evstab/io.hpp"
#include "evstab/metrics.hpp"
#include "evstab/synth.hpp"
#include "evstab/warp.hpp"

namespace evstab {

namespace {

namespace fs = std::filesystem;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::BadMagic:
    case ErrorKind::BadVersion:
    case ErrorKind::TruncatedPayload:
    case ErrorKind::ParseError:
    case ErrorKind::NonMonotonicTimestamps:
    case ErrorKind::UnsortedTimestamps:
    case ErrorKind::OutOfBoundsCoordinate:
    case ErrorKind::InvalidPolarity:
    case ErrorKind::TimestampOutsideSpan:
    case ErrorKind::CoordinateOverflow:
    case ErrorKind::ImuDoesNotCoverEvents:
    case ErrorKind::EmptySequence:
      return 3;
    case ErrorKind::UnknownKey:
    case ErrorKind::TypeMismatch:
    case ErrorKind::InvariantViolation:
    case ErrorKind::NonOrthonormalRotation:
    case ErrorKind::SpanOutsideSequence:
    case ErrorKind::TangentDomain:
    case ErrorKind::KExceedsFrameCount:
      return 4;
  }
  return 4;
}

// Metrics print with a decimal point even when integral, so "ratio = 1.0"
// reads as a ratio and not a count.
std::string fmt_metric(double v) {
  char buf[64];
  if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 1e15)
    std::snprintf(buf, sizeof(buf), "%.1f", v);
  else
    std::snprintf(buf, sizeof(buf), "%.15g", v);
  return buf;
}

Config load_with_overrides(const std::string& config_path,
                           const std::vector<std::string>& sets) {
  std::string text;
  if (!config_path.empty()) text = read_file(config_path);
  // Overrides append below the file so the ordinary last-wins parse applies
  // them on top of it.
  for (const std::string& s : sets) {
    text += '\n';
    text += s;
  }
  return parse_config(text);
}

// Binary event files carry their own sensor size and must agree with the
// configured camera; CSV carries none and adopts it.
EventStream load_events_for_camera(const std::string& path, const CameraModel& cam) {
  EventStream stream = read_events(path);
  if (path.ends_with(".bin")) {
    if (stream.width != cam.width || stream.height != cam.height)
      fail(ErrorKind::InvariantViolation,
           "event file sensor " + std::to_string(stream.width) + "x" +
               std::to_string(stream.height) + " does not match camera " +
               std::to_string(cam.width) + "x" + std::to_string(cam.height));
  } else {
    stream.width = cam.width;
    stream.height = cam.height;
    validate_stream(stream);
  }
  return stream;
}

Axis parse_axis(const std::string& name) {
  if (name == "x" || name == "pitch") return Axis::X;
  if (name == "y" || name == "yaw") return Axis::Y;
  if (name == "z" || name == "roll") return Axis::Z;
  fail(ErrorKind::TypeMismatch, "axis: expected x, y, z, pitch, yaw, or roll, got '" +
                                    name + "'");
}

Profile parse_profile(const std::string& name) {
  if (name == "sinusoid") return Profile::Sinusoid;
  if (name == "ramp") return Profile::Ramp;
  if (name == "constant") return Profile::Constant;
  fail(ErrorKind::TypeMismatch,
       "profile: expected sinusoid, ramp, or constant, got '" + name + "'");
}

std::string frame_filename(std::size_t index, const EventFrame& f) {
  return "frame_" + std::to_string(index) + "_" + std::to_string(f.t_start) + "_" +
         std::to_string(f.t_end) + ".ppm";
}

struct SynthOpts {
  std::string profile;
  std::string axis;
  double amplitude = 0.0;
  double frequency = 0.0;
  double duration = 0.0;
  double imu_rate = 1000.0;
  int points = 100;
  double margin = 80.0;
  std::uint64_t seed = 7;
  std::string config_path;
  std::vector<std::string> sets;
  std::string out_events;
  std::string out_imu;
};

int do_synth(const SynthOpts& o) {
  const Config cfg = load_with_overrides(o.config_path, o.sets);
  Trajectory traj;
  traj.profile = parse_profile(o.profile);
  traj.axis = parse_axis(o.axis);
  traj.amplitude = o.amplitude;
  traj.frequency = o.frequency;
  traj.duration = o.duration;
  traj.imu_rate = o.imu_rate;

  const Scene scene =
      make_scene(o.points, cfg.camera, o.margin, cfg.comp.constant_depth, o.seed);
  const RenderResult rr =
      render(scene, traj, cfg.camera, cfg.noise_rate, o.seed + 1);

  write_events(rr.events, o.out_events);
  write_imu_csv(rr.imu, o.out_imu);

  std::string prov = "event,point\n";
  for (std::size_t i = 0; i < rr.provenance.size(); ++i)
    prov += std::to_string(i) + "," + std::to_string(rr.provenance[i]) + "\n";
  write_file_atomic(o.out_events + ".prov", prov);

  std::cout << "wrote " << rr.events.events.size() << " events to " << o.out_events
            << ", " << rr.imu.size() << " imu samples to " << o.out_imu << "\n";
  return 0;
}

struct CompensateOpts {
  std::string events_path;
  std::string imu_path;
  std::string config_path;
  std::vector<std::string> sets;
  std::string out_events;
  std::string frames_dir;
  std::string report_path;
};

// Mean per-frame density of the raw stream sliced by the same ownership
// windows the compensated frames cover.
double raw_per_group_density(const EventStream& raw,
                             const std::vector<EventFrame>& frames) {
  if (frames.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const EventFrame& f = frames[i];
    const bool last = i + 1 == frames.size();
    const auto begin = std::lower_bound(
        raw.events.begin(), raw.events.end(), f.t_start,
        [](const Event& e, std::uint64_t t) { return e.t < t; });
    const auto end =
        last ? std::upper_bound(raw.events.begin(), raw.events.end(), f.t_end,
                                [](std::uint64_t t, const Event& e) { return t < e.t; })
             : std::lower_bound(raw.events.begin(), raw.events.end(), f.t_end,
                                [](const Event& e, std::uint64_t t) { return e.t < t; });
    const EventFrame rf = accumulate_frame(
        std::span<const Event>(&*raw.events.begin() + (begin - raw.events.begin()),
                               static_cast<std::size_t>(end - begin)),
        raw.width, raw.height, f.t_start, f.t_end);
    sum += frame_stats(rf).density;
  }
  return sum / static_cast<double>(frames.size());
}

double mean_frame_density(const std::vector<EventFrame>& frames) {
  if (frames.empty()) return 0.0;
  double sum = 0.0;
  for (const EventFrame& f : frames) sum += frame_stats(f).density;
  return sum / static_cast<double>(frames.size());
}

std::string compensation_report(const CompensateOpts& o, const Config& cfg,
                                const EventStream& raw, const ImuSequence& imu,
                                const CompensationResult& res) {
  std::string out = "# compensation report\n[config]\n";
  out += serialize_config(cfg);
  out += "[input]\n";
  out += "events = " + o.events_path + "\n";
  out += "imu = " + o.imu_path + "\n";
  out += "event_count = " + std::to_string(raw.events.size()) + "\n";
  out += "imu_samples = " + std::to_string(imu.size()) + "\n";
  out += "[groups]\n";
  out += "count = " + std::to_string(res.groups.groups.size()) + "\n";
  for (std::size_t i = 0; i < res.groups.groups.size(); ++i) {
    const Group& g = res.groups.groups[i];
    out += "group " + std::to_string(i) + " = kind=" + to_string(g.kind) +
           " first=" + std::to_string(g.first) + " last=" + std::to_string(g.last) +
           " t_start=" + std::to_string(g.t_start) +
           " t_end=" + std::to_string(g.t_end) +
           " n_imu=" + std::to_string(g.n_imu) +
           " gamma=" + fmt_metric(g.gamma) +
           " axis=" + to_string(res.groups.dominant_axis[i]) + "\n";
  }
  out += "[output]\n";
  out += "kept = " + std::to_string(res.stream.events.size()) + "\n";
  out += "dropped = " + std::to_string(res.dropped) + "\n";
  out += "frames = " + std::to_string(res.frames.size()) + "\n";

  const double raw_density = pixel_event_density(raw);
  const double comp_density = pixel_event_density(res.stream);
  // An empty stream compensates to an empty stream; call that ratio 1.
  const double ratio = raw_density > 0.0 ? comp_density / raw_density : 1.0;
  out += "[density]\n";
  out += "raw = " + fmt_metric(raw_density) + "\n";
  out += "compensated = " + fmt_metric(comp_density) + "\n";
  out += "ratio = " + fmt_metric(ratio) + "\n";
  out += "per_group_raw_mean = " + fmt_metric(raw_per_group_density(raw, res.frames)) +
         "\n";
  out += "per_group_compensated_mean = " + fmt_metric(mean_frame_density(res.frames)) +
         "\n";
  return out;
}

int do_compensate(const CompensateOpts& o) {
  const Config cfg = load_with_overrides(o.config_path, o.sets);
  const EventStream raw = load_events_for_camera(o.events_path, cfg.camera);
  const ImuSequence imu = read_imu_csv(o.imu_path);

  const CompensationResult res = compensate_stream(raw, imu, cfg.camera, cfg.comp);
  write_events(res.stream, o.out_events);

  if (!o.frames_dir.empty()) {
    fs::create_directories(o.frames_dir);
    for (std::size_t i = 0; i < res.frames.size(); ++i)
      export_frame_ppm(res.frames[i],
                       (fs::path(o.frames_dir) / frame_filename(i, res.frames[i]))
                           .string());
  }
  if (!o.report_path.empty())
    write_file_atomic(o.report_path, compensation_report(o, cfg, raw, imu, res));

  std::cout << "kept " << res.stream.events.size() << " of " << raw.events.size()
            << " events (" << res.dropped << " dropped), "
            << res.groups.groups.size() << " groups\n";
  return 0;
}

struct SampleOpts {
  std::string frames_dir;
  int k = 0;
  std::string config_path;
  std::vector<std::string> sets;
  std::string out_path;
};

struct FrameFile {
  long long index = 0;
  std::uint64_t t_start = 0;
  std::uint64_t t_end = 0;
  std::string path;
};

std::vector<FrameFile> scan_frames_dir(const std::string& dir) {
  std::vector<FrameFile> files;
  if (!fs::is_directory(dir))
    fail(ErrorKind::ParseError, "'" + dir + "' is not a directory");
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (!name.starts_with("frame_") || !name.ends_with(".ppm")) continue;
    const std::string body = name.substr(6, name.size() - 6 - 4);
    unsigned long long fields[3];
    int parsed = 0;
    std::size_t pos = 0;
    for (int f = 0; f < 3 && pos <= body.size(); ++f) {
      std::size_t next = body.find('_', pos);
      if (next == std::string::npos) next = body.size();
      const std::string tok = body.substr(pos, next - pos);
      if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
        break;
      fields[f] = std::stoull(tok);
      ++parsed;
      pos = next + 1;
    }
    if (parsed != 3 || pos <= body.size()) continue;  // not one of our frames
    FrameFile ff;
    ff.index = static_cast<long long>(fields[0]);
    ff.t_start = fields[1];
    ff.t_end = fields[2];
    ff.path = entry.path().string();
    files.push_back(ff);
  }
  std::sort(files.begin(), files.end(),
            [](const FrameFile& a, const FrameFile& b) { return a.index < b.index; });
  for (std::size_t i = 1; i < files.size(); ++i)
    if (files[i].index == files[i - 1].index)
      fail(ErrorKind::InvariantViolation,
           "duplicate frame index " + std::to_string(files[i].index) + " in '" + dir +
               "'");
  return files;
}

int do_sample(const SampleOpts& o) {
  Config cfg = load_with_overrides(o.config_path, o.sets);
  cfg.igs.k = o.k;
  validate_config(cfg.igs);

  const std::vector<FrameFile> files = scan_frames_dir(o.frames_dir);
  std::vector<EventFrame> frames;
  frames.reserve(files.size());
  for (const FrameFile& ff : files) {
    EventFrame f = read_frame_ppm(ff.path);
    f.t_start = ff.t_start;
    f.t_end = ff.t_end;
    frames.push_back(std::move(f));
  }

  const std::vector<int> picks = igs_select(frames, cfg.igs);
  std::string out;
  for (int p : picks)
    out += std::to_string(files[static_cast<std::size_t>(p)].index) + "\n";
  write_file_atomic(o.out_path, out);

  std::cout << "selected " << picks.size() << " of " << frames.size() << " frames\n";
  return 0;
}

struct EvalOpts {
  std::string raw_path;
  std::string compensated_path;
  std::string axis = "unspecified";
  std::string report_path;
};

int do_eval(const EvalOpts& o) {
  DensityReport report;
  report.axis = o.axis;
  report.raw = pixel_event_density(read_events(o.raw_path));
  report.compensated = pixel_event_density(read_events(o.compensated_path));
  report.ratio = report.raw > 0.0 ? report.compensated / report.raw : 1.0;

  std::string text = "# density report\n";
  text += "axis = " + report.axis + "\n";
  text += "raw = " + fmt_metric(report.raw) + "\n";
  text += "compensated = " + fmt_metric(report.compensated) + "\n";
  text += "ratio = " + fmt_metric(report.ratio) + "\n";

  if (o.report_path.empty())
    std::cout << text;
  else
    write_file_atomic(o.report_path, text);
  return 0;
}

struct BenchOpts {
  std::string events_path;
  std::string imu_path;
  std::string config_path;
  std::vector<std::string> sets;
  int reps = 3;
};

int do_bench(const BenchOpts& o) {
  const Config cfg = load_with_overrides(o.config_path, o.sets);
  const EventStream stream = load_events_for_camera(o.events_path, cfg.camera);
  const ImuSequence imu = read_imu_csv(o.imu_path);

  const BenchReport r = bench_compensation(stream, imu, cfg.camera, cfg.comp, o.reps);
  std::cout << "# bench report\n";
  std::cout << "event_count = " << r.event_count << "\n";
  std::cout << "reps = " << r.reps << "\n";
  std::cout << "wall_time_us = " << fmt_metric(r.wall_time_us) << "\n";
  std::cout << "throughput_eps = " << fmt_metric(r.throughput_eps) << "\n";
  std::cout << "grouping_us = " << fmt_metric(r.grouping_us) << "\n";
  std::cout << "warping_us = " << fmt_metric(r.warping_us) << "\n";
  std::cout << "accumulation_us = " << fmt_metric(r.accumulation_us) << "\n";
  std::cout << "deterministic = " << (r.deterministic ? "true" : "false") << "\n";
  return 0;
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"IMU-driven stabilization for event-camera streams"};
  app.name("evstab");
  app.require_subcommand(1);

  SynthOpts synth_opts;
  CLI::App* synth_cmd =
      app.add_subcommand("synth", "render a synthetic event stream with its IMU");
  synth_cmd->add_option("--profile", synth_opts.profile,
                        "motion profile: sinusoid, ramp, or constant")
      ->required();
  synth_cmd->add_option("--axis", synth_opts.axis,
                        "rotation axis: x/pitch, y/yaw, or z/roll")
      ->required();
  synth_cmd->add_option("--amplitude", synth_opts.amplitude, "peak angle, rad")
      ->required();
  synth_cmd->add_option("--freq,--frequency", synth_opts.frequency,
                        "sinusoid frequency, Hz");
  synth_cmd->add_option("--duration", synth_opts.duration, "seconds")->required();
  synth_cmd->add_option("--imu-rate", synth_opts.imu_rate, "IMU sample rate, Hz");
  synth_cmd->add_option("--points", synth_opts.points, "scene points");
  synth_cmd->add_option("--margin", synth_opts.margin,
                        "rest-position distance from the sensor border, px");
  synth_cmd->add_option("--seed", synth_opts.seed, "scene seed");
  synth_cmd->add_option("--config", synth_opts.config_path, "config file")
      ->check(CLI::ExistingFile);
  synth_cmd->add_option("--set", synth_opts.sets, "config override key=value");
  synth_cmd->add_option("--out-events", synth_opts.out_events, "output events path")
      ->required();
  synth_cmd->add_option("--out-imu", synth_opts.out_imu, "output IMU CSV path")
      ->required();

  CompensateOpts comp_opts;
  CLI::App* comp_cmd =
      app.add_subcommand("compensate", "stabilize a stream against its IMU");
  comp_cmd->add_option("--events", comp_opts.events_path, "input events")
      ->required()
      ->check(CLI::ExistingFile);
  comp_cmd->add_option("--imu", comp_opts.imu_path, "input IMU CSV")
      ->required()
      ->check(CLI::ExistingFile);
  comp_cmd->add_option("--config", comp_opts.config_path, "config file")
      ->check(CLI::ExistingFile);
  comp_cmd->add_option("--set", comp_opts.sets, "config override key=value");
  comp_cmd->add_option("--out-events", comp_opts.out_events, "output events path")
      ->required();
  comp_cmd->add_option("--frames-dir", comp_opts.frames_dir,
                       "write one PPM frame per group here");
  comp_cmd->add_option("--report", comp_opts.report_path, "write a stats report here");

  SampleOpts sample_opts;
  CLI::App* sample_cmd =
      app.add_subcommand("sample", "pick keyframes from a frames directory");
  sample_cmd->add_option("--frames-dir", sample_opts.frames_dir, "frames directory")
      ->required();
  sample_cmd->add_option("--k", sample_opts.k, "number of keyframes")
      ->required()
      ->check(CLI::Range(1, std::numeric_limits<int>::max()));
  sample_cmd->add_option("--config", sample_opts.config_path, "config file")
      ->check(CLI::ExistingFile);
  sample_cmd->add_option("--set", sample_opts.sets, "config override key=value");
  sample_cmd->add_option("--out", sample_opts.out_path, "output index list path")
      ->required();

  EvalOpts eval_opts;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "compare raw and compensated densities");
  eval_cmd->add_option("--raw", eval_opts.raw_path, "raw events")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--compensated", eval_opts.compensated_path,
                       "compensated events")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--axis", eval_opts.axis, "label for the report");
  eval_cmd->add_option("--report", eval_opts.report_path,
                       "report path (stdout when omitted)");

  BenchOpts bench_opts;
  CLI::App* bench_cmd = app.add_subcommand("bench", "time the compensation pipeline");
  bench_cmd->add_option("--events", bench_opts.events_path, "input events")
      ->required()
      ->check(CLI::ExistingFile);
  bench_cmd->add_option("--imu", bench_opts.imu_path, "input IMU CSV")
      ->required()
      ->check(CLI::ExistingFile);
  bench_cmd->add_option("--config", bench_opts.config_path, "config file")
      ->check(CLI::ExistingFile);
  bench_cmd->add_option("--set", bench_opts.sets, "config override key=value");
  bench_cmd->add_option("--reps", bench_opts.reps, "repetitions")
      ->check(CLI::Range(1, std::numeric_limits<int>::max()));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: Usage: " << one_line(e.what()) << "\n";
    return 2;
  }

  try {
    if (synth_cmd->parsed()) return do_synth(synth_opts);
    if (comp_cmd->parsed()) return do_compensate(comp_opts);
    if (sample_cmd->parsed()) return do_sample(sample_opts);
    if (eval_cmd->parsed()) return do_eval(eval_opts);
    if (bench_cmd->parsed()) return do_bench(bench_opts);
  } catch (const Error& e) {
    std::cerr << "error: " << one_line(e.what()) << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: Internal: " << one_line(e.what()) << "\n";
    return 4;
  }
  return 0;
}

}  // namespace evstab
