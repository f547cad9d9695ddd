#include "evstab/io.hpp"

#include <algorithm>
#include <array>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

namespace evstab {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.15g", v);
  return buf;
}

std::string line_tag(std::size_t line) { return "line " + std::to_string(line); }

template <typename T>
T parse_integer(std::string_view token, std::size_t line, const char* what) {
  T value{};
  const char* begin = token.data();
  const char* end = begin + token.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end)
    fail(ErrorKind::ParseError,
         line_tag(line) + ": bad " + what + " '" + std::string(token) + "'");
  return value;
}

double parse_real(std::string_view token, std::size_t line, const char* what) {
  double value{};
  const char* begin = token.data();
  const char* end = begin + token.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value))
    fail(ErrorKind::ParseError,
         line_tag(line) + ": bad " + what + " '" + std::string(token) + "'");
  return value;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = s.find(sep, pos);
    if (next == std::string_view::npos) {
      out.push_back(s.substr(pos));
      return out;
    }
    out.push_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

// Iterates lines, stripping one trailing '\r' so CRLF input parses too.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t next = text.find('\n', pos);
    if (next == std::string_view::npos) next = text.size();
    std::string_view row = text.substr(pos, next - pos);
    if (!row.empty() && row.back() == '\r') row.remove_suffix(1);
    ++line;
    if (!(row.empty() && next == text.size())) fn(row, line);
    pos = next + 1;
  }
}

void put_le16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_le32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_le64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint16_t get_le16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_le32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint64_t get_le64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

constexpr std::size_t kBinHeaderSize = 24;
constexpr std::size_t kBinRecordSize = 13;
constexpr char kBinMagic[4] = {'E', 'V', 'S', '1'};

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

EventStream parse_events_csv(std::string_view text) {
  EventStream stream;
  bool saw_header = false;
  std::int32_t max_x = 0, max_y = 0;
  for_each_line(text, [&](std::string_view row, std::size_t line) {
    if (!saw_header) {
      if (row != "t,x,y,p")
        fail(ErrorKind::ParseError, "line 1: expected header 't,x,y,p'");
      saw_header = true;
      return;
    }
    if (row.empty()) return;
    const auto fields = split(row, ',');
    if (fields.size() != 4)
      fail(ErrorKind::ParseError, line_tag(line) + ": expected 4 fields, got " +
                                      std::to_string(fields.size()));
    Event e;
    e.t = parse_integer<std::uint64_t>(fields[0], line, "timestamp");
    e.x = parse_integer<std::int32_t>(fields[1], line, "x");
    e.y = parse_integer<std::int32_t>(fields[2], line, "y");
    const int p = parse_integer<int>(fields[3], line, "polarity");
    if (p != 1 && p != -1)
      fail(ErrorKind::ParseError,
           line_tag(line) + ": polarity must be 1 or -1, got " + std::to_string(p));
    e.p = static_cast<std::int8_t>(p);
    max_x = std::max(max_x, e.x);
    max_y = std::max(max_y, e.y);
    stream.events.push_back(e);
  });
  if (!saw_header) fail(ErrorKind::ParseError, "empty input, expected 't,x,y,p' header");
  stream.width = max_x + 1;
  stream.height = max_y + 1;
  validate_stream(stream);
  return stream;
}

EventStream parse_events_bin(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kBinHeaderSize)
    fail(ErrorKind::TruncatedPayload, "header needs 24 bytes, got " +
                                          std::to_string(bytes.size()));
  if (std::memcmp(bytes.data(), kBinMagic, 4) != 0)
    fail(ErrorKind::BadMagic, "expected 'EVS1'");
  const std::uint32_t version = get_le32(bytes.data() + 4);
  if (version != 1)
    fail(ErrorKind::BadVersion, "expected version 1, got " + std::to_string(version));
  const std::uint32_t width = get_le32(bytes.data() + 8);
  const std::uint32_t height = get_le32(bytes.data() + 12);
  const std::uint64_t count = get_le64(bytes.data() + 16);

  const std::uint64_t available = bytes.size() - kBinHeaderSize;
  if (count > available / kBinRecordSize)
    fail(ErrorKind::TruncatedPayload,
         "payload holds " + std::to_string(available / kBinRecordSize) +
             " records, header claims " + std::to_string(count));
  if (count * kBinRecordSize != available)
    fail(ErrorKind::ParseError,
         std::to_string(available - count * kBinRecordSize) +
             " trailing bytes after the last record");

  EventStream stream;
  stream.width = static_cast<std::int32_t>(width);
  stream.height = static_cast<std::int32_t>(height);
  stream.events.reserve(count);
  const std::uint8_t* p = bytes.data() + kBinHeaderSize;
  for (std::uint64_t i = 0; i < count; ++i, p += kBinRecordSize) {
    Event e;
    e.t = get_le64(p);
    e.x = get_le16(p + 8);
    e.y = get_le16(p + 10);
    e.p = static_cast<std::int8_t>(p[12]);
    stream.events.push_back(e);
  }
  validate_stream(stream);
  return stream;
}

std::string format_events_csv(const EventStream& stream) {
  validate_stream(stream);
  std::string out = "t,x,y,p\n";
  for (const Event& e : stream.events) {
    out += std::to_string(e.t);
    out += ',';
    out += std::to_string(e.x);
    out += ',';
    out += std::to_string(e.y);
    out += ',';
    out += std::to_string(static_cast<int>(e.p));
    out += '\n';
  }
  return out;
}

std::vector<std::uint8_t> format_events_bin(const EventStream& stream) {
  validate_stream(stream);
  std::vector<std::uint8_t> out;
  out.reserve(kBinHeaderSize + kBinRecordSize * stream.events.size());
  out.insert(out.end(), kBinMagic, kBinMagic + 4);
  put_le32(out, 1);
  put_le32(out, static_cast<std::uint32_t>(stream.width));
  put_le32(out, static_cast<std::uint32_t>(stream.height));
  put_le64(out, stream.events.size());
  for (const Event& e : stream.events) {
    if (e.x > 0xffff || e.y > 0xffff)
      fail(ErrorKind::CoordinateOverflow,
           "event at (" + std::to_string(e.x) + "," + std::to_string(e.y) +
               ") does not fit 16-bit storage");
    put_le64(out, e.t);
    put_le16(out, static_cast<std::uint16_t>(e.x));
    put_le16(out, static_cast<std::uint16_t>(e.y));
    out.push_back(static_cast<std::uint8_t>(e.p));
  }
  return out;
}

EventStream read_events_csv(const std::string& path) {
  return parse_events_csv(read_file(path));
}

EventStream read_events_bin(const std::string& path) {
  const std::string bytes = read_file(path);
  return parse_events_bin(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
}

void write_events_csv(const EventStream& stream, const std::string& path) {
  write_file_atomic(path, format_events_csv(stream));
}

void write_events_bin(const EventStream& stream, const std::string& path) {
  const auto bytes = format_events_bin(stream);
  write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                           bytes.size()));
}

EventStream read_events(const std::string& path) {
  return ends_with(path, ".bin") ? read_events_bin(path) : read_events_csv(path);
}

void write_events(const EventStream& stream, const std::string& path) {
  if (ends_with(path, ".bin"))
    write_events_bin(stream, path);
  else
    write_events_csv(stream, path);
}

ImuSequence parse_imu_csv(std::string_view text) {
  ImuSequence seq;
  bool saw_header = false;
  for_each_line(text, [&](std::string_view row, std::size_t line) {
    if (!saw_header) {
      if (row != "t,wx,wy,wz,ax,ay,az")
        fail(ErrorKind::ParseError, "line 1: expected header 't,wx,wy,wz,ax,ay,az'");
      saw_header = true;
      return;
    }
    if (row.empty()) return;
    const auto fields = split(row, ',');
    if (fields.size() != 7)
      fail(ErrorKind::ParseError, line_tag(line) + ": expected 7 fields, got " +
                                      std::to_string(fields.size()));
    ImuSample s;
    s.t = parse_integer<std::uint64_t>(fields[0], line, "timestamp");
    for (int i = 0; i < 3; ++i) {
      s.omega[i] = parse_real(fields[static_cast<std::size_t>(1 + i)], line, "rate");
      s.accel[i] = parse_real(fields[static_cast<std::size_t>(4 + i)], line,
                              "acceleration");
    }
    if (!seq.samples.empty() && s.t <= seq.samples.back().t)
      fail(ErrorKind::NonMonotonicTimestamps,
           line_tag(line) + ": timestamp " + std::to_string(s.t) +
               " does not increase past " + std::to_string(seq.samples.back().t));
    seq.samples.push_back(s);
  });
  if (!saw_header)
    fail(ErrorKind::ParseError, "empty input, expected 't,wx,wy,wz,ax,ay,az' header");
  return seq;
}

std::string format_imu_csv(const ImuSequence& seq) {
  validate_imu(seq);
  std::string out = "t,wx,wy,wz,ax,ay,az\n";
  for (const ImuSample& s : seq.samples) {
    out += std::to_string(s.t);
    for (int i = 0; i < 3; ++i) out += ',' + fmt_double(s.omega[i]);
    for (int i = 0; i < 3; ++i) out += ',' + fmt_double(s.accel[i]);
    out += '\n';
  }
  return out;
}

ImuSequence read_imu_csv(const std::string& path) {
  return parse_imu_csv(read_file(path));
}

void write_imu_csv(const ImuSequence& seq, const std::string& path) {
  write_file_atomic(path, format_imu_csv(seq));
}

void export_frame_ppm(const EventFrame& frame, const std::string& path) {
  const int max_count = std::max(frame.pos_count.maxCoeff(), frame.neg_count.maxCoeff());
  const double scale = max_count > 0 ? 255.0 / max_count : 0.0;
  std::string out = "P6\n" + std::to_string(frame.width) + " " +
                    std::to_string(frame.height) + "\n255\n";
  out.reserve(out.size() +
              static_cast<std::size_t>(frame.width) * frame.height * 3);
  for (int y = 0; y < frame.height; ++y) {
    for (int x = 0; x < frame.width; ++x) {
      const long r = std::lround(frame.pos_count(y, x) * scale);
      const long g = std::lround(frame.neg_count(y, x) * scale);
      const long b = std::lround(frame.mean_ts(y, x) * 255.0);
      out.push_back(static_cast<char>(std::clamp(r, 0L, 255L)));
      out.push_back(static_cast<char>(std::clamp(g, 0L, 255L)));
      out.push_back(static_cast<char>(std::clamp(b, 0L, 255L)));
    }
  }
  write_file_atomic(path, out);
}

EventFrame read_frame_ppm(const std::string& path) {
  const std::string bytes = read_file(path);
  std::size_t pos = 0;

  auto next_token = [&]() -> std::string {
    while (pos < bytes.size()) {
      const char c = bytes[pos];
      if (c == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        ++pos;
      } else {
        break;
      }
    }
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos])))
      ++pos;
    if (start == pos) fail(ErrorKind::TruncatedPayload, "missing header token");
    return bytes.substr(start, pos - start);
  };

  if (next_token() != "P6") fail(ErrorKind::BadMagic, "expected 'P6'");
  const int width = parse_integer<int>(next_token(), 1, "width");
  const int height = parse_integer<int>(next_token(), 1, "height");
  const int maxval = parse_integer<int>(next_token(), 1, "maxval");
  if (maxval != 255)
    fail(ErrorKind::ParseError, "unsupported maxval " + std::to_string(maxval));
  if (width <= 0 || height <= 0)
    fail(ErrorKind::ParseError, "non-positive image dimensions");
  ++pos;  // the single whitespace byte after the header

  const std::size_t need = static_cast<std::size_t>(width) * height * 3;
  if (bytes.size() < pos || bytes.size() - pos < need)
    fail(ErrorKind::TruncatedPayload,
         "pixel payload needs " + std::to_string(need) + " bytes, got " +
             std::to_string(bytes.size() - std::min(pos, bytes.size())));

  EventFrame frame;
  frame.width = width;
  frame.height = height;
  frame.pos_count = Eigen::ArrayXXi::Zero(height, width);
  frame.neg_count = Eigen::ArrayXXi::Zero(height, width);
  frame.mean_ts = Eigen::ArrayXXd::Zero(height, width);
  const auto* p = reinterpret_cast<const std::uint8_t*>(bytes.data()) + pos;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x, p += 3) {
      frame.pos_count(y, x) = p[0];
      frame.neg_count(y, x) = p[1];
      frame.mean_ts(y, x) = p[2] / 255.0;
    }
  }
  return frame;
}

namespace {

bool parse_bool(const std::string& key, std::string_view value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  fail(ErrorKind::TypeMismatch, key + ": expected a boolean, got '" +
                                    std::string(value) + "'");
}

double config_real(const std::string& key, std::string_view value) {
  double v{};
  const char* begin = value.data();
  const char* end = begin + value.size();
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v))
    fail(ErrorKind::TypeMismatch,
         key + ": expected a number, got '" + std::string(value) + "'");
  return v;
}

int config_int(const std::string& key, std::string_view value) {
  int v{};
  const char* begin = value.data();
  const char* end = begin + value.size();
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc{} || ptr != end)
    fail(ErrorKind::TypeMismatch,
         key + ": expected an integer, got '" + std::string(value) + "'");
  return v;
}

void apply_key(Config& cfg, const std::string& key, std::string_view value,
               bool& cx_seen, bool& cy_seen) {
  auto& comp = cfg.comp;
  auto& igs = cfg.igs;
  auto& cam = cfg.camera;
  if (key == "gamma_min") comp.gamma_min = config_real(key, value);
  else if (key == "gamma_max") comp.gamma_max = config_real(key, value);
  else if (key == "a") comp.a = config_real(key, value);
  else if (key == "b") comp.b = config_real(key, value);
  else if (key == "t_stable") comp.t_stable = config_real(key, value);
  else if (key == "n_min") comp.n_min = config_int(key, value);
  else if (key == "n_max") comp.n_max = config_int(key, value);
  else if (key == "constant_depth") comp.constant_depth = config_real(key, value);
  else if (key == "beta_axes") {
    if (value == "phi") comp.beta_axes = BetaAxes::Phi;
    else if (value == "psi") comp.beta_axes = BetaAxes::Psi;
    else fail(ErrorKind::TypeMismatch,
              key + ": expected phi or psi, got '" + std::string(value) + "'");
  } else if (key == "warp_reference") {
    if (value == "start") comp.warp_reference = WarpReference::Start;
    else if (value == "mid") comp.warp_reference = WarpReference::Mid;
    else if (value == "end") comp.warp_reference = WarpReference::End;
    else fail(ErrorKind::TypeMismatch,
              key + ": expected start, mid, or end, got '" + std::string(value) + "'");
  } else if (key == "apply_scaling") comp.apply_scaling = parse_bool(key, value);
  else if (key == "k") igs.k = config_int(key, value);
  else if (key == "w_rel") igs.w_rel = config_real(key, value);
  else if (key == "w_q") igs.w_q = config_real(key, value);
  else if (key == "w_u") igs.w_u = config_real(key, value);
  else if (key == "w_d") igs.w_d = config_real(key, value);
  else if (key == "tau") igs.tau = config_real(key, value);
  else if (key == "hist_bins") igs.hist_bins = config_int(key, value);
  else if (key == "focal_length") cam.focal_length = config_real(key, value);
  else if (key == "pixel_pitch") cam.pixel_pitch = config_real(key, value);
  else if (key == "cx") { cam.cx = config_real(key, value); cx_seen = true; }
  else if (key == "cy") { cam.cy = config_real(key, value); cy_seen = true; }
  else if (key == "width") cam.width = config_int(key, value);
  else if (key == "height") cam.height = config_int(key, value);
  else if (key == "r_ci") {
    const auto fields = split(value, ',');
    if (fields.size() != 9)
      fail(ErrorKind::TypeMismatch, "r_ci: expected 9 comma-separated values, got " +
                                        std::to_string(fields.size()));
    for (int i = 0; i < 9; ++i)
      cam.r_ci(i / 3, i % 3) = config_real(key, trim(fields[static_cast<std::size_t>(i)]));
  } else if (key == "noise_rate") cfg.noise_rate = config_real(key, value);
  else fail(ErrorKind::UnknownKey, "'" + key + "'");
}

}  // namespace

Config parse_config(std::string_view text) {
  Config cfg;
  bool cx_seen = false, cy_seen = false;
  for_each_line(text, [&](std::string_view row, std::size_t line) {
    const std::size_t hash = row.find('#');
    if (hash != std::string_view::npos) row = row.substr(0, hash);
    row = trim(row);
    if (row.empty()) return;
    const std::size_t eq = row.find('=');
    if (eq == std::string_view::npos)
      fail(ErrorKind::ParseError, line_tag(line) + ": expected 'key = value'");
    const std::string key(trim(row.substr(0, eq)));
    const std::string_view value = trim(row.substr(eq + 1));
    apply_key(cfg, key, value, cx_seen, cy_seen);
  });
  // The principal point tracks the sensor center unless set explicitly.
  if (!cx_seen) cfg.camera.cx = cfg.camera.width / 2.0;
  if (!cy_seen) cfg.camera.cy = cfg.camera.height / 2.0;
  validate_config(cfg.comp);
  validate_config(cfg.igs);
  validate_camera(cfg.camera);
  if (cfg.noise_rate < 0.0)
    fail(ErrorKind::InvariantViolation, "noise_rate must be >= 0");
  return cfg;
}

Config load_config(const std::string& path) { return parse_config(read_file(path)); }

void apply_override(Config& cfg, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos)
    fail(ErrorKind::ParseError, "override '" + assignment + "' needs key=value");
  bool cx_seen = true, cy_seen = true;  // overrides never re-derive the center
  apply_key(cfg, std::string(trim(std::string_view(assignment).substr(0, eq))),
            trim(std::string_view(assignment).substr(eq + 1)), cx_seen, cy_seen);
  validate_config(cfg.comp);
  validate_config(cfg.igs);
  validate_camera(cfg.camera);
  if (cfg.noise_rate < 0.0)
    fail(ErrorKind::InvariantViolation, "noise_rate must be >= 0");
}

std::string serialize_config(const Config& cfg) {
  std::string out;
  auto put = [&](const char* key, const std::string& value) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  };
  put("gamma_min", fmt_double(cfg.comp.gamma_min));
  put("gamma_max", fmt_double(cfg.comp.gamma_max));
  put("a", fmt_double(cfg.comp.a));
  put("b", fmt_double(cfg.comp.b));
  put("t_stable", fmt_double(cfg.comp.t_stable));
  put("n_min", std::to_string(cfg.comp.n_min));
  put("n_max", std::to_string(cfg.comp.n_max));
  put("constant_depth", fmt_double(cfg.comp.constant_depth));
  put("beta_axes", cfg.comp.beta_axes == BetaAxes::Phi ? "phi" : "psi");
  put("warp_reference", cfg.comp.warp_reference == WarpReference::Start ? "start"
                        : cfg.comp.warp_reference == WarpReference::Mid ? "mid"
                                                                        : "end");
  put("apply_scaling", cfg.comp.apply_scaling ? "true" : "false");
  put("k", std::to_string(cfg.igs.k));
  put("w_rel", fmt_double(cfg.igs.w_rel));
  put("w_q", fmt_double(cfg.igs.w_q));
  put("w_u", fmt_double(cfg.igs.w_u));
  put("w_d", fmt_double(cfg.igs.w_d));
  put("tau", fmt_double(cfg.igs.tau));
  put("hist_bins", std::to_string(cfg.igs.hist_bins));
  put("focal_length", fmt_double(cfg.camera.focal_length));
  put("pixel_pitch", fmt_double(cfg.camera.pixel_pitch));
  put("cx", fmt_double(cfg.camera.cx));
  put("cy", fmt_double(cfg.camera.cy));
  put("width", std::to_string(cfg.camera.width));
  put("height", std::to_string(cfg.camera.height));
  std::string r;
  for (int i = 0; i < 9; ++i) {
    if (i) r += ',';
    r += fmt_double(cfg.camera.r_ci(i / 3, i % 3));
  }
  put("r_ci", r);
  put("noise_rate", fmt_double(cfg.noise_rate));
  return out;
}

void write_file_atomic(const std::string& path, std::string_view bytes) {
  namespace fs = std::filesystem;
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::ParseError, "cannot open '" + tmp + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorKind::ParseError, "short write to '" + tmp + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) fail(ErrorKind::ParseError, "cannot rename '" + tmp + "' to '" + path + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::ParseError, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) fail(ErrorKind::ParseError, "cannot read '" + path + "'");
  return buf.str();
}

}  // namespace evstab
