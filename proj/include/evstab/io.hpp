#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "evstab/core.hpp"
#include "evstab/frame.hpp"

namespace evstab {

// Event CSV: header "t,x,y,p", one event per line.
// Event binary: magic "EVS1", then version=1 u32, width u32, height u32,
// count u64 (all little-endian, 24-byte header), then count packed 13-byte
// records {t u64, x u16, y u16, p i8}.
// IMU CSV: header "t,wx,wy,wz,ax,ay,az"; values round-trip to 1e-9 relative.

// CSV carries no sensor size, so the result gets the tight bounding
// dimensions (max coordinate + 1, at least 1x1). Callers that know the
// sensor should widen the stream before compensating.
EventStream parse_events_csv(std::string_view text);
EventStream parse_events_bin(std::span<const std::uint8_t> bytes);
std::string format_events_csv(const EventStream& stream);
std::vector<std::uint8_t> format_events_bin(const EventStream& stream);

EventStream read_events_csv(const std::string& path);
EventStream read_events_bin(const std::string& path);
void write_events_csv(const EventStream& stream, const std::string& path);
void write_events_bin(const EventStream& stream, const std::string& path);

// Dispatch on a ".bin" extension; anything else is CSV.
EventStream read_events(const std::string& path);
void write_events(const EventStream& stream, const std::string& path);

ImuSequence parse_imu_csv(std::string_view text);
std::string format_imu_csv(const ImuSequence& seq);
ImuSequence read_imu_csv(const std::string& path);
void write_imu_csv(const ImuSequence& seq, const std::string& path);

// Binary PPM (P6, maxval 255): R and G are the positive and negative counts
// scaled by 255 / max count, B is the mean normalized timestamp times 255.
void export_frame_ppm(const EventFrame& frame, const std::string& path);

// Inverse of export_frame_ppm up to the 8-bit quantization: R and G come back
// as count surrogates, B as the mean timestamp. Good enough for scoring.
EventFrame read_frame_ppm(const std::string& path);

struct Config {
  CompensationConfig comp;
  IgsConfig igs;
  CameraModel camera;
  double noise_rate = 0.0;  // synthetic background events per second
};

// "key = value" lines, '#' comments, unknown keys rejected. Missing keys keep
// defaults; cx/cy default to the sensor center. Validates every invariant.
// Errors: UnknownKey, TypeMismatch, InvariantViolation, NonOrthonormalRotation.
Config parse_config(std::string_view text);
Config load_config(const std::string& path);

// One "key=value" override, applied after the file.
void apply_override(Config& cfg, const std::string& assignment);

// Full key set in a fixed order; a serialized config parses back to the
// same values (doubles print with 15 significant digits).
std::string serialize_config(const Config& cfg);

// All file writes go through a temp-then-rename so readers never observe a
// partial file.
void write_file_atomic(const std::string& path, std::string_view bytes);

std::string read_file(const std::string& path);

}  // namespace evstab
