#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sawlab/command.hpp"
#include "sawlab/observation.hpp"

namespace sawlab {

/// A disturbance noted in the log on the step it starts.
struct PushMarker {
  int axis = 0;           // 0 = x, 1 = y
  double force = 0.0;     // N, signed
  double duration = 0.0;  // s
  double start_time = 0.0;
  double height = 0.0;    // application height above base origin, m
};

struct LogRecord {
  double t = 0.0;
  Observation obs;
  Command cmd;
  std::map<std::string, double> rewards;  // weighted terms plus "total"
  std::optional<PushMarker> push;
  bool fall = false;
  bool done = false;
};

/// Time-indexed trajectory of one episode, persisted as line-delimited JSON:
/// a header line (dt, model hash, config hash, schema version) followed by one
/// record per control step. Doubles are written in shortest round-trip form,
/// so write -> read -> write is byte-identical.
///
/// Invariants checked by validate(): records strictly time-ordered with
/// constant spacing dt, the fall flag is monotone, and exactly the final
/// record is marked done.
struct EpisodeLog {
  static constexpr int kSchemaVersion = 1;

  double dt = 0.02;
  std::string model_hash;
  std::string config_hash;
  std::vector<LogRecord> records;

  double duration() const { return records.empty() ? 0.0 : records.back().t; }

  void validate() const;  // throws SchemaError

  void save(std::ostream& out) const;
  void save_file(const std::string& path) const;
  static EpisodeLog load(std::istream& in);
  static EpisodeLog load_file(const std::string& path);
};

bool operator==(const LogRecord& a, const LogRecord& b);
bool operator==(const EpisodeLog& a, const EpisodeLog& b);

}  // namespace sawlab
