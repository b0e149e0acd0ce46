#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "presence/analysis.hpp"

namespace presence {

struct SessionKey {
  std::string study_id;
  std::string participant_id;
  int revision = 0;

  friend auto operator<=>(const SessionKey&, const SessionKey&) = default;
};

SessionKey key_of(const SessionRecord& record);

// Append-only session log: one JSON record per line. Records are immutable;
// a correction is written as a new revision of the same participant.
//
// One writer at a time; readers may open the file concurrently since every
// write is a single appended line.
class SessionStore {
 public:
  /// Opens (and loads) the log at `path`; a missing file is an empty store.
  explicit SessionStore(std::filesystem::path path);

  const std::filesystem::path& path() const { return path_; }
  const std::vector<SessionRecord>& records() const { return records_; }
  bool contains(const SessionKey& key) const;

  /// Throws Error(RecordNotFound).
  const SessionRecord& read(const SessionKey& key) const;

  /// Appends the canonical form of `record` and returns it. Throws
  /// Error(DuplicateRecord) if the key is already present.
  const SessionRecord& write(const SessionRecord& record);

  /// Writes `record` as the next revision of its participant.
  const SessionRecord& write_revision(SessionRecord record);

  /// Highest revision per (study, participant), in key order.
  std::vector<SessionRecord> latest() const;

 private:
  std::filesystem::path path_;
  std::vector<SessionRecord> records_;
};

/// Serializes records as NDJSON text (one canonical line each).
std::string to_ndjson(const std::vector<SessionRecord>& records);

}  // namespace presence
