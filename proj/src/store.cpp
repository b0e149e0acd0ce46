#include "presence/store.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "presence/error.hpp"
#include "presence/serialization.hpp"

namespace presence {

SessionKey key_of(const SessionRecord& record) {
  return {record.study_id, record.participant_id, record.revision};
}

SessionStore::SessionStore(std::filesystem::path path) : path_(std::move(path)) {
  std::ifstream in(path_);
  if (!in) return;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json doc;
    try {
      doc = Json::parse(line);
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::ParseError, path_.string() + ":" + std::to_string(line_no) +
                                             ": " + e.what());
    }
    auto record = record_from_json(doc);
    if (contains(key_of(record))) {
      throw Error(ErrorCode::DuplicateRecord,
                  path_.string() + ":" + std::to_string(line_no) + ": duplicate record " +
                      record.study_id + "/" + record.participant_id);
    }
    records_.push_back(std::move(record));
  }
}

bool SessionStore::contains(const SessionKey& key) const {
  return std::any_of(records_.begin(), records_.end(),
                     [&](const auto& r) { return key_of(r) == key; });
}

const SessionRecord& SessionStore::read(const SessionKey& key) const {
  for (const auto& r : records_) {
    if (key_of(r) == key) return r;
  }
  throw Error(ErrorCode::RecordNotFound,
              "no record " + key.study_id + "/" + key.participant_id + " revision " +
                  std::to_string(key.revision));
}

const SessionRecord& SessionStore::write(const SessionRecord& record) {
  if (record.study_id.empty() || record.participant_id.empty()) {
    throw Error(ErrorCode::InvalidConfig, "record key needs study_id and participant_id");
  }
  if (contains(key_of(record))) {
    throw Error(ErrorCode::DuplicateRecord,
                "duplicate-record " + record.study_id + "/" + record.participant_id +
                    " revision " + std::to_string(record.revision));
  }
  const Json doc = to_json(record);
  const std::string line = doc.dump() + "\n";
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  if (!out) throw Error(ErrorCode::IoError, "cannot append to " + path_.string());
  out << line;
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "append failed for " + path_.string());
  records_.push_back(record_from_json(doc));
  return records_.back();
}

const SessionRecord& SessionStore::write_revision(SessionRecord record) {
  int next = 0;
  for (const auto& r : records_) {
    if (r.study_id == record.study_id && r.participant_id == record.participant_id) {
      next = std::max(next, r.revision + 1);
    }
  }
  record.revision = next;
  return write(record);
}

std::vector<SessionRecord> SessionStore::latest() const {
  std::map<std::pair<std::string, std::string>, const SessionRecord*> best;
  for (const auto& r : records_) {
    auto& slot = best[{r.study_id, r.participant_id}];
    if (!slot || r.revision > slot->revision) slot = &r;
  }
  std::vector<SessionRecord> out;
  for (const auto& [key, r] : best) out.push_back(*r);
  return out;
}

std::string to_ndjson(const std::vector<SessionRecord>& records) {
  std::string out;
  for (const auto& r : records) out += to_json(r).dump() + "\n";
  return out;
}

}  // namespace presence
