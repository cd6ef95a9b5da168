#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "gibbsperc/geometry.hpp"

namespace gibbsperc::cli {

using Row = std::vector<std::string>;

/// Shortest decimal text that reads back to the same double.
std::string format_double(double x);

/// One RFC-4180 record terminated by CRLF; fields holding commas, quotes or
/// line breaks are quoted with inner quotes doubled.
std::string csv_record(const Row& fields);

/// Parses RFC-4180 text. Throws std::runtime_error on an unterminated quote or
/// a record whose field count differs from the first one.
std::vector<Row> parse_csv(std::string_view text);

/// Append-only CSV file: the header is written on open (truncating any old
/// file) and every append reaches the disk before returning.
class DurableCsv {
public:
  DurableCsv(const std::filesystem::path& path, const Row& header);
  ~DurableCsv();
  DurableCsv(const DurableCsv&) = delete;
  DurableCsv& operator=(const DurableCsv&) = delete;

  void append(const Row& fields);

private:
  void write_all(const std::string& text);

  std::filesystem::path path_;
  int fd_ = -1;
};

/// Writes to a sibling temporary file, syncs it and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view text);
void write_json_atomic(const std::filesystem::path& path, const nlohmann::json& j);

std::string read_file(const std::filesystem::path& path);

std::string sha256_hex(std::string_view data);

/// Current UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_timestamp();

std::string code_version();

/// Run provenance: the canonical config, its hash and the seed of every task.
class Manifest {
public:
  Manifest(std::string verb, const nlohmann::json& canonical_config,
           std::filesystem::path path);

  const std::string& hash() const { return hash_; }
  void add_task(nlohmann::json task);
  void set_result(nlohmann::json result);
  void add_file(const std::filesystem::path& file);
  /// Rewrites the manifest; `finished` stamps the end time.
  void save(bool finished = false);

private:
  std::filesystem::path path_;
  std::string hash_;
  nlohmann::json doc_;
};

/// CSV point list (x1..xd per row) plus a JSON sidecar next to it.
void write_configuration(const std::filesystem::path& csv_path, const Configuration& config,
                         const nlohmann::json& sidecar);

}  // namespace gibbsperc::cli
