#include "cli/io.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>

#ifndef GIBBSPERC_VERSION
#define GIBBSPERC_VERSION "unknown"
#endif

namespace gibbsperc::cli {
namespace {

[[noreturn]] void io_error(const std::string& what, const std::filesystem::path& path) {
  throw std::runtime_error(what + " '" + path.string() + "': " + std::strerror(errno));
}

void write_fd(int fd, std::string_view text, const std::filesystem::path& path) {
  while (!text.empty()) {
    ssize_t n = ::write(fd, text.data(), text.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      io_error("write failed for", path);
    }
    text.remove_prefix(static_cast<std::size_t>(n));
  }
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, end);
}

std::string csv_record(const Row& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    const auto& f = fields[i];
    if (f.find_first_of(",\"\r\n") == std::string::npos) {
      out += f;
      continue;
    }
    out += '"';
    for (char ch : f) {
      if (ch == '"') out += '"';
      out += ch;
    }
    out += '"';
  }
  out += "\r\n";
  return out;
}

std::vector<Row> parse_csv(std::string_view text) {
  std::vector<Row> rows;
  Row row;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t i = 0;
  auto end_record = [&] {
    row.push_back(std::move(field));
    field.clear();
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::runtime_error("record " + std::to_string(rows.size() + 1) + " has " +
                               std::to_string(row.size()) + " fields, expected " +
                               std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
    row.clear();
    field_started = false;
  };
  while (i < text.size()) {
    char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          i += 2;
          continue;
        }
        quoted = false;
      } else {
        field += ch;
      }
      ++i;
      continue;
    }
    if (ch == '"') {
      if (!field.empty()) throw std::runtime_error("stray quote inside an unquoted field");
      quoted = true;
      field_started = true;
    } else if (ch == ',') {
      row.push_back(std::move(field));
      field.clear();
      field_started = true;
    } else if (ch == '\r' || ch == '\n') {
      if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      end_record();
    } else {
      field += ch;
      field_started = true;
    }
    ++i;
  }
  if (quoted) throw std::runtime_error("unterminated quoted field");
  if (field_started || !row.empty()) end_record();
  return rows;
}

DurableCsv::DurableCsv(const std::filesystem::path& path, const Row& header) : path_(path) {
  fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd_ < 0) io_error("cannot open", path);
  append(header);
}

DurableCsv::~DurableCsv() {
  if (fd_ >= 0) ::close(fd_);
}

void DurableCsv::write_all(const std::string& text) { write_fd(fd_, text, path_); }

void DurableCsv::append(const Row& fields) {
  write_all(csv_record(fields));
  if (::fsync(fd_) != 0) io_error("fsync failed for", path_);
}

void write_file_atomic(const std::filesystem::path& path, std::string_view text) {
  auto tmp = path;
  tmp += ".tmp";
  int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) io_error("cannot open", tmp);
  try {
    write_fd(fd, text, tmp);
    if (::fsync(fd) != 0) io_error("fsync failed for", tmp);
  } catch (...) {
    ::close(fd);
    throw;
  }
  ::close(fd);
  std::filesystem::rename(tmp, path);
}

void write_json_atomic(const std::filesystem::path& path, const nlohmann::json& j) {
  write_file_atomic(path, j.dump(2) + "\n");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string utc_timestamp() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string code_version() { return GIBBSPERC_VERSION; }

Manifest::Manifest(std::string verb, const nlohmann::json& canonical_config,
                   std::filesystem::path path)
    : path_(std::move(path)), hash_(sha256_hex(verb + "\n" + canonical_config.dump())) {
  doc_["verb"] = std::move(verb);
  doc_["config_hash"] = hash_;
  doc_["code_version"] = code_version();
  doc_["config"] = canonical_config;
  doc_["tasks"] = nlohmann::json::array();
  doc_["files"] = nlohmann::json::array();
  doc_["started"] = utc_timestamp();
  doc_["finished"] = nullptr;
  doc_["result"] = nullptr;
}

void Manifest::add_task(nlohmann::json task) { doc_["tasks"].push_back(std::move(task)); }

void Manifest::set_result(nlohmann::json result) { doc_["result"] = std::move(result); }

void Manifest::add_file(const std::filesystem::path& file) {
  doc_["files"].push_back(file.filename().string());
}

void Manifest::save(bool finished) {
  if (finished) doc_["finished"] = utc_timestamp();
  write_json_atomic(path_, doc_);
}

void write_configuration(const std::filesystem::path& csv_path, const Configuration& config,
                         const nlohmann::json& sidecar) {
  std::string text;
  Row header;
  for (int a = 0; a < config.dim(); ++a) header.push_back("x" + std::to_string(a + 1));
  text += csv_record(header);
  for (const auto& p : config.points) {
    Row row;
    for (double v : p.coords()) row.push_back(format_double(v));
    text += csv_record(row);
  }
  write_file_atomic(csv_path, text);
  auto side = csv_path;
  side.replace_extension(".json");
  write_json_atomic(side, sidecar);
}

}  // namespace gibbsperc::cli
