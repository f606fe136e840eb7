#include "gplab/io.hpp"

#include <bit>
#include <chrono>
#include <cstdint>
#include <set>
#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "gplab/error.hpp"

namespace gplab {

namespace {

constexpr char kMagic[8] = {'G', 'P', 'L', 'A', 'B', 'F', 'L', 'D'};
static_assert(std::endian::native == std::endian::little, "field container assumes a little-endian host");

void write_raw(const std::filesystem::path& path, Json header, const double* data, std::size_t count) {
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw NumericalError("cannot write " + path.string());
  out.write(kMagic, sizeof kMagic);
  const std::uint64_t len = text.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof len);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
  if (!out) throw NumericalError("short write on " + path.string());
}

}  // namespace

void write_field(const std::filesystem::path& path, const Vec& values, Json header) {
  header["dtype"] = "float64";
  if (!header.contains("shape")) header["shape"] = {values.size()};
  write_raw(path, std::move(header), values.data(), static_cast<std::size_t>(values.size()));
}

void write_field(const std::filesystem::path& path, const CVec& values, Json header) {
  header["dtype"] = "complex128";
  if (!header.contains("shape")) header["shape"] = {values.size()};
  write_raw(path, std::move(header), reinterpret_cast<const double*>(values.data()),
            2 * static_cast<std::size_t>(values.size()));
}

Field read_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open field file " + path.string());
  char magic[8];
  std::uint64_t len = 0;
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  if (!in || !std::equal(magic, magic + 8, kMagic) || len > (1u << 24))
    throw ConfigError(path.string() + " is not a field container");
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  Field f;
  try {
    f.header = Json::parse(text);
  } catch (const Json::parse_error&) {
    throw ConfigError(path.string() + " has a malformed header");
  }
  long count = 1;
  for (const auto& s : f.header.at("shape")) count *= s.get<long>();
  if (f.is_complex()) {
    f.complex.resize(count);
    in.read(reinterpret_cast<char*>(f.complex.data()), static_cast<std::streamsize>(2 * count * sizeof(double)));
  } else {
    f.real.resize(count);
    in.read(reinterpret_cast<char*>(f.real.data()), static_cast<std::streamsize>(count * sizeof(double)));
  }
  if (!in) throw ConfigError(path.string() + " is truncated");
  return f;
}

void write_json(const std::filesystem::path& path, const Json& doc) {
  std::ofstream out(path);
  if (!out) throw NumericalError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns)
    : out_(path), columns_(columns.size()) {
  if (!out_) throw NumericalError("cannot write " + path.string());
  for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != columns_) throw InvalidParameter("csv row has the wrong width");
  char buf[32];
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.15e", values[i]);
    out_ << (i ? "," : "") << buf;
  }
  out_ << '\n';
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr))
    throw NumericalError("sha256 failed");
  std::ostringstream s;
  for (unsigned i = 0; i < len; ++i) s << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return s.str();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return sha256_hex(buf.str());
}

Manifest::Manifest(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

std::filesystem::path Manifest::file(const std::string& name, const std::string& kind) {
  files_.push_back({{"path", name}, {"kind", kind}});
  return dir_ / name;
}

void Manifest::write(const std::string& command) const {
  // Entries from earlier commands in the same directory are kept while their files still exist.
  Json previous = Json::object();
  if (std::filesystem::exists(dir_ / "manifest.json")) {
    try {
      previous = read_json(dir_ / "manifest.json");
    } catch (const std::exception&) {
    }
  }
  std::set<std::string> written;
  Json files = Json::array();
  for (const auto& f : files_) {
    Json e = f;
    e["command"] = command;
    const auto p = dir_ / f["path"].get<std::string>();
    if (std::filesystem::exists(p)) e["sha256"] = sha256_file(p);
    written.insert(f["path"].get<std::string>());
    files.push_back(std::move(e));
  }
  for (const auto& e : previous.value("files", Json::array())) {
    const std::string path = e.value("path", "");
    if (path.empty() || written.count(path) || !std::filesystem::exists(dir_ / path)) continue;
    files.push_back(e);
    written.insert(path);
  }
  std::sort(files.begin(), files.end(), [](const Json& a, const Json& b) { return a["path"] < b["path"]; });
  Json summary = previous.value("summary", Json::object());
  summary.update(summary_);
  Json inputs = previous.value("inputs", Json::object());
  inputs.update(inputs_);
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::ostringstream stamp;
  stamp << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
  Json doc{{"command", command},
           {"created", stamp.str()},
           {"files", files},
           {"inputs", inputs},
           {"summary", summary},
           {"versions", {{"gp-lab", GPLAB_VERSION}, {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                                                std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                                                std::to_string(EIGEN_MINOR_VERSION)}}}};
  write_json(dir_ / "manifest.json", doc);
}

}  // namespace gplab
