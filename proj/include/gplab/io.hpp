#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gplab/grid.hpp"

namespace gplab {

using Json = nlohmann::json;

// Field container: 8-byte magic "GPLABFLD", little-endian uint64 header length, JSON header
// {geometry, shape, dtype, ...}, then the raw little-endian float64 payload (complex as re, im pairs).
struct Field {
  Json header;
  Vec real;
  CVec complex;
  bool is_complex() const { return header.value("dtype", "") == "complex128"; }
};

void write_field(const std::filesystem::path& path, const Vec& values, Json header);
void write_field(const std::filesystem::path& path, const CVec& values, Json header);
Field read_field(const std::filesystem::path& path);

// Pretty-printed with sorted keys and a trailing newline, so identical content gives identical bytes.
void write_json(const std::filesystem::path& path, const Json& doc);
Json read_json(const std::filesystem::path& path);

// Comma separated with a header row; numbers use %.15e.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns);
  void row(const std::vector<double>& values);

 private:
  std::ofstream out_;
  std::size_t columns_;
};

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

// Collects every file written into an output directory and emits manifest.json.
class Manifest {
 public:
  explicit Manifest(std::filesystem::path dir);
  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path file(const std::string& name, const std::string& kind);
  void input(const std::string& name, const std::string& sha256) { inputs_[name] = sha256; }
  void summary(const std::string& key, Json value) { summary_[key] = std::move(value); }
  void write(const std::string& command) const;

 private:
  std::filesystem::path dir_;
  Json files_ = Json::array();
  Json inputs_ = Json::object();
  Json summary_ = Json::object();
};

}  // namespace gplab
