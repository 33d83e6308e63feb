#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "clab/error.hpp"

namespace clab::cli {

// Bad configuration: exit code 2.
class ConfigError : public clab::Error {
 public:
  using clab::Error::Error;
};

// Holds an exclusive flock on <dir>/.clab.lock for the lifetime of the run.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path dir);
  ~OutputDir();
  OutputDir(const OutputDir&) = delete;
  OutputDir& operator=(const OutputDir&) = delete;

  const std::filesystem::path& path() const noexcept { return dir_; }
  std::filesystem::path file(const std::string& name) const { return dir_ / name; }
  void write_json(const std::string& name, const nlohmann::json& doc) const;

 private:
  std::filesystem::path dir_;
  int lock_fd_ = -1;
};

using Cell = std::variant<std::monostate, double, long long, std::string>;

// Comma-separated table with a header row; doubles print with 9 significant
// digits, std::monostate prints as an empty field.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::vector<std::string> header);
  void row(const std::vector<Cell>& cells);

 private:
  std::ofstream out_;
  std::size_t width_;
};

std::string utc_timestamp();

}  // namespace clab::cli
