#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "rdcost/synth.hpp"

namespace rdcost::testkit {

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("rdcost_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

// Short generator run: one in-sample quarter plus both out-of-sample windows.
inline synth::GeneratorConfig small_generator(std::uint64_t seed = 3) {
  synth::GeneratorConfig c;
  c.range = {make_date(2019, 10, 1), make_date(2020, 4, 26)};
  c.seed = seed;
  return c;
}

inline DateRange small_in_sample() { return {make_date(2019, 10, 1), make_date(2019, 12, 31)}; }

}  // namespace rdcost::testkit
