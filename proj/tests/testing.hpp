#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "plancritic/parser.hpp"
#include "plancritic/scenario.hpp"

namespace plancritic::testing {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(PLANCRITIC_FIXTURE_DIR) / name;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline const ScenarioPack& naval_pack() {
  static const ScenarioPack pack = load_pack("naval");
  return pack;
}

inline const ScenarioPack& satellite_pack() {
  static const ScenarioPack pack = load_pack("satellite");
  return pack;
}

inline TrajectoryConstraint constraint(const std::string& text, const ProblemModel& problem) {
  return parse_constraint(text, naval_pack().domain, problem);
}

inline Specification spec(const std::string& text, const ProblemModel& problem) {
  return parse_specification(text, naval_pack().domain, problem);
}

}  // namespace plancritic::testing
