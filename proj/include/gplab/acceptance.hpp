#pragma once

#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

namespace gplab {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  double seconds = 0.0;
  std::string summary;
  nlohmann::json data;
};

// Shared models built on first use: the radial Gaussian well and the double-well box.
class AcceptanceSuite {
 public:
  AcceptanceSuite();
  ~AcceptanceSuite();

  static constexpr int kCount = 10;
  CriterionResult run(int id);

  struct State;

 private:
  std::unique_ptr<State> state_;
};

}  // namespace gplab
