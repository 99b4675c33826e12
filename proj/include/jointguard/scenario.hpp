#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "jointguard/engine.hpp"
#include "jointguard/expense.hpp"

namespace jointguard::scenario {

inline constexpr int kSchemaVersion = 1;

// Schema or value error in a scenario document. line() is 1-based, 0 when
// the problem has no single source location.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(int line, const std::string& message);
  int line() const noexcept { return line_; }

 private:
  int line_;
};

// The file could not be read.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parses and validates a simulation scenario (see docs/scenario-format.md).
engine::Scenario parse_scenario(const std::string& text);
engine::Scenario load_scenario(const std::filesystem::path& path);

struct ExpenseConfig {
  std::string name = "expense";
  std::size_t m = 8;
  std::size_t n = 10;
  double low = 1.0;
  double high = 100.0;
  std::uint64_t seed = 1;
  expense::BotnetPricing pricing;
  expense::MitigationProfile mitigation;
};

// Parses an expense-table document (schema_version, name, table, pricing,
// mitigation).
ExpenseConfig parse_expense_config(const std::string& text);

std::string read_file(const std::filesystem::path& path);

}  // namespace jointguard::scenario
