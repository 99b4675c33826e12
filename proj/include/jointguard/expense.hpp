#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "jointguard/money.hpp"

namespace jointguard::expense {

// Botnet market pricing. Durations share one time unit (hours by convention).
struct BotnetPricing {
  Money setup_per_bot;             // charged once per attack
  Money rental_per_bot_per_lease;  // e.g. $3,000 / 50,000 bots = $0.06
  double lease_duration = 336.0;   // two weeks in hours
  std::int64_t min_bots = 1000;    // smallest rentable population

  void validate() const;
};

// Per-bot rental price derived from a bulk quote ("$3,000 for 50,000 bots").
Money rental_from_bulk(Money total, std::int64_t bots);

struct MitigationProfile {
  double mrt = 336.0;  // mitigation response time, same unit as lease_duration

  void validate() const;
};

class DefenseMatrix {
 public:
  // Row-major values: d(i, j) = values[i * vulnerabilities + j]. All entries
  // must be finite and > 0.
  DefenseMatrix(std::size_t defenders, std::size_t vulnerabilities, std::vector<double> values);

  std::size_t defenders() const { return m_; }
  std::size_t vulnerabilities() const { return n_; }
  double at(std::size_t i, std::size_t j) const;

 private:
  std::size_t m_;
  std::size_t n_;
  std::vector<double> d_;
};

class CapabilityVector {
 public:
  explicit CapabilityVector(std::vector<int> flags);
  static CapabilityVector all(std::size_t m, int value);

  std::size_t size() const { return c_.size(); }
  int operator[](std::size_t i) const { return c_.at(i); }
  std::size_t capable_count() const;
  const std::vector<int>& flags() const { return c_; }

 private:
  std::vector<int> c_;
};

class BelowMinimumPopulation : public std::invalid_argument {
 public:
  BelowMinimumPopulation(std::int64_t requested, std::int64_t minimum);
};

// rental * max(1, lease_duration / mrt): the price of keeping one bot
// effective for a lease when every MRT it has to be replaced.
Money per_active_bot_expense(const BotnetPricing& pricing, const MitigationProfile& mitigation);

// n_bots * setup + n_bots * PABE. Throws BelowMinimumPopulation when
// n_bots < pricing.min_bots.
Money botnet_expense(std::int64_t n_bots, const BotnetPricing& pricing,
                     const MitigationProfile& mitigation);

// f(j) = sum_i c_i * d(i, j). Throws std::out_of_range.
double joint_defense_power(const DefenseMatrix& d, const CapabilityVector& c, std::size_t j);

// lambda_j = f(j) / d(i, j). Requires more than one capable defender
// (std::domain_error otherwise) and valid indices (std::out_of_range).
double amplification(const DefenseMatrix& d, const CapabilityVector& c, std::size_t i,
                     std::size_t j);

struct ExpenseReport {
  std::size_t defenders = 0;
  std::size_t vulnerabilities = 0;
  std::vector<double> lambda;  // row-major, defenders x vulnerabilities
  DefenseMatrix matrix{1, 1, {1.0}};

  // The summary block prices the most amplified cell.
  std::size_t reported_defender = 0;
  std::size_t reported_vulnerability = 0;
  std::int64_t individual_bots = 0;
  Money pabe;
  Money individual_expense;
  Money joint_expense;  // individual_expense scaled by the reported lambda

  double lambda_at(std::size_t i, std::size_t j) const { return lambda.at(i * vulnerabilities + j); }
};

// Draws an m x n defense matrix uniformly from [value_low, value_high) with
// the seeded generator (equal bounds give a constant matrix), marks every
// defender capable and tabulates lambda for each cell. The summary prices pricing.min_bots individual bots.
ExpenseReport expense_table(std::size_t m, std::size_t n, double value_low, double value_high,
                            std::uint64_t seed, const BotnetPricing& pricing = {},
                            const MitigationProfile& mitigation = {});

// Lambda table plus summary for an explicit matrix (all defenders capable).
ExpenseReport expense_report(const DefenseMatrix& d, const BotnetPricing& pricing,
                             const MitigationProfile& mitigation);

// reward / expense; below 1 the attacker is losing money.
double profit_margin(Money reward, Money expense);

// `defender,vulnerability,lambda` rows (1-based indices) followed by a blank
// line and a `metric,value` summary block.
void write_csv(const ExpenseReport& report, std::ostream& out);

}  // namespace jointguard::expense
