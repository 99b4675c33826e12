#include "jointguard/expense.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "jointguard/csv.hpp"
#include "jointguard/rng.hpp"

namespace jointguard::expense {

void BotnetPricing::validate() const {
  if (setup_per_bot < Money{}) throw std::invalid_argument("setup_per_bot must be >= 0");
  if (rental_per_bot_per_lease < Money{}) throw std::invalid_argument("rental_per_bot_per_lease must be >= 0");
  if (!(lease_duration > 0.0) || !std::isfinite(lease_duration)) {
    throw std::invalid_argument("lease_duration must be positive");
  }
  if (min_bots < 1) throw std::invalid_argument("min_bots must be at least 1");
}

Money rental_from_bulk(Money total, std::int64_t bots) {
  if (bots <= 0) throw std::invalid_argument("bulk quote needs a positive bot count");
  return total.divided(bots);
}

void MitigationProfile::validate() const {
  if (!(mrt > 0.0) || !std::isfinite(mrt)) throw std::invalid_argument("mrt must be positive");
}

DefenseMatrix::DefenseMatrix(std::size_t defenders, std::size_t vulnerabilities, std::vector<double> values)
    : m_(defenders), n_(vulnerabilities), d_(std::move(values)) {
  if (m_ == 0 || n_ == 0) throw std::invalid_argument("defense matrix needs at least one row and column");
  if (d_.size() != m_ * n_) {
    throw std::invalid_argument(fmt::format("defense matrix expects {}x{} = {} entries, got {}", m_, n_,
                                            m_ * n_, d_.size()));
  }
  for (double v : d_) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("defense units must be positive");
  }
}

double DefenseMatrix::at(std::size_t i, std::size_t j) const {
  if (i >= m_ || j >= n_) throw std::out_of_range(fmt::format("d({}, {}) outside {}x{}", i, j, m_, n_));
  return d_[i * n_ + j];
}

CapabilityVector::CapabilityVector(std::vector<int> flags) : c_(std::move(flags)) {
  for (int f : c_) {
    if (f != 0 && f != 1) throw std::invalid_argument("capability flags must be 0 or 1");
  }
}

CapabilityVector CapabilityVector::all(std::size_t m, int value) {
  return CapabilityVector(std::vector<int>(m, value));
}

std::size_t CapabilityVector::capable_count() const {
  return static_cast<std::size_t>(std::count(c_.begin(), c_.end(), 1));
}

BelowMinimumPopulation::BelowMinimumPopulation(std::int64_t requested, std::int64_t minimum)
    : std::invalid_argument(
          fmt::format("botnets are rented in lots of at least {} bots, requested {}", minimum, requested)) {}

Money per_active_bot_expense(const BotnetPricing& pricing, const MitigationProfile& mitigation) {
  pricing.validate();
  mitigation.validate();
  const double factor = std::max(1.0, pricing.lease_duration / mitigation.mrt);
  return pricing.rental_per_bot_per_lease.scaled(factor);
}

Money botnet_expense(std::int64_t n_bots, const BotnetPricing& pricing, const MitigationProfile& mitigation) {
  pricing.validate();
  if (n_bots < pricing.min_bots) throw BelowMinimumPopulation(n_bots, pricing.min_bots);
  const Money pabe = per_active_bot_expense(pricing, mitigation);
  return pricing.setup_per_bot * n_bots + pabe * n_bots;
}

namespace {

void check_shapes(const DefenseMatrix& d, const CapabilityVector& c) {
  if (c.size() != d.defenders()) {
    throw std::invalid_argument(
        fmt::format("capability vector has {} entries for {} defenders", c.size(), d.defenders()));
  }
}

}  // namespace

double joint_defense_power(const DefenseMatrix& d, const CapabilityVector& c, std::size_t j) {
  check_shapes(d, c);
  if (j >= d.vulnerabilities()) throw std::out_of_range(fmt::format("vulnerability {} out of range", j));
  double sum = 0.0;
  for (std::size_t i = 0; i < d.defenders(); ++i) sum += c[i] * d.at(i, j);
  return sum;
}

double amplification(const DefenseMatrix& d, const CapabilityVector& c, std::size_t i, std::size_t j) {
  check_shapes(d, c);
  if (i >= d.defenders()) throw std::out_of_range(fmt::format("defender {} out of range", i));
  if (c.capable_count() <= 1) {
    throw std::domain_error("amplification needs more than one capable defender");
  }
  if (j >= d.vulnerabilities()) throw std::out_of_range(fmt::format("vulnerability {} out of range", j));
  // Summing ratios instead of dividing the column sum keeps equal entries
  // at exactly 1 each, so a uniform alliance of m gets lambda == m.
  const double own = d.at(i, j);
  double lambda = 0.0;
  for (std::size_t k = 0; k < d.defenders(); ++k) {
    if (c[k] != 0) lambda += d.at(k, j) / own;
  }
  return lambda;
}

ExpenseReport expense_report(const DefenseMatrix& d, const BotnetPricing& pricing,
                             const MitigationProfile& mitigation) {
  if (d.defenders() < 2) throw std::invalid_argument("an alliance needs at least two defenders");
  const auto c = CapabilityVector::all(d.defenders(), 1);

  ExpenseReport r;
  r.defenders = d.defenders();
  r.vulnerabilities = d.vulnerabilities();
  r.matrix = d;
  r.lambda.reserve(r.defenders * r.vulnerabilities);
  double best = -1.0;
  for (std::size_t i = 0; i < r.defenders; ++i) {
    for (std::size_t j = 0; j < r.vulnerabilities; ++j) {
      const double lam = amplification(d, c, i, j);
      r.lambda.push_back(lam);
      if (lam > best) {
        best = lam;
        r.reported_defender = i;
        r.reported_vulnerability = j;
      }
    }
  }
  r.individual_bots = pricing.min_bots;
  r.pabe = per_active_bot_expense(pricing, mitigation);
  r.individual_expense = botnet_expense(r.individual_bots, pricing, mitigation);
  r.joint_expense = r.individual_expense.scaled(best);
  return r;
}

ExpenseReport expense_table(std::size_t m, std::size_t n, double value_low, double value_high,
                            std::uint64_t seed, const BotnetPricing& pricing,
                            const MitigationProfile& mitigation) {
  if (m < 2) throw std::invalid_argument("expense table needs m >= 2 defenders");
  if (n < 1) throw std::invalid_argument("expense table needs n >= 1 vulnerabilities");
  if (!(value_low > 0.0) || !(value_low <= value_high) || !std::isfinite(value_high)) {
    throw std::invalid_argument(fmt::format("invalid bounds [{}, {}]: need 0 < low <= high", value_low, value_high));
  }
  Rng rng(seed);
  std::vector<double> values(m * n);
  for (double& v : values) v = rng.uniform(value_low, value_high);
  return expense_report(DefenseMatrix(m, n, std::move(values)), pricing, mitigation);
}

double profit_margin(Money reward, Money expense) {
  if (expense.units() == 0) throw std::domain_error("profit margin undefined for zero expense");
  return static_cast<double>(reward.units()) / static_cast<double>(expense.units());
}

void write_csv(const ExpenseReport& report, std::ostream& out) {
  out << "defender,vulnerability,lambda\n";
  for (std::size_t i = 0; i < report.defenders; ++i) {
    for (std::size_t j = 0; j < report.vulnerabilities; ++j) {
      out << (i + 1) << ',' << (j + 1) << ',' << csv::format_real(report.lambda_at(i, j)) << '\n';
    }
  }
  out << "\nmetric,value\n";
  out << "pabe," << report.pabe.to_string() << '\n';
  out << "individual_bots," << report.individual_bots << '\n';
  out << "individual_expense," << report.individual_expense.to_string() << '\n';
  out << "joint_expense," << report.joint_expense.to_string() << '\n';
  out << "reported_defender," << (report.reported_defender + 1) << '\n';
  out << "reported_vulnerability," << (report.reported_vulnerability + 1) << '\n';
  out << "reported_lambda,"
      << csv::format_real(report.lambda_at(report.reported_defender, report.reported_vulnerability)) << '\n';
}

}  // namespace jointguard::expense
