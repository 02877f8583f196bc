#pragma once

// Small statistics toolkit: Wilson intervals, the Mann-Whitney U test,
// empirical CDFs and ISO-week calendar helpers.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "common.hpp"

namespace politishift {

struct Interval {
  double lo = kUndefined;
  double hi = kUndefined;
};

// Wilson score interval; z defaults to the two-sided 95% quantile.
inline Interval wilson_interval(std::size_t successes, std::size_t n, double z = 1.959963984540054) {
  if (n == 0) return {};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

struct MannWhitneyResult {
  double u = 0.0;  // U for the first sample: #(x > y) + 0.5 #(x == y)
  double z = 0.0;
  double p_value = 1.0;
};

// Two-sided test, normal approximation with tie and continuity correction.
inline MannWhitneyResult mann_whitney(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() < 2 || y.size() < 2) throw DataError("mann_whitney: each sample needs at least 2 values");
  const std::size_t n1 = x.size(), n2 = y.size(), n = n1 + n2;
  std::vector<std::pair<double, int>> all;
  all.reserve(n);
  for (double v : x) all.emplace_back(v, 0);
  for (double v : y) all.emplace_back(v, 1);
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  double rank_sum_x = 0.0, tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && all[j].first == all[i].first) ++j;
    const double mid = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k)
      if (all[k].second == 0) rank_sum_x += mid;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }
  const double d1 = static_cast<double>(n1), d2 = static_cast<double>(n2), dn = static_cast<double>(n);
  MannWhitneyResult r;
  r.u = rank_sum_x - d1 * (d1 + 1.0) / 2.0;
  const double mu = d1 * d2 / 2.0;
  const double var = d1 * d2 / 12.0 * ((dn + 1.0) - tie_term / (dn * (dn - 1.0)));
  if (var <= 0.0) return r;  // every value tied
  const double diff = std::max(0.0, std::abs(r.u - mu) - 0.5);
  r.z = (r.u - mu < 0 ? -diff : diff) / std::sqrt(var);
  r.p_value = std::min(1.0, std::erfc(std::abs(r.z) / std::sqrt(2.0)));
  return r;
}

// Right-continuous step function F(x) = #(v <= x) / n.
class EmpiricalCdf {
 public:
  EmpiricalCdf() = default;
  explicit EmpiricalCdf(std::vector<double> values) : sorted_(std::move(values)) {
    std::sort(sorted_.begin(), sorted_.end());
  }

  std::size_t size() const { return sorted_.size(); }
  const std::vector<double>& values() const { return sorted_; }

  double operator()(double x) const {
    if (sorted_.empty()) return kUndefined;
    const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
    return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
  }

  // (x, F(x)) at each distinct sample value.
  std::vector<std::pair<double, double>> steps() const {
    std::vector<std::pair<double, double>> out;
    for (std::size_t i = 0; i < sorted_.size(); ++i) {
      if (i + 1 < sorted_.size() && sorted_[i + 1] == sorted_[i]) continue;
      out.emplace_back(sorted_[i], static_cast<double>(i + 1) / static_cast<double>(sorted_.size()));
    }
    return out;
  }

 private:
  std::vector<double> sorted_;
};

// ---------------------------------------------------------------------------
// calendar (UTC)
// ---------------------------------------------------------------------------

inline constexpr std::int64_t kSecondsPerDay = 86400;

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

// Seconds of the Monday 00:00 UTC starting the ISO week containing ts.
inline std::int64_t iso_week_start(std::int64_t ts) {
  const std::int64_t days = floor_div(ts, kSecondsPerDay);
  // 1970-01-01 was a Thursday: weekday index with Monday = 0 is (days + 3) mod 7.
  const std::int64_t weekday = ((days + 3) % 7 + 7) % 7;
  return (days - weekday) * kSecondsPerDay;
}

inline std::string format_date(std::int64_t ts) {
  using namespace std::chrono;
  const sys_days d{days{floor_div(ts, kSecondsPerDay)}};
  const year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

// "YYYY-MM-DD" to seconds at 00:00 UTC.
inline std::int64_t parse_date(const std::string& s) {
  int y = 0;
  unsigned m = 0, d = 0;
  char tail = 0;
  if (std::sscanf(s.c_str(), "%d-%u-%u%c", &y, &m, &d, &tail) != 3) throw UsageError("bad date (want YYYY-MM-DD): " + s);
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{m}, day{d}};
  if (!ymd.ok()) throw UsageError("invalid calendar date: " + s);
  return static_cast<std::int64_t>(sys_days{ymd}.time_since_epoch().count()) * kSecondsPerDay;
}

// Inclusive day range; `to` covers the whole final day.
struct DateRange {
  std::int64_t from = std::numeric_limits<std::int64_t>::min();
  std::int64_t to_exclusive = std::numeric_limits<std::int64_t>::max();

  bool contains(std::int64_t ts) const { return ts >= from && ts < to_exclusive; }
  bool bounded() const { return from != std::numeric_limits<std::int64_t>::min(); }
};

// "<iso>..<iso>"
inline DateRange parse_date_range(const std::string& s) {
  const auto sep = s.find("..");
  if (sep == std::string::npos) throw UsageError("date range must look like 2022-08-26..2022-11-01");
  DateRange r;
  r.from = parse_date(s.substr(0, sep));
  r.to_exclusive = parse_date(s.substr(sep + 2)) + kSecondsPerDay;
  if (r.to_exclusive <= r.from) throw UsageError("date range is empty: " + s);
  return r;
}

}  // namespace politishift
