#pragma once

#include <compare>
#include <string>
#include <vector>

namespace iov::kpabe {

struct Date {
  int year = 2022;
  int month = 1;
  int day = 1;

  auto operator<=>(const Date&) const = default;

  /// Parses "YYYY-MM-DD". Throws RangeError on malformed or impossible dates.
  static Date parse(const std::string& text);
  std::string to_string() const;
  Date next() const;
};

int days_in_month(int year, int month);

/// Node of the validity tree, addressed by its path from the root:
/// {} = root, {year}, {year, month}, {year, month, day}.
struct PeriodNode {
  std::vector<int> path;

  std::size_t level() const { return path.size(); }
  /// True when this node is `other` or one of its ancestors.
  bool is_prefix_of(const PeriodNode& other) const;

  /// "2022", "2022-09" or "2022-09-22".
  std::string to_string() const;
  static PeriodNode parse(const std::string& text);

  auto operator<=>(const PeriodNode&) const = default;
};

/// A set of nodes in which no node is an ancestor of another.
using PeriodSet = std::vector<PeriodNode>;

/// Calendar tree of fixed depth 4 (root, year, month, day). Years are
/// [first_year, first_year + years). Level arities: `years`, 12, 31.
class TimeTree {
 public:
  static constexpr int kDepth = 4;

  TimeTree(int first_year = 2020, int years = 16);

  int first_year() const { return first_year_; }
  int years() const { return years_; }
  bool contains(const Date& d) const;

  /// Leaf path (year, month, day). Throws RangeError outside the span.
  PeriodNode encode_period(const Date& d) const;
  /// Month node (year, month). Throws RangeError outside the span.
  PeriodNode encode_month(int year, int month) const;

  /// 1-based child index of each path component, used as the exponent
  /// of V_j. The year component maps to year - first_year + 1.
  std::vector<int> child_indices(const PeriodNode& node) const;

  /// Throws RangeError if any component falls outside the tree.
  void validate(const PeriodNode& node) const;

  /// Minimal antichain whose leaf descendants are exactly [start, end].
  PeriodSet set_cover(const Date& start, const Date& end) const;

  /// Calendar days under `node`, in order.
  std::vector<Date> leaves(const PeriodNode& node) const;

 private:
  int first_year_;
  int years_;
};

/// True when every node of `ct_periods` equals or descends from some node of `key_periods`.
bool covers(const PeriodSet& key_periods, const PeriodSet& ct_periods);

/// True when no node of `set` is a proper ancestor of another.
bool is_antichain(const PeriodSet& set);

}  // namespace iov::kpabe
