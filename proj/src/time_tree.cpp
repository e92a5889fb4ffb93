#include "iov/kpabe/time_tree.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "iov/error.hpp"

namespace iov::kpabe {

namespace {

bool leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

std::vector<int> split_dash(const std::string& text) {
  std::vector<int> parts;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, '-')) {
    if (item.empty() || !std::all_of(item.begin(), item.end(), ::isdigit)) {
      throw RangeError("malformed period: " + text);
    }
    parts.push_back(std::stoi(item));
  }
  return parts;
}

}  // namespace

int days_in_month(int year, int month) {
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month < 1 || month > 12) throw RangeError("month out of range");
  return month == 2 && leap(year) ? 29 : kDays[month - 1];
}

Date Date::parse(const std::string& text) {
  const auto parts = split_dash(text);
  if (parts.size() != 3) throw RangeError("expected YYYY-MM-DD: " + text);
  Date d{parts[0], parts[1], parts[2]};
  if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > days_in_month(d.year, d.month)) {
    throw RangeError("no such date: " + text);
  }
  return d;
}

std::string Date::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
  return buf;
}

Date Date::next() const {
  Date d = *this;
  if (++d.day > days_in_month(d.year, d.month)) {
    d.day = 1;
    if (++d.month > 12) {
      d.month = 1;
      ++d.year;
    }
  }
  return d;
}

bool PeriodNode::is_prefix_of(const PeriodNode& other) const {
  return path.size() <= other.path.size() &&
         std::equal(path.begin(), path.end(), other.path.begin());
}

std::string PeriodNode::to_string() const {
  std::string out;
  char buf[8];
  for (std::size_t i = 0; i < path.size(); ++i) {
    std::snprintf(buf, sizeof buf, i == 0 ? "%04d" : "-%02d", path[i]);
    out += buf;
  }
  return out;
}

PeriodNode PeriodNode::parse(const std::string& text) {
  PeriodNode node{split_dash(text)};
  if (node.path.empty() || node.path.size() > 3) throw RangeError("malformed period: " + text);
  return node;
}

TimeTree::TimeTree(int first_year, int years) : first_year_(first_year), years_(years) {
  if (years < 1) throw InputError("time tree needs at least one year");
}

bool TimeTree::contains(const Date& d) const {
  return d.year >= first_year_ && d.year < first_year_ + years_;
}

PeriodNode TimeTree::encode_period(const Date& d) const {
  if (!contains(d)) throw RangeError("date outside time tree: " + d.to_string());
  if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > days_in_month(d.year, d.month)) {
    throw RangeError("no such date: " + d.to_string());
  }
  return {{d.year, d.month, d.day}};
}

PeriodNode TimeTree::encode_month(int year, int month) const {
  if (year < first_year_ || year >= first_year_ + years_ || month < 1 || month > 12) {
    throw RangeError("month outside time tree");
  }
  return {{year, month}};
}

void TimeTree::validate(const PeriodNode& node) const {
  const auto& p = node.path;
  if (p.size() > 3) throw RangeError("period deeper than the tree: " + node.to_string());
  if (!p.empty() && (p[0] < first_year_ || p[0] >= first_year_ + years_)) {
    throw RangeError("year outside time tree: " + node.to_string());
  }
  if (p.size() >= 2 && (p[1] < 1 || p[1] > 12)) throw RangeError("bad month: " + node.to_string());
  if (p.size() == 3 && (p[2] < 1 || p[2] > days_in_month(p[0], p[1]))) {
    throw RangeError("bad day: " + node.to_string());
  }
}

std::vector<int> TimeTree::child_indices(const PeriodNode& node) const {
  validate(node);
  std::vector<int> out = node.path;
  if (!out.empty()) out[0] = out[0] - first_year_ + 1;
  return out;
}

PeriodSet TimeTree::set_cover(const Date& start, const Date& end) const {
  encode_period(start);
  encode_period(end);
  if (end < start) throw RangeError("inverted range " + start.to_string() + " .. " + end.to_string());

  PeriodSet out;
  for (int y = start.year; y <= end.year; ++y) {
    const Date year_first{y, 1, 1};
    const Date year_last{y, 12, 31};
    if (start <= year_first && year_last <= end) {
      out.push_back({{y}});
      continue;
    }
    for (int m = 1; m <= 12; ++m) {
      const Date month_first{y, m, 1};
      const Date month_last{y, m, days_in_month(y, m)};
      if (month_last < start || end < month_first) continue;
      if (start <= month_first && month_last <= end) {
        out.push_back({{y, m}});
        continue;
      }
      for (int d = 1; d <= month_last.day; ++d) {
        const Date day{y, m, d};
        if (start <= day && day <= end) out.push_back({{y, m, d}});
      }
    }
  }
  return out;
}

std::vector<Date> TimeTree::leaves(const PeriodNode& node) const {
  validate(node);
  std::vector<Date> out;
  const auto& p = node.path;
  const int y0 = p.empty() ? first_year_ : p[0];
  const int y1 = p.empty() ? first_year_ + years_ - 1 : p[0];
  for (int y = y0; y <= y1; ++y) {
    const int m0 = p.size() >= 2 ? p[1] : 1;
    const int m1 = p.size() >= 2 ? p[1] : 12;
    for (int m = m0; m <= m1; ++m) {
      const int d0 = p.size() == 3 ? p[2] : 1;
      const int d1 = p.size() == 3 ? p[2] : days_in_month(y, m);
      for (int d = d0; d <= d1; ++d) out.push_back({y, m, d});
    }
  }
  return out;
}

bool covers(const PeriodSet& key_periods, const PeriodSet& ct_periods) {
  return std::all_of(ct_periods.begin(), ct_periods.end(), [&](const PeriodNode& c) {
    return std::any_of(key_periods.begin(), key_periods.end(),
                       [&](const PeriodNode& k) { return k.is_prefix_of(c); });
  });
}

bool is_antichain(const PeriodSet& set) {
  for (std::size_t i = 0; i < set.size(); ++i) {
    for (std::size_t j = 0; j < set.size(); ++j) {
      if (i != j && set[i].is_prefix_of(set[j])) return false;
    }
  }
  return true;
}

}  // namespace iov::kpabe
