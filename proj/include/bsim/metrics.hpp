#pragma once

#include <algorithm>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "bsim/model.hpp"

namespace bsim {

enum class MetricKind { max_response, max_delay_factor, max_weighted_response, max_weighted_delay_factor };

inline const char* to_string(MetricKind k) {
  switch (k) {
    case MetricKind::max_response: return "max_response";
    case MetricKind::max_delay_factor: return "max_delay_factor";
    case MetricKind::max_weighted_response: return "max_weighted_response";
    case MetricKind::max_weighted_delay_factor: return "max_weighted_delay_factor";
  }
  return "?";
}

inline std::optional<MetricKind> parse_metric_kind(std::string_view name) {
  for (auto k : {MetricKind::max_response, MetricKind::max_delay_factor, MetricKind::max_weighted_response,
                 MetricKind::max_weighted_delay_factor})
    if (name == to_string(k)) return k;
  return std::nullopt;
}

inline bool needs_deadlines(MetricKind k) {
  return k == MetricKind::max_delay_factor || k == MetricKind::max_weighted_delay_factor;
}

// max{1, (f - a)/S}
inline Rat delay_factor(const Request& req, const Rat& finish) { return max(Rat(1), (finish - req.arrival) / *req.slack()); }

// Objective contribution of one request finishing at `finish`. The weighted
// delay factor clamps before weighting: w * max{1, (f - a)/S}.
inline Rat request_metric(const Request& req, const Rat& finish, MetricKind kind) {
  switch (kind) {
    case MetricKind::max_response: return finish - req.arrival;
    case MetricKind::max_weighted_response: return req.weight * (finish - req.arrival);
    case MetricKind::max_delay_factor:
    case MetricKind::max_weighted_delay_factor: {
      if (!req.deadline) throw MismatchError(std::string(to_string(kind)) + " requires deadlines");
      Rat df = delay_factor(req, finish);
      return kind == MetricKind::max_delay_factor ? df : req.weight * df;
    }
  }
  throw std::logic_error("unknown metric");
}

// Value of the objective on an empty request set.
inline Rat metric_floor(MetricKind kind) { return kind == MetricKind::max_delay_factor ? Rat(1) : Rat(0); }

inline void require_metric_fields(const Instance& inst, MetricKind kind) {
  if (!needs_deadlines(kind)) return;
  for (RequestId r = 0; r < inst.requests.size(); ++r)
    if (!inst.requests[r].deadline) throw MismatchError(std::string(to_string(kind)) + " requires deadlines; " + request_label(inst, r) + " has none");
}

inline Rat evaluate(const Instance& inst, const Transcript& tr, MetricKind kind) {
  require_metric_fields(inst, kind);
  if (tr.finish.size() != inst.requests.size()) throw std::invalid_argument("transcript does not match the instance");
  Rat value = metric_floor(kind);
  for (RequestId r = 0; r < inst.requests.size(); ++r) {
    if (!tr.finish[r]) throw std::invalid_argument(request_label(inst, r) + " is unsatisfied");
    value = max(value, request_metric(inst.requests[r], *tr.finish[r], kind));
  }
  return value;
}

struct ReportRow {
  RequestId request = 0;
  std::string page;
  std::size_t index = 0;
  Rat arrival;
  std::optional<Rat> deadline;
  Rat weight;
  Rat finish;
  Rat response;
  std::optional<Rat> ratio;
  std::optional<Rat> delay_factor;
  Rat weighted_response;
  std::optional<Rat> weighted_delay_factor;
};

inline std::vector<ReportRow> per_request_report(const Instance& inst, const Transcript& tr) {
  std::vector<ReportRow> rows;
  for (RequestId r = 0; r < inst.requests.size(); ++r) {
    const auto& req = inst.requests[r];
    if (!tr.finish.at(r)) throw std::invalid_argument(request_label(inst, r) + " is unsatisfied");
    ReportRow row;
    row.request = r;
    row.page = inst.pages[req.page].id;
    row.index = req.index;
    row.arrival = req.arrival;
    row.deadline = req.deadline;
    row.weight = req.weight;
    row.finish = *tr.finish[r];
    row.response = row.finish - req.arrival;
    row.weighted_response = req.weight * row.response;
    if (req.deadline) {
      row.ratio = row.response / *req.slack();
      row.delay_factor = max(Rat(1), *row.ratio);
      row.weighted_delay_factor = req.weight * *row.delay_factor;
    }
    rows.push_back(std::move(row));
  }
  std::sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
    return std::tie(a.page, a.index) < std::tie(b.page, b.index);
  });
  return rows;
}

inline void write_report_csv(std::ostream& os, const std::vector<ReportRow>& rows) {
  auto opt = [](const std::optional<Rat>& v) { return v ? v->str() : std::string(); };
  os << "page,index,arrival,deadline,weight,finish,response,delay_factor,weighted_response,weighted_delay_factor\n";
  for (const auto& row : rows) {
    os << row.page << ',' << row.index << ',' << row.arrival << ',' << opt(row.deadline) << ',' << row.weight << ',' << row.finish << ','
       << row.response << ',' << opt(row.delay_factor) << ',' << row.weighted_response << ',' << opt(row.weighted_delay_factor) << '\n';
  }
}

}  // namespace bsim
