#pragma once

// Instances, requests, transmission attempts and transcripts.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "bsim/rational.hpp"

namespace bsim {

using PageId = std::size_t;     // position in Instance::pages
using RequestId = std::size_t;  // position in Instance::requests

// Raised for malformed or inconsistent instances and files.
class InstanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a simulation configuration is invalid on its own or for an
// instance (slotted + preemptive, preemption with a policy other than SSF-W).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a policy or metric needs fields the instance does not carry.
class MismatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TimeModel { slotted, continuous };
enum class Setting { broadcast, unicast };

struct Page {
  std::string id;
  Rat length;

  friend bool operator==(const Page&, const Page&) = default;
};

struct Request {
  PageId page = 0;
  Rat arrival;
  std::optional<Rat> deadline;
  Rat weight = 1;
  // Number of identical copies. In the broadcast setting all copies are
  // satisfied together; in the unicast setting each copy needs its own
  // transmission.
  std::int64_t multiplicity = 1;
  // Ordinal among the requests of the same page, in file order.
  std::size_t index = 0;

  std::optional<Rat> slack() const {
    if (!deadline) return std::nullopt;
    return *deadline - arrival;
  }

  friend bool operator==(const Request&, const Request&) = default;
};

struct Instance {
  std::vector<Page> pages;
  std::vector<Request> requests;
  TimeModel time_model = TimeModel::continuous;
  Setting setting = Setting::broadcast;

  const Page& page_of(RequestId r) const { return pages.at(requests.at(r).page); }

  bool has_deadlines() const {
    for (const auto& r : requests)
      if (!r.deadline) return false;
    return true;
  }

  std::int64_t total_jobs() const {
    std::int64_t total = 0;
    for (const auto& r : requests) total += r.multiplicity;
    return total;
  }

  std::optional<PageId> find_page(const std::string& id) const {
    for (PageId p = 0; p < pages.size(); ++p)
      if (pages[p].id == id) return p;
    return std::nullopt;
  }

  friend bool operator==(const Instance&, const Instance&) = default;
};

// Human-readable request label used in messages and reports.
inline std::string request_label(const Instance& inst, RequestId r) {
  const auto& req = inst.requests.at(r);
  return "request #" + std::to_string(r) + " (page '" + inst.pages.at(req.page).id + "', index " +
         std::to_string(req.index) + ")";
}

// Recomputes per-page request indices from file order.
inline void assign_request_indices(Instance& inst) {
  std::vector<std::size_t> next(inst.pages.size(), 0);
  for (auto& r : inst.requests) {
    if (r.page >= inst.pages.size()) throw InstanceError("request references page #" + std::to_string(r.page) + " which does not exist");
    r.index = next[r.page]++;
  }
}

// Checks every instance invariant; throws InstanceError naming the offender.
inline void validate_instance(const Instance& inst) {
  std::unordered_map<std::string, PageId> seen;
  for (PageId p = 0; p < inst.pages.size(); ++p) {
    const auto& page = inst.pages[p];
    if (page.id.empty()) throw InstanceError("page #" + std::to_string(p) + " has an empty id");
    if (!seen.emplace(page.id, p).second) throw InstanceError("duplicate page id '" + page.id + "'");
    if (page.length <= Rat(0)) throw InstanceError("page '" + page.id + "' has non-positive length " + page.length.str());
    if (inst.time_model == TimeModel::slotted && page.length != Rat(1))
      throw InstanceError("slotted-model violation: page '" + page.id + "' has length " + page.length.str() + " (must be 1)");
  }
  std::vector<std::size_t> per_page(inst.pages.size(), 0);
  for (RequestId r = 0; r < inst.requests.size(); ++r) {
    const auto& req = inst.requests[r];
    if (req.page >= inst.pages.size()) throw InstanceError("request #" + std::to_string(r) + " references an unknown page");
    const std::string who = request_label(inst, r);
    if (req.index != per_page[req.page]++) throw InstanceError(who + " has an inconsistent per-page index");
    if (req.arrival < Rat(0)) throw InstanceError(who + " has negative arrival " + req.arrival.str());
    if (req.weight <= Rat(0)) throw InstanceError(who + " has non-positive weight " + req.weight.str());
    if (req.multiplicity < 1) throw InstanceError(who + " has multiplicity " + std::to_string(req.multiplicity) + " < 1");
    if (req.deadline) {
      if (*req.deadline <= req.arrival)
        throw InstanceError(who + ": deadline before arrival (deadline " + req.deadline->str() + ", arrival " + req.arrival.str() + ")");
      Rat slack = *req.deadline - req.arrival;
      const Rat& len = inst.pages[req.page].length;
      if (slack < len) throw InstanceError(who + ": slack " + slack.str() + " < length " + len.str());
    }
    if (inst.time_model == TimeModel::slotted) {
      if (!req.arrival.is_integer()) throw InstanceError("slotted-model violation: " + who + " has non-integer arrival " + req.arrival.str());
      if (req.deadline && !req.deadline->is_integer())
        throw InstanceError("slotted-model violation: " + who + " has non-integer deadline " + req.deadline->str());
    }
  }
  if (inst.setting == Setting::unicast) {
    std::vector<int> users(inst.pages.size(), 0);
    for (RequestId r = 0; r < inst.requests.size(); ++r)
      if (++users[inst.requests[r].page] > 1)
        throw InstanceError("unicast violation: page '" + inst.pages[inst.requests[r].page].id + "' is requested by more than one request");
  }
}

enum class AttemptStatus { completed, abandoned };

struct Segment {
  Rat from;
  Rat to;

  friend bool operator==(const Segment&, const Segment&) = default;
};

// One sequential transmission of a page from its beginning. A batched
// attempt (count > 1) stands for `count` back-to-back complete
// transmissions of the page inside its single segment; grouped unicast
// simulations and compressed reference schedules emit those.
struct TransmissionAttempt {
  PageId page = 0;
  Rat start;
  std::vector<Segment> segments;
  std::optional<Rat> end;
  AttemptStatus status = AttemptStatus::completed;
  RequestId forcing_request = 0;
  std::int64_t count = 1;

  friend bool operator==(const TransmissionAttempt&, const TransmissionAttempt&) = default;
};

// Result of a schedule over an instance. The instance itself is passed
// alongside; `finish` is indexed by RequestId. For a unicast request with
// multiplicity m, finish is the completion of its m-th copy.
struct Transcript {
  Rat speed = 1;
  std::vector<TransmissionAttempt> attempts;
  std::vector<std::optional<Rat>> finish;

  friend bool operator==(const Transcript&, const Transcript&) = default;
};

inline const char* to_string(TimeModel m) { return m == TimeModel::slotted ? "slotted" : "continuous"; }
inline const char* to_string(Setting s) { return s == Setting::broadcast ? "broadcast" : "unicast"; }
inline const char* to_string(AttemptStatus s) { return s == AttemptStatus::completed ? "completed" : "abandoned"; }

}  // namespace bsim
