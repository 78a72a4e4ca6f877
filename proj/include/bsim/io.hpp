#pragma once

// JSON encoding of instances and transcripts. Every numeric value is a
// string holding an exact integer ("7") or rational ("20/19").

#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>

#include <json.hpp>

#include "bsim/model.hpp"

namespace bsim {

using json = nlohmann::json;

namespace detail {

inline Rat rat_field(const json& j, const std::string& where) {
  if (!j.is_string()) throw InstanceError(where + ": expected a rational string");
  try {
    return Rat::parse(j.get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw InstanceError(where + ": " + e.what());
  }
}

inline const json& member(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw InstanceError(where + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw InstanceError(where + ": missing key '" + key + "'");
  return *it;
}

inline std::string string_field(const json& j, const std::string& where) {
  if (!j.is_string()) throw InstanceError(where + ": expected a string");
  return j.get<std::string>();
}

inline std::int64_t int_field(const json& j, const std::string& where) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  Rat v = rat_field(j, where);
  auto n = v.to_int64();
  if (!n) throw InstanceError(where + ": expected an integer, got " + v.str());
  return *n;
}

}  // namespace detail

inline json instance_to_json(const Instance& inst) {
  json j;
  j["time_model"] = to_string(inst.time_model);
  j["setting"] = to_string(inst.setting);
  j["pages"] = json::array();
  for (const auto& p : inst.pages) j["pages"].push_back({{"id", p.id}, {"length", p.length.str()}});
  j["requests"] = json::array();
  for (const auto& r : inst.requests) {
    json jr{{"page", inst.pages[r.page].id}, {"arrival", r.arrival.str()}};
    if (r.deadline) jr["deadline"] = r.deadline->str();
    if (r.weight != Rat(1)) jr["weight"] = r.weight.str();
    if (r.multiplicity != 1) jr["multiplicity"] = std::to_string(r.multiplicity);
    j["requests"].push_back(std::move(jr));
  }
  return j;
}

inline Instance instance_from_json(const json& j) {
  Instance inst;
  const std::string tm = detail::string_field(detail::member(j, "time_model", "instance"), "time_model");
  if (tm == "slotted") inst.time_model = TimeModel::slotted;
  else if (tm == "continuous") inst.time_model = TimeModel::continuous;
  else throw InstanceError("time_model: unknown value '" + tm + "'");
  const std::string st = detail::string_field(detail::member(j, "setting", "instance"), "setting");
  if (st == "broadcast") inst.setting = Setting::broadcast;
  else if (st == "unicast") inst.setting = Setting::unicast;
  else throw InstanceError("setting: unknown value '" + st + "'");

  const json& pages = detail::member(j, "pages", "instance");
  if (!pages.is_array()) throw InstanceError("pages: expected an array");
  for (std::size_t i = 0; i < pages.size(); ++i) {
    const std::string where = "pages[" + std::to_string(i) + "]";
    Page p;
    p.id = detail::string_field(detail::member(pages[i], "id", where), where + ".id");
    p.length = detail::rat_field(detail::member(pages[i], "length", where), where + ".length");
    inst.pages.push_back(std::move(p));
  }
  const json& requests = detail::member(j, "requests", "instance");
  if (!requests.is_array()) throw InstanceError("requests: expected an array");
  for (std::size_t i = 0; i < requests.size(); ++i) {
    const std::string where = "requests[" + std::to_string(i) + "]";
    const json& jr = requests[i];
    Request r;
    const std::string page = detail::string_field(detail::member(jr, "page", where), where + ".page");
    auto pid = inst.find_page(page);
    if (!pid) throw InstanceError(where + " references unknown page '" + page + "'");
    r.page = *pid;
    r.arrival = detail::rat_field(detail::member(jr, "arrival", where), where + ".arrival");
    if (jr.contains("deadline") && !jr["deadline"].is_null()) r.deadline = detail::rat_field(jr["deadline"], where + ".deadline");
    if (jr.contains("weight")) r.weight = detail::rat_field(jr["weight"], where + ".weight");
    if (jr.contains("multiplicity")) r.multiplicity = detail::int_field(jr["multiplicity"], where + ".multiplicity");
    inst.requests.push_back(std::move(r));
  }
  assign_request_indices(inst);
  validate_instance(inst);
  return inst;
}

inline Instance parse_instance(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InstanceError(std::string("malformed instance JSON: ") + e.what());
  }
  return instance_from_json(j);
}

inline std::string serialize_instance(const Instance& inst) { return instance_to_json(inst).dump(2); }

inline json transcript_to_json(const Instance& inst, const Transcript& tr) {
  json j;
  j["instance"] = instance_to_json(inst);
  j["speed"] = tr.speed.str();
  j["attempts"] = json::array();
  for (const auto& a : tr.attempts) {
    json ja;
    ja["page"] = inst.pages.at(a.page).id;
    ja["start"] = a.start.str();
    ja["segments"] = json::array();
    for (const auto& s : a.segments) ja["segments"].push_back({s.from.str(), s.to.str()});
    if (a.end) ja["end"] = a.end->str();
    ja["status"] = to_string(a.status);
    ja["forcing_request"] = a.forcing_request;
    if (a.count != 1) ja["count"] = std::to_string(a.count);
    j["attempts"].push_back(std::move(ja));
  }
  j["finish"] = json::array();
  for (const auto& f : tr.finish) j["finish"].push_back(f ? json(f->str()) : json(nullptr));
  return j;
}

inline std::pair<Instance, Transcript> transcript_from_json(const json& j) {
  Instance inst = instance_from_json(detail::member(j, "instance", "transcript"));
  Transcript tr;
  tr.speed = detail::rat_field(detail::member(j, "speed", "transcript"), "speed");
  const json& attempts = detail::member(j, "attempts", "transcript");
  if (!attempts.is_array()) throw InstanceError("attempts: expected an array");
  for (std::size_t i = 0; i < attempts.size(); ++i) {
    const std::string where = "attempts[" + std::to_string(i) + "]";
    const json& ja = attempts[i];
    TransmissionAttempt a;
    const std::string page = detail::string_field(detail::member(ja, "page", where), where + ".page");
    auto pid = inst.find_page(page);
    if (!pid) throw InstanceError(where + " references unknown page '" + page + "'");
    a.page = *pid;
    a.start = detail::rat_field(detail::member(ja, "start", where), where + ".start");
    const json& segs = detail::member(ja, "segments", where);
    if (!segs.is_array()) throw InstanceError(where + ".segments: expected an array");
    for (const auto& s : segs) {
      if (!s.is_array() || s.size() != 2) throw InstanceError(where + ".segments: expected [from, to] pairs");
      a.segments.push_back({detail::rat_field(s[0], where + ".segments"), detail::rat_field(s[1], where + ".segments")});
    }
    if (ja.contains("end")) a.end = detail::rat_field(ja["end"], where + ".end");
    const std::string status = detail::string_field(detail::member(ja, "status", where), where + ".status");
    if (status == "completed") a.status = AttemptStatus::completed;
    else if (status == "abandoned") a.status = AttemptStatus::abandoned;
    else throw InstanceError(where + ".status: unknown value '" + status + "'");
    const json& forcing = detail::member(ja, "forcing_request", where);
    if (!forcing.is_number_unsigned()) throw InstanceError(where + ".forcing_request: expected a request position");
    a.forcing_request = forcing.get<std::size_t>();
    if (ja.contains("count")) a.count = detail::int_field(ja["count"], where + ".count");
    tr.attempts.push_back(std::move(a));
  }
  const json& finish = detail::member(j, "finish", "transcript");
  if (!finish.is_array()) throw InstanceError("finish: expected an array");
  for (std::size_t i = 0; i < finish.size(); ++i) {
    if (finish[i].is_null()) tr.finish.emplace_back();
    else tr.finish.emplace_back(detail::rat_field(finish[i], "finish[" + std::to_string(i) + "]"));
  }
  return {std::move(inst), std::move(tr)};
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InstanceError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
}

inline json parse_json_text(std::string_view text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InstanceError("malformed " + what + " JSON: " + e.what());
  }
}

}  // namespace bsim
