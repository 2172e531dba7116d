#include "qse/log.hpp"

#include <array>

#include <json.hpp>

namespace qse {
namespace {

using nlohmann::json;

json vecToJson(const double* data, int n) {
  json a = json::array();
  for (int i = 0; i < n; ++i) a.push_back(data[i]);
  return a;
}

template <typename Derived>
json toJson(const Eigen::MatrixBase<Derived>& v) {
  return vecToJson(v.derived().eval().data(), static_cast<int>(v.size()));
}

json quatToJson(const Quat& q) {
  return json::array({q.w(), q.x(), q.y(), q.z()});
}

json flagsToJson(const std::array<bool, kNumLegs>& flags) {
  json a = json::array();
  for (bool b : flags) a.push_back(b);
  return a;
}

template <typename Vec>
void readVec(const json& j, const char* key, Vec& out) {
  const json& a = j.at(key);
  if (!a.is_array() || static_cast<int>(a.size()) != out.size()) {
    throw LogError(std::string("bad array length for key '") + key + "'");
  }
  for (int i = 0; i < out.size(); ++i) out[i] = a[i].get<double>();
}

Quat readQuat(const json& j, const char* key) {
  const json& a = j.at(key);
  if (!a.is_array() || a.size() != 4) {
    throw LogError(std::string("bad quaternion for key '") + key + "'");
  }
  return Quat(a[0].get<double>(), a[1].get<double>(), a[2].get<double>(), a[3].get<double>());
}

std::array<bool, kNumLegs> readFlags(const json& j, const char* key) {
  const json& a = j.at(key);
  if (!a.is_array() || a.size() != kNumLegs) {
    throw LogError(std::string("bad flag array for key '") + key + "'");
  }
  std::array<bool, kNumLegs> out{};
  for (int i = 0; i < kNumLegs; ++i) out[i] = a[i].get<bool>();
  return out;
}

json eventToJson(const LogEvent& ev) {
  json j;
  std::visit(
      [&j](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        j["t"] = e.t;
        if constexpr (std::is_same_v<T, ImuSample>) {
          j["ch"] = "imu";
          j["w"] = toJson(e.gyro);
          j["f"] = toJson(e.accel);
        } else if constexpr (std::is_same_v<T, JointSample>) {
          j["ch"] = "joints";
          j["q"] = toJson(e.q);
          j["qd"] = toJson(e.qd);
          j["tau"] = toJson(e.tau);
        } else if constexpr (std::is_same_v<T, ExteroPoseSample>) {
          j["ch"] = "extero_pose";
          j["p"] = toJson(e.pos);
          j["q"] = quatToJson(e.att);
        } else if constexpr (std::is_same_v<T, ExteroTwistSample>) {
          j["ch"] = "extero_twist";
          j["v"] = toJson(e.vel);
        } else if constexpr (std::is_same_v<T, DesiredFootSample>) {
          j["ch"] = "desired_foot";
          json feet = json::array();
          for (const Vec3& p : e.pos) feet.push_back(toJson(p));
          j["feet"] = feet;
        } else if constexpr (std::is_same_v<T, GroundTruthSample>) {
          j["ch"] = "ground_truth";
          j["p"] = toJson(e.pos);
          j["q"] = quatToJson(e.att);
          j["v"] = toJson(e.vel);
          j["w"] = toJson(e.omega);
          j["contact"] = flagsToJson(e.contact);
          j["slip"] = flagsToJson(e.slip);
        } else if constexpr (std::is_same_v<T, EstimateSample>) {
          j["ch"] = "estimate";
          j["p"] = toJson(e.pos);
          j["q"] = quatToJson(e.att);
          j["v"] = toJson(e.vel);
          j["bg"] = toJson(e.gyro_bias);
          j["contact"] = flagsToJson(e.contact);
          j["slip"] = flagsToJson(e.slip);
        }
      },
      ev);
  return j;
}

LogEvent eventFromJson(const json& j) {
  const std::string ch = j.at("ch").get<std::string>();
  const double t = j.at("t").get<double>();
  if (ch == "imu") {
    ImuSample e;
    e.t = t;
    readVec(j, "w", e.gyro);
    readVec(j, "f", e.accel);
    return e;
  }
  if (ch == "joints") {
    JointSample e;
    e.t = t;
    readVec(j, "q", e.q);
    readVec(j, "qd", e.qd);
    readVec(j, "tau", e.tau);
    return e;
  }
  if (ch == "extero_pose") {
    ExteroPoseSample e;
    e.t = t;
    readVec(j, "p", e.pos);
    e.att = readQuat(j, "q");
    return e;
  }
  if (ch == "extero_twist") {
    ExteroTwistSample e;
    e.t = t;
    readVec(j, "v", e.vel);
    return e;
  }
  if (ch == "desired_foot") {
    DesiredFootSample e;
    e.t = t;
    const json& feet = j.at("feet");
    if (!feet.is_array() || feet.size() != kNumLegs) throw LogError("bad desired_foot feet");
    for (int i = 0; i < kNumLegs; ++i) {
      if (!feet[i].is_array() || feet[i].size() != 3) throw LogError("bad desired_foot entry");
      for (int k = 0; k < 3; ++k) e.pos[i][k] = feet[i][k].get<double>();
    }
    return e;
  }
  if (ch == "ground_truth") {
    GroundTruthSample e;
    e.t = t;
    readVec(j, "p", e.pos);
    e.att = readQuat(j, "q");
    readVec(j, "v", e.vel);
    readVec(j, "w", e.omega);
    e.contact = readFlags(j, "contact");
    e.slip = readFlags(j, "slip");
    return e;
  }
  if (ch == "estimate") {
    EstimateSample e;
    e.t = t;
    readVec(j, "p", e.pos);
    e.att = readQuat(j, "q");
    readVec(j, "v", e.vel);
    readVec(j, "bg", e.gyro_bias);
    e.contact = readFlags(j, "contact");
    e.slip = readFlags(j, "slip");
    return e;
  }
  throw LogError("unknown channel '" + ch + "'");
}

}  // namespace

double eventTime(const LogEvent& ev) {
  return std::visit([](const auto& e) { return e.t; }, ev);
}

const char* eventChannel(const LogEvent& ev) {
  return std::visit(
      [](const auto& e) -> const char* {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, ImuSample>) return "imu";
        else if constexpr (std::is_same_v<T, JointSample>) return "joints";
        else if constexpr (std::is_same_v<T, ExteroPoseSample>) return "extero_pose";
        else if constexpr (std::is_same_v<T, ExteroTwistSample>) return "extero_twist";
        else if constexpr (std::is_same_v<T, DesiredFootSample>) return "desired_foot";
        else if constexpr (std::is_same_v<T, GroundTruthSample>) return "ground_truth";
        else return "estimate";
      },
      ev);
}

LogWriter::LogWriter(const std::string& path) : out_(path), path_(path) {
  if (!out_) throw LogError("cannot open log for writing: " + path);
  out_ << "{\"v\":1}\n";
}

LogWriter::~LogWriter() = default;

void LogWriter::write(const LogEvent& ev) {
  out_ << eventToJson(ev).dump() << '\n';
  if (!out_) throw LogError("write failed: " + path_);
}

void LogWriter::flush() { out_.flush(); }

std::vector<LogEvent> readLog(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LogError("cannot open log: " + path);

  std::vector<LogEvent> events;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw LogError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (!header_seen) {
      if (!j.is_object() || !j.contains("v")) {
        throw LogError(path + ":1: missing log header");
      }
      if (j.at("v").get<int>() != 1) {
        throw LogError(path + ": unsupported log version");
      }
      header_seen = true;
      continue;
    }
    try {
      events.push_back(eventFromJson(j));
    } catch (const json::exception& e) {
      throw LogError(path + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const LogError& e) {
      throw LogError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!header_seen) throw LogError(path + ": empty log");
  return events;
}

std::vector<TimedPose> extractPoses(const std::vector<LogEvent>& events,
                                    const std::string& channel) {
  std::vector<TimedPose> out;
  for (const LogEvent& ev : events) {
    if (channel == "ground_truth") {
      if (const auto* e = std::get_if<GroundTruthSample>(&ev)) {
        out.push_back({e->t, e->pos, e->att});
      }
    } else if (channel == "estimate") {
      if (const auto* e = std::get_if<EstimateSample>(&ev)) {
        out.push_back({e->t, e->pos, e->att});
      }
    } else if (channel == "extero_pose") {
      if (const auto* e = std::get_if<ExteroPoseSample>(&ev)) {
        out.push_back({e->t, e->pos, e->att});
      }
    }
  }
  return out;
}

}  // namespace qse
