// JSON-lines log format shared by the simulator, the estimator and the
// evaluation tools.
//
// The first line is a header {"v":1}; every following line is one record
// tagged by its channel, e.g.
//   {"ch":"imu","f":[0.0,0.0,9.81],"t":0.0025,"w":[0.0,0.0,0.0]}
// Keys are emitted in sorted order and doubles with shortest-round-trip
// formatting, so write -> read -> write reproduces a file byte for byte.
// Timestamps are seconds; records are stored in arrival order.

#pragma once

#include <fstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "qse/measurements.hpp"

namespace qse {

class LogError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using LogEvent = std::variant<ImuSample, JointSample, ExteroPoseSample, ExteroTwistSample,
                              DesiredFootSample, GroundTruthSample, EstimateSample>;

double eventTime(const LogEvent& ev);
const char* eventChannel(const LogEvent& ev);

class LogWriter {
 public:
  explicit LogWriter(const std::string& path);  // throws LogError when unwritable
  ~LogWriter();

  void write(const LogEvent& ev);
  void flush();

 private:
  std::ofstream out_;
  std::string path_;
};

// Reads a whole log; throws LogError with file/line context on malformed
// input or unsupported version.
std::vector<LogEvent> readLog(const std::string& path);

// Poses of one channel ("ground_truth" or "estimate") in record order.
struct TimedPose {
  double t = 0.0;
  Vec3 pos = Vec3::Zero();
  Quat att;
};
std::vector<TimedPose> extractPoses(const std::vector<LogEvent>& events,
                                    const std::string& channel);

}  // namespace qse
