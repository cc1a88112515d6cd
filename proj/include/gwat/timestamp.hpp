#pragma once

#include <chrono>
#include <cstdio>
#include <ctime>
#include <string>

namespace gwat {

using Timestamp = std::chrono::sys_time<std::chrono::microseconds>;

inline Timestamp now_utc() {
  return std::chrono::time_point_cast<std::chrono::microseconds>(std::chrono::system_clock::now());
}

// RFC 3339 UTC with microseconds, e.g. "2024-03-01T09:15:02.000417Z".
inline std::string to_rfc3339(Timestamp ts) {
  const auto us = ts.time_since_epoch().count();
  auto secs = us / 1'000'000;
  auto frac = us % 1'000'000;
  if (frac < 0) {
    frac += 1'000'000;
    --secs;
  }
  const std::time_t t = static_cast<std::time_t>(secs);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[96];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%06lldZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                static_cast<long long>(frac));
  return buf;
}

}  // namespace gwat
