// Copyright 2026 The polarcap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <iostream>
#include <mutex>
#include <string_view>

namespace polarcap::log {

enum class Level { kQuiet = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

inline std::atomic<int>& verbosity() {
  static std::atomic<int> v{static_cast<int>(Level::kWarn)};
  return v;
}

inline void set_level(Level l) { verbosity().store(static_cast<int>(l)); }

inline void write(Level l, std::string_view tag, std::string_view msg) {
  if (static_cast<int>(l) > verbosity().load()) return;
  static std::mutex m;
  std::lock_guard lock(m);
  std::cerr << "[polarcap " << tag << "] " << msg << '\n';
}

inline void warn(std::string_view msg) { write(Level::kWarn, "warn", msg); }
inline void info(std::string_view msg) { write(Level::kInfo, "info", msg); }
inline void debug(std::string_view msg) { write(Level::kDebug, "debug", msg); }

}  // namespace polarcap::log
