// lsdwfst/log.hpp

// Copyright 2026  lsdwfst authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string_view>

namespace lsdwfst {

enum class LogLevel { kError = 0, kWarning = 1, kInfo = 2, kDebug = 3 };

// Level is read once from LSD_WFST_LOG (error|warn|info|debug); default warn.
inline LogLevel CurrentLogLevel() {
  static const LogLevel level = [] {
    const char* env = std::getenv("LSD_WFST_LOG");
    if (env == nullptr) return LogLevel::kWarning;
    std::string_view v(env);
    if (v == "error") return LogLevel::kError;
    if (v == "info") return LogLevel::kInfo;
    if (v == "debug") return LogLevel::kDebug;
    return LogLevel::kWarning;
  }();
  return level;
}

namespace detail {

class LogMessage {
 public:
  LogMessage(LogLevel level, const char* tag) : enabled_(level <= CurrentLogLevel()) {
    if (enabled_) stream_ << tag << ": ";
  }
  ~LogMessage() {
    if (enabled_) {
      stream_ << '\n';
      std::cerr << stream_.str();
    }
  }
  template <typename T>
  LogMessage& operator<<(const T& v) {
    if (enabled_) stream_ << v;
    return *this;
  }

 private:
  bool enabled_;
  std::ostringstream stream_;
};

}  // namespace detail

#define LSDWFST_WARN ::lsdwfst::detail::LogMessage(::lsdwfst::LogLevel::kWarning, "WARNING")
#define LSDWFST_LOG ::lsdwfst::detail::LogMessage(::lsdwfst::LogLevel::kInfo, "LOG")
#define LSDWFST_VLOG ::lsdwfst::detail::LogMessage(::lsdwfst::LogLevel::kDebug, "VLOG")

}  // namespace lsdwfst
