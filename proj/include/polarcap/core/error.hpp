// Copyright 2026 The polarcap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace polarcap {

enum class ErrorCategory {
  kInput,       // malformed or inconsistent in-memory input
  kUnphysical,  // Stokes vector with degree of polarization above one
  kDomain,      // argument outside a function's domain
  kParse,       // malformed file content
  kIo,          // missing file, failed read or write
  kConfig,      // invalid configuration
  kDivergence,  // optimizer diverged
  kUsage,       // command-line misuse
};

constexpr std::string_view to_string(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::kInput: return "input";
    case ErrorCategory::kUnphysical: return "unphysical";
    case ErrorCategory::kDomain: return "domain";
    case ErrorCategory::kParse: return "parse";
    case ErrorCategory::kIo: return "io";
    case ErrorCategory::kConfig: return "config";
    case ErrorCategory::kDivergence: return "divergence";
    case ErrorCategory::kUsage: return "usage";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

[[noreturn]] inline void fail(ErrorCategory category, const std::string& what) {
  throw Error(category, what);
}

}  // namespace polarcap
