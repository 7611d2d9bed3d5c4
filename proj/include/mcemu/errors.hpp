/*
 * Copyright 2026 The mcemu Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <exception>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mcemu {

// Root of everything the library throws on bad input or failed simulation.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Configuration problems: anything the user can fix by editing an input file
// or a command-line flag. The CLI maps these to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public ConfigError {
 public:
  SchemaError(std::string path, const std::string& what)
      : ConfigError(path + ": " + what), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class UnknownChannel : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class MultipleReaders : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class MultipleWriters : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class LengthMismatch : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class ZeroCapacity : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class SecondTaskOnCore : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class DanglingChannel : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class UnknownFrequency : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class MappingError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class EmptyInput : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// Kernel API misuse (e.g. creating cores after run()).
class UsageError : public Error {
 public:
  using Error::Error;
};

// One blocked task in a wait-for graph.
struct BlockedTask {
  std::string task;
  std::size_t core = 0;
  std::string waiting_on;   // event description
  std::string waiting_for;  // task expected to notify, empty if unknown
};

class Deadlock : public Error {
 public:
  explicit Deadlock(std::vector<BlockedTask> blocked)
      : Error(describe(blocked)), blocked_(std::move(blocked)) {}

  const std::vector<BlockedTask>& blocked() const noexcept { return blocked_; }

 private:
  static std::string describe(const std::vector<BlockedTask>& blocked) {
    std::string msg = "deadlock: " + std::to_string(blocked.size()) +
                      " task(s) blocked with an empty ready queue";
    for (const auto& b : blocked) {
      msg += "\n  " + b.task + " (core " + std::to_string(b.core) +
             ") waits on " + b.waiting_on;
      if (!b.waiting_for.empty()) msg += " <- " + b.waiting_for;
    }
    return msg;
  }

  std::vector<BlockedTask> blocked_;
};

// A group of tasks admits no sequential order (the tasks depend on each
// other cyclically, or the application itself cannot complete).
class FusionCycle : public Error {
 public:
  using Error::Error;
};

// Failure while evaluating one design of a sweep. The original exception is
// kept so callers can branch on its type.
class DesignError : public Error {
 public:
  DesignError(std::size_t design_id, const std::string& what,
              std::exception_ptr cause)
      : Error("design " + std::to_string(design_id) + ": " + what),
        design_id_(design_id),
        cause_(std::move(cause)) {}

  std::size_t design_id() const noexcept { return design_id_; }
  const std::exception_ptr& cause() const noexcept { return cause_; }

 private:
  std::size_t design_id_;
  std::exception_ptr cause_;
};

}  // namespace mcemu
