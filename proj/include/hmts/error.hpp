/*
 Copyright 2026 The hmts Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

     http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hmts {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class ConfigurationError : public Error {
 public:
  using Error::Error;
};

/// A root search target lies outside the searchable Es/N0 bracket.
class OutOfRange : public Error {
 public:
  using Error::Error;
};

class ReconstructionFailed : public Error {
 public:
  ReconstructionFailed(std::string rate, const std::string& what)
      : Error(what), rate_(std::move(rate)) {}
  const std::string& rate() const noexcept { return rate_; }

 private:
  std::string rate_;
};

/// One or more receivers cannot be served at a positive rate.
class DegenerateReceiver : public Error {
 public:
  DegenerateReceiver(std::vector<std::string> offenders, const std::string& what)
      : Error(what), offenders_(std::move(offenders)) {}
  const std::vector<std::string>& offenders() const noexcept { return offenders_; }

 private:
  std::vector<std::string> offenders_;
};

class SizeError : public Error {
 public:
  using Error::Error;
};

}  // namespace hmts
