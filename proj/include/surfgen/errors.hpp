// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SURFGEN_ERRORS_HPP_
#define SURFGEN_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace surfgen {

enum class Errc {
  // corpus
  EmptyLine,
  DuplicateAttribute,
  MissingBinding,
  Cycle,
  MultipleRoots,
  IndexOutOfRange,
  NonProjective,
  MalformedRecord,
  // generation
  EmptyAttributeSet,
  UnknownAttribute,
  AttributeMismatch,
  // evaluation
  MissingJudgment,
  DuplicateJudgment,
  // generic
  BadFormat,
  InvalidArgument,
  IoError,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::EmptyLine: return "EmptyLine";
    case Errc::DuplicateAttribute: return "DuplicateAttribute";
    case Errc::MissingBinding: return "MissingBinding";
    case Errc::Cycle: return "Cycle";
    case Errc::MultipleRoots: return "MultipleRoots";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::NonProjective: return "NonProjective";
    case Errc::MalformedRecord: return "MalformedRecord";
    case Errc::EmptyAttributeSet: return "EmptyAttributeSet";
    case Errc::UnknownAttribute: return "UnknownAttribute";
    case Errc::AttributeMismatch: return "AttributeMismatch";
    case Errc::MissingJudgment: return "MissingJudgment";
    case Errc::DuplicateJudgment: return "DuplicateJudgment";
    case Errc::BadFormat: return "BadFormat";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::IoError: return "IoError";
  }
  return "unknown";
}

// Single exception type for the whole library; the code tells callers (and
// tests) which contract was violated.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& msg) {
  throw Error(code, msg);
}

}  // namespace surfgen

#endif  // SURFGEN_ERRORS_HPP_
