/*
 * stackselect : motion assessment and reference stack selection
 *
 * Copyright 2026 the stackselect authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace stackselect {

enum class ErrorCode {
    InvalidVolume,
    InvalidParameter,
    RequiresIsotropic,
    IndexOutOfRange,
    RankTooLarge,
    InvalidMatrix,
    ShapeMismatch,
    SingularSystem,
    DegenerateTensor,
    EmptyMask,
    InsufficientStacks,
    DivisionByZeroBaseline,
    EmptyInput,
    UnsupportedFormat,
    CorruptFile,
    IoError,
    DegenerateTruth,
};

const char* to_string(ErrorCode code);

/// Library-wide exception; carries the machine-readable failure category.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);
    ErrorCode code() const noexcept { return code_; }
    /// The message without the code prefix that what() carries.
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace stackselect
