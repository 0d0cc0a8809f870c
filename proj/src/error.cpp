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

#include "stackselect/error.hpp"

namespace stackselect {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidVolume: return "InvalidVolume";
        case ErrorCode::InvalidParameter: return "InvalidParameter";
        case ErrorCode::RequiresIsotropic: return "RequiresIsotropic";
        case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorCode::RankTooLarge: return "RankTooLarge";
        case ErrorCode::InvalidMatrix: return "InvalidMatrix";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::SingularSystem: return "SingularSystem";
        case ErrorCode::DegenerateTensor: return "DegenerateTensor";
        case ErrorCode::EmptyMask: return "EmptyMask";
        case ErrorCode::InsufficientStacks: return "InsufficientStacks";
        case ErrorCode::DivisionByZeroBaseline: return "DivisionByZeroBaseline";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
        case ErrorCode::CorruptFile: return "CorruptFile";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::DegenerateTruth: return "DegenerateTruth";
    }
    return "UnknownError";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      detail_(message) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace stackselect
