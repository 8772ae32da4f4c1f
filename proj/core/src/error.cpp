// Copyright 2026 The scoretrend Authors
//
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

#include "scoretrend/error.hpp"

namespace scoretrend {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "InvalidInput";
    case ErrorCode::kEmptyAfterTruncation: return "EmptyAfterTruncation";
    case ErrorCode::kNonMonotoneScores: return "NonMonotoneScores";
    case ErrorCode::kUnsupportedOrder: return "UnsupportedOrder";
    case ErrorCode::kFactorizationFailure: return "FactorizationFailure";
    case ErrorCode::kOptimizerDiverged: return "OptimizerDiverged";
    case ErrorCode::kChainDiverged: return "ChainDiverged";
    case ErrorCode::kDegenerateCorrelation: return "DegenerateCorrelation";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kMissingBundle: return "MissingBundle";
    case ErrorCode::kSeasonFailureThreshold: return "SeasonFailureThreshold";
  }
  return "Unknown";
}

}  // namespace scoretrend
