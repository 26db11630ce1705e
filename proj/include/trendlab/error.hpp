/*
 * Copyright 2026 The trendlab Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
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
#include <string_view>

namespace trendlab {

enum class Errc {
  // dataset and model files
  MissingHeader,
  RaggedRow,
  DuplicateTimeIndex,
  NonFiniteValue,
  NonPositiveTime,
  BadEventFlag,
  InvalidDataset,
  VersionMismatch,
  ShapeMismatch,
  Io,
  // network
  EmptyLayerList,
  ZeroWidthLayer,
  DimensionMismatch,
  CacheMismatch,
  // training and evaluation
  InvalidConfig,
  SequenceTooShort,
  EmptyDataset,
  NoComparablePairs,
  EmptyPairList,
  NonFiniteInput,
  SeriesTooShort,
  LengthMismatch,
  ConstantVector,
  WindowTooLarge,
  // numeric failures
  DivergedLoss,
  IsolatedBallAfterRetries,
  NumericBlowup,
};

enum class ErrorCategory { Usage, Data, Numeric };

constexpr std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::MissingHeader: return "MissingHeader";
    case Errc::RaggedRow: return "RaggedRow";
    case Errc::DuplicateTimeIndex: return "DuplicateTimeIndex";
    case Errc::NonFiniteValue: return "NonFiniteValue";
    case Errc::NonPositiveTime: return "NonPositiveTime";
    case Errc::BadEventFlag: return "BadEventFlag";
    case Errc::InvalidDataset: return "InvalidDataset";
    case Errc::VersionMismatch: return "VersionMismatch";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::Io: return "Io";
    case Errc::EmptyLayerList: return "EmptyLayerList";
    case Errc::ZeroWidthLayer: return "ZeroWidthLayer";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::CacheMismatch: return "CacheMismatch";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::SequenceTooShort: return "SequenceTooShort";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::NoComparablePairs: return "NoComparablePairs";
    case Errc::EmptyPairList: return "EmptyPairList";
    case Errc::NonFiniteInput: return "NonFiniteInput";
    case Errc::SeriesTooShort: return "SeriesTooShort";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::ConstantVector: return "ConstantVector";
    case Errc::WindowTooLarge: return "WindowTooLarge";
    case Errc::DivergedLoss: return "DivergedLoss";
    case Errc::IsolatedBallAfterRetries: return "IsolatedBallAfterRetries";
    case Errc::NumericBlowup: return "NumericBlowup";
  }
  return "Unknown";
}

constexpr ErrorCategory category_of(Errc code) {
  switch (code) {
    case Errc::DivergedLoss:
    case Errc::IsolatedBallAfterRetries:
    case Errc::NumericBlowup:
      return ErrorCategory::Numeric;
    case Errc::InvalidConfig:
      return ErrorCategory::Usage;
    default:
      return ErrorCategory::Data;
  }
}

/// Every failure in the library surfaces as this exception. The code is
/// stable and machine-checkable; the message carries context such as the
/// offending line number.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  Errc code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return category_of(code_); }

 private:
  Errc code_;
};

}  // namespace trendlab
