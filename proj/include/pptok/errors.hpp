// Copyright 2026 The pptok Authors
//
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

#include <stdexcept>
#include <string>

namespace pptok {

/// Base of every error raised by the library. Each subclass names one
/// failure kind so callers can catch narrowly or collectively.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define PPTOK_DEFINE_ERROR(Name)                  \
  class Name : public Error {                     \
   public:                                        \
    explicit Name(const std::string& what)        \
        : Error(std::string(#Name ": ") + what) {} \
  }

// audio and features
PPTOK_DEFINE_ERROR(MalformedWav);
PPTOK_DEFINE_ERROR(UnsupportedEncoding);
PPTOK_DEFINE_ERROR(ConfigError);

// shared
PPTOK_DEFINE_ERROR(DimensionMismatch);
PPTOK_DEFINE_ERROR(EmptyInput);
PPTOK_DEFINE_ERROR(MalformedFile);
PPTOK_DEFINE_ERROR(VersionMismatch);

// quantizer / tokenizer
PPTOK_DEFINE_ERROR(InsufficientData);
PPTOK_DEFINE_ERROR(InvariantViolation);

// token language model
PPTOK_DEFINE_ERROR(EmptyCorpus);
PPTOK_DEFINE_ERROR(UnknownToken);

// metrics
PPTOK_DEFINE_ERROR(NoVoicedOverlap);
PPTOK_DEFINE_ERROR(EmptyReferenceSet);
PPTOK_DEFINE_ERROR(CorpusTooSmall);
PPTOK_DEFINE_ERROR(DegenerateGroundTruth);

// corpus / pipeline
PPTOK_DEFINE_ERROR(InsufficientSpeakers);
PPTOK_DEFINE_ERROR(MalformedRecord);
PPTOK_DEFINE_ERROR(MissingFeatures);
PPTOK_DEFINE_ERROR(IdMismatch);

#undef PPTOK_DEFINE_ERROR

}  // namespace pptok
