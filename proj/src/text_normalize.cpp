// Copyright 2026 The QA-SNNE Toolkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qasnne/text_normalize.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "qasnne/errors.hpp"

namespace qasnne {

std::string normalize_text(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) {
    throw std::runtime_error("ICU NFC normalizer unavailable");
  }
  icu::UnicodeString input = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  if (input.indexOf(static_cast<UChar>(0xFFFD)) >= 0 &&
      std::string_view(text).find("\xEF\xBF\xBD") == std::string_view::npos) {
    throw ValidationError("invalid UTF-8 in text field");
  }
  icu::UnicodeString composed = nfc->normalize(input, status);
  if (U_FAILURE(status)) {
    throw ValidationError("text normalization failed");
  }

  int32_t begin = 0;
  int32_t end = composed.length();
  while (begin < end && u_isUWhiteSpace(composed.char32At(begin))) {
    begin = composed.moveIndex32(begin, 1);
  }
  while (end > begin) {
    const int32_t prev = composed.moveIndex32(end, -1);
    if (!u_isUWhiteSpace(composed.char32At(prev))) break;
    end = prev;
  }
  std::string out;
  composed.tempSubStringBetween(begin, end).toUTF8String(out);
  return out;
}

}  // namespace qasnne
