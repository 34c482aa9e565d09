// Copyright 2026 The spanqa Authors.
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

#include "spanqa/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>
#include <unicode/ustring.h>

#include "spanqa/error.hpp"

namespace spanqa {
namespace {

icu::UnicodeString to_unicode(std::string_view utf8) {
  UErrorCode status = U_ZERO_ERROR;
  int32_t length = 0;
  // Preflight rejects ill-formed sequences that fromUTF8 would replace.
  u_strFromUTF8(nullptr, 0, &length, utf8.data(),
                static_cast<int32_t>(utf8.size()), &status);
  if (status == U_INVALID_CHAR_FOUND || status == U_ILLEGAL_CHAR_FOUND) {
    throw ParseError("ill-formed UTF-8");
  }
  return icu::UnicodeString::fromUTF8(
      icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
}

}  // namespace

CharSeq decode_utf8(std::string_view utf8) {
  icu::UnicodeString text = to_unicode(utf8);
  CharSeq out;
  out.reserve(static_cast<std::size_t>(text.countChar32()));
  for (int32_t i = 0; i < text.length(); i = text.moveIndex32(i, 1)) {
    out.push_back(static_cast<char32_t>(text.char32At(i)));
  }
  return out;
}

std::string encode_utf8(std::u32string_view chars) {
  icu::UnicodeString text = icu::UnicodeString::fromUTF32(
      reinterpret_cast<const UChar32*>(chars.data()),
      static_cast<int32_t>(chars.size()));
  std::string out;
  text.toUTF8String(out);
  return out;
}

std::string normalize_nfc(std::string_view utf8) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");
  icu::UnicodeString text = to_unicode(utf8);
  icu::UnicodeString normalized = nfc->normalize(text, status);
  if (U_FAILURE(status)) throw ParseError("NFC normalization failed");
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

}  // namespace spanqa
