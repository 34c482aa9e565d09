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

#ifndef SPANQA_TEXT_HPP_
#define SPANQA_TEXT_HPP_

#include <string>
#include <string_view>

namespace spanqa {

// Reports are handled as sequences of Unicode scalar values.
using CharSeq = std::u32string;

// Decodes UTF-8. Throws ParseError on ill-formed input.
CharSeq decode_utf8(std::string_view utf8);

std::string encode_utf8(std::u32string_view chars);

// Canonical composition (NFC). Throws ParseError on ill-formed UTF-8.
std::string normalize_nfc(std::string_view utf8);

}  // namespace spanqa

#endif  // SPANQA_TEXT_HPP_
