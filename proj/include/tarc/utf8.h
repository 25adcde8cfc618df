// Copyright 2026 The TArC Annotator Authors.
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

#ifndef TARC_UTF8_H_
#define TARC_UTF8_H_

#include <string>
#include <string_view>
#include <vector>

namespace tarc::utf8 {

// Splits valid UTF-8 into one string per code point. Invalid lead or
// continuation bytes are emitted as single-byte pieces so no input is lost.
std::vector<std::string> split_chars(std::string_view text);

// Decodes the code point starting at text[pos]; advances pos. Returns
// U+FFFD for malformed sequences.
char32_t decode(std::string_view text, size_t &pos);

// Arabic, Arabic Supplement, Arabic Extended-A and presentation forms.
bool is_arabic_script(char32_t cp);

// True iff every code point of a non-empty string is Arabic-script.
bool all_arabic_script(std::string_view text);

}  // namespace tarc::utf8

#endif  // TARC_UTF8_H_
