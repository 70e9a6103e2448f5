// Copyright 2026 The iMRC Engine Authors.
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

#ifndef IMRC_TEXT_H_
#define IMRC_TEXT_H_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace imrc {

using TokenSeq = std::vector<std::string>;

// Bumped whenever the abbreviation table or the boundary rules change, since
// either one changes the sentences of every built corpus.
inline constexpr int kSentenceSplitterVersion = 1;
inline constexpr int kTokenizerVersion = 1;

// Tokens (including the trailing period) after which a terminator never ends
// a sentence.
std::span<const std::string_view> Abbreviations();

// Byte range [begin, end) of one sentence inside its context.
struct SentenceSpan {
  size_t begin = 0;
  size_t end = 0;
};

// Rule-based segmentation. A sentence ends at '.', '!' or '?' (plus any
// closing quotes or brackets glued to it) when followed by whitespace and then
// an uppercase letter, an opening quote or bracket, or a digit. Abbreviations
// and single-letter initials never end a sentence. Spans are trimmed and
// never empty; an all-whitespace context yields no spans.
std::vector<SentenceSpan> SplitSentenceSpans(std::string_view context);
std::vector<std::string> SplitSentences(std::string_view context);

// Whitespace split, then leading and trailing punctuation and currency
// symbols are peeled off one character at a time. Internal hyphens,
// apostrophes and decimal points stay inside the token.
TokenSeq Tokenize(std::string_view text);

// Matching form of a token: ASCII lowercase. Display forms keep their case.
std::string NormalizeToken(std::string_view token);
TokenSeq NormalizeTokens(std::span<const std::string> tokens);

std::string JoinTokens(std::span<const std::string> tokens);

// Collapses every whitespace run to one space and trims both ends.
std::string CollapseWhitespace(std::string_view text);

// True when `needle` occurs as a contiguous run inside `haystack`. An empty
// needle never matches.
bool ContainsSubsequence(std::span<const std::string> haystack,
                         std::span<const std::string> needle);

// Byte offset of every code point in a UTF-8 string, plus one trailing entry
// equal to text.size(). Malformed bytes count as one code point each.
std::vector<size_t> CodePointOffsets(std::string_view text);

}  // namespace imrc

#endif  // IMRC_TEXT_H_
