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

#include "imrc/text.h"

#include <algorithm>
#include <iterator>
#include <cstdint>

namespace imrc {
namespace {

constexpr std::string_view kAbbreviations[] = {
    "Mr.",   "Mrs.",  "Ms.",   "Dr.",   "Prof.", "Sr.",   "Jr.",   "St.",
    "Mt.",   "Gen.",  "Gov.",  "Sen.",  "Rep.",  "Rev.",  "Capt.", "Col.",
    "Lt.",   "Sgt.",  "Fr.",   "Hon.",  "U.S.",  "U.K.",  "U.N.",  "U.S.A.",
    "E.U.",  "etc.",  "e.g.",  "i.e.",  "vs.",   "No.",   "Nos.",  "Vol.",
    "Fig.",  "pp.",   "Inc.",  "Co.",   "Corp.", "Ltd.",  "Bros.", "Jan.",
    "Feb.",  "Mar.",  "Apr.",  "Jun.",  "Jul.",  "Aug.",  "Sep.",  "Sept.",
    "Oct.",  "Nov.",  "Dec.",  "approx.", "ca.", "cf.",   "al.",   "Ph.D.",
    "Ave.",  "Blvd.", "Dept.", "Univ.", "Est.",  "Messrs.",
};

struct CodePoint {
  uint32_t value = 0;
  size_t length = 1;
};

// Decodes one UTF-8 sequence at `pos`. Malformed input decodes as the single
// raw byte so scanning always makes progress.
CodePoint DecodeAt(std::string_view text, size_t pos) {
  const auto byte = [&](size_t i) { return static_cast<uint8_t>(text[i]); };
  const uint8_t lead = byte(pos);
  size_t length = 1;
  uint32_t value = lead;
  if (lead >= 0xF0 && lead < 0xF8) {
    length = 4;
    value = lead & 0x07;
  } else if (lead >= 0xE0) {
    length = 3;
    value = lead & 0x0F;
  } else if (lead >= 0xC0) {
    length = 2;
    value = lead & 0x1F;
  } else {
    return {lead, 1};
  }
  if (lead >= 0xF8 || pos + length > text.size()) return {lead, 1};
  for (size_t i = 1; i < length; ++i) {
    const uint8_t next = byte(pos + i);
    if ((next & 0xC0) != 0x80) return {lead, 1};
    value = (value << 6) | (next & 0x3F);
  }
  return {value, length};
}

// Code point ending at `end` (exclusive).
CodePoint DecodeBefore(std::string_view text, size_t end) {
  size_t start = end - 1;
  while (start > 0 && end - start < 4 &&
         (static_cast<uint8_t>(text[start]) & 0xC0) == 0x80) {
    --start;
  }
  CodePoint cp = DecodeAt(text, start);
  if (start + cp.length != end) return {static_cast<uint8_t>(text[end - 1]), 1};
  return cp;
}

bool IsSpace(uint32_t cp) {
  switch (cp) {
    case ' ': case '\t': case '\n': case '\r': case '\f': case '\v':
    case 0x00A0: case 0x202F: case 0x205F: case 0x3000: case 0xFEFF:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200B;
  }
}

bool IsPunctOrCurrency(uint32_t cp) {
  if (cp < 0x80) {
    return (cp >= '!' && cp <= '/') || (cp >= ':' && cp <= '@') ||
           (cp >= '[' && cp <= '`') || (cp >= '{' && cp <= '~');
  }
  switch (cp) {
    case 0x00A1: case 0x00A2: case 0x00A3: case 0x00A5: case 0x00A7:
    case 0x00AB: case 0x00B0: case 0x00B7: case 0x00BB: case 0x00BF:
    case 0x2013: case 0x2014: case 0x2015: case 0x2018: case 0x2019:
    case 0x201A: case 0x201C: case 0x201D: case 0x201E: case 0x2022:
    case 0x2026: case 0x2032: case 0x2033: case 0x20AC: case 0x20B9:
      return true;
    default:
      return false;
  }
}

bool IsTerminator(char c) { return c == '.' || c == '!' || c == '?'; }

bool IsCloser(uint32_t cp) {
  return cp == '"' || cp == '\'' || cp == ')' || cp == ']' || cp == 0x201D ||
         cp == 0x2019 || cp == 0x00BB;
}

bool IsOpener(uint32_t cp) {
  return cp == '"' || cp == '\'' || cp == '(' || cp == '[' || cp == '`' ||
         cp == 0x201C || cp == 0x2018 || cp == 0x00AB;
}

bool IsUpper(uint32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return true;
  if (cp >= 0xC0 && cp <= 0xDE) return cp != 0xD7;
  if (cp >= 0x100 && cp <= 0x17F) return cp % 2 == 0;
  if (cp >= 0x391 && cp <= 0x3A9) return true;
  return cp >= 0x410 && cp <= 0x42F;
}

bool IsDigit(uint32_t cp) { return cp >= '0' && cp <= '9'; }

bool IsAbbreviation(std::string_view word) {
  return std::find(std::begin(kAbbreviations), std::end(kAbbreviations),
                   word) != std::end(kAbbreviations);
}

bool IsInitial(std::string_view word) {
  return word.size() == 2 && word[0] >= 'A' && word[0] <= 'Z' && word[1] == '.';
}

// Word ending at `end` (exclusive), after stripping leading openers.
std::string_view WordBefore(std::string_view text, size_t end) {
  size_t begin = end;
  while (begin > 0) {
    CodePoint cp = DecodeBefore(text, begin);
    if (IsSpace(cp.value)) break;
    begin -= cp.length;
  }
  while (begin < end) {
    CodePoint cp = DecodeAt(text, begin);
    if (!IsOpener(cp.value)) break;
    begin += cp.length;
  }
  return text.substr(begin, end - begin);
}

SentenceSpan Trim(std::string_view text, size_t begin, size_t end) {
  while (begin < end) {
    CodePoint cp = DecodeAt(text, begin);
    if (!IsSpace(cp.value)) break;
    begin += cp.length;
  }
  while (end > begin) {
    CodePoint cp = DecodeBefore(text, end);
    if (!IsSpace(cp.value)) break;
    end -= cp.length;
  }
  return {begin, end};
}

}  // namespace

std::span<const std::string_view> Abbreviations() { return kAbbreviations; }

std::vector<SentenceSpan> SplitSentenceSpans(std::string_view context) {
  std::vector<SentenceSpan> spans;
  size_t start = 0;
  size_t pos = 0;
  const auto emit = [&](size_t end) {
    SentenceSpan span = Trim(context, start, end);
    if (span.begin < span.end) spans.push_back(span);
  };
  while (pos < context.size()) {
    if (!IsTerminator(context[pos])) {
      ++pos;
      continue;
    }
    const size_t terminator = pos;
    size_t end = pos + 1;
    while (end < context.size() && IsTerminator(context[end])) ++end;
    const bool lone_period = context[terminator] == '.' && end == pos + 1;
    while (end < context.size()) {
      CodePoint cp = DecodeAt(context, end);
      if (!IsCloser(cp.value)) break;
      end += cp.length;
    }
    pos = end;
    if (end >= context.size()) break;
    CodePoint after = DecodeAt(context, end);
    if (!IsSpace(after.value)) continue;
    size_t next = end;
    while (next < context.size()) {
      CodePoint cp = DecodeAt(context, next);
      if (!IsSpace(cp.value)) break;
      next += cp.length;
    }
    if (next >= context.size()) break;
    CodePoint lead = DecodeAt(context, next);
    if (!IsUpper(lead.value) && !IsOpener(lead.value) && !IsDigit(lead.value)) {
      continue;
    }
    if (lone_period) {
      std::string_view word = WordBefore(context, terminator + 1);
      if (IsAbbreviation(word) || IsInitial(word)) continue;
    }
    emit(end);
    start = next;
    pos = next;
  }
  emit(context.size());
  return spans;
}

std::vector<std::string> SplitSentences(std::string_view context) {
  std::vector<std::string> sentences;
  for (const SentenceSpan &span : SplitSentenceSpans(context)) {
    sentences.emplace_back(context.substr(span.begin, span.end - span.begin));
  }
  return sentences;
}

TokenSeq Tokenize(std::string_view text) {
  TokenSeq tokens;
  size_t pos = 0;
  while (pos < text.size()) {
    CodePoint cp = DecodeAt(text, pos);
    if (IsSpace(cp.value)) {
      pos += cp.length;
      continue;
    }
    size_t end = pos;
    while (end < text.size()) {
      CodePoint next = DecodeAt(text, end);
      if (IsSpace(next.value)) break;
      end += next.length;
    }
    // Leading punctuation.
    size_t begin = pos;
    while (begin < end) {
      CodePoint lead = DecodeAt(text, begin);
      if (!IsPunctOrCurrency(lead.value)) break;
      tokens.emplace_back(text.substr(begin, lead.length));
      begin += lead.length;
    }
    // Trailing punctuation, kept in reverse until the middle is emitted.
    std::vector<std::string_view> trailing;
    size_t stop = end;
    while (stop > begin) {
      if (IsAbbreviation(text.substr(begin, stop - begin))) break;
      CodePoint tail = DecodeBefore(text, stop);
      if (!IsPunctOrCurrency(tail.value)) break;
      trailing.push_back(text.substr(stop - tail.length, tail.length));
      stop -= tail.length;
    }
    if (stop > begin) tokens.emplace_back(text.substr(begin, stop - begin));
    for (auto it = trailing.rbegin(); it != trailing.rend(); ++it) {
      tokens.emplace_back(*it);
    }
    pos = end;
  }
  return tokens;
}

std::string NormalizeToken(std::string_view token) {
  std::string out(token);
  for (char &c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

TokenSeq NormalizeTokens(std::span<const std::string> tokens) {
  TokenSeq out;
  out.reserve(tokens.size());
  for (const std::string &token : tokens) out.push_back(NormalizeToken(token));
  return out;
}

std::string JoinTokens(std::span<const std::string> tokens) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out += ' ';
    out += tokens[i];
  }
  return out;
}

std::string CollapseWhitespace(std::string_view text) {
  std::string out;
  bool pending_space = false;
  size_t pos = 0;
  while (pos < text.size()) {
    CodePoint cp = DecodeAt(text, pos);
    if (IsSpace(cp.value)) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out += ' ';
      pending_space = false;
      out.append(text.substr(pos, cp.length));
    }
    pos += cp.length;
  }
  return out;
}

bool ContainsSubsequence(std::span<const std::string> haystack,
                         std::span<const std::string> needle) {
  if (needle.empty() || needle.size() > haystack.size()) return false;
  return std::search(haystack.begin(), haystack.end(), needle.begin(),
                     needle.end()) != haystack.end();
}

std::vector<size_t> CodePointOffsets(std::string_view text) {
  std::vector<size_t> offsets;
  offsets.reserve(text.size() + 1);
  size_t pos = 0;
  while (pos < text.size()) {
    offsets.push_back(pos);
    pos += DecodeAt(text, pos).length;
  }
  offsets.push_back(text.size());
  return offsets;
}

}  // namespace imrc
