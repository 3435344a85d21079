// Copyright 2026 The regretmeter Authors.
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

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "regretmeter/corpus.hpp"
#include "regretmeter/vocab.hpp"

namespace regretmeter {

enum class TokenizerMode {
  kChar,        // one token per UTF-8 code point
  kWhitespace,  // tokens split on ASCII whitespace
  kIds,         // pretokenized: space-separated decimal ids, one sequence per line
};

TokenizerMode ParseTokenizerMode(const std::string& name);  // char | whitespace | ids
const char* ToString(TokenizerMode mode);

struct TokenizerSpec {
  TokenizerMode mode = TokenizerMode::kIds;
  // Text modes: terminate each document with eos.
  bool append_eos = true;
};

// Token names for text symbols. Whitespace characters get escaped names
// ("<sp>", "<nl>", "<tab>", "<cr>", "<ff>", "<vt>") because vocabulary
// entries may not contain whitespace.
std::string CharTokenName(std::string_view symbol);
std::string CharFromTokenName(std::string_view name);

// Splits text into symbols under a text mode. Throws ParseError on invalid
// UTF-8 in char mode.
std::vector<std::string> SplitSymbols(std::string_view text, TokenizerMode mode);

// Vocabulary "<bos>", "<eos>" followed by the sorted distinct symbols of
// `texts`. Throws ParseError if a symbol collides with a special name.
Vocab BuildVocab(const std::vector<std::string>& texts, TokenizerMode mode);

// Text to ids (no bos or eos). Throws ParseError on a symbol not in `vocab`.
std::vector<TokenId> Tokenize(const Vocab& vocab, std::string_view text, TokenizerMode mode);
// Ids back to text; bos and eos are dropped. Whitespace mode joins with
// single spaces, so text with other spacing does not round-trip.
std::string Detokenize(const Vocab& vocab, std::span<const TokenId> ids, TokenizerMode mode);

// Pretokenized ids. bos is prepended on read and never written; eos is
// stored when present. Errors name the line and column.
Corpus ReadIds(std::istream& in, const Vocab& vocab);
Corpus ReadIdsFile(const std::string& path, const Vocab& vocab);
void WriteIds(std::ostream& out, const Corpus& corpus, const Vocab& vocab);
void WriteIdsFile(const std::string& path, const Corpus& corpus, const Vocab& vocab);

// Reads one file as a corpus. Text modes give one sequence per file.
Corpus ReadTokens(const std::string& path, const Vocab& vocab, const TokenizerSpec& spec);

struct PromptSet {
  std::vector<Context> prompts;                // bos + prompt_len tokens
  std::vector<std::vector<TokenId>> golds;     // aligned continuations
  std::size_t chunk_len = 0;
  std::size_t prompt_len = 0;
};

// Cuts the stream into consecutive non-overlapping chunk_len windows; each
// gives a prompt (first prompt_len tokens, bos prepended) and a gold (the
// rest). A trailing window shorter than prompt_len + 1 is dropped. Stops
// after `max_prompts` when it is nonzero.
PromptSet ChunkAndPrompt(std::span<const TokenId> stream, const Vocab& vocab,
                         std::size_t chunk_len = 512, std::size_t prompt_len = 50,
                         std::size_t max_prompts = 0);
// Concatenates the corpus' tokens, dropping bos and eos, and chunks that.
PromptSet ChunkAndPrompt(const Corpus& corpus, const Vocab& vocab, std::size_t chunk_len = 512,
                         std::size_t prompt_len = 50, std::size_t max_prompts = 0);

// Seeded sequence-level split. Both sides keep corpus order. Throws
// std::invalid_argument when either side would be empty.
std::pair<Corpus, Corpus> Split(const Corpus& corpus, double train_frac, std::uint64_t seed);

}  // namespace regretmeter
