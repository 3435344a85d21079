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

#include "regretmeter/corpus_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "regretmeter/errors.hpp"
#include "regretmeter/rng.hpp"

namespace regretmeter {

namespace {

constexpr std::pair<std::string_view, std::string_view> kEscapes[] = {
    {" ", "<sp>"}, {"\n", "<nl>"}, {"\t", "<tab>"},
    {"\r", "<cr>"}, {"\f", "<ff>"}, {"\v", "<vt>"},
};

bool IsSpace(char c) {
  return c == ' ' || c == '\n' || c == '\t' || c == '\r' || c == '\f' || c == '\v';
}

// Length of the UTF-8 sequence starting at s[i], or 0 if invalid.
std::size_t Utf8Length(std::string_view s, std::size_t i) {
  const auto b = static_cast<unsigned char>(s[i]);
  std::size_t len = 0;
  if (b < 0x80) return 1;
  if ((b & 0xE0) == 0xC0) len = 2;
  else if ((b & 0xF0) == 0xE0) len = 3;
  else if ((b & 0xF8) == 0xF0) len = 4;
  else return 0;
  if (i + len > s.size()) return 0;
  for (std::size_t k = 1; k < len; ++k) {
    if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return 0;
  }
  return len;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TokenizerMode ParseTokenizerMode(const std::string& name) {
  if (name == "char") return TokenizerMode::kChar;
  if (name == "whitespace") return TokenizerMode::kWhitespace;
  if (name == "ids" || name == "pretokenized-ids") return TokenizerMode::kIds;
  throw std::invalid_argument("unknown tokenizer mode '" + name +
                              "' (expected char, whitespace or ids)");
}

const char* ToString(TokenizerMode mode) {
  switch (mode) {
    case TokenizerMode::kChar: return "char";
    case TokenizerMode::kWhitespace: return "whitespace";
    case TokenizerMode::kIds: return "ids";
  }
  return "ids";
}

std::string CharTokenName(std::string_view symbol) {
  for (const auto& [raw, name] : kEscapes) {
    if (symbol == raw) return std::string(name);
  }
  return std::string(symbol);
}

std::string CharFromTokenName(std::string_view name) {
  for (const auto& [raw, escaped] : kEscapes) {
    if (name == escaped) return std::string(raw);
  }
  return std::string(name);
}

std::vector<std::string> SplitSymbols(std::string_view text, TokenizerMode mode) {
  std::vector<std::string> out;
  if (mode == TokenizerMode::kChar) {
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i < text.size();) {
      const std::size_t len = Utf8Length(text, i);
      if (len == 0) throw ParseError("invalid UTF-8", line, column);
      out.emplace_back(text.substr(i, len));
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
      i += len;
    }
  } else if (mode == TokenizerMode::kWhitespace) {
    std::size_t i = 0;
    while (i < text.size()) {
      while (i < text.size() && IsSpace(text[i])) ++i;
      const std::size_t start = i;
      while (i < text.size() && !IsSpace(text[i])) ++i;
      if (i > start) out.emplace_back(text.substr(start, i - start));
    }
  } else {
    throw std::invalid_argument("ids mode has no text symbols");
  }
  return out;
}

Vocab BuildVocab(const std::vector<std::string>& texts, TokenizerMode mode) {
  std::set<std::string> names;
  for (const auto& text : texts) {
    for (const auto& sym : SplitSymbols(text, mode)) {
      names.insert(mode == TokenizerMode::kChar ? CharTokenName(sym) : sym);
    }
  }
  if (names.count("<bos>") || names.count("<eos>")) {
    throw ParseError("text contains a reserved token name (<bos> or <eos>)");
  }
  std::vector<std::string> tokens{"<bos>", "<eos>"};
  tokens.insert(tokens.end(), names.begin(), names.end());
  return Vocab(std::move(tokens), 0, 1);
}

std::vector<TokenId> Tokenize(const Vocab& vocab, std::string_view text, TokenizerMode mode) {
  std::vector<TokenId> ids;
  for (const auto& sym : SplitSymbols(text, mode)) {
    const std::string name = mode == TokenizerMode::kChar ? CharTokenName(sym) : sym;
    const auto id = vocab.find(name);
    if (!id || *id == vocab.bos() || *id == vocab.eos()) {
      throw ParseError("symbol '" + name + "' is not in the vocabulary");
    }
    ids.push_back(*id);
  }
  return ids;
}

std::string Detokenize(const Vocab& vocab, std::span<const TokenId> ids, TokenizerMode mode) {
  std::string out;
  bool first = true;
  for (TokenId id : ids) {
    if (id == vocab.bos() || id == vocab.eos()) continue;
    const std::string& name = vocab.token(id);
    if (mode == TokenizerMode::kChar) {
      out += CharFromTokenName(name);
    } else {
      if (!first) out += ' ';
      out += name;
    }
    first = false;
  }
  return out;
}

Corpus ReadIds(std::istream& in, const Vocab& vocab) {
  Corpus corpus;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::vector<TokenId> seq{vocab.bos()};
    std::size_t i = 0;
    while (i < line.size()) {
      if (line[i] == ' ') {
        ++i;
        continue;
      }
      const std::size_t column = i + 1;
      if (seq.back() == vocab.eos()) {
        throw ParseError("token after eos", line_no, column);
      }
      std::int64_t value = 0;
      const char* begin = line.data() + i;
      const char* end = line.data() + line.size();
      const auto [ptr, ec] = std::from_chars(begin, end, value);
      if (ec != std::errc() || (ptr != end && *ptr != ' ')) {
        throw ParseError("malformed token id", line_no, column);
      }
      if (value < 0 || value >= static_cast<std::int64_t>(vocab.size())) {
        throw ParseError("token id " + std::to_string(value) + " out of vocabulary (V=" +
                             std::to_string(vocab.size()) + ")",
                         line_no, column);
      }
      if (value == vocab.bos()) throw ParseError("bos id stored in file", line_no, column);
      seq.push_back(static_cast<TokenId>(value));
      i = static_cast<std::size_t>(ptr - line.data());
    }
    corpus.sequences.push_back(std::move(seq));
  }
  return corpus;
}

Corpus ReadIdsFile(const std::string& path, const Vocab& vocab) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  try {
    return ReadIds(in, vocab);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void WriteIds(std::ostream& out, const Corpus& corpus, const Vocab& vocab) {
  ValidateCorpus(vocab, corpus);
  for (const auto& seq : corpus.sequences) {
    for (std::size_t i = 1; i < seq.size(); ++i) {
      if (i > 1) out << ' ';
      out << seq[i];
    }
    out << '\n';
  }
}

void WriteIdsFile(const std::string& path, const Corpus& corpus, const Vocab& vocab) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  WriteIds(out, corpus, vocab);
  if (!out) throw Error("write failed: " + path);
}

Corpus ReadTokens(const std::string& path, const Vocab& vocab, const TokenizerSpec& spec) {
  if (spec.mode == TokenizerMode::kIds) return ReadIdsFile(path, vocab);
  std::vector<TokenId> seq{vocab.bos()};
  const auto ids = Tokenize(vocab, ReadFile(path), spec.mode);
  seq.insert(seq.end(), ids.begin(), ids.end());
  if (spec.append_eos) seq.push_back(vocab.eos());
  return Corpus{{std::move(seq)}};
}

PromptSet ChunkAndPrompt(std::span<const TokenId> stream, const Vocab& vocab,
                         std::size_t chunk_len, std::size_t prompt_len,
                         std::size_t max_prompts) {
  if (prompt_len == 0 || prompt_len >= chunk_len) {
    throw std::invalid_argument("need 0 < prompt_len < chunk_len");
  }
  PromptSet set;
  set.chunk_len = chunk_len;
  set.prompt_len = prompt_len;
  for (std::size_t start = 0; start + prompt_len < stream.size(); start += chunk_len) {
    if (max_prompts != 0 && set.prompts.size() == max_prompts) break;
    const auto chunk = stream.subspan(start, std::min(chunk_len, stream.size() - start));
    for (TokenId w : chunk) {
      if (w == vocab.bos() || w == vocab.eos() || !vocab.contains(w)) {
        throw std::invalid_argument("token stream contains bos, eos or an unknown id");
      }
    }
    Context prompt{vocab.bos()};
    prompt.insert(prompt.end(), chunk.begin(), chunk.begin() + static_cast<std::ptrdiff_t>(prompt_len));
    set.prompts.push_back(std::move(prompt));
    set.golds.emplace_back(chunk.begin() + static_cast<std::ptrdiff_t>(prompt_len), chunk.end());
  }
  return set;
}

PromptSet ChunkAndPrompt(const Corpus& corpus, const Vocab& vocab, std::size_t chunk_len,
                         std::size_t prompt_len, std::size_t max_prompts) {
  std::vector<TokenId> stream;
  for (const auto& seq : corpus.sequences) {
    for (TokenId w : seq) {
      if (w != vocab.bos() && w != vocab.eos()) stream.push_back(w);
    }
  }
  return ChunkAndPrompt(stream, vocab, chunk_len, prompt_len, max_prompts);
}

std::pair<Corpus, Corpus> Split(const Corpus& corpus, double train_frac, std::uint64_t seed) {
  if (!(train_frac > 0.0 && train_frac < 1.0)) {
    throw std::invalid_argument("train_frac must be in (0, 1)");
  }
  const std::size_t n = corpus.sequences.size();
  const auto n_train = static_cast<std::size_t>(std::llround(train_frac * static_cast<double>(n)));
  if (n_train == 0 || n_train == n) {
    throw std::invalid_argument("split of " + std::to_string(n) +
                                " sequences leaves one side empty");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  RngStream rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.Below(i + 1)]);
  std::vector<bool> in_train(n, false);
  for (std::size_t i = 0; i < n_train; ++i) in_train[order[i]] = true;
  Corpus train, heldout;
  for (std::size_t i = 0; i < n; ++i) {
    (in_train[i] ? train : heldout).sequences.push_back(corpus.sequences[i]);
  }
  return {std::move(train), std::move(heldout)};
}

}  // namespace regretmeter
