#include "mvpforge/text.hpp"

#include <array>
#include <cctype>

#include "mvpforge/error.hpp"

namespace mvpforge {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
         c == '\f';
}

std::string to_lower_ascii(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) tokens.emplace_back(text.substr(start, i - start));
  }
  return tokens;
}

std::size_t count_words(std::string_view text) {
  std::size_t n = 0;
  bool in_word = false;
  for (char c : text) {
    if (is_space(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++n;
    }
  }
  return n;
}

std::vector<std::string> lowercase_tokens(std::string_view text) {
  return split_whitespace(to_lower_ascii(text));
}

namespace {

bool is_ptb_punct(char c) {
  static constexpr std::string_view kPunct = ".,!?;:()[]{}\"`";
  return kPunct.find(c) != std::string_view::npos;
}

// Splits a punctuation-free chunk into word + clitic where applicable.
void emit_word(std::string word, std::vector<std::string>& out) {
  static constexpr std::array<std::string_view, 7> kClitics = {
      "n't", "'s", "'re", "'ve", "'ll", "'d", "'m"};
  for (std::string_view clitic : kClitics) {
    if (word.size() > clitic.size() &&
        std::string_view(word).substr(word.size() - clitic.size()) == clitic) {
      out.push_back(word.substr(0, word.size() - clitic.size()));
      out.emplace_back(clitic);
      return;
    }
  }
  out.push_back(std::move(word));
}

}  // namespace

std::vector<std::string> ptb_tokens(std::string_view text) {
  std::vector<std::string> out;
  for (const std::string& chunk : lowercase_tokens(text)) {
    std::string word;
    for (char c : chunk) {
      if (is_ptb_punct(c)) {
        if (!word.empty()) emit_word(std::move(word), out);
        word.clear();
        out.emplace_back(1, c);
      } else {
        word.push_back(c);
      }
    }
    if (!word.empty()) emit_word(std::move(word), out);
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text, Tokenizer tok) {
  return tok == Tokenizer::ptb ? ptb_tokens(text) : lowercase_tokens(text);
}

Tokenizer parse_tokenizer(std::string_view name) {
  if (name == "whitespace" || name == "ws") return Tokenizer::whitespace;
  if (name == "ptb") return Tokenizer::ptb;
  throw Error(ErrorKind::config, "unknown-tokenizer",
              "unknown tokenizer '" + std::string(name) + "'");
}

std::string join(const std::vector<std::string>& parts, std::string_view glue) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.append(glue);
    out.append(parts[i]);
  }
  return out;
}

}  // namespace mvpforge
