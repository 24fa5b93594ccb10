#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace mvpforge {

enum class Tokenizer { whitespace, ptb };

bool is_space(char c);

std::string to_lower_ascii(std::string_view text);

// Splits on runs of ASCII whitespace; no case folding.
std::vector<std::string> split_whitespace(std::string_view text);

// Number of whitespace-separated words, the convention used for corpus
// statistics and decontamination order selection.
std::size_t count_words(std::string_view text);

// Lowercase then whitespace split. Shared by decontamination and metrics.
std::vector<std::string> lowercase_tokens(std::string_view text);

// Penn-Treebank-style split: punctuation becomes its own token and common
// English clitics ('s, n't, 're, ...) are detached. Output is lowercased.
std::vector<std::string> ptb_tokens(std::string_view text);

std::vector<std::string> tokenize(std::string_view text, Tokenizer tok);

Tokenizer parse_tokenizer(std::string_view name);

std::string join(const std::vector<std::string>& parts, std::string_view glue);

}  // namespace mvpforge
