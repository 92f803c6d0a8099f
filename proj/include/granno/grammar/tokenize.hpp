#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace granno {

using Tokens = std::vector<std::string>;

/// Lower-cases, splits on whitespace and strips surrounding punctuation.
Tokens tokenize(std::string_view text);

std::string join_tokens(const Tokens& tokens);

}  // namespace granno
