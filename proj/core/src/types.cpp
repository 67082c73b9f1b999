#include "varsched/types.hpp"

#include <cctype>
#include <charconv>

namespace varsched {

std::string class_label(ClassIndex index) {
  if (index >= 0 && index < 26) return std::string(1, static_cast<char>('A' + index));
  return std::to_string(index);
}

ClassIndex parse_class(std::string_view text) {
  if (text.size() == 1 && std::isalpha(static_cast<unsigned char>(text[0]))) {
    return std::toupper(static_cast<unsigned char>(text[0])) - 'A';
  }
  int value = -1;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || value < 0) {
    throw std::invalid_argument("unknown class '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace varsched
