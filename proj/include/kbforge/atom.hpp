#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "kbforge/errors.hpp"

namespace kbforge {

namespace detail {

inline bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_alnum_lower(char c) { return is_lower(c) || is_digit(c) || c == '_'; }

inline std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n\f\v";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(ws);
  return s.substr(first, last - first + 1);
}

// Decodes one UTF-8 code point starting at `pos`, advancing `pos`. Returns
// nullopt (and advances one byte) on an invalid sequence.
inline std::optional<char32_t> next_code_point(std::string_view s, std::size_t& pos) {
  const auto lead = static_cast<unsigned char>(s[pos]);
  std::size_t len = 0;
  char32_t cp = 0;
  if (lead < 0x80) {
    ++pos;
    return lead;
  } else if ((lead & 0xE0) == 0xC0) {
    len = 2;
    cp = lead & 0x1F;
  } else if ((lead & 0xF0) == 0xE0) {
    len = 3;
    cp = lead & 0x0F;
  } else if ((lead & 0xF8) == 0xF0) {
    len = 4;
    cp = lead & 0x07;
  } else {
    ++pos;
    return std::nullopt;
  }
  if (pos + len > s.size()) {
    ++pos;
    return std::nullopt;
  }
  for (std::size_t i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) {
      ++pos;
      return std::nullopt;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  pos += len;
  return cp;
}

// Latin-1 supplement letters (plus ø, æ, ß) folded to lowercase ASCII.
// Returns nullptr when no fold exists.
inline const char* fold_latin1(char32_t cp) {
  // clang-format off
  static constexpr const char* table[64] = {
    "a","a","a","a","a","a","ae","c","e","e","e","e","i","i","i","i",    // U+00C0
    "d","n","o","o","o","o","o",nullptr,"o","u","u","u","u","y","th","ss", // U+00D0
    "a","a","a","a","a","a","ae","c","e","e","e","e","i","i","i","i",    // U+00E0
    "d","n","o","o","o","o","o",nullptr,"o","u","u","u","u","y","th","y",  // U+00F0
  };
  // clang-format on
  if (cp >= 0xC0 && cp <= 0xFF) return table[cp - 0xC0];
  return nullptr;
}

inline bool is_unicode_space(char32_t cp) {
  return cp == 0xA0 || cp == 0x2002 || cp == 0x2003 || cp == 0x2009 || cp == 0x202F || cp == 0x3000;
}

}  // namespace detail

/// True when `text` is an unquoted Prolog atom of the form [a-z][a-z0-9_]*.
inline bool is_plain_atom_text(std::string_view text) {
  if (text.empty() || !detail::is_lower(text.front())) return false;
  return std::all_of(text.begin(), text.end(), detail::is_alnum_lower);
}

/// A Prolog constant. `text` holds the atom's name without quotes; whether it
/// needs quoting is decided at render time.
struct Atom {
  std::string text;

  bool is_plain() const { return is_plain_atom_text(text); }

  std::string render() const {
    if (is_plain()) return text;
    std::string out = "'";
    for (char c : text) {
      switch (c) {
        case '\'': out += "''"; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        default: out += c;
      }
    }
    out += '\'';
    return out;
  }

  friend auto operator<=>(const Atom&, const Atom&) = default;
};

/// Lexical normalization of free text into an atom: lowercase, Latin-1 folded,
/// whitespace/hyphens to underscores, everything else outside [a-z0-9_]
/// dropped. Text that cannot be normalized to a plain atom (leading digit,
/// nothing left, or unfoldable non-ASCII letters) becomes a quoted atom of the
/// trimmed original.
inline Atom normalize_atom(std::string_view raw) {
  const auto trimmed = detail::trim(raw);
  if (trimmed.empty()) throw NormalizationError("cannot normalize an empty string to an atom");

  std::string out;
  bool unfoldable = false;
  std::size_t pos = 0;
  auto push_sep = [&out] {
    if (!out.empty() && out.back() != '_') out += '_';
  };
  while (pos < trimmed.size()) {
    const auto cp = detail::next_code_point(trimmed, pos);
    if (!cp) {
      unfoldable = true;
      break;
    }
    const char32_t c = *cp;
    if (c < 0x80) {
      const char ch = static_cast<char>(c);
      if (ch >= 'A' && ch <= 'Z') {
        out += static_cast<char>(ch - 'A' + 'a');
      } else if (detail::is_lower(ch) || detail::is_digit(ch)) {
        out += ch;
      } else if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' || ch == '-' || ch == '_') {
        push_sep();
      }
      // other ASCII punctuation is dropped
    } else if (const char* fold = detail::fold_latin1(c)) {
      out += fold;
    } else if (detail::is_unicode_space(c)) {
      push_sep();
    } else {
      unfoldable = true;
      break;
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  const auto lead = out.find_first_not_of('_');
  out.erase(0, lead == std::string::npos ? out.size() : lead);

  if (unfoldable || out.empty() || !detail::is_lower(out.front())) return Atom{std::string(trimmed)};
  return Atom{std::move(out)};
}

}  // namespace kbforge
