#include "lrl/tokenizer.hpp"

#include <unicode/normalizer2.h>
#include <unicode/regex.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <array>
#include <cstdio>
#include <httplib.h>
#include <nlohmann/json.hpp>
#include <optional>
#include <queue>
#include <unordered_map>

#include "lrl/error.hpp"
#include "lrl/text.hpp"

namespace lrl {

using nlohmann::json;

// ---------------------------------------------------------------------------
// ByteTokenizer

std::vector<std::int32_t> ByteTokenizer::encode(std::string_view text) const {
  std::vector<std::int32_t> ids;
  ids.reserve(text.size());
  for (char c : text) ids.push_back(static_cast<unsigned char>(c));
  return ids;
}

std::string ByteTokenizer::decode(std::span<const std::int32_t> ids) const {
  std::string out;
  out.reserve(ids.size());
  for (auto id : ids) {
    if (id < 0 || id > 255) throw DataError("byte tokenizer id out of range: " + std::to_string(id));
    out.push_back(static_cast<char>(id));
  }
  return out;
}

// ---------------------------------------------------------------------------
// helpers

namespace {

icu::UnicodeString to_ustr(std::string_view s) {
  return icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
}

std::string to_utf8(const icu::UnicodeString& u) {
  std::string out;
  u.toUTF8String(out);
  return out;
}

// Splits a UTF-8 string into its code points.
std::vector<std::string_view> utf8_chars(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    if (c >= 0xF0) {
      len = 4;
    } else if (c >= 0xE0) {
      len = 3;
    } else if (c >= 0xC0) {
      len = 2;
    }
    len = std::min(len, s.size() - i);
    out.push_back(s.substr(i, len));
    i += len;
  }
  return out;
}

UChar32 first_codepoint(std::string_view s) {
  int32_t i = 0;
  UChar32 c = 0;
  U8_NEXT(reinterpret_cast<const uint8_t*>(s.data()), i, static_cast<int32_t>(s.size()), c);
  return c;
}

// The oniguruma dialect the reference library uses treats \s as the Unicode
// White_Space property; ICU's \s is narrower, so rewrite it.
std::string translate_regex(std::string_view pattern) {
  std::string out;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    if (pattern[i] == '\\' && i + 1 < pattern.size()) {
      const char next = pattern[i + 1];
      if (next == 's') {
        out += "\\p{White_Space}";
      } else if (next == 'S') {
        out += "\\P{White_Space}";
      } else {
        out += pattern[i];
        out += next;
      }
      ++i;
    } else {
      out += pattern[i];
    }
  }
  return out;
}

std::shared_ptr<icu::RegexPattern> compile_regex(std::string_view pattern, bool literal) {
  UErrorCode status = U_ZERO_ERROR;
  UParseError perr;
  const uint32_t flags = literal ? UREGEX_LITERAL : UREGEX_MULTILINE;
  const std::string src = literal ? std::string(pattern) : translate_regex(pattern);
  std::shared_ptr<icu::RegexPattern> re(icu::RegexPattern::compile(to_ustr(src), flags, perr, status));
  if (U_FAILURE(status) || !re) {
    throw DataError("cannot compile tokenizer regex '" + std::string(pattern) + "': " + u_errorName(status));
  }
  return re;
}

// Pattern objects appear as {"String": s} or {"Regex": r}.
std::shared_ptr<icu::RegexPattern> compile_pattern(const json& pattern) {
  if (pattern.contains("String")) return compile_regex(pattern.at("String").get<std::string>(), true);
  if (pattern.contains("Regex")) return compile_regex(pattern.at("Regex").get<std::string>(), false);
  throw DataError("tokenizer pattern must be String or Regex");
}

enum class SplitBehavior { removed, isolated, merged_with_previous, merged_with_next, contiguous };

SplitBehavior parse_behavior(const std::string& s) {
  if (s == "Removed") return SplitBehavior::removed;
  if (s == "Isolated") return SplitBehavior::isolated;
  if (s == "MergedWithPrevious") return SplitBehavior::merged_with_previous;
  if (s == "MergedWithNext") return SplitBehavior::merged_with_next;
  if (s == "Contiguous") return SplitBehavior::contiguous;
  throw DataError("unsupported split behavior '" + s + "'");
}

struct Span {
  int32_t begin;
  int32_t end;
  bool is_match;
};

// Applies a delimiter behavior to a covering list of spans and returns the
// non-empty pieces.
std::vector<std::pair<int32_t, int32_t>> apply_behavior(const std::vector<Span>& spans, SplitBehavior behavior) {
  std::vector<Span> acc;
  switch (behavior) {
    case SplitBehavior::isolated:
      acc = spans;
      break;
    case SplitBehavior::removed:
      for (const auto& s : spans) {
        if (!s.is_match) acc.push_back(s);
      }
      break;
    case SplitBehavior::merged_with_previous: {
      bool previous_match = false;
      for (const auto& s : spans) {
        if (s.is_match && !previous_match && !acc.empty()) {
          acc.back().end = s.end;
        } else {
          acc.push_back({s.begin, s.end, false});
        }
        previous_match = s.is_match;
      }
      break;
    }
    case SplitBehavior::merged_with_next: {
      bool previous_match = false;
      for (auto it = spans.rbegin(); it != spans.rend(); ++it) {
        if (it->is_match && !previous_match && !acc.empty()) {
          acc.back().begin = it->begin;
        } else {
          acc.push_back({it->begin, it->end, false});
        }
        previous_match = it->is_match;
      }
      std::reverse(acc.begin(), acc.end());
      break;
    }
    case SplitBehavior::contiguous: {
      bool previous_match = false;
      for (const auto& s : spans) {
        if (s.is_match == previous_match && !acc.empty()) {
          acc.back().end = s.end;
        } else {
          acc.push_back({s.begin, s.end, false});
        }
        previous_match = s.is_match;
      }
      break;
    }
  }
  std::vector<std::pair<int32_t, int32_t>> out;
  for (const auto& s : acc) {
    if (s.end > s.begin) out.emplace_back(s.begin, s.end);
  }
  return out;
}

std::vector<std::string> regex_split(const std::string& piece, const icu::RegexPattern& re, SplitBehavior behavior,
                                     bool invert) {
  const icu::UnicodeString u = to_ustr(piece);
  UErrorCode status = U_ZERO_ERROR;
  std::unique_ptr<icu::RegexMatcher> m(re.matcher(u, status));
  if (U_FAILURE(status)) throw DataError(std::string("regex matcher failed: ") + u_errorName(status));
  std::vector<Span> spans;
  int32_t prev = 0;
  while (m->find(status)) {
    const int32_t b = m->start(status);
    const int32_t e = m->end(status);
    if (b == e) continue;
    if (prev != b) spans.push_back({prev, b, invert});
    spans.push_back({b, e, !invert});
    prev = e;
  }
  if (U_FAILURE(status)) throw DataError(std::string("regex search failed: ") + u_errorName(status));
  if (prev != u.length()) spans.push_back({prev, u.length(), invert});
  std::vector<std::string> out;
  for (const auto& [b, e] : apply_behavior(spans, behavior)) out.push_back(to_utf8(u.tempSubStringBetween(b, e)));
  return out;
}

// Code point predicate split, used by Digits and WhitespaceSplit.
template <typename Pred>
std::vector<std::string> predicate_split(const std::string& piece, Pred pred, SplitBehavior behavior) {
  const auto chars = utf8_chars(piece);
  std::vector<Span> spans;
  std::vector<std::size_t> offsets;
  offsets.reserve(chars.size() + 1);
  std::size_t off = 0;
  for (auto c : chars) {
    offsets.push_back(off);
    off += c.size();
  }
  offsets.push_back(off);
  std::size_t i = 0;
  while (i < chars.size()) {
    const bool match = pred(first_codepoint(chars[i]));
    std::size_t j = i + 1;
    // single-character matches keep each matching code point isolated
    if (!match) {
      while (j < chars.size() && !pred(first_codepoint(chars[j]))) ++j;
    }
    spans.push_back({static_cast<int32_t>(offsets[i]), static_cast<int32_t>(offsets[j]), match});
    i = j;
  }
  std::vector<std::string> out;
  for (const auto& [b, e] : apply_behavior(spans, behavior)) out.push_back(piece.substr(b, e - b));
  return out;
}

bool is_numeric(UChar32 c) {
  const auto t = u_charType(c);
  return t == U_DECIMAL_DIGIT_NUMBER || t == U_LETTER_NUMBER || t == U_OTHER_NUMBER;
}

std::array<std::string, 256> make_byte_encoder() {
  std::array<std::string, 256> enc;
  std::array<bool, 256> direct{};
  for (int b = '!'; b <= '~'; ++b) direct[b] = true;
  for (int b = 0xA1; b <= 0xAC; ++b) direct[b] = true;
  for (int b = 0xAE; b <= 0xFF; ++b) direct[b] = true;
  int n = 0;
  for (int b = 0; b < 256; ++b) {
    UChar32 cp = direct[b] ? b : 256 + n++;
    enc[b] = to_utf8(icu::UnicodeString(cp));
  }
  return enc;
}

const std::array<std::string, 256>& byte_encoder() {
  static const auto enc = make_byte_encoder();
  return enc;
}

const std::unordered_map<std::string, unsigned char>& byte_decoder() {
  static const auto dec = [] {
    std::unordered_map<std::string, unsigned char> d;
    const auto& enc = byte_encoder();
    for (int b = 0; b < 256; ++b) d.emplace(enc[b], static_cast<unsigned char>(b));
    return d;
  }();
  return dec;
}

std::string byte_level_map(std::string_view s) {
  std::string out;
  const auto& enc = byte_encoder();
  for (char c : s) out += enc[static_cast<unsigned char>(c)];
  return out;
}

constexpr const char* kGpt2Pattern =
    R"('s|'t|'re|'ve|'m|'ll|'d| ?\p{L}+| ?\p{N}+| ?[^\s\p{L}\p{N}]+|\s+(?!\S)|\s+)";

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  if (from.empty()) return s;
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

std::optional<unsigned char> parse_byte_token(std::string_view tok) {
  if (tok.size() != 6 || tok.substr(0, 3) != "<0x" || tok.back() != '>') return std::nullopt;
  unsigned value = 0;
  for (char c : tok.substr(3, 2)) {
    value <<= 4;
    if (c >= '0' && c <= '9') {
      value |= static_cast<unsigned>(c - '0');
    } else if (c >= 'A' && c <= 'F') {
      value |= static_cast<unsigned>(c - 'A' + 10);
    } else if (c >= 'a' && c <= 'f') {
      value |= static_cast<unsigned>(c - 'a' + 10);
    } else {
      return std::nullopt;
    }
  }
  return static_cast<unsigned char>(value);
}

// ---------------------------------------------------------------------------
// pipeline components

struct Normalizer {
  enum class Kind { nfc, nfd, nfkc, nfkd, lowercase, strip, replace, prepend } kind;
  bool strip_left = false;
  bool strip_right = false;
  std::shared_ptr<icu::RegexPattern> pattern;
  std::string content;

  std::string apply(const std::string& s) const {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* n2 = nullptr;
    switch (kind) {
      case Kind::nfc: n2 = icu::Normalizer2::getNFCInstance(status); break;
      case Kind::nfd: n2 = icu::Normalizer2::getNFDInstance(status); break;
      case Kind::nfkc: n2 = icu::Normalizer2::getNFKCInstance(status); break;
      case Kind::nfkd: n2 = icu::Normalizer2::getNFKDInstance(status); break;
      case Kind::lowercase: return to_lower(s);
      case Kind::strip: {
        const auto chars = utf8_chars(s);
        std::size_t b = 0;
        std::size_t e = chars.size();
        if (strip_left) {
          while (b < e && u_isUWhiteSpace(first_codepoint(chars[b]))) ++b;
        }
        if (strip_right) {
          while (e > b && u_isUWhiteSpace(first_codepoint(chars[e - 1]))) --e;
        }
        std::string out;
        for (std::size_t i = b; i < e; ++i) out += chars[i];
        return out;
      }
      case Kind::replace: {
        icu::UnicodeString u = to_ustr(s);
        std::unique_ptr<icu::RegexMatcher> m(pattern->matcher(u, status));
        icu::UnicodeString replacement = to_ustr(content);
        // literal replacement text: escape '$' and '\'
        icu::UnicodeString escaped;
        for (int32_t i = 0; i < replacement.length(); ++i) {
          const char16_t ch = replacement.charAt(i);
          if (ch == u'$' || ch == u'\\') escaped.append(u'\\');
          escaped.append(ch);
        }
        icu::UnicodeString result = m->replaceAll(escaped, status);
        if (U_FAILURE(status)) throw DataError("Replace normalizer failed");
        return to_utf8(result);
      }
      case Kind::prepend: return s.empty() ? s : content + s;
    }
    if (U_FAILURE(status) || !n2) throw DataError("ICU normalizer unavailable");
    icu::UnicodeString out = n2->normalize(to_ustr(s), status);
    if (U_FAILURE(status)) throw DataError("Unicode normalization failed");
    return to_utf8(out);
  }
};

void parse_normalizer(const json& j, std::vector<Normalizer>& out) {
  if (j.is_null()) return;
  const std::string type = j.at("type").get<std::string>();
  if (type == "Sequence") {
    for (const auto& n : j.at("normalizers")) parse_normalizer(n, out);
    return;
  }
  Normalizer n;
  n.kind = Normalizer::Kind::nfc;
  if (type == "NFC") {
    n.kind = Normalizer::Kind::nfc;
  } else if (type == "NFD") {
    n.kind = Normalizer::Kind::nfd;
  } else if (type == "NFKC") {
    n.kind = Normalizer::Kind::nfkc;
  } else if (type == "NFKD") {
    n.kind = Normalizer::Kind::nfkd;
  } else if (type == "Lowercase") {
    n.kind = Normalizer::Kind::lowercase;
  } else if (type == "Strip") {
    n.kind = Normalizer::Kind::strip;
    n.strip_left = j.value("strip_left", true);
    n.strip_right = j.value("strip_right", true);
  } else if (type == "Replace") {
    n.kind = Normalizer::Kind::replace;
    n.pattern = compile_pattern(j.at("pattern"));
    n.content = j.at("content").get<std::string>();
  } else if (type == "Prepend") {
    n.kind = Normalizer::Kind::prepend;
    n.content = j.at("prepend").get<std::string>();
  } else {
    throw DataError("unsupported tokenizer normalizer '" + type + "'");
  }
  out.push_back(std::move(n));
}

struct PreTokenizer {
  enum class Kind { split, byte_level, digits, whitespace, whitespace_split, metaspace } kind;
  std::shared_ptr<icu::RegexPattern> pattern;
  SplitBehavior behavior = SplitBehavior::isolated;
  bool invert = false;
  bool add_prefix_space = false;
  bool use_regex = true;
  bool individual_digits = false;
  std::string replacement;
  std::string prepend_scheme;
  bool split = true;

  void apply(std::vector<std::string>& pieces) const {
    std::vector<std::string> next;
    for (std::size_t idx = 0; idx < pieces.size(); ++idx) {
      std::string piece = std::move(pieces[idx]);
      switch (kind) {
        case Kind::split:
        case Kind::whitespace: {
          for (auto& p : regex_split(piece, *pattern, behavior, invert)) next.push_back(std::move(p));
          break;
        }
        case Kind::whitespace_split: {
          for (auto& p : predicate_split(piece, [](UChar32 c) { return u_isUWhiteSpace(c) != 0; },
                                         SplitBehavior::removed)) {
            next.push_back(std::move(p));
          }
          break;
        }
        case Kind::digits: {
          if (individual_digits) {
            for (auto& p : predicate_split(piece, is_numeric, SplitBehavior::isolated)) next.push_back(std::move(p));
          } else {
            // group runs of digits and runs of non-digits
            const auto chars = utf8_chars(piece);
            std::string cur;
            int state = -1;
            for (auto c : chars) {
              const int s = is_numeric(first_codepoint(c)) ? 1 : 0;
              if (s != state && !cur.empty()) {
                next.push_back(std::move(cur));
                cur.clear();
              }
              cur += c;
              state = s;
            }
            if (!cur.empty()) next.push_back(std::move(cur));
          }
          break;
        }
        case Kind::byte_level: {
          if (add_prefix_space && !piece.starts_with(' ')) piece.insert(0, " ");
          if (use_regex) {
            for (auto& p : regex_split(piece, *pattern, SplitBehavior::isolated, false)) {
              next.push_back(byte_level_map(p));
            }
          } else if (!piece.empty()) {
            next.push_back(byte_level_map(piece));
          }
          break;
        }
        case Kind::metaspace: {
          piece = replace_all(std::move(piece), " ", replacement);
          const bool prepend = prepend_scheme == "always" || (prepend_scheme == "first" && idx == 0);
          if (prepend && !piece.starts_with(replacement)) piece.insert(0, replacement);
          if (!split) {
            if (!piece.empty()) next.push_back(std::move(piece));
            break;
          }
          // MergedWithNext on the replacement string
          std::size_t start = 0;
          std::size_t pos = piece.find(replacement, 1);
          while (pos != std::string::npos) {
            next.push_back(piece.substr(start, pos - start));
            start = pos;
            pos = piece.find(replacement, pos + replacement.size());
          }
          if (start < piece.size()) next.push_back(piece.substr(start));
          break;
        }
      }
    }
    pieces = std::move(next);
  }
};

void parse_pre_tokenizer(const json& j, std::vector<PreTokenizer>& out) {
  if (j.is_null()) return;
  const std::string type = j.at("type").get<std::string>();
  if (type == "Sequence") {
    for (const auto& p : j.at("pretokenizers")) parse_pre_tokenizer(p, out);
    return;
  }
  PreTokenizer p;
  p.kind = PreTokenizer::Kind::split;
  if (type == "Split") {
    p.kind = PreTokenizer::Kind::split;
    p.pattern = compile_pattern(j.at("pattern"));
    p.behavior = parse_behavior(j.at("behavior").get<std::string>());
    p.invert = j.value("invert", false);
  } else if (type == "ByteLevel") {
    p.kind = PreTokenizer::Kind::byte_level;
    p.add_prefix_space = j.value("add_prefix_space", true);
    p.use_regex = j.value("use_regex", true);
    if (p.use_regex) p.pattern = compile_regex(kGpt2Pattern, false);
  } else if (type == "Digits") {
    p.kind = PreTokenizer::Kind::digits;
    p.individual_digits = j.value("individual_digits", false);
  } else if (type == "Whitespace") {
    p.kind = PreTokenizer::Kind::whitespace;
    p.pattern = compile_regex(R"(\w+|[^\w\s]+)", false);
    p.behavior = SplitBehavior::removed;
    p.invert = true;
  } else if (type == "WhitespaceSplit") {
    p.kind = PreTokenizer::Kind::whitespace_split;
  } else if (type == "Metaspace") {
    p.kind = PreTokenizer::Kind::metaspace;
    p.replacement = j.value("replacement", std::string("\xE2\x96\x81"));
    if (j.contains("prepend_scheme")) {
      p.prepend_scheme = j.at("prepend_scheme").get<std::string>();
    } else {
      p.prepend_scheme = j.value("add_prefix_space", true) ? "always" : "never";
    }
    p.split = j.value("split", true);
  } else {
    throw DataError("unsupported tokenizer pre-tokenizer '" + type + "'");
  }
  out.push_back(std::move(p));
}

struct Decoder {
  enum class Kind { byte_level, byte_fallback, fuse, replace, strip, metaspace } kind;
  std::string from;
  std::string to;
  std::size_t start = 0;
  std::size_t stop = 0;
  std::string prepend_scheme;

  void apply(std::vector<std::string>& tokens) const {
    switch (kind) {
      case Kind::byte_level: {
        std::string joined;
        for (const auto& t : tokens) joined += t;
        std::string bytes;
        const auto& dec = byte_decoder();
        for (auto c : utf8_chars(joined)) {
          auto it = dec.find(std::string(c));
          if (it != dec.end()) {
            bytes.push_back(static_cast<char>(it->second));
          } else {
            bytes += c;
          }
        }
        tokens = {bytes};
        break;
      }
      case Kind::byte_fallback: {
        std::vector<std::string> out;
        std::string pending;
        auto flush = [&] {
          if (pending.empty()) return;
          if (is_valid_utf8(pending)) {
            out.push_back(pending);
          } else {
            for (std::size_t i = 0; i < pending.size(); ++i) out.emplace_back("\xEF\xBF\xBD");
          }
          pending.clear();
        };
        for (const auto& t : tokens) {
          if (auto b = parse_byte_token(t)) {
            pending.push_back(static_cast<char>(*b));
          } else {
            flush();
            out.push_back(t);
          }
        }
        flush();
        tokens = std::move(out);
        break;
      }
      case Kind::fuse: {
        std::string joined;
        for (const auto& t : tokens) joined += t;
        tokens = {joined};
        break;
      }
      case Kind::replace:
        for (auto& t : tokens) t = replace_all(t, from, to);
        break;
      case Kind::strip:
        for (auto& t : tokens) {
          std::size_t b = 0;
          for (std::size_t i = 0; i < start && t.compare(b, from.size(), from) == 0; ++i) b += from.size();
          std::size_t e = t.size();
          for (std::size_t i = 0; i < stop && e >= b + from.size() &&
                                  t.compare(e - from.size(), from.size(), from) == 0;
               ++i) {
            e -= from.size();
          }
          t = t.substr(b, e - b);
        }
        break;
      case Kind::metaspace:
        for (std::size_t i = 0; i < tokens.size(); ++i) {
          std::string t = replace_all(tokens[i], from, " ");
          if (i == 0 && prepend_scheme != "never" && t.starts_with(' ')) t.erase(0, 1);
          tokens[i] = std::move(t);
        }
        break;
    }
  }
};

void parse_decoder(const json& j, std::vector<Decoder>& out) {
  if (j.is_null()) return;
  const std::string type = j.at("type").get<std::string>();
  if (type == "Sequence") {
    for (const auto& d : j.at("decoders")) parse_decoder(d, out);
    return;
  }
  Decoder d;
  d.kind = Decoder::Kind::fuse;
  if (type == "ByteLevel") {
    d.kind = Decoder::Kind::byte_level;
  } else if (type == "ByteFallback") {
    d.kind = Decoder::Kind::byte_fallback;
  } else if (type == "Fuse") {
    d.kind = Decoder::Kind::fuse;
  } else if (type == "Replace") {
    d.kind = Decoder::Kind::replace;
    const auto& pat = j.at("pattern");
    if (!pat.contains("String")) throw DataError("Replace decoder supports only String patterns");
    d.from = pat.at("String").get<std::string>();
    d.to = j.at("content").get<std::string>();
  } else if (type == "Strip") {
    d.kind = Decoder::Kind::strip;
    d.from = j.at("content").get<std::string>();
    d.start = j.value("start", 0u);
    d.stop = j.value("stop", 0u);
  } else if (type == "Metaspace") {
    d.kind = Decoder::Kind::metaspace;
    d.from = j.value("replacement", std::string("\xE2\x96\x81"));
    if (j.contains("prepend_scheme")) {
      d.prepend_scheme = j.at("prepend_scheme").get<std::string>();
    } else {
      d.prepend_scheme = j.value("add_prefix_space", true) ? "always" : "never";
    }
  } else {
    throw DataError("unsupported tokenizer decoder '" + type + "'");
  }
  out.push_back(std::move(d));
}

std::uint64_t pair_key(std::int32_t a, std::int32_t b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

}  // namespace

// ---------------------------------------------------------------------------
// BpeTokenizer

struct BpeTokenizer::Impl {
  struct Merge {
    std::uint32_t rank;
    std::int32_t new_id;
  };
  struct AddedToken {
    std::string content;
    std::int32_t id;
  };

  std::unordered_map<std::string, std::int32_t> vocab;
  std::vector<std::string> id_to_token;
  std::unordered_map<std::uint64_t, Merge> merges;
  std::optional<std::int32_t> unk_id;
  std::string continuing_prefix;
  std::string end_suffix;
  bool fuse_unk = false;
  bool byte_fallback = false;
  bool ignore_merges = false;
  std::vector<AddedToken> added;  // sorted longest first
  std::vector<Normalizer> normalizers;
  std::vector<PreTokenizer> pre_tokenizers;
  std::vector<Decoder> decoders;

  std::optional<std::int32_t> lookup(const std::string& token) const {
    auto it = vocab.find(token);
    if (it == vocab.end()) return std::nullopt;
    return it->second;
  }

  void encode_piece(const std::string& piece, std::vector<std::int32_t>& out) const {
    if (piece.empty()) return;
    if (ignore_merges) {
      if (auto id = lookup(piece)) {
        out.push_back(*id);
        return;
      }
    }
    struct Sym {
      std::int32_t id;
      int prev;
      int next;
      bool alive;
    };
    std::vector<Sym> syms;
    const auto chars = utf8_chars(piece);
    bool last_unk = false;
    for (std::size_t i = 0; i < chars.size(); ++i) {
      std::string s;
      if (i > 0) s += continuing_prefix;
      s += chars[i];
      if (i + 1 == chars.size()) s += end_suffix;
      auto push = [&](std::int32_t id) {
        const int idx = static_cast<int>(syms.size());
        syms.push_back({id, idx - 1, -1, true});
        if (idx > 0) syms[idx - 1].next = idx;
      };
      if (auto id = lookup(s)) {
        push(*id);
        last_unk = false;
        continue;
      }
      if (byte_fallback) {
        std::vector<std::int32_t> bytes;
        for (char c : chars[i]) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "<0x%02X>", static_cast<unsigned char>(c));
          if (auto id = lookup(buf)) bytes.push_back(*id);
        }
        if (bytes.size() == chars[i].size()) {
          for (auto id : bytes) push(id);
          last_unk = false;
          continue;
        }
      }
      if (unk_id) {
        if (!(fuse_unk && last_unk)) push(*unk_id);
        last_unk = true;
      }
    }
    using Entry = std::pair<std::uint32_t, int>;  // rank, position
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
    auto consider = [&](int pos) {
      if (pos < 0 || syms[pos].next < 0) return;
      auto it = merges.find(pair_key(syms[pos].id, syms[syms[pos].next].id));
      if (it != merges.end()) queue.emplace(it->second.rank, pos);
    };
    for (int i = 0; i + 1 < static_cast<int>(syms.size()); ++i) consider(i);
    while (!queue.empty()) {
      const auto [rank, pos] = queue.top();
      queue.pop();
      Sym& s = syms[pos];
      if (!s.alive || s.next < 0) continue;
      auto it = merges.find(pair_key(s.id, syms[s.next].id));
      if (it == merges.end() || it->second.rank != rank) continue;
      const int nx = s.next;
      s.id = it->second.new_id;
      syms[nx].alive = false;
      s.next = syms[nx].next;
      if (s.next >= 0) syms[s.next].prev = pos;
      consider(s.prev);
      consider(pos);
    }
    for (const auto& s : syms) {
      if (s.alive) out.push_back(s.id);
    }
  }

  void encode_text(const std::string& text, std::vector<std::int32_t>& out) const {
    if (text.empty()) return;
    std::string normalized = text;
    for (const auto& n : normalizers) normalized = n.apply(normalized);
    std::vector<std::string> pieces{normalized};
    for (const auto& p : pre_tokenizers) p.apply(pieces);
    for (const auto& piece : pieces) encode_piece(piece, out);
  }
};

BpeTokenizer::BpeTokenizer(std::unique_ptr<Impl> impl, std::string name)
    : impl_(std::move(impl)), name_(std::move(name)) {}

BpeTokenizer::~BpeTokenizer() = default;

bool BpeTokenizer::byte_fallback() const { return impl_->byte_fallback; }
std::size_t BpeTokenizer::vocab_size() const { return impl_->id_to_token.size(); }

std::string BpeTokenizer::id_to_token(std::int32_t id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= impl_->id_to_token.size()) return {};
  return impl_->id_to_token[id];
}

std::shared_ptr<const BpeTokenizer> BpeTokenizer::from_json(std::string_view json_text, std::string name) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("tokenizer definition is not valid JSON: ") + e.what());
  }
  auto impl = std::make_unique<Impl>();
  try {
    const auto& model = j.at("model");
    const std::string type = model.value("type", std::string("BPE"));
    if (type != "BPE") throw DataError("unsupported tokenizer model type '" + type + "'");
    if (model.contains("dropout") && !model.at("dropout").is_null() && model.at("dropout").get<double>() > 0.0) {
      throw DataError("BPE dropout is not supported");
    }
    std::int32_t max_id = -1;
    for (const auto& [tok, id] : model.at("vocab").items()) {
      const auto v = id.get<std::int32_t>();
      impl->vocab.emplace(tok, v);
      max_id = std::max(max_id, v);
    }
    if (j.contains("added_tokens")) {
      for (const auto& a : j.at("added_tokens")) {
        const auto id = a.at("id").get<std::int32_t>();
        auto content = a.at("content").get<std::string>();
        max_id = std::max(max_id, id);
        impl->added.push_back({content, id});
      }
    }
    impl->id_to_token.assign(static_cast<std::size_t>(max_id + 1), {});
    for (const auto& [tok, id] : impl->vocab) impl->id_to_token[id] = tok;
    for (const auto& a : impl->added) impl->id_to_token[a.id] = a.content;
    std::stable_sort(impl->added.begin(), impl->added.end(),
                     [](const Impl::AddedToken& x, const Impl::AddedToken& y) {
                       return x.content.size() > y.content.size();
                     });

    auto opt_string = [&](const char* key) -> std::string {
      if (!model.contains(key) || model.at(key).is_null()) return {};
      return model.at(key).get<std::string>();
    };
    impl->continuing_prefix = opt_string("continuing_subword_prefix");
    impl->end_suffix = opt_string("end_of_word_suffix");
    if (const auto unk = opt_string("unk_token"); !unk.empty()) {
      impl->unk_id = impl->lookup(unk);
      if (!impl->unk_id) throw DataError("unk_token '" + unk + "' is not in the vocabulary");
    }
    impl->fuse_unk = model.value("fuse_unk", false);
    impl->byte_fallback = model.value("byte_fallback", false);
    impl->ignore_merges = model.value("ignore_merges", false);

    std::uint32_t rank = 0;
    for (const auto& m : model.at("merges")) {
      std::string a;
      std::string b;
      if (m.is_string()) {
        const auto s = m.get<std::string>();
        const auto sp = s.find(' ');
        if (sp == std::string::npos) throw DataError("malformed merge '" + s + "'");
        a = s.substr(0, sp);
        b = s.substr(sp + 1);
      } else {
        a = m.at(0).get<std::string>();
        b = m.at(1).get<std::string>();
      }
      const auto ia = impl->lookup(a);
      const auto ib = impl->lookup(b);
      std::string merged = a;
      merged += std::string_view(b).substr(
          !impl->continuing_prefix.empty() && b.starts_with(impl->continuing_prefix) ? impl->continuing_prefix.size()
                                                                                    : 0);
      const auto in = impl->lookup(merged);
      if (!ia || !ib || !in) throw DataError("merge '" + a + " " + b + "' refers to a token outside the vocabulary");
      impl->merges.emplace(pair_key(*ia, *ib), Impl::Merge{rank, *in});
      ++rank;
    }

    if (j.contains("normalizer")) parse_normalizer(j.at("normalizer"), impl->normalizers);
    if (j.contains("pre_tokenizer")) parse_pre_tokenizer(j.at("pre_tokenizer"), impl->pre_tokenizers);
    if (j.contains("decoder")) parse_decoder(j.at("decoder"), impl->decoders);
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed tokenizer definition: ") + e.what());
  }
  return std::shared_ptr<const BpeTokenizer>(new BpeTokenizer(std::move(impl), std::move(name)));
}

std::shared_ptr<const BpeTokenizer> BpeTokenizer::from_file(const std::string& path) {
  try {
    return from_json(read_file(path), path);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

std::vector<std::int32_t> BpeTokenizer::encode(std::string_view text) const {
  std::vector<std::int32_t> out;
  std::string pending;
  std::size_t i = 0;
  while (i < text.size()) {
    const Impl::AddedToken* hit = nullptr;
    for (const auto& a : impl_->added) {
      if (!a.content.empty() && text.compare(i, a.content.size(), a.content) == 0) {
        hit = &a;
        break;
      }
    }
    if (hit) {
      impl_->encode_text(pending, out);
      pending.clear();
      out.push_back(hit->id);
      i += hit->content.size();
    } else {
      pending.push_back(text[i]);
      ++i;
    }
  }
  impl_->encode_text(pending, out);
  return out;
}

std::string BpeTokenizer::decode(std::span<const std::int32_t> ids) const {
  std::vector<std::string> tokens;
  tokens.reserve(ids.size());
  for (auto id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= impl_->id_to_token.size()) {
      throw DataError("token id out of range: " + std::to_string(id));
    }
    tokens.push_back(impl_->id_to_token[id]);
  }
  for (const auto& d : impl_->decoders) d.apply(tokens);
  std::string out;
  for (const auto& t : tokens) out += t;
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::string fetch_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  const auto path_begin = url.find('/', scheme_end + 3);
  const std::string origin = path_begin == std::string::npos ? url : url.substr(0, path_begin);
  const std::string path = path_begin == std::string::npos ? "/" : url.substr(path_begin);
  httplib::Client client(origin);
  client.set_follow_location(true);
  client.set_connection_timeout(30);
  client.set_read_timeout(120);
  auto res = client.Get(path);
  if (!res) throw DataError("cannot fetch " + url + ": " + httplib::to_string(res.error()));
  if (res->status != 200) throw DataError("cannot fetch " + url + ": HTTP " + std::to_string(res->status));
  return res->body;
}

}  // namespace

std::shared_ptr<const Tokenizer> load_tokenizer(const std::string& location) {
  if (location == "bytes") return std::make_shared<ByteTokenizer>();
  if (location.starts_with("http://") || location.starts_with("https://")) {
    return BpeTokenizer::from_json(fetch_url(location), location);
  }
  return BpeTokenizer::from_file(location);
}

}  // namespace lrl
