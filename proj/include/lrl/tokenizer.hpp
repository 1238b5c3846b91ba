#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lrl {

// Encodes text to token ids. Implementations are immutable after
// construction and safe to share between threads.
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;

  // No special-token framing is added.
  virtual std::vector<std::int32_t> encode(std::string_view text) const = 0;
  virtual std::string decode(std::span<const std::int32_t> ids) const = 0;
  virtual std::string name() const = 0;
  virtual bool byte_fallback() const = 0;

  std::size_t count_tokens(std::string_view text) const { return encode(text).size(); }
};

// One token per UTF-8 byte, ids 0-255.
class ByteTokenizer final : public Tokenizer {
 public:
  std::vector<std::int32_t> encode(std::string_view text) const override;
  std::string decode(std::span<const std::int32_t> ids) const override;
  std::string name() const override { return "bytes"; }
  bool byte_fallback() const override { return true; }
};

// Byte-pair-encoding tokenizer read from the single-file JSON serialization
// used by Hugging Face tokenizers (model type "BPE"). Supported pipeline
// components: normalizers Sequence, NFC, NFD, NFKC, NFKD, Lowercase, Strip,
// Replace, Prepend; pre-tokenizers Sequence, Split, ByteLevel, Digits,
// Whitespace, WhitespaceSplit, Metaspace. Anything else is rejected at load.
class BpeTokenizer final : public Tokenizer {
 public:
  static std::shared_ptr<const BpeTokenizer> from_json(std::string_view json_text, std::string name);
  static std::shared_ptr<const BpeTokenizer> from_file(const std::string& path);

  ~BpeTokenizer() override;

  std::vector<std::int32_t> encode(std::string_view text) const override;
  std::string decode(std::span<const std::int32_t> ids) const override;
  std::string name() const override { return name_; }
  bool byte_fallback() const override;

  std::size_t vocab_size() const;
  // Token string for an id, or empty when out of range.
  std::string id_to_token(std::int32_t id) const;

  struct Impl;

 private:
  explicit BpeTokenizer(std::unique_ptr<Impl> impl, std::string name);

  std::unique_ptr<Impl> impl_;
  std::string name_;
};

// "bytes" selects ByteTokenizer; http:// and https:// locations are fetched;
// anything else is a local file path.
std::shared_ptr<const Tokenizer> load_tokenizer(const std::string& location);

}  // namespace lrl
