#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace aqkd {

/// Packed bit vector for key material. Index 0 is the first sifted bit
/// (x_0 in pairing notation).
class BitString {
 public:
  BitString() = default;
  explicit BitString(std::size_t n, bool value = false)
      : words_((n + 63) / 64, value ? ~0ull : 0ull), size_(n) {
    trim_last_word();
  }

  static BitString from_string(std::string_view s) {
    BitString out;
    out.reserve(s.size());
    for (char c : s) {
      if (c != '0' && c != '1') throw std::invalid_argument("bit string must be 0/1");
      out.push_back(c == '1');
    }
    return out;
  }

  std::string to_string() const {
    std::string s(size_, '0');
    for (std::size_t i = 0; i < size_; ++i)
      if ((*this)[i]) s[i] = '1';
    return s;
  }

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  void reserve(std::size_t n) { words_.reserve((n + 63) / 64); }

  void push_back(bool bit) {
    if (size_ % 64 == 0) words_.push_back(0);
    if (bit) words_.back() |= 1ull << (size_ % 64);
    ++size_;
  }

  bool operator[](std::size_t i) const {
    return (words_[i / 64] >> (i % 64)) & 1ull;
  }

  void set(std::size_t i, bool bit) {
    const std::uint64_t mask = 1ull << (i % 64);
    if (bit)
      words_[i / 64] |= mask;
    else
      words_[i / 64] &= ~mask;
  }

  void truncate(std::size_t n) {
    if (n >= size_) return;
    size_ = n;
    words_.resize((n + 63) / 64);
    trim_last_word();
  }

  void append(const BitString& other) {
    for (std::size_t i = 0; i < other.size_; ++i) push_back(other[i]);
  }

  std::size_t count_ones() const {
    std::size_t c = 0;
    for (std::uint64_t w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }

  /// Number of positions where the two strings differ.
  static std::size_t hamming_distance(const BitString& a, const BitString& b) {
    if (a.size_ != b.size_) throw std::invalid_argument("length mismatch");
    std::size_t c = 0;
    for (std::size_t i = 0; i < a.words_.size(); ++i)
      c += static_cast<std::size_t>(std::popcount(a.words_[i] ^ b.words_[i]));
    return c;
  }

  friend bool operator==(const BitString& a, const BitString& b) = default;

 private:
  void trim_last_word() {
    if (size_ % 64 != 0 && !words_.empty())
      words_.back() &= ~0ull >> (64 - size_ % 64);
  }

  std::vector<std::uint64_t> words_;
  std::size_t size_ = 0;
};

}  // namespace aqkd
