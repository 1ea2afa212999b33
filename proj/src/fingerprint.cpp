#include "bsds/fingerprint.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace bsds {

namespace {

std::size_t word_count(std::int32_t width_bits) {
  return static_cast<std::size_t>((width_bits + 63) / 64);
}

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return -1;
}

}  // namespace

Fingerprint::Fingerprint(std::vector<std::uint64_t> words, std::int32_t width_bits)
    : words_(std::move(words)), width_bits_(width_bits) {
  if (width_bits_ <= 0) throw std::invalid_argument("fingerprint width must be positive");
  if (words_.size() != word_count(width_bits_))
    throw std::invalid_argument("fingerprint word count does not match width");
  const int tail = width_bits_ % 64;
  if (tail != 0) words_.back() &= (std::uint64_t{1} << tail) - 1;
  recount();
}

Fingerprint Fingerprint::zeros(std::int32_t width_bits) {
  if (width_bits <= 0) throw std::invalid_argument("fingerprint width must be positive");
  Fingerprint fp;
  fp.width_bits_ = width_bits;
  fp.words_.assign(word_count(width_bits), 0);
  return fp;
}

Fingerprint Fingerprint::from_hex(const std::string& hex, std::int32_t width_bits) {
  if (width_bits <= 0 || width_bits % 4 != 0)
    throw std::invalid_argument("fingerprint width must be a positive multiple of 4");
  if (hex.size() != static_cast<std::size_t>(width_bits / 4))
    throw std::invalid_argument("fingerprint hex length does not match width");
  Fingerprint fp = zeros(width_bits);
  // hex[0] carries the highest 4 bits.
  for (std::size_t pos = 0; pos < hex.size(); ++pos) {
    const int v = hex_digit(hex[pos]);
    if (v < 0) throw std::invalid_argument("fingerprint hex has a non-hex character");
    const std::int32_t base = width_bits - 4 * static_cast<std::int32_t>(pos + 1);
    for (int k = 0; k < 4; ++k)
      if (v & (1 << k)) fp.set_bit(base + k);
  }
  fp.recount();
  return fp;
}

std::string Fingerprint::to_hex() const {
  if (width_bits_ % 4 != 0)
    throw std::logic_error("fingerprint width not hex-serializable");
  std::string out(static_cast<std::size_t>(width_bits_ / 4), '0');
  static const char* digits = "0123456789abcdef";
  for (std::size_t pos = 0; pos < out.size(); ++pos) {
    const std::int32_t base = width_bits_ - 4 * static_cast<std::int32_t>(pos + 1);
    int v = 0;
    for (int k = 0; k < 4; ++k)
      if (test_bit(base + k)) v |= 1 << k;
    out[pos] = digits[v];
  }
  return out;
}

void Fingerprint::set_bit(std::int32_t bit) {
  if (bit < 0 || bit >= width_bits_) throw std::out_of_range("fingerprint bit index");
  std::uint64_t& w = words_[static_cast<std::size_t>(bit / 64)];
  const std::uint64_t mask = std::uint64_t{1} << (bit % 64);
  if (!(w & mask)) {
    w |= mask;
    ++popcount_;
  }
}

bool Fingerprint::test_bit(std::int32_t bit) const {
  if (bit < 0 || bit >= width_bits_) throw std::out_of_range("fingerprint bit index");
  return (words_[static_cast<std::size_t>(bit / 64)] >> (bit % 64)) & 1;
}

void Fingerprint::recount() {
  popcount_ = 0;
  for (std::uint64_t w : words_) popcount_ += std::popcount(w);
}

double tanimoto(const Fingerprint& a, const Fingerprint& b) {
  if (a.width() != b.width())
    throw std::invalid_argument("tanimoto: fingerprint widths differ");
  const auto wa = a.words();
  const auto wb = b.words();
  std::int64_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < wa.size(); ++i) {
    inter += std::popcount(wa[i] & wb[i]);
    uni += std::popcount(wa[i] | wb[i]);
  }
  if (uni == 0) return 1.0;  // two empty structures are identical
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double retrieval_score(const Fingerprint& candidate, const KnowledgeBase& kb) {
  if (kb.fingerprints.empty())
    throw std::invalid_argument("retrieval_score: empty knowledge base");
  double best = 0.0;
  for (const Fingerprint& member : kb.fingerprints)
    best = std::max(best, tanimoto(candidate, member));
  return best;
}

double diversity_score(const Fingerprint& candidate,
                       std::span<const Fingerprint> already_selected) {
  if (already_selected.empty()) return 0.0;
  double worst = 0.0;
  for (const Fingerprint& sel : already_selected)
    worst = std::max(worst, tanimoto(candidate, sel));
  return -worst;
}

KnowledgeBase sample_knowledge_base(const LabeledPool& pool,
                                    std::span<const Fingerprint> fingerprints,
                                    double fraction, Rng& rng,
                                    std::span<const std::int32_t> training_indices) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw std::invalid_argument("knowledge base fraction must be in (0, 1]");
  if (fingerprints.size() != static_cast<std::size_t>(pool.size()))
    throw std::invalid_argument("fingerprints not aligned to pool");

  std::vector<std::int32_t> actives;
  if (training_indices.empty()) {
    for (std::int32_t i = 0; i < pool.size(); ++i)
      if (pool.labels[static_cast<std::size_t>(i)]) actives.push_back(i);
  } else {
    for (std::int32_t i : training_indices)
      if (pool.labels[static_cast<std::size_t>(i)]) actives.push_back(i);
  }
  if (actives.empty())
    throw std::invalid_argument("no actives in the training portion");

  const auto want = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(
             std::floor(fraction * static_cast<double>(actives.size()) + 0.5)));
  const auto take = std::min<std::int64_t>(want, static_cast<std::int64_t>(actives.size()));

  // Partial Fisher-Yates over the active list.
  for (std::int64_t i = 0; i < take; ++i) {
    const std::uint64_t j =
        i + rng.next_below(static_cast<std::uint64_t>(actives.size()) - i);
    std::swap(actives[static_cast<std::size_t>(i)], actives[static_cast<std::size_t>(j)]);
  }
  actives.resize(static_cast<std::size_t>(take));
  std::sort(actives.begin(), actives.end());

  KnowledgeBase kb;
  kb.member_indices = actives;
  kb.fingerprints.reserve(actives.size());
  for (std::int32_t i : actives) kb.fingerprints.push_back(fingerprints[static_cast<std::size_t>(i)]);
  return kb;
}

}  // namespace bsds
