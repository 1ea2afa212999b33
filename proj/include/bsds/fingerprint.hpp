#pragma once

#include "bsds/rng.hpp"
#include "bsds/types.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace bsds {

/// Fixed-width binary fingerprint, packed 64 bits per word.
/// Bit b lives in words[b / 64] at position b % 64.
class Fingerprint {
 public:
  Fingerprint() = default;
  Fingerprint(std::vector<std::uint64_t> words, std::int32_t width_bits);

  static Fingerprint zeros(std::int32_t width_bits);

  /// Parses width/4 lowercase hex characters, most significant bit first.
  static Fingerprint from_hex(const std::string& hex, std::int32_t width_bits);
  std::string to_hex() const;

  void set_bit(std::int32_t bit);
  bool test_bit(std::int32_t bit) const;

  std::int32_t width() const { return width_bits_; }
  std::int32_t popcount() const { return popcount_; }
  std::span<const std::uint64_t> words() const { return words_; }

 private:
  void recount();

  std::vector<std::uint64_t> words_;
  std::int32_t width_bits_ = 0;
  std::int32_t popcount_ = 0;
};

/// |a AND b| / |a OR b|. Two all-zero vectors compare as identical (1.0);
/// zero against non-zero is 0. Widths must match.
double tanimoto(const Fingerprint& a, const Fingerprint& b);

/// Known actives standing in for domain knowledge.
struct KnowledgeBase {
  std::vector<std::int32_t> member_indices;  // indices into the source pool
  std::vector<Fingerprint> fingerprints;

  std::size_t size() const { return member_indices.size(); }
};

/// Maximum Tanimoto of `candidate` over the knowledge base (non-empty).
double retrieval_score(const Fingerprint& candidate, const KnowledgeBase& kb);

/// Negative maximum Tanimoto to the already-selected fingerprints; 0 for an
/// empty list so the first pick is driven by the other score terms.
double diversity_score(const Fingerprint& candidate,
                       std::span<const Fingerprint> already_selected);

/// Samples round-half-up(fraction * |H_train|), at least 1, actives without
/// replacement from the training portion. `training_indices` empty means the
/// whole pool. Deterministic per rng stream.
KnowledgeBase sample_knowledge_base(const LabeledPool& pool,
                                    std::span<const Fingerprint> fingerprints,
                                    double fraction, Rng& rng,
                                    std::span<const std::int32_t> training_indices = {});

}  // namespace bsds
