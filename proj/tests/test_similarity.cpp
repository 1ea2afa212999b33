#include "bsds/fingerprint.hpp"

#include <doctest.h>

#include <algorithm>

using namespace bsds;

namespace {

Fingerprint from_u64(std::uint64_t word) { return Fingerprint({word}, 64); }

Fingerprint random_fp(Rng& rng, std::int32_t width, double density = 0.3) {
  Fingerprint fp = Fingerprint::zeros(width);
  for (std::int32_t b = 0; b < width; ++b)
    if (rng.next_double() < density) fp.set_bit(b);
  return fp;
}

}  // namespace

TEST_CASE("tanimoto: identities and conventions") {
  Rng rng(1);
  const Fingerprint a = random_fp(rng, 128);
  CHECK(tanimoto(a, a) == 1.0);

  Fingerprint left = Fingerprint::zeros(64);
  Fingerprint right = Fingerprint::zeros(64);
  left.set_bit(3);
  left.set_bit(17);
  right.set_bit(40);
  CHECK(tanimoto(left, right) == 0.0);

  const Fingerprint empty1 = Fingerprint::zeros(64);
  const Fingerprint empty2 = Fingerprint::zeros(64);
  CHECK(tanimoto(empty1, empty2) == 1.0);  // identical empty structures
  CHECK(tanimoto(empty1, left) == 0.0);

  CHECK_THROWS_AS(tanimoto(a, left), std::invalid_argument);
}

TEST_CASE("tanimoto: random 64-bit pairs match the per-bit loop") {
  Rng rng(2);
  for (int trial = 0; trial < 2000; ++trial) {
    const Fingerprint a = from_u64(rng.next_u64());
    const Fingerprint b = from_u64(rng.next_u64());
    int inter = 0, uni = 0;
    for (int bit = 0; bit < 64; ++bit) {
      const bool ba = a.test_bit(bit), bb = b.test_bit(bit);
      inter += (ba && bb);
      uni += (ba || bb);
    }
    const double expected = (uni == 0) ? 1.0 : double(inter) / double(uni);
    CHECK(tanimoto(a, b) == expected);
    CHECK(tanimoto(a, b) == tanimoto(b, a));
    CHECK(tanimoto(a, b) >= 0.0);
    CHECK(tanimoto(a, b) <= 1.0);
  }
}

TEST_CASE("fingerprint hex round trip, msb-first layout") {
  // "f0a1" = 1111 0000 1010 0001; bit 15 is the leading '1'.
  const Fingerprint fp = Fingerprint::from_hex("f0a1", 16);
  CHECK(fp.popcount() == 7);
  CHECK(fp.test_bit(15));
  CHECK(fp.test_bit(14));
  CHECK(fp.test_bit(0));
  CHECK_FALSE(fp.test_bit(1));
  CHECK(fp.to_hex() == "f0a1");

  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const Fingerprint a = random_fp(rng, 256);
    const Fingerprint back = Fingerprint::from_hex(a.to_hex(), 256);
    CHECK(back.to_hex() == a.to_hex());
    CHECK(tanimoto(a, back) == 1.0);
  }

  CHECK_THROWS_AS(Fingerprint::from_hex("xyz1", 16), std::invalid_argument);
  CHECK_THROWS_AS(Fingerprint::from_hex("f0a", 16), std::invalid_argument);
}

TEST_CASE("retrieval score: exhaustive oracle and growth monotonicity") {
  Rng rng(4);
  std::vector<Fingerprint> members;
  KnowledgeBase kb;
  for (int m = 0; m < 20; ++m) {
    kb.fingerprints.push_back(random_fp(rng, 128));
    kb.member_indices.push_back(m);
  }

  // Equality with a kb member gives 1.0; a singleton kb is plain tanimoto.
  CHECK(retrieval_score(kb.fingerprints[7], kb) == 1.0);
  KnowledgeBase single;
  single.member_indices = {0};
  single.fingerprints = {kb.fingerprints[0]};
  const Fingerprint probe = random_fp(rng, 128);
  CHECK(retrieval_score(probe, single) == tanimoto(probe, kb.fingerprints[0]));

  KnowledgeBase empty;
  CHECK_THROWS_AS(retrieval_score(probe, empty), std::invalid_argument);

  for (int c = 0; c < 100; ++c) {
    const Fingerprint candidate = random_fp(rng, 128);
    double best = 0.0;
    for (const Fingerprint& member : kb.fingerprints)
      best = std::max(best, tanimoto(candidate, member));
    CHECK(retrieval_score(candidate, kb) == best);
  }

  // Adding members never lowers any candidate's score.
  KnowledgeBase growing;
  growing.member_indices = {0};
  growing.fingerprints = {kb.fingerprints[0]};
  double prev = retrieval_score(probe, growing);
  for (int m = 1; m < 20; ++m) {
    growing.member_indices.push_back(m);
    growing.fingerprints.push_back(kb.fingerprints[static_cast<std::size_t>(m)]);
    const double now = retrieval_score(probe, growing);
    CHECK(now >= prev);
    prev = now;
  }
}

TEST_CASE("diversity score: conventions, oracle, monotonicity") {
  Rng rng(5);
  const Fingerprint candidate = random_fp(rng, 128);
  CHECK(diversity_score(candidate, {}) == 0.0);

  std::vector<Fingerprint> selected{candidate};
  CHECK(diversity_score(candidate, selected) == -1.0);

  selected.clear();
  double prev = 0.0;
  for (int k = 0; k < 15; ++k) {
    selected.push_back(random_fp(rng, 128));
    double worst = 0.0;
    for (const Fingerprint& s : selected)
      worst = std::max(worst, tanimoto(candidate, s));
    const double value = diversity_score(candidate, selected);
    CHECK(value == -worst);
    CHECK(value <= prev);  // non-increasing as the list grows
    prev = value;
  }
}

TEST_CASE("knowledge base sampling: sizes, determinism, training restriction") {
  // 1,443 hits at fraction 0.10 gives 144 members.
  const std::int64_t n = 2000;
  std::vector<std::uint8_t> labels(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < 1443; ++i) labels[static_cast<std::size_t>(i)] = 1;
  const LabeledPool pool = make_labeled_pool(std::move(labels));
  Rng fp_rng(6);
  std::vector<Fingerprint> fps;
  fps.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) fps.push_back(random_fp(fp_rng, 64));

  {
    Rng rng(77);
    const KnowledgeBase kb = sample_knowledge_base(pool, fps, 0.10, rng);
    CHECK(kb.size() == 144);
    for (std::int32_t idx : kb.member_indices)
      CHECK(pool.labels[static_cast<std::size_t>(idx)] == 1);
  }
  {
    Rng rng(77);
    const KnowledgeBase kb1 = sample_knowledge_base(pool, fps, 0.10, rng);
    Rng rng2(77);
    const KnowledgeBase kb2 = sample_knowledge_base(pool, fps, 0.10, rng2);
    CHECK(kb1.member_indices == kb2.member_indices);
  }
  {
    Rng rng(78);
    const KnowledgeBase all = sample_knowledge_base(pool, fps, 1.0, rng);
    CHECK(all.size() == 1443);
  }
  {
    // Restricted to a training slice: members must come from it.
    std::vector<std::int32_t> training;
    for (std::int32_t i = 500; i < 1200; ++i) training.push_back(i);
    Rng rng(79);
    const KnowledgeBase kb =
        sample_knowledge_base(pool, fps, 0.25, rng, training);
    for (std::int32_t idx : kb.member_indices) {
      CHECK(idx >= 500);
      CHECK(idx < 1200);
    }
  }
  {
    std::vector<std::uint8_t> no_hits(50, 0);
    const LabeledPool hitless = make_labeled_pool(std::move(no_hits));
    std::vector<Fingerprint> small_fps(50, Fingerprint::zeros(64));
    Rng rng(80);
    CHECK_THROWS_AS(sample_knowledge_base(hitless, small_fps, 0.5, rng),
                    std::invalid_argument);
  }
}
