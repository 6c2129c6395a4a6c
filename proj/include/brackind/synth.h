#ifndef BRACKIND_SYNTH_H_
#define BRACKIND_SYNTH_H_

#include <cstdint>
#include <vector>

#include "brackind/data.h"

namespace brackind {

// Seeded toy phrase-structure grammar with a fixed 50-word vocabulary, used
// for end-to-end experiments without licensed treebanks.
struct SyntheticConfig {
  int sentences = 500;
  int min_length = 5;
  int max_length = 12;
  double reveal_rate = 0.6;   // fraction of gold non-trivial spans exposed
  double corrupt_rate = 0.1;  // exposed spans replaced by a crossing span
  std::uint64_t seed = 7;
};

inline constexpr int kSyntheticVocabSize = 50;

// Records carry tokens, POS, the gold tree and the partial (noisy) brackets.
std::vector<CorpusRecord> generate_synthetic(const SyntheticConfig& config);

}  // namespace brackind

#endif  // BRACKIND_SYNTH_H_
