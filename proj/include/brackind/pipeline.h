#ifndef BRACKIND_PIPELINE_H_
#define BRACKIND_PIPELINE_H_

#include <vector>

#include "brackind/data.h"
#include "brackind/train.h"

namespace brackind {

// Vocabulary over all corpus tokens, in first-occurrence order.
Vocabulary build_vocabulary(const std::vector<CorpusRecord>& records);

// Lookup-mode training sentences; brackets are preprocessed.
std::vector<TrainingSentence> lookup_sentences(const std::vector<CorpusRecord>& records,
                                               const Vocabulary& vocab);

// Precomputed-embedding training sentences. Throws ConfigError when the file
// does not align with the corpus.
std::vector<TrainingSentence> embedded_sentences(const std::vector<CorpusRecord>& records,
                                                 const EmbeddingFile& embeddings);

// Decodes every sentence with the scorer (parallel over sentences).
std::vector<BinaryTree> parse_sentences(const ModelParams& params,
                                        const std::vector<TrainingSentence>& sentences,
                                        int threads = 1);

}  // namespace brackind

#endif  // BRACKIND_PIPELINE_H_
