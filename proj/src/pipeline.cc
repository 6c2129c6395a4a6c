#include "brackind/pipeline.h"

#include <optional>

#include "brackind/parallel.h"

namespace brackind {

Vocabulary build_vocabulary(const std::vector<CorpusRecord>& records) {
  Vocabulary vocab;
  for (const auto& rec : records)
    for (const auto& tok : rec.sentence.tokens) vocab.add(tok);
  return vocab;
}

std::vector<TrainingSentence> lookup_sentences(const std::vector<CorpusRecord>& records,
                                               const Vocabulary& vocab) {
  std::vector<TrainingSentence> out;
  out.reserve(records.size());
  for (const auto& rec : records) {
    TrainingSentence s;
    s.token_ids = vocab.ids_of(rec.sentence.tokens);
    s.brackets = preprocess_brackets(rec.brackets, rec.sentence.size());
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<TrainingSentence> embedded_sentences(const std::vector<CorpusRecord>& records,
                                                 const EmbeddingFile& embeddings) {
  check_alignment(records, embeddings);
  std::vector<TrainingSentence> out;
  out.reserve(records.size());
  for (std::size_t k = 0; k < records.size(); ++k) {
    TrainingSentence s;
    s.inputs = embeddings.sentences[k];
    s.brackets = preprocess_brackets(records[k].brackets, records[k].sentence.size());
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<BinaryTree> parse_sentences(const ModelParams& params,
                                        const std::vector<TrainingSentence>& sentences,
                                        int threads) {
  std::vector<std::optional<BinaryTree>> slots(sentences.size());
  parallel_for(sentences.size(), threads, [&](std::size_t k) {
    slots[k] = decode(score_sentence(params, sentences[k]));
  });
  std::vector<BinaryTree> out;
  out.reserve(slots.size());
  for (auto& t : slots) out.push_back(std::move(*t));
  return out;
}

}  // namespace brackind
