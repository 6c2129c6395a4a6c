#ifndef BRACKIND_DATA_H_
#define BRACKIND_DATA_H_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "brackind/core.h"
#include "brackind/model.h"

namespace brackind {

// Malformed or inconsistent input data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TreeParseError : public DataError {
 public:
  TreeParseError(const std::string& what, std::size_t offset)
      : DataError(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

struct CorpusRecord {
  Sentence sentence;
  BracketSet brackets;
  std::optional<NaryTree> gold;
  // Raw hyperlink character ranges, before mapping to token spans.
  std::vector<std::pair<int, int>> links;
};

struct LoadResult {
  std::vector<CorpusRecord> records;
  std::vector<std::string> warnings;  // "line N: ..." entries
  std::size_t skipped = 0;
};

// Line-delimited JSON, one record per line:
//   {"id", "tokens", "brackets": [[i, j], ...], "pos"?, "gold"?,
//    "char_spans"?, "links"?}
// Malformed lines and out-of-bounds brackets skip the record with a warning.
LoadResult load_corpus(std::istream& in);
LoadResult load_corpus(const std::filesystem::path& path);

void write_corpus(std::ostream& out, const std::vector<CorpusRecord>& records);
void write_corpus(const std::filesystem::path& path, const std::vector<CorpusRecord>& records);

// Every contiguous exact occurrence of answer in tokens, in increasing start
// order. Empty when the answer does not occur (the answer is discarded).
std::vector<Span> map_answer_to_spans(std::span<const std::string> tokens,
                                      std::span<const std::string> answer);

// Smallest token span whose character extent covers [link_begin, link_end).
// Throws DataError when the sentence has no offsets or the link touches no
// token.
Span map_hyperlink_to_span(const Sentence& sentence, std::pair<int, int> link);

inline constexpr int kMaxWikiSentenceLength = 100;

// Keeps sentences with at most max_length tokens and at least one bracket of
// width >= 2.
std::vector<CorpusRecord> filter_wiki_sentences(std::vector<CorpusRecord> records,
                                                int max_length = kMaxWikiSentenceLength);

// Maps every record's `links` onto token spans and adds them as brackets.
// Links that cannot be mapped are reported in warnings and dropped.
std::vector<CorpusRecord> extract_hyperlink_brackets(std::vector<CorpusRecord> records,
                                                     std::vector<std::string>* warnings = nullptr);

struct PtbOptions {
  bool strip_function_tags = true;  // NP-SBJ-1 -> NP
  bool remove_empty_elements = true;  // drop -NONE- leaves and emptied phrases
};

struct ParsedTree {
  NaryTree tree;
  Sentence sentence;  // tokens and POS from the preterminals
};

// Parses one bracketed tree, e.g. "(S (NP (DT the) (NN cat)) (VP (VBD sat)))".
// A label-less outer wrapper "( (S ...) )" is removed.
ParsedTree read_ptb_tree(std::string_view text, const PtbOptions& options = {});

// Splits a stream into top-level bracketed trees; trees may span lines.
std::vector<ParsedTree> read_tree_file(std::istream& in, const PtbOptions& options = {});
std::vector<ParsedTree> read_tree_file(const std::filesystem::path& path,
                                       const PtbOptions& options = {});

std::string to_bracketed(const NaryTree& tree);

// Bracketed rendering of a binary tree with placeholder labels.
std::string to_bracketed(const BinaryTree& tree, std::span<const std::string> tokens,
                         std::string_view label = "X");

struct StatsReport {
  std::size_t sentences = 0;
  std::size_t brackets = 0;
  double brackets_per_sentence = 0.0;
  double pct_single_word = 0.0;
  double pct_multi_word = 0.0;
  // Reference-dependent rows; present only when every record has a gold tree.
  std::optional<double> pct_in_reference;
  std::optional<double> pct_conflicting;
  std::map<std::string, double> label_coverage;  // fraction in [0, 1]
  std::map<std::string, std::size_t> label_counts;
};

StatsReport corpus_stats(const std::vector<CorpusRecord>& records);

// Renders the report as an aligned text table.
std::string format_stats(const StatsReport& report);

// Precomputed embeddings, one (n x dim) matrix per sentence in corpus order.
struct EmbeddingFile {
  std::uint32_t dim = 0;
  std::vector<Matrix> sentences;
};

// CEMB: "CEMB" u32:version(1) u32:dim, then per sentence u32:count and
// count*dim f32, all little-endian.
EmbeddingFile read_cemb(std::istream& in);
EmbeddingFile read_cemb(const std::filesystem::path& path);
void write_cemb(std::ostream& out, const EmbeddingFile& file);
void write_cemb(const std::filesystem::path& path, const EmbeddingFile& file);

// Throws ConfigError unless the file has one matrix per record with matching
// token counts.
void check_alignment(const std::vector<CorpusRecord>& records, const EmbeddingFile& file);

// One QA-SRL sentence with its answers, each a whitespace-tokenized string.
struct QasrlSentence {
  std::string id;
  std::vector<std::string> tokens;
  std::vector<std::vector<std::string>> answers;
};

// Reads the tab-separated QA-SRL release format: a header line
// "<id>\t<num_predicates>", the space-tokenized sentence, then per predicate
// "<index>\t<word>\t<num_questions>" followed by that many question lines
// whose last field holds answers separated by "###". Blocks are separated by
// blank lines.
std::vector<QasrlSentence> read_qasrl(std::istream& in);

struct AnswerMappingStats {
  std::size_t answers = 0;
  std::size_t discarded = 0;
};

// Maps every answer onto all of its exact occurrences.
std::vector<CorpusRecord> qasrl_to_records(const std::vector<QasrlSentence>& sentences,
                                           AnswerMappingStats* stats = nullptr);

// Function-tag stripping used for gold labels: NP-SBJ-1 -> NP, PP=2 -> PP.
std::string base_label(std::string_view label);

}  // namespace brackind

#endif  // BRACKIND_DATA_H_
