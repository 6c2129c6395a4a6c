#include "brackind/data.h"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <json.hpp>

namespace brackind {

using nlohmann::json;

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

CorpusRecord record_from_json(const json& j) {
  CorpusRecord rec;
  rec.sentence.id = j.at("id").get<std::string>();
  rec.sentence.tokens = j.at("tokens").get<std::vector<std::string>>();
  if (j.contains("pos")) rec.sentence.pos = j.at("pos").get<std::vector<std::string>>();
  if (j.contains("char_spans"))
    rec.sentence.char_spans = j.at("char_spans").get<std::vector<std::pair<int, int>>>();
  rec.sentence.validate();
  const int n = rec.sentence.size();

  if (j.contains("brackets")) {
    for (const auto& b : j.at("brackets")) {
      if (!b.is_array() || b.size() != 2) throw DataError("bracket must be a pair [i, j]");
      const Span s{b[0].get<int>(), b[1].get<int>()};
      if (!s.valid_for(n))
        throw DataError("bracket [" + std::to_string(s.i) + "," + std::to_string(s.j) +
                        "] out of bounds for " + std::to_string(n) + " tokens");
      rec.brackets.insert(s);
    }
  }
  if (j.contains("links")) rec.links = j.at("links").get<std::vector<std::pair<int, int>>>();
  if (j.contains("gold") && !j.at("gold").is_null()) {
    ParsedTree parsed = read_ptb_tree(j.at("gold").get<std::string>());
    if (parsed.sentence.size() != n)
      throw DataError("gold tree has " + std::to_string(parsed.sentence.size()) +
                      " tokens, sentence has " + std::to_string(n));
    if (rec.sentence.pos.empty()) rec.sentence.pos = parsed.sentence.pos;
    rec.gold = std::move(parsed.tree);
  }
  return rec;
}

json record_to_json(const CorpusRecord& rec) {
  json j;
  j["id"] = rec.sentence.id;
  j["tokens"] = rec.sentence.tokens;
  json brackets = json::array();
  for (Span s : rec.brackets) brackets.push_back({s.i, s.j});
  j["brackets"] = std::move(brackets);
  if (!rec.sentence.pos.empty()) j["pos"] = rec.sentence.pos;
  if (!rec.sentence.char_spans.empty()) j["char_spans"] = rec.sentence.char_spans;
  if (!rec.links.empty()) j["links"] = rec.links;
  if (rec.gold) j["gold"] = to_bracketed(*rec.gold);
  return j;
}

}  // namespace

LoadResult load_corpus(std::istream& in) {
  LoadResult result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    try {
      result.records.push_back(record_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      result.warnings.push_back("line " + std::to_string(line_no) + ": " + e.what());
      ++result.skipped;
    }
  }
  return result;
}

LoadResult load_corpus(const std::filesystem::path& path) {
  auto in = open_input(path);
  return load_corpus(in);
}

void write_corpus(std::ostream& out, const std::vector<CorpusRecord>& records) {
  for (const auto& rec : records) out << record_to_json(rec).dump() << '\n';
}

void write_corpus(const std::filesystem::path& path, const std::vector<CorpusRecord>& records) {
  auto out = open_output(path);
  write_corpus(out, records);
}

std::vector<Span> map_answer_to_spans(std::span<const std::string> tokens,
                                      std::span<const std::string> answer) {
  std::vector<Span> out;
  if (answer.empty() || answer.size() > tokens.size()) return out;
  for (std::size_t i = 0; i + answer.size() <= tokens.size(); ++i)
    if (std::equal(answer.begin(), answer.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i)))
      out.push_back({static_cast<int>(i), static_cast<int>(i + answer.size())});
  return out;
}

Span map_hyperlink_to_span(const Sentence& sentence, std::pair<int, int> link) {
  const auto& offsets = sentence.char_spans;
  if (offsets.empty())
    throw DataError("sentence '" + sentence.id + "' has no character offsets");
  const auto [begin, end] = link;
  if (end <= begin) throw DataError("empty hyperlink range");
  int first = -1, last = -1;
  for (int t = 0; t < static_cast<int>(offsets.size()); ++t) {
    const auto [tb, te] = offsets[t];
    if (tb < end && begin < te) {
      if (first < 0) first = t;
      last = t;
    }
  }
  if (first < 0)
    throw DataError("hyperlink [" + std::to_string(begin) + "," + std::to_string(end) +
                    ") overlaps no token of '" + sentence.id + "'");
  return {first, last + 1};
}

std::vector<CorpusRecord> filter_wiki_sentences(std::vector<CorpusRecord> records,
                                                int max_length) {
  std::erase_if(records, [max_length](const CorpusRecord& rec) {
    if (rec.sentence.size() > max_length) return true;
    return std::none_of(rec.brackets.begin(), rec.brackets.end(),
                        [](Span s) { return s.width() >= 2; });
  });
  return records;
}

std::vector<CorpusRecord> extract_hyperlink_brackets(std::vector<CorpusRecord> records,
                                                     std::vector<std::string>* warnings) {
  for (auto& rec : records) {
    for (const auto& link : rec.links) {
      try {
        rec.brackets.insert(map_hyperlink_to_span(rec.sentence, link));
      } catch (const DataError& e) {
        if (warnings) warnings->push_back(e.what());
      }
    }
  }
  return records;
}

// ---------------------------------------------------------------------------
// Bracketed trees

std::string base_label(std::string_view label) {
  if (label.empty() || label.front() == '-') return std::string(label);
  const auto cut = label.find_first_of("-=");
  return std::string(label.substr(0, cut));
}

namespace {

class TreeParser {
 public:
  TreeParser(std::string_view text, const PtbOptions& options)
      : text_(text), options_(options) {}

  NaryTree parse() {
    skip_ws();
    if (pos_ >= text_.size()) throw TreeParseError("empty tree text", pos_);
    NaryTree root = node();
    skip_ws();
    if (pos_ != text_.size()) throw TreeParseError("trailing characters after tree", pos_);
    return root;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool at_end() const { return pos_ >= text_.size(); }

  void expect(char c) {
    skip_ws();
    if (at_end()) throw TreeParseError(std::string("unexpected end of input, expected '") + c + "'", pos_);
    if (text_[pos_] != c)
      throw TreeParseError(std::string("expected '") + c + "'", pos_);
    ++pos_;
  }

  std::string atom() {
    skip_ws();
    const std::size_t start = pos_;
    while (!at_end() && text_[pos_] != '(' && text_[pos_] != ')' &&
           !std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    if (pos_ == start) {
      if (at_end()) throw TreeParseError("unexpected end of input", pos_);
      throw TreeParseError("expected a label or word", pos_);
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  char peek() {
    skip_ws();
    if (at_end()) throw TreeParseError("unexpected end of input", pos_);
    return text_[pos_];
  }

  NaryTree node() {
    const std::size_t open = pos_;
    expect('(');
    NaryTree t;
    if (peek() != '(') {
      if (peek() == ')') throw TreeParseError("empty node", open);
      t.label = atom();
    }
    if (peek() != '(') {
      // Preterminal: (TAG word)
      t.word = atom();
      expect(')');
      return t;
    }
    while (peek() == '(') t.children.push_back(node());
    expect(')');
    if (options_.strip_function_tags) t.label = base_label(t.label);
    return t;
  }

  std::string_view text_;
  const PtbOptions& options_;
  std::size_t pos_ = 0;
};

// Returns false when the whole subtree disappears.
bool remove_empty(NaryTree& t) {
  if (t.is_preterminal()) return t.label != "-NONE-";
  std::erase_if(t.children, [](NaryTree& c) { return !remove_empty(c); });
  return !t.children.empty();
}

void write_tree(const NaryTree& t, std::ostringstream& out) {
  out << '(' << t.label;
  if (t.is_preterminal()) {
    out << ' ' << t.word << ')';
    return;
  }
  for (const auto& c : t.children) {
    out << ' ';
    write_tree(c, out);
  }
  out << ')';
}

std::string escape_token(std::string_view tok) {
  if (tok == "(") return "-LRB-";
  if (tok == ")") return "-RRB-";
  std::string out;
  for (char c : tok) {
    if (c == '(') out += "-LRB-";
    else if (c == ')') out += "-RRB-";
    else if (std::isspace(static_cast<unsigned char>(c))) out += '_';
    else out += c;
  }
  return out.empty() ? "_" : out;
}

void write_binary(const BinaryTree& t, int node, std::span<const std::string> tokens,
                  std::string_view label, std::ostringstream& out) {
  const auto& nd = t.nodes()[node];
  out << '(' << label << ' ';
  if (nd.is_leaf()) {
    out << escape_token(tokens[nd.span.i]) << ')';
    return;
  }
  write_binary(t, nd.left, tokens, label, out);
  out << ' ';
  write_binary(t, nd.right, tokens, label, out);
  out << ')';
}

}  // namespace

ParsedTree read_ptb_tree(std::string_view text, const PtbOptions& options) {
  NaryTree root = TreeParser(text, options).parse();
  if (root.label.empty() && root.children.size() == 1) {
    NaryTree inner = std::move(root.children.front());
    root = std::move(inner);
  }
  if (options.remove_empty_elements && !remove_empty(root))
    throw TreeParseError("tree contains only empty elements", 0);
  if (root.is_preterminal()) {
    // A bare "(TAG word)" is a one-token sentence; give it a phrasal parent.
    NaryTree wrapper;
    wrapper.label = "X";
    wrapper.children.push_back(std::move(root));
    root = std::move(wrapper);
  }
  ParsedTree out;
  out.sentence.tokens = words_of(root);
  out.sentence.pos = tags_of(root);
  out.tree = std::move(root);
  return out;
}

std::vector<ParsedTree> read_tree_file(std::istream& in, const PtbOptions& options) {
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<ParsedTree> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[pos]))) {
      ++pos;
      continue;
    }
    if (text[pos] != '(') throw TreeParseError("text outside of a tree", pos);
    const std::size_t start = pos;
    int depth = 0;
    for (; pos < text.size(); ++pos) {
      if (text[pos] == '(') ++depth;
      else if (text[pos] == ')' && --depth == 0) break;
    }
    if (depth != 0) throw TreeParseError("unbalanced parentheses", text.size());
    ++pos;
    try {
      out.push_back(read_ptb_tree(std::string_view(text).substr(start, pos - start), options));
    } catch (const TreeParseError& e) {
      throw TreeParseError("tree " + std::to_string(out.size() + 1) + ": " + e.what(), start);
    }
  }
  return out;
}

std::vector<ParsedTree> read_tree_file(const std::filesystem::path& path,
                                       const PtbOptions& options) {
  auto in = open_input(path);
  return read_tree_file(in, options);
}

std::string to_bracketed(const NaryTree& tree) {
  std::ostringstream out;
  write_tree(tree, out);
  return out.str();
}

std::string to_bracketed(const BinaryTree& tree, std::span<const std::string> tokens,
                         std::string_view label) {
  if (static_cast<int>(tokens.size()) != tree.num_leaves())
    throw DataError("token count does not match tree size");
  std::ostringstream out;
  write_binary(tree, 0, tokens, label, out);
  return out.str();
}

// ---------------------------------------------------------------------------
// Statistics

StatsReport corpus_stats(const std::vector<CorpusRecord>& records) {
  StatsReport r;
  r.sentences = records.size();
  std::size_t single = 0, in_ref = 0, conflicting = 0;
  std::map<std::string, std::size_t> found;
  const bool all_gold = !records.empty() &&
                        std::all_of(records.begin(), records.end(),
                                    [](const CorpusRecord& rec) { return rec.gold.has_value(); });

  for (const auto& rec : records) {
    r.brackets += rec.brackets.size();
    for (Span b : rec.brackets)
      if (b.width() == 1) ++single;
    if (!all_gold) continue;

    const BracketSet gold = phrase_spans(*rec.gold);
    for (Span b : rec.brackets) {
      if (gold.contains(b)) ++in_ref;
      else if (gold.crosses_any(b)) ++conflicting;
    }
    const auto labeled = labeled_spans(*rec.gold);
    const std::set<LabeledSpan> unique(labeled.begin(), labeled.end());
    for (const auto& ls : unique) {
      ++r.label_counts[ls.label];
      if (rec.brackets.contains(ls.span)) ++found[ls.label];
    }
  }

  const auto pct = [&](std::size_t k) {
    return r.brackets == 0 ? 0.0 : 100.0 * static_cast<double>(k) / static_cast<double>(r.brackets);
  };
  r.brackets_per_sentence =
      r.sentences == 0 ? 0.0 : static_cast<double>(r.brackets) / static_cast<double>(r.sentences);
  r.pct_single_word = pct(single);
  r.pct_multi_word = r.brackets == 0 ? 0.0 : 100.0 - r.pct_single_word;
  if (all_gold) {
    r.pct_in_reference = pct(in_ref);
    r.pct_conflicting = pct(conflicting);
    for (const auto& [label, count] : r.label_counts)
      r.label_coverage[label] = static_cast<double>(found[label]) / static_cast<double>(count);
  }
  return r;
}

std::string format_stats(const StatsReport& r) {
  std::ostringstream out;
  out << std::fixed;
  const auto row = [&](std::string_view name, auto value, int precision) {
    out << std::left << std::setw(30) << name << std::right << std::setprecision(precision)
        << value << '\n';
  };
  row("Number of sentences", r.sentences, 0);
  row("Number of brackets", r.brackets, 0);
  row("Brackets/sentence", r.brackets_per_sentence, 2);
  row("Single word (%)", r.pct_single_word, 1);
  if (r.pct_in_reference) row("Constituent in reference (%)", *r.pct_in_reference, 1);
  if (r.pct_conflicting) row("Conflicting w/ reference (%)", *r.pct_conflicting, 1);
  if (!r.label_coverage.empty()) {
    out << "Reference phrases found in brackets (%):\n";
    for (const auto& [label, frac] : r.label_coverage) {
      out << "  " << std::left << std::setw(28) << label << std::right << std::setprecision(2)
          << 100.0 * frac << "  (of " << r.label_counts.at(label) << ")\n";
    }
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// CEMB embeddings

namespace {

constexpr char kCembMagic[4] = {'C', 'E', 'M', 'B'};
constexpr std::uint32_t kCembVersion = 1;

bool read_u32(std::istream& in, std::uint32_t& value) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) return false;
  value = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
          (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  return true;
}

void write_u32(std::ostream& out, std::uint32_t value) {
  for (int k = 0; k < 4; ++k) out.put(static_cast<char>((value >> (8 * k)) & 0xFF));
}

}  // namespace

EmbeddingFile read_cemb(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kCembMagic, 4) != 0)
    throw DataError("not a CEMB file (bad magic)");
  std::uint32_t version = 0;
  EmbeddingFile file;
  if (!read_u32(in, version) || !read_u32(in, file.dim)) throw DataError("truncated CEMB header");
  if (version != kCembVersion) throw DataError("unsupported CEMB version " + std::to_string(version));
  if (file.dim == 0) throw DataError("CEMB dim must be positive");

  std::uint32_t count = 0;
  while (read_u32(in, count)) {
    Matrix m(static_cast<int>(count), static_cast<int>(file.dim));
    for (double& v : m.data) {
      std::uint32_t bits = 0;
      if (!read_u32(in, bits))
        throw DataError("truncated CEMB record " + std::to_string(file.sentences.size()));
      v = static_cast<double>(std::bit_cast<float>(bits));
    }
    file.sentences.push_back(std::move(m));
  }
  if (in.gcount() != 0) throw DataError("truncated CEMB record header");
  return file;
}

EmbeddingFile read_cemb(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_cemb(in);
}

void write_cemb(std::ostream& out, const EmbeddingFile& file) {
  out.write(kCembMagic, 4);
  write_u32(out, kCembVersion);
  write_u32(out, file.dim);
  for (const auto& m : file.sentences) {
    if (m.cols != static_cast<int>(file.dim)) throw DataError("CEMB matrix width mismatch");
    write_u32(out, static_cast<std::uint32_t>(m.rows));
    for (double v : m.data) write_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
}

void write_cemb(const std::filesystem::path& path, const EmbeddingFile& file) {
  auto out = open_output(path);
  write_cemb(out, file);
}

void check_alignment(const std::vector<CorpusRecord>& records, const EmbeddingFile& file) {
  if (records.size() != file.sentences.size())
    throw ConfigError("embedding file has " + std::to_string(file.sentences.size()) +
                      " sentences, corpus has " + std::to_string(records.size()));
  for (std::size_t k = 0; k < records.size(); ++k)
    if (file.sentences[k].rows != records[k].sentence.size())
      throw ConfigError("embedding/corpus token count mismatch at sentence " + std::to_string(k) +
                        " ('" + records[k].sentence.id + "'): " +
                        std::to_string(file.sentences[k].rows) + " vs " +
                        std::to_string(records[k].sentence.size()));
}

// ---------------------------------------------------------------------------
// QA-SRL

std::vector<QasrlSentence> read_qasrl(std::istream& in) {
  std::vector<QasrlSentence> out;
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&](bool allow_eof) -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!is_blank(line)) return true;
    }
    if (!allow_eof) throw DataError("QA-SRL: unexpected end of file after line " + std::to_string(line_no));
    return false;
  };
  auto fields = [](const std::string& s) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
      const auto tab = s.find('\t', start);
      parts.push_back(s.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    return parts;
  };
  auto to_int = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(s, &used);
      if (used != s.size() || v < 0) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw DataError("QA-SRL line " + std::to_string(line_no) + ": expected a count, got '" + s + "'");
    }
  };

  while (next_line(true)) {
    const auto header = fields(line);
    if (header.size() < 2)
      throw DataError("QA-SRL line " + std::to_string(line_no) + ": expected '<id>\\t<predicates>'");
    QasrlSentence sent;
    sent.id = header[0];
    const int predicates = to_int(header[1]);
    next_line(false);
    sent.tokens = split_ws(line);
    for (int p = 0; p < predicates; ++p) {
      next_line(false);
      const auto pred = fields(line);
      if (pred.size() < 3)
        throw DataError("QA-SRL line " + std::to_string(line_no) + ": expected '<index>\\t<word>\\t<questions>'");
      const int questions = to_int(pred[2]);
      for (int q = 0; q < questions; ++q) {
        next_line(false);
        const auto qa = fields(line);
        std::string_view answers = qa.back();
        std::size_t start = 0;
        for (;;) {
          const auto sep = answers.find("###", start);
          auto toks = split_ws(answers.substr(start, sep == std::string_view::npos ? sep : sep - start));
          if (!toks.empty()) sent.answers.push_back(std::move(toks));
          if (sep == std::string_view::npos) break;
          start = sep + 3;
        }
      }
    }
    out.push_back(std::move(sent));
  }
  return out;
}

std::vector<CorpusRecord> qasrl_to_records(const std::vector<QasrlSentence>& sentences,
                                           AnswerMappingStats* stats) {
  std::vector<CorpusRecord> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) {
    CorpusRecord rec;
    rec.sentence.id = s.id;
    rec.sentence.tokens = s.tokens;
    for (const auto& answer : s.answers) {
      const auto spans = map_answer_to_spans(s.tokens, answer);
      if (stats) {
        ++stats->answers;
        if (spans.empty()) ++stats->discarded;
      }
      for (Span sp : spans) rec.brackets.insert(sp);
    }
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace brackind
