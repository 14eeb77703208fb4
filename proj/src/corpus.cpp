#include "bsc/corpus.hpp"

#include "bsc/output.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace bsc {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> cols;
  size_t start = 0;
  while (true) {
    const size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      cols.push_back(line.substr(start));
      break;
    }
    cols.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return cols;
}

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

int Corpus::intern(const std::string& token) {
  auto [it, inserted] = vocab_index_.emplace(token, static_cast<int>(vocab_.size()));
  if (inserted) vocab_.push_back(token);
  return it->second;
}

void Corpus::add_document(Document doc) {
  if (doc.tokens.empty()) {
    throw std::invalid_argument("document " + doc.id + " is empty");
  }
  for (int t : doc.tokens) {
    if (t < 0 || t >= vocab_size()) {
      throw std::invalid_argument("token id out of range in document " + doc.id);
    }
  }
  if (!doc_index_.emplace(doc.id, num_docs()).second) {
    throw std::invalid_argument("duplicate document id " + doc.id);
  }
  docs_.push_back(std::move(doc));
}

int Corpus::total_tokens() const {
  int total = 0;
  for (const auto& d : docs_) total += d.length();
  return total;
}

std::optional<int> Corpus::find_doc(const std::string& id) const {
  auto it = doc_index_.find(id);
  if (it == doc_index_.end()) return std::nullopt;
  return it->second;
}

int AnnotationSet::size() const {
  int total = 0;
  for (const auto& d : by_doc_) total += static_cast<int>(d.size());
  return total;
}

void AnnotationSet::set(int doc, int annotator, LabelSequence labels) {
  if (doc < 0 || doc >= num_docs()) {
    throw std::invalid_argument("annotation for unknown document " + std::to_string(doc));
  }
  if (annotator < 0 || annotator >= num_annotators_) {
    throw std::invalid_argument("annotator index out of range: " + std::to_string(annotator));
  }
  auto& entries = by_doc_[static_cast<size_t>(doc)];
  auto it = std::lower_bound(entries.begin(), entries.end(), annotator,
                             [](const Annotation& a, int k) { return a.annotator < k; });
  if (it != entries.end() && it->annotator == annotator) {
    it->labels = std::move(labels);
  } else {
    entries.insert(it, Annotation{annotator, std::move(labels)});
  }
}

const LabelSequence* AnnotationSet::find(int doc, int annotator) const {
  const auto& entries = by_doc_.at(static_cast<size_t>(doc));
  auto it = std::lower_bound(entries.begin(), entries.end(), annotator,
                             [](const Annotation& a, int k) { return a.annotator < k; });
  if (it != entries.end() && it->annotator == annotator) return &it->labels;
  return nullptr;
}

bool AnnotationSet::contains(int doc, int annotator) const {
  return find(doc, annotator) != nullptr;
}

void AnnotationSet::validate(const Corpus& corpus, const LabelScheme& scheme) const {
  if (num_docs() != corpus.num_docs()) {
    throw std::invalid_argument("annotation set and corpus disagree on document count");
  }
  for (int n = 0; n < num_docs(); ++n) {
    for (const auto& a : for_doc(n)) {
      if (static_cast<int>(a.labels.size()) != corpus.doc(n).length()) {
        throw std::invalid_argument("annotation length mismatch in document " +
                                    corpus.doc(n).id);
      }
      scheme.check(a.labels);
    }
  }
}

int GoldLabels::count() const {
  return static_cast<int>(
      std::count_if(sequences.begin(), sequences.end(), [](const auto& s) { return s.has_value(); }));
}

CrowdData load_crowd_annotations(const std::filesystem::path& path, const LabelScheme& scheme) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  const std::string name = path.string();

  struct Row {
    int line;
    std::vector<std::string> cols;
  };
  std::vector<std::vector<Row>> blocks;
  std::vector<Row> current;
  int columns = -1;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (is_blank(line)) {
      if (!current.empty()) blocks.push_back(std::move(current));
      current.clear();
      continue;
    }
    auto cols = split_tabs(line);
    if (cols.size() < 3) {
      throw ParseError(name, line_no, "expected doc_id, token and at least one annotator column");
    }
    if (columns < 0) {
      columns = static_cast<int>(cols.size());
    } else if (static_cast<int>(cols.size()) != columns) {
      throw ParseError(name, line_no,
                       "expected " + std::to_string(columns) + " columns, found " +
                           std::to_string(cols.size()));
    }
    current.push_back(Row{line_no, std::move(cols)});
  }
  if (!current.empty()) blocks.push_back(std::move(current));
  if (blocks.empty()) {
    throw ParseError(name, line_no, "no documents");
  }

  const int num_annotators = columns - 2;
  CrowdData data;
  std::vector<std::vector<std::optional<LabelSequence>>> labels(blocks.size());

  for (size_t b = 0; b < blocks.size(); ++b) {
    const auto& rows = blocks[b];
    Document doc;
    doc.id = rows.front().cols[0];
    std::vector<LabelSequence> seqs(static_cast<size_t>(num_annotators));
    std::vector<int> present(static_cast<size_t>(num_annotators), 0);
    for (const auto& row : rows) {
      if (row.cols[0] != doc.id) {
        throw ParseError(name, row.line,
                         "document id changed from " + doc.id + " to " + row.cols[0] +
                             " without a blank line");
      }
      doc.tokens.push_back(data.corpus.intern(row.cols[1]));
      for (int k = 0; k < num_annotators; ++k) {
        const std::string& cell = row.cols[static_cast<size_t>(k + 2)];
        if (cell == "-") continue;
        Label l;
        try {
          l = scheme.label_index(cell);
        } catch (const std::invalid_argument&) {
          throw ParseError(name, row.line, "unknown label '" + cell + "'");
        }
        seqs[static_cast<size_t>(k)].push_back(l);
        ++present[static_cast<size_t>(k)];
      }
    }
    labels[b].resize(static_cast<size_t>(num_annotators));
    for (int k = 0; k < num_annotators; ++k) {
      const int count = present[static_cast<size_t>(k)];
      if (count == 0) continue;
      if (count != doc.length()) {
        throw ParseError(name, rows.back().line,
                         "annotator " + std::to_string(k + 1) + " labelled only part of document " +
                             doc.id);
      }
      labels[b][static_cast<size_t>(k)] = std::move(seqs[static_cast<size_t>(k)]);
    }
    try {
      data.corpus.add_document(std::move(doc));
    } catch (const std::invalid_argument& e) {
      throw ParseError(name, rows.front().line, e.what());
    }
  }

  data.annotations = AnnotationSet(num_annotators, data.corpus.num_docs());
  for (size_t b = 0; b < labels.size(); ++b) {
    for (int k = 0; k < num_annotators; ++k) {
      auto& seq = labels[b][static_cast<size_t>(k)];
      if (seq) data.annotations.set(static_cast<int>(b), k, std::move(*seq));
    }
  }
  return data;
}

void write_crowd_annotations(const std::filesystem::path& path, const Corpus& corpus,
                             const AnnotationSet& annotations, const LabelScheme& scheme) {
  write_file_atomic(path, [&](std::ostream& out) {
    for (int n = 0; n < corpus.num_docs(); ++n) {
      if (n > 0) out << '\n';
      const Document& doc = corpus.doc(n);
      std::vector<const LabelSequence*> seqs;
      for (int k = 0; k < annotations.num_annotators(); ++k) {
        seqs.push_back(annotations.find(n, k));
      }
      for (int t = 0; t < doc.length(); ++t) {
        out << doc.id << '\t' << corpus.token_string(doc.tokens[static_cast<size_t>(t)]);
        for (const auto* seq : seqs) {
          out << '\t' << (seq ? scheme.label_name((*seq)[static_cast<size_t>(t)]) : "-");
        }
        out << '\n';
      }
    }
  });
}

GoldLabels load_gold(const std::filesystem::path& path, const Corpus& corpus,
                     const LabelScheme& scheme) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  const std::string name = path.string();
  GoldLabels gold;
  gold.sequences.resize(static_cast<size_t>(corpus.num_docs()));

  int columns = -1;
  int next_doc = 0;
  std::string doc_id;
  std::vector<std::string> tokens;
  LabelSequence seq;
  int block_line = 0;

  auto flush = [&](int line_no) {
    if (tokens.empty()) return;
    int n;
    if (columns == 3) {
      auto found = corpus.find_doc(doc_id);
      if (!found) throw ParseError(name, block_line, "unknown document id " + doc_id);
      n = *found;
    } else {
      if (next_doc >= corpus.num_docs()) {
        throw ParseError(name, block_line, "more documents than the crowd file");
      }
      n = next_doc++;
    }
    const Document& doc = corpus.doc(n);
    if (static_cast<int>(seq.size()) != doc.length()) {
      throw ParseError(name, line_no, "length mismatch for document " + doc.id);
    }
    for (int t = 0; t < doc.length(); ++t) {
      if (tokens[static_cast<size_t>(t)] != corpus.token_string(doc.tokens[static_cast<size_t>(t)])) {
        throw ParseError(name, block_line + t, "token mismatch in document " + doc.id);
      }
    }
    if (gold.sequences[static_cast<size_t>(n)]) {
      throw ParseError(name, block_line, "document " + doc.id + " appears twice");
    }
    gold.sequences[static_cast<size_t>(n)] = std::move(seq);
    tokens.clear();
    seq.clear();
  };

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (is_blank(line)) {
      flush(line_no);
      continue;
    }
    auto cols = split_tabs(line);
    if (columns < 0) {
      if (cols.size() != 2 && cols.size() != 3) {
        throw ParseError(name, line_no, "expected 2 or 3 tab-separated columns");
      }
      columns = static_cast<int>(cols.size());
    } else if (static_cast<int>(cols.size()) != columns) {
      throw ParseError(name, line_no, "inconsistent column count");
    }
    if (tokens.empty()) {
      block_line = line_no;
      if (columns == 3) doc_id = cols[0];
    } else if (columns == 3 && cols[0] != doc_id) {
      throw ParseError(name, line_no, "document id changed without a blank line");
    }
    tokens.push_back(cols[static_cast<size_t>(columns - 2)]);
    try {
      seq.push_back(scheme.label_index(cols[static_cast<size_t>(columns - 1)]));
    } catch (const std::invalid_argument&) {
      throw ParseError(name, line_no, "unknown label '" + cols.back() + "'");
    }
  }
  flush(line_no);
  if (columns == 2 && next_doc != corpus.num_docs()) {
    throw ParseError(name, line_no, "fewer documents than the crowd file");
  }
  return gold;
}

LabelledData load_labelled(const std::filesystem::path& path, const LabelScheme& scheme) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  const std::string name = path.string();
  LabelledData data;
  std::string doc_id;
  std::vector<int> tokens;
  auto flush = [&](int line_no) {
    if (tokens.empty()) return;
    try {
      data.corpus.add_document(Document{doc_id, std::move(tokens)});
    } catch (const std::invalid_argument& e) {
      throw ParseError(name, line_no, e.what());
    }
    tokens.clear();
  };

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (is_blank(line)) {
      flush(line_no);
      continue;
    }
    auto cols = split_tabs(line);
    if (cols.size() != 3) {
      throw ParseError(name, line_no, "expected doc_id, token and label columns");
    }
    if (tokens.empty()) {
      doc_id = cols[0];
    } else if (cols[0] != doc_id) {
      throw ParseError(name, line_no, "document id changed without a blank line");
    }
    tokens.push_back(data.corpus.intern(cols[1]));
  }
  flush(line_no);
  data.labels = load_gold(path, data.corpus, scheme);
  return data;
}

void write_gold(const std::filesystem::path& path, const Corpus& corpus, const GoldLabels& gold,
                const LabelScheme& scheme) {
  write_file_atomic(path, [&](std::ostream& out) {
    bool first = true;
    for (int n = 0; n < corpus.num_docs(); ++n) {
      if (!gold.has(n)) continue;
      if (!first) out << '\n';
      first = false;
      const Document& doc = corpus.doc(n);
      const auto& seq = gold.at(n);
      for (int t = 0; t < doc.length(); ++t) {
        out << doc.id << '\t' << corpus.token_string(doc.tokens[static_cast<size_t>(t)]) << '\t'
            << scheme.label_name(seq[static_cast<size_t>(t)]) << '\n';
      }
    }
  });
}

}  // namespace bsc
