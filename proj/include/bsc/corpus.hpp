#pragma once

#include "bsc/scheme.hpp"
#include "bsc/types.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace bsc {

struct Document {
  std::string id;
  std::vector<int> tokens;

  int length() const { return static_cast<int>(tokens.size()); }
};

class Corpus {
 public:
  Corpus() = default;

  /// Interns `token` and returns its id.
  int intern(const std::string& token);
  /// Appends a document; token ids must already be in the vocabulary.
  void add_document(Document doc);

  int num_docs() const { return static_cast<int>(docs_.size()); }
  int vocab_size() const { return static_cast<int>(vocab_.size()); }
  int total_tokens() const;
  const Document& doc(int n) const { return docs_.at(static_cast<size_t>(n)); }
  const std::vector<Document>& docs() const { return docs_; }
  const std::string& token_string(int id) const { return vocab_.at(static_cast<size_t>(id)); }
  std::optional<int> find_doc(const std::string& id) const;

 private:
  std::vector<Document> docs_;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, int> vocab_index_;
  std::unordered_map<std::string, int> doc_index_;
};

struct Annotation {
  int annotator = 0;
  LabelSequence labels;
};

/// Sparse (document, annotator) -> label sequence map.
class AnnotationSet {
 public:
  AnnotationSet() = default;
  AnnotationSet(int num_annotators, int num_docs)
      : num_annotators_(num_annotators), by_doc_(static_cast<size_t>(num_docs)) {}

  int num_annotators() const { return num_annotators_; }
  int num_docs() const { return static_cast<int>(by_doc_.size()); }
  /// Number of stored (document, annotator) entries.
  int size() const;

  /// Adds or replaces annotator k's labels for document n.
  void set(int doc, int annotator, LabelSequence labels);
  bool contains(int doc, int annotator) const;
  const LabelSequence* find(int doc, int annotator) const;
  /// Entries for one document, ordered by annotator.
  const std::vector<Annotation>& for_doc(int doc) const {
    return by_doc_.at(static_cast<size_t>(doc));
  }

  /// Throws std::invalid_argument when lengths or labels disagree with the
  /// corpus and scheme.
  void validate(const Corpus& corpus, const LabelScheme& scheme) const;

 private:
  int num_annotators_ = 0;
  std::vector<std::vector<Annotation>> by_doc_;
};

/// Gold sequences for a subset of documents, keyed by document index.
struct GoldLabels {
  std::vector<std::optional<LabelSequence>> sequences;

  bool has(int doc) const {
    return doc >= 0 && doc < static_cast<int>(sequences.size()) &&
           sequences[static_cast<size_t>(doc)].has_value();
  }
  const LabelSequence& at(int doc) const { return *sequences.at(static_cast<size_t>(doc)); }
  int count() const;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& path, int line, const std::string& what)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct CrowdData {
  Corpus corpus;
  AnnotationSet annotations;
};

/// Reads the tab-separated crowd file: `doc_id token a_1 ... a_K` per row,
/// blank lines between documents, `-` for a missing label.
CrowdData load_crowd_annotations(const std::filesystem::path& path, const LabelScheme& scheme);
void write_crowd_annotations(const std::filesystem::path& path, const Corpus& corpus,
                             const AnnotationSet& annotations, const LabelScheme& scheme);

/// Reads a CoNLL-style label file. Rows are `token label` (documents in
/// corpus order, all present) or `doc_id token label` (any subset of
/// documents, keyed by id).
GoldLabels load_gold(const std::filesystem::path& path, const Corpus& corpus,
                     const LabelScheme& scheme);
struct LabelledData {
  Corpus corpus;
  GoldLabels labels;
};

/// Builds a corpus from a keyed three-column label file and returns its
/// labels alongside it (every document labelled).
LabelledData load_labelled(const std::filesystem::path& path, const LabelScheme& scheme);

/// Writes the keyed three-column form.
void write_gold(const std::filesystem::path& path, const Corpus& corpus, const GoldLabels& gold,
                const LabelScheme& scheme);

}  // namespace bsc
