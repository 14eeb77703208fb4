#pragma once

#include "bsc/types.hpp"

#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bsc {

/// The BIO label universe for a task.
///
/// Labels are ordered O, B-x1, I-x1, B-x2, I-x2, ... so label 0 is always O,
/// B of type t sits at 1 + 2t and I of type t at 2 + 2t.
class LabelScheme {
 public:
  explicit LabelScheme(std::vector<std::string> span_types);

  int num_labels() const { return static_cast<int>(labels_.size()); }
  int num_types() const { return static_cast<int>(span_types_.size()); }
  const std::vector<std::string>& span_types() const { return span_types_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label_name(Label l) const;

  /// Throws std::invalid_argument for an unknown label string.
  Label label_index(std::string_view name) const;

  Label begin_label(int type) const { return 1 + 2 * type; }
  Label inside_label(int type) const { return 2 + 2 * type; }
  bool is_begin(Label l) const { return l > 0 && l % 2 == 1; }
  bool is_inside(Label l) const { return l > 0 && l % 2 == 0; }
  /// Span type of a B or I label; -1 for O.
  int type_of(Label l) const { return l == kOutside ? -1 : (l - 1) / 2; }

  bool is_disallowed(Label from, Label to) const;
  const std::set<std::pair<Label, Label>>& disallowed() const { return disallowed_; }
  bool is_valid(Label l) const { return l >= 0 && l < num_labels(); }

  /// Throws std::invalid_argument if any label is out of range.
  void check(const LabelSequence& seq) const;
  /// Number of disallowed transitions, treating the document start as O.
  int count_invalid_transitions(const LabelSequence& seq) const;

 private:
  std::vector<std::string> span_types_;
  std::vector<std::string> labels_;
  std::set<std::pair<Label, Label>> disallowed_;
};

/// Builds the BIO scheme for the given span types. Names must be unique and
/// the list non-empty.
LabelScheme expand_scheme(const std::vector<std::string>& span_types);

struct Span {
  int start = 0;  // inclusive
  int end = 0;    // exclusive
  int type = 0;

  int length() const { return end - start; }
  friend bool operator==(const Span&, const Span&) = default;
};

struct DecodedSpans {
  std::vector<Span> spans;
  /// Positions where an I-x appeared without an open span of type x.
  std::vector<int> invalid_positions;
};

/// Lenient BIO decoding: an I-x with no open x span opens a new span and is
/// recorded as invalid.
DecodedSpans spans_from_labels(const LabelSequence& seq, const LabelScheme& scheme);

LabelSequence labels_from_spans(const std::vector<Span>& spans, int length,
                                const LabelScheme& scheme);

}  // namespace bsc
