#include "bsc/scheme.hpp"

#include <stdexcept>
#include <unordered_set>

namespace bsc {

LabelScheme::LabelScheme(std::vector<std::string> span_types)
    : span_types_(std::move(span_types)) {
  if (span_types_.empty()) {
    throw std::invalid_argument("label scheme needs at least one span type");
  }
  std::unordered_set<std::string> seen;
  for (const auto& t : span_types_) {
    if (t.empty()) {
      throw std::invalid_argument("empty span type name");
    }
    if (!seen.insert(t).second) {
      throw std::invalid_argument("duplicate span type: " + t);
    }
  }

  labels_.push_back("O");
  for (const auto& t : span_types_) {
    labels_.push_back("B-" + t);
    labels_.push_back("I-" + t);
  }

  const int types = num_types();
  for (int y = 0; y < types; ++y) {
    disallowed_.emplace(kOutside, inside_label(y));
    for (int x = 0; x < types; ++x) {
      if (x == y) continue;
      disallowed_.emplace(begin_label(x), inside_label(y));
      disallowed_.emplace(inside_label(x), inside_label(y));
    }
  }
}

const std::string& LabelScheme::label_name(Label l) const {
  if (!is_valid(l)) {
    throw std::invalid_argument("label index out of range: " + std::to_string(l));
  }
  return labels_[static_cast<size_t>(l)];
}

Label LabelScheme::label_index(std::string_view name) const {
  for (size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == name) return static_cast<Label>(i);
  }
  throw std::invalid_argument("unknown label: " + std::string(name));
}

bool LabelScheme::is_disallowed(Label from, Label to) const {
  if (from == kNoLabel) from = kOutside;
  if (!is_inside(to)) return false;
  return type_of(from) != type_of(to);
}

void LabelScheme::check(const LabelSequence& seq) const {
  for (Label l : seq) {
    if (!is_valid(l)) {
      throw std::invalid_argument("label index out of range: " + std::to_string(l));
    }
  }
}

int LabelScheme::count_invalid_transitions(const LabelSequence& seq) const {
  int count = 0;
  Label prev = kOutside;
  for (Label l : seq) {
    if (is_disallowed(prev, l)) ++count;
    prev = l;
  }
  return count;
}

LabelScheme expand_scheme(const std::vector<std::string>& span_types) {
  return LabelScheme(span_types);
}

DecodedSpans spans_from_labels(const LabelSequence& seq, const LabelScheme& scheme) {
  scheme.check(seq);
  DecodedSpans out;
  int open_start = -1;
  int open_type = -1;
  auto close = [&](int pos) {
    if (open_start >= 0) {
      out.spans.push_back(Span{open_start, pos, open_type});
    }
    open_start = -1;
    open_type = -1;
  };

  for (int pos = 0; pos < static_cast<int>(seq.size()); ++pos) {
    const Label l = seq[static_cast<size_t>(pos)];
    if (l == kOutside) {
      close(pos);
    } else if (scheme.is_begin(l)) {
      close(pos);
      open_start = pos;
      open_type = scheme.type_of(l);
    } else if (open_start < 0 || open_type != scheme.type_of(l)) {
      close(pos);
      out.invalid_positions.push_back(pos);
      open_start = pos;
      open_type = scheme.type_of(l);
    }
  }
  close(static_cast<int>(seq.size()));
  return out;
}

LabelSequence labels_from_spans(const std::vector<Span>& spans, int length,
                                const LabelScheme& scheme) {
  LabelSequence seq(static_cast<size_t>(length), kOutside);
  for (const Span& s : spans) {
    if (s.start < 0 || s.end > length || s.start >= s.end) {
      throw std::invalid_argument("span out of range");
    }
    seq[static_cast<size_t>(s.start)] = scheme.begin_label(s.type);
    for (int i = s.start + 1; i < s.end; ++i) {
      seq[static_cast<size_t>(i)] = scheme.inside_label(s.type);
    }
  }
  return seq;
}

}  // namespace bsc
