#include "bsc/output.hpp"

#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unistd.h>

namespace bsc {

namespace fs = std::filesystem;

void write_file_atomic(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    try {
      body(out);
    } catch (...) {
      out.close();
      fs::remove(tmp);
      throw;
    }
    out.flush();
    if (!out) {
      fs::remove(tmp);
      throw std::runtime_error("write failed for " + path.string());
    }
  }
  fs::rename(tmp, path);
}

namespace {

constexpr int kPrecision = std::numeric_limits<double>::max_digits10;

void write_matrix(std::ostream& out, const MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ' ';
      out << m(i, j);
    }
    out << '\n';
  }
}

MatrixXd read_matrix(std::istream& in, Eigen::Index rows, Eigen::Index cols) {
  MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (!(in >> m(i, j))) throw std::runtime_error("model dump: truncated matrix");
    }
  }
  return m;
}

void expect(std::istream& in, const std::string& word) {
  std::string got;
  if (!(in >> got) || got != word) {
    throw std::runtime_error("model dump: expected '" + word + "', found '" + got + "'");
  }
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> cols;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, '\t')) cols.push_back(cell);
  return cols;
}

}  // namespace

void write_posteriors(const fs::path& path, const Corpus& corpus,
                      const std::vector<MatrixXd>& posteriors, const LabelScheme& scheme) {
  write_file_atomic(path, [&](std::ostream& out) {
    out << std::setprecision(kPrecision);
    out << "doc_id\tposition";
    for (const auto& l : scheme.labels()) out << '\t' << l;
    out << '\n';
    for (int n = 0; n < corpus.num_docs(); ++n) {
      const MatrixXd& r = posteriors.at(static_cast<size_t>(n));
      for (Eigen::Index t = 0; t < r.rows(); ++t) {
        out << corpus.doc(n).id << '\t' << t;
        for (Eigen::Index j = 0; j < r.cols(); ++j) out << '\t' << r(t, j);
        out << '\n';
      }
    }
  });
}

std::vector<MatrixXd> read_posteriors(const fs::path& path, const Corpus& corpus,
                                      const LabelScheme& scheme) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const std::string name = path.string();
  const int J = scheme.num_labels();
  std::string line;
  int line_no = 1;
  if (!std::getline(in, line)) throw ParseError(name, 1, "empty posterior file");
  const auto header = split_tabs(line);
  if (static_cast<int>(header.size()) != J + 2) {
    throw ParseError(name, 1, "header does not match the label scheme");
  }
  for (int j = 0; j < J; ++j) {
    if (header[static_cast<size_t>(j + 2)] != scheme.label_name(j)) {
      throw ParseError(name, 1, "header label order differs from the scheme");
    }
  }

  std::vector<MatrixXd> out(static_cast<size_t>(corpus.num_docs()));
  std::vector<int> filled(static_cast<size_t>(corpus.num_docs()), 0);
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cols = split_tabs(line);
    if (static_cast<int>(cols.size()) != J + 2) throw ParseError(name, line_no, "wrong column count");
    const auto doc = corpus.find_doc(cols[0]);
    if (!doc) throw ParseError(name, line_no, "unknown document id " + cols[0]);
    const size_t n = static_cast<size_t>(*doc);
    MatrixXd& r = out[n];
    if (r.size() == 0) r = MatrixXd::Zero(corpus.doc(*doc).length(), J);
    int t = 0;
    try {
      t = std::stoi(cols[1]);
    } catch (const std::exception&) {
      throw ParseError(name, line_no, "bad position");
    }
    if (t != filled[n] || t >= r.rows()) {
      throw ParseError(name, line_no, "positions out of order for document " + cols[0]);
    }
    for (int j = 0; j < J; ++j) {
      try {
        r(t, j) = std::stod(cols[static_cast<size_t>(j + 2)]);
      } catch (const std::exception&) {
        throw ParseError(name, line_no, "bad probability");
      }
    }
    ++filled[n];
  }
  for (int n = 0; n < corpus.num_docs(); ++n) {
    const size_t i = static_cast<size_t>(n);
    if (out[i].size() != 0 && filled[i] != corpus.doc(n).length()) {
      throw ParseError(name, line_no, "document " + corpus.doc(n).id + " is incomplete");
    }
  }
  return out;
}

void write_decoded(const fs::path& path, const Corpus& corpus,
                   const std::vector<LabelSequence>& labels, const LabelScheme& scheme) {
  write_file_atomic(path, [&](std::ostream& out) {
    for (int n = 0; n < corpus.num_docs(); ++n) {
      if (n > 0) out << '\n';
      const Document& doc = corpus.doc(n);
      const LabelSequence& seq = labels.at(static_cast<size_t>(n));
      for (int t = 0; t < doc.length(); ++t) {
        out << doc.id << '\t' << corpus.token_string(doc.tokens[static_cast<size_t>(t)]) << '\t'
            << scheme.label_name(seq.at(static_cast<size_t>(t))) << '\n';
      }
    }
  });
}

void write_scores(const fs::path& path, const ScoreReport& report, const std::string& mode) {
  write_file_atomic(path, [&](std::ostream& out) {
    out << std::setprecision(kPrecision);
    out << "mode\t" << mode << '\n';
    out << "precision\t" << report.precision << '\n';
    out << "recall\t" << report.recall << '\n';
    out << "f1\t" << report.f1 << '\n';
    if (report.cee) out << "cee\t" << *report.cee << '\n';
  });
}

void write_errors(const fs::path& path, const ErrorReport& r) {
  write_file_atomic(path, [&](std::ostream& out) {
    out << std::setprecision(kPrecision);
    out << "exact_match\t" << r.exact_match << '\n'
        << "wrong_type\t" << r.wrong_type << '\n'
        << "partial_match\t" << r.partial_match << '\n'
        << "missed_span\t" << r.missed_span << '\n'
        << "false_positive\t" << r.false_positive << '\n'
        << "late_start\t" << r.late_start << '\n'
        << "early_start\t" << r.early_start << '\n'
        << "late_finish\t" << r.late_finish << '\n'
        << "early_finish\t" << r.early_finish << '\n'
        << "fused_spans\t" << r.fused_spans << '\n'
        << "splits\t" << r.splits << '\n'
        << "invalid\t" << r.invalid << '\n'
        << "length_error\t" << r.length_error << '\n'
        << "fused_components\t" << r.fused_components << '\n'
        << "split_components\t" << r.split_components << '\n';
  });
}

std::string format_report_table(const ScoreReport& s, const ErrorReport& e,
                                const std::string& mode) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(1);
  out << "F1 mode: " << mode << "\n";
  out << "  Prec.  Rec.   F1     CEE\n";
  out << "  " << std::setw(5) << s.precision << "  " << std::setw(5) << s.recall << "  "
      << std::setw(5) << s.f1 << "  ";
  if (s.cee) {
    out << std::setprecision(3) << *s.cee << std::setprecision(1);
  } else {
    out << "-";
  }
  out << "\n\n";
  out << "  exact match     " << e.exact_match << "\n"
      << "  wrong type      " << e.wrong_type << "\n"
      << "  partial match   " << e.partial_match << "\n"
      << "  missed span     " << e.missed_span << "\n"
      << "  false +ve       " << e.false_positive << "\n"
      << "  late start      " << e.late_start << "\n"
      << "  early start     " << e.early_start << "\n"
      << "  late finish     " << e.late_finish << "\n"
      << "  early finish    " << e.early_finish << "\n"
      << "  fused spans     " << e.fused_spans << "\n"
      << "  splits          " << e.splits << "\n"
      << "  invalid         " << e.invalid << "\n"
      << std::setprecision(2) << "  length error    " << e.length_error << "\n";
  return out.str();
}

void write_curves(const fs::path& path, const std::vector<LearningCurve>& curves) {
  write_file_atomic(path, [&](std::ostream& out) {
    out << std::setprecision(kPrecision);
    out << "method,selector,iteration,labels,f1_strict,f1_relaxed,cee,accuracy\n";
    for (const auto& c : curves) {
      for (const auto& p : c.points) {
        out << c.method << ',' << c.selector << ',' << p.iteration << ',' << p.labels << ','
            << p.f1_strict << ',' << p.f1_relaxed << ',' << p.cee << ',' << p.accuracy << '\n';
      }
    }
  });
}

void write_model_dump(const fs::path& path, const ModelDump& dump) {
  write_file_atomic(path, [&](std::ostream& out) {
    out << std::setprecision(kPrecision);
    out << "bsc-model 1\n";
    out << "kind " << to_string(dump.kind) << '\n';
    out << "labels " << dump.num_labels << '\n';
    out << "annotators " << dump.annotators.size() << '\n';
    for (size_t k = 0; k < dump.annotators.size(); ++k) {
      const auto& a = dump.annotators[k];
      out << "annotator " << k << ' ' << a.prior.rows() << ' ' << a.prior.cols() << '\n';
      out << "prior\n";
      write_matrix(out, a.prior);
      out << "counts\n";
      write_matrix(out, a.counts);
      if (a.kind == ModelKind::Spam) {
        out << "spam_prior\n";
        write_matrix(out, a.spam_prior);
        out << "spam_counts\n";
        write_matrix(out, a.spam_counts);
      }
    }
    if (dump.transitions) {
      const auto& t = *dump.transitions;
      out << "transitions " << t.prior.rows() << ' ' << t.prior.cols() << '\n';
      out << "prior\n";
      write_matrix(out, t.prior);
      out << "counts\n";
      write_matrix(out, t.counts);
    }
    if (dump.observations && dump.observations->counts.size() > 0) {
      const auto& o = *dump.observations;
      out << "observations " << o.counts.rows() << ' ' << o.counts.cols() << ' ' << o.kappa0
          << '\n';
      write_matrix(out, o.counts);
    }
    out << "end\n";
  });
}

ModelDump read_model_dump(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  ModelDump dump;
  std::string word, kind;
  int version = 0;
  size_t count = 0;
  expect(in, "bsc-model");
  in >> version;
  if (version != 1) throw std::runtime_error("model dump: unsupported version");
  expect(in, "kind");
  in >> kind;
  dump.kind = parse_model_kind(kind);
  expect(in, "labels");
  in >> dump.num_labels;
  expect(in, "annotators");
  in >> count;
  for (size_t k = 0; k < count; ++k) {
    size_t index = 0;
    Eigen::Index rows = 0, cols = 0;
    expect(in, "annotator");
    in >> index >> rows >> cols;
    if (index != k) throw std::runtime_error("model dump: annotators out of order");
    AnnotatorPosterior a;
    a.kind = dump.kind;
    a.num_labels = dump.num_labels;
    expect(in, "prior");
    a.prior = read_matrix(in, rows, cols);
    expect(in, "counts");
    a.counts = read_matrix(in, rows, cols);
    if (a.kind == ModelKind::Spam) {
      expect(in, "spam_prior");
      a.spam_prior = read_matrix(in, 1, dump.num_labels);
      expect(in, "spam_counts");
      a.spam_counts = read_matrix(in, 1, dump.num_labels);
    }
    a.refresh();
    dump.annotators.push_back(std::move(a));
  }
  while (in >> word && word != "end") {
    Eigen::Index rows = 0, cols = 0;
    if (word == "transitions") {
      in >> rows >> cols;
      TransitionPosterior t;
      expect(in, "prior");
      t.prior = read_matrix(in, rows, cols);
      expect(in, "counts");
      t.counts = read_matrix(in, rows, cols);
      dump.transitions = std::move(t);
    } else if (word == "observations") {
      ObservationPosterior o;
      in >> rows >> cols >> o.kappa0;
      o.counts = read_matrix(in, rows, cols);
      dump.observations = std::move(o);
    } else {
      throw std::runtime_error("model dump: unexpected section '" + word + "'");
    }
  }
  if (word != "end") throw std::runtime_error("model dump: missing end marker");
  return dump;
}

}  // namespace bsc
