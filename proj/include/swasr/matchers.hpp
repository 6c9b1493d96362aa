#pragma once

#include "swasr/error.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace swasr {

/// Closed set of target words. Entries are NFC-normalized and case-folded;
/// order is preserved and is the tie-break authority for every matcher.
class Vocabulary {
 public:
  /// Throws VocabularyError on an empty list or duplicates after folding.
  explicit Vocabulary(const std::vector<std::string>& words);

  /// UTF-8, one word per line; '#' starts a comment.
  static Vocabulary load(const std::filesystem::path& path);

  const std::vector<std::string>& words() const { return words_; }
  std::size_t size() const { return words_.size(); }
  const std::string& operator[](std::size_t i) const { return words_[i]; }

  /// Index of an already folded word, if present.
  std::optional<std::size_t> find(std::string_view folded) const;
  bool contains(std::string_view folded) const { return find(folded).has_value(); }

  const std::u32string& code_points(std::size_t i) const { return code_points_[i]; }

 private:
  std::vector<std::string> words_;
  std::vector<std::u32string> code_points_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// The seven pipeline variants, in reporting order.
enum class MatchMode {
  hybrid_raw,
  cosine,
  levenshtein,
  llm,
  cosine_context,
  llm_context,
  llm_context_fewshot,
};

inline constexpr MatchMode kAllModes[] = {
    MatchMode::hybrid_raw,     MatchMode::cosine,      MatchMode::levenshtein,         MatchMode::llm,
    MatchMode::cosine_context, MatchMode::llm_context, MatchMode::llm_context_fewshot,
};

/// "hybrid-raw", "cosine", "levenshtein", "llm", "cosine+context", ...
std::string mode_name(MatchMode mode);
/// Table labels: "Hybrid", "CS", "LS", "LLM", "CS+C", "LLM+C", "LLM+C+FS".
std::string mode_label(MatchMode mode);
/// Accepts either spelling, case-insensitively, spaces ignored.
MatchMode parse_mode(std::string_view text);
bool is_llm_mode(MatchMode mode);

struct MatchDecision {
  std::string word;
  /// Mode-specific: edit distance for levenshtein (lower is better),
  /// cosine for cosine modes, 1/0 for llm modes (1 = reply matched directly).
  double score = 0.0;
  MatchMode mode = MatchMode::levenshtein;
  std::string raw_transcript;
  double latency_ms = 0.0;
  /// The reply or hypothesis needed projection onto the vocabulary.
  bool fallback_used = false;
  /// A backing service failed and a cheaper matcher answered instead.
  bool degraded = false;
  std::string note;
};

std::size_t levenshtein(std::string_view a, std::string_view b);

MatchDecision match_levenshtein(std::string_view transcript, const Vocabulary& vocab);

/// Any text -> unit-norm vector of fixed dimension; deterministic per text.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual Eigen::VectorXd embed(std::string_view text) const = 0;
  virtual Eigen::Index dimension() const = 0;
};

/// Hashed character-trigram bag with word-boundary markers, signed hashing
/// into `dim` buckets, L2-normalized. Text with no trigram mass maps to e_0.
Eigen::VectorXd embed_char_ngrams(std::string_view text, Eigen::Index dim = 256);

class CharNgramEmbedder final : public EmbeddingProvider {
 public:
  explicit CharNgramEmbedder(Eigen::Index dim = 256) : dim_(dim) {}
  Eigen::VectorXd embed(std::string_view text) const override { return embed_char_ngrams(text, dim_); }
  Eigen::Index dimension() const override { return dim_; }

 private:
  Eigen::Index dim_;
};

/// u.v / (|u||v|). Throws ZeroVector if either norm is zero.
template <typename DerivedU, typename DerivedV>
typename DerivedU::Scalar cosine(const Eigen::MatrixBase<DerivedU>& u, const Eigen::MatrixBase<DerivedV>& v);

/// Cosine matcher with the vocabulary embeddings computed once, at construction.
/// A non-empty context is joined (single space) in front of both the transcript
/// and every candidate before embedding.
class CosineMatcher {
 public:
  CosineMatcher(const Vocabulary& vocab, std::shared_ptr<const EmbeddingProvider> provider, std::string context = {});

  MatchDecision match(std::string_view transcript) const;
  const std::string& context() const { return context_; }

 private:
  Vocabulary vocab_;
  std::shared_ptr<const EmbeddingProvider> provider_;
  std::string context_;
  Eigen::MatrixXd candidates_;  // one unit column per vocabulary word
};

MatchDecision match_cosine(std::string_view transcript, const Vocabulary& vocab, const EmbeddingProvider& provider);
MatchDecision match_cosine_context(std::string_view transcript, const Vocabulary& vocab, std::string_view context,
                                   const EmbeddingProvider& provider);

/// Exact fold match, then the first whitespace token (punctuation stripped)
/// that matches, then the Levenshtein winner.
std::string project_to_vocab(std::string_view text, const Vocabulary& vocab);

// ---------------------------------------------------------------------------

template <typename DerivedU, typename DerivedV>
typename DerivedU::Scalar cosine(const Eigen::MatrixBase<DerivedU>& u, const Eigen::MatrixBase<DerivedV>& v) {
  using Scalar = typename DerivedU::Scalar;
  const Scalar nu = u.norm();
  const Scalar nv = v.norm();
  if (!(nu > Scalar(0)) || !(nv > Scalar(0))) throw ZeroVector("cosine of a zero-norm vector");
  return std::clamp(u.dot(v) / (nu * nv), Scalar(-1), Scalar(1));
}

}  // namespace swasr
